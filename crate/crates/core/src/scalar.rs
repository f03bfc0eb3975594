//! Floating-point scalar abstraction.
//!
//! Every numeric structure in this crate is generic over a real scalar type.
//! `f64` is the reference instantiation: the tolerance values documented
//! across the crate (1e-12 on norms, 1e-10 on unitarity, and so on) are the
//! `f64` ones, and the crate-root type aliases use `f64`. `f32` works too but
//! gets proportionally looser tolerances.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar type underlying states, operators, and probabilities.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + core::fmt::Debug + 'static
{
    /// Tolerance on state norms and probability sums.
    fn norm_tol() -> Self;

    /// Max-entry tolerance for the unitarity check.
    fn unitary_tol() -> Self;

    /// Bracket width for bisection root finding, also the guard around the
    /// removable singularity of the collapse-probability closed form.
    fn root_tol() -> Self;

    /// Bracket width at which golden-section phase refinement stops.
    fn fit_tol() -> Self;
}

impl Scalar for f64 {
    fn norm_tol() -> f64 {
        1e-12
    }
    fn unitary_tol() -> f64 {
        1e-10
    }
    fn root_tol() -> f64 {
        1e-9
    }
    fn fit_tol() -> f64 {
        1e-10
    }
}

impl Scalar for f32 {
    fn norm_tol() -> f32 {
        1e-5
    }
    fn unitary_tol() -> f32 {
        1e-4
    }
    fn root_tol() -> f32 {
        1e-5
    }
    fn fit_tol() -> f32 {
        1e-5
    }
}

/// Converts an `f64` constant into `T`. Panics only if `T` cannot represent
/// ordinary finite values, which no `Scalar` implementation hits.
pub(crate) fn real<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 constant must convert into Scalar")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_tolerances_are_the_documented_values() {
        assert_eq!(<f64 as Scalar>::norm_tol(), 1e-12);
        assert_eq!(<f64 as Scalar>::unitary_tol(), 1e-10);
        assert_eq!(<f64 as Scalar>::root_tol(), 1e-9);
        assert_eq!(<f64 as Scalar>::fit_tol(), 1e-10);
    }

    #[test]
    fn real_converts_constants() {
        let x: f64 = real(0.25);
        assert_eq!(x, 0.25);
        let y: f32 = real(0.25);
        assert_eq!(y, 0.25f32);
    }
}
