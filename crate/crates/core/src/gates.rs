//! Gate constructors: the d-point discrete Fourier transform, diagonal phase
//! gates and their integer powers, control rotations, and the multi-valued
//! controlled gate that applies `U^j` conditioned on control level `j`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};
use crate::state::UnitaryOp;

/// Reduces an angle into `[0, 2 pi)`.
pub fn reduce_phase<T: Scalar>(phi: T) -> T {
    let tau = T::TAU();
    let mut r = phi % tau;
    if r < T::zero() {
        r += tau;
    }
    if r >= tau {
        r -= tau;
    }
    r
}

/// Diagonal unitary `diag(exp(i phases[0]), ..., exp(i phases[d-1]))`.
///
/// Phases are stored reduced into `[0, 2 pi)`. Integer powers multiply the
/// phases directly instead of multiplying matrices, so they stay exact for
/// exactly representable phase arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalUnitary<T: Scalar> {
    phases: Vec<T>,
}

impl<T: Scalar> DiagonalUnitary<T> {
    pub fn new(phases: &[T]) -> Self {
        Self {
            phases: phases.iter().map(|&p| reduce_phase(p)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    /// Phases in `[0, 2 pi)`, one per level.
    pub fn phases(&self) -> &[T] {
        &self.phases
    }

    /// `self^x` via phase multiplication; `x = 0` gives the identity.
    pub fn pow(&self, x: u64) -> Self {
        let xf = real::<T>(x as f64);
        Self {
            phases: self.phases.iter().map(|&p| reduce_phase(p * xf)).collect(),
        }
    }

    pub fn to_unitary(&self) -> UnitaryOp<T> {
        let d = self.dim();
        let zero = Complex::new(T::zero(), T::zero());
        let mut entries = vec![zero; d * d];
        for (k, &p) in self.phases.iter().enumerate() {
            entries[k * d + k] = Complex::from_polar(T::one(), p);
        }
        UnitaryOp::from_entries(d, entries).expect("square by construction")
    }

    /// Multi-valued controlled gate built directly from the phases: block
    /// `j` of the result is `diag(exp(i j phases[t]))`.
    pub fn mvcg(&self, d_control: usize) -> Result<UnitaryOp<T>> {
        if d_control < 2 {
            return Err(Error::DimensionTooSmall { got: d_control });
        }
        let dt = self.dim();
        let joint = d_control * dt;
        let zero = Complex::new(T::zero(), T::zero());
        let mut entries = vec![zero; joint * joint];
        for j in 0..d_control {
            let jf = real::<T>(j as f64);
            for (t, &p) in self.phases.iter().enumerate() {
                let row = j * dt + t;
                entries[row * joint + row] = Complex::from_polar(T::one(), reduce_phase(jf * p));
            }
        }
        UnitaryOp::from_entries(joint, entries)
    }
}

/// d-point discrete Fourier transform gate.
///
/// Forward convention: entry `(k, j)` is `exp(+2 pi i j k / d) / sqrt(d)`,
/// so column `j` maps `|j>` onto the uniform superposition with phase winding
/// `j`. The inverse conjugates the exponent.
pub fn dft<T: Scalar>(d: usize, inverse: bool) -> Result<UnitaryOp<T>> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { got: d });
    }
    let inv_sqrt = real::<T>(1.0 / (d as f64).sqrt());
    let sign = if inverse { -T::one() } else { T::one() };
    let step = T::TAU() / real::<T>(d as f64);
    let mut entries = Vec::with_capacity(d * d);
    for k in 0..d {
        for j in 0..d {
            // reduce j*k mod d in integers to keep the phase argument small
            let phase = sign * step * real::<T>(((j * k) % d) as f64);
            entries.push(Complex::from_polar(inv_sqrt, phase));
        }
    }
    UnitaryOp::from_entries(d, entries)
}

/// Generalized Pauli Z: `diag(1, w, w^2, ...)` with `w = exp(2 pi i / d)`.
pub fn generalized_z<T: Scalar>(d: usize) -> Result<DiagonalUnitary<T>> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { got: d });
    }
    let step = T::TAU() / real::<T>(d as f64);
    let phases: Vec<T> = (0..d).map(|k| step * real::<T>(k as f64)).collect();
    Ok(DiagonalUnitary::new(&phases))
}

/// Control-register rotation `diag(exp(i j theta))` for `j = 0..d-1`.
///
/// Composing it after a phase kickback shifts every kickback phase by
/// `theta`, which is how iterative estimation feeds measured digits back.
pub fn phase_rotation<T: Scalar>(theta: T, d: usize) -> DiagonalUnitary<T> {
    let phases: Vec<T> = (0..d)
        .map(|j| reduce_phase(real::<T>(j as f64) * theta))
        .collect();
    DiagonalUnitary::new(&phases)
}

/// Multi-valued controlled gate `sum_j |j><j| (x) U^j` for a general unitary.
///
/// The input must pass the unitarity check. Powers are computed by repeated
/// squaring per control level.
pub fn mvcg<T: Scalar>(u: &UnitaryOp<T>, d_control: usize) -> Result<UnitaryOp<T>> {
    if d_control < 2 {
        return Err(Error::DimensionTooSmall { got: d_control });
    }
    let report = u.check_unitary();
    if !report.pass {
        return Err(Error::NotUnitary {
            max_deviation: report.max_deviation.to_f64().unwrap_or(f64::NAN),
        });
    }
    let dt = u.dim();
    let joint = d_control * dt;
    let zero = Complex::new(T::zero(), T::zero());
    let mut entries = vec![zero; joint * joint];
    for j in 0..d_control {
        let block = u.pow(j as u64);
        for r in 0..dt {
            for c in 0..dt {
                entries[(j * dt + r) * joint + (j * dt + c)] = block.entry(r, c);
            }
        }
    }
    UnitaryOp::from_entries(joint, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::QuditState;
    use num_complex::Complex64 as C64;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dft2_is_the_hadamard() {
        let h = dft::<f64>(2, false).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let want = [c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)];
        for (idx, w) in want.iter().enumerate() {
            assert!((h.entries()[idx] - w).norm() < 1e-15);
        }
    }

    #[test]
    fn dft3_matches_the_omega_matrix() {
        let f = dft::<f64>(3, false).unwrap();
        let w = C64::from_polar(1.0, TAU / 3.0);
        let s = 1.0 / 3f64.sqrt();
        for k in 0..3 {
            for j in 0..3 {
                let want = w.powu(((j * k) % 3) as u32) * s;
                assert!(
                    (f.entry(k, j) - want).norm() < 1e-15,
                    "entry ({k},{j})"
                );
            }
        }
    }

    #[test]
    fn dft_times_inverse_is_identity() {
        for d in 2..=16 {
            let f = dft::<f64>(d, false).unwrap();
            let fi = dft::<f64>(d, true).unwrap();
            let prod = f.mul(&fi);
            assert!(
                prod.max_abs_diff(&UnitaryOp::identity(d)) < 1e-12,
                "d = {d}"
            );
            assert!(f.check_unitary().pass);
        }
    }

    #[test]
    fn dft_on_ground_state_gives_uniform_superposition() {
        let f = dft::<f64>(3, false).unwrap();
        let s = QuditState::<f64>::basis(&[3], &[0]).unwrap();
        let t = f.apply(&s, 0).unwrap();
        let inv = 1.0 / 3f64.sqrt();
        for a in t.amplitudes() {
            assert!((a - c(inv, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn dft_rejects_dimension_below_two() {
        assert!(matches!(
            dft::<f64>(1, false),
            Err(Error::DimensionTooSmall { got: 1 })
        ));
        assert!(matches!(
            generalized_z::<f64>(0),
            Err(Error::DimensionTooSmall { got: 0 })
        ));
    }

    #[test]
    fn reduce_phase_lands_in_zero_tau() {
        for &x in &[-10.0, -PI, -1e-17, 0.0, 1.0, PI, TAU, TAU + 1.0, 100.0] {
            let r = reduce_phase::<f64>(x);
            assert!((0.0..TAU).contains(&r), "{x} -> {r}");
        }
        assert_eq!(reduce_phase::<f64>(-PI), PI);
        assert_eq!(reduce_phase::<f64>(TAU), 0.0);
    }

    #[test]
    fn generalized_z3_phases_are_thirds_of_tau() {
        let z = generalized_z::<f64>(3).unwrap();
        let want = [0.0, TAU / 3.0, 2.0 * TAU / 3.0];
        for (got, want) in z.phases().iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
        let z2 = generalized_z::<f64>(2).unwrap();
        let u = z2.to_unitary();
        assert!((u.entry(0, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((u.entry(1, 1) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_phases_are_reduced_on_construction() {
        let d = DiagonalUnitary::new(&[-PI, 3.0 * PI, TAU]);
        assert!((d.phases()[0] - PI).abs() < 1e-15);
        assert!((d.phases()[1] - PI).abs() < 1e-15);
        assert!(d.phases()[2].abs() < 1e-15);
    }

    #[test]
    fn cube_of_the_third_root_gate_is_the_identity() {
        let z = generalized_z::<f64>(3).unwrap();
        let cubed = z.pow(3).to_unitary();
        assert!(cubed.max_abs_diff(&UnitaryOp::identity(3)) < 1e-12);
        assert_eq!(z.pow(0).to_unitary(), UnitaryOp::identity(3));
    }

    #[test]
    fn squared_diagonal_doubles_each_phase() {
        let u2 = DiagonalUnitary::new(&[0.0, 0.351 * PI, 1.045 * PI]);
        let sq = u2.pow(2);
        assert!((sq.phases()[1] - 0.702 * PI).abs() < 1e-12);
        // 2 * 1.045 pi wraps to 0.09 pi
        assert!((sq.phases()[2] - 0.09 * PI).abs() < 1e-12);
    }

    #[test]
    fn unitary_pow_matches_diagonal_pow() {
        let u2 = DiagonalUnitary::new(&[0.0, 0.351 * PI, 1.045 * PI]);
        for x in 0..12u64 {
            let a = u2.pow(x).to_unitary();
            let b = u2.to_unitary().pow(x);
            assert!(a.max_abs_diff(&b) < 1e-12, "power {x}");
        }
    }

    #[test]
    fn phase_rotation_basics() {
        assert_eq!(
            phase_rotation::<f64>(0.0, 4).to_unitary(),
            UnitaryOp::identity(4)
        );
        let z_like = phase_rotation::<f64>(PI, 2).to_unitary();
        assert!((z_like.entry(1, 1) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn feedback_rotation_shifts_kickback_phases() {
        // kickback of 2 pi * 5/9 followed by feedback of -2 pi * 2/9 equals
        // a kickback of 2 pi / 3
        let kick = phase_rotation::<f64>(TAU * 5.0 / 9.0, 3);
        let fb = phase_rotation::<f64>(-TAU * 2.0 / 9.0, 3);
        let combined = fb.to_unitary().mul(&kick.to_unitary());
        let want = phase_rotation::<f64>(TAU / 3.0, 3).to_unitary();
        assert!(combined.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn mvcg_of_z2_is_the_controlled_z() {
        let z = generalized_z::<f64>(2).unwrap();
        let cz = mvcg(&z.to_unitary(), 2).unwrap();
        let mut want = UnitaryOp::<f64>::identity(4).entries().to_vec();
        want[15] = c(-1.0, 0.0);
        let want = UnitaryOp::from_entries(4, want).unwrap();
        assert!(cz.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn mvcg_of_identity_is_identity() {
        let u = UnitaryOp::<f64>::identity(3);
        let m = mvcg(&u, 3).unwrap();
        assert!(m.max_abs_diff(&UnitaryOp::identity(9)) < 1e-15);
    }

    #[test]
    fn mvcg_rejects_non_unitary_input() {
        let ones = UnitaryOp::from_entries(2, vec![c(1.0, 0.0); 4]).unwrap();
        assert!(matches!(mvcg(&ones, 2), Err(Error::NotUnitary { .. })));
        let z = generalized_z::<f64>(2).unwrap();
        assert!(matches!(
            mvcg(&z.to_unitary(), 1),
            Err(Error::DimensionTooSmall { got: 1 })
        ));
    }

    #[test]
    fn mvcg_direct_phase_route_matches_general_route() {
        let phases = [0.3, 1.9, 5.5, 2.2];
        let diag = DiagonalUnitary::new(&phases);
        let a = diag.mvcg(3).unwrap();
        let b = mvcg(&diag.to_unitary(), 3).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn mvcg_produces_the_kickback_superposition() {
        // (DFT (x) I) |0, t>, then the controlled gate, gives
        // (1/sqrt(3)) sum_j exp(i j theta_t) |j, t>
        let z = generalized_z::<f64>(3).unwrap();
        let f = dft::<f64>(3, false).unwrap();
        let joint = QuditState::<f64>::basis(&[3, 3], &[0, 1]).unwrap();
        let joint = f.apply(&joint, 0).unwrap();
        let joint = mvcg(&z.to_unitary(), 3).unwrap().apply_full(&joint).unwrap();
        let inv = 1.0 / 3f64.sqrt();
        for j in 0..3 {
            for t in 0..3 {
                let got = joint.amplitudes()[3 * j + t];
                let want = if t == 1 {
                    C64::from_polar(inv, TAU / 3.0 * j as f64)
                } else {
                    c(0.0, 0.0)
                };
                assert!((got - want).norm() < 1e-12, "j={j} t={t}");
            }
        }
    }

    #[test]
    fn conjugating_z_by_the_transform_gives_a_cyclic_shift() {
        for d in 2..=16 {
            let f = dft::<f64>(d, false).unwrap();
            let fi = dft::<f64>(d, true).unwrap();
            let z = generalized_z::<f64>(d).unwrap().to_unitary();
            let conj = f.mul(&z).mul(&fi);
            // expect the permutation |k> -> |k - 1 mod d|
            let zero = c(0.0, 0.0);
            let one = c(1.0, 0.0);
            for k in 0..d {
                for r in 0..d {
                    let want = if r == (k + d - 1) % d { one } else { zero };
                    assert!(
                        (conj.entry(r, k) - want).norm() < 1e-12,
                        "d={d} entry ({r},{k})"
                    );
                }
            }
        }
    }

    #[test]
    fn mvcg_commutes_with_control_diagonal_phases() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let dc = rng.gen_range(2..5);
            let dt = rng.gen_range(2..5);
            let u = crate::state::tests::random_unitary(dt, &mut rng);
            let m = mvcg(&u, dc).unwrap();
            let lam_phases: Vec<f64> = (0..dc).map(|_| rng.gen::<f64>() * TAU).collect();
            let lam = DiagonalUnitary::new(&lam_phases);
            // lam (x) I as a joint-space operator
            let joint = dc * dt;
            let mut entries = vec![c(0.0, 0.0); joint * joint];
            for j in 0..dc {
                for t in 0..dt {
                    let idx = j * dt + t;
                    entries[idx * joint + idx] = C64::from_polar(1.0, lam.phases()[j]);
                }
            }
            let lam_full = UnitaryOp::from_entries(joint, entries).unwrap();
            let ab = m.mul(&lam_full);
            let ba = lam_full.mul(&m);
            assert!(ab.max_abs_diff(&ba) < 1e-12);
        }
    }
}
