//! Single-round phase estimation with one control qudit.
//!
//! The circuit is: prepare the control in `|0>`, Fourier-transform it, apply
//! the multi-valued controlled gate against the target, undo the transform,
//! and read the control in the computational basis. For a target eigenstate
//! with eigenphase `phi`, outcome `n` occurs with the collapse probability
//! `C(n, phi)` exposed here in closed form.

use crate::error::{Error, Result};
use crate::gates::{self, reduce_phase};
use crate::scalar::{real, Scalar};
use crate::state::{ProbVector, QuditState, UnitaryOp};

/// Result of one estimation round.
#[derive(Debug, Clone, PartialEq)]
pub struct PeaOutcome<T: Scalar> {
    /// Control-register measurement distribution.
    pub distribution: ProbVector<T>,
    /// Most likely control outcome, ties broken toward the smallest index.
    pub readout_digit: usize,
    /// True when another outcome shares the maximum probability exactly.
    pub tie: bool,
    /// Diagnostic: phase of `<target| U^j |target>` per control level `j`,
    /// reduced into `[0, 2 pi)`. Equals `j * phi` for an eigenstate.
    pub kickback_phases: Vec<T>,
}

/// Argmax readout of a measurement distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Readout {
    pub digit: usize,
    /// Set when the maximum is attained by more than one outcome exactly.
    pub tie: bool,
}

/// Picks the most likely outcome; ties go to the smallest index and are
/// flagged. Equality is exact, which is what a tie means for the symmetric
/// distributions that produce one.
pub fn readout<T: Scalar>(dist: &ProbVector<T>) -> Readout {
    let probs = dist.probs();
    let mut digit = 0usize;
    let mut best = probs[0];
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > best {
            best = p;
            digit = i;
        }
    }
    let tie = probs
        .iter()
        .enumerate()
        .any(|(i, &p)| i != digit && p == best);
    Readout { digit, tie }
}

/// Probability that the control collapses onto `|n>` when the kickback
/// phase is `phi`:
///
/// `C(n, phi) = sin^2(d delta / 2) / (d^2 sin^2(delta / 2))`
///
/// with `delta = phi - 2 pi n / d`. The removable singularity at
/// `delta = 0 (mod 2 pi)` returns its analytic limit 1; the guard width is
/// `Scalar::root_tol()`.
pub fn collapse_probability<T: Scalar>(n: usize, phi: T, d: usize) -> Result<T> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { got: d });
    }
    if n >= d {
        return Err(Error::ProjectionOutOfRange { index: n, dim: d });
    }
    Ok(collapse_kernel(n, phi, d))
}

/// Closed-form collapse probability without argument validation; callers in
/// this crate guarantee `n < d` and `d >= 2`.
pub(crate) fn collapse_kernel<T: Scalar>(n: usize, phi: T, d: usize) -> T {
    let df = real::<T>(d as f64);
    let delta = reduce_phase(phi - T::TAU() * real::<T>(n as f64) / df);
    let dist = delta.min(T::TAU() - delta);
    if dist < T::root_tol() {
        return T::one();
    }
    let half = real::<T>(0.5);
    let num = (df * delta * half).sin();
    let den = (delta * half).sin();
    (num * num) / (df * df * den * den)
}

/// Runs one estimation round and reports the control statistics.
///
/// The target may be any normalized state whose total dimension matches the
/// unitary; superpositions of eigenstates yield the corresponding mixture of
/// collapse distributions.
pub fn run_pea<T: Scalar>(
    u: &UnitaryOp<T>,
    target: &QuditState<T>,
    d_control: usize,
) -> Result<PeaOutcome<T>> {
    run_pea_with_feedback(u, target, d_control, T::zero())
}

/// Estimation round with an extra control rotation `diag(exp(i j theta))`
/// inserted between the controlled gate and the inverse transform. Iterative
/// estimation uses it to cancel already-measured digits; `theta = 0` reduces
/// to the plain round.
pub fn run_pea_with_feedback<T: Scalar>(
    u: &UnitaryOp<T>,
    target: &QuditState<T>,
    d_control: usize,
    theta: T,
) -> Result<PeaOutcome<T>> {
    if d_control < 2 {
        return Err(Error::DimensionTooSmall { got: d_control });
    }
    if !target.is_normalized() {
        return Err(Error::NotNormalized {
            norm_sqr: target.norm_sqr().to_f64().unwrap_or(f64::NAN),
        });
    }
    if u.dim() != target.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: target.total_dim(),
            got: u.dim(),
        });
    }

    let control = QuditState::basis(&[d_control], &[0])?;
    let mut joint = control.tensor(target);
    joint = gates::dft(d_control, false)?.apply(&joint, 0)?;
    joint = gates::mvcg(u, d_control)?.apply_full(&joint)?;
    if theta != T::zero() {
        joint = gates::phase_rotation(theta, d_control)
            .to_unitary()
            .apply(&joint, 0)?;
    }
    joint = gates::dft(d_control, true)?.apply(&joint, 0)?;
    let distribution = joint.probabilities(0)?;
    let Readout { digit, tie } = readout(&distribution);

    // kickback diagnostic: phase of <target|U^j|target> per control level
    let mut kickback_phases = Vec::with_capacity(d_control);
    let mut powered = target.clone();
    for j in 0..d_control {
        if j == 0 {
            kickback_phases.push(T::zero());
        } else {
            powered = u.apply_full(&powered)?;
            let mut overlap = num_complex::Complex::new(T::zero(), T::zero());
            for (a, b) in target.amplitudes().iter().zip(powered.amplitudes()) {
                overlap += a.conj() * b;
            }
            let arg = overlap.arg();
            kickback_phases.push(if overlap.norm() == T::zero() {
                T::zero()
            } else {
                reduce_phase(arg)
            });
        }
    }

    Ok(PeaOutcome {
        distribution,
        readout_digit: digit,
        tie,
        kickback_phases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{generalized_z, DiagonalUnitary};
    use num_complex::Complex64 as C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    // frozen from an independent numeric oracle
    const P_0351: [f64; 3] = [0.402115855271696, 0.487456340393664, 0.110427804334641];
    const P_1045: [f64; 3] = [0.106721415609740, 0.338714519345168, 0.554564065045093];

    fn u2() -> DiagonalUnitary<f64> {
        DiagonalUnitary::new(&[0.0, 0.351 * PI, 1.045 * PI])
    }

    #[test]
    fn collapse_is_one_at_the_matching_digit() {
        assert_eq!(collapse_probability::<f64>(0, 0.0, 3).unwrap(), 1.0);
        assert_eq!(collapse_probability::<f64>(0, TAU, 3).unwrap(), 1.0);
        let near = collapse_probability::<f64>(1, TAU / 3.0 + 1e-12, 3).unwrap();
        assert_eq!(near, 1.0);
    }

    #[test]
    fn collapse_matches_the_oracle_triple() {
        for (n, want) in P_0351.iter().enumerate() {
            let got = collapse_probability(n, 0.351 * PI, 3).unwrap();
            assert!((got - want).abs() < 1e-12, "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn collapse_rejects_out_of_range_projection() {
        assert!(matches!(
            collapse_probability::<f64>(3, 0.0, 3),
            Err(Error::ProjectionOutOfRange { index: 3, dim: 3 })
        ));
        assert!(matches!(
            collapse_probability::<f64>(0, 0.0, 1),
            Err(Error::DimensionTooSmall { got: 1 })
        ));
    }

    #[test]
    fn collapse_distributions_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let d = rng.gen_range(2..17);
            let phi = rng.gen::<f64>() * TAU;
            let total: f64 = (0..d)
                .map(|n| collapse_probability(n, phi, d).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "d={d} phi={phi}");
        }
    }

    #[test]
    fn collapse_is_periodic_and_shift_covariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let d = rng.gen_range(2..9);
            let phi = rng.gen::<f64>() * TAU;
            for n in 0..d {
                let base: f64 = collapse_probability(n, phi, d).unwrap();
                let wrapped = collapse_probability(n, phi + TAU, d).unwrap();
                assert!((base - wrapped).abs() < 1e-12);
                // shifting phi up one digit moves the distribution up one index
                let shifted = collapse_probability(n, phi + TAU / d as f64, d).unwrap();
                let moved = collapse_probability((n + d - 1) % d, phi, d).unwrap();
                assert!((shifted - moved).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn readout_breaks_ties_toward_the_smallest_index() {
        let even = ProbVector::new(vec![0.5, 0.5, 0.0]).unwrap();
        let r = readout(&even);
        assert_eq!(r.digit, 0);
        assert!(r.tie);

        let clear = ProbVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let r = readout(&clear);
        assert_eq!(r.digit, 2);
        assert!(!r.tie);
    }

    #[test]
    fn eigenstate_of_the_clock_gate_reads_out_its_own_level() {
        let z = generalized_z::<f64>(3).unwrap().to_unitary();
        for t in 0..3 {
            let target = QuditState::<f64>::basis(&[3], &[t]).unwrap();
            let out = run_pea(&z, &target, 3).unwrap();
            assert_eq!(out.readout_digit, t);
            assert!(!out.tie);
            for (n, &p) in out.distribution.probs().iter().enumerate() {
                let want = if n == t { 1.0 } else { 0.0 };
                assert!((p - want).abs() < 1e-12, "t={t} n={n}");
            }
        }
    }

    #[test]
    fn intermediate_phase_gives_the_oracle_distribution() {
        let u = u2().to_unitary();
        let target = QuditState::<f64>::basis(&[3], &[1]).unwrap();
        let out = run_pea(&u, &target, 3).unwrap();
        assert_eq!(out.readout_digit, 1);
        for (got, want) in out.distribution.probs().iter().zip(P_0351) {
            assert!((got - want).abs() < 1e-12);
        }
        // kickback phases are j * phi
        assert!(out.kickback_phases[0].abs() < 1e-15);
        assert!((out.kickback_phases[1] - 0.351 * PI).abs() < 1e-12);
        assert!((out.kickback_phases[2] - 0.702 * PI).abs() < 1e-12);

        let target = QuditState::<f64>::basis(&[3], &[2]).unwrap();
        let out = run_pea(&u, &target, 3).unwrap();
        assert_eq!(out.readout_digit, 2);
        for (got, want) in out.distribution.probs().iter().zip(P_1045) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn run_is_deterministic_bit_for_bit() {
        let u = u2().to_unitary();
        let target = QuditState::<f64>::basis(&[3], &[1]).unwrap();
        let a = run_pea(&u, &target, 3).unwrap();
        let b = run_pea(&u, &target, 3).unwrap();
        for (x, y) in a
            .distribution
            .probs()
            .iter()
            .zip(b.distribution.probs())
        {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn superposition_targets_give_the_probability_mixture() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let d = rng.gen_range(2..6);
            let phases: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * TAU).collect();
            let u = DiagonalUnitary::new(&phases);
            let amps: Vec<C64> = (0..d)
                .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let target = QuditState::from_amplitudes(&[d], amps)
                .unwrap()
                .normalize()
                .unwrap();
            let weights: Vec<f64> = target.amplitudes().iter().map(|a| a.norm_sqr()).collect();
            let out = run_pea(&u.to_unitary(), &target, d).unwrap();
            for n in 0..d {
                let want: f64 = (0..d)
                    .map(|t| weights[t] * collapse_kernel(n, u.phases()[t], d))
                    .sum();
                assert!(
                    (out.distribution.probs()[n] - want).abs() < 1e-12,
                    "d={d} n={n}"
                );
            }
        }
    }

    #[test]
    fn feedback_shifts_the_effective_phase() {
        // kickback 2 pi 5/9 with feedback -2 pi 2/9 behaves as kickback 2 pi/3
        let u = DiagonalUnitary::new(&[TAU * 5.0 / 9.0, 0.0, 0.0]).to_unitary();
        let target = QuditState::<f64>::basis(&[3], &[0]).unwrap();
        let out = run_pea_with_feedback(&u, &target, 3, -TAU * 2.0 / 9.0).unwrap();
        assert_eq!(out.readout_digit, 1);
        assert!((out.distribution.probs()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn run_rejects_bad_inputs() {
        let z = generalized_z::<f64>(3).unwrap().to_unitary();
        let unnorm =
            QuditState::<f64>::from_amplitudes(&[3], vec![C64::new(0.5, 0.0); 3]).unwrap();
        assert!(matches!(
            run_pea(&z, &unnorm, 3),
            Err(Error::NotNormalized { .. })
        ));
        let wrong = QuditState::<f64>::basis(&[2], &[0]).unwrap();
        assert!(matches!(
            run_pea(&z, &wrong, 3),
            Err(Error::DimensionMismatch { .. })
        ));
        let ok = QuditState::<f64>::basis(&[3], &[0]).unwrap();
        assert!(matches!(
            run_pea(&z, &ok, 1),
            Err(Error::DimensionTooSmall { got: 1 })
        ));
    }
}
