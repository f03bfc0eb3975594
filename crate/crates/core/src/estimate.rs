//! Statistical phase retrieval: normalized-count handling, the
//! mean-squared-error fit against the collapse curves, error and fidelity
//! metrics, curve sampling for plots, and the multi-round iterative
//! estimator that reads one base-d digit per round.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gates::{phase_rotation, reduce_phase, DiagonalUnitary};
use crate::pea::{collapse_kernel, run_pea_with_feedback};
use crate::photonic::{
    poisson_draw, sample_projection_counts, DetectorModel, EomDrive, PhotonicGeometry,
};
use crate::scalar::{real, Scalar};
use crate::state::QuditState;

/// Grid resolution of the coarse fit stage over `[0, 2 pi)`.
const FIT_GRID_POINTS: usize = 10_000;

/// Measured counts scaled to unit total.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedCounts<T: Scalar> {
    e: Vec<T>,
    total_counts: Option<u64>,
}

impl<T: Scalar> NormalizedCounts<T> {
    /// Scales one detector row to unit total.
    pub fn normalize(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if counts.is_empty() || total == 0 {
            return Err(Error::EmptyCounts);
        }
        let tf = real::<T>(total as f64);
        let e = counts
            .iter()
            .map(|&c| real::<T>(c as f64) / tf)
            .collect();
        Ok(Self {
            e,
            total_counts: Some(total),
        })
    }

    /// Accepts an already-normalized row, e.g. published table values.
    pub fn from_fractions(fractions: &[T]) -> Result<Self> {
        if fractions.is_empty() {
            return Err(Error::EmptyCounts);
        }
        let mut sum = T::zero();
        for &f in fractions {
            if f < T::zero() || !f.is_finite() {
                return Err(Error::InvalidDistribution {
                    reason: format!("negative or non-finite fraction {:?}", f.to_f64()),
                });
            }
            sum += f;
        }
        if (sum - T::one()).abs() > T::norm_tol() {
            return Err(Error::InvalidDistribution {
                reason: format!("fractions sum to {:?}, not 1", sum.to_f64()),
            });
        }
        Ok(Self {
            e: fractions.to_vec(),
            total_counts: None,
        })
    }

    pub fn fractions(&self) -> &[T] {
        &self.e
    }

    pub fn dim(&self) -> usize {
        self.e.len()
    }

    /// Raw total behind the fractions, when known.
    pub fn total_counts(&self) -> Option<u64> {
        self.total_counts
    }

    /// Binomial standard error per entry, `sqrt(e(1-e)/total)`; requires a
    /// known total.
    pub fn std_errs(&self) -> Option<Vec<T>> {
        let total = real::<T>(self.total_counts? as f64);
        Some(
            self.e
                .iter()
                .map(|&e| (e * (T::one() - e) / total).max(T::zero()).sqrt())
                .collect(),
        )
    }
}

/// Outcome of the mean-squared-error phase fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult<T: Scalar> {
    /// Fitted phase in `[0, 2 pi)`.
    pub phi_hat: T,
    /// Mean squared error at the optimum.
    pub residual: T,
    /// Wraparound error fraction against the supplied true phase.
    pub circular_error_fraction: Option<T>,
}

fn fit_objective<T: Scalar>(e: &[T], phi: T) -> T {
    let d = e.len();
    let mut acc = T::zero();
    for (n, &en) in e.iter().enumerate() {
        let diff = en - collapse_kernel(n, phi, d);
        acc += diff * diff;
    }
    acc / real::<T>(d as f64)
}

/// Fits the phase whose collapse distribution best matches the measured
/// fractions, minimizing the mean squared error over `[0, 2 pi)`.
///
/// A 10^4-point grid locates the global basin; golden-section refinement of
/// the winning bracket narrows it to `fit_tol`. Both stages are
/// deterministic. Supplying the true phase fills in the circular error.
pub fn mse_fit<T: Scalar>(counts: &NormalizedCounts<T>, true_phase: Option<T>) -> FitResult<T> {
    let e = counts.fractions();
    let step = T::TAU() / real::<T>(FIT_GRID_POINTS as f64);
    let samples: Vec<T> = (0..FIT_GRID_POINTS)
        .map(|i| fit_objective(e, step * real::<T>(i as f64)))
        .collect();

    // Digit-adjacent phases produce near-degenerate mirrored dips, so the
    // lowest sample alone can sit in the wrong basin. Refine every local
    // minimum of the cyclic sample sequence and keep the best result.
    let mut phi_hat = T::zero();
    let mut best = T::infinity();
    for i in 0..FIT_GRID_POINTS {
        let prev = samples[(i + FIT_GRID_POINTS - 1) % FIT_GRID_POINTS];
        let next = samples[(i + 1) % FIT_GRID_POINTS];
        if samples[i] > prev || samples[i] > next {
            continue;
        }
        let center = step * real::<T>(i as f64);
        let (phi, val) = golden_section(e, center - step, center + step);
        if val < best {
            best = val;
            phi_hat = phi;
        }
    }

    let phi_hat = reduce_phase(phi_hat);
    FitResult {
        phi_hat,
        residual: fit_objective(e, phi_hat),
        circular_error_fraction: true_phase.map(|phi| circular_error(phi, phi_hat)),
    }
}

/// Golden-section minimum of the fit objective on `[a, b]` to `fit_tol`;
/// the bracket is one grid step each way, where the basin is unimodal.
fn golden_section<T: Scalar>(e: &[T], mut a: T, mut b: T) -> (T, T) {
    let invphi = (real::<T>(5.0).sqrt() - T::one()) * real::<T>(0.5);
    let mut x1 = b - invphi * (b - a);
    let mut x2 = a + invphi * (b - a);
    let mut f1 = fit_objective(e, x1);
    let mut f2 = fit_objective(e, x2);
    while b - a > T::fit_tol() {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = fit_objective(e, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = fit_objective(e, x2);
        }
    }
    let mid = (a + b) * real::<T>(0.5);
    (mid, fit_objective(e, mid))
}

/// Wraparound phase discrepancy as a fraction of the full turn:
/// `min(|delta|, 2 pi - |delta|) / 2 pi`, always in `[0, 0.5]`.
pub fn circular_error<T: Scalar>(phi: T, phi_hat: T) -> T {
    let delta = reduce_phase(phi - phi_hat);
    delta.min(T::TAU() - delta) / T::TAU()
}

/// Fraction of weight on the diagonal: counts registered at the matching
/// projection over all counts. Accepts any nonnegative square matrix, so
/// raw counts and per-row-normalized tables both work.
pub fn fidelity_of_rows<T: Scalar>(rows: &[Vec<T>]) -> Result<T> {
    if rows.is_empty() {
        return Err(Error::EmptyCounts);
    }
    let d = rows.len();
    let mut diag = T::zero();
    let mut total = T::zero();
    for (tau, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::NotSquare {
                rows: d,
                row: tau,
                width: row.len(),
            });
        }
        for (n, &c) in row.iter().enumerate() {
            if c < T::zero() {
                return Err(Error::InvalidDistribution {
                    reason: format!("negative cell {:?}", c.to_f64()),
                });
            }
            total += c;
            if n == tau {
                diag += c;
            }
        }
    }
    if total <= T::zero() {
        return Err(Error::EmptyCounts);
    }
    Ok(diag / total)
}

/// [`fidelity_of_rows`] over a raw count table.
pub fn fidelity<T: Scalar>(table: &crate::photonic::CountTable<T>) -> Result<T> {
    let rows: Vec<Vec<T>> = table
        .counts()
        .iter()
        .map(|row| row.iter().map(|&c| real::<T>(c as f64)).collect())
        .collect();
    fidelity_of_rows(&rows)
}

/// One sampled point of the collapse curves.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow<T: Scalar> {
    pub phi: T,
    /// `C(n, phi)` for each outcome `n`.
    pub collapse: Vec<T>,
}

/// Samples all d collapse curves on an endpoint-inclusive uniform grid over
/// `[0, 2 pi]`, ready for plotting.
pub fn curve_table<T: Scalar>(d: usize, resolution: usize) -> Result<Vec<CurveRow<T>>> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { got: d });
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "curve resolution must be at least 2, got {resolution}"
        )));
    }
    let step = T::TAU() / real::<T>((resolution - 1) as f64);
    Ok((0..resolution)
        .map(|i| {
            let phi = step * real::<T>(i as f64);
            CurveRow {
                phi,
                collapse: (0..d).map(|n| collapse_kernel(n, phi, d)).collect(),
            }
        })
        .collect())
}

/// Poisson resample of an expected count split: cell `n` is drawn around
/// `expected_total * probs[n]`.
pub fn resample_counts<T: Scalar, R: Rng + ?Sized>(
    probs: &[T],
    expected_total: T,
    rng: &mut R,
) -> Result<Vec<u64>> {
    if expected_total < T::zero() {
        return Err(Error::InvalidArgument(format!(
            "expected total must be nonnegative, got {:?}",
            expected_total.to_f64()
        )));
    }
    let mut row = Vec::with_capacity(probs.len());
    for &p in probs {
        if p < T::zero() {
            return Err(Error::InvalidDistribution {
                reason: format!("negative probability {:?}", p.to_f64()),
            });
        }
        let mean = (expected_total * p).to_f64().unwrap_or(0.0);
        row.push(poisson_draw(mean, rng));
    }
    Ok(row)
}

/// Measurement backend for the iterative estimator.
#[derive(Debug, Clone, PartialEq)]
pub enum Backend<T: Scalar> {
    /// Exact state-vector statistics; the readout is the argmax outcome.
    Ideal,
    /// Poissonian photon counting through the device model; the readout is
    /// the argmax of sampled counts.
    Photonic {
        geometry: PhotonicGeometry<T>,
        drive: EomDrive<T>,
        detector: DetectorModel<T>,
    },
}

/// One round of the iterative estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T: Scalar> {
    /// Round index, 1-based.
    pub k: usize,
    /// Unitary power applied this round, `d^(n-k)`.
    pub x: u64,
    /// Feedback rotation carried into the round, radians.
    pub theta: T,
    /// Base-d digit read out this round.
    pub measured_digit: usize,
    /// True when the readout was ambiguous.
    pub tie: bool,
    /// Phase reconstructed from the digits seen so far.
    pub running_phase: T,
}

/// Digit sequence and reconstructed phase after all rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct IterativeOutcome<T: Scalar> {
    /// Per-round records in measurement order (least-significant first).
    pub records: Vec<IterationRecord<T>>,
    /// Digits reordered most-significant first: `a_1 .. a_n`.
    pub digits: Vec<usize>,
    /// `2 pi * sum a_i d^-i`.
    pub phase: T,
}

/// Runs the n-round digit-by-digit estimator on an eigenstate of the
/// diagonal unitary with the given phases.
///
/// Round `k` applies the gate power `d^(n-k)` plus a feedback rotation
/// `theta_k = -sum_{i<k} 2 pi m_i / d^(k-i+1)` canceling the digits already
/// measured, so each round reads one new base-d digit, least significant
/// first. On the ideal backend every phase `2 pi K / d^n` is recovered
/// exactly. The seed is consumed only by the photonic backend.
pub fn iterative_pea<T: Scalar>(
    u_phases: &[T],
    eigenstate: usize,
    n_digits: usize,
    backend: &Backend<T>,
    seed: u64,
) -> Result<IterativeOutcome<T>> {
    let unitary = DiagonalUnitary::new(u_phases);
    let d = unitary.dim();
    if d < 2 {
        return Err(Error::DimensionTooSmall { got: d });
    }
    if eigenstate >= d {
        return Err(Error::SubsystemOutOfRange {
            index: eigenstate,
            count: d,
        });
    }
    if n_digits == 0 {
        return Err(Error::InvalidArgument(
            "need at least one digit to estimate".into(),
        ));
    }
    if let Backend::Photonic { geometry, .. } = backend {
        if geometry.dimension != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: geometry.dimension,
            });
        }
        geometry.require_valid()?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = QuditState::basis(&[d], &[eigenstate])?;
    let df = real::<T>(d as f64);
    let mut measured: Vec<usize> = Vec::with_capacity(n_digits);
    let mut records = Vec::with_capacity(n_digits);

    for k in 1..=n_digits {
        let x = (d as u64).pow((n_digits - k) as u32);
        // cancel the digits already known: theta_k = -sum 2 pi m_i / d^(k-i+1)
        let mut theta = T::zero();
        for (i, &m) in measured.iter().enumerate() {
            let split = (d as f64).powi((k - (i + 1) + 1) as i32);
            theta -= T::TAU() * real::<T>(m as f64) / real::<T>(split);
        }

        let (digit, tie) = match backend {
            Backend::Ideal => {
                let powered = unitary.pow(x).to_unitary();
                let out = run_pea_with_feedback(&powered, &target, d, theta)?;
                (out.readout_digit, out.tie)
            }
            Backend::Photonic {
                geometry,
                drive,
                detector,
            } => {
                let effective =
                    reduce_phase(unitary.phases()[eigenstate] * real::<T>(x as f64) + theta);
                let kickback = phase_rotation(effective, d);
                let counts = sample_projection_counts(
                    kickback.phases(),
                    geometry,
                    drive,
                    detector,
                    &mut rng,
                )?;
                let mut digit = 0usize;
                let mut best = counts[0];
                for (n, &c) in counts.iter().enumerate().skip(1) {
                    if c > best {
                        best = c;
                        digit = n;
                    }
                }
                let tie = counts
                    .iter()
                    .enumerate()
                    .any(|(n, &c)| n != digit && c == best);
                (digit, tie)
            }
        };

        measured.push(digit);
        let mut running = T::zero();
        for (i, &m) in measured.iter().enumerate() {
            let weight = (d as f64).powi((n_digits - (i + 1) + 1) as i32);
            running += T::TAU() * real::<T>(m as f64) / real::<T>(weight);
        }
        records.push(IterationRecord {
            k,
            x,
            theta,
            measured_digit: digit,
            tie,
            running_phase: running,
        });
    }

    let digits: Vec<usize> = measured.iter().rev().copied().collect();
    let mut phase = T::zero();
    for (i, &a) in digits.iter().enumerate() {
        phase += T::TAU() * real::<T>(a as f64) / df.powi((i + 1) as i32);
    }
    Ok(IterativeOutcome {
        records,
        digits,
        phase,
    })
}
