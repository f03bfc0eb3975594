//! Device-level model of the fiber-optic estimator: frequency-bin encoding
//! on an EOM sideband lattice, dispersion-split temporal phase masks for the
//! controlled gate, the single-modulator probabilistic inverse transform,
//! and Poissonian photon counting.
//!
//! Frequency content lives on a lattice with one site per multiple of the
//! mixing drive frequency. Computational bins occupy every `r`-th site
//! (`r` = bin spacing / mixing frequency), centered so the detected bin sits
//! at site 0. A sinusoidal phase drive of index `m` scatters site `s` to
//! site `s + k` with amplitude `J_k(m)`, so projections interfere Bessel
//! weights across the bins.

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::gates::{reduce_phase, DiagonalUnitary};
use crate::scalar::{real, Scalar};
use crate::state::UnitaryOp;

/// Default sideband cutoff for lattice operators; comfortably above the
/// guard band of every drive index used in practice.
pub const DEFAULT_TRUNCATION: usize = 24;

/// Norm a truncated lattice is allowed to lose in one scattering pass.
pub const LEAKAGE_BOUND: f64 = 1e-8;

const FREQ_MATCH_TOL: f64 = 1e-6;

/// Physical layout of the encoder: frequency-bin spacing, drive tones, and
/// the time-bin raster that carries the target register.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonicGeometry<T: Scalar> {
    /// Frequency-bin spacing in GHz.
    pub bin_spacing_freq: T,
    /// Comb-generation drive in GHz.
    pub comb_drive_freq: T,
    /// Mixing drive in GHz; sets the sideband-lattice granularity.
    pub mix_drive_freq: T,
    /// Dispersion-induced spacing between daughter time bins, ns.
    pub daughter_spacing: T,
    /// Spacing between computational time bins, ns.
    pub time_bin_spacing: T,
    /// Pulse repetition period, ns.
    pub repetition_period: T,
    /// Full width at half maximum of one time bin, ns.
    pub time_bin_fwhm: T,
    /// Dispersion of the splitting grating, ns/nm.
    pub dispersion: T,
    /// Qudit dimension carried by both registers.
    pub dimension: usize,
}

impl<T: Scalar> Default for PhotonicGeometry<T> {
    fn default() -> Self {
        Self {
            bin_spacing_freq: real(54.0),
            comb_drive_freq: real(18.0),
            mix_drive_freq: real(27.0),
            daughter_spacing: real(0.9),
            time_bin_spacing: real(6.0),
            repetition_period: real(24.0),
            time_bin_fwhm: real(0.2),
            dispersion: real(2.0),
            dimension: 3,
        }
    }
}

/// One failed geometry check, with the offending values.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryViolation<T: Scalar> {
    /// Bin spacing is not an integer multiple of the mixing drive, so
    /// computational bins fall between lattice sites.
    IncommensurateBinSpacing { bin_spacing: T, mix_drive: T },
    /// Bin spacing times daughter spacing must exceed the Fourier limit
    /// (product > 1) for the daughters to resolve.
    FourierLimit { product: T },
    /// The daughter-bin fan of one time bin reaches into the next.
    DaughterOverflow { extent: T, time_bin_spacing: T },
}

impl<T: Scalar> core::fmt::Display for GeometryViolation<T> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::IncommensurateBinSpacing {
                bin_spacing,
                mix_drive,
            } => write!(
                f,
                "bin spacing {bin_spacing:?} GHz is not an integer multiple of the mixing drive {mix_drive:?} GHz"
            ),
            Self::FourierLimit { product } => write!(
                f,
                "bin spacing times daughter spacing is {product:?}, below the Fourier limit of 1"
            ),
            Self::DaughterOverflow {
                extent,
                time_bin_spacing,
            } => write!(
                f,
                "daughter bins span {extent:?} ns, overflowing the {time_bin_spacing:?} ns time-bin spacing"
            ),
        }
    }
}

impl<T: Scalar> PhotonicGeometry<T> {
    /// Checks every layout invariant and returns the violations found.
    pub fn validate(&self) -> Vec<GeometryViolation<T>> {
        let mut violations = Vec::new();
        if self.lattice_ratio().is_none() {
            violations.push(GeometryViolation::IncommensurateBinSpacing {
                bin_spacing: self.bin_spacing_freq,
                mix_drive: self.mix_drive_freq,
            });
        }
        let product = self.bin_spacing_freq * self.daughter_spacing;
        if product <= T::one() {
            violations.push(GeometryViolation::FourierLimit { product });
        }
        let extent = real::<T>((self.dimension - 1) as f64) * self.daughter_spacing;
        if extent >= self.time_bin_spacing {
            violations.push(GeometryViolation::DaughterOverflow {
                extent,
                time_bin_spacing: self.time_bin_spacing,
            });
        }
        violations
    }

    /// Errors with the full violation list unless the layout is clean.
    pub fn require_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            return Ok(());
        }
        let joined = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::Geometry(joined))
    }

    fn lattice_ratio(&self) -> Option<usize> {
        if self.mix_drive_freq <= T::zero() || self.bin_spacing_freq <= T::zero() {
            return None;
        }
        let ratio = self.bin_spacing_freq / self.mix_drive_freq;
        let rounded = ratio.round();
        if (ratio - rounded).abs() > real(FREQ_MATCH_TOL) || rounded < T::one() {
            return None;
        }
        rounded.to_usize()
    }

    /// Lattice sites per computational bin: bin spacing over mixing drive.
    pub fn sites_per_bin(&self) -> Result<usize> {
        self.lattice_ratio().ok_or_else(|| {
            Error::Geometry(
                GeometryViolation::IncommensurateBinSpacing {
                    bin_spacing: self.bin_spacing_freq,
                    mix_drive: self.mix_drive_freq,
                }
                .to_string(),
            )
        })
    }

    /// Index of the bin whose site the detector filters.
    pub fn center_bin(&self) -> usize {
        (self.dimension - 1) / 2
    }

    /// Lattice site of each computational bin, centered on the detected bin.
    pub fn computational_sites(&self) -> Result<Vec<i64>> {
        let r = self.sites_per_bin()? as i64;
        let c = self.center_bin() as i64;
        Ok((0..self.dimension as i64).map(|j| r * (j - c)).collect())
    }
}

/// Sinusoidal phase drive applied by the modulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EomDrive<T: Scalar> {
    /// Drive amplitude in radians; sets the Bessel sideband weights.
    pub modulation_index: T,
    /// Drive tone in GHz; must match the mixing lattice granularity.
    pub drive_freq: T,
    /// Phase advance per sideband order, radians. Encodes the RF delay
    /// setting: scattering by `k` sites picks up `exp(i k delay_phase)`.
    pub delay_phase: T,
}

impl<T: Scalar> Default for EomDrive<T> {
    fn default() -> Self {
        Self {
            modulation_index: real(1.843),
            drive_freq: real(27.0),
            delay_phase: T::zero(),
        }
    }
}

impl<T: Scalar> EomDrive<T> {
    fn require_valid(&self) -> Result<()> {
        if self.modulation_index < T::zero() {
            return Err(Error::InvalidArgument(format!(
                "modulation index must be nonnegative, got {:?}",
                self.modulation_index.to_f64()
            )));
        }
        Ok(())
    }
}

/// Drive phase that reproduces projection setting `n` through the RF delay
/// line instead of a spectral pre-phase: sideband order `k` then carries
/// `exp(i k phase)`, which shifts bin `j` by `-2 pi j n / d` up to a global
/// phase.
pub fn delay_phase_for_setting<T: Scalar>(
    setting: usize,
    geometry: &PhotonicGeometry<T>,
) -> Result<T> {
    let r = geometry.sites_per_bin()?;
    let d = geometry.dimension;
    Ok(T::TAU() * real::<T>(setting as f64) / real::<T>((d * r) as f64))
}

/// Amplitudes over the sideband lattice, truncated to sites `-K..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState<T: Scalar> {
    truncation: usize,
    amps: Vec<Complex<T>>,
    sites: Vec<i64>,
}

impl<T: Scalar> LatticeState<T> {
    /// Places computational-bin amplitudes on their lattice sites.
    pub fn from_bins(
        bins: &[Complex<T>],
        geometry: &PhotonicGeometry<T>,
        truncation: usize,
    ) -> Result<Self> {
        if bins.len() != geometry.dimension {
            return Err(Error::DimensionMismatch {
                expected: geometry.dimension,
                got: bins.len(),
            });
        }
        let sites = geometry.computational_sites()?;
        let reach = sites.iter().map(|s| s.unsigned_abs() as usize).max().unwrap_or(0);
        if truncation < reach {
            return Err(Error::TruncationTooSmall {
                given: truncation,
                required: reach,
                bound: LEAKAGE_BOUND,
            });
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 2 * truncation + 1];
        for (amp, &site) in bins.iter().zip(&sites) {
            amps[(site + truncation as i64) as usize] = *amp;
        }
        Ok(Self {
            truncation,
            amps,
            sites,
        })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Raw amplitudes, index `site + truncation`.
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    /// Sites the computational bins were placed on at construction.
    pub fn computational_sites(&self) -> &[i64] {
        &self.sites
    }

    /// Amplitude at a lattice site; zero outside the truncation window.
    pub fn amplitude(&self, site: i64) -> Complex<T> {
        let idx = site + self.truncation as i64;
        if idx < 0 || idx >= self.amps.len() as i64 {
            return Complex::new(T::zero(), T::zero());
        }
        self.amps[idx as usize]
    }

    pub fn norm_sqr(&self) -> T {
        self.amps
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// Applies a lattice operator of matching dimension. Truncation means
    /// the result may carry less norm than the input; it is not rescaled.
    pub fn evolve(&self, op: &UnitaryOp<T>) -> Result<Self> {
        if op.dim() != self.amps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amps.len(),
                got: op.dim(),
            });
        }
        let n = self.amps.len();
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        for (row, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (col, amp) in self.amps.iter().enumerate() {
                acc += op.entry(row, col) * *amp;
            }
            *slot = acc;
        }
        Ok(Self {
            truncation: self.truncation,
            amps: out,
            sites: self.sites.clone(),
        })
    }
}

/// Smallest guard band `g` such that scattering at index `m` loses less
/// than [`LEAKAGE_BOUND`] of the norm beyond `|k| > g`, per the Bessel sum
/// rule `J_0^2 + 2 sum J_k^2 = 1`.
pub fn sideband_guard<T: Scalar>(modulation_index: T) -> usize {
    let m = modulation_index.abs();
    let bound = real::<T>(LEAKAGE_BOUND);
    // generous starting table; the tail of J_k(m) dies superexponentially
    // once k exceeds m
    let max_order = (m.to_f64().unwrap_or(0.0).ceil() as usize) + 40;
    let js = crate::bessel::bessel_j_family::<T>(max_order, m);
    let mut tail = T::zero();
    let two = real::<T>(2.0);
    for j in js.iter().skip(1) {
        tail += two * *j * *j;
    }
    let mut g = 0;
    while g < max_order {
        if tail < bound {
            return g;
        }
        g += 1;
        tail -= two * js[g] * js[g];
    }
    max_order
}

/// Scattering operator of one sinusoidal phase-modulation pass on the
/// lattice `-K..=K`: entry from site `s` to `s + k` is
/// `J_k(m) exp(i k delay_phase)`.
///
/// The operator is unitary on the untruncated lattice; on the truncated one
/// the columns within `K - guard` of the center keep their norm to within
/// [`LEAKAGE_BOUND`]. Callers scattering from site `s` need
/// `K >= |s| + sideband_guard(m)`.
pub fn eom_operator<T: Scalar>(drive: &EomDrive<T>, truncation: usize) -> Result<UnitaryOp<T>> {
    drive.require_valid()?;
    let guard = sideband_guard(drive.modulation_index);
    if truncation < guard {
        return Err(Error::TruncationTooSmall {
            given: truncation,
            required: guard,
            bound: LEAKAGE_BOUND,
        });
    }
    let dim = 2 * truncation + 1;
    let max_order = 2 * truncation;
    let js = crate::bessel::bessel_j_family::<T>(max_order, drive.modulation_index);
    let mut entries = vec![Complex::new(T::zero(), T::zero()); dim * dim];
    for to in 0..dim {
        for from in 0..dim {
            let k = to as i64 - from as i64;
            let mag = if k >= 0 {
                js[k as usize]
            } else {
                // J_{-k} = (-1)^k J_k
                let j = js[(-k) as usize];
                if k % 2 == 0 {
                    j
                } else {
                    -j
                }
            };
            let phase = real::<T>(k as f64) * drive.delay_phase;
            entries[to * dim + from] = Complex::from_polar(mag, phase);
        }
    }
    UnitaryOp::from_entries(dim, entries)
}

/// Modulation index at which every computational bin projects onto the
/// detected bin with the same magnitude. For three bins this is the root of
/// `|J_0(m)| - |J_2(m)|`, bisected on [1.5, 2.2] to `root_tol`.
pub fn equalizing_modulation_index<T: Scalar>(dimension: usize) -> Result<T> {
    if dimension != 3 {
        return Err(Error::NoEqualizationPoint { d: dimension });
    }
    let f = |m: T| bessel_j(0, m).abs() - bessel_j(2, m).abs();
    let mut lo = real::<T>(1.5);
    let mut hi = real::<T>(2.2);
    let flo = f(lo);
    if flo * f(hi) > T::zero() {
        return Err(Error::NoSignChange {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut lo_sign_positive = flo > T::zero();
    while hi - lo > T::root_tol() {
        let mid = (lo + hi) * real::<T>(0.5);
        let fmid = f(mid);
        if (fmid > T::zero()) == lo_sign_positive {
            lo = mid;
            lo_sign_positive = fmid > T::zero();
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * real::<T>(0.5))
}

/// Probability that a photon carrying the given kickback phases lands in
/// the detected bin under projection setting `n`.
///
/// The pre-phase `-2 pi j n / d` on bin `j` selects the setting; the drive
/// then folds every bin onto the detected site with its Bessel weight. The
/// same setting can instead be encoded in `drive.delay_phase` (see
/// [`delay_phase_for_setting`]); the two give identical probabilities.
pub fn projection_probability<T: Scalar>(
    kickback_phases: &[T],
    setting: usize,
    geometry: &PhotonicGeometry<T>,
    drive: &EomDrive<T>,
) -> Result<T> {
    geometry.require_valid()?;
    drive.require_valid()?;
    let d = geometry.dimension;
    if kickback_phases.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: kickback_phases.len(),
        });
    }
    if setting >= d {
        return Err(Error::ProjectionOutOfRange {
            index: setting,
            dim: d,
        });
    }
    if (drive.drive_freq - geometry.mix_drive_freq).abs() > real(FREQ_MATCH_TOL) {
        return Err(Error::Geometry(format!(
            "drive tone {:?} GHz does not match the mixing lattice at {:?} GHz",
            drive.drive_freq.to_f64(),
            geometry.mix_drive_freq.to_f64()
        )));
    }

    let sites = geometry.computational_sites()?;
    let reach = sites.iter().map(|s| s.unsigned_abs() as usize).max().unwrap_or(0);
    let truncation = DEFAULT_TRUNCATION.max(reach + sideband_guard(drive.modulation_index));

    // equal-amplitude bins carrying the kickback plus the setting pre-phase
    let inv_sqrt_d = real::<T>(1.0) / real::<T>(d as f64).sqrt();
    let bins: Vec<Complex<T>> = kickback_phases
        .iter()
        .enumerate()
        .map(|(j, &phi)| {
            let pre = T::TAU() * real::<T>((j * setting) as f64) / real::<T>(d as f64);
            Complex::from_polar(inv_sqrt_d, phi - pre)
        })
        .collect();
    let state = LatticeState::from_bins(&bins, geometry, truncation)?;
    let scattered = state.evolve(&eom_operator(drive, truncation)?)?;
    Ok(scattered.amplitude(0).norm_sqr())
}

/// One programmable slot of the temporal phase mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskSlot<T: Scalar> {
    /// Time-bin index of the parent pulse.
    pub time_bin: usize,
    /// Frequency bin delayed into this slot.
    pub frequency_bin: usize,
    /// Slot start, ns after the frame origin.
    pub start: T,
    /// Slot end, ns.
    pub end: T,
    /// Phase the modulator applies during the slot, in [0, 2 pi).
    pub phase: T,
}

/// Piecewise-constant modulator program that realizes the controlled gate
/// on dispersion-split daughter bins.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalPhaseMask<T: Scalar> {
    dimension: usize,
    slots: Vec<MaskSlot<T>>,
}

impl<T: Scalar> TemporalPhaseMask<T> {
    /// Slots in time order: time bin major, frequency bin minor.
    pub fn slots(&self) -> &[MaskSlot<T>] {
        &self.slots
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Phase programmed for daughter slot (frequency `j`, time bin `tau`).
    pub fn slot_phase(&self, frequency_bin: usize, time_bin: usize) -> Option<T> {
        self.slots
            .iter()
            .find(|s| s.frequency_bin == frequency_bin && s.time_bin == time_bin)
            .map(|s| s.phase)
    }

    /// Joint operator the mask induces on (frequency control, time target),
    /// assuming the recombining grating undoes the splitting exactly.
    pub fn induced_operator(&self) -> UnitaryOp<T> {
        let d = self.dimension;
        let dim = d * d;
        let mut entries = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for slot in &self.slots {
            let idx = slot.frequency_bin * d + slot.time_bin;
            entries[idx * dim + idx] = Complex::from_polar(T::one(), slot.phase);
        }
        UnitaryOp::from_entries(dim, entries).expect("square by construction")
    }
}

/// Programs the modulator so daughter slot (frequency `j`, time bin `tau`)
/// carries phase `j * theta_tau`, realizing the controlled powers of the
/// diagonal unitary with the given phases.
pub fn mvcg_phase_mask<T: Scalar>(
    u_phases: &[T],
    geometry: &PhotonicGeometry<T>,
) -> Result<TemporalPhaseMask<T>> {
    geometry.require_valid()?;
    let d = geometry.dimension;
    if u_phases.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: u_phases.len(),
        });
    }
    if geometry.time_bin_fwhm >= geometry.daughter_spacing {
        return Err(Error::Geometry(format!(
            "daughter bins overlap: {:?} ns pulses at {:?} ns spacing",
            geometry.time_bin_fwhm.to_f64(),
            geometry.daughter_spacing.to_f64()
        )));
    }
    let half_width = geometry.time_bin_fwhm * real::<T>(0.5);
    let mut slots = Vec::with_capacity(d * d);
    for (tau, &theta_tau) in u_phases.iter().enumerate() {
        for j in 0..d {
            let center = real::<T>(tau as f64) * geometry.time_bin_spacing
                + real::<T>(j as f64) * geometry.daughter_spacing;
            slots.push(MaskSlot {
                time_bin: tau,
                frequency_bin: j,
                start: center - half_width,
                end: center + half_width,
                phase: reduce_phase(real::<T>(j as f64) * theta_tau),
            });
        }
    }
    Ok(TemporalPhaseMask {
        dimension: d,
        slots,
    })
}

/// Detection chain: flux at unit probability, gate time, and background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel<T: Scalar> {
    /// Detected photons per second when the projection probability is 1.
    pub flux: T,
    /// Counting window in seconds.
    pub integration_time: T,
    /// Background counts per second.
    pub dark_rate: T,
}

impl<T: Scalar> Default for DetectorModel<T> {
    fn default() -> Self {
        Self {
            flux: real(1e5),
            integration_time: T::one(),
            dark_rate: T::zero(),
        }
    }
}

impl<T: Scalar> DetectorModel<T> {
    fn require_valid(&self) -> Result<()> {
        for (name, value) in [
            ("flux", self.flux),
            ("integration_time", self.integration_time),
            ("dark_rate", self.dark_rate),
        ] {
            if value < T::zero() {
                return Err(Error::InvalidArgument(format!(
                    "detector {name} must be nonnegative, got {:?}",
                    value.to_f64()
                )));
            }
        }
        Ok(())
    }
}

/// Provenance attached to a simulated count table.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationMeta<T: Scalar> {
    pub geometry: PhotonicGeometry<T>,
    pub drive: EomDrive<T>,
    pub detector: DetectorModel<T>,
    pub seed: u64,
}

/// Photon counts per (eigenstate row, projection-setting column).
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable<T: Scalar> {
    counts: Vec<Vec<u64>>,
    meta: Option<SimulationMeta<T>>,
}

impl<T: Scalar> CountTable<T> {
    /// Wraps a square counts matrix without provenance.
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyCounts);
        }
        let d = counts.len();
        for (row, r) in counts.iter().enumerate() {
            if r.len() != d {
                return Err(Error::NotSquare {
                    rows: d,
                    row,
                    width: r.len(),
                });
            }
        }
        Ok(Self { counts, meta: None })
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row(&self, eigenstate: usize) -> &[u64] {
        &self.counts[eigenstate]
    }

    pub fn meta(&self) -> Option<&SimulationMeta<T>> {
        self.meta.as_ref()
    }
}

/// Kickback phases a diagonal unitary writes onto the control when the
/// target sits in eigenstate `tau`: entry `j` is `j * theta_tau` reduced.
pub fn eigenstate_kickback<T: Scalar>(u: &DiagonalUnitary<T>, tau: usize) -> Result<Vec<T>> {
    let d = u.dim();
    if tau >= d {
        return Err(Error::SubsystemOutOfRange {
            index: tau,
            count: d,
        });
    }
    let theta = u.phases()[tau];
    Ok((0..d)
        .map(|j| reduce_phase(real::<T>(j as f64) * theta))
        .collect())
}

pub(crate) fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(rng) as u64
}

/// Counts one detector row: for each projection setting, draws Poisson
/// counts around `flux * probability + dark_rate` over the gate time.
/// Settings consume the generator in index order.
pub fn sample_projection_counts<T: Scalar, R: Rng + ?Sized>(
    kickback_phases: &[T],
    geometry: &PhotonicGeometry<T>,
    drive: &EomDrive<T>,
    detector: &DetectorModel<T>,
    rng: &mut R,
) -> Result<Vec<u64>> {
    detector.require_valid()?;
    let d = geometry.dimension;
    let mut row = Vec::with_capacity(d);
    for n in 0..d {
        let p = projection_probability(kickback_phases, n, geometry, drive)?;
        let rate = detector.flux * p + detector.dark_rate;
        let mean = (rate * detector.integration_time).to_f64().unwrap_or(0.0);
        row.push(poisson_draw(mean, rng));
    }
    Ok(row)
}

/// Simulates the full counting experiment with a caller-owned generator.
/// Cells are drawn row-major: eigenstate outer, projection setting inner.
pub fn simulate_counts_with_rng<T: Scalar, R: Rng + ?Sized>(
    u_phases: &[T],
    geometry: &PhotonicGeometry<T>,
    drive: &EomDrive<T>,
    detector: &DetectorModel<T>,
    rng: &mut R,
) -> Result<Vec<Vec<u64>>> {
    geometry.require_valid()?;
    drive.require_valid()?;
    detector.require_valid()?;
    let d = geometry.dimension;
    let unitary = DiagonalUnitary::new(u_phases);
    if unitary.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: unitary.dim(),
        });
    }
    let mut counts = Vec::with_capacity(d);
    for tau in 0..d {
        let kickback = eigenstate_kickback(&unitary, tau)?;
        counts.push(sample_projection_counts(
            &kickback, geometry, drive, detector, rng,
        )?);
    }
    Ok(counts)
}

/// Seeded counting run; identical seeds give bit-identical tables.
pub fn simulate_counts<T: Scalar>(
    u_phases: &[T],
    geometry: &PhotonicGeometry<T>,
    drive: &EomDrive<T>,
    detector: &DetectorModel<T>,
    seed: u64,
) -> Result<CountTable<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = simulate_counts_with_rng(u_phases, geometry, drive, detector, &mut rng)?;
    Ok(CountTable {
        counts,
        meta: Some(SimulationMeta {
            geometry: geometry.clone(),
            drive: *drive,
            detector: *detector,
            seed,
        }),
    })
}

/// Derives an independent child seed for a parallel stream from a master
/// seed, splitmix style: advance the state by the stream index times the
/// golden-ratio increment, then apply the splitmix64 finalizer.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
