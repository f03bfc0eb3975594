//! Simulator and estimation toolkit for phase estimation with a single
//! control qudit.
//!
//! The crate covers the full stack of a d-level (default d = 3) phase
//! estimation experiment:
//!
//! - [`state`]: dense state vectors over mixed-dimension qudit registers
//!   and small complex operators.
//! - [`gates`]: the discrete Fourier gate, diagonal unitaries, and the
//!   multi-value controlled gate that powers a target unitary by the
//!   control level.
//! - [`pea`]: one estimation round in closed form and by circuit
//!   simulation, including the collapse probabilities `C(n, phi)`.
//! - [`photonic`]: a device-level model of a fiber-optic implementation,
//!   with frequency-bin encoding on an EOM sideband lattice, temporal
//!   phase masks, a probabilistic single-modulator inverse transform, and
//!   Poissonian photon counting.
//! - [`estimate`]: normalized-count statistics, the mean-squared-error
//!   phase fit, fidelity and circular-error metrics, curve sampling, and
//!   the digit-by-digit iterative estimator.
//! - [`bessel`]: integer-order Bessel functions of the first kind, the
//!   sideband weights of sinusoidal phase modulation.
//!
//! Numeric code is generic over the [`Scalar`] precision; the `*64`/`*32`
//! aliases below pin the common choices.

pub mod bessel;
pub mod error;
pub mod estimate;
pub mod gates;
pub mod pea;
pub mod photonic;
pub mod scalar;
pub mod state;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type QuditState64 = state::QuditState<f64>;
pub type QuditState32 = state::QuditState<f32>;
pub type ProbVector64 = state::ProbVector<f64>;
pub type ProbVector32 = state::ProbVector<f32>;
pub type UnitaryOp64 = state::UnitaryOp<f64>;
pub type UnitaryOp32 = state::UnitaryOp<f32>;
pub type DiagonalUnitary64 = gates::DiagonalUnitary<f64>;
pub type DiagonalUnitary32 = gates::DiagonalUnitary<f32>;
pub type PeaOutcome64 = pea::PeaOutcome<f64>;
pub type PeaOutcome32 = pea::PeaOutcome<f32>;
pub type PhotonicGeometry64 = photonic::PhotonicGeometry<f64>;
pub type PhotonicGeometry32 = photonic::PhotonicGeometry<f32>;
pub type EomDrive64 = photonic::EomDrive<f64>;
pub type EomDrive32 = photonic::EomDrive<f32>;
pub type LatticeState64 = photonic::LatticeState<f64>;
pub type LatticeState32 = photonic::LatticeState<f32>;
pub type DetectorModel64 = photonic::DetectorModel<f64>;
pub type DetectorModel32 = photonic::DetectorModel<f32>;
pub type CountTable64 = photonic::CountTable<f64>;
pub type CountTable32 = photonic::CountTable<f32>;
pub type TemporalPhaseMask64 = photonic::TemporalPhaseMask<f64>;
pub type TemporalPhaseMask32 = photonic::TemporalPhaseMask<f32>;
pub type NormalizedCounts64 = estimate::NormalizedCounts<f64>;
pub type NormalizedCounts32 = estimate::NormalizedCounts<f32>;
pub type FitResult64 = estimate::FitResult<f64>;
pub type FitResult32 = estimate::FitResult<f32>;
pub type CurveRow64 = estimate::CurveRow<f64>;
pub type CurveRow32 = estimate::CurveRow<f32>;
pub type Backend64 = estimate::Backend<f64>;
pub type Backend32 = estimate::Backend<f32>;
pub type IterativeOutcome64 = estimate::IterativeOutcome<f64>;
pub type IterativeOutcome32 = estimate::IterativeOutcome<f32>;
