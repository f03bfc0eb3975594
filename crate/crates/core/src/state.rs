//! Dense complex state vectors and operators over registers of qudits.
//!
//! A register is described by a list of subsystem dimensions. The first
//! subsystem is the most significant: for dimensions `[d0, d1]` the flat
//! index of basis state `|i0, i1>` is `i0 * d1 + i1`. All storage is dense;
//! the registers this crate works with are small enough that clarity wins
//! over sparsity.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pure state over one or more qudit subsystems.
///
/// A state carries a `normalized` flag set when the squared amplitudes sum
/// to 1 within `Scalar::norm_tol()` (1e-12 for `f64`). Operations that read
/// out probabilities require the flag.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState<T: Scalar> {
    dims: Vec<usize>,
    amps: Vec<Complex<T>>,
    normalized: bool,
}

impl<T: Scalar> QuditState<T> {
    /// Computational basis state `|levels[0], levels[1], ...>`.
    pub fn basis(dims: &[usize], levels: &[usize]) -> Result<Self> {
        Self::check_dims(dims)?;
        if levels.len() != dims.len() {
            return Err(Error::DimensionMismatch {
                expected: dims.len(),
                got: levels.len(),
            });
        }
        let mut index = 0usize;
        for (&level, &dim) in levels.iter().zip(dims) {
            if level >= dim {
                return Err(Error::ProjectionOutOfRange { index: level, dim });
            }
            index = index * dim + level;
        }
        let total: usize = dims.iter().product();
        let mut amps = vec![Complex::new(T::zero(), T::zero()); total];
        amps[index] = Complex::new(T::one(), T::zero());
        Ok(Self {
            dims: dims.to_vec(),
            amps,
            normalized: true,
        })
    }

    /// State from explicit amplitudes. The `normalized` flag is derived from
    /// the actual norm rather than trusted from the caller.
    pub fn from_amplitudes(dims: &[usize], amps: Vec<Complex<T>>) -> Result<Self> {
        Self::check_dims(dims)?;
        let total: usize = dims.iter().product();
        if amps.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: amps.len(),
            });
        }
        let mut s = Self {
            dims: dims.to_vec(),
            amps,
            normalized: false,
        };
        s.normalized = (s.norm_sqr() - T::one()).abs() <= T::norm_tol();
        Ok(s)
    }

    fn check_dims(dims: &[usize]) -> Result<()> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("state needs at least one subsystem".into()));
        }
        for &d in dims {
            if d == 0 {
                return Err(Error::InvalidArgument("subsystem dimension 0".into()));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> T {
        self.amps
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// Rescales to unit norm. Errors on the zero vector.
    pub fn normalize(mut self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == T::zero() {
            return Err(Error::ZeroState);
        }
        let inv = n2.sqrt().recip();
        for a in &mut self.amps {
            *a = a.scale(inv);
        }
        self.normalized = true;
        Ok(self)
    }

    /// Kronecker product `self (x) other`; `self` becomes the more
    /// significant register. The result is flagged normalized exactly when
    /// both inputs are.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self {
            dims,
            amps,
            normalized: self.normalized && other.normalized,
        }
    }

    /// Measurement probabilities of one subsystem, marginalizing the rest.
    pub fn probabilities(&self, subsystem: usize) -> Result<ProbVector<T>> {
        if !self.normalized {
            return Err(Error::NotNormalized {
                norm_sqr: self.norm_sqr().to_f64().unwrap_or(f64::NAN),
            });
        }
        if subsystem >= self.dims.len() {
            return Err(Error::SubsystemOutOfRange {
                index: subsystem,
                count: self.dims.len(),
            });
        }
        let dk = self.dims[subsystem];
        let stride: usize = self.dims[subsystem + 1..].iter().product();
        let block = dk * stride;
        let outer = self.amps.len() / block;
        let mut probs = vec![T::zero(); dk];
        for o in 0..outer {
            for (j, p) in probs.iter_mut().enumerate() {
                for s in 0..stride {
                    *p += self.amps[o * block + j * stride + s].norm_sqr();
                }
            }
        }
        ProbVector::new(probs)
    }
}

/// Probability distribution over measurement outcomes.
///
/// Entries lie in `[0, 1]` and sum to 1 within `Scalar::norm_tol()`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector<T: Scalar> {
    probs: Vec<T>,
}

impl<T: Scalar> ProbVector<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution {
                reason: "empty".into(),
            });
        }
        let tol = T::norm_tol();
        let mut sum = T::zero();
        for (i, &p) in probs.iter().enumerate() {
            if !(p >= -tol && p <= T::one() + tol) {
                return Err(Error::InvalidDistribution {
                    reason: format!("entry {i} = {:?} outside [0, 1]", p.to_f64()),
                });
            }
            sum += p;
        }
        if (sum - T::one()).abs() > tol {
            return Err(Error::InvalidDistribution {
                reason: format!("sum = {:?}", sum.to_f64()),
            });
        }
        // clamp float dust so downstream code can rely on [0, 1] exactly
        let probs = probs
            .into_iter()
            .map(|p| p.max(T::zero()).min(T::one()))
            .collect();
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Outcome of the unitarity check: the largest entry of `|U* U - I|` and
/// whether it clears `Scalar::unitary_tol()`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitarityReport<T: Scalar> {
    pub max_deviation: T,
    pub pass: bool,
}

/// Dense square operator on a single register of the given dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp<T: Scalar> {
    dim: usize,
    entries: Vec<Complex<T>>, // row-major
}

impl<T: Scalar> UnitaryOp<T> {
    pub fn from_entries(dim: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex::new(T::one(), T::zero());
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![Complex::new(T::zero(), T::zero()); d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Self { dim: d, entries }
    }

    /// Matrix product `self * rhs`. Panics on dimension mismatch; operators
    /// are only ever combined on one register.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        let d = self.dim;
        let zero = Complex::new(T::zero(), T::zero());
        let mut entries = vec![zero; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a == zero {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += a * rhs.entries[k * d + c];
                }
            }
        }
        Self { dim: d, entries }
    }

    /// `self^x` by exponentiation by squaring; `x = 0` gives the identity.
    pub fn pow(&self, x: u64) -> Self {
        let mut result = Self::identity(self.dim);
        let mut base = self.clone();
        let mut e = x;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Reports the largest entry of `|U* U - I|`.
    pub fn check_unitary(&self) -> UnitarityReport<T> {
        let d = self.dim;
        let mut max_dev = T::zero();
        for r in 0..d {
            for c in 0..d {
                // (U* U)[r][c] = sum_k conj(U[k][r]) U[k][c]
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..d {
                    acc += self.entries[k * d + r].conj() * self.entries[k * d + c];
                }
                if r == c {
                    acc -= Complex::new(T::one(), T::zero());
                }
                max_dev = max_dev.max(acc.norm());
            }
        }
        UnitarityReport {
            max_deviation: max_dev,
            pass: max_dev <= T::unitary_tol(),
        }
    }

    /// Largest entrywise distance to another operator of the same dimension.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    /// Applies the operator to one subsystem of a register state.
    pub fn apply(&self, state: &QuditState<T>, subsystem: usize) -> Result<QuditState<T>> {
        if subsystem >= state.dims.len() {
            return Err(Error::SubsystemOutOfRange {
                index: subsystem,
                count: state.dims.len(),
            });
        }
        if state.dims[subsystem] != self.dim {
            return Err(Error::DimensionMismatch {
                expected: state.dims[subsystem],
                got: self.dim,
            });
        }
        let dk = self.dim;
        let stride: usize = state.dims[subsystem + 1..].iter().product();
        let block = dk * stride;
        let outer = state.amps.len() / block;
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = state.amps.clone();
        let mut gathered = vec![zero; dk];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * block + s;
                for (j, g) in gathered.iter_mut().enumerate() {
                    *g = state.amps[base + j * stride];
                }
                for r in 0..dk {
                    let mut acc = zero;
                    for (c, &g) in gathered.iter().enumerate() {
                        acc += self.entries[r * dk + c] * g;
                    }
                    out[base + r * stride] = acc;
                }
            }
        }
        Ok(QuditState {
            dims: state.dims.clone(),
            amps: out,
            normalized: state.normalized,
        })
    }

    /// Applies an operator that spans the entire register.
    pub fn apply_full(&self, state: &QuditState<T>) -> Result<QuditState<T>> {
        if self.dim != state.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: state.total_dim(),
                got: self.dim,
            });
        }
        let d = self.dim;
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; d];
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = zero;
            for c in 0..d {
                acc += self.entries[r * d + c] * state.amps[c];
            }
            *slot = acc;
        }
        Ok(QuditState {
            dims: state.dims.clone(),
            amps: out,
            normalized: state.normalized,
        })
    }
}
