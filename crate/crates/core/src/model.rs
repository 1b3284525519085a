//! Model parameters, Bernoulli disorder sampling, and the tridiagonal
//! operator.
//!
//! Lattice convention: interior sites are 1..=L. Sites 0 and L+1 carry the
//! Dirichlet walls and are never stored; vectors over the lattice have L
//! entries, indexed from site 1. The operator acts as
//! (Hf)(x) = (2 + V(x)) f(x) - f(x-1) - f(x+1) with f(0) = f(L+1) = 0.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};

/// Parameters of the Anderson-Bernoulli ensemble.
///
/// `p` is the probability of a zero-potential site, `q = 1 - p` the
/// probability of potential `b`. `p = 1` is accepted and gives the free
/// (deterministic) lattice; `p = 0` is rejected because every bound in the
/// verification suite divides by a power of `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of interior lattice sites L.
    #[serde(rename = "L")]
    pub sites: usize,
    /// Probability of V(x) = 0.
    pub p: f64,
    /// Potential height at occupied sites.
    pub b: f64,
}

impl ModelParams {
    pub fn new(sites: usize, p: f64, b: f64) -> Result<Self> {
        let params = ModelParams { sites, p, b };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 {
            return Err(Error::invalid("L must be at least 1"));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::invalid(format!(
                "p must satisfy 0 < p <= 1, got {}",
                self.p
            )));
        }
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(Error::invalid(format!("b must be positive, got {}", self.b)));
        }
        Ok(())
    }

    /// Probability of an occupied site, q = 1 - p.
    #[inline]
    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    /// Upper edge of the spectrum, 4 + b (Gershgorin).
    #[inline]
    pub fn spectrum_top(&self) -> f64 {
        4.0 + self.b
    }
}

/// Streaming occupancy sampler: yields one Bernoulli(q) decision per site,
/// consuming exactly one uniform each, so it is bit-compatible with
/// [`PotentialRealization::sample`] for the same (seed, index).
#[derive(Debug, Clone)]
pub struct OccupancyStream {
    rng: SplitMix64,
    q: f64,
    remaining: usize,
}

impl OccupancyStream {
    pub fn new(params: &ModelParams, seed: u64, index: u64) -> Self {
        OccupancyStream {
            rng: SplitMix64::stream(seed, index),
            q: params.q(),
            remaining: params.sites,
        }
    }
}

impl Iterator for OccupancyStream {
    type Item = bool;

    #[inline]
    fn next(&mut self) -> Option<bool> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some(self.rng.next_f64() < self.q)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for OccupancyStream {}

/// Streaming diagonal of H: 2 + b at occupied sites, 2 elsewhere.
pub fn diag_stream(
    params: &ModelParams,
    seed: u64,
    index: u64,
) -> impl Iterator<Item = f64> + '_ {
    let b = params.b;
    OccupancyStream::new(params, seed, index).map(move |occ| if occ { 2.0 + b } else { 2.0 })
}

/// One sampled disorder realization with its seed provenance.
#[derive(Debug, Clone)]
pub struct PotentialRealization {
    pub params: ModelParams,
    /// `occupancy[x-1]` is true iff V(x) = b, for interior sites x = 1..=L.
    pub occupancy: Vec<bool>,
    pub seed: u64,
    pub realization_index: u64,
}

impl PotentialRealization {
    /// Samples the potential. Pure in (params, seed, index).
    pub fn sample(params: &ModelParams, seed: u64, index: u64) -> Self {
        let occupancy: Vec<bool> = OccupancyStream::new(params, seed, index).collect();
        PotentialRealization {
            params: *params,
            occupancy,
            seed,
            realization_index: index,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.occupancy.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }

    /// Potential value at interior site x (1-based).
    #[inline]
    pub fn v(&self, x: usize) -> f64 {
        if self.occupancy[x - 1] {
            self.params.b
        } else {
            0.0
        }
    }

    pub fn occupied_sites(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }
}

/// Symmetric tridiagonal matrix with unit off-diagonals: diagonal `diag`,
/// sub- and super-diagonal both -1. This is H restricted to the interior
/// sites; the Dirichlet walls are implicit in the missing rows.
#[derive(Debug, Clone)]
pub struct TridiagonalOperator {
    diag: Vec<f64>,
    gershgorin_lower: f64,
    gershgorin_upper: f64,
}

impl TridiagonalOperator {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::invalid("operator must have at least one site"));
        }
        if diag.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("diagonal entries must be finite"));
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &d in &diag {
            lo = lo.min(d);
            hi = hi.max(d);
        }
        Ok(TridiagonalOperator {
            diag,
            gershgorin_lower: lo - 2.0,
            gershgorin_upper: hi + 2.0,
        })
    }

    pub fn from_potential(v: &PotentialRealization) -> Self {
        let b = v.params.b;
        let diag = v
            .occupancy
            .iter()
            .map(|&occ| if occ { 2.0 + b } else { 2.0 })
            .collect();
        // Entries are 2 or 2 + b with b > 0 validated, so `new` cannot fail.
        TridiagonalOperator::new(diag).expect("valid diagonal")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    #[inline]
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Lower Gershgorin bound min(diag) - 2; equals 0 for any realization
    /// of the model (the operator is positive semidefinite).
    #[inline]
    pub fn gershgorin_lower(&self) -> f64 {
        self.gershgorin_lower
    }

    /// Upper Gershgorin bound max(diag) + 2; equals 4 + b when at least one
    /// site is occupied.
    #[inline]
    pub fn gershgorin_upper(&self) -> f64 {
        self.gershgorin_upper
    }

    /// Matrix-vector product (Hf)(x) = diag(x) f(x) - f(x-1) - f(x+1) with
    /// Dirichlet walls.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let n = self.diag.len();
        if f.len() != n {
            return Err(Error::invalid(format!(
                "length mismatch: operator has {n} sites, vector has {}",
                f.len()
            )));
        }
        let mut out = vec![0.0; n];
        for x in 0..n {
            let mut acc = self.diag[x] * f[x];
            if x > 0 {
                acc -= f[x - 1];
            }
            if x + 1 < n {
                acc -= f[x + 1];
            }
            out[x] = acc;
        }
        Ok(out)
    }

    /// Rayleigh quotient <f, Hf> / <f, f>.
    pub fn rayleigh(&self, f: &[f64]) -> Result<f64> {
        let hf = self.apply(f)?;
        let num: f64 = f.iter().zip(&hf).map(|(a, b)| a * b).sum();
        let den: f64 = f.iter().map(|a| a * a).sum();
        if den == 0.0 {
            return Err(Error::invalid("rayleigh quotient of the zero vector"));
        }
        Ok(num / den)
    }
}
