//! Eigenvalue counting and eigensolvers for the tridiagonal operator.
//!
//! Three routes to the spectrum, deliberately independent of each other:
//!
//! * [`count_below`]: the production path. One forward LDL^T pass counts
//!   negative pivots of H - eps I, which by Sylvester's law of inertia is
//!   the number of eigenvalues strictly below eps. O(L) time, O(1) memory,
//!   works on a streamed diagonal at L far beyond RAM.
//! * [`lowest_eigenvalues`]: bisection on the counting function, for
//!   individual eigenvalues at large L.
//! * [`dense_spectrum`] / [`low_eigenpairs`]: a desk-scale oracle using
//!   implicit-shift QL iteration (a different algorithm family from the
//!   Sturm count, so the two can cross-check each other), plus inverse
//!   iteration for eigenvectors with a validated residual.

use crate::error::{Error, Result};
use crate::model::{diag_stream, ModelParams, TridiagonalOperator};
use crate::rng::SplitMix64;

/// Largest matrix the dense oracle accepts unless a caller raises the
/// limit explicitly.
pub const DEFAULT_ORACLE_LIMIT: usize = 5000;

/// Residual guarantee of the dense oracle's eigenpairs, as a multiple of
/// the Gershgorin scale: ||Hv - lambda v|| <= 1e-10 * (4 + b).
pub const ORACLE_RESIDUAL_FACTOR: f64 = 1e-10;

/// Result of one counting pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenCount {
    pub epsilon: f64,
    /// Number of eigenvalues strictly below `epsilon`.
    pub count: usize,
    pub sites: usize,
}

/// How a [`SpectrumSlice`] was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceMethod {
    Bisection,
    Dense,
}

/// A sorted batch of eigenvalues with its accuracy.
#[derive(Debug, Clone)]
pub struct SpectrumSlice {
    /// Non-decreasing; multiplicities of near-coincident eigenvalues are
    /// preserved (one entry per index k).
    pub eigenvalues: Vec<f64>,
    /// Absolute accuracy of each entry.
    pub tolerance: f64,
    pub method: SliceMethod,
}

/// An eigenvalue with a unit-norm eigenvector over the interior sites.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Sign-preserving pivot safeguard. A pivot with |d| below `guard` is
/// replaced by +-guard, keeping its sign; an exact zero becomes +guard so
/// that an exact eigenvalue hit counts as "not below" (the counting
/// function uses strict inequality). The replacement perturbs the
/// effective shift by O(machine epsilon * scale).
#[inline]
fn safeguard(raw: f64, guard: f64) -> f64 {
    if raw.abs() < guard {
        if raw < 0.0 {
            -guard
        } else {
            guard
        }
    } else {
        raw
    }
}

/// Counts negative pivots of (H - epsilon I) = L D L^T over a streamed
/// diagonal; off-diagonals are the model's constant -1. `guard` is the
/// zero-pivot floor, normally machine epsilon times the Gershgorin scale.
pub fn count_negative_pivots<I>(diag: I, epsilon: f64, guard: f64) -> usize
where
    I: IntoIterator<Item = f64>,
{
    let mut it = diag.into_iter();
    let Some(first) = it.next() else { return 0 };
    let mut d = safeguard(first - epsilon, guard);
    let mut count = usize::from(d < 0.0);
    for a in it {
        d = safeguard((a - epsilon) - 1.0 / d, guard);
        count += usize::from(d < 0.0);
    }
    count
}

/// Number of eigenvalues of `h` strictly below `epsilon`.
pub fn count_below(h: &TridiagonalOperator, epsilon: f64) -> EigenCount {
    let guard = f64::EPSILON * h.gershgorin_upper().abs().max(1.0);
    EigenCount {
        epsilon,
        count: count_negative_pivots(h.diag().iter().copied(), epsilon, guard),
        sites: h.len(),
    }
}

/// Streaming variant: samples the realization (params, seed, index) on the
/// fly and never materializes it. Bit-identical to [`count_below`] on the
/// materialized operator with the same seed.
pub fn count_below_streamed(
    params: &ModelParams,
    seed: u64,
    index: u64,
    epsilon: f64,
) -> EigenCount {
    let guard = f64::EPSILON * params.spectrum_top();
    EigenCount {
        epsilon,
        count: count_negative_pivots(diag_stream(params, seed, index), epsilon, guard),
        sites: params.sites,
    }
}

/// Bisection bracket guaranteed to contain the whole spectrum, with the
/// right end strictly above the top eigenvalue.
fn bracket(h: &TridiagonalOperator) -> (f64, f64) {
    (h.gershgorin_lower(), h.gershgorin_upper() + 1.0)
}

/// The k lowest eigenvalues E_1..E_k by bisection on the counting
/// function, each bracketed to width <= tol. Eigenvalues of coincident or
/// near-coincident clusters are returned with their full multiplicity.
pub fn lowest_eigenvalues(h: &TridiagonalOperator, k: usize, tol: f64) -> Result<SpectrumSlice> {
    let n = h.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "requested {k} eigenvalues from an operator with {n} sites"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let guard = f64::EPSILON * h.gershgorin_upper().abs().max(1.0);
    let (lo0, hi0) = bracket(h);
    let mut eigenvalues = Vec::with_capacity(k);
    for j in 1..=k {
        // Invariant: count(lo) < j <= count(hi).
        let (mut lo, mut hi) = (lo0, hi0);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if count_negative_pivots(h.diag().iter().copied(), mid, guard) >= j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        eigenvalues.push(0.5 * (lo + hi));
    }
    // Independent brackets can disagree by up to tol across neighbouring
    // indices; restore monotonicity.
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectrumSlice {
        eigenvalues,
        tolerance: tol,
        method: SliceMethod::Bisection,
    })
}

/// Full spectrum by implicit-shift QL iteration, at the default size limit.
pub fn dense_spectrum(h: &TridiagonalOperator) -> Result<SpectrumSlice> {
    dense_spectrum_with_limit(h, DEFAULT_ORACLE_LIMIT)
}

/// Full spectrum by implicit-shift QL iteration. The oracle is meant for
/// desk-scale verification, so sizes above `limit` are rejected rather
/// than ground through.
pub fn dense_spectrum_with_limit(h: &TridiagonalOperator, limit: usize) -> Result<SpectrumSlice> {
    let n = h.len();
    if n > limit {
        return Err(Error::OracleLimit {
            requested: n,
            limit,
        });
    }
    let mut d = h.diag().to_vec();
    let mut e = vec![-1.0; n];
    e[n - 1] = 0.0;
    ql_implicit(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(SpectrumSlice {
        eigenvalues: d,
        // Backward-stable up to a modest multiple of machine epsilon times
        // the spectral scale.
        tolerance: (n as f64).sqrt() * f64::EPSILON * h.gershgorin_upper().abs().max(1.0),
        method: SliceMethod::Dense,
    })
}

/// Implicit-shift QL sweep for a symmetric tridiagonal matrix, eigenvalues
/// only. `d` holds the diagonal, `e[i]` couples rows i and i+1 (`e[n-1]`
/// unused). On success `d` contains the eigenvalues in no particular
/// order.
fn ql_implicit(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            // First index m >= l where the matrix splits (negligible
            // coupling e[m] relative to its neighbouring diagonal mass).
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break; // d[l] converged
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::OracleFailure(format!(
                    "QL iteration did not converge at index {l}"
                )));
            }
            // Wilkinson-style shift from the leading 2x2 block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let bb = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // The chase annihilated a coupling early: split here
                    // and restart on the smaller problem.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - bb;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// All eigenpairs with eigenvalue strictly below `emax`, via the dense
/// spectrum plus inverse iteration. Each returned vector has unit norm and
/// satisfies ||Hv - lambda v|| <= 1e-10 * Gershgorin scale; failure to
/// reach that residual is an error, never a silent degradation.
pub fn low_eigenpairs(
    h: &TridiagonalOperator,
    emax: f64,
    limit: usize,
) -> Result<Vec<Eigenpair>> {
    let spectrum = dense_spectrum_with_limit(h, limit)?;
    let scale = h.gershgorin_upper().abs().max(1.0);
    let cluster_tol = 1e-6 * scale;
    let mut pairs: Vec<Eigenpair> = Vec::new();
    for &lambda in spectrum.eigenvalues.iter().take_while(|&&v| v < emax) {
        let cluster_start = pairs
            .iter()
            .position(|p| (p.value - lambda).abs() < cluster_tol)
            .unwrap_or(pairs.len());
        let cluster: Vec<&[f64]> = pairs[cluster_start..]
            .iter()
            .map(|p| p.vector.as_slice())
            .collect();
        let vector = inverse_iteration(h, lambda, &cluster, pairs.len() as u64, scale)?;
        pairs.push(Eigenpair {
            value: lambda,
            vector,
        });
    }
    Ok(pairs)
}

/// Inverse iteration at shift `lambda`, orthogonalized against `cluster`
/// (previously computed vectors of near-coincident eigenvalues).
fn inverse_iteration(
    h: &TridiagonalOperator,
    lambda: f64,
    cluster: &[&[f64]],
    stream_index: u64,
    scale: f64,
) -> Result<Vec<f64>> {
    let n = h.len();
    let target = ORACLE_RESIDUAL_FACTOR * scale;
    for attempt in 0..4u64 {
        // Deterministic start vector; a fresh one per retry.
        let mut rng = SplitMix64::stream(0x5EED_1234, stream_index * 8 + attempt);
        let mut v: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
        normalize(&mut v);
        // Tiny shift offset keeps the factorization well-defined when
        // lambda is accurate to machine precision; grows per retry.
        let shift = lambda + (attempt as f64) * 64.0 * f64::EPSILON * scale;
        for _ in 0..4 {
            solve_shifted(h.diag(), shift, &mut v, scale);
            for c in cluster {
                let dot: f64 = v.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c.iter()).for_each(|(a, b)| *a -= dot * b);
            }
            normalize(&mut v);
        }
        let hv = h.apply(&v)?;
        let residual: f64 = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b) * (a - lambda * b))
            .sum::<f64>()
            .sqrt();
        if residual <= target {
            return Ok(v);
        }
    }
    Err(Error::OracleFailure(format!(
        "inverse iteration residual above {target:.3e} at lambda={lambda}"
    )))
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Solves (T - shift I) x = rhs in place for the model's tridiagonal T
/// (unit off-diagonals), by Gaussian elimination with partial pivoting.
/// Pivoting fills in a second superdiagonal, stored in `d2`. Near-zero
/// pivots are floored, which is exactly what inverse iteration wants: the
/// solution explodes along the eigenvector.
fn solve_shifted(diag: &[f64], shift: f64, rhs: &mut [f64], scale: f64) {
    let n = diag.len();
    debug_assert_eq!(rhs.len(), n);
    let floor = f64::EPSILON * scale * 1e-3;
    let mut b: Vec<f64> = diag.iter().map(|&x| x - shift).collect();
    let mut c = vec![-1.0; n];
    if n > 0 {
        c[n - 1] = 0.0;
    }
    let mut d2 = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        // Row i+1 still holds its original subdiagonal entry -1 in column
        // i; eliminated rows never propagate a subdiagonal downward.
        let a = -1.0;
        if b[i].abs() >= 1.0 {
            let mult = a / pivot(b[i], floor);
            b[i + 1] -= mult * c[i];
            // d2[i] is zero at this point, so column i+2 is untouched.
            rhs[i + 1] -= mult * rhs[i];
        } else {
            // Swap rows i and i+1; |mult| <= 1 afterwards.
            let mult = b[i] / a;
            let (bi1, ci1) = (b[i + 1], c[i + 1]);
            let ci_old = c[i];
            b[i] = a;
            c[i] = bi1;
            d2[i] = ci1;
            b[i + 1] = ci_old - mult * bi1;
            c[i + 1] = -mult * ci1;
            rhs.swap(i, i + 1);
            rhs[i + 1] -= mult * rhs[i];
        }
    }
    // Back substitution.
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        if i + 1 < n {
            acc -= c[i] * rhs[i + 1];
        }
        if i + 2 < n {
            acc -= d2[i] * rhs[i + 2];
        }
        rhs[i] = acc / pivot(b[i], floor);
    }
}

#[inline]
fn pivot(x: f64, floor: f64) -> f64 {
    if x.abs() < floor {
        if x < 0.0 {
            -floor
        } else {
            floor
        }
    } else {
        x
    }
}
