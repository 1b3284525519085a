//! Closed-form envelopes for the integrated density of states near the
//! bottom of the spectrum, and helpers for the longest-zero-run law.
//!
//! With occupation probability q = 1 - p, the IDS at energy eps obeys
//!
//!   q p^T / (1 - p^T)  <=  N(eps)  <=  q p^(T - pi^2/b) / (p^2 (1 - p^(T + C sqrt(eps))))
//!
//! where T = pi / sqrt(eps). Both envelopes give the Lifschitz asymptotic
//! sqrt(eps) ln N(eps) -> pi ln p. A finite-volume variant truncates the
//! interval-length sum at ell0, the longest zero run actually present.
//!
//! All evaluation goes through log space: p^T underflows f64 already at
//! eps ~ 2e-5 for p = 1/2, while ln of the bounds stays finite down to
//! any eps. The plain accessors exponentiate at the end and report 0.0
//! with an underflow flag once the true value drops below the smallest
//! positive double.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// ln(1 - p^s) for s > 0, accurate both for p^s near 1 and near 0.
#[inline]
fn ln_one_minus_pow(ln_p: f64, s: f64) -> f64 {
    (-(s * ln_p).exp_m1()).ln()
}

/// ln of the lower IDS envelope q p^T / (1 - p^T), T = pi/sqrt(eps).
/// Domain: eps > 0, 0 < p < 1.
pub fn ln_lower_bound_ids(epsilon: f64, p: f64) -> f64 {
    let ln_p = p.ln();
    let t = PI / epsilon.sqrt();
    (1.0 - p).ln() + t * ln_p - ln_one_minus_pow(ln_p, t)
}

/// Lower IDS envelope; 0.0 once the value underflows f64.
pub fn lower_bound_ids(epsilon: f64, p: f64) -> f64 {
    ln_lower_bound_ids(epsilon, p).exp()
}

/// ln of the upper IDS envelope
/// q p^(T - pi^2/b) / (p^2 (1 - p^(T + C sqrt(eps)))).
/// Domain: eps > 0, 0 < p < 1, b > 0, c_corr >= 0.
pub fn ln_upper_bound_ids(epsilon: f64, p: f64, b: f64, c_corr: f64) -> f64 {
    let ln_p = p.ln();
    let rt = epsilon.sqrt();
    let t = PI / rt;
    (1.0 - p).ln() + (t - PI * PI / b - 2.0) * ln_p
        - ln_one_minus_pow(ln_p, t + c_corr * rt)
}

/// Upper IDS envelope; 0.0 once the value underflows f64.
pub fn upper_bound_ids(epsilon: f64, p: f64, b: f64, c_corr: f64) -> f64 {
    ln_upper_bound_ids(epsilon, p, b, c_corr).exp()
}

/// ln of the finite-volume lower coefficient
/// q (1 - p^(T ell0)) p^T / (p (1 - p^T)): the lower envelope with the
/// run-length sum truncated at ell0. ell0 may be `f64::INFINITY` (full
/// sum, value lower/p) or 0 (empty sum, ln = -inf).
pub fn ln_finite_lower_coeff(epsilon: f64, p: f64, ell0: f64) -> f64 {
    let ln_p = p.ln();
    let t = PI / epsilon.sqrt();
    // t * ell0 * ln_p -> -inf for ell0 = inf, so the truncation factor
    // ln(1 - p^(t ell0)) tends to 0 automatically.
    (1.0 - p).ln() + ln_one_minus_pow(ln_p, t * ell0) + (t - 1.0) * ln_p
        - ln_one_minus_pow(ln_p, t)
}

/// Finite-volume lower coefficient; 0.0 once the value underflows f64.
pub fn finite_lower_coeff(epsilon: f64, p: f64, ell0: f64) -> f64 {
    ln_finite_lower_coeff(epsilon, p, ell0).exp()
}

/// One energy of a bounds table.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BoundsRow {
    pub epsilon: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub finite_lower: f64,
    /// True when any of the three values is a true positive that rounds
    /// to 0.0 in f64; the ln_* accessors still resolve it.
    pub underflow: bool,
}

/// Bounds evaluated over an energy grid at fixed (p, b, C, ell0).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BoundsCurve {
    pub p: f64,
    pub b: f64,
    pub c_corr: f64,
    pub ell0: f64,
    pub rows: Vec<BoundsRow>,
}

impl BoundsCurve {
    /// Domain: every eps > 0, 0 < p < 1, b > 0, c_corr >= 0, ell0 >= 0.
    pub fn compute(
        epsilons: &[f64],
        p: f64,
        b: f64,
        c_corr: f64,
        ell0: f64,
    ) -> Result<BoundsCurve> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!(
                "bounds need 0 < p < 1, got p={p}"
            )));
        }
        if !(b > 0.0) || !(c_corr >= 0.0) || !(ell0 >= 0.0) {
            return Err(Error::invalid(format!(
                "bounds need b > 0, C >= 0, ell0 >= 0; got b={b} C={c_corr} ell0={ell0}"
            )));
        }
        let mut rows = Vec::with_capacity(epsilons.len());
        for &eps in epsilons {
            if !(eps > 0.0) {
                return Err(Error::invalid(format!("bounds need eps > 0, got {eps}")));
            }
            let ln_lo = ln_lower_bound_ids(eps, p);
            let ln_up = ln_upper_bound_ids(eps, p, b, c_corr);
            let ln_fin = ln_finite_lower_coeff(eps, p, ell0);
            let lower = ln_lo.exp();
            let upper = ln_up.exp();
            let finite = ln_fin.exp();
            let dropped =
                |v: f64, ln_v: f64| v == 0.0 && ln_v.is_finite();
            rows.push(BoundsRow {
                epsilon: eps,
                lower_bound: lower,
                upper_bound: upper,
                finite_lower: finite,
                underflow: dropped(lower, ln_lo)
                    || dropped(upper, ln_up)
                    || dropped(finite, ln_fin),
            });
        }
        Ok(BoundsCurve { p, b, c_corr, ell0, rows })
    }
}

/// Limit law of the recentred longest zero run: P[ell0 > threshold(y)]
/// tends to 1 - e^{-y}.
pub fn run_limit_probability(y: f64) -> f64 {
    -(-y).exp_m1()
}

/// The level at which the longest of ~n geometric runs is exceeded with
/// limit probability 1 - e^{-y}: (ln n - ln y) / ln(1/p).
pub fn run_threshold(y: f64, n: f64, p: f64) -> f64 {
    (n.ln() - y.ln()) / -p.ln()
}

/// Least-squares fit of ln N(eps) against 1/sqrt(eps).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ExponentFit {
    /// Slope in ln N = slope / sqrt(eps) + intercept; the Lifschitz
    /// prediction is pi ln p.
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (sqrt of SSR/(n-2)/Sxx).
    pub stderr: f64,
    /// Points actually used (those with N > 0).
    pub points: usize,
}

/// Fits the Lifschitz exponent from IDS estimates over an energy grid.
/// Points with a zero or non-finite estimate are dropped; at least three
/// usable points are required.
pub fn fit_lifschitz_exponent(epsilons: &[f64], ids: &[f64]) -> Result<ExponentFit> {
    if epsilons.len() != ids.len() {
        return Err(Error::invalid("epsilon and IDS lists differ in length"));
    }
    let pts: Vec<(f64, f64)> = epsilons
        .iter()
        .zip(ids)
        .filter(|(&e, &n)| e > 0.0 && n > 0.0 && n.is_finite())
        .map(|(&e, &n)| (1.0 / e.sqrt(), n.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::invalid(format!(
            "exponent fit needs at least 3 positive IDS points, got {n}"
        )));
    }
    let spread = pts.iter().map(|(x, _)| *x).fold(f64::NAN, f64::max)
        - pts.iter().map(|(x, _)| *x).fold(f64::NAN, f64::min);
    if !(spread > 0.0) {
        return Err(Error::invalid("exponent fit needs distinct energies"));
    }
    let nf = n as f64;
    let mean_x = pts.iter().map(|(x, _)| x).sum::<f64>() / nf;
    let mean_y = pts.iter().map(|(_, y)| y).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in &pts {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = pts
        .iter()
        .map(|&(x, y)| {
            let r = y - slope * x - intercept;
            r * r
        })
        .sum();
    let stderr = (ssr / (nf - 2.0).max(1.0) / sxx).sqrt();
    Ok(ExponentFit { slope, intercept, stderr, points: n })
}
