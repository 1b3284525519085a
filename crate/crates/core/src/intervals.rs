//! Zero-potential runs and their statistics.
//!
//! A "zero interval" is a maximal block of consecutive sites with V = 0.
//! Low-energy eigenstates live on long zero intervals, so the run-length
//! statistics drive the whole low-energy theory: each interval of length
//! ell supports ell sine modes with energies w^2 pi^2 / (ell+1)^2, and the
//! sorted multiset of those energies bounds the true spectrum from above,
//! E_k <= U_k.
//!
//! Two ensembles appear:
//!
//! * **fixed-L**: Bernoulli sites on a lattice of L sites (the model
//!   itself); interval count and lengths are both random.
//! * **fixed-n**: the number n of intervals is fixed and lengths are drawn
//!   i.i.d. geometric, P[len = k] = p^(k-1) (1-p); the lattice length is
//!   random. This is the convenient frame for run-length laws; the two
//!   agree in the large-volume limit with n ~ p q L.

use crate::error::{Error, Result};
use crate::model::PotentialRealization;
use crate::rng::SplitMix64;

/// One maximal zero-potential run. `x0` is the site immediately left of
/// the run (0 when the run abuts the left wall), so the zero sites are
/// x0+1 ..= x0+len and the sites x0, x0+len+1 are walls or occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroInterval {
    pub x0: usize,
    pub len: usize,
}

/// All zero runs of a realization, left to right.
#[derive(Debug, Clone, Default)]
pub struct ZeroIntervalSet {
    pub intervals: Vec<ZeroInterval>,
    /// Total number of zero-potential sites, L' = sum of lengths.
    pub zero_sites: usize,
    /// Length of the longest run, ell_0; 0 when every site is occupied.
    pub longest: usize,
}

impl ZeroIntervalSet {
    /// Number of intervals, n.
    #[inline]
    pub fn n(&self) -> usize {
        self.intervals.len()
    }

    /// S_n(Y): how many intervals are strictly longer than `y`.
    pub fn count_longer_than(&self, y: f64) -> usize {
        self.intervals.iter().filter(|i| (i.len as f64) > y).count()
    }
}

/// Extracts all maximal zero runs in one pass.
pub fn scan_zero_intervals(v: &PotentialRealization) -> ZeroIntervalSet {
    scan_occupancy(v.occupancy.iter().copied())
}

/// Run scan over any occupancy stream (true = occupied).
pub fn scan_occupancy<I: IntoIterator<Item = bool>>(occ: I) -> ZeroIntervalSet {
    let mut set = ZeroIntervalSet::default();
    let mut run_start: Option<usize> = None;
    let mut x = 0usize;
    for occupied in occ {
        x += 1;
        if occupied {
            if let Some(start) = run_start.take() {
                push_run(&mut set, start, x - start);
            }
        } else if run_start.is_none() {
            run_start = Some(x);
        }
    }
    if let Some(start) = run_start {
        push_run(&mut set, start, x + 1 - start);
    }
    set
}

fn push_run(set: &mut ZeroIntervalSet, first_site: usize, len: usize) {
    set.intervals.push(ZeroInterval {
        x0: first_site - 1,
        len,
    });
    set.zero_sites += len;
    set.longest = set.longest.max(len);
}

/// Length of the longest zero run of an occupancy stream, without
/// materializing the interval list. Matches [`scan_occupancy`].
pub fn longest_zero_run<I: IntoIterator<Item = bool>>(occ: I) -> usize {
    let mut best = 0usize;
    let mut current = 0usize;
    for occupied in occ {
        if occupied {
            current = 0;
        } else {
            current += 1;
            best = best.max(current);
        }
    }
    best
}

/// One entry of the U sequence: a sine-mode energy with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UEntry {
    /// w^2 pi^2 / (len+1)^2.
    pub energy: f64,
    /// Index into the originating [`ZeroIntervalSet::intervals`].
    pub interval: usize,
    /// Mode number, 1 ..= len.
    pub w: usize,
}

/// The non-decreasing multiset of sine-mode energy bounds over all
/// intervals: interval alpha of length ell contributes the ell values
/// w^2 pi^2 / (ell+1)^2, w = 1..=ell. Its length is exactly the number of
/// zero sites L', and E_k <= U_k for k = 1..=L'.
#[derive(Debug, Clone, Default)]
pub struct USequence {
    pub entries: Vec<UEntry>,
}

impl USequence {
    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.energy)
    }
}

/// Builds the sorted U sequence. Exact ties (equal energies from
/// commensurate intervals) are ordered by (interval index, w) so the
/// sequence is fully deterministic.
pub fn build_u_sequence(set: &ZeroIntervalSet) -> USequence {
    let mut entries = Vec::with_capacity(set.zero_sites);
    for (idx, iv) in set.intervals.iter().enumerate() {
        let m = (iv.len + 1) as f64;
        for w in 1..=iv.len {
            let ratio = w as f64 * std::f64::consts::PI / m;
            entries.push(UEntry {
                energy: ratio * ratio,
                interval: idx,
                w,
            });
        }
    }
    entries.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then(a.interval.cmp(&b.interval))
            .then(a.w.cmp(&b.w))
    });
    USequence { entries }
}

/// P[len > m] = p^m for the geometric interval-length law.
pub fn geometric_survival(m: u64, p: f64) -> f64 {
    if m <= i32::MAX as u64 {
        p.powi(m as i32)
    } else {
        p.powf(m as f64)
    }
}

/// Samples the fixed-n ensemble: n i.i.d. geometric lengths laid out left
/// to right with a single occupied separator between consecutive runs (the
/// first run abuts the left wall). Requires 0 < p < 1; the geometric draw
/// is undefined at p = 1.
pub fn sample_fixed_n_intervals(
    n: usize,
    p: f64,
    seed: u64,
    index: u64,
) -> Result<ZeroIntervalSet> {
    if n == 0 {
        return Err(Error::invalid("fixed-n ensemble needs n >= 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "fixed-n ensemble needs 0 < p < 1, got {p}"
        )));
    }
    let ln_p = p.ln();
    let mut rng = SplitMix64::stream(seed, index);
    let mut set = ZeroIntervalSet {
        intervals: Vec::with_capacity(n),
        zero_sites: 0,
        longest: 0,
    };
    let mut x0 = 0usize;
    for _ in 0..n {
        let len = rng.next_geometric(ln_p) as usize;
        set.intervals.push(ZeroInterval { x0, len });
        set.zero_sites += len;
        set.longest = set.longest.max(len);
        x0 += len + 1; // one occupied separator
    }
    Ok(set)
}

/// Number of intervals per site, n / L. A run starts at x exactly when
/// V(x) = 0 and x is the left wall or V(x-1) = b, so the density tends to
/// p q as L grows (wall effects are O(1/L)).
pub fn interval_density_check(v: &PotentialRealization) -> f64 {
    let set = scan_zero_intervals(v);
    set.n() as f64 / v.len() as f64
}
