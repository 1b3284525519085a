//! Deterministic random number generation.
//!
//! Reproducibility across runs, platforms, and worker counts is a hard
//! requirement, so the generator is fixed by contract rather than left to a
//! library default. Any reimplementation that follows this module doc
//! reproduces every sample this crate ever draws.
//!
//! # Contract
//!
//! The generator is SplitMix64. State is a single `u64`; each draw advances
//! the state by the constant `0x9E3779B97F4A7C15` and returns `mix64` of the
//! new state, where `mix64` is
//!
//! ```text
//! z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9;
//! z ^= z >> 27;  z *= 0x94D049BB133111EB;
//! z ^= z >> 31;
//! ```
//!
//! with wrapping arithmetic throughout.
//!
//! Derived quantities:
//!
//! * **Stream seeds.** Work unit `i` of a run with master seed `s` draws
//!   from a fresh generator seeded with
//!   `stream_seed(s, i) = mix64(s + (i + 1) * 0x9E3779B97F4A7C15)`
//!   (wrapping). This equals the `(i+1)`-th raw output of a SplitMix64
//!   seeded with `s`, so streams are as independent as consecutive outputs
//!   of the base generator, and stream `i` can be opened without generating
//!   streams `0..i`.
//! * **Uniforms.** `next_f64` maps a draw `x` to
//!   `((x >> 11) + 0.5) * 2^-53`, the midpoint of the 53-bit lattice cell.
//!   Values lie strictly inside (0, 1), so `ln(u)` is always finite.
//! * **Bernoulli.** A site is occupied (V = b) iff `next_f64() < q`.
//!   Exactly one uniform is consumed per site, also when q is 0 or 1, so
//!   streamed and materialized sampling stay aligned.
//! * **Geometric.** A run length with P[len = k] = p^(k-1) (1-p) is
//!   `1 + floor(ln(u) / ln(p))`; this inversion gives the survival function
//!   P[len > m] = p^m exactly. One uniform per draw.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; bijective on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for work unit `index` of a run keyed by `master`.
#[inline]
pub fn stream_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// The base generator. See the module doc for the exact algorithm.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Generator for work unit `index` under `master`.
    pub fn stream(master: u64, index: u64) -> Self {
        SplitMix64::new(stream_seed(master, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform draw strictly inside (0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    /// Geometric run length on {1, 2, ...} with P[len > m] = p^m.
    ///
    /// Requires 0 < p < 1; enforced by callers that expose it.
    #[inline]
    pub fn next_geometric(&mut self, ln_p: f64) -> u64 {
        1 + (self.next_f64().ln() / ln_p) as u64
    }
}
