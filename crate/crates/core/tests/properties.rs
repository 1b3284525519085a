//! Property tests for the structural invariants: counting monotonicity,
//! run-scan partition identities, U-sequence shape, stream/materialized
//! equivalence, and grid parsing.

use lifshitz::cli::parse_eps_grid;
use lifshitz::intervals::{
    build_u_sequence, longest_zero_run, sample_fixed_n_intervals, scan_zero_intervals,
};
use lifshitz::model::{ModelParams, PotentialRealization, TridiagonalOperator};
use lifshitz::spectral::{count_below, count_below_streamed};
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (1usize..=300, 0.05f64..=0.95, 0.1f64..=8.0)
        .prop_map(|(sites, p, b)| ModelParams::new(sites, p, b).unwrap())
}

proptest! {
    #[test]
    fn counts_are_monotone_in_epsilon(
        params in params_strategy(),
        seed in any::<u64>(),
        index in 0u64..64,
        e1 in 0.0f64..13.0,
        e2 in 0.0f64..13.0,
    ) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let r = PotentialRealization::sample(&params, seed, index);
        let h = TridiagonalOperator::from_potential(&r);
        prop_assert!(count_below(&h, lo).count <= count_below(&h, hi).count);
    }

    #[test]
    fn count_is_zero_at_the_bottom_and_full_above_the_top(
        params in params_strategy(),
        seed in any::<u64>(),
    ) {
        let r = PotentialRealization::sample(&params, seed, 0);
        let h = TridiagonalOperator::from_potential(&r);
        prop_assert_eq!(count_below(&h, 0.0).count, 0);
        prop_assert_eq!(count_below(&h, params.spectrum_top() + 1.0).count, params.sites);
    }

    #[test]
    fn streamed_and_materialized_counts_agree(
        params in params_strategy(),
        seed in any::<u64>(),
        index in 0u64..16,
        eps in 0.01f64..5.0,
    ) {
        let r = PotentialRealization::sample(&params, seed, index);
        let h = TridiagonalOperator::from_potential(&r);
        prop_assert_eq!(
            count_below(&h, eps).count,
            count_below_streamed(&params, seed, index, eps).count
        );
    }

    #[test]
    fn run_scan_partitions_the_lattice(
        params in params_strategy(),
        seed in any::<u64>(),
        index in 0u64..64,
    ) {
        let r = PotentialRealization::sample(&params, seed, index);
        let set = scan_zero_intervals(&r);
        prop_assert_eq!(set.zero_sites + r.occupied_sites(), params.sites);
        let max_len = set.intervals.iter().map(|iv| iv.len).max().unwrap_or(0);
        prop_assert_eq!(set.longest, max_len);
        prop_assert_eq!(
            set.longest,
            longest_zero_run(r.occupancy.iter().copied())
        );
        // Intervals are disjoint, in order, separated by >= 1 site.
        for w in set.intervals.windows(2) {
            prop_assert!(w[1].x0 >= w[0].x0 + w[0].len + 1);
        }
    }

    #[test]
    fn u_sequence_is_sorted_with_length_lprime(
        params in params_strategy(),
        seed in any::<u64>(),
    ) {
        let r = PotentialRealization::sample(&params, seed, 0);
        let set = scan_zero_intervals(&r);
        let u = build_u_sequence(&set);
        prop_assert_eq!(u.len(), set.zero_sites);
        let energies: Vec<f64> = u.energies().collect();
        for w in energies.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        for e in &u.entries {
            let iv = &set.intervals[e.interval];
            prop_assert!(e.w >= 1 && e.w <= iv.len);
        }
    }

    #[test]
    fn fixed_n_sampler_keeps_its_layout_contract(
        n in 1usize..200,
        p in 0.05f64..=0.95,
        seed in any::<u64>(),
        index in 0u64..16,
    ) {
        let set = sample_fixed_n_intervals(n, p, seed, index).unwrap();
        prop_assert_eq!(set.n(), n);
        prop_assert_eq!(set.zero_sites, set.intervals.iter().map(|iv| iv.len).sum::<usize>());
        prop_assert!(set.intervals.iter().all(|iv| iv.len >= 1));
        prop_assert_eq!(set.longest, set.intervals.iter().map(|iv| iv.len).max().unwrap());
        // Single occupied separators: next run starts right after them.
        for w in set.intervals.windows(2) {
            prop_assert_eq!(w[1].x0, w[0].x0 + w[0].len + 1);
        }
    }

    #[test]
    fn rayleigh_quotients_stay_inside_the_spectrum_hull(
        params in params_strategy(),
        seed in any::<u64>(),
        raw in proptest::collection::vec(-1.0f64..1.0, 1..64),
    ) {
        prop_assume!(raw.iter().any(|v| v.abs() > 1e-3));
        let r = PotentialRealization::sample(&params, seed, 0);
        let h = TridiagonalOperator::from_potential(&r);
        let mut v = raw;
        v.resize(params.sites, 0.37);
        let q = h.rayleigh(&v).unwrap();
        prop_assert!(q > 0.0 && q < params.spectrum_top(), "rayleigh {q}");
    }

    #[test]
    fn geometric_grids_parse_sorted_with_exact_endpoints(
        lo in 1e-4f64..1.0,
        factor in 1.01f64..50.0,
        n in 2usize..24,
    ) {
        let hi = lo * factor;
        let text = format!("{lo}:{hi}:{n}");
        let grid = parse_eps_grid(&text).unwrap();
        prop_assert_eq!(grid.len(), n);
        prop_assert_eq!(grid[0].to_bits(), lo.to_bits());
        prop_assert_eq!(grid[n - 1].to_bits(), hi.to_bits());
        for w in grid.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
    }
}
