//! Property-based invariants over randomized inputs.

use descentlab::chain::{transition_weights, ChainState};
use descentlab::perm::{cell_of, enumerate_all, insert, sample_uniform, Cell, Permutation};
use descentlab::rng::RandomStream;
use descentlab::sldp::frac_shift;
use proptest::prelude::*;

fn arb_permutation(max_n: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_n, any::<u64>()).prop_map(|(n, seed)| {
        let mut rng = RandomStream::new(seed);
        sample_uniform(n, &mut rng)
    })
}

proptest! {
    #[test]
    fn inverse_is_an_involution(p in arb_permutation(64)) {
        prop_assert_eq!(p.inverse().inverse(), p);
    }

    #[test]
    fn complement_flips_descent_count(p in arb_permutation(64)) {
        let n = p.len();
        prop_assert_eq!(p.complement().descent_count(), n - 1 - p.descent_count());
    }

    #[test]
    fn descents_and_reversed_descents_partition_gaps(p in arb_permutation(64)) {
        let n = p.len();
        prop_assert_eq!(p.descent_count() + p.reverse().descent_count(), n - 1);
    }

    #[test]
    fn inverse_preserves_value_set(p in arb_permutation(64)) {
        let q = p.inverse();
        prop_assert_eq!(q.len(), p.len());
        for i in 1..=p.len() {
            prop_assert_eq!(q.at(p.at(i) as usize) as usize, i);
        }
    }

    #[test]
    fn interior_points_land_in_valid_cells(
        n in 1usize..=40,
        col in 1u32..=41,
        row in 1u32..=41,
        fx in 0.05f64..0.95,
        fy in 0.05f64..0.95,
    ) {
        // build a point strictly inside cell (col, row) for size n
        let col = 1 + (col - 1) % (n as u32 + 1);
        let row = 1 + (row - 1) % (n as u32 + 1);
        let m = (n + 1) as f64;
        let u = ((col as f64 - 1.0 + fx) / m, (row as f64 - 1.0 + fy) / m);
        let cell = cell_of(u, n).unwrap();
        prop_assert_eq!(cell, Cell { col, row });
    }

    #[test]
    fn insertion_adds_binary_increments(p in arb_permutation(32), col in 1u32..=33, row in 1u32..=33) {
        let n = p.len() as u32;
        let cell = Cell { col: 1 + (col - 1) % (n + 1), row: 1 + (row - 1) % (n + 1) };
        let child = insert(&p, cell);
        prop_assert_eq!(child.len(), p.len() + 1);
        let da = child.descent_count() - p.descent_count();
        let db = child.inverse_descent_count() - p.inverse_descent_count();
        prop_assert!(da <= 1 && db <= 1);
        prop_assert_eq!(child.at(cell.col as usize), cell.row);
    }

    #[test]
    fn transition_weights_sum_when_defined(n in 1u64..=4096, d in 0u64..4096, dp in 0u64..4096) {
        let s = ChainState { n, d: d % n, dp: dp % n };
        if let Ok(w) = transition_weights(s) {
            prop_assert_eq!(w.both + w.d_only + w.dp_only + w.neither, w.denom);
            prop_assert_eq!(w.denom, (n + 1) * (n + 1));
        }
    }

    #[test]
    fn sampled_chain_weights_are_valid(seed in any::<u64>(), n_max in 2u64..=256) {
        let mut rng = RandomStream::new(seed);
        let s = descentlab::chain::sample_final(n_max, &mut rng);
        let w = transition_weights(s).unwrap();
        prop_assert_eq!(w.both + w.d_only + w.dp_only + w.neither, w.denom);
    }

    #[test]
    fn fractional_shift_stays_in_window(x in 0.001f64..0.999, n in 1u64..100_000) {
        let s = frac_shift(x, n);
        prop_assert!(s >= x - 1.0 - 1e-9);
        prop_assert!(s <= x + 1e-9);
    }

    #[test]
    fn shuffles_are_permutations(n in 1usize..=128, seed in any::<u64>()) {
        let mut rng = RandomStream::new(seed);
        let p = sample_uniform(n, &mut rng);
        prop_assert!(Permutation::new(p.values().to_vec()).is_ok());
    }
}

#[test]
fn insertion_covers_all_children_of_size_four() {
    // deterministic companion to the proptest cases: the (parent, cell)
    // fibers over size-4 children all have cardinality 4
    let mut hits = std::collections::HashMap::new();
    for p in enumerate_all(3).unwrap() {
        for col in 1..=4u32 {
            for row in 1..=4u32 {
                let child = insert(&p, Cell { col, row });
                *hits.entry(child.values().to_vec()).or_insert(0u32) += 1;
            }
        }
    }
    assert!(hits.values().all(|&c| c == 4));
    assert_eq!(hits.len(), 24);
}
