//! Property tests for the set-level primitives, file formats, and
//! generators.

use proptest::prelude::*;

use spantree::expansion::check_expander_exact;
use spantree::generators::{gen_doubled, gen_gnp, gen_random_regular};
use spantree::trees::{decompose, pruefer_from_tree, tree_from_pruefer, Tree};
use spantree::{Graph, VertexSet};

fn arb_graph() -> impl Strategy<Value = Graph> {
    (1usize..12, 0.0f64..=1.0, any::<u64>())
        .prop_map(|(n, p, seed)| gen_gnp(n, p, seed).unwrap())
}

fn subset_of(n: usize, mask: u16) -> VertexSet {
    (0..n).filter(|v| mask >> v & 1 == 1).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ordered_edge_count_is_symmetric(g in arb_graph(), xm: u16, ym: u16) {
        let x = subset_of(g.n(), xm);
        let y = subset_of(g.n(), ym);
        prop_assert_eq!(
            g.ordered_edge_count(&x, &y).unwrap(),
            g.ordered_edge_count(&y, &x).unwrap()
        );
    }

    #[test]
    fn self_pair_count_doubles_induced_edges(g in arb_graph(), xm: u16) {
        let x = subset_of(g.n(), xm);
        let (induced, _) = g.induced_subgraph(&x).unwrap();
        prop_assert_eq!(g.ordered_edge_count(&x, &x).unwrap(), 2 * induced.edge_count());
    }

    #[test]
    fn external_neighborhood_fits_outside(g in arb_graph(), xm: u16) {
        let x = subset_of(g.n(), xm);
        let nbhd = g.external_neighborhood(&x).unwrap();
        prop_assert!(nbhd.len() <= g.n() - x.len());
        prop_assert!(nbhd.is_disjoint(&x));
    }

    #[test]
    fn graph_files_round_trip(g in arb_graph()) {
        let (back, _) = Graph::from_text(&g.to_text(Some("comment"))).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(&Graph::from_json(&g.to_json()).unwrap(), &g);
    }

    #[test]
    fn pruefer_round_trip(seq in proptest::collection::vec(0usize..9, 0..8)) {
        let n = seq.len() + 2;
        let seq: Vec<usize> = seq.into_iter().map(|s| s % n).collect();
        let t = tree_from_pruefer(&seq).unwrap();
        prop_assert_eq!(pruefer_from_tree(&t), seq);
    }

    #[test]
    fn tree_lines_round_trip(seq in proptest::collection::vec(0usize..9, 1..8)) {
        let n = seq.len() + 2;
        let seq: Vec<usize> = seq.into_iter().map(|s| s % n).collect();
        let t = tree_from_pruefer(&seq).unwrap();
        prop_assert_eq!(&Tree::from_parent_line(&t.to_parent_line()).unwrap(), &t);
        prop_assert_eq!(&Tree::from_pruefer_line(&t.to_pruefer_line()).unwrap(), &t);
    }

    #[test]
    fn decomposition_partitions_by_degree(seq in proptest::collection::vec(0usize..11, 1..10)) {
        let n = seq.len() + 2;
        let seq: Vec<usize> = seq.into_iter().map(|s| s % n).collect();
        let t = tree_from_pruefer(&seq).unwrap();
        let dec = decompose(&t);
        // leaves, bare-path vertices, and branching vertices tile the tree
        let mut seen = vec![0usize; n];
        for &v in dec.leaves.iter() {
            seen[v] += 1;
        }
        for path in &dec.bare_paths {
            for &v in path {
                seen[v] += 1;
                prop_assert_eq!(t.degree(v), 2);
            }
        }
        for (v, slot) in seen.iter_mut().enumerate() {
            if t.degree(v) >= 3 {
                *slot += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn regular_outputs_are_regular(n in 4usize..24, r in 0usize..8, seed: u64) {
        let r = r.min(n - 1);
        prop_assume!(r * n % 2 == 0);
        let g = gen_random_regular(n, r, seed).unwrap();
        prop_assert!((0..n).all(|v| g.degree(v) == r));
    }

    #[test]
    fn doubling_projects_two_to_one(g in arb_graph(), seed: u64) {
        let doubled = gen_doubled(&g, seed);
        prop_assert_eq!(doubled.n(), 2 * g.n());
        prop_assert_eq!(doubled.edge_count(), 2 * g.edge_count());
        for (u, v) in doubled.edges() {
            prop_assert!(g.has_edge(u / 2, v / 2));
        }
    }

    #[test]
    fn failing_verdicts_carry_live_witnesses(n in 4usize..10, seed: u64) {
        let g = gen_gnp(n, 0.25, seed).unwrap();
        let v = check_expander_exact(&g, 2.0).unwrap();
        prop_assert!(v.witness_revalidates(&g));
    }

}

/// Expansion comparisons are exact in the binary value of `d`, with no
/// epsilon slack. On the 6-cycle at `d = 1` an adjacent pair sits exactly
/// on the E1 boundary (`|N| = 2 = d |X|`) and the verdict is a pass. One
/// ulp above, that pair fails. One ulp below, the set-size threshold
/// itself flips — `6 / 2d` exceeds 3 exactly, so `m` becomes 4, triples
/// enter the quantifier range, and a triple fails instead.
#[test]
fn expander_check_is_ulp_exact_at_the_boundary() {
    use spantree::expansion::{VerdictStatus, Witness};
    let c6 = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]).unwrap();
    let at = check_expander_exact(&c6, 1.0).unwrap();
    assert_eq!((at.status, at.m), (VerdictStatus::Pass, 3));

    let above = f64::from_bits(1.0f64.to_bits() + 1);
    let v = check_expander_exact(&c6, above).unwrap();
    assert_eq!((v.status, v.m), (VerdictStatus::FailE1, 3));
    assert!(matches!(&v.witness, Some(Witness::E1 { x, .. }) if x.len() == 2));
    assert!(v.witness_revalidates(&c6));

    let below = f64::from_bits(1.0f64.to_bits() - 1);
    let v = check_expander_exact(&c6, below).unwrap();
    assert_eq!((v.status, v.m), (VerdictStatus::FailE1, 4));
    assert!(matches!(&v.witness, Some(Witness::E1 { x, .. }) if x.len() == 3));
    assert!(v.witness_revalidates(&c6));
}
