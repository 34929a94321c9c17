mod common;

use commonrec::graphspace::{
    apply_edit, applicable_edits, canonical_key, edit_neighbors, exact_ged, normalized_ged, parse_graph, to_text, GraphEdit,
    Label, LabeledGraph,
};
use common::{isomorphic_brute, random_graph, shuffled};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const X: Label = Label(0);
const Y: Label = Label(1);

/// Deletes one edge and inserts a missing one: same labels and edge count,
/// usually a different graph.
fn moved_edge(rng: &mut impl Rng, g: &LabeledGraph) -> LabeledGraph {
    let Some(&(u, v)) = g.edges().first() else {
        return g.clone();
    };
    let g = apply_edit(g, GraphEdit::DeleteEdge { u, v }).unwrap();
    let n = g.node_count();
    loop {
        let (s, t) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if s != t && !g.has_edge(s, t) {
            return apply_edit(&g, GraphEdit::InsertEdge { u: s, v: t }).unwrap();
        }
    }
}

#[test]
fn keys_agree_with_brute_force_isomorphism_on_8_node_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut same, mut different) = (0, 0);
    for round in 0..120 {
        let a = random_graph(&mut rng, 8, 0.35, 2);
        let b = match round % 3 {
            0 => shuffled(&mut rng, &a),
            // same labels and edge count, usually a different graph
            1 => {
                let moved = moved_edge(&mut rng, &a);
                shuffled(&mut rng, &moved)
            }
            _ => random_graph(&mut rng, 8, 0.35, 2),
        };
        let iso = isomorphic_brute(&a, &b);
        assert_eq!(canonical_key(&a) == canonical_key(&b), iso, "pair {round}");
        if iso {
            same += 1;
        } else {
            different += 1;
        }
    }
    assert!(same >= 40 && different >= 40, "{same} isomorphic, {different} not");
}

#[test]
fn exact_ged_is_a_metric_on_isomorphism_classes() {
    let gs = common::thirty_small_graphs();
    let n = gs.len();
    let mut d = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = exact_ged(&gs[i], &gs[j]).unwrap();
        }
    }
    for i in 0..n {
        for j in 0..n {
            assert_eq!(d[i][j], d[j][i], "symmetry {i} {j}");
            assert_eq!(d[i][j] == 0, isomorphic_brute(&gs[i], &gs[j]), "identity {i} {j}");
            for k in 0..n {
                assert!(d[i][k] <= d[i][j] + d[j][k], "triangle {i} {j} {k}");
            }
        }
    }
}

#[test]
fn normalized_ged_fixtures() {
    let triangle = LabeledGraph::cycle(&[X, X, X]);
    let path = LabeledGraph::path(&[X, X, X]);
    assert_eq!(exact_ged(&triangle, &path).unwrap(), 1);
    assert_eq!(normalized_ged(&triangle, &path).unwrap(), 1.0 / 11.0);
    let x = LabeledGraph::new(vec![X], []).unwrap();
    let y = LabeledGraph::new(vec![Y], []).unwrap();
    assert_eq!(normalized_ged(&x, &y).unwrap(), 0.5);
}

fn small_graph() -> impl Strategy<Value = LabeledGraph> {
    (1usize..=5, any::<u64>()).prop_map(|(n, seed)| random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.45, 3))
}

fn mid_graph() -> impl Strategy<Value = LabeledGraph> {
    (0usize..=9, any::<u64>()).prop_map(|(n, seed)| random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.3, 3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_format_round_trips(g in mid_graph()) {
        prop_assert_eq!(parse_graph(&to_text(&g)).unwrap(), g);
    }

    #[test]
    fn key_is_invariant_under_relabelling_nodes(g in mid_graph(), seed in any::<u64>()) {
        let h = shuffled(&mut ChaCha8Rng::seed_from_u64(seed), &g);
        prop_assert_eq!(canonical_key(&g), canonical_key(&h));
    }

    #[test]
    fn every_neighbor_is_one_edit_away(g in small_graph()) {
        let alphabet = [Label(0), Label(1), Label(2)];
        let own = canonical_key(&g);
        let nbs = edit_neighbors(&g, &alphabet).unwrap();
        for w in nbs.windows(2) {
            prop_assert!(w[0].key < w[1].key);
        }
        for nb in nbs.iter().take(6) {
            prop_assert!(nb.key != own);
            prop_assert_eq!(canonical_key(&nb.graph), nb.key.clone());
            prop_assert_eq!(exact_ged(&g, &nb.graph).unwrap(), 1);
        }
    }

    #[test]
    fn every_applicable_edit_applies(g in mid_graph()) {
        for e in applicable_edits(&g, &[Label(0), Label(1), Label(2)]) {
            let h = apply_edit(&g, e).unwrap();
            prop_assert!(h.edges().iter().all(|&(u, v)| u < v && v < h.node_count()));
        }
    }
}
