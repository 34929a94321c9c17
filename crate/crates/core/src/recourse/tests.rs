use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::embedding::RecourseVector;

fn v(coords: &[f64]) -> EmbeddingVector {
    EmbeddingVector::new(coords.to_vec()).unwrap()
}

fn key(i: u8) -> CanonicalKey {
    CanonicalKey::from_hex(&format!("00{i:02x}")).unwrap()
}

fn rv(source: usize, target: u8, coords: &[f64]) -> RecourseVector {
    RecourseVector {
        vec: v(coords),
        source,
        target: key(target),
    }
}

fn set_recourse(covered: &[usize], norm: f64) -> CommonRecourse {
    CommonRecourse {
        center: v(&[norm]),
        members: Vec::new(),
        covered_inputs: covered.to_vec(),
        norm,
    }
}

#[test]
fn coverage_of_nothing_is_zero() {
    let pool = RecoursePool::from_vectors(2, 0.1, vec![rv(0, 1, &[0.05, 0.0])]);
    assert_eq!(coverage(&[], &pool, 0.02), 0.0);
    assert_eq!(cost(&[], &pool, 0.02), 0.0);
}

#[test]
fn own_recourse_covers_single_input() {
    let pool = RecoursePool::from_vectors(1, 0.1, vec![rv(0, 1, &[0.05, 0.01])]);
    assert_eq!(coverage(&[v(&[0.05, 0.01])], &pool, 0.02), 1.0);
}

#[test]
fn cost_takes_the_cheaper_recourse() {
    let pool = RecoursePool::from_vectors(1, 1.0, vec![rv(0, 1, &[0.3, 0.0]), rv(0, 2, &[0.0, 0.5])]);
    let c = cost(&[v(&[0.3, 0.0]), v(&[0.0, 0.5])], &pool, 0.01);
    assert!((c - 0.3).abs() < 1e-12);
}

#[test]
fn cost_sums_per_input_minima() {
    let pool = RecoursePool::from_vectors(3, 1.0, vec![rv(0, 1, &[0.2, 0.0]), rv(1, 2, &[0.0, 0.4]), rv(1, 3, &[0.0, 0.6])]);
    let c = cost(&[v(&[0.2, 0.0]), v(&[0.0, 0.4]), v(&[0.0, 0.6])], &pool, 0.01);
    assert!((c - 0.6).abs() < 1e-12);
    assert!((coverage(&[v(&[0.2, 0.0]), v(&[0.0, 0.4])], &pool, 0.01) - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn pool_respects_closed_theta_ball() {
    let inputs = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0])];
    let cfs = vec![(key(1), v(&[0.0, 0.5])), (key(2), v(&[1.0, 0.25]))];
    let pool = RecoursePool::build(&inputs, &cfs, 0.5);
    let pairs: Vec<(usize, CanonicalKey)> = pool.vectors().iter().map(|r| (r.source, r.target.clone())).collect();
    assert_eq!(pairs, vec![(0, key(1)), (1, key(2))]);
    assert_eq!(pool.restricted(|k| *k == key(2)).len(), 1);
}

#[test]
fn identical_vectors_form_one_cluster() {
    let pool = RecoursePool::from_vectors(3, 0.1, (0..3).map(|g| rv(g, 1, &[0.03, 0.04])).collect());
    let clusters = cluster_recourse(&pool, &ClusterConfig::default()).unwrap();
    assert_eq!(clusters.len(), 1);
    assert_eq!(clusters[0].center, v(&[0.03, 0.04]));
    assert_eq!(clusters[0].covered_inputs, vec![0, 1, 2]);
    assert!((clusters[0].norm - 0.05).abs() < 1e-12);
}

#[test]
fn far_vectors_are_singletons() {
    let d = 0.02;
    let pool = RecoursePool::from_vectors(2, 0.1, vec![rv(0, 1, &[0.0, 0.0]), rv(1, 2, &[3.0 * d, 0.0])]);
    let clusters = cluster_recourse(&pool, &ClusterConfig::default()).unwrap();
    assert_eq!(clusters.len(), 2);
    assert!(clusters.iter().all(|c| c.members.len() == 1));
}

#[test]
fn cluster_cap_is_enforced() {
    let pool = RecoursePool::from_vectors(3, 0.1, (0..3).map(|g| rv(g, 1, &[0.0])).collect());
    let cfg = ClusterConfig {
        max_points: 2,
        ..ClusterConfig::default()
    };
    assert!(matches!(cluster_recourse(&pool, &cfg), Err(crate::Error::WorkCap { .. })));
}

/// Components of the core points under the `eps` relation, by transitive closure.
/// Each point maps to the set of components that can claim it.
#[allow(clippy::needless_range_loop)]
fn closure_oracle(points: &[EmbeddingVector], eps: f64, min_points: usize) -> Vec<std::collections::BTreeSet<usize>> {
    let n = points.len();
    let near = |a: usize, b: usize| points[a].distance(&points[b]) <= eps;
    let core: Vec<bool> = (0..n).map(|a| (0..n).filter(|&b| near(a, b)).count() >= min_points).collect();
    let mut reach = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            reach[a][b] = core[a] && core[b] && near(a, b);
        }
    }
    for k in 0..n {
        for a in 0..n {
            if reach[a][k] {
                for b in 0..n {
                    if reach[k][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
    }
    // component id = smallest reachable core index
    let comp: Vec<usize> = (0..n).map(|a| (0..n).find(|&b| reach[a][b]).unwrap_or(a)).collect();
    (0..n)
        .map(|p| {
            if core[p] {
                [comp[p]].into()
            } else {
                (0..n).filter(|&c| core[c] && near(c, p)).map(|c| comp[c]).collect()
            }
        })
        .collect()
}

#[test]
fn dbscan_matches_density_reachability_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let eps = 0.02;
    for min_points in [2, 3, 4] {
        let mut points: Vec<EmbeddingVector> = (0..200).map(|_| v(&[rng.gen_range(0.0..0.4), rng.gen_range(0.0..0.4)])).collect();
        // exact copies, some isolated points among them
        for _ in 0..60 {
            let i = rng.gen_range(0..points.len());
            points.push(points[i].clone());
        }
        let clusters = dbscan(&points, eps, min_points);
        let mut label = vec![usize::MAX; points.len()];
        for (c, members) in clusters.iter().enumerate() {
            for &m in members {
                assert_eq!(label[m], usize::MAX, "point in two clusters");
                label[m] = c;
            }
        }
        assert!(label.iter().all(|&l| l != usize::MAX));
        let hosts = closure_oracle(&points, eps, min_points);
        let n = points.len();
        for a in 0..n {
            for b in (a + 1)..n {
                let together = label[a] == label[b];
                let unique = hosts[a].len() == 1 && hosts[b].len() == 1;
                if unique {
                    assert_eq!(together, hosts[a] == hosts[b], "pair ({a},{b})");
                } else if together {
                    // a border point claimed by several clusters goes to exactly one of them
                    assert!(hosts[a].intersection(&hosts[b]).next().is_some(), "pair ({a},{b})");
                }
            }
        }
    }
}

#[test]
fn greedy_fixture_picks_r1_then_r3() {
    let clusters = vec![set_recourse(&[0, 1, 2], 0.1), set_recourse(&[2, 3], 0.1), set_recourse(&[3, 4], 0.1)];
    let s = greedy_select(&clusters, 2, 5, 0.1, 0.02);
    assert_eq!(s.selected, vec![clusters[0].clone(), clusters[2].clone()]);
    assert_eq!(s.coverage, 1.0);
    assert_eq!(s.gains, vec![3, 2]);
    assert_eq!(s.curve, vec![0.6, 1.0]);
    let b = brute_force_best_r(&clusters, 2, 5, 0.1, 0.02, DEFAULT_SUBSET_CAP).unwrap();
    assert_eq!(b.coverage, 1.0);
}

#[test]
fn greedy_on_nothing_is_empty() {
    let s = greedy_select(&[], 3, 4, 0.1, 0.02);
    assert!(s.selected.is_empty());
    assert_eq!(s.coverage, 0.0);
}

#[test]
fn greedy_stops_at_zero_gain() {
    let clusters = vec![set_recourse(&[0, 1], 0.1), set_recourse(&[1], 0.05)];
    let s = greedy_select(&clusters, 5, 3, 0.1, 0.02);
    assert_eq!(s.selected.len(), 1);
}

#[test]
fn greedy_breaks_ties_by_added_cost() {
    let clusters = vec![set_recourse(&[0, 1], 0.4), set_recourse(&[2, 3], 0.1)];
    let s = greedy_select(&clusters, 1, 4, 0.1, 0.02);
    assert_eq!(s.selected[0].norm, 0.1);
}

#[test]
fn brute_force_single_cluster() {
    let clusters = vec![set_recourse(&[1], 0.2)];
    let s = brute_force_best_r(&clusters, 3, 2, 0.1, 0.02, DEFAULT_SUBSET_CAP).unwrap();
    assert_eq!(s.selected, clusters);
}

#[test]
fn brute_force_cap() {
    let clusters: Vec<CommonRecourse> = (0..30).map(|i| set_recourse(&[i], 0.1)).collect();
    assert!(matches!(
        brute_force_best_r(&clusters, 15, 30, 0.1, 0.02, DEFAULT_SUBSET_CAP),
        Err(crate::Error::WorkCap { .. })
    ));
}

fn random_sets(rng: &mut ChaCha8Rng, n_sets: usize, universe: usize) -> Vec<Vec<usize>> {
    (0..n_sets)
        .map(|_| (0..universe).filter(|_| rng.gen_bool(0.3)).collect())
        .collect()
}

#[test]
fn greedy_within_one_minus_inverse_e_of_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let bound = 1.0 - (-1.0f64).exp();
    for _ in 0..500 {
        let n = rng.gen_range(1..=10);
        let universe = rng.gen_range(1..=12);
        let r = rng.gen_range(1..=4);
        let clusters: Vec<CommonRecourse> = random_sets(&mut rng, n, universe)
            .iter()
            .map(|s| set_recourse(s, rng.gen_range(0.01..0.1)))
            .collect();
        let g = greedy_select(&clusters, r, universe, 0.1, 0.02);
        let b = brute_force_best_r(&clusters, r, universe, 0.1, 0.02, DEFAULT_SUBSET_CAP).unwrap();
        assert!(g.coverage <= b.coverage + 1e-12);
        assert!(g.coverage >= bound * b.coverage - 1e-12);
    }
}

#[test]
fn nearest_filter_single_candidate() {
    let cands = vec![(key(1), v(&[1.0]))];
    assert_eq!(fc_filter_nearest(&[v(&[0.0]), v(&[2.0])], &cands), vec![0]);
}

#[test]
fn nearest_filter_shared_candidate_kept_once() {
    let cands = vec![(key(1), v(&[0.5])), (key(2), v(&[5.0]))];
    assert_eq!(fc_filter_nearest(&[v(&[0.0]), v(&[1.0])], &cands), vec![0]);
}

#[test]
fn nearest_filter_ties_prefer_smaller_key() {
    let cands = vec![(key(9), v(&[1.0])), (key(3), v(&[-1.0]))];
    assert_eq!(fc_filter_nearest(&[v(&[0.0])], &cands), vec![1]);
}

#[test]
fn nearest_filter_matches_exhaustive_argmin() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let inputs: Vec<EmbeddingVector> = (0..rng.gen_range(1..8)).map(|_| v(&[rng.gen(), rng.gen()])).collect();
        let cands: Vec<(CanonicalKey, EmbeddingVector)> =
            (0..rng.gen_range(1..20u8)).map(|i| (key(i), v(&[rng.gen(), rng.gen()]))).collect();
        let kept = fc_filter_nearest(&inputs, &cands);
        assert!(kept.len() <= inputs.len());
        for z in &inputs {
            let best = cands.iter().map(|c| c.1.distance(z)).fold(f64::INFINITY, f64::min);
            assert!(kept.iter().any(|&i| cands[i].1.distance(z) == best));
        }
        for &i in &kept {
            assert!(inputs.iter().any(|z| {
                let d = cands[i].1.distance(z);
                cands.iter().all(|c| c.1.distance(z) >= d)
            }));
        }
    }
}

/// Inputs G1..G3, counterfactuals H1..H4, recourse f1..f3 (all 0-indexed).
fn fc_example() -> TableObjective {
    TableObjective::new(4, 3, 2, vec![(0, 0, 0), (1, 0, 1), (2, 1, 2), (3, 2, 0), (0, 2, 2)]).unwrap()
}

#[test]
fn fc_example_h1_h3_covers_everything() {
    let obj = fc_example();
    let (recourse, covered) = obj.best_recourse(&[0, 2]);
    assert_eq!(covered, 3);
    assert_eq!(recourse, vec![0, 2]);
    let best = brute_force_fc(&obj, 2, DEFAULT_SUBSET_CAP).unwrap();
    assert_eq!(best.value, 3);
    assert_eq!(best.chosen, vec![0, 2]);
}

#[test]
fn fc_example_as_two_cover() {
    // element = (input, counterfactual, recourse) incidence; a pick of H covers its
    // incidences on side one, a pick of f on side two.
    let obj = fc_example();
    let side1: Vec<Vec<usize>> = (0..4)
        .map(|h| (0..obj.entries.len()).filter(|&e| obj.entries[e].0 == h).collect())
        .collect();
    let side2: Vec<Vec<usize>> = (0..3)
        .map(|r| (0..obj.entries.len()).filter(|&e| obj.entries[e].2 == r).collect())
        .collect();
    let r = two_budget_two_cover(&side1, &side2, 2, 2, DEFAULT_TWO_COVER_EXACT_CAP);
    assert_eq!(r.objective, 3);
}

#[test]
fn fc_objective_is_not_pseudo_modular() {
    // four counterfactuals on four inputs; recourse groups {0} | {1} | {2, 3}
    let obj = TableObjective::new(4, 4, 2, vec![(0, 0, 0), (1, 1, 1), (2, 2, 2), (3, 3, 2)]).unwrap();
    let a = [0, 1];
    let ga = obj.value(&a).unwrap();
    assert_eq!(obj.gain(&a, ga, 2).unwrap(), 0);
    assert_eq!(obj.gain(&a, ga, 3).unwrap(), 0);
    assert_eq!(obj.value(&[0, 1, 2, 3]).unwrap() - ga, 1);
}

#[test]
fn randomized_greedy_single_pick_is_top_gain() {
    let obj = TableObjective::new(3, 3, 1, vec![(0, 0, 0), (0, 1, 0), (0, 2, 0), (1, 0, 1), (2, 1, 2)]).unwrap();
    for seed in 0..20 {
        let s = randomized_greedy_fc(&obj, 1, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(s.chosen, vec![0]);
        assert_eq!(s.value, 3);
        assert!(s.c1_held);
    }
}

#[test]
fn randomized_greedy_dominant_element_in_first_shortlist() {
    let obj = TableObjective::new(4, 4, 2, vec![(3, 0, 0), (3, 1, 0), (3, 2, 0), (3, 3, 0), (0, 0, 1), (1, 1, 1)]).unwrap();
    let mut seen = false;
    for seed in 0..40 {
        let s = randomized_greedy_fc(&obj, 2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        seen |= s.chosen.contains(&3);
        assert!(s.chosen.len() <= 2);
    }
    assert!(seen);
}

#[test]
fn randomized_greedy_reports_c1_violation() {
    let obj = TableObjective::new(3, 2, 1, vec![(0, 0, 0), (1, 1, 0)]).unwrap();
    let s = randomized_greedy_fc(&obj, 3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(s.chosen.len(), 3);
    assert!(!s.c1_held);
}

fn random_table(rng: &mut ChaCha8Rng) -> (TableObjective, usize) {
    let n_cf = rng.gen_range(2..=10);
    let n_in = rng.gen_range(2..=8);
    let n_rec = rng.gen_range(1..=5);
    let budget_r = rng.gen_range(1..=3);
    let t = rng.gen_range(1..=3);
    let mut entries = Vec::new();
    for h in 0..n_cf {
        for g in 0..n_in {
            if rng.gen_bool(0.3) {
                entries.push((h, g, rng.gen_range(0..n_rec)));
            }
        }
    }
    (TableObjective::new(n_cf, n_in, budget_r, entries).unwrap(), t)
}

#[test]
fn randomized_greedy_meets_expected_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let (obj, t) = random_table(&mut rng);
        let opt = brute_force_fc(&obj, t, DEFAULT_SUBSET_CAP).unwrap().value as f64;
        let runs = 200;
        let mean = (0..runs)
            .map(|s| randomized_greedy_fc(&obj, t, &mut ChaCha8Rng::seed_from_u64(s)).unwrap().value as f64)
            .sum::<f64>()
            / runs as f64;
        let bound = (1.0 - (-1.0 / obj.budget as f64).exp()) * opt;
        assert!(mean >= bound - 0.1 * opt.max(1.0), "mean {mean} < bound {bound}");
    }
}

#[test]
fn two_cover_heuristic_never_beats_exhaustive() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let (n1, n2) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let s1 = random_sets(&mut rng, n1, 10);
        let s2 = random_sets(&mut rng, n2, 10);
        let r = two_budget_two_cover(&s1, &s2, rng.gen_range(0..=3), rng.gen_range(0..=3), DEFAULT_TWO_COVER_EXACT_CAP);
        assert!(r.exact);
        assert!(r.heuristic_objective <= r.objective);
    }
}

#[test]
fn embedded_objective_matches_fcr_on_all_candidates() {
    let inputs = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])];
    let cands = vec![
        (key(1), v(&[0.05, 0.0])),
        (key(2), v(&[1.05, 0.0])),
        (key(3), v(&[0.0, 1.05])),
        (key(4), v(&[5.0, 5.0])),
    ];
    let cfg = ClusterConfig::default();
    let obj = EmbeddedObjective::new(inputs.clone(), cands.clone(), 0.1, cfg.clone(), 2, Evaluator::Auto { subset_cap: 1000 });
    assert_eq!(obj.value(&[0, 1, 2, 3]).unwrap(), 3);
    let (summary, used) = obj.summary(&[0, 1]).unwrap();
    assert_eq!(used, Evaluator::Exhaustive);
    assert_eq!(summary.covered_count(), 2);
    let greedy = EmbeddedObjective::new(inputs, cands, 0.1, cfg, 1, Evaluator::Greedy);
    assert_eq!(greedy.summary(&[3]).unwrap().0.coverage, 0.0);
}

prop_compose! {
    fn family()(n_inputs in 1usize..12)(
        sets in prop::collection::vec(prop::collection::btree_set(0..n_inputs, 0..n_inputs), 1..8),
        n_inputs in Just(n_inputs),
    ) -> (usize, Vec<Vec<usize>>) {
        (n_inputs, sets.into_iter().map(|s| s.into_iter().collect()).collect())
    }
}

fn covered_by(sets: &[Vec<usize>], picks: &[usize], n: usize) -> usize {
    let clusters: Vec<CommonRecourse> = picks.iter().map(|&i| set_recourse(&sets[i], 0.1)).collect();
    Summary::from_selection(clusters, n, 0.1, 0.02).covered_count()
}

proptest! {
    #[test]
    fn coverage_is_monotone((n, sets) in family(), mask in any::<u16>(), extra in any::<u16>()) {
        let a: Vec<usize> = (0..sets.len()).filter(|i| mask >> i & 1 == 1).collect();
        let b: Vec<usize> = (0..sets.len()).filter(|i| (mask | extra) >> i & 1 == 1).collect();
        prop_assert!(covered_by(&sets, &a, n) <= covered_by(&sets, &b, n));
    }

    #[test]
    fn coverage_is_submodular((n, sets) in family(), mask in any::<u16>(), extra in any::<u16>(), r in 0usize..8) {
        let r = r % sets.len();
        let a: Vec<usize> = (0..sets.len()).filter(|i| mask >> i & 1 == 1).collect();
        let b: Vec<usize> = (0..sets.len()).filter(|i| (mask | extra) >> i & 1 == 1).collect();
        let with = |base: &[usize]| { let mut v = base.to_vec(); v.push(r); v };
        let gain_a = covered_by(&sets, &with(&a), n) - covered_by(&sets, &a, n);
        let gain_b = covered_by(&sets, &with(&b), n) - covered_by(&sets, &b, n);
        prop_assert!(gain_a >= gain_b);
    }

    #[test]
    fn per_input_cost_never_increases(norms in prop::collection::vec(0.01f64..1.0, 1..6)) {
        let n = 3;
        let mut best = [f64::INFINITY; 3];
        let mut picked = Vec::new();
        for (i, &norm) in norms.iter().enumerate() {
            let covered: Vec<usize> = (0..n).filter(|g| (i + g) % 2 == 0).collect();
            picked.push(set_recourse(&covered, norm));
            let s = Summary::from_selection(picked.clone(), n, 0.1, 0.02);
            let mut now = [f64::INFINITY; 3];
            for r in &s.selected {
                for &g in &r.covered_inputs {
                    now[g] = now[g].min(r.norm);
                }
            }
            for g in 0..n {
                prop_assert!(now[g] <= best[g]);
            }
            best = now;
        }
    }
}
