//! Quick runtime cross-checks against exhaustive oracles.

use anyhow::{bail, Result};
use clap::Args;
use commonrec::config::RunConfig;
use commonrec::embedding::EmbeddingVector;
use commonrec::graphspace::{canonical_key, exact_ged, Label, LabeledGraph};
use commonrec::pipeline::explain_fcr;
use commonrec::recourse::{brute_force_best_r, greedy_select, CommonRecourse, DEFAULT_SUBSET_CAP};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random instances per check.
    #[arg(long, default_value_t = 100)]
    instances: usize,
    /// Skip the end-to-end reduction run.
    #[arg(long)]
    quick: bool,
}

fn random_graph(rng: &mut ChaCha8Rng, sizes: std::ops::RangeInclusive<usize>) -> LabeledGraph {
    let n = rng.gen_range(sizes);
    let labels = (0..n).map(|_| Label(rng.gen_range(0..2))).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(0.5) {
                edges.push((u, v));
            }
        }
    }
    LabeledGraph::new(labels, edges).expect("generated edges are valid")
}

fn permuted(rng: &mut ChaCha8Rng, g: &LabeledGraph) -> LabeledGraph {
    let mut perm: Vec<usize> = (0..g.node_count()).collect();
    perm.shuffle(rng);
    let mut labels = vec![Label(0); g.node_count()];
    for (u, &p) in perm.iter().enumerate() {
        labels[p] = g.label(u);
    }
    let edges = g.edges().iter().map(|&(u, v)| (perm[u], perm[v]));
    LabeledGraph::new(labels, edges).expect("permuted edges are valid")
}

/// Key equality must coincide with exact edit distance zero.
fn keys_match_ged(rng: &mut ChaCha8Rng, instances: usize) -> Result<String> {
    let mut iso = 0;
    for i in 0..instances {
        let a = random_graph(rng, 1..=5);
        let b = if i % 2 == 0 { permuted(rng, &a) } else { random_graph(rng, a.node_count()..=a.node_count()) };
        let zero = exact_ged(&a, &b)? == 0;
        if zero != (canonical_key(&a) == canonical_key(&b)) {
            bail!("pair {i}: ged zero is {zero} but keys disagree");
        }
        iso += zero as usize;
    }
    Ok(format!("{instances} pairs, {iso} isomorphic"))
}

fn ged_triangle(rng: &mut ChaCha8Rng, instances: usize) -> Result<String> {
    let n = (instances / 8).clamp(4, 14);
    let gs: Vec<LabeledGraph> = (0..n).map(|_| random_graph(rng, 1..=4)).collect();
    let mut d = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = exact_ged(&gs[i], &gs[j])?;
        }
    }
    for i in 0..n {
        for j in 0..n {
            if d[i][j] != d[j][i] {
                bail!("asymmetric distance between graphs {i} and {j}");
            }
            for k in 0..n {
                if d[i][k] > d[i][j] + d[j][k] {
                    bail!("triangle inequality fails on {i} {j} {k}");
                }
            }
        }
    }
    Ok(format!("{n} graphs, {} triples", n * n * n))
}

fn greedy_bound(rng: &mut ChaCha8Rng, instances: usize) -> Result<String> {
    let bound = 1.0 - (-1.0f64).exp();
    let mut worst = f64::INFINITY;
    for i in 0..instances {
        let (m, n, r) = (rng.gen_range(1..=10), rng.gen_range(1..=10), rng.gen_range(1..=3));
        let clusters: Vec<CommonRecourse> = (0..m)
            .map(|_| {
                let norm = rng.gen_range(0.01..0.1);
                CommonRecourse {
                    center: EmbeddingVector::new(vec![norm]).expect("finite"),
                    members: Vec::new(),
                    covered_inputs: (0..n).filter(|_| rng.gen_bool(0.3)).collect(),
                    norm,
                }
            })
            .collect();
        let greedy = greedy_select(&clusters, r, n, 0.1, 0.02).coverage;
        let best = brute_force_best_r(&clusters, r, n, 0.1, 0.02, DEFAULT_SUBSET_CAP)?.coverage;
        if greedy < bound * best - 1e-12 || greedy > best + 1e-12 {
            bail!("instance {i}: greedy {greedy} against optimum {best}");
        }
        if best > 0.0 {
            worst = worst.min(greedy / best);
        }
    }
    Ok(format!("{instances} instances, worst ratio {worst:.3}"))
}

/// The walk on a star-graph instance must reach the greedy max-coverage value.
fn reduction_run() -> Result<String> {
    let sets = [vec![0, 1, 2], vec![2, 3], vec![3, 4, 5], vec![0, 5]];
    let text = "steps = 4000\nbudget = 2\nseed = 1\nreject_by = \"classifier\"\n\
                [dataset]\nkind = \"reduction\"\nn_elements = 6\nsets = [[0, 1, 2], [2, 3], [3, 4, 5], [0, 5]]\n\
                [embedder]\nkind = \"wl-hash\"\nrounds = 0\n";
    let report = explain_fcr(&RunConfig::from_toml(text, &[])?)?;
    let mut covered = [false; 6];
    for _ in 0..2 {
        let gain = |s: &Vec<usize>| s.iter().filter(|&&u| !covered[u]).count();
        let best = (0..sets.len()).max_by_key(|&i| (gain(&sets[i]), std::cmp::Reverse(i))).expect("sets are non-empty");
        for &u in &sets[best] {
            covered[u] = true;
        }
    }
    let expected = covered.iter().filter(|&&c| c).count() as f64 / 6.0;
    if report.summary.coverage != expected {
        bail!("coverage {} but greedy max coverage gives {expected}", report.summary.coverage);
    }
    Ok(format!("coverage {expected:.4}"))
}

pub fn check(args: &OracleArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut results = vec![
        ("canonical-key", keys_match_ged(&mut rng, args.instances)),
        ("ged-metric", ged_triangle(&mut rng, args.instances)),
        ("greedy-bound", greedy_bound(&mut rng, args.instances)),
    ];
    if !args.quick {
        results.push(("reduction", reduction_run()));
    }
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("ok   {name}: {detail}"),
            Err(e) => {
                failed += 1;
                println!("FAIL {name}: {e:#}");
            }
        }
    }
    if failed > 0 {
        bail!("{failed} of {} oracle checks failed", results.len());
    }
    Ok(())
}
