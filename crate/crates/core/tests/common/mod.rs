#![allow(dead_code)]

use commonrec::embedding::EmbeddingVector;
use commonrec::graphspace::{Label, LabeledGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Erdős–Rényi graph on `n` nodes with labels drawn from `0..labels`.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64, labels: u32) -> LabeledGraph {
    let ls = (0..n).map(|_| Label(rng.gen_range(0..labels))).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    LabeledGraph::new(ls, edges).unwrap()
}

pub fn shuffled(rng: &mut impl Rng, g: &LabeledGraph) -> LabeledGraph {
    let mut perm: Vec<usize> = (0..g.node_count()).collect();
    perm.shuffle(rng);
    g.permuted(&perm)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Isomorphism by trying every bijection.
pub fn isomorphic_brute(a: &LabeledGraph, b: &LabeledGraph) -> bool {
    let n = a.node_count();
    if n != b.node_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    permutations(n).iter().any(|p| {
        (0..n).all(|v| a.label(v) == b.label(p[v])) && a.edges().iter().all(|&(u, v)| b.has_edge(p[u], p[v]))
    })
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        // ties share the average rank
        let avg = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Thirty random graphs on one to five nodes over two labels.
pub fn thirty_small_graphs() -> Vec<LabeledGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    (0..30)
        .map(|_| {
            let n = rng.gen_range(1..=5);
            random_graph(&mut rng, n, 0.5, 2)
        })
        .collect()
}

/// `out[a][b]`: a and b are core points joined by a chain of core points
/// at most `eps` apart. Computed by boolean transitive closure.
#[allow(clippy::needless_range_loop)]
pub fn density_reachability(points: &[EmbeddingVector], eps: f64, min_points: usize) -> Vec<Vec<bool>> {
    let n = points.len();
    let near = |a: usize, b: usize| points[a].distance(&points[b]) <= eps;
    let core: Vec<bool> = (0..n).map(|a| (0..n).filter(|&b| near(a, b)).count() >= min_points).collect();
    let mut reach: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|b| core[a] && core[b] && near(a, b)).collect()).collect();
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
    reach
}
