use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::classifier::ForbiddenMotif;
use crate::graphspace::{Label, LabeledGraph};
use crate::Result;

/// Parameters of the molecule-like synthetic corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_graphs: usize,
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Fraction of graphs carrying the forbidden motif.
    pub motif_fraction: f64,
    /// Expected number of ring-closing edges per graph.
    pub rings: f64,
    /// Classifier accept probability with and without the motif.
    pub p_present: f64,
    pub p_absent: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_graphs: 200,
            min_nodes: 5,
            max_nodes: 12,
            motif_fraction: 0.6,
            rings: 0.6,
            p_present: 0.1,
            p_absent: 0.9,
            seed: 0,
        }
    }
}

// C, N, O, S with rough organic frequencies
const ATOMS: [(Label, f64); 4] = [(Label(0), 0.62), (Label(1), 0.14), (Label(2), 0.2), (Label(3), 0.04)];
const MAX_DEGREE: usize = 4;

/// An N atom bonded to two O atoms.
pub fn nitro_motif() -> LabeledGraph {
    LabeledGraph::star(Label(1), &[Label(2), Label(2)])
}

fn atom(rng: &mut ChaCha8Rng) -> Label {
    let mut x: f64 = rng.gen();
    for (l, w) in ATOMS {
        if x < w {
            return l;
        }
        x -= w;
    }
    ATOMS[0].0
}

/// Random tree with bounded degree plus a few ring closures.
fn skeleton(rng: &mut ChaCha8Rng, n: usize, rings: f64) -> (Vec<Label>, Vec<(usize, usize)>) {
    let labels: Vec<Label> = (0..n).map(|_| atom(rng)).collect();
    let mut degree = vec![0usize; n];
    let mut edges = Vec::new();
    for v in 1..n {
        let open: Vec<usize> = (0..v).filter(|&u| degree[u] < MAX_DEGREE).collect();
        let u = *open.choose(rng).expect("a tree always has an open slot");
        edges.push((u, v));
        degree[u] += 1;
        degree[v] += 1;
    }
    let closures = (0..3).filter(|_| rng.gen_bool((rings / 3.0).clamp(0.0, 1.0))).count();
    for _ in 0..closures {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        let (a, b) = (u.min(v), u.max(v));
        if a != b && degree[a] < MAX_DEGREE && degree[b] < MAX_DEGREE && !edges.contains(&(a, b)) {
            edges.push((a, b));
            degree[a] += 1;
            degree[b] += 1;
        }
    }
    (labels, edges)
}

/// Generates the corpus and its forbidden-motif classifier. Class labels are
/// the classifier's decisions, so reject graphs are exactly the motif carriers.
pub fn gen_synthetic(cfg: &SynthConfig) -> Result<(Dataset, ForbiddenMotif)> {
    let clf = ForbiddenMotif::with_probabilities(nitro_motif(), cfg.p_present, cfg.p_absent)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut graphs = Vec::with_capacity(cfg.n_graphs);
    let mut classes = Vec::with_capacity(cfg.n_graphs);
    while graphs.len() < cfg.n_graphs {
        let with_motif = rng.gen_bool(cfg.motif_fraction);
        let n = rng.gen_range(cfg.min_nodes..=cfg.max_nodes);
        let base = if with_motif { n.saturating_sub(3).max(1) } else { n };
        let (mut labels, mut edges) = skeleton(&mut rng, base, cfg.rings);
        if with_motif {
            let mut degree = vec![0usize; base];
            for &(u, v) in &edges {
                degree[u] += 1;
                degree[v] += 1;
            }
            let open: Vec<usize> = (0..base).filter(|&u| degree[u] < MAX_DEGREE).collect();
            let anchor = *open.choose(&mut rng).expect("skeleton has an open slot");
            labels.extend([Label(1), Label(2), Label(2)]);
            edges.extend([(anchor, base), (base, base + 1), (base, base + 2)]);
        }
        let g = LabeledGraph::new(labels, edges)?;
        // a skeleton may carry the motif by chance; keep the split clean
        if clf.contains_motif(&g) != with_motif {
            continue;
        }
        classes.push(u8::from(!with_motif));
        graphs.push(g);
    }
    Ok((Dataset::new("synthetic", graphs, classes), clf))
}
