//! Binary graph classifiers: the contract consumed by the walk plus
//! deterministic rule-based classifiers for desk-scale experiments.

use serde::{Deserialize, Serialize};

use crate::graphspace::{Label, LabeledGraph};
use crate::{Error, Result};

/// Accept-class probability. Accept iff strictly above 0.5.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Prediction {
    pub p_accept: f64,
}

pub const DECISION_THRESHOLD: f64 = 0.5;

impl Prediction {
    pub fn new(p_accept: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_accept) {
            return Err(Error::InvalidProbability(p_accept));
        }
        Ok(Self { p_accept })
    }

    pub fn accepts(self) -> bool {
        self.p_accept > DECISION_THRESHOLD
    }
}

pub trait Classifier: Send + Sync {
    fn predict(&self, g: &LabeledGraph) -> Result<Prediction>;

    /// Element-wise equal to `predict`; external classifiers answer in one round trip.
    fn predict_batch(&self, graphs: &[LabeledGraph]) -> Result<Vec<Prediction>> {
        graphs.iter().map(|g| self.predict(g)).collect()
    }
}

/// Accepts exactly the graphs with two nodes of the same colour. Nodes carrying
/// the `blank` label count as uncoloured.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SameColorPair {
    pub blank: Option<Label>,
}

impl Classifier for SameColorPair {
    fn predict(&self, g: &LabeledGraph) -> Result<Prediction> {
        let mut colors: Vec<Label> = g.labels().iter().copied().filter(|&l| Some(l) != self.blank).collect();
        colors.sort_unstable();
        let repeated = colors.windows(2).any(|w| w[0] == w[1]);
        Ok(Prediction {
            p_accept: if repeated { 1.0 } else { 0.0 },
        })
    }
}

/// Rejects graphs containing a forbidden labelled motif (as a not necessarily
/// induced subgraph) and accepts the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct ForbiddenMotif {
    motif: LabeledGraph,
    order: Vec<usize>,
    pub p_present: f64,
    pub p_absent: f64,
}

impl ForbiddenMotif {
    pub fn new(motif: LabeledGraph) -> Self {
        Self::with_probabilities(motif, 0.0, 1.0).expect("default probabilities are valid")
    }

    pub fn with_probabilities(motif: LabeledGraph, p_present: f64, p_absent: f64) -> Result<Self> {
        Prediction::new(p_present)?;
        Prediction::new(p_absent)?;
        let order = matching_order(&motif);
        Ok(Self {
            motif,
            order,
            p_present,
            p_absent,
        })
    }

    pub fn motif(&self) -> &LabeledGraph {
        &self.motif
    }

    pub fn contains_motif(&self, g: &LabeledGraph) -> bool {
        let mut map = vec![usize::MAX; self.motif.node_count()];
        let mut used = vec![false; g.node_count()];
        self.extend(g, 0, &mut map, &mut used)
    }

    fn extend(&self, g: &LabeledGraph, depth: usize, map: &mut [usize], used: &mut [bool]) -> bool {
        let Some(&m) = self.order.get(depth) else {
            return true;
        };
        let label = self.motif.label(m);
        for v in 0..g.node_count() {
            if used[v] || g.label(v) != label || g.degree(v) < self.motif.degree(m) {
                continue;
            }
            let consistent = self
                .motif
                .neighbors(m)
                .iter()
                .all(|&mn| map[mn] == usize::MAX || g.has_edge(v, map[mn]));
            if !consistent {
                continue;
            }
            map[m] = v;
            used[v] = true;
            if self.extend(g, depth + 1, map, used) {
                return true;
            }
            map[m] = usize::MAX;
            used[v] = false;
        }
        false
    }
}

/// Motif nodes in an order where each node (after the first of its component)
/// is adjacent to an earlier one, so edge checks prune early.
fn matching_order(motif: &LabeledGraph) -> Vec<usize> {
    let n = motif.node_count();
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let root = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| (motif.degree(v), std::cmp::Reverse(v)))
            .expect("unplaced node exists");
        placed[root] = true;
        order.push(root);
        let mut i = order.len() - 1;
        while i < order.len() {
            for &w in motif.neighbors(order[i]) {
                if !placed[w] {
                    placed[w] = true;
                    order.push(w);
                }
            }
            i += 1;
        }
    }
    order
}

impl Classifier for ForbiddenMotif {
    fn predict(&self, g: &LabeledGraph) -> Result<Prediction> {
        let p = if self.contains_motif(g) { self.p_present } else { self.p_absent };
        Ok(Prediction { p_accept: p })
    }
}

/// Accepts graphs with at least `min_triangles` triangles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleThreshold {
    pub min_triangles: usize,
    pub p_below: f64,
    pub p_at_least: f64,
}

impl TriangleThreshold {
    pub fn new(min_triangles: usize) -> Self {
        Self {
            min_triangles,
            p_below: 0.0,
            p_at_least: 1.0,
        }
    }
}

impl Classifier for TriangleThreshold {
    fn predict(&self, g: &LabeledGraph) -> Result<Prediction> {
        let p = if g.triangle_count() >= self.min_triangles {
            self.p_at_least
        } else {
            self.p_below
        };
        Prediction::new(p)
    }
}
