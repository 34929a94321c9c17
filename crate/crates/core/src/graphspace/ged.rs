//! Exact graph edit distance by bidirectional breadth-first search over edit space.
//!
//! Only usable on small graphs; it is the oracle the embedding proxy is checked against.

use std::collections::{BTreeSet, HashMap};

use super::canon::{CanonicalKey, Canonicalizer};
use super::edit::applicable_edits;
use super::{apply_edit, GraphError, Label, LabeledGraph};

pub const DEFAULT_GED_NODE_CAP: usize = 6;

#[derive(Clone, Debug)]
pub struct GedOracle {
    pub node_cap: usize,
    canon: Canonicalizer,
}

impl Default for GedOracle {
    fn default() -> Self {
        Self::new(DEFAULT_GED_NODE_CAP)
    }
}

struct Side {
    seen: HashMap<CanonicalKey, u32>,
    frontier: Vec<LabeledGraph>,
    depth: u32,
}

impl Side {
    fn new(g: &LabeledGraph, key: CanonicalKey) -> Self {
        Self {
            seen: HashMap::from([(key, 0)]),
            frontier: vec![g.clone()],
            depth: 0,
        }
    }
}

impl GedOracle {
    pub fn new(node_cap: usize) -> Self {
        // exact keys are required for the search to be sound
        let canon = Canonicalizer {
            exact_cap: node_cap.max(super::canon::DEFAULT_EXACT_CAP),
            ..Canonicalizer::default()
        };
        Self { node_cap, canon }
    }

    /// Minimum number of unit edits turning `g1` into a graph isomorphic to `g2`.
    pub fn ged(&self, g1: &LabeledGraph, g2: &LabeledGraph) -> Result<u32, GraphError> {
        for g in [g1, g2] {
            if g.node_count() > self.node_cap {
                return Err(GraphError::GedCapExceeded {
                    nodes: g.node_count(),
                    cap: self.node_cap,
                });
            }
        }
        let (k1, k2) = (self.canon.key(g1), self.canon.key(g2));
        if k1 == k2 {
            return Ok(0);
        }
        let alphabet: Vec<Label> = g1.label_set().union(&g2.label_set()).copied().collect::<BTreeSet<_>>().into_iter().collect();
        // some shortest path deletes edges, relabels, deletes nodes, inserts nodes,
        // then inserts edges, so it never exceeds these sizes
        let max_nodes = g1.node_count().max(g2.node_count());
        let max_edges = g1.edge_count().max(g2.edge_count());

        let mut a = Side::new(g1, k1);
        let mut b = Side::new(g2, k2);
        loop {
            let (grow, other) = if a.frontier.len() <= b.frontier.len() {
                (&mut a, &b)
            } else {
                (&mut b, &a)
            };
            if grow.frontier.is_empty() {
                unreachable!("edit space between graphs over a shared alphabet is connected");
            }
            let mut next = Vec::new();
            let mut best: Option<u32> = None;
            for g in std::mem::take(&mut grow.frontier) {
                for edit in applicable_edits(&g, &alphabet) {
                    let h = apply_edit(&g, edit).expect("applicable edit");
                    if h.node_count() > max_nodes || h.edge_count() > max_edges {
                        continue;
                    }
                    let key = self.canon.key(&h);
                    if let Some(&d) = other.seen.get(&key) {
                        let total = grow.depth + 1 + d;
                        best = Some(best.map_or(total, |b| b.min(total)));
                    }
                    if !grow.seen.contains_key(&key) {
                        grow.seen.insert(key, grow.depth + 1);
                        next.push(h);
                    }
                }
            }
            if let Some(d) = best {
                return Ok(d);
            }
            grow.frontier = next;
            grow.depth += 1;
        }
    }

    /// Edit distance divided by `|V1| + |V2| + |E1| + |E2|`.
    pub fn normalized(&self, g1: &LabeledGraph, g2: &LabeledGraph) -> Result<f64, GraphError> {
        let denom = g1.node_count() + g2.node_count() + g1.edge_count() + g2.edge_count();
        if denom == 0 {
            return Err(GraphError::ZeroDenominator);
        }
        Ok(f64::from(self.ged(g1, g2)?) / denom as f64)
    }
}

pub fn exact_ged(g1: &LabeledGraph, g2: &LabeledGraph) -> Result<u32, GraphError> {
    GedOracle::default().ged(g1, g2)
}

pub fn normalized_ged(g1: &LabeledGraph, g2: &LabeledGraph) -> Result<f64, GraphError> {
    GedOracle::default().normalized(g1, g2)
}

#[cfg(test)]
mod tests {
    use super::*;

    const X: Label = Label(0);
    const Y: Label = Label(1);

    #[test]
    fn fixtures() {
        let tri = LabeledGraph::cycle(&[X, X, X]);
        let path = LabeledGraph::path(&[X, X, X]);
        assert_eq!(exact_ged(&tri, &tri.permuted(&[1, 2, 0])).unwrap(), 0);
        assert_eq!(exact_ged(&tri, &path).unwrap(), 1);
        let gx = LabeledGraph::new(vec![X], []).unwrap();
        let gy = LabeledGraph::new(vec![Y], []).unwrap();
        assert_eq!(exact_ged(&gx, &gy).unwrap(), 1);
        assert_eq!(normalized_ged(&tri, &tri).unwrap(), 0.0);
        assert_eq!(normalized_ged(&tri, &path).unwrap(), 1.0 / 11.0);
        assert_eq!(normalized_ged(&gx, &gy).unwrap(), 0.5);
    }

    #[test]
    fn node_removal_costs_degree_plus_one() {
        let star = LabeledGraph::star(X, &[X, X, X]);
        let three = LabeledGraph::new(vec![X; 3], []).unwrap();
        assert_eq!(exact_ged(&star, &three).unwrap(), 4);
        assert_eq!(exact_ged(&LabeledGraph::empty(), &star).unwrap(), 7);
    }

    #[test]
    fn cap_and_empty_denominator() {
        let big = LabeledGraph::path(&[X; 7]);
        assert!(matches!(
            exact_ged(&big, &LabeledGraph::empty()),
            Err(GraphError::GedCapExceeded { nodes: 7, cap: 6 })
        ));
        assert!(matches!(
            normalized_ged(&LabeledGraph::empty(), &LabeledGraph::empty()),
            Err(GraphError::ZeroDenominator)
        ));
    }
}
