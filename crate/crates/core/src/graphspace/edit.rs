use std::fmt;

use serde::{Deserialize, Serialize};

use super::canon::{CanonicalKey, Canonicalizer};
use super::{GraphError, Label, LabeledGraph};

/// A unit-cost atomic edit.
///
/// Removing a node of degree `d` takes `d` edge deletions followed by one
/// isolated-node deletion, so every edit path has homogeneous step cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphEdit {
    InsertNode { label: Label },
    DeleteNode { node: usize },
    InsertEdge { u: usize, v: usize },
    DeleteEdge { u: usize, v: usize },
    Relabel { node: usize, label: Label },
}

impl fmt::Display for GraphEdit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphEdit::InsertNode { label } => write!(f, "insert-isolated-node({label})"),
            GraphEdit::DeleteNode { node } => write!(f, "delete-isolated-node({node})"),
            GraphEdit::InsertEdge { u, v } => write!(f, "insert-edge({u},{v})"),
            GraphEdit::DeleteEdge { u, v } => write!(f, "delete-edge({u},{v})"),
            GraphEdit::Relabel { node, label } => write!(f, "relabel-node({node},{label})"),
        }
    }
}

fn violation(edit: GraphEdit, reason: &'static str) -> GraphError {
    GraphError::EditPrecondition { edit, reason }
}

/// Applies one edit, returning a new graph. Node ids above a deleted node shift down by one.
pub fn apply_edit(g: &LabeledGraph, edit: GraphEdit) -> Result<LabeledGraph, GraphError> {
    let n = g.node_count();
    let in_range = |node: usize| node < n;
    match edit {
        GraphEdit::InsertNode { label } => Ok(g.with_isolated_node(label)),
        GraphEdit::DeleteNode { node } => {
            if !in_range(node) {
                return Err(violation(edit, "node does not exist"));
            }
            if g.degree(node) != 0 {
                return Err(violation(edit, "node is not isolated"));
            }
            let mut labels = g.labels().to_vec();
            labels.remove(node);
            let shift = |x: usize| if x > node { x - 1 } else { x };
            let edges = g.edges().iter().map(|&(u, v)| (shift(u), shift(v))).collect();
            Ok(LabeledGraph::from_sorted_edges(labels, edges))
        }
        GraphEdit::InsertEdge { u, v } => {
            if !in_range(u) || !in_range(v) {
                return Err(violation(edit, "endpoint does not exist"));
            }
            if u == v {
                return Err(violation(edit, "self-loops are not allowed"));
            }
            let e = (u.min(v), u.max(v));
            match g.edges().binary_search(&e) {
                Ok(_) => Err(violation(edit, "edge already present")),
                Err(pos) => {
                    let mut edges = g.edges().to_vec();
                    edges.insert(pos, e);
                    Ok(LabeledGraph::from_sorted_edges(g.labels().to_vec(), edges))
                }
            }
        }
        GraphEdit::DeleteEdge { u, v } => {
            let e = (u.min(v), u.max(v));
            match g.edges().binary_search(&e) {
                Ok(pos) => {
                    let mut edges = g.edges().to_vec();
                    edges.remove(pos);
                    Ok(LabeledGraph::from_sorted_edges(g.labels().to_vec(), edges))
                }
                Err(_) => Err(violation(edit, "edge absent")),
            }
        }
        GraphEdit::Relabel { node, label } => {
            if !in_range(node) {
                return Err(violation(edit, "node does not exist"));
            }
            if g.label(node) == label {
                return Err(violation(edit, "node already carries this label"));
            }
            Ok(g.relabelled(node, label))
        }
    }
}

/// Every edit whose precondition holds on `g`, in a fixed order.
pub fn applicable_edits(g: &LabeledGraph, alphabet: &[Label]) -> Vec<GraphEdit> {
    let n = g.node_count();
    let mut out = Vec::with_capacity(edit_count_bound(g, alphabet));
    for &label in alphabet {
        out.push(GraphEdit::InsertNode { label });
    }
    for node in 0..n {
        if g.degree(node) == 0 {
            out.push(GraphEdit::DeleteNode { node });
        }
    }
    for u in 0..n {
        for v in u + 1..n {
            if g.has_edge(u, v) {
                out.push(GraphEdit::DeleteEdge { u, v });
            } else {
                out.push(GraphEdit::InsertEdge { u, v });
            }
        }
    }
    for node in 0..n {
        for &label in alphabet {
            if label != g.label(node) {
                out.push(GraphEdit::Relabel { node, label });
            }
        }
    }
    out
}

/// Upper bound on the number of applicable edits, computed without enumerating them.
pub fn edit_count_bound(g: &LabeledGraph, alphabet: &[Label]) -> usize {
    let n = g.node_count();
    alphabet.len() + n + n * n.saturating_sub(1) / 2 + n * alphabet.len()
}

/// One graph of an edit neighbourhood, with the edit that produced it.
#[derive(Clone, Debug)]
pub struct Neighbor {
    pub graph: LabeledGraph,
    pub key: CanonicalKey,
    pub edit: GraphEdit,
}

/// The space of graphs reachable by unit edits over a fixed label alphabet.
#[derive(Clone, Debug)]
pub struct EditSpace {
    alphabet: Vec<Label>,
    canon: Canonicalizer,
    max_neighbors: usize,
}

pub const DEFAULT_MAX_NEIGHBORS: usize = 100_000;

impl EditSpace {
    pub fn new(alphabet: impl IntoIterator<Item = Label>) -> Result<Self, GraphError> {
        let mut alphabet: Vec<Label> = alphabet.into_iter().collect();
        alphabet.sort_unstable();
        alphabet.dedup();
        if alphabet.is_empty() {
            return Err(GraphError::EmptyAlphabet);
        }
        Ok(Self {
            alphabet,
            canon: Canonicalizer::default(),
            max_neighbors: DEFAULT_MAX_NEIGHBORS,
        })
    }

    pub fn with_max_neighbors(mut self, cap: usize) -> Self {
        self.max_neighbors = cap;
        self
    }

    pub fn with_canonicalizer(mut self, canon: Canonicalizer) -> Self {
        self.canon = canon;
        self
    }

    pub fn alphabet(&self) -> &[Label] {
        &self.alphabet
    }

    pub fn canonicalizer(&self) -> &Canonicalizer {
        &self.canon
    }

    pub fn key(&self, g: &LabeledGraph) -> CanonicalKey {
        self.canon.key(g)
    }

    /// All graphs one unit edit away from `g`, deduplicated up to isomorphism and
    /// sorted by canonical key. `g` itself never appears.
    pub fn neighbors(&self, g: &LabeledGraph) -> Result<Vec<Neighbor>, GraphError> {
        let bound = edit_count_bound(g, &self.alphabet);
        if bound > self.max_neighbors {
            return Err(GraphError::NeighborhoodTooLarge {
                bound,
                cap: self.max_neighbors,
            });
        }
        let own = self.canon.key(g);
        let mut out: Vec<Neighbor> = applicable_edits(g, &self.alphabet)
            .into_iter()
            .map(|edit| {
                let graph = apply_edit(g, edit).expect("enumerated edits satisfy their preconditions");
                let key = self.canon.key(&graph);
                Neighbor { graph, key, edit }
            })
            .filter(|nb| nb.key != own)
            .collect();
        // stable sort keeps the first generating edit for each class
        out.sort_by(|a, b| a.key.cmp(&b.key));
        out.dedup_by(|a, b| a.key == b.key);
        Ok(out)
    }
}

/// Edit neighbourhood with default canonicalization and neighbourhood cap.
pub fn edit_neighbors(g: &LabeledGraph, alphabet: &[Label]) -> Result<Vec<Neighbor>, GraphError> {
    EditSpace::new(alphabet.iter().copied())?.neighbors(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphspace::canonical_key;

    const X: Label = Label(0);
    const Y: Label = Label(1);

    #[test]
    fn triangle_minus_edge_is_path() {
        let tri = LabeledGraph::cycle(&[X, X, X]);
        let out = apply_edit(&tri, GraphEdit::DeleteEdge { u: 1, v: 0 }).unwrap();
        // A-B removed leaves A-C-B
        assert_eq!(out.edges(), &[(0, 2), (1, 2)]);
        assert_eq!(canonical_key(&out), canonical_key(&LabeledGraph::path(&[X, X, X])));
        assert_eq!(tri.edge_count(), 3);
    }

    #[test]
    fn insert_into_empty() {
        let g = apply_edit(&LabeledGraph::empty(), GraphEdit::InsertNode { label: X }).unwrap();
        assert_eq!(g.labels(), &[X]);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn delete_node_reindexes() {
        let g = LabeledGraph::new(vec![X, Y, X], [(1, 2)]).unwrap();
        let h = apply_edit(&g, GraphEdit::DeleteNode { node: 0 }).unwrap();
        assert_eq!(h.labels(), &[Y, X]);
        assert_eq!(h.edges(), &[(0, 1)]);
    }

    #[test]
    fn precondition_failures_name_the_edit() {
        let g = LabeledGraph::path(&[X, X]);
        let cases = [
            GraphEdit::DeleteNode { node: 0 },
            GraphEdit::DeleteNode { node: 7 },
            GraphEdit::InsertEdge { u: 0, v: 1 },
            GraphEdit::InsertEdge { u: 0, v: 0 },
            GraphEdit::DeleteEdge { u: 0, v: 5 },
            GraphEdit::Relabel { node: 1, label: X },
        ];
        for edit in cases {
            match apply_edit(&g, edit) {
                Err(GraphError::EditPrecondition { edit: e, .. }) => assert_eq!(e, edit),
                other => panic!("{edit}: expected precondition error, got {other:?}"),
            }
        }
        let msg = apply_edit(&g, GraphEdit::DeleteNode { node: 0 }).unwrap_err().to_string();
        assert!(msg.contains("delete-isolated-node(0)") && msg.contains("not isolated"), "{msg}");
    }

    #[test]
    fn single_node_two_labels_has_four_neighbors() {
        let g = LabeledGraph::new(vec![X], []).unwrap();
        let nbs = edit_neighbors(&g, &[X, Y]).unwrap();
        assert_eq!(nbs.len(), 4);
        let mut expected = vec![
            canonical_key(&LabeledGraph::new(vec![Y], []).unwrap()),
            canonical_key(&LabeledGraph::new(vec![X, X], []).unwrap()),
            canonical_key(&LabeledGraph::new(vec![X, Y], []).unwrap()),
            canonical_key(&LabeledGraph::empty()),
        ];
        expected.sort();
        let got: Vec<_> = nbs.iter().map(|n| n.key.clone()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn empty_graph_has_one_neighbor() {
        let nbs = edit_neighbors(&LabeledGraph::empty(), &[X]).unwrap();
        assert_eq!(nbs.len(), 1);
        assert_eq!(nbs[0].graph.labels(), &[X]);
    }

    #[test]
    fn single_edge_singleton_alphabet_has_two_neighbors() {
        let g = LabeledGraph::path(&[X, X]);
        let nbs = edit_neighbors(&g, &[X]).unwrap();
        assert_eq!(nbs.len(), 2);
        let keys: Vec<_> = nbs.iter().map(|n| n.key.clone()).collect();
        assert!(keys.contains(&canonical_key(&LabeledGraph::new(vec![X, X], []).unwrap())));
        assert!(keys.contains(&canonical_key(&g.with_isolated_node(X))));
    }

    #[test]
    fn neighborhood_cap() {
        let g = LabeledGraph::path(&[X; 6]);
        let space = EditSpace::new([X, Y]).unwrap().with_max_neighbors(10);
        assert!(matches!(space.neighbors(&g), Err(GraphError::NeighborhoodTooLarge { cap: 10, .. })));
        assert!(matches!(EditSpace::new([]), Err(GraphError::EmptyAlphabet)));
    }
}
