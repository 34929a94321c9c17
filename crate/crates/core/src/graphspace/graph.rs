use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::GraphError;

/// Discrete node label drawn from a finite alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Undirected simple graph with one discrete label per node.
///
/// Nodes are the dense indices `0..node_count()`. Edges are stored as sorted
/// `(u, v)` pairs with `u < v`; the adjacency lists are derived from them and
/// kept sorted, so two graphs with the same labels and edge set compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabeledGraph {
    labels: Vec<Label>,
    edges: Vec<(usize, usize)>,
    // compressed adjacency: node v's neighbours are adj[offsets[v]..offsets[v + 1]]
    adj: Vec<usize>,
    offsets: Vec<usize>,
}

impl Default for LabeledGraph {
    fn default() -> Self {
        Self::empty()
    }
}

impl LabeledGraph {
    pub fn empty() -> Self {
        Self {
            labels: Vec::new(),
            edges: Vec::new(),
            adj: Vec::new(),
            offsets: vec![0],
        }
    }

    /// Builds a graph, rejecting self-loops, parallel edges and dangling endpoints.
    /// Edge orientation in the input is irrelevant.
    pub fn new(labels: Vec<Label>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let n = labels.len();
        let mut norm = Vec::new();
        for (u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, count: n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { node: u });
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::ParallelEdge { u: w[0].0, v: w[0].1 });
        }
        Ok(Self::from_sorted_edges(labels, norm))
    }

    /// `edges` must already be normalized (`u < v`), sorted and deduplicated.
    pub(crate) fn from_sorted_edges(labels: Vec<Label>, edges: Vec<(usize, usize)>) -> Self {
        let n = labels.len();
        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in &edges {
            offsets[u + 1] += 1;
            offsets[v + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        // lexicographic edge order fills every list in ascending order
        let mut fill = offsets[..n].to_vec();
        let mut adj = vec![0usize; 2 * edges.len()];
        for &(u, v) in &edges {
            adj[fill[u]] = v;
            fill[u] += 1;
            adj[fill[v]] = u;
            fill[v] += 1;
        }
        Self {
            labels,
            edges,
            adj,
            offsets,
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, node: usize) -> Label {
        self.labels[node]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adj[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn label_set(&self) -> BTreeSet<Label> {
        self.labels.iter().copied().collect()
    }

    /// Returns the graph with node `i` renamed to `perm[i]`.
    ///
    /// # Panics
    /// If `perm` is not a permutation of `0..node_count()`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.node_count();
        assert_eq!(perm.len(), n, "permutation length mismatch");
        let mut labels = vec![Label(0); n];
        let mut seen = vec![false; n];
        for (old, &new) in perm.iter().enumerate() {
            assert!(new < n && !seen[new], "not a permutation");
            seen[new] = true;
            labels[new] = self.labels[old];
        }
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (perm[u], perm[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        Self::from_sorted_edges(labels, edges)
    }

    /// Disjoint union with a new isolated node carrying `label`.
    pub fn with_isolated_node(&self, label: Label) -> Self {
        let mut labels = self.labels.clone();
        labels.push(label);
        Self::from_sorted_edges(labels, self.edges.clone())
    }

    pub(crate) fn relabelled(&self, node: usize, label: Label) -> Self {
        let mut g = self.clone();
        g.labels[node] = label;
        g
    }

    pub fn path(labels: &[Label]) -> Self {
        let edges = (1..labels.len()).map(|i| (i - 1, i)).collect();
        Self::from_sorted_edges(labels.to_vec(), edges)
    }

    pub fn cycle(labels: &[Label]) -> Self {
        let n = labels.len();
        let mut g = Self::path(labels);
        if n >= 3 {
            let mut edges = g.edges.clone();
            edges.push((0, n - 1));
            edges.sort_unstable();
            g = Self::from_sorted_edges(labels.to_vec(), edges);
        }
        g
    }

    /// Star with `center` at node 0 and one leaf per entry of `leaves`.
    pub fn star(center: Label, leaves: &[Label]) -> Self {
        let mut labels = vec![center];
        labels.extend_from_slice(leaves);
        let edges = (1..labels.len()).map(|i| (0, i)).collect();
        Self::from_sorted_edges(labels, edges)
    }

    /// Number of triangles (unordered node triples that are pairwise adjacent).
    pub fn triangle_count(&self) -> usize {
        let mut count = 0;
        for &(u, v) in &self.edges {
            // common neighbours w > v keep each triangle counted once
            let (a, b) = (self.neighbors(u), self.neighbors(v));
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        if a[i] > v {
                            count += 1;
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize) -> Vec<Label> {
        vec![Label(0); n]
    }

    #[test]
    fn rejects_invalid_edges() {
        assert!(matches!(LabeledGraph::new(x(2), [(0, 0)]), Err(GraphError::SelfLoop { node: 0 })));
        assert!(matches!(
            LabeledGraph::new(x(2), [(0, 1), (1, 0)]),
            Err(GraphError::ParallelEdge { u: 0, v: 1 })
        ));
        assert!(matches!(
            LabeledGraph::new(x(2), [(0, 2)]),
            Err(GraphError::NodeOutOfRange { node: 2, count: 2 })
        ));
    }

    #[test]
    fn edge_orientation_is_normalized() {
        let a = LabeledGraph::new(x(3), [(2, 0), (1, 2)]).unwrap();
        let b = LabeledGraph::new(x(3), [(0, 2), (2, 1)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edges(), &[(0, 2), (1, 2)]);
        assert_eq!(a.neighbors(2), &[0, 1]);
    }

    #[test]
    fn triangles() {
        assert_eq!(LabeledGraph::cycle(&x(3)).triangle_count(), 1);
        assert_eq!(LabeledGraph::cycle(&x(4)).triangle_count(), 0);
        let k4 = LabeledGraph::new(x(4), [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(k4.triangle_count(), 4);
    }

    #[test]
    fn permutation_preserves_structure() {
        let g = LabeledGraph::new(vec![Label(1), Label(2), Label(3)], [(0, 1)]).unwrap();
        let p = g.permuted(&[2, 0, 1]);
        assert_eq!(p.labels(), &[Label(2), Label(3), Label(1)]);
        assert_eq!(p.edges(), &[(0, 2)]);
    }
}
