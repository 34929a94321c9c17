//! The graph embedding contract and recourse vectors.
//!
//! Distances between embeddings stand in for normalized edit distance; a
//! recourse is the displacement from an input graph's embedding to the
//! embedding of one of its counterfactuals.

use serde::{Deserialize, Serialize};

use crate::graphspace::{wl_pattern_hashes, CanonicalKey, LabeledGraph};
use crate::{Error, Result};

pub const DEFAULT_DIM: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteEmbedding);
        }
        Ok(Self(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `self - other`, i.e. the vector from `other` to `self`.
    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn distance(&self, other: &Self) -> f64 {
        l2(&self.0, &other.0)
    }

    /// Coordinate-wise mean; `None` for an empty input.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a EmbeddingVector>) -> Option<Self> {
        let mut it = vectors.into_iter();
        let mut acc = it.next()?.0.clone();
        let mut count = 1usize;
        for v in it {
            for (a, b) in acc.iter_mut().zip(&v.0) {
                *a += b;
            }
            count += 1;
        }
        let inv = count as f64;
        acc.iter_mut().for_each(|a| *a /= inv);
        Some(Self(acc))
    }
}

pub(crate) fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Maps graphs into a fixed-dimension real space whose distances proxy normalized edit distance.
pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize;

    fn embed(&self, g: &LabeledGraph) -> Result<EmbeddingVector>;

    fn embed_batch(&self, graphs: &[LabeledGraph]) -> Result<Vec<EmbeddingVector>> {
        graphs.iter().map(|g| self.embed(g)).collect()
    }
}

/// Checks an externally produced vector against the configured dimension.
pub fn checked(dim: usize, coords: Vec<f64>) -> Result<EmbeddingVector> {
    if coords.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: coords.len(),
        });
    }
    EmbeddingVector::new(coords)
}

/// Built-in embedder: WL subtree-pattern counts feature-hashed into `dim`
/// signed buckets, divided by `|V| + |E| + 1` and multiplied by `scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WlHashEmbedder {
    pub dim: usize,
    pub rounds: usize,
    pub seed: u64,
    pub scale: f64,
}

pub const DEFAULT_WL_ROUNDS: usize = 3;
pub const DEFAULT_SCALE: f64 = 0.3;

impl Default for WlHashEmbedder {
    fn default() -> Self {
        Self {
            dim: DEFAULT_DIM,
            rounds: DEFAULT_WL_ROUNDS,
            seed: 0,
            scale: DEFAULT_SCALE,
        }
    }
}

impl WlHashEmbedder {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::Config(format!("embedding scale must be positive, got {}", self.scale)));
        }
        Ok(())
    }
}

impl Embedder for WlHashEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, g: &LabeledGraph) -> Result<EmbeddingVector> {
        let mut coords = vec![0.0; self.dim];
        for round in wl_pattern_hashes(g, self.rounds, self.seed) {
            for h in round {
                let bucket = (h % self.dim as u64) as usize;
                let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
                coords[bucket] += sign;
            }
        }
        let factor = self.scale / (g.node_count() + g.edge_count() + 1) as f64;
        coords.iter_mut().for_each(|c| *c *= factor);
        Ok(EmbeddingVector(coords))
    }
}

/// Embedding-space distance between two graphs.
pub fn dist(embedder: &dyn Embedder, g1: &LabeledGraph, g2: &LabeledGraph) -> Result<f64> {
    Ok(embedder.embed(g1)?.distance(&embedder.embed(g2)?))
}

/// Displacement `z(target) - z(source)` from input graph `source` to a counterfactual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecourseVector {
    pub vec: EmbeddingVector,
    pub source: usize,
    pub target: CanonicalKey,
}

impl RecourseVector {
    /// Accepts the pair when `‖z(h) - z(g)‖ ≤ theta` (closed ball).
    pub fn between(source: usize, z_g: &EmbeddingVector, target: CanonicalKey, z_h: &EmbeddingVector, theta: f64) -> Option<Self> {
        let vec = z_h.sub(z_g);
        (vec.norm() <= theta).then_some(Self { vec, source, target })
    }

    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }
}

/// Builds the recourse from input `source_idx` (graph `g`) to the counterfactual `h`,
/// or `None` when `h` lies outside the radius `theta`.
pub fn make_recourse(
    embedder: &dyn Embedder,
    canon: &crate::graphspace::Canonicalizer,
    source_idx: usize,
    g: &LabeledGraph,
    h: &LabeledGraph,
    theta: f64,
) -> Result<Option<RecourseVector>> {
    let z_g = embedder.embed(g)?;
    let z_h = embedder.embed(h)?;
    Ok(RecourseVector::between(source_idx, &z_g, canon.key(h), &z_h, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphspace::{Canonicalizer, Label};

    const X: Label = Label(0);

    #[test]
    fn isomorphic_graphs_embed_identically() {
        let e = WlHashEmbedder::default();
        let g = LabeledGraph::new(vec![X, Label(1), Label(2), X], [(0, 1), (1, 2), (1, 3)]).unwrap();
        assert_eq!(e.embed(&g).unwrap(), e.embed(&g.permuted(&[3, 2, 0, 1])).unwrap());
    }

    #[test]
    fn isolated_node_is_visible() {
        let e = WlHashEmbedder::default();
        let g = LabeledGraph::cycle(&[X, X, Label(1)]);
        assert_ne!(e.embed(&g).unwrap(), e.embed(&g.with_isolated_node(X)).unwrap());
    }

    #[test]
    fn distance_basics() {
        let e = WlHashEmbedder::default();
        let a = LabeledGraph::path(&[X, X, X]);
        let b = LabeledGraph::cycle(&[X, X, X]);
        assert_eq!(dist(&e, &a, &a).unwrap(), 0.0);
        assert_eq!(dist(&e, &a, &b).unwrap(), dist(&e, &b, &a).unwrap());
        assert!(dist(&e, &a, &b).unwrap() > 0.0);
    }

    #[test]
    fn recourse_uses_closed_ball() {
        let e = WlHashEmbedder::default();
        let canon = Canonicalizer::default();
        let g = LabeledGraph::path(&[X, X, X]);
        let h = LabeledGraph::cycle(&[X, X, X]);
        let same = make_recourse(&e, &canon, 0, &g, &g, 0.0).unwrap().unwrap();
        assert!(same.vec.as_slice().iter().all(|&c| c == 0.0));
        let d = dist(&e, &g, &h).unwrap();
        let r = make_recourse(&e, &canon, 3, &g, &h, d).unwrap().unwrap();
        assert_eq!(r.source, 3);
        let z_g = e.embed(&g).unwrap();
        let rebuilt = z_g.add(&r.vec);
        assert!(rebuilt.distance(&e.embed(&h).unwrap()) <= 1e-9);
        assert!(make_recourse(&e, &canon, 0, &g, &h, d * 0.999).unwrap().is_none());
    }

    #[test]
    fn external_dimension_is_checked() {
        assert!(matches!(checked(3, vec![0.0; 2]), Err(Error::DimensionMismatch { expected: 3, got: 2 })));
        assert!(matches!(checked(1, vec![f64::NAN]), Err(Error::NonFiniteEmbedding)));
    }

    #[test]
    fn mean_of_vectors() {
        let a = EmbeddingVector::new(vec![1.0, 0.0]).unwrap();
        let b = EmbeddingVector::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(EmbeddingVector::mean([&a, &b]).unwrap().as_slice(), &[0.5, 0.5]);
        assert!(EmbeddingVector::mean(std::iter::empty()).is_none());
    }
}
