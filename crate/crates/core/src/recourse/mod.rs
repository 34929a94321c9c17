//! Common recourse: clustering recourse vectors, coverage and cost metrics,
//! budgeted selection, and the counterfactual-budgeted (FC) variant.

mod cluster;
mod fc;
mod index;
mod select;
mod twocover;

use serde::{Deserialize, Serialize};

use crate::embedding::{EmbeddingVector, RecourseVector};
use crate::graphspace::CanonicalKey;

pub use cluster::{cluster_recourse, dbscan, ClusterConfig, DEFAULT_MAX_CLUSTER_POINTS, DEFAULT_MIN_POINTS};
pub use fc::{
    brute_force_fc, fc_filter_nearest, randomized_greedy_fc, EmbeddedObjective, Evaluator, FcObjective, FcSelection,
    TableObjective,
};
pub use index::RangeIndex;
pub use select::{brute_force_best_r, greedy_select, DEFAULT_SUBSET_CAP};
pub use twocover::{two_budget_two_cover, TwoCoverResult, DEFAULT_TWO_COVER_EXACT_CAP};

/// Every admissible recourse vector: one per (input, counterfactual) pair with
/// the counterfactual accepted and within `theta` of the input.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoursePool {
    n_inputs: usize,
    theta: f64,
    vectors: Vec<RecourseVector>,
}

impl RecoursePool {
    /// `counterfactuals` must already be accept-classified.
    pub fn build(input_z: &[EmbeddingVector], counterfactuals: &[(CanonicalKey, EmbeddingVector)], theta: f64) -> Self {
        let mut vectors = Vec::new();
        for (g, z_g) in input_z.iter().enumerate() {
            for (key, z_h) in counterfactuals {
                if let Some(r) = RecourseVector::between(g, z_g, key.clone(), z_h, theta) {
                    vectors.push(r);
                }
            }
        }
        Self {
            n_inputs: input_z.len(),
            theta,
            vectors,
        }
    }

    pub fn from_vectors(n_inputs: usize, theta: f64, vectors: Vec<RecourseVector>) -> Self {
        debug_assert!(vectors.iter().all(|v| v.source < n_inputs));
        Self { n_inputs, theta, vectors }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn vectors(&self) -> &[RecourseVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn index(&self) -> RangeIndex<'_> {
        RangeIndex::new(self.vectors.iter().map(|v| &v.vec))
    }

    /// Keeps only the vectors whose counterfactual satisfies `keep`.
    pub fn restricted(&self, mut keep: impl FnMut(&CanonicalKey) -> bool) -> Self {
        Self {
            n_inputs: self.n_inputs,
            theta: self.theta,
            vectors: self.vectors.iter().filter(|v| keep(&v.target)).cloned().collect(),
        }
    }
}

/// Inputs reached by `center`: those with some pool vector within `delta` of it.
pub fn covered_inputs(center: &EmbeddingVector, pool: &RecoursePool, index: &RangeIndex<'_>, delta: f64) -> Vec<usize> {
    let mut out: Vec<usize> = index
        .within(center.as_slice(), delta)
        .into_iter()
        .map(|i| pool.vectors[i].source)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// A representative recourse vector with the pool vectors it summarizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonRecourse {
    pub center: EmbeddingVector,
    /// `(input, counterfactual)` of each member recourse.
    pub members: Vec<(usize, CanonicalKey)>,
    /// Inputs with some counterfactual whose recourse lies within `delta` of `center`.
    pub covered_inputs: Vec<usize>,
    /// `‖center‖`, the cost this recourse charges each input it covers.
    pub norm: f64,
}

impl CommonRecourse {
    /// A recourse defined directly by its center; membership is the pool vectors within `delta`.
    pub fn from_center(center: EmbeddingVector, pool: &RecoursePool, index: &RangeIndex<'_>, delta: f64) -> Self {
        let hits = index.within(center.as_slice(), delta);
        let members = hits
            .iter()
            .map(|&i| (pool.vectors[i].source, pool.vectors[i].target.clone()))
            .collect();
        let covered_inputs = covered_inputs(&center, pool, index, delta);
        Self {
            norm: center.norm(),
            center,
            members,
            covered_inputs,
        }
    }
}

/// Fraction of inputs covered by at least one recourse in `selected`.
pub fn coverage(selected: &[EmbeddingVector], pool: &RecoursePool, delta: f64) -> f64 {
    if pool.n_inputs == 0 {
        return 0.0;
    }
    let index = pool.index();
    let mut hit = vec![false; pool.n_inputs];
    for c in selected {
        for g in covered_inputs(c, pool, &index, delta) {
            hit[g] = true;
        }
    }
    hit.iter().filter(|&&h| h).count() as f64 / pool.n_inputs as f64
}

/// Sum over covered inputs of the smallest `‖r‖` among the recourse covering them.
pub fn cost(selected: &[EmbeddingVector], pool: &RecoursePool, delta: f64) -> f64 {
    let index = pool.index();
    let mut best = vec![f64::INFINITY; pool.n_inputs];
    for c in selected {
        let norm = c.norm();
        for g in covered_inputs(c, pool, &index, delta) {
            best[g] = best[g].min(norm);
        }
    }
    best.iter().filter(|b| b.is_finite()).sum()
}

/// Fraction of inputs within `theta` of at least one graph in `counterfactuals`
/// (the coverage of a plain counterfactual set, without recourse summarization).
pub fn counterfactual_set_coverage(counterfactual_z: &[EmbeddingVector], input_z: &[EmbeddingVector], theta: f64) -> f64 {
    if input_z.is_empty() {
        return 0.0;
    }
    let covered = input_z
        .iter()
        .filter(|g| counterfactual_z.iter().any(|h| h.distance(g) <= theta))
        .count();
    covered as f64 / input_z.len() as f64
}

/// A budgeted selection of common recourse and its metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub selected: Vec<CommonRecourse>,
    pub coverage: f64,
    pub cost: f64,
    pub delta: f64,
    pub theta: f64,
    pub n_inputs: usize,
    /// Coverage after each selection, in selection order.
    pub curve: Vec<f64>,
    /// Newly covered inputs contributed by each selection.
    pub gains: Vec<usize>,
}

impl Summary {
    pub fn empty(n_inputs: usize, theta: f64, delta: f64) -> Self {
        Self {
            selected: Vec::new(),
            coverage: 0.0,
            cost: 0.0,
            delta,
            theta,
            n_inputs,
            curve: Vec::new(),
            gains: Vec::new(),
        }
    }

    /// Builds the summary of `selected`, in order, from their covered-input sets.
    pub fn from_selection(selected: Vec<CommonRecourse>, n_inputs: usize, theta: f64, delta: f64) -> Self {
        let mut best = vec![f64::INFINITY; n_inputs];
        let mut covered = 0usize;
        let mut curve = Vec::with_capacity(selected.len());
        let mut gains = Vec::with_capacity(selected.len());
        for r in &selected {
            let mut gain = 0;
            for &g in &r.covered_inputs {
                if best[g].is_infinite() {
                    gain += 1;
                }
                best[g] = best[g].min(r.norm);
            }
            covered += gain;
            gains.push(gain);
            curve.push(ratio(covered, n_inputs));
        }
        Self {
            selected,
            coverage: ratio(covered, n_inputs),
            cost: best.iter().filter(|b| b.is_finite()).sum(),
            delta,
            theta,
            n_inputs,
            curve,
            gains,
        }
    }

    pub fn centers(&self) -> Vec<EmbeddingVector> {
        self.selected.iter().map(|r| r.center.clone()).collect()
    }

    pub fn covered_count(&self) -> usize {
        let mut all: Vec<usize> = self.selected.iter().flat_map(|r| r.covered_inputs.iter().copied()).collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[cfg(test)]
mod tests;
