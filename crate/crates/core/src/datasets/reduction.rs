use super::Dataset;
use crate::classifier::{Classifier, SameColorPair};
use crate::embedding::{Embedder, EmbeddingVector, RecourseVector};
use crate::graphspace::{apply_edit, canonical_key, GraphEdit, Label, LabeledGraph};
use crate::recourse::{CommonRecourse, RecoursePool, TableObjective};
use crate::Result;

/// The uncoloured label: star centers and unused peripheral slots.
pub const BLANK: Label = Label(0);

/// A max-coverage instance `(U, S)` encoded as star graphs: one star per
/// element, its peripheral vertices coloured by the sets containing it.
#[derive(Clone, Debug)]
pub struct ReductionInstance {
    pub dataset: Dataset,
    pub classifier: SameColorPair,
    /// `recourse[i]` colours the star center with set `i`'s colour.
    pub recourse: Vec<GraphEdit>,
    pub alphabet: Vec<Label>,
    pub sets: Vec<Vec<usize>>,
}

/// Builds the star-graph instance for `n_elements` elements and the family `sets`.
/// Set `i` gets colour `i + 1`; every star has `sets.len()` peripheral vertices.
pub fn gen_reduction_instance(n_elements: usize, sets: &[Vec<usize>]) -> ReductionInstance {
    let m = sets.len();
    assert!(m >= 1, "reduction needs at least one set");
    let graphs = (0..n_elements)
        .map(|j| {
            let mut leaves: Vec<Label> = (0..m).filter(|&i| sets[i].contains(&j)).map(|i| Label(i as u32 + 1)).collect();
            leaves.resize(m, BLANK);
            LabeledGraph::star(BLANK, &leaves)
        })
        .collect();
    ReductionInstance {
        dataset: Dataset::new("reduction", graphs, vec![0; n_elements]),
        classifier: SameColorPair { blank: Some(BLANK) },
        recourse: (0..m)
            .map(|i| GraphEdit::Relabel {
                node: 0,
                label: Label(i as u32 + 1),
            })
            .collect(),
        alphabet: (0..=m as u32).map(Label).collect(),
        sets: sets.to_vec(),
    }
}

impl ReductionInstance {
    /// Elements whose star the classifier accepts after recourse `i`.
    pub fn covered_by(&self, i: usize) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (j, g) in self.dataset.graphs.iter().enumerate() {
            let h = apply_edit(g, self.recourse[i])?;
            if self.classifier.predict(&h)?.accepts() {
                out.push(j);
            }
        }
        Ok(out)
    }

    /// One common recourse per edit, identified by a one-hot center.
    pub fn edit_recourse(&self) -> Result<Vec<CommonRecourse>> {
        let m = self.recourse.len();
        (0..m)
            .map(|i| {
                let mut coords = vec![0.0; m];
                coords[i] = 1.0;
                Ok(CommonRecourse {
                    center: EmbeddingVector::new(coords)?,
                    members: Vec::new(),
                    covered_inputs: self.covered_by(i)?,
                    norm: 1.0,
                })
            })
            .collect()
    }

    /// Recourse vectors `z(r_i(G_j)) − z(G_j)` for every accepted `r_i(G_j)`.
    pub fn recourse_pool(&self, embedder: &dyn Embedder, theta: f64) -> Result<RecoursePool> {
        let mut vectors = Vec::new();
        for (j, g) in self.dataset.graphs.iter().enumerate() {
            let z_g = embedder.embed(g)?;
            for edit in &self.recourse {
                let h = apply_edit(g, *edit)?;
                if self.classifier.predict(&h)?.accepts() {
                    let z_h = embedder.embed(&h)?;
                    if let Some(r) = RecourseVector::between(j, &z_g, canonical_key(&h), &z_h, theta) {
                        vectors.push(r);
                    }
                }
            }
        }
        Ok(RecoursePool::from_vectors(self.dataset.len(), theta, vectors))
    }
}

/// Three inputs, four counterfactuals, three recourse and budgets `R = T = 2`:
/// `f1(G1)=H1, f2(G1)=H2, f3(G2)=H3, f1(G3)=H4, f3(G3)=H1`, all 0-indexed as
/// `(counterfactual, input, recourse)`.
pub fn fc_example() -> TableObjective {
    TableObjective::new(4, 3, 2, vec![(0, 0, 0), (1, 0, 1), (2, 1, 2), (3, 2, 0), (0, 2, 2)]).expect("entries in range")
}
