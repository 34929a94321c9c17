//! Graph datasets: the TU text layout, preprocessing, and generated instances.

mod reduction;
mod synth;
mod tu;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::graphspace::{Label, LabeledGraph};
use crate::Result;

pub use reduction::{fc_example, gen_reduction_instance, ReductionInstance, BLANK};
pub use synth::{gen_synthetic, nitro_motif, SynthConfig};
pub use tu::{load_tu, parse_tu, to_tu, write_tu, TuFiles};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{dir}: no file matching *{suffix}")]
    MissingFile { dir: String, suffix: &'static str },
    #[error("{file}:{line}: {msg}")]
    Parse { file: String, line: usize, msg: String },
    #[error("{file}:{line}: index {index} out of range 1..={max}")]
    IndexOutOfRange { file: String, line: usize, index: usize, max: usize },
    #[error("{file}:{line}: edge ({u}, {v}) joins graphs {gu} and {gv}")]
    DanglingEdge { file: String, line: usize, u: usize, v: usize, gu: usize, gv: usize },
    #[error("{file}: {got} lines, expected {expected}")]
    LengthMismatch { file: String, got: usize, expected: usize },
    #[error("graph labels take {0} distinct values; only binary datasets are supported")]
    NotBinary(usize),
}

/// Graphs with binary class labels (0 = reject, 1 = accept).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub graphs: Vec<LabeledGraph>,
    pub class_labels: Vec<u8>,
    /// Source value of class 0 and class 1, for writing the layout back.
    pub class_codes: [i64; 2],
}

impl Dataset {
    pub fn new(name: impl Into<String>, graphs: Vec<LabeledGraph>, class_labels: Vec<u8>) -> Self {
        assert_eq!(graphs.len(), class_labels.len(), "one class label per graph");
        Self {
            name: name.into(),
            graphs,
            class_labels,
            class_codes: [0, 1],
        }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Node labels present anywhere in the dataset, ascending.
    pub fn alphabet(&self) -> Vec<Label> {
        let mut all: Vec<Label> = self.graphs.iter().flat_map(|g| g.labels().iter().copied()).collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn label_counts(&self) -> BTreeMap<Label, usize> {
        let mut counts = BTreeMap::new();
        for g in &self.graphs {
            for &l in g.labels() {
                *counts.entry(l).or_insert(0) += 1;
            }
        }
        counts
    }

    pub fn node_count(&self) -> usize {
        self.graphs.iter().map(|g| g.node_count()).sum()
    }

    fn keep(&self, keep: impl Fn(usize) -> bool) -> Self {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        Self {
            name: self.name.clone(),
            graphs: idx.iter().map(|&i| self.graphs[i].clone()).collect(),
            class_labels: idx.iter().map(|&i| self.class_labels[i]).collect(),
            class_codes: self.class_codes,
        }
    }
}

pub const DEFAULT_MIN_LABEL_COUNT: usize = 50;

/// Drops every graph containing a label seen fewer than `min_count` times over
/// the whole dataset. Removing graphs can make further labels rare, so this
/// repeats until nothing changes.
pub fn filter_rare_labels(ds: &Dataset, min_count: usize) -> Dataset {
    let mut cur = ds.clone();
    loop {
        let counts = cur.label_counts();
        let rare = |g: &LabeledGraph| g.labels().iter().any(|l| counts[l] < min_count);
        if !cur.graphs.iter().any(rare) {
            return cur;
        }
        let next = cur.keep(|i| !rare(&cur.graphs[i]));
        log::debug!("rare-label pass removed {} graphs", cur.len() - next.len());
        cur = next;
    }
}

/// Where the reject/accept split comes from.
pub enum RejectSource<'a> {
    /// Dataset class labels; class 0 is reject.
    Labels,
    Classifier(&'a dyn Classifier),
}

/// Indices of the reject graphs, in dataset order.
pub fn reject_subset(ds: &Dataset, source: RejectSource<'_>) -> Result<Vec<usize>> {
    let out: Vec<usize> = match source {
        RejectSource::Labels => (0..ds.len()).filter(|&i| ds.class_labels[i] == 0).collect(),
        RejectSource::Classifier(clf) => {
            let preds = clf.predict_batch(&ds.graphs)?;
            (0..ds.len()).filter(|&i| !preds[i].accepts()).collect()
        }
    };
    if out.is_empty() {
        log::warn!("dataset {} has no reject graphs", ds.name);
    }
    Ok(out)
}
