//! Run reports: JSON documents, metric and curve CSVs, exemplar pairs, and the
//! cross-run comparison table. Nothing here records wall-clock time, so
//! reports are byte-identical across repeated runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::graphspace::{to_text, LabeledGraph};
use crate::recourse::Summary;
use crate::walk::WalkStats;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub n_graphs: usize,
    pub n_inputs: usize,
    pub alphabet: Vec<u32>,
    /// Dataset indices of the inputs; summary input ids index this list.
    pub input_ids: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    /// Accepted graphs found by the walk(s).
    pub candidates: usize,
    /// Candidates passed on to recourse construction.
    pub considered: usize,
    pub pool: usize,
    pub clusters: usize,
    /// Distinct counterfactuals realizing the reported coverage.
    pub counterfactuals_used: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterfactual_budget: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberReport {
    pub input: usize,
    pub counterfactual: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecourseReport {
    pub norm: f64,
    pub covered_inputs: Vec<usize>,
    pub center: Vec<f64>,
    pub members: Vec<MemberReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub coverage: f64,
    pub cost: f64,
    pub n_inputs: usize,
    pub budget: usize,
    pub theta: f64,
    pub delta: f64,
    /// Coverage after each selected recourse.
    pub curve: Vec<f64>,
    pub gains: Vec<usize>,
    pub recourse: Vec<RecourseReport>,
}

impl SummaryReport {
    pub fn from_summary(s: &Summary, budget: usize) -> Self {
        Self {
            coverage: s.coverage,
            cost: s.cost,
            n_inputs: s.n_inputs,
            budget,
            theta: s.theta,
            delta: s.delta,
            curve: s.curve.clone(),
            gains: s.gains.clone(),
            recourse: s
                .selected
                .iter()
                .map(|r| RecourseReport {
                    norm: r.norm,
                    covered_inputs: r.covered_inputs.clone(),
                    center: r.center.as_slice().to_vec(),
                    members: r
                        .members
                        .iter()
                        .map(|(g, k)| MemberReport {
                            input: *g,
                            counterfactual: k.to_hex(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summaries always serialize") + "\n"
    }
}

/// An input and the counterfactual a selected recourse takes it to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exemplar {
    pub recourse: usize,
    /// Dataset index of the input.
    pub input: usize,
    pub input_graph: LabeledGraph,
    pub counterfactual: LabeledGraph,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: String,
    pub config: RunConfig,
    pub dataset: DatasetInfo,
    pub walk: Option<WalkStats>,
    pub counts: Counts,
    pub summary: SummaryReport,
    pub exemplars: Vec<Exemplar>,
}

pub const METRICS_HEADER: &str = "method,dataset,seed,n_inputs,budget,coverage,cost,n_recourse,candidates,counterfactuals_used";

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("not a run report: {e}")))
    }

    pub fn metrics_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.dataset.name,
            self.config.seed,
            self.dataset.n_inputs,
            self.summary.budget,
            self.summary.coverage,
            self.summary.cost,
            self.summary.recourse.len(),
            self.counts.candidates,
            self.counts.counterfactuals_used
        )
    }

    pub fn curve_csv(&self) -> String {
        let mut out = String::from("r,coverage,gain\n");
        for (i, (c, g)) in self.summary.curve.iter().zip(&self.summary.gains).enumerate() {
            let _ = writeln!(out, "{},{},{}", i + 1, c, g);
        }
        out
    }

    pub fn exemplars_text(&self) -> String {
        let mut out = String::new();
        for e in &self.exemplars {
            let _ = writeln!(out, "# recourse {} input {} distance {}", e.recourse, e.input, e.distance);
            out.push_str(&to_text(&e.input_graph));
            out.push_str("--\n");
            out.push_str(&to_text(&e.counterfactual));
            out.push('\n');
        }
        out
    }

    /// Writes `report.json`, `summary.json`, `metrics.csv`, `curve.csv`,
    /// `exemplars.txt` and the resolved `config.toml` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            ("report.json", self.to_json()),
            ("summary.json", self.summary.to_json()),
            ("metrics.csv", format!("{METRICS_HEADER}\n{}\n", self.metrics_row())),
            ("curve.csv", self.curve_csv()),
            ("exemplars.txt", self.exemplars_text()),
            ("config.toml", self.config.to_toml()),
        ];
        for (name, text) in files {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub method: String,
    pub dataset: String,
    pub seed: u64,
    pub n_inputs: usize,
    pub budget: usize,
    pub coverage: f64,
    pub cost: f64,
    pub n_recourse: usize,
}

/// Coverage/cost table over several runs plus their coverage-vs-R curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalTable {
    pub rows: Vec<EvalRow>,
    pub curves: Vec<(String, u64, Vec<f64>)>,
}

pub fn eval_report(reports: &[RunReport]) -> EvalTable {
    EvalTable {
        rows: reports
            .iter()
            .map(|r| EvalRow {
                method: r.method.clone(),
                dataset: r.dataset.name.clone(),
                seed: r.config.seed,
                n_inputs: r.dataset.n_inputs,
                budget: r.summary.budget,
                coverage: r.summary.coverage,
                cost: r.summary.cost,
                n_recourse: r.summary.recourse.len(),
            })
            .collect(),
        curves: reports
            .iter()
            .map(|r| (r.method.clone(), r.config.seed, r.summary.curve.clone()))
            .collect(),
    }
}

impl EvalTable {
    pub fn table_csv(&self) -> String {
        let mut out = String::from("method,dataset,seed,n_inputs,budget,coverage,cost,n_recourse\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.method, r.dataset, r.seed, r.n_inputs, r.budget, r.coverage, r.cost, r.n_recourse
            );
        }
        out
    }

    /// Long format: one line per (run, R). A run's curve stays flat past its last pick.
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("method,seed,r,coverage\n");
        let longest = self.curves.iter().map(|c| c.2.len()).max().unwrap_or(0);
        for (method, seed, curve) in &self.curves {
            for r in 1..=longest {
                let c = curve.get(r - 1).or(curve.last()).copied().unwrap_or(0.0);
                let _ = writeln!(out, "{method},{seed},{r},{c}");
            }
        }
        out
    }

    /// Mean coverage and cost per method, in first-seen order.
    pub fn means(&self) -> Vec<(String, f64, f64, usize)> {
        let mut out: Vec<(String, f64, f64, usize)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|m| m.0 == r.method) {
                Some(m) => {
                    m.1 += r.coverage;
                    m.2 += r.cost;
                    m.3 += 1;
                }
                None => out.push((r.method.clone(), r.coverage, r.cost, 1)),
            }
        }
        for m in &mut out {
            m.1 /= m.3 as f64;
            m.2 /= m.3 as f64;
        }
        out
    }
}
