//! End-to-end runs: walk, candidate selection, clustering and budgeted
//! recourse selection, plus the local random-walk baseline.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::{Classifier, SameColorPair};
use crate::config::{DatasetSpec, RejectBy, RunConfig, DEFAULT_TOP_N};
use crate::datasets::{filter_rare_labels, gen_reduction_instance, gen_synthetic, load_tu, reject_subset, Dataset, RejectSource};
use crate::embedding::{Embedder, EmbeddingVector, RecourseVector};
use crate::graphspace::{parse_collection, CanonicalKey, Label, LabeledGraph};
use crate::recourse::{cluster_recourse, fc_filter_nearest, greedy_select, RecoursePool, Summary};
use crate::report::{Counts, DatasetInfo, Exemplar, RunReport, SummaryReport};
use crate::walk::{run_vrrw, top_candidates, Candidate, WalkConfig, WalkStats};
use crate::{Error, Result};

/// Dataset, inputs and models resolved from a config.
pub struct Prepared {
    pub dataset: Dataset,
    /// Dataset indices of the reject inputs.
    pub input_ids: Vec<usize>,
    pub inputs: Vec<LabeledGraph>,
    pub alphabet: Vec<Label>,
    pub classifier: Box<dyn Classifier>,
    pub embedder: Box<dyn Embedder>,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let dim = cfg.embedder.dim();
    let (dataset, fallback, alphabet): (Dataset, Option<Box<dyn Classifier>>, Option<Vec<Label>>) = match &cfg.dataset {
        DatasetSpec::Tu { path, min_label_count } => {
            let ds = load_tu(path)?;
            let ds = if *min_label_count > 0 {
                filter_rare_labels(&ds, *min_label_count)
            } else {
                ds
            };
            (ds, None, None)
        }
        DatasetSpec::Synthetic(s) => {
            let (ds, clf) = gen_synthetic(s)?;
            (ds, Some(Box::new(clf)), None)
        }
        DatasetSpec::Reduction { n_elements, sets } => {
            if sets.is_empty() || sets.iter().flatten().any(|&u| u >= *n_elements) {
                return Err(Error::Config("reduction sets must be non-empty and index elements below n_elements".into()));
            }
            let inst = gen_reduction_instance(*n_elements, sets);
            let clf: SameColorPair = inst.classifier.clone();
            (inst.dataset, Some(Box::new(clf)), Some(inst.alphabet))
        }
        DatasetSpec::Graphs { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let graphs = parse_collection(&text)?;
            let n = graphs.len();
            (Dataset::new("graphs", graphs, vec![0; n]), None, None)
        }
    };
    let classifier = cfg.classifier.build(fallback, dim).map_err(|e| e.at("classifier"))?;
    let embedder = cfg.embedder.build().map_err(|e| e.at("embedder"))?;
    let source = match (cfg.reject_by, &cfg.dataset) {
        // a bare collection has no labels of its own
        (RejectBy::Classifier, _) | (_, DatasetSpec::Graphs { .. }) => RejectSource::Classifier(classifier.as_ref()),
        (RejectBy::Labels, _) => RejectSource::Labels,
    };
    let input_ids = reject_subset(&dataset, source)?;
    let inputs = input_ids.iter().map(|&i| dataset.graphs[i].clone()).collect();
    let alphabet = alphabet.unwrap_or_else(|| dataset.alphabet());
    if alphabet.is_empty() {
        return Err(Error::Config("dataset has no node labels to edit with".into()));
    }
    Ok(Prepared {
        dataset,
        input_ids,
        inputs,
        alphabet,
        classifier,
        embedder,
    })
}

/// Everything computed between the candidate set and the summary.
struct Stage {
    candidates: Vec<Candidate>,
    considered: usize,
    pool: RecoursePool,
    n_clusters: usize,
    summary: Summary,
}

/// `pairs` restricts the pool to the given (input, candidate) pairs; by
/// default every candidate is tried against every input.
fn summarize(
    cfg: &RunConfig,
    prep: &Prepared,
    candidates: Vec<Candidate>,
    considered: usize,
    pairs: Option<&[(usize, usize)]>,
) -> Result<Stage> {
    let input_z = prep.embedder.embed_batch(&prep.inputs).map_err(|e| e.at("embed"))?;
    let graphs: Vec<LabeledGraph> = candidates.iter().map(|c| c.graph.clone()).collect();
    let z = prep.embedder.embed_batch(&graphs).map_err(|e| e.at("embed"))?;
    let cand_z: Vec<(CanonicalKey, EmbeddingVector)> = candidates.iter().map(|c| c.key.clone()).zip(z).collect();
    let pool = match pairs {
        None => RecoursePool::build(&input_z, &cand_z, cfg.theta),
        Some(pairs) => {
            let vectors = pairs
                .iter()
                .filter_map(|&(g, c)| RecourseVector::between(g, &input_z[g], cand_z[c].0.clone(), &cand_z[c].1, cfg.theta))
                .collect();
            RecoursePool::from_vectors(input_z.len(), cfg.theta, vectors)
        }
    };
    let n = prep.inputs.len();
    let (summary, n_clusters) = if pool.is_empty() {
        (Summary::empty(n, cfg.theta, cfg.delta), 0)
    } else {
        let clusters = cluster_recourse(&pool, &cfg.cluster_config()).map_err(|e| e.at("cluster"))?;
        let s = greedy_select(&clusters, cfg.budget, n, cfg.theta, cfg.delta);
        (s, clusters.len())
    };
    Ok(Stage {
        candidates,
        considered,
        pool,
        n_clusters,
        summary,
    })
}

fn walk(cfg: &RunConfig, prep: &Prepared) -> Result<(Vec<Candidate>, WalkStats)> {
    let out = run_vrrw(
        &prep.inputs,
        &prep.alphabet,
        prep.classifier.as_ref(),
        prep.embedder.as_ref(),
        &cfg.walk_config(),
    )
    .map_err(|e| e.at("walk"))?;
    Ok((out.candidates, out.stats))
}

fn top_n(cfg: &RunConfig, candidates: &[Candidate]) -> Vec<Candidate> {
    top_candidates(candidates, cfg.top_n.unwrap_or(DEFAULT_TOP_N))
}

fn finish(method: &str, cfg: &RunConfig, prep: &Prepared, stage: Stage, walk: Option<WalkStats>) -> RunReport {
    let by_key: BTreeMap<&CanonicalKey, &LabeledGraph> = stage.candidates.iter().map(|c| (&c.key, &c.graph)).collect();
    let realized = realizing_counterfactuals(&stage);
    let mut used: Vec<&CanonicalKey> = realized.values().map(|(_, k, _)| k).collect();
    used.sort();
    used.dedup();
    let mut exemplars = Vec::new();
    for (r, rec) in stage.summary.selected.iter().enumerate() {
        for &g in rec.covered_inputs.iter().take(EXEMPLARS_PER_RECOURSE) {
            if let Some((_, key, d)) = realized.get(&(r, g)) {
                exemplars.push(Exemplar {
                    recourse: r,
                    input: prep.input_ids[g],
                    input_graph: prep.inputs[g].clone(),
                    counterfactual: by_key[key].clone(),
                    distance: *d,
                });
            }
        }
    }
    RunReport {
        method: method.to_string(),
        config: cfg.clone(),
        dataset: DatasetInfo {
            name: prep.dataset.name.clone(),
            n_graphs: prep.dataset.len(),
            n_inputs: prep.inputs.len(),
            alphabet: prep.alphabet.iter().map(|l| l.0).collect(),
            input_ids: prep.input_ids.clone(),
        },
        walk,
        counts: Counts {
            candidates: stage.candidates.len(),
            considered: stage.considered,
            pool: stage.pool.len(),
            clusters: stage.n_clusters,
            counterfactuals_used: used.len(),
            counterfactual_budget: None,
        },
        summary: SummaryReport::from_summary(&stage.summary, cfg.budget),
        exemplars,
    }
}

const EXEMPLARS_PER_RECOURSE: usize = 3;

/// For each (selected recourse, covered input): the counterfactual whose
/// recourse lies within `delta` of the center with the smallest norm.
/// Only the cheapest covering recourse of each input is kept, matching the cost rule.
fn realizing_counterfactuals(stage: &Stage) -> BTreeMap<(usize, usize), (f64, CanonicalKey, f64)> {
    let delta = stage.summary.delta;
    let mut best_recourse: BTreeMap<usize, usize> = BTreeMap::new();
    for (r, rec) in stage.summary.selected.iter().enumerate() {
        for &g in &rec.covered_inputs {
            let e = best_recourse.entry(g).or_insert(r);
            if rec.norm < stage.summary.selected[*e].norm {
                *e = r;
            }
        }
    }
    let mut out: BTreeMap<(usize, usize), (f64, CanonicalKey, f64)> = BTreeMap::new();
    for (r, rec) in stage.summary.selected.iter().enumerate() {
        for v in stage.pool.vectors() {
            if best_recourse.get(&v.source) != Some(&r) || v.vec.distance(&rec.center) > delta {
                continue;
            }
            let norm = v.norm();
            let better = match out.get(&(r, v.source)) {
                None => true,
                Some((n, k, _)) => norm < *n || (norm == *n && v.target < *k),
            };
            if better {
                out.insert((r, v.source), (norm, v.target.clone(), norm));
            }
        }
    }
    out
}

/// Walk, keep the most visited candidates, cluster their recourse and pick `budget` greedily.
pub fn explain_fcr(cfg: &RunConfig) -> Result<RunReport> {
    let prep = prepare(cfg)?;
    explain_fcr_prepared(cfg, &prep)
}

pub fn explain_fcr_prepared(cfg: &RunConfig, prep: &Prepared) -> Result<RunReport> {
    let (candidates, stats) = walk(cfg, prep)?;
    let kept = top_n(cfg, &candidates);
    let considered = kept.len();
    let mut stage = summarize(cfg, prep, kept, considered, None)?;
    stage.candidates = candidates;
    Ok(finish("explain-fcr", cfg, prep, stage, Some(stats)))
}

/// FC variant. With `T` at least the input count (the default) the
/// counterfactual budget cannot bind, since every covered input is realized
/// by one counterfactual, and the run coincides with explain-fcr. A smaller
/// `T` (or `fc_force_nearest`) keeps only each input's nearest candidate,
/// then the `T` most visited of those.
pub fn explain_fc(cfg: &RunConfig) -> Result<RunReport> {
    let prep = prepare(cfg)?;
    explain_fc_prepared(cfg, &prep)
}

pub fn explain_fc_prepared(cfg: &RunConfig, prep: &Prepared) -> Result<RunReport> {
    let t = cfg.counterfactual_budget.unwrap_or(prep.inputs.len());
    let (candidates, stats) = walk(cfg, prep)?;
    let kept = top_n(cfg, &candidates);
    let mut stage = if t >= prep.inputs.len() && !cfg.fc_force_nearest {
        let considered = kept.len();
        summarize(cfg, prep, kept, considered, None)?
    } else {
        let input_z = prep.embedder.embed_batch(&prep.inputs).map_err(|e| e.at("embed"))?;
        let graphs: Vec<LabeledGraph> = kept.iter().map(|c| c.graph.clone()).collect();
        let z = prep.embedder.embed_batch(&graphs).map_err(|e| e.at("embed"))?;
        let cand_z: Vec<(CanonicalKey, EmbeddingVector)> = kept.iter().map(|c| c.key.clone()).zip(z).collect();
        let nearest: Vec<Candidate> = fc_filter_nearest(&input_z, &cand_z).into_iter().map(|i| kept[i].clone()).collect();
        let chosen = top_candidates(&nearest, t);
        let considered = chosen.len();
        summarize(cfg, prep, chosen, considered, None)?
    };
    stage.candidates = candidates;
    let mut report = finish("explain-fc", cfg, prep, stage, Some(stats));
    report.counts.counterfactual_budget = Some(t);
    Ok(report)
}

/// Per-input seeds for the baseline, drawn from the run seed.
fn input_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen()).collect()
}

/// Independent single-head plain walks around each input, sharing the step
/// budget `steps * heads` evenly. Each input keeps its closest accepted
/// candidate within `theta`; those are clustered and selected as usual.
pub fn baseline_local_rw(cfg: &RunConfig) -> Result<RunReport> {
    let prep = prepare(cfg)?;
    baseline_local_rw_prepared(cfg, &prep)
}

pub fn baseline_local_rw_prepared(cfg: &RunConfig, prep: &Prepared) -> Result<RunReport> {
    let n = prep.inputs.len();
    let per_input = (cfg.steps * cfg.heads).checked_div(n).map_or(0, |s| s.max(1));
    let seeds = input_seeds(cfg.seed, n);
    let input_z = prep.embedder.embed_batch(&prep.inputs).map_err(|e| e.at("embed"))?;
    let mut chosen: BTreeMap<CanonicalKey, Candidate> = BTreeMap::new();
    let mut pairs_by_key: Vec<(usize, CanonicalKey)> = Vec::new();
    let mut stats = WalkStats::default();
    let mut explored = 0;
    for (i, g) in prep.inputs.iter().enumerate() {
        let wcfg = WalkConfig {
            heads: 1,
            steps: per_input,
            reinforce: false,
            seed: seeds[i],
            ..cfg.walk_config()
        };
        let out = run_vrrw(
            std::slice::from_ref(g),
            &prep.alphabet,
            prep.classifier.as_ref(),
            prep.embedder.as_ref(),
            &wcfg,
        )
        .map_err(|e| e.at("walk"))?;
        add_stats(&mut stats, &out.stats);
        explored += out.candidates.len();
        let graphs: Vec<LabeledGraph> = out.candidates.iter().map(|c| c.graph.clone()).collect();
        let z = prep.embedder.embed_batch(&graphs).map_err(|e| e.at("embed"))?;
        let nearest = out
            .candidates
            .iter()
            .zip(&z)
            .map(|(c, z)| (z.distance(&input_z[i]), c))
            .filter(|(d, _)| *d <= cfg.theta)
            .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.key.cmp(&b.1.key)));
        if let Some((_, c)) = nearest {
            chosen.entry(c.key.clone()).or_insert_with(|| c.clone());
            pairs_by_key.push((i, c.key.clone()));
        }
    }
    let kept: Vec<Candidate> = chosen.into_values().collect();
    let position: BTreeMap<&CanonicalKey, usize> = kept.iter().enumerate().map(|(i, c)| (&c.key, i)).collect();
    let pairs: Vec<(usize, usize)> = pairs_by_key.iter().map(|(g, k)| (*g, position[k])).collect();
    let considered = kept.len();
    let stage = summarize(cfg, prep, kept, considered, Some(&pairs))?;
    let mut report = finish("baseline-local-rw", cfg, prep, stage, Some(stats));
    report.counts.candidates = explored;
    Ok(report)
}

fn add_stats(total: &mut WalkStats, s: &WalkStats) {
    total.steps += s.steps;
    total.lead_moves += s.lead_moves;
    total.teleports += s.teleports;
    total.forced_teleports += s.forced_teleports;
    total.visit_increments += s.visit_increments;
    total.follower_stays += s.follower_stays;
}
