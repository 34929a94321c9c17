//! Multi-head vertex-reinforced random walk over graph edit space.
//!
//! Each step either teleports every head back to an input graph (probability
//! `teleport`) or moves a uniformly drawn lead head to an edit neighbour with
//! probability proportional to `p_accept(v) * (visits(v) + 1)`, after which
//! every other head moves to the neighbour (or stays) whose recourse best
//! matches the lead's. Accepted graphs landed on are collected as candidates.

mod cache;
mod checkpoint;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::embedding::{l2, Embedder, EmbeddingVector};
use crate::graphspace::{CanonicalKey, EditSpace, Label, LabeledGraph, DEFAULT_MAX_NEIGHBORS};
use crate::{Error, Result};

pub use cache::{GraphInfo, NeighborhoodCache};
pub use checkpoint::{parse_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkConfig {
    /// Number of heads `k`.
    pub heads: usize,
    /// Number of steps `M`.
    pub steps: usize,
    /// Teleport probability `tau`.
    pub teleport: f64,
    /// Counterfactual radius `theta`.
    pub theta: f64,
    /// Hard cap on embedding distance from a head's start graph; `None` means `1.5 * theta`.
    pub max_radius: Option<f64>,
    pub seed: u64,
    /// Largest edit neighbourhood expanded before the walk errors out.
    pub neighbor_cap: usize,
    /// Entries kept in each of the graph-info and neighbourhood caches.
    pub cache_capacity: usize,
    /// `false` freezes every visit multiplier at 1 (plain random walk).
    pub reinforce: bool,
    /// Keep classifier-accepted inputs in the teleport pool instead of dropping them.
    pub keep_accepted_inputs: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            heads: 5,
            steps: 50_000,
            teleport: 0.05,
            theta: 0.1,
            max_radius: None,
            seed: 0,
            neighbor_cap: DEFAULT_MAX_NEIGHBORS,
            cache_capacity: 100_000,
            reinforce: true,
            keep_accepted_inputs: false,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.heads == 0 {
            return bad("heads must be at least 1".into());
        }
        if self.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        if !(self.teleport > 0.0 && self.teleport < 1.0) {
            return bad(format!("teleport probability must lie in (0, 1), got {}", self.teleport));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return bad(format!("theta must be positive, got {}", self.theta));
        }
        if let Some(r) = self.max_radius {
            if r.is_nan() || r < 0.0 {
                return bad(format!("max_radius must be non-negative, got {r}"));
            }
        }
        if self.cache_capacity == 0 {
            return bad("cache_capacity must be positive".into());
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        self.max_radius.unwrap_or(1.5 * self.theta)
    }
}

/// Lead-head transition probabilities `p(v) * (visits(v) + 1)`, normalized.
/// `None` when every weight is zero (dead end).
pub fn transition_distribution(p_accept: &[f64], visits: &[u64], reinforce: bool) -> Option<Vec<f64>> {
    let weights: Vec<f64> = p_accept
        .iter()
        .zip(visits)
        .map(|(&p, &c)| if reinforce { p * (c as f64 + 1.0) } else { p })
        .collect();
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    Some(probs)
}

/// Teleport distribution `exp(-t(G)) / sum exp(-t(G'))` over the input pool.
pub fn teleport_distribution(teleports: &[u64]) -> Vec<f64> {
    let min = teleports.iter().copied().min().unwrap_or(0);
    // shifting by the minimum leaves the ratios unchanged and avoids underflow
    let weights: Vec<f64> = teleports.iter().map(|&t| (-((t - min) as f64)).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// Index of the option whose recourse `z(v) - z_start` is closest to `target`;
/// ties go to the smaller canonical key.
pub fn follower_choice(target: &EmbeddingVector, z_start: &EmbeddingVector, options: &[(&CanonicalKey, &EmbeddingVector)]) -> usize {
    let score = |z: &EmbeddingVector| {
        let t = target.as_slice();
        let s = z_start.as_slice();
        z.as_slice()
            .iter()
            .zip(s)
            .zip(t)
            .map(|((zv, zs), tv)| {
                let d = tv - (zv - zs);
                d * d
            })
            .sum::<f64>()
    };
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for (i, (key, z)) in options.iter().enumerate() {
        let s = score(z);
        if s < best_score || (s == best_score && *key < options[best].0) {
            best = i;
            best_score = s;
        }
    }
    best
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkStats {
    pub steps: u64,
    pub lead_moves: u64,
    pub teleports: u64,
    pub forced_teleports: u64,
    pub visit_increments: u64,
    pub follower_stays: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Head {
    /// Index into the walk's input list of the graph this head started from.
    pub start: usize,
    pub current: LabeledGraph,
}

/// An accepted graph found by the walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub key: CanonicalKey,
    pub graph: LabeledGraph,
    pub visits: u64,
    pub p_accept: f64,
}

/// Candidate set produced by a walk, ordered by canonical key.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkOutcome {
    pub candidates: Vec<Candidate>,
    pub stats: WalkStats,
    pub teleport_counts: Vec<u64>,
    pub pool: Vec<usize>,
}

/// Stateful walker; `run_vrrw` wraps it for the common case.
pub struct Walker<'a> {
    cfg: WalkConfig,
    inputs: &'a [LabeledGraph],
    input_z: Vec<EmbeddingVector>,
    pool: Vec<usize>,
    classifier: &'a dyn Classifier,
    embedder: &'a dyn Embedder,
    cache: NeighborhoodCache,
    rng: ChaCha8Rng,
    heads: Vec<Head>,
    visits: HashMap<CanonicalKey, u64>,
    teleports: Vec<u64>,
    candidates: BTreeMap<CanonicalKey, (LabeledGraph, f64)>,
    stats: WalkStats,
}

impl<'a> Walker<'a> {
    pub fn new(
        inputs: &'a [LabeledGraph],
        alphabet: &[Label],
        classifier: &'a dyn Classifier,
        embedder: &'a dyn Embedder,
        cfg: WalkConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let space = EditSpace::new(alphabet.iter().copied())?.with_max_neighbors(cfg.neighbor_cap);
        let input_z = embedder.embed_batch(inputs)?;
        let verdicts = classifier.predict_batch(inputs)?;
        let mut pool = Vec::new();
        for (i, v) in verdicts.iter().enumerate() {
            if v.accepts() && !cfg.keep_accepted_inputs {
                log::warn!("input {i} is already accepted (p = {}); dropped from the walk", v.p_accept);
            } else {
                pool.push(i);
            }
        }
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let cache = NeighborhoodCache::new(space, cfg.cache_capacity);
        let mut walker = Self {
            teleports: vec![0; inputs.len()],
            cfg,
            inputs,
            input_z,
            pool,
            classifier,
            embedder,
            cache,
            rng,
            heads: Vec::new(),
            visits: HashMap::new(),
            candidates: BTreeMap::new(),
            stats: WalkStats::default(),
        };
        if !walker.pool.is_empty() {
            for _ in 0..walker.cfg.heads {
                let start = walker.pool[walker.rng.gen_range(0..walker.pool.len())];
                walker.teleports[start] += 1;
                walker.heads.push(Head {
                    start,
                    current: walker.inputs[start].clone(),
                });
            }
        }
        Ok(walker)
    }

    pub fn config(&self) -> &WalkConfig {
        &self.cfg
    }

    pub fn heads(&self) -> &[Head] {
        &self.heads
    }

    pub fn stats(&self) -> &WalkStats {
        &self.stats
    }

    pub fn visits(&self, key: &CanonicalKey) -> u64 {
        self.visits.get(key).copied().unwrap_or(0)
    }

    pub fn total_visits(&self) -> u64 {
        self.visits.values().sum()
    }

    pub fn teleport_counts(&self) -> &[u64] {
        &self.teleports
    }

    pub fn steps_done(&self) -> u64 {
        self.stats.steps
    }

    /// Runs until `cfg.steps` steps have been taken in total.
    pub fn run(&mut self) -> Result<()> {
        self.run_until(self.cfg.steps as u64, None::<fn(&Self) -> Result<()>>)
    }

    /// Runs to step `target`, invoking `on_step` after every step (for checkpointing).
    pub fn run_until<F: FnMut(&Self) -> Result<()>>(&mut self, target: u64, mut on_step: Option<F>) -> Result<()> {
        if self.pool.is_empty() {
            return Ok(());
        }
        while self.stats.steps < target {
            self.step()?;
            if let Some(f) = on_step.as_mut() {
                f(self)?;
            }
        }
        Ok(())
    }

    fn info(&mut self, g: &LabeledGraph) -> Result<Arc<GraphInfo>> {
        self.cache.info(g, self.classifier, self.embedder)
    }

    /// Neighbours of `g` within the radius cap around input `start`.
    fn reachable(&mut self, g: &LabeledGraph, start: usize) -> Result<Vec<Arc<GraphInfo>>> {
        let nbs = self.cache.neighbors(g, self.classifier, self.embedder)?;
        let radius = self.cfg.radius();
        let z0 = self.input_z[start].as_slice();
        Ok(nbs.iter().filter(|n| l2(n.z.as_slice(), z0) <= radius).cloned().collect())
    }

    /// Moves the lead head by the reinforced transition rule.
    /// Returns `false` on a dead end (no admissible neighbour with positive weight).
    pub fn lead_transition(&mut self, lead: usize) -> Result<bool> {
        let head = &self.heads[lead];
        let (current, start) = (head.current.clone(), head.start);
        let options = self.reachable(&current, start)?;
        let p: Vec<f64> = options.iter().map(|o| o.p_accept).collect();
        let c: Vec<u64> = options.iter().map(|o| self.visits(&o.key)).collect();
        let Some(probs) = transition_distribution(&p, &c, self.cfg.reinforce) else {
            return Ok(false);
        };
        let dist = WeightedIndex::new(&probs).expect("normalized weights with positive mass");
        let pick = dist.sample(&mut self.rng);
        self.heads[lead].current = options[pick].graph.clone();
        self.stats.lead_moves += 1;
        Ok(true)
    }

    /// Moves head `i` to the option in `N(u_i) ∪ {u_i}` whose recourse best matches the lead's.
    pub fn follower_transition(&mut self, i: usize, lead: usize) -> Result<()> {
        let lead_graph = self.heads[lead].current.clone();
        let lead_z = self.info(&lead_graph)?.z.clone();
        let target = lead_z.sub(&self.input_z[self.heads[lead].start]);
        let (current, start) = (self.heads[i].current.clone(), self.heads[i].start);
        let here = self.info(&current)?;
        let mut options = vec![here];
        options.extend(self.reachable(&current, start)?);
        let refs: Vec<(&CanonicalKey, &EmbeddingVector)> = options.iter().map(|o| (&o.key, &o.z)).collect();
        let pick = follower_choice(&target, &self.input_z[start], &refs);
        if pick == 0 {
            self.stats.follower_stays += 1;
        } else {
            self.heads[i].current = options[pick].graph.clone();
        }
        Ok(())
    }

    /// Every head independently draws a new start from the teleport distribution.
    pub fn teleport_all(&mut self) {
        let counts: Vec<u64> = self.pool.iter().map(|&i| self.teleports[i]).collect();
        let probs = teleport_distribution(&counts);
        let dist = WeightedIndex::new(&probs).expect("teleport weights are positive");
        let draws: Vec<usize> = (0..self.heads.len()).map(|_| self.pool[dist.sample(&mut self.rng)]).collect();
        for (head, start) in self.heads.iter_mut().zip(draws) {
            self.teleports[start] += 1;
            head.start = start;
            head.current = self.inputs[start].clone();
        }
    }

    pub fn step(&mut self) -> Result<()> {
        let teleport = self.rng.gen_bool(self.cfg.teleport);
        let lead = self.rng.gen_range(0..self.heads.len());
        if teleport {
            self.stats.teleports += 1;
            self.teleport_all();
        } else if self.lead_transition(lead)? {
            for i in (0..self.heads.len()).filter(|&i| i != lead) {
                self.follower_transition(i, lead)?;
            }
        } else {
            self.stats.forced_teleports += 1;
            self.teleport_all();
        }
        for h in 0..self.heads.len() {
            let current = self.heads[h].current.clone();
            let info = self.info(&current)?;
            *self.visits.entry(info.key.clone()).or_insert(0) += 1;
            self.stats.visit_increments += 1;
            if info.p_accept > crate::classifier::DECISION_THRESHOLD {
                self.candidates
                    .entry(info.key.clone())
                    .or_insert_with(|| (info.graph.clone(), info.p_accept));
            }
        }
        self.stats.steps += 1;
        Ok(())
    }

    pub fn outcome(&self) -> WalkOutcome {
        let candidates = self
            .candidates
            .iter()
            .map(|(key, (graph, p))| Candidate {
                key: key.clone(),
                graph: graph.clone(),
                visits: self.visits(key),
                p_accept: *p,
            })
            .collect();
        WalkOutcome {
            candidates,
            stats: self.stats.clone(),
            teleport_counts: self.teleports.clone(),
            pool: self.pool.clone(),
        }
    }

    /// Snapshot of the full walk state, sufficient to resume bit-for-bit.
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::capture(self)
    }

    /// Rebuilds a walker from a checkpoint taken on the same inputs and configuration.
    pub fn resume(
        checkpoint: Checkpoint,
        inputs: &'a [LabeledGraph],
        alphabet: &[Label],
        classifier: &'a dyn Classifier,
        embedder: &'a dyn Embedder,
    ) -> Result<Self> {
        let mut walker = Self::new(inputs, alphabet, classifier, embedder, checkpoint.config.clone())?;
        checkpoint.restore_into(&mut walker)?;
        Ok(walker)
    }
}

/// Runs a full walk and returns the accepted candidates with their visit counts.
pub fn run_vrrw(
    inputs: &[LabeledGraph],
    alphabet: &[Label],
    classifier: &dyn Classifier,
    embedder: &dyn Embedder,
    cfg: &WalkConfig,
) -> Result<WalkOutcome> {
    let mut walker = Walker::new(inputs, alphabet, classifier, embedder, cfg.clone())?;
    walker.run()?;
    Ok(walker.outcome())
}

/// The `n` most visited candidates; ties favour higher accept probability, then smaller key.
pub fn top_candidates(candidates: &[Candidate], n: usize) -> Vec<Candidate> {
    let mut sorted: Vec<Candidate> = candidates.to_vec();
    sorted.sort_by(|a, b| {
        b.visits
            .cmp(&a.visits)
            .then(b.p_accept.total_cmp(&a.p_accept))
            .then_with(|| a.key.cmp(&b.key))
    });
    sorted.truncate(n);
    sorted
}
