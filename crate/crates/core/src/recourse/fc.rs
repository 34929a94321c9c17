use rand::Rng;
use serde::{Deserialize, Serialize};

use super::select::binomial;
use super::{brute_force_best_r, cluster_recourse, greedy_select, ClusterConfig, RecoursePool, Summary};
use crate::embedding::EmbeddingVector;
use crate::graphspace::CanonicalKey;
use crate::{Error, Result};

/// For each input, the candidate with the smallest recourse norm `‖z(v) − z(G)‖`
/// (ties: smaller key). Returns ascending indices into `candidates`, one per
/// distinct key.
pub fn fc_filter_nearest(input_z: &[EmbeddingVector], candidates: &[(CanonicalKey, EmbeddingVector)]) -> Vec<usize> {
    if candidates.is_empty() {
        return Vec::new();
    }
    let mut keep: Vec<usize> = input_z
        .iter()
        .map(|z_g| {
            (0..candidates.len())
                .min_by(|&a, &b| {
                    let da = candidates[a].1.distance(z_g);
                    let db = candidates[b].1.distance(z_g);
                    da.total_cmp(&db).then_with(|| candidates[a].0.cmp(&candidates[b].0))
                })
                .expect("non-empty")
        })
        .collect();
    keep.sort_unstable();
    keep.dedup();
    keep.dedup_by(|a, b| candidates[*a].0 == candidates[*b].0);
    keep
}

/// The set function `g`: best coverage (in inputs) reachable with the chosen
/// counterfactuals through at most `R` common recourse.
pub trait FcObjective {
    /// Number of counterfactuals to choose from.
    fn universe(&self) -> usize;
    fn n_inputs(&self) -> usize;
    /// Covered-input count for the counterfactual subset `chosen`.
    fn value(&self, chosen: &[usize]) -> Result<usize>;

    /// Marginal gain `g_S(e)`.
    fn gain(&self, base: &[usize], base_value: usize, e: usize) -> Result<usize> {
        let mut with = base.to_vec();
        with.push(e);
        Ok(self.value(&with)?.saturating_sub(base_value))
    }
}

/// Abstract objective from explicit `(counterfactual, input, recourse)` incidences,
/// evaluated exactly over all recourse subsets of size `budget`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableObjective {
    pub n_counterfactuals: usize,
    pub n_inputs: usize,
    pub n_recourse: usize,
    pub budget: usize,
    /// `(counterfactual, input, recourse)`: recourse `r` turns input `g` into counterfactual `h`.
    pub entries: Vec<(usize, usize, usize)>,
}

impl TableObjective {
    pub fn new(n_counterfactuals: usize, n_inputs: usize, budget: usize, entries: Vec<(usize, usize, usize)>) -> Result<Self> {
        let mut n_recourse = 0;
        for &(h, g, r) in &entries {
            if h >= n_counterfactuals || g >= n_inputs {
                return Err(Error::Config(format!("table entry ({h}, {g}, {r}) out of range")));
            }
            n_recourse = n_recourse.max(r + 1);
        }
        Ok(Self {
            n_counterfactuals,
            n_inputs,
            n_recourse,
            budget,
            entries,
        })
    }

    /// Best recourse subset for `chosen` and its covered-input count.
    pub fn best_recourse(&self, chosen: &[usize]) -> (Vec<usize>, usize) {
        let mut per_recourse: Vec<u128> = vec![0; self.n_recourse];
        for &(h, g, r) in &self.entries {
            if chosen.contains(&h) {
                per_recourse[r] |= 1u128 << g;
            }
        }
        let k = self.budget.min(self.n_recourse);
        let mut best = (Vec::new(), 0usize);
        let mut combo: Vec<usize> = (0..k).collect();
        if k == 0 {
            return best;
        }
        loop {
            let covered = combo.iter().fold(0u128, |acc, &r| acc | per_recourse[r]).count_ones() as usize;
            if covered > best.1 || best.0.is_empty() {
                best = (combo.clone(), covered);
            }
            if !next_combination(&mut combo, self.n_recourse) {
                return best;
            }
        }
    }
}

impl FcObjective for TableObjective {
    fn universe(&self) -> usize {
        self.n_counterfactuals
    }

    fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    fn value(&self, chosen: &[usize]) -> Result<usize> {
        if self.n_inputs > 128 {
            return Err(Error::WorkCap {
                what: "table objective inputs",
                needed: self.n_inputs as u128,
                cap: 128,
            });
        }
        Ok(self.best_recourse(chosen).1)
    }
}

/// How the embedded objective picks its `R` recourse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluator {
    Exhaustive,
    Greedy,
    /// Exhaustive when the subset count fits `subset_cap`, greedy otherwise.
    Auto { subset_cap: u128 },
}

/// `g` over real embeddings: recourse pool of the chosen counterfactuals,
/// clustered, then the best `budget` recourse selected.
#[derive(Clone, Debug)]
pub struct EmbeddedObjective {
    input_z: Vec<EmbeddingVector>,
    candidates: Vec<(CanonicalKey, EmbeddingVector)>,
    theta: f64,
    cluster: ClusterConfig,
    budget: usize,
    evaluator: Evaluator,
}

impl EmbeddedObjective {
    pub fn new(
        input_z: Vec<EmbeddingVector>,
        candidates: Vec<(CanonicalKey, EmbeddingVector)>,
        theta: f64,
        cluster: ClusterConfig,
        budget: usize,
        evaluator: Evaluator,
    ) -> Self {
        Self {
            input_z,
            candidates,
            theta,
            cluster,
            budget,
            evaluator,
        }
    }

    /// The summary behind `value(chosen)` and the evaluator that produced it.
    pub fn summary(&self, chosen: &[usize]) -> Result<(Summary, Evaluator)> {
        let cf: Vec<(CanonicalKey, EmbeddingVector)> = chosen.iter().map(|&i| self.candidates[i].clone()).collect();
        let pool = RecoursePool::build(&self.input_z, &cf, self.theta);
        let n = self.input_z.len();
        let delta = self.cluster.delta;
        if pool.is_empty() {
            return Ok((Summary::empty(n, self.theta, delta), self.resolved(0)));
        }
        let clusters = cluster_recourse(&pool, &self.cluster)?;
        let used = self.resolved(clusters.len());
        let summary = match used {
            Evaluator::Exhaustive => brute_force_best_r(&clusters, self.budget, n, self.theta, delta, u128::MAX)?,
            _ => greedy_select(&clusters, self.budget, n, self.theta, delta),
        };
        Ok((summary, used))
    }

    fn resolved(&self, n_clusters: usize) -> Evaluator {
        match self.evaluator {
            Evaluator::Auto { subset_cap } => {
                if binomial(n_clusters, self.budget.min(n_clusters)) <= subset_cap {
                    Evaluator::Exhaustive
                } else {
                    Evaluator::Greedy
                }
            }
            e => e,
        }
    }
}

impl FcObjective for EmbeddedObjective {
    fn universe(&self) -> usize {
        self.candidates.len()
    }

    fn n_inputs(&self) -> usize {
        self.input_z.len()
    }

    fn value(&self, chosen: &[usize]) -> Result<usize> {
        Ok(self.summary(chosen)?.0.covered_count())
    }
}

/// A chosen counterfactual set with its objective value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FcSelection {
    /// Counterfactual indices in pick order.
    pub chosen: Vec<usize>,
    pub value: usize,
    /// Realized marginal gain of each pick.
    pub gains: Vec<usize>,
    /// Whether every pick strictly increased the objective.
    pub c1_held: bool,
}

/// Randomized greedy: each round ranks the remaining counterfactuals by
/// singleton marginal gain, keeps the `budget` best (ties: lower index) and
/// adds one of them uniformly at random.
pub fn randomized_greedy_fc<O: FcObjective + ?Sized, R: Rng + ?Sized>(obj: &O, budget: usize, rng: &mut R) -> Result<FcSelection> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut value = obj.value(&chosen)?;
    let mut gains = Vec::new();
    let mut c1_held = true;
    for _ in 0..budget {
        let mut scored: Vec<(usize, usize)> = Vec::new();
        for e in 0..obj.universe() {
            if !chosen.contains(&e) {
                scored.push((obj.gain(&chosen, value, e)?, e));
            }
        }
        if scored.is_empty() {
            break;
        }
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.truncate(budget);
        let (gain, e) = scored[rng.gen_range(0..scored.len())];
        chosen.push(e);
        value += gain;
        gains.push(gain);
        c1_held &= gain > 0;
    }
    Ok(FcSelection {
        chosen,
        value,
        gains,
        c1_held,
    })
}

/// Optimal counterfactual subset of size `min(budget, universe)` by enumeration;
/// the lexicographically first optimum wins.
pub fn brute_force_fc<O: FcObjective + ?Sized>(obj: &O, budget: usize, subset_cap: u128) -> Result<FcSelection> {
    let n = obj.universe();
    let k = budget.min(n);
    let work = binomial(n, k);
    if work > subset_cap {
        return Err(Error::WorkCap {
            what: "exhaustive counterfactual selection",
            needed: work,
            cap: subset_cap,
        });
    }
    let mut combo: Vec<usize> = (0..k).collect();
    let mut best: Option<(usize, Vec<usize>)> = None;
    loop {
        let v = obj.value(&combo)?;
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, combo.clone()));
        }
        if k == 0 || !next_combination(&mut combo, n) {
            break;
        }
    }
    let (value, chosen) = best.expect("at least one subset");
    let mut gains = Vec::with_capacity(chosen.len());
    let mut prev = obj.value(&[])?;
    for i in 1..=chosen.len() {
        let v = obj.value(&chosen[..i])?;
        gains.push(v - prev);
        prev = v;
    }
    let c1_held = gains.iter().all(|&g| g > 0);
    Ok(FcSelection {
        chosen,
        value,
        gains,
        c1_held,
    })
}

/// Advances `combo` (strictly increasing, values `< n`) to the next
/// k-combination in lexicographic order.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 && combo[i - 1] == n - k + i - 1 {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    combo[i - 1] += 1;
    for j in i..k {
        combo[j] = combo[j - 1] + 1;
    }
    true
}
