use fixedbitset::FixedBitSet;

use super::fc::next_combination;
use super::{CommonRecourse, Summary};
use crate::{Error, Result};

/// Largest number of subsets the exhaustive selector will enumerate.
pub const DEFAULT_SUBSET_CAP: u128 = 2_000_000;

fn bitset(n: usize, items: &[usize]) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(n);
    for &i in items {
        b.insert(i);
    }
    b
}

/// Change in cost when adding a recourse of norm `norm` covering `covered`,
/// given the current per-input minimum norms (infinite when uncovered).
fn added_cost(best: &[f64], covered: &[usize], norm: f64) -> f64 {
    covered
        .iter()
        .map(|&g| {
            let b = best[g];
            if b.is_infinite() {
                norm
            } else if norm < b {
                norm - b
            } else {
                0.0
            }
        })
        .sum()
}

/// Greedy maximum coverage: repeatedly adds the recourse with the largest
/// marginal coverage (ties: smaller added cost, then lower index) until `budget`
/// picks are made or no recourse adds coverage.
pub fn greedy_select(clusters: &[CommonRecourse], budget: usize, n_inputs: usize, theta: f64, delta: f64) -> Summary {
    let sets: Vec<FixedBitSet> = clusters.iter().map(|c| bitset(n_inputs, &c.covered_inputs)).collect();
    let mut covered = FixedBitSet::with_capacity(n_inputs);
    let mut best = vec![f64::INFINITY; n_inputs];
    let mut used = vec![false; clusters.len()];
    let mut picks = Vec::new();
    for _ in 0..budget {
        let mut top_gain = 0usize;
        let mut tied: Vec<usize> = Vec::new();
        for (i, s) in sets.iter().enumerate() {
            if used[i] {
                continue;
            }
            let gain = s.difference_count(&covered);
            if gain > top_gain {
                top_gain = gain;
                tied.clear();
                tied.push(i);
            } else if gain == top_gain && gain > 0 {
                tied.push(i);
            }
        }
        if top_gain == 0 {
            break;
        }
        let pick = tied
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let ca = added_cost(&best, &clusters[a].covered_inputs, clusters[a].norm);
                let cb = added_cost(&best, &clusters[b].covered_inputs, clusters[b].norm);
                ca.total_cmp(&cb).then(a.cmp(&b))
            })
            .expect("at least one tied candidate");
        used[pick] = true;
        covered.union_with(&sets[pick]);
        for &g in &clusters[pick].covered_inputs {
            best[g] = best[g].min(clusters[pick].norm);
        }
        picks.push(pick);
    }
    let selected = picks.into_iter().map(|i| clusters[i].clone()).collect();
    Summary::from_selection(selected, n_inputs, theta, delta)
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Exact maximum coverage with at most `budget` recourse by exhaustive
/// enumeration. Among optimal selections the one with the lowest cost wins,
/// then the lexicographically first index set.
pub fn brute_force_best_r(
    clusters: &[CommonRecourse],
    budget: usize,
    n_inputs: usize,
    theta: f64,
    delta: f64,
    subset_cap: u128,
) -> Result<Summary> {
    let m = clusters.len();
    let k = budget.min(m);
    let work = binomial(m, k);
    if work > subset_cap {
        return Err(Error::WorkCap {
            what: "exhaustive recourse selection",
            needed: work,
            cap: subset_cap,
        });
    }
    if k == 0 {
        return Ok(Summary::empty(n_inputs, theta, delta));
    }
    let sets: Vec<FixedBitSet> = clusters.iter().map(|c| bitset(n_inputs, &c.covered_inputs)).collect();
    // coverage is monotone, so some optimum uses exactly k recourse
    let mut combo: Vec<usize> = (0..k).collect();
    let mut best: Option<(usize, f64, Vec<usize>)> = None;
    let mut acc = FixedBitSet::with_capacity(n_inputs);
    loop {
        acc.clear();
        for &i in &combo {
            acc.union_with(&sets[i]);
        }
        let count = acc.count_ones(..);
        let better = match &best {
            None => true,
            Some((bc, bcost, _)) => {
                count > *bc || (count == *bc && {
                    let cost = combo_cost(clusters, &combo, n_inputs);
                    cost < *bcost
                })
            }
        };
        if better {
            let cost = combo_cost(clusters, &combo, n_inputs);
            best = Some((count, cost, combo.clone()));
        }
        if !next_combination(&mut combo, m) {
            break;
        }
    }
    let (_, _, picks) = best.expect("at least one combination");
    let selected = picks.into_iter().map(|i| clusters[i].clone()).collect();
    Ok(Summary::from_selection(selected, n_inputs, theta, delta))
}

fn combo_cost(clusters: &[CommonRecourse], combo: &[usize], n_inputs: usize) -> f64 {
    let mut best = vec![f64::INFINITY; n_inputs];
    for &i in combo {
        for &g in &clusters[i].covered_inputs {
            best[g] = best[g].min(clusters[i].norm);
        }
    }
    best.iter().filter(|b| b.is_finite()).sum()
}
