use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{covered_inputs, CommonRecourse, RangeIndex, RecoursePool};
use crate::embedding::EmbeddingVector;
use crate::{Error, Result};

pub const DEFAULT_MIN_POINTS: usize = 2;
/// Largest pool clustered; the neighbourhood computation is quadratic in the worst case.
pub const DEFAULT_MAX_CLUSTER_POINTS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub delta: f64,
    pub min_points: usize,
    pub max_points: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            delta: 0.02,
            min_points: DEFAULT_MIN_POINTS,
            max_points: DEFAULT_MAX_CLUSTER_POINTS,
        }
    }
}

/// Density-based clustering at radius `eps` (closed ball, the point itself
/// counts towards `min_points`). Noise points come back as singleton clusters.
/// Clusters are ordered by their smallest member; members ascend.
pub fn dbscan(points: &[EmbeddingVector], eps: f64, min_points: usize) -> Vec<Vec<usize>> {
    // identical points share one neighbourhood, so only distinct ones are
    // clustered, each weighted by its number of copies
    let mut slot: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut distinct: Vec<&EmbeddingVector> = Vec::new();
    let mut copies: Vec<Vec<usize>> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let bits = p.as_slice().iter().map(|x| x.to_bits()).collect();
        let s = *slot.entry(bits).or_insert_with(|| {
            distinct.push(p);
            copies.push(Vec::new());
            distinct.len() - 1
        });
        copies[s].push(i);
    }
    let index = RangeIndex::new(distinct.iter().copied());
    let neighborhoods: Vec<Vec<usize>> = distinct.iter().map(|p| index.within(p.as_slice(), eps)).collect();
    let core: Vec<bool> = neighborhoods
        .iter()
        .map(|n| n.iter().map(|&q| copies[q].len()).sum::<usize>() >= min_points)
        .collect();
    let mut labelled = vec![false; distinct.len()];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for seed in 0..distinct.len() {
        if labelled[seed] || !core[seed] {
            continue;
        }
        let mut members = copies[seed].clone();
        labelled[seed] = true;
        let mut queue = VecDeque::from([seed]);
        while let Some(p) = queue.pop_front() {
            for &q in &neighborhoods[p] {
                if !labelled[q] {
                    labelled[q] = true;
                    members.extend_from_slice(&copies[q]);
                    if core[q] {
                        queue.push_back(q);
                    }
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }
    for (s, done) in labelled.iter().enumerate() {
        if !done {
            clusters.extend(copies[s].iter().map(|&p| vec![p]));
        }
    }
    clusters.sort_by_key(|c| c[0]);
    clusters
}

/// Clusters the pool's recourse vectors into common recourse. Each cluster's
/// center is its members' mean; coverage is then recomputed from the pool by
/// the `delta` rule rather than taken from cluster membership.
pub fn cluster_recourse(pool: &RecoursePool, cfg: &ClusterConfig) -> Result<Vec<CommonRecourse>> {
    if pool.len() > cfg.max_points {
        return Err(Error::WorkCap {
            what: "recourse clustering",
            needed: pool.len() as u128,
            cap: cfg.max_points as u128,
        });
    }
    let points: Vec<EmbeddingVector> = pool.vectors().iter().map(|v| v.vec.clone()).collect();
    let index = pool.index();
    let out = dbscan(&points, cfg.delta, cfg.min_points)
        .into_iter()
        .map(|members| {
            let center = EmbeddingVector::mean(members.iter().map(|&i| &points[i])).expect("clusters are non-empty");
            let covered = covered_inputs(&center, pool, &index, cfg.delta);
            CommonRecourse {
                norm: center.norm(),
                members: members
                    .iter()
                    .map(|&i| (pool.vectors()[i].source, pool.vectors()[i].target.clone()))
                    .collect(),
                covered_inputs: covered,
                center,
            }
        })
        .collect();
    Ok(out)
}
