use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::fc::next_combination;

/// Families larger than this are solved heuristically only.
pub const DEFAULT_TWO_COVER_EXACT_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoCoverResult {
    pub picks1: Vec<usize>,
    pub picks2: Vec<usize>,
    /// `|∪picks1 ∩ ∪picks2|` of the returned picks.
    pub objective: usize,
    /// Objective reached by the alternating greedy alone.
    pub heuristic_objective: usize,
    /// True when the returned picks are provably optimal.
    pub exact: bool,
}

fn to_bitsets(family: &[Vec<usize>], universe: usize) -> Vec<FixedBitSet> {
    family
        .iter()
        .map(|s| {
            let mut b = FixedBitSet::with_capacity(universe);
            for &x in s {
                b.insert(x);
            }
            b
        })
        .collect()
}

fn union_of(sets: &[FixedBitSet], picks: &[usize], universe: usize) -> FixedBitSet {
    let mut u = FixedBitSet::with_capacity(universe);
    for &i in picks {
        u.union_with(&sets[i]);
    }
    u
}

/// Picks at most `k1` sets from `s1` and `k2` from `s2` maximizing the size of
/// the intersection of their unions. Exhaustive when both families have at
/// most `exact_cap` sets, otherwise an alternating greedy.
pub fn two_budget_two_cover(s1: &[Vec<usize>], s2: &[Vec<usize>], k1: usize, k2: usize, exact_cap: usize) -> TwoCoverResult {
    let universe = s1.iter().chain(s2).flatten().map(|&x| x + 1).max().unwrap_or(0);
    let b1 = to_bitsets(s1, universe);
    let b2 = to_bitsets(s2, universe);
    let (h1, h2) = alternating_greedy(&b1, &b2, k1, k2);
    let heuristic_objective = union_of(&b1, &h1, universe).intersection_count(&union_of(&b2, &h2, universe));
    if s1.len() > exact_cap || s2.len() > exact_cap {
        return TwoCoverResult {
            picks1: h1,
            picks2: h2,
            objective: heuristic_objective,
            heuristic_objective,
            exact: false,
        };
    }
    let (p1, p2, objective) = exhaustive(&b1, &b2, k1, k2, universe);
    TwoCoverResult {
        picks1: p1,
        picks2: p2,
        objective,
        heuristic_objective,
        exact: true,
    }
}

/// Seeds with the best single pair, then alternately adds to each side the set
/// with the largest intersection gain (ties: most new elements, then index).
fn alternating_greedy(b1: &[FixedBitSet], b2: &[FixedBitSet], k1: usize, k2: usize) -> (Vec<usize>, Vec<usize>) {
    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    if k1 == 0 || k2 == 0 || b1.is_empty() || b2.is_empty() {
        return (p1, p2);
    }
    let mut seed = (0, 0, 0usize);
    for (i, a) in b1.iter().enumerate() {
        for (j, b) in b2.iter().enumerate() {
            let c = a.intersection_count(b);
            if c > seed.2 {
                seed = (i, j, c);
            }
        }
    }
    p1.push(seed.0);
    p2.push(seed.1);
    let mut u1 = b1[seed.0].clone();
    let mut u2 = b2[seed.1].clone();
    let mut side_one = true;
    let mut stalled = 0;
    while stalled < 2 && (p1.len() < k1 || p2.len() < k2) {
        let (picks, sets, mine, other, cap) = if side_one {
            (&mut p1, b1, &mut u1, &u2, k1)
        } else {
            (&mut p2, b2, &mut u2, &u1, k2)
        };
        side_one = !side_one;
        if picks.len() >= cap {
            stalled += 1;
            continue;
        }
        let current = mine.intersection_count(other);
        let best = (0..sets.len())
            .filter(|i| !picks.contains(i))
            .map(|i| {
                let mut u = mine.clone();
                u.union_with(&sets[i]);
                let gain = u.intersection_count(other) - current;
                let fresh = sets[i].difference_count(mine);
                (gain, fresh, i)
            })
            .max_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(b.2.cmp(&a.2)));
        match best {
            Some((gain, fresh, i)) if gain > 0 || fresh > 0 => {
                picks.push(i);
                mine.union_with(&sets[i]);
                stalled = 0;
            }
            _ => stalled += 1,
        }
    }
    (p1, p2)
}

fn exhaustive(b1: &[FixedBitSet], b2: &[FixedBitSet], k1: usize, k2: usize, universe: usize) -> (Vec<usize>, Vec<usize>, usize) {
    let k1 = k1.min(b1.len());
    let k2 = k2.min(b2.len());
    if k1 == 0 || k2 == 0 {
        return (Vec::new(), Vec::new(), 0);
    }
    let mut unions2 = Vec::new();
    let mut c2: Vec<usize> = (0..k2).collect();
    loop {
        unions2.push((c2.clone(), union_of(b2, &c2, universe)));
        if !next_combination(&mut c2, b2.len()) {
            break;
        }
    }
    let mut best: Option<(Vec<usize>, Vec<usize>, usize)> = None;
    let mut c1: Vec<usize> = (0..k1).collect();
    loop {
        let u1 = union_of(b1, &c1, universe);
        for (c2, u2) in &unions2 {
            let v = u1.intersection_count(u2);
            if best.as_ref().is_none_or(|b| v > b.2) {
                best = Some((c1.clone(), c2.clone(), v));
            }
        }
        if !next_combination(&mut c1, b1.len()) {
            break;
        }
    }
    best.expect("non-empty enumeration")
}
