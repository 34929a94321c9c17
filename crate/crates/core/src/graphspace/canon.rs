//! Canonical identity of labelled graphs up to isomorphism.
//!
//! Graphs with at most `exact_cap` nodes get an exact canonical form computed
//! by individualization-refinement search; larger graphs get a WL digest,
//! which can collide for WL-indistinguishable non-isomorphic pairs.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::wl::wl_pattern_hashes;
use super::LabeledGraph;

const EXACT_TAG: u8 = 0;
const DIGEST_TAG: u8 = 1;

/// Byte string identifying a graph up to isomorphism; ordered bytewise.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(Arc<[u8]>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        if !s.len().is_multiple_of(2) || !s.is_ascii() {
            return None;
        }
        let bytes = (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16).ok())
            .collect::<Option<Vec<u8>>>()?;
        Some(Self(bytes.into()))
    }

    /// True when the key is an exact canonical form rather than a WL digest.
    pub fn is_exact(&self) -> bool {
        self.0.first() == Some(&EXACT_TAG)
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({})", self.to_hex())
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for CanonicalKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for CanonicalKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::from_hex(&s).ok_or_else(|| serde::de::Error::custom("invalid canonical key hex"))
    }
}

pub const DEFAULT_EXACT_CAP: usize = 10;
pub const DEFAULT_DIGEST_ROUNDS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canonicalizer {
    pub exact_cap: usize,
    pub digest_rounds: usize,
}

impl Default for Canonicalizer {
    fn default() -> Self {
        Self {
            exact_cap: DEFAULT_EXACT_CAP,
            digest_rounds: DEFAULT_DIGEST_ROUNDS,
        }
    }
}

impl Canonicalizer {
    pub fn key(&self, g: &LabeledGraph) -> CanonicalKey {
        let bytes = if g.node_count() <= self.exact_cap {
            exact_form(g)
        } else {
            wl_digest(g, self.digest_rounds)
        };
        CanonicalKey(bytes.into())
    }
}

/// Canonical key with the default exact-regime cap.
pub fn canonical_key(g: &LabeledGraph) -> CanonicalKey {
    Canonicalizer::default().key(g)
}

fn wl_digest(g: &LabeledGraph, rounds: usize) -> Vec<u8> {
    let hashes = wl_pattern_hashes(g, rounds, 0x5eed);
    let mut out = Vec::with_capacity(9 + 8 * g.node_count() * (rounds + 1));
    out.push(DIGEST_TAG);
    out.extend_from_slice(&(g.node_count() as u32).to_be_bytes());
    out.extend_from_slice(&(g.edge_count() as u32).to_be_bytes());
    for mut round in hashes {
        round.sort_unstable();
        for h in round {
            out.extend_from_slice(&h.to_be_bytes());
        }
    }
    out
}

/// Ordered partition stored as a colour per vertex; colours are `0..cells`
/// and their order is itself isomorphism-invariant.
fn refine(g: &LabeledGraph, colors: &mut Vec<usize>) {
    let n = colors.len();
    let mut cells = count_cells(colors);
    // neighbour colour multisets packed into one buffer, `spans[v]` locating v's
    let mut packed: Vec<usize> = Vec::with_capacity(2 * g.edge_count());
    let mut spans: Vec<(usize, usize)> = Vec::with_capacity(n);
    let mut order: Vec<usize> = (0..n).collect();
    loop {
        packed.clear();
        spans.clear();
        for v in 0..n {
            let start = packed.len();
            packed.extend(g.neighbors(v).iter().map(|&w| colors[w]));
            packed[start..].sort_unstable();
            spans.push((start, packed.len()));
        }
        let sig = |v: usize| (colors[v], &packed[spans[v].0..spans[v].1]);
        order.sort_unstable_by(|&a, &b| sig(a).cmp(&sig(b)).then(a.cmp(&b)));
        let mut next = 0;
        let mut fresh = vec![0usize; n];
        for i in 0..n {
            if i > 0 && sig(order[i]) != sig(order[i - 1]) {
                next += 1;
            }
            fresh[order[i]] = next;
        }
        *colors = fresh;
        let now = if n == 0 { 0 } else { next + 1 };
        if now == cells {
            return;
        }
        cells = now;
    }
}

fn count_cells(colors: &[usize]) -> usize {
    colors.iter().max().map_or(0, |&m| m + 1)
}

fn individualize(colors: &[usize], v: usize) -> Vec<usize> {
    let c = colors[v];
    colors
        .iter()
        .enumerate()
        .map(|(w, &cw)| {
            if cw > c || (cw == c && w != v) {
                cw + 1
            } else {
                cw
            }
        })
        .collect()
}

/// `u` and `v` are interchangeable: same label and same neighbourhood apart from each other.
fn twins(g: &LabeledGraph, u: usize, v: usize) -> bool {
    if g.label(u) != g.label(v) {
        return false;
    }
    let a = g.neighbors(u).iter().filter(|&&w| w != v);
    let b = g.neighbors(v).iter().filter(|&&w| w != u);
    a.eq(b)
}

fn encode(g: &LabeledGraph, colors: &[usize]) -> Vec<u8> {
    let n = g.node_count();
    let mut order = vec![0usize; n];
    for (v, &c) in colors.iter().enumerate() {
        order[c] = v;
    }
    let mut pos = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut out = Vec::with_capacity(5 + 4 * n + n * n / 16 + 1);
    out.push(EXACT_TAG);
    out.extend_from_slice(&(n as u32).to_be_bytes());
    for &v in &order {
        out.extend_from_slice(&g.label(v).0.to_be_bytes());
    }
    let mut bits = vec![0u8; (n * n.saturating_sub(1) / 2).div_ceil(8)];
    for &(u, v) in g.edges() {
        let (a, b) = (pos[u].min(pos[v]), pos[u].max(pos[v]));
        // row-major index into the strict upper triangle
        let idx = a * n - a * (a + 1) / 2 + (b - a - 1);
        bits[idx / 8] |= 0x80 >> (idx % 8);
    }
    out.extend_from_slice(&bits);
    out
}

fn search(g: &LabeledGraph, mut colors: Vec<usize>, best: &mut Option<Vec<u8>>) {
    refine(g, &mut colors);
    let n = colors.len();
    if count_cells(&colors) == n {
        let leaf = encode(g, &colors);
        if best.as_ref().is_none_or(|b| leaf < *b) {
            *best = Some(leaf);
        }
        return;
    }
    let mut size = vec![0usize; n];
    for &c in &colors {
        size[c] += 1;
    }
    let target = (0..n).find(|&c| size[c] > 1).expect("non-discrete partition has a split cell");
    let mut tried: Vec<usize> = Vec::new();
    for v in (0..n).filter(|&v| colors[v] == target) {
        // swapping twins is an automorphism fixing the current partition
        if tried.iter().any(|&u| twins(g, u, v)) {
            continue;
        }
        tried.push(v);
        search(g, individualize(&colors, v), best);
    }
}

fn exact_form(g: &LabeledGraph) -> Vec<u8> {
    let mut distinct: Vec<_> = g.labels().to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let colors = g
        .labels()
        .iter()
        .map(|l| distinct.binary_search(l).expect("label present"))
        .collect();
    let mut best = None;
    search(g, colors, &mut best);
    best.unwrap_or_else(|| encode(g, &[]))
}
