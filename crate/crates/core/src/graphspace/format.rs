//! Line-oriented text serialization.
//!
//! ```text
//! n m
//! label_0
//! ...
//! label_{n-1}
//! u v        (m lines, 0-indexed, u < v, sorted)
//! ```
//!
//! Serialization is canonical for a given `LabeledGraph`, so
//! `to_text(parse(to_text(g))) == to_text(g)` byte for byte.

use std::fmt::Write as _;

use super::{GraphError, Label, LabeledGraph};

pub fn to_text(g: &LabeledGraph) -> String {
    let mut out = String::new();
    write_text(g, &mut out);
    out
}

fn write_text(g: &LabeledGraph, out: &mut String) {
    let _ = writeln!(out, "{} {}", g.node_count(), g.edge_count());
    for l in g.labels() {
        let _ = writeln!(out, "{}", l.0);
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
}

/// Several graphs back to back; each block is self-delimiting via its header.
pub fn collection_to_text(graphs: &[LabeledGraph]) -> String {
    let mut out = String::new();
    for g in graphs {
        write_text(g, &mut out);
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        self.inner
            .by_ref()
            .map(|(i, l)| (i + 1, l.trim()))
            .find(|(_, l)| !l.is_empty())
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), GraphError> {
        self.next_content().ok_or_else(|| GraphError::Parse {
            line: 0,
            msg: format!("unexpected end of input, expected {what}"),
        })
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse { line, msg: msg.into() }
}

fn fields<const N: usize>(line: usize, text: &str) -> Result<[usize; N], GraphError> {
    let mut out = [0usize; N];
    let mut it = text.split_whitespace();
    for slot in &mut out {
        let tok = it.next().ok_or_else(|| parse_err(line, format!("expected {N} integers")))?;
        *slot = tok
            .parse()
            .map_err(|_| parse_err(line, format!("invalid integer {tok:?}")))?;
    }
    if it.next().is_some() {
        return Err(parse_err(line, format!("expected {N} integers, found more")));
    }
    Ok(out)
}

fn parse_block(lines: &mut Lines<'_>, header: (usize, &str)) -> Result<LabeledGraph, GraphError> {
    let (hline, htext) = header;
    let [n, m] = fields::<2>(hline, htext)?;
    // reject absurd headers before allocating
    if n > u32::MAX as usize || m > n.saturating_mul(n) / 2 {
        return Err(parse_err(hline, format!("edge count {m} impossible for {n} nodes")));
    }
    let mut labels = Vec::with_capacity(n.min(1 << 16));
    for _ in 0..n {
        let (line, text) = lines.expect("node label")?;
        let [l] = fields::<1>(line, text)?;
        let l = u32::try_from(l).map_err(|_| parse_err(line, "label exceeds u32"))?;
        labels.push(Label(l));
    }
    let mut edges = Vec::with_capacity(m.min(1 << 16));
    let mut last_line = hline;
    for _ in 0..m {
        let (line, text) = lines.expect("edge")?;
        let [u, v] = fields::<2>(line, text)?;
        edges.push((u, v));
        last_line = line;
    }
    LabeledGraph::new(labels, edges).map_err(|e| parse_err(last_line, e.to_string()))
}

/// Parses exactly one graph; trailing non-blank content is an error.
pub fn parse_graph(text: &str) -> Result<LabeledGraph, GraphError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let header = lines.expect("header `n m`")?;
    let g = parse_block(&mut lines, header)?;
    if let Some((line, _)) = lines.next_content() {
        return Err(parse_err(line, "trailing content after graph"));
    }
    Ok(g)
}

pub fn parse_collection(text: &str) -> Result<Vec<LabeledGraph>, GraphError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let mut out = Vec::new();
    while let Some(header) = lines.next_content() {
        out.push(parse_block(&mut lines, header)?);
    }
    Ok(out)
}

impl serde::Serialize for LabeledGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_text(self))
    }
}

impl<'de> serde::Deserialize<'de> for LabeledGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_graph(&text).map_err(serde::de::Error::custom)
    }
}
