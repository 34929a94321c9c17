use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::{Dataset, DatasetError};
use crate::graphspace::{Label, LabeledGraph};
use crate::{Error, Result};

/// The four text files of the TU layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TuFiles {
    pub a: String,
    pub graph_indicator: String,
    /// Absent for unlabelled datasets; every node then gets label 0.
    pub node_labels: Option<String>,
    pub graph_labels: String,
}

const A: &str = "_A.txt";
const INDICATOR: &str = "_graph_indicator.txt";
const NODE_LABELS: &str = "_node_labels.txt";
const GRAPH_LABELS: &str = "_graph_labels.txt";

fn find(dir: &Path, suffix: &'static str) -> Result<Option<(String, std::path::PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut hits = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(prefix) = name.strip_suffix(suffix) {
            hits.push((prefix.to_string(), entry.path()));
        }
    }
    hits.sort();
    Ok(hits.into_iter().next())
}

fn require(dir: &Path, suffix: &'static str) -> Result<(String, std::path::PathBuf)> {
    find(dir, suffix)?.ok_or_else(|| {
        DatasetError::MissingFile {
            dir: dir.display().to_string(),
            suffix,
        }
        .into()
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads `<NAME>_A.txt`, `<NAME>_graph_indicator.txt`, `<NAME>_graph_labels.txt`
/// and, if present, `<NAME>_node_labels.txt` from `dir`. Other files are ignored.
pub fn load_tu(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let (name, a_path) = require(dir, A)?;
    let (_, ind_path) = require(dir, INDICATOR)?;
    let (_, gl_path) = require(dir, GRAPH_LABELS)?;
    let node_labels = match find(dir, NODE_LABELS)? {
        Some((_, p)) => Some(read(&p)?),
        None => None,
    };
    let files = TuFiles {
        a: read(&a_path)?,
        graph_indicator: read(&ind_path)?,
        node_labels,
        graph_labels: read(&gl_path)?,
    };
    parse_tu(&name, &files)
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_int<T: std::str::FromStr>(file: &str, line: usize, s: &str) -> Result<T, DatasetError> {
    s.trim().parse().map_err(|_| DatasetError::Parse {
        file: file.to_string(),
        line,
        msg: format!("expected an integer, found {:?}", s.trim()),
    })
}

/// Parses the TU layout held in memory. Ids are 1-indexed in the files and
/// 0-indexed in the result; each undirected edge may appear once or in both
/// directions.
pub fn parse_tu(name: &str, files: &TuFiles) -> Result<Dataset> {
    let ind_file = format!("{name}{INDICATOR}");
    let mut indicator = Vec::new();
    for (line, l) in lines(&files.graph_indicator) {
        let g: usize = parse_int(&ind_file, line, l)?;
        if g == 0 {
            return Err(DatasetError::Parse {
                file: ind_file,
                line,
                msg: "graph ids start at 1".into(),
            }
            .into());
        }
        indicator.push((g - 1, line));
    }
    let n_nodes = indicator.len();

    let gl_file = format!("{name}{GRAPH_LABELS}");
    let mut raw_classes = Vec::new();
    for (line, l) in lines(&files.graph_labels) {
        raw_classes.push(parse_int::<i64>(&gl_file, line, l)?);
    }
    let n_graphs = raw_classes.len();
    for &(g, line) in &indicator {
        if g >= n_graphs {
            return Err(DatasetError::IndexOutOfRange {
                file: ind_file,
                line,
                index: g + 1,
                max: n_graphs,
            }
            .into());
        }
    }

    let mut labels = vec![Label(0); n_nodes];
    if let Some(text) = &files.node_labels {
        let nl_file = format!("{name}{NODE_LABELS}");
        let mut count = 0;
        for (line, l) in lines(text) {
            // some layouts carry extra columns; the first is the label
            let first = l.split(',').next().unwrap_or(l);
            if count < n_nodes {
                labels[count] = Label(parse_int(&nl_file, line, first)?);
            }
            count += 1;
        }
        if count != n_nodes {
            return Err(DatasetError::LengthMismatch {
                file: nl_file,
                got: count,
                expected: n_nodes,
            }
            .into());
        }
    }

    // node -> (graph, local id); local ids follow global order
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_graphs];
    let mut local = vec![0usize; n_nodes];
    for (node, &(g, _)) in indicator.iter().enumerate() {
        local[node] = members[g].len();
        members[g].push(node);
    }

    let a_file = format!("{name}{A}");
    let mut edges: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); n_graphs];
    let mut self_loops = 0usize;
    for (line, l) in lines(&files.a) {
        let mut parts = l.split(',');
        let (Some(u), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(DatasetError::Parse {
                file: a_file,
                line,
                msg: format!("expected \"u, v\", found {l:?}"),
            }
            .into());
        };
        let u: usize = parse_int(&a_file, line, u)?;
        let v: usize = parse_int(&a_file, line, v)?;
        for x in [u, v] {
            if x == 0 || x > n_nodes {
                return Err(DatasetError::IndexOutOfRange {
                    file: a_file,
                    line,
                    index: x,
                    max: n_nodes,
                }
                .into());
            }
        }
        let (gu, gv) = (indicator[u - 1].0, indicator[v - 1].0);
        if gu != gv {
            return Err(DatasetError::DanglingEdge {
                file: a_file,
                line,
                u,
                v,
                gu: gu + 1,
                gv: gv + 1,
            }
            .into());
        }
        if u == v {
            self_loops += 1;
            continue;
        }
        let (a, b) = (local[u - 1], local[v - 1]);
        edges[gu].insert((a.min(b), a.max(b)));
    }
    if self_loops > 0 {
        log::warn!("{name}: dropped {self_loops} self-loop lines");
    }

    let mut codes: Vec<i64> = raw_classes.clone();
    codes.sort_unstable();
    codes.dedup();
    let class_codes = match codes.as_slice() {
        [] => [0, 1],
        [only] if *only <= 0 => [*only, 1],
        [only] => [0, *only],
        [lo, hi] => [*lo, *hi],
        more => return Err(DatasetError::NotBinary(more.len()).into()),
    };

    let mut graphs = Vec::with_capacity(n_graphs);
    for (g, nodes) in members.iter().enumerate() {
        let ls = nodes.iter().map(|&n| labels[n]).collect();
        graphs.push(LabeledGraph::new(ls, edges[g].iter().copied())?);
    }
    let class_labels = raw_classes.iter().map(|&c| u8::from(c == class_codes[1])).collect();
    Ok(Dataset {
        name: name.to_string(),
        graphs,
        class_labels,
        class_codes,
    })
}

/// Serializes in the TU layout, writing each edge in both directions.
pub fn to_tu(ds: &Dataset) -> TuFiles {
    let mut a = String::new();
    let mut indicator = String::new();
    let mut node_labels = String::new();
    let mut graph_labels = String::new();
    let mut offset = 0;
    for (g, graph) in ds.graphs.iter().enumerate() {
        for &l in graph.labels() {
            indicator.push_str(&format!("{}\n", g + 1));
            node_labels.push_str(&format!("{}\n", l.0));
        }
        let mut directed: Vec<(usize, usize)> = graph.edges().iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
        directed.sort_unstable();
        for (u, v) in directed {
            a.push_str(&format!("{}, {}\n", u + offset + 1, v + offset + 1));
        }
        offset += graph.node_count();
        graph_labels.push_str(&format!("{}\n", ds.class_codes[ds.class_labels[g] as usize]));
    }
    TuFiles {
        a,
        graph_indicator: indicator,
        node_labels: Some(node_labels),
        graph_labels,
    }
}

/// Writes the TU layout for `ds` into `dir`, named after the dataset.
pub fn write_tu(ds: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = to_tu(ds);
    let mut out = vec![(A, &files.a), (INDICATOR, &files.graph_indicator), (GRAPH_LABELS, &files.graph_labels)];
    if let Some(nl) = &files.node_labels {
        out.push((NODE_LABELS, nl));
    }
    for (suffix, text) in out {
        let path = dir.join(format!("{}{suffix}", ds.name));
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
