//! Labelled graphs, unit edits, edit neighbourhoods, canonical identity and
//! the exact edit-distance oracle.

mod canon;
mod edit;
mod format;
mod ged;
mod graph;
mod wl;

pub use canon::{canonical_key, CanonicalKey, Canonicalizer, DEFAULT_EXACT_CAP};
pub use edit::{apply_edit, applicable_edits, edit_neighbors, EditSpace, GraphEdit, Neighbor, DEFAULT_MAX_NEIGHBORS};
pub use format::{collection_to_text, parse_collection, parse_graph, to_text};
pub use ged::{exact_ged, normalized_ged, GedOracle, DEFAULT_GED_NODE_CAP};
pub use graph::{Label, LabeledGraph};
pub use wl::wl_pattern_hashes;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("node {node} out of range for graph with {count} nodes")]
    NodeOutOfRange { node: usize, count: usize },
    #[error("self-loop on node {node}")]
    SelfLoop { node: usize },
    #[error("parallel edge {u}-{v}")]
    ParallelEdge { u: usize, v: usize },
    #[error("{edit} not applicable: {reason}")]
    EditPrecondition { edit: GraphEdit, reason: &'static str },
    #[error("label alphabet is empty")]
    EmptyAlphabet,
    #[error("edit neighbourhood bound {bound} exceeds cap {cap}")]
    NeighborhoodTooLarge { bound: usize, cap: usize },
    #[error("graph with {nodes} nodes exceeds exact edit-distance cap {cap}")]
    GedCapExceeded { nodes: usize, cap: usize },
    #[error("normalized edit distance undefined for two empty graphs")]
    ZeroDenominator,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
