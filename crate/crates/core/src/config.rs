//! Run configuration: a TOML document, optionally layered over a named
//! profile, with `key=value` overrides applied last.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::bridge::{BridgeClient, ProcessTransport};
use crate::classifier::{Classifier, ForbiddenMotif, SameColorPair, TriangleThreshold};
use crate::datasets::{nitro_motif, SynthConfig};
use crate::embedding::{Embedder, WlHashEmbedder, DEFAULT_DIM};
use crate::graphspace::{parse_graph, to_text, Label, DEFAULT_MAX_NEIGHBORS};
use crate::recourse::{DEFAULT_MAX_CLUSTER_POINTS, DEFAULT_MIN_POINTS};
use crate::walk::WalkConfig;
use crate::{Error, Result};

/// Profiles selectable with `profile = "<name>"`.
pub const PROFILES: [&str; 2] = ["paper-default", "desk"];

/// Caps the number of counterfactuals entering clustering when `top_n` is unset.
pub const DEFAULT_TOP_N: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// A directory in the TU layout.
    Tu {
        path: PathBuf,
        /// Drop graphs holding labels rarer than this; 0 disables the filter.
        #[serde(default = "default_min_label_count")]
        min_label_count: usize,
    },
    Synthetic(SynthConfig),
    /// Star-graph encoding of a max-coverage instance.
    Reduction { n_elements: usize, sets: Vec<Vec<usize>> },
    /// A graph collection file; every graph is an input candidate.
    Graphs { path: PathBuf },
}

fn default_min_label_count() -> usize {
    crate::datasets::DEFAULT_MIN_LABEL_COUNT
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::Synthetic(SynthConfig::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BridgeSpec {
    pub program: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default)]
    pub model_path: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_timeout_ms() -> u64 {
    30_000
}

impl BridgeSpec {
    fn connect(&self, dim: usize) -> Result<BridgeClient> {
        let t = ProcessTransport::spawn(
            &self.program,
            &self.args,
            self.model_path.as_deref(),
            Duration::from_millis(self.timeout_ms),
        )?;
        BridgeClient::connect(Box::new(t), dim)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClassifierSpec {
    /// Whatever the dataset generator pairs with its graphs.
    #[default]
    Dataset,
    ForbiddenMotif {
        /// Motif in the graph text format; the nitro group when absent.
        #[serde(default)]
        motif: Option<String>,
        #[serde(default)]
        p_present: f64,
        #[serde(default = "one")]
        p_absent: f64,
    },
    SameColorPair {
        #[serde(default)]
        blank: Option<u32>,
    },
    TriangleThreshold {
        min_triangles: usize,
        #[serde(default)]
        p_below: f64,
        #[serde(default = "one")]
        p_at_least: f64,
    },
    Bridge(BridgeSpec),
}

fn one() -> f64 {
    1.0
}

impl ClassifierSpec {
    /// Builds the classifier; `Dataset` resolves against `fallback`.
    pub fn build(&self, fallback: Option<Box<dyn Classifier>>, dim: usize) -> Result<Box<dyn Classifier>> {
        Ok(match self {
            ClassifierSpec::Dataset => {
                fallback.ok_or_else(|| Error::Config("this dataset has no built-in classifier; set classifier.kind".into()))?
            }
            ClassifierSpec::ForbiddenMotif {
                motif,
                p_present,
                p_absent,
            } => {
                let m = match motif {
                    Some(text) => parse_graph(text)?,
                    None => nitro_motif(),
                };
                Box::new(ForbiddenMotif::with_probabilities(m, *p_present, *p_absent)?)
            }
            ClassifierSpec::SameColorPair { blank } => Box::new(SameColorPair { blank: blank.map(Label) }),
            ClassifierSpec::TriangleThreshold {
                min_triangles,
                p_below,
                p_at_least,
            } => Box::new(TriangleThreshold {
                min_triangles: *min_triangles,
                p_below: *p_below,
                p_at_least: *p_at_least,
            }),
            ClassifierSpec::Bridge(b) => Box::new(b.connect(dim)?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EmbedderSpec {
    WlHash(WlHashEmbedder),
    Bridge {
        #[serde(flatten)]
        bridge: BridgeSpec,
        #[serde(default = "default_dim")]
        dim: usize,
    },
}

fn default_dim() -> usize {
    DEFAULT_DIM
}

impl Default for EmbedderSpec {
    fn default() -> Self {
        EmbedderSpec::WlHash(WlHashEmbedder::default())
    }
}

impl EmbedderSpec {
    pub fn dim(&self) -> usize {
        match self {
            EmbedderSpec::WlHash(e) => e.dim,
            EmbedderSpec::Bridge { dim, .. } => *dim,
        }
    }

    pub fn build(&self) -> Result<Box<dyn Embedder>> {
        Ok(match self {
            EmbedderSpec::WlHash(e) => {
                e.validate()?;
                Box::new(e.clone())
            }
            EmbedderSpec::Bridge { bridge, dim } => Box::new(bridge.connect(*dim)?),
        })
    }
}

/// Where the reject inputs come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectBy {
    #[default]
    Labels,
    Classifier,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub profile: Option<String>,
    pub dataset: DatasetSpec,
    pub classifier: ClassifierSpec,
    pub embedder: EmbedderSpec,
    pub reject_by: RejectBy,
    /// Counterfactual radius.
    pub theta: f64,
    /// Common-recourse radius.
    pub delta: f64,
    /// Walk heads `k`.
    pub heads: usize,
    /// Walk steps `M`.
    pub steps: usize,
    /// Teleport probability.
    pub teleport: f64,
    /// Recourse budget `R`.
    pub budget: usize,
    /// Most-visited candidates kept for clustering; `None` keeps up to the default cap.
    pub top_n: Option<usize>,
    /// Counterfactual budget `T` for explain-fc; `None` means one per input.
    pub counterfactual_budget: Option<usize>,
    /// Apply the nearest-counterfactual filter even when `T` does not bind.
    pub fc_force_nearest: bool,
    pub seed: u64,
    pub max_radius: Option<f64>,
    pub neighbor_cap: usize,
    pub cache_capacity: usize,
    pub min_points: usize,
    pub max_cluster_points: usize,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let walk = WalkConfig::default();
        Self {
            profile: None,
            dataset: DatasetSpec::default(),
            classifier: ClassifierSpec::default(),
            embedder: EmbedderSpec::default(),
            reject_by: RejectBy::default(),
            theta: walk.theta,
            delta: 0.02,
            heads: walk.heads,
            steps: walk.steps,
            teleport: walk.teleport,
            budget: 100,
            top_n: None,
            counterfactual_budget: None,
            fc_force_nearest: false,
            seed: 0,
            max_radius: None,
            neighbor_cap: DEFAULT_MAX_NEIGHBORS,
            cache_capacity: walk.cache_capacity,
            min_points: DEFAULT_MIN_POINTS,
            max_cluster_points: DEFAULT_MAX_CLUSTER_POINTS,
            output: None,
        }
    }
}

/// The named profile's settings.
pub fn profile(name: &str) -> Result<RunConfig> {
    let base = RunConfig {
        profile: Some(name.to_string()),
        ..RunConfig::default()
    };
    match name {
        "paper-default" => Ok(RunConfig {
            heads: 5,
            steps: 50_000,
            teleport: 0.05,
            budget: 100,
            theta: 0.1,
            delta: 0.02,
            ..base
        }),
        "desk" => Ok(RunConfig {
            steps: 20_000,
            budget: 10,
            ..base
        }),
        other => Err(Error::Config(format!("unknown profile {other:?}; known: {}", PROFILES.join(", ")))),
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                // a different tagged variant replaces the whole table
                let same_kind = b.get(&k).and_then(|x| x.get("kind")) == v.get("kind") || v.get("kind").is_none();
                match b.get_mut(&k) {
                    Some(slot) if slot.is_table() && v.is_table() && same_kind => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

fn set_path(root: &mut toml::Value, dotted: &str, value: toml::Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = dotted.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = cur
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{dotted}: {part} is not inside a table")))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        cur = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    Ok(())
}

/// Parses one `key=value` override; the value is read as TOML, falling back to a string.
pub fn parse_override(s: &str) -> Result<(String, toml::Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {s:?} is not key=value")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(Error::Config(format!("override {s:?} has an empty key")));
    }
    let v = v.trim();
    let value = format!("x = {v}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| toml::Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

impl RunConfig {
    /// Parses a config document, applying its profile (if any) first and `overrides` last.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let doc: toml::Value = text
            .parse::<toml::Table>()
            .map(toml::Value::Table)
            .map_err(|e| Error::Config(e.to_string()))?;
        let mut doc = doc;
        for o in overrides {
            let (k, v) = parse_override(o)?;
            set_path(&mut doc, &k, v)?;
        }
        let profile_name = doc.get("profile").and_then(|p| p.as_str()).map(str::to_string);
        let base_cfg = match profile_name {
            Some(name) => profile(&name)?,
            None => RunConfig::default(),
        };
        let mut base = toml::Value::try_from(base_cfg).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut base, doc);
        let cfg: RunConfig = base.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, overrides)
    }

    /// The fully resolved config as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return bad(format!("theta must be > 0, got {}", self.theta));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad(format!("delta must be > 0, got {}", self.delta));
        }
        if !(self.teleport > 0.0 && self.teleport < 1.0) {
            return bad(format!("teleport must be in (0, 1), got {}", self.teleport));
        }
        if self.budget == 0 {
            return bad("budget (R) must be at least 1".into());
        }
        if self.heads == 0 || self.steps == 0 {
            return bad("heads and steps must be at least 1".into());
        }
        if self.top_n == Some(0) || self.counterfactual_budget == Some(0) {
            return bad("top_n and counterfactual_budget must be at least 1 when set".into());
        }
        if self.min_points == 0 {
            return bad("min_points must be at least 1".into());
        }
        if let ClassifierSpec::ForbiddenMotif { motif: Some(m), .. } = &self.classifier {
            parse_graph(m)?;
        }
        self.walk_config().validate()
    }

    pub fn walk_config(&self) -> WalkConfig {
        WalkConfig {
            heads: self.heads,
            steps: self.steps,
            teleport: self.teleport,
            theta: self.theta,
            max_radius: self.max_radius,
            seed: self.seed,
            neighbor_cap: self.neighbor_cap,
            cache_capacity: self.cache_capacity,
            ..WalkConfig::default()
        }
    }

    pub fn cluster_config(&self) -> crate::recourse::ClusterConfig {
        crate::recourse::ClusterConfig {
            delta: self.delta,
            min_points: self.min_points,
            max_points: self.max_cluster_points,
        }
    }
}

/// Motif text for configs written by hand.
pub fn motif_text() -> String {
    to_text(&nitro_motif())
}
