//! Versioned walk checkpoints.
//!
//! A checkpoint file is a magic header line followed by one JSON document:
//!
//! ```text
//! commonrec-walk-checkpoint 1
//! {"config":{...},"input_count":3,...}
//! ```

use std::hash::Hasher;

use fnv::FnvHasher;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Head, WalkConfig, WalkStats, Walker};
use crate::graphspace::{CanonicalKey, LabeledGraph};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "commonrec-walk-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub key: CanonicalKey,
    pub graph: LabeledGraph,
    pub p_accept: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub config: WalkConfig,
    pub input_count: usize,
    pub input_fingerprint: String,
    pub stats: WalkStats,
    pub heads: Vec<Head>,
    pub visits: Vec<(CanonicalKey, u64)>,
    pub teleports: Vec<u64>,
    pub candidates: Vec<CandidateRecord>,
    pub rng: ChaCha8Rng,
}

fn fingerprint(walker: &Walker<'_>) -> String {
    let mut h = FnvHasher::default();
    for g in walker.inputs {
        h.write(walker.cache.space().key(g).as_bytes());
        h.write_u8(0xff);
    }
    format!("{:016x}", h.finish())
}

impl Checkpoint {
    pub(super) fn capture(w: &Walker<'_>) -> Self {
        let mut visits: Vec<(CanonicalKey, u64)> = w.visits.iter().map(|(k, &c)| (k.clone(), c)).collect();
        visits.sort();
        Self {
            config: w.cfg.clone(),
            input_count: w.inputs.len(),
            input_fingerprint: fingerprint(w),
            stats: w.stats.clone(),
            heads: w.heads.clone(),
            visits,
            teleports: w.teleports.clone(),
            candidates: w
                .candidates
                .iter()
                .map(|(key, (graph, p))| CandidateRecord {
                    key: key.clone(),
                    graph: graph.clone(),
                    p_accept: *p,
                })
                .collect(),
            rng: w.rng.clone(),
        }
    }

    pub(super) fn restore_into(self, w: &mut Walker<'_>) -> Result<()> {
        let bad = |m: String| Err(Error::Checkpoint(m));
        if self.input_count != w.inputs.len() || self.input_fingerprint != fingerprint(w) {
            return bad("checkpoint was taken on a different input set".into());
        }
        if self.teleports.len() != w.inputs.len() {
            return bad("teleport counts do not match the input count".into());
        }
        if self.heads.len() != w.cfg.heads && !w.pool.is_empty() {
            return bad(format!("checkpoint has {} heads, config has {}", self.heads.len(), w.cfg.heads));
        }
        if let Some(h) = self.heads.iter().find(|h| h.start >= w.inputs.len()) {
            return bad(format!("head start {} out of range", h.start));
        }
        w.stats = self.stats;
        w.heads = self.heads;
        w.visits = self.visits.into_iter().collect();
        w.teleports = self.teleports;
        w.candidates = self
            .candidates
            .into_iter()
            .map(|c| (c.key, (c.graph, c.p_accept)))
            .collect();
        w.rng = self.rng;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let body = serde_json::to_string(self).expect("checkpoint serializes");
        format!("{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}\n{body}\n")
    }
}

pub fn parse_checkpoint(text: &str) -> Result<Checkpoint> {
    let (header, body) = text
        .split_once('\n')
        .ok_or_else(|| Error::Checkpoint("missing header line".into()))?;
    let version = header
        .strip_prefix(CHECKPOINT_MAGIC)
        .and_then(|rest| rest.trim().parse::<u32>().ok())
        .ok_or_else(|| Error::Checkpoint(format!("bad header {header:?}")))?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
    }
    let cp: Checkpoint = serde_json::from_str(body).map_err(|e| Error::Checkpoint(e.to_string()))?;
    cp.config.validate().map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok(cp)
}
