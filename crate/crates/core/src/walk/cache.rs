use std::num::NonZeroUsize;
use std::sync::Arc;

use lru::LruCache;

use crate::classifier::Classifier;
use crate::embedding::{Embedder, EmbeddingVector};
use crate::graphspace::{CanonicalKey, EditSpace, LabeledGraph};
use crate::Result;

/// A graph with everything the walk needs about it.
#[derive(Clone, Debug)]
pub struct GraphInfo {
    pub graph: LabeledGraph,
    pub key: CanonicalKey,
    pub z: EmbeddingVector,
    pub p_accept: f64,
}

/// LRU-bounded memo of classifier scores, embeddings and edit neighbourhoods,
/// keyed by canonical key. Classifiers and embedders are pure, so eviction
/// never changes walk results.
pub struct NeighborhoodCache {
    space: EditSpace,
    infos: LruCache<CanonicalKey, Arc<GraphInfo>>,
    neighborhoods: LruCache<CanonicalKey, Arc<Vec<Arc<GraphInfo>>>>,
}

impl NeighborhoodCache {
    pub fn new(space: EditSpace, capacity: usize) -> Self {
        let cap = NonZeroUsize::new(capacity).unwrap_or(NonZeroUsize::MIN);
        Self {
            space,
            infos: LruCache::new(cap),
            neighborhoods: LruCache::new(cap),
        }
    }

    pub fn space(&self) -> &EditSpace {
        &self.space
    }

    pub fn info(&mut self, g: &LabeledGraph, classifier: &dyn Classifier, embedder: &dyn Embedder) -> Result<Arc<GraphInfo>> {
        let key = self.space.key(g);
        if let Some(hit) = self.infos.get(&key) {
            return Ok(hit.clone());
        }
        let p_accept = classifier.predict(g)?.p_accept;
        let z = embedder.embed(g)?;
        let info = Arc::new(GraphInfo {
            graph: g.clone(),
            key: key.clone(),
            z,
            p_accept,
        });
        self.infos.put(key, info.clone());
        Ok(info)
    }

    /// Edit neighbourhood of `g` in canonical-key order. Uncached neighbours are
    /// scored with one batched classifier call.
    pub fn neighbors(
        &mut self,
        g: &LabeledGraph,
        classifier: &dyn Classifier,
        embedder: &dyn Embedder,
    ) -> Result<Arc<Vec<Arc<GraphInfo>>>> {
        let key = self.space.key(g);
        if let Some(hit) = self.neighborhoods.get(&key) {
            return Ok(hit.clone());
        }
        let nbs = self.space.neighbors(g)?;
        let mut slots: Vec<Option<Arc<GraphInfo>>> = Vec::with_capacity(nbs.len());
        let mut missing = Vec::new();
        for (i, nb) in nbs.iter().enumerate() {
            let hit = self.infos.get(&nb.key).cloned();
            if hit.is_none() {
                missing.push(i);
            }
            slots.push(hit);
        }
        if !missing.is_empty() {
            let graphs: Vec<LabeledGraph> = missing.iter().map(|&i| nbs[i].graph.clone()).collect();
            let preds = classifier.predict_batch(&graphs)?;
            let zs = embedder.embed_batch(&graphs)?;
            for ((i, graph), (pred, z)) in missing.iter().zip(graphs).zip(preds.into_iter().zip(zs)) {
                let info = Arc::new(GraphInfo {
                    graph,
                    key: nbs[*i].key.clone(),
                    z,
                    p_accept: pred.p_accept,
                });
                self.infos.put(info.key.clone(), info.clone());
                slots[*i] = Some(info);
            }
        }
        let list: Arc<Vec<Arc<GraphInfo>>> = Arc::new(slots.into_iter().map(|s| s.expect("every slot filled")).collect());
        self.neighborhoods.put(key, list.clone());
        Ok(list)
    }
}
