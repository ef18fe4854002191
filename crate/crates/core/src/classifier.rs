//! Nearest-point classification against an atlas of model embeddings, the
//! density-refined variant, and the randomness index.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{critical_point, ErParams};
use crate::error::{Error, Result};
use crate::generators::{gen_ws, k_grid, k_max, WsParams};
use crate::graph::Graph;
use crate::motif::{compute_rfp, Rfp};
use crate::rng::Seed;

/// Version of the atlas JSON layout.
pub const ATLAS_SCHEMA_VERSION: u32 = 1;

/// Edge probabilities of the analytic ER entries: 0.1, ..., 0.9.
pub fn er_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// Rewiring probabilities of the WS entries: 0, 0.1, ..., 0.9.
pub fn rewiring_grid() -> Vec<f64> {
    (0..=9).map(|i| i as f64 / 10.0).collect()
}

/// Generating model of an atlas entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelLabel {
    Er { p: f64 },
    Ws { p_r: f64, k: usize },
}

impl ModelLabel {
    pub fn is_er(&self) -> bool {
        matches!(self, ModelLabel::Er { .. })
    }
}

impl fmt::Display for ModelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelLabel::Er { p } => write!(f, "ER {p}"),
            ModelLabel::Ws { p_r, k } => write!(f, "WS {p_r},{k}"),
        }
    }
}

/// A labelled embedding. Analytic ER points carry `reps = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub label: ModelLabel,
    pub rfp: Rfp,
    pub n: usize,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasProvenance {
    pub crate_version: String,
    pub seed: Seed,
    pub reps: usize,
    pub er_grid: Vec<f64>,
    pub rewiring_grid: Vec<f64>,
    pub k_grid: Vec<usize>,
    /// Grid cells whose replicates never produced a connected tetrad.
    pub skipped: Vec<ModelLabel>,
}

/// Model embeddings for one node count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atlas {
    pub schema_version: u32,
    pub n: usize,
    pub points: Vec<ModelPoint>,
    pub provenance: AtlasProvenance,
}

/// Seed of the WS grid cell `(n, k, p_r)` under a master seed. Shared by
/// atlas construction and refined classification so both see the same
/// embedding for the same cell.
pub fn ws_cell_seed(master: Seed, params: &WsParams) -> Seed {
    master.derive(&[0x5753, params.n as u64, params.k as u64, params.p_r.to_bits()])
}

/// Mean RFP of `reps` WS graphs; replicate `r` uses `seed.derive(&[r])`.
/// Replicates without connected tetrads are left out of the mean.
pub fn ws_embedding(params: &WsParams, reps: usize, seed: Seed) -> Result<Rfp> {
    params.validate()?;
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    let points = (0..reps)
        .into_par_iter()
        .map(|r| {
            let g = gen_ws(params, seed.derive(&[r as u64]))?;
            match compute_rfp(&g) {
                Ok(p) => Ok(Some(p)),
                Err(Error::NoConnectedTetrads) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<Option<Rfp>>>>()?;
    Rfp::mean(points.iter().flatten()).ok_or(Error::NoConnectedTetrads)
}

/// Builds the atlas for graphs on `n` nodes: nine analytic ER points
/// followed by WS embeddings over `p_r` (outer) and `k` (inner).
pub fn build_atlas(n: usize, reps: usize, seed: Seed) -> Result<Atlas> {
    if n < 5 {
        return Err(Error::TooSmall { n, min: 5 });
    }
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    let mut points = Vec::new();
    for p in er_grid() {
        points.push(ModelPoint {
            label: ModelLabel::Er { p },
            rfp: critical_point(&ErParams::new(n, p)?)?,
            n,
            reps: 0,
        });
    }
    let cells: Vec<WsParams> = rewiring_grid()
        .into_iter()
        .flat_map(|p_r| k_grid(n).into_iter().map(move |k| WsParams { n, k, p_r }))
        .collect();
    let embedded = cells
        .par_iter()
        .map(|params| match ws_embedding(params, reps, ws_cell_seed(seed, params)) {
            Ok(rfp) => Ok(Some(rfp)),
            Err(Error::NoConnectedTetrads) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut skipped = Vec::new();
    for (params, rfp) in cells.iter().zip(embedded) {
        let label = ModelLabel::Ws {
            p_r: params.p_r,
            k: params.k,
        };
        match rfp {
            Some(rfp) => points.push(ModelPoint { label, rfp, n, reps }),
            None => skipped.push(label),
        }
    }
    Ok(Atlas {
        schema_version: ATLAS_SCHEMA_VERSION,
        n,
        points,
        provenance: AtlasProvenance {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            reps,
            er_grid: er_grid(),
            rewiring_grid: rewiring_grid(),
            k_grid: k_grid(n),
            skipped,
        },
    })
}

impl Atlas {
    pub fn load(path: &Path) -> Result<Atlas> {
        let atlas: Atlas = serde_json::from_slice(&fs::read(path)?)?;
        if atlas.schema_version != ATLAS_SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "atlas schema version {} is not supported (expected {})",
                atlas.schema_version, ATLAS_SCHEMA_VERSION
            )));
        }
        if atlas.points.iter().any(|p| p.n != atlas.n) {
            return Err(Error::InvalidParameter("atlas points disagree on n".into()));
        }
        Ok(atlas)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        fs::write(path, bytes)?;
        Ok(())
    }
}

/// On-disk atlas store keyed by `(n, reps, seed, crate version)`.
#[derive(Debug, Clone)]
pub struct AtlasCache {
    dir: PathBuf,
}

impl AtlasCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        AtlasCache { dir: dir.into() }
    }

    pub fn path_for(&self, n: usize, reps: usize, seed: Seed) -> PathBuf {
        self.dir.join(format!(
            "atlas-n{n}-reps{reps}-seed{seed}-v{}.json",
            env!("CARGO_PKG_VERSION")
        ))
    }

    pub fn load_or_build(&self, n: usize, reps: usize, seed: Seed) -> Result<Atlas> {
        let path = self.path_for(n, reps, seed);
        if path.exists() {
            let atlas = Atlas::load(&path)?;
            if atlas.n == n && atlas.provenance.reps == reps && atlas.provenance.seed == seed {
                return Ok(atlas);
            }
            log::warn!("ignoring stale atlas cache entry {}", path.display());
        }
        let atlas = build_atlas(n, reps, seed)?;
        fs::create_dir_all(&self.dir)?;
        atlas.save(&path)?;
        Ok(atlas)
    }
}

/// Outcome of [`classify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub best: ModelPoint,
    pub distance: f64,
    pub runner_up: Option<(ModelLabel, f64)>,
    /// Another entry is exactly as close as `best`; the earlier one won.
    pub tie: bool,
}

/// Nearest atlas entry to the RFP of `g` in Euclidean distance.
pub fn classify(g: &Graph, atlas: &Atlas) -> Result<Classification> {
    if g.n() != atlas.n {
        return Err(Error::SizeMismatch {
            graph: g.n(),
            atlas: atlas.n,
        });
    }
    let rfp = compute_rfp(g)?;
    classify_rfp(&rfp, atlas)
}

/// Nearest atlas entry to a precomputed RFP.
pub fn classify_rfp(rfp: &Rfp, atlas: &Atlas) -> Result<Classification> {
    let mut ranked: Vec<(usize, f64)> = atlas
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, rfp.distance(&p.rfp)))
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let (best_idx, distance) = *ranked
        .first()
        .ok_or_else(|| Error::InvalidParameter("atlas is empty".into()))?;
    let runner_up = ranked.get(1).map(|&(i, d)| (atlas.points[i].label, d));
    Ok(Classification {
        best: atlas.points[best_idx].clone(),
        distance,
        tie: runner_up.is_some_and(|(_, d)| d == distance),
        runner_up,
    })
}

/// Label space of the density-refined classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum RefinedLabel {
    Er,
    Ws { p_r: f64 },
}

impl RefinedLabel {
    pub fn is_er(&self) -> bool {
        matches!(self, RefinedLabel::Er)
    }
}

impl fmt::Display for RefinedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefinedLabel::Er => write!(f, "ER"),
            RefinedLabel::Ws { p_r } => write!(f, "WS {p_r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedClassification {
    pub label: RefinedLabel,
    pub distance: f64,
    pub density: f64,
    /// Lattice degree of the WS candidates.
    pub k_star: usize,
    /// Every candidate with its distance, ER first then WS by `p_r`.
    pub candidates: Vec<(RefinedLabel, f64)>,
    pub tie: bool,
}

/// Even lattice degree whose WS density is closest to that of a graph with
/// `edges` edges on `n` nodes. The target degree is `d·(n − 1) = 2·edges/n`;
/// halves round down and the result is clamped to `[2, k_max(n)]`.
pub fn refined_k(n: usize, edges: usize) -> usize {
    let (half, rem) = (edges / n, edges % n);
    let half = if 2 * rem > n { half + 1 } else { half };
    (2 * half).clamp(2, k_max(n).max(2))
}

/// Density-refined classifier with a memo of WS embeddings.
///
/// Embeddings are seeded per `(n, k, p_r)` cell from the master seed, so
/// memoization never changes a result.
pub struct RefinedClassifier {
    reps: usize,
    seed: Seed,
    cache: Mutex<HashMap<(usize, usize, u64), Result<Rfp, ()>>>,
}

impl RefinedClassifier {
    pub fn new(reps: usize, seed: Seed) -> Result<Self> {
        if reps == 0 {
            return Err(Error::InvalidParameter("reps must be at least 1".into()));
        }
        Ok(RefinedClassifier {
            reps,
            seed,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Embedding of one WS cell, or `None` when it has no connected tetrads.
    pub fn embedding(&self, params: &WsParams) -> Result<Option<Rfp>> {
        let key = (params.n, params.k, params.p_r.to_bits());
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.ok());
        }
        let value = match ws_embedding(params, self.reps, ws_cell_seed(self.seed, params)) {
            Ok(rfp) => Ok(rfp),
            Err(Error::NoConnectedTetrads) => Err(()),
            Err(e) => return Err(e),
        };
        self.cache.lock().expect("cache lock").insert(key, value);
        Ok(value.ok())
    }

    pub fn classify(&self, g: &Graph) -> Result<RefinedClassification> {
        let n = g.n();
        if n < 5 {
            return Err(Error::TooSmall { n, min: 5 });
        }
        let density = g.density()?;
        if density == 0.0 {
            return Err(Error::DegenerateGraph("graph has no edges".into()));
        }
        let rfp = compute_rfp(g)?;
        let k_star = refined_k(n, g.edge_count());
        let mut candidates = vec![(
            RefinedLabel::Er,
            rfp.distance(&critical_point(&ErParams::new(n, density)?)?),
        )];
        for p_r in rewiring_grid() {
            let params = WsParams::new(n, k_star, p_r)?;
            if let Some(point) = self.embedding(&params)? {
                candidates.push((RefinedLabel::Ws { p_r }, rfp.distance(&point)));
            }
        }
        let (best, distance) = candidates
            .iter()
            .copied()
            .reduce(|a, b| if b.1 < a.1 { b } else { a })
            .expect("ER candidate always present");
        let tie = candidates
            .iter()
            .filter(|(_, d)| *d == distance)
            .count()
            > 1;
        Ok(RefinedClassification {
            label: best,
            distance,
            density,
            k_star,
            candidates,
            tie,
        })
    }
}

/// One-shot refined classification; see [`RefinedClassifier`].
pub fn classify_refined(g: &Graph, reps: usize, seed: Seed) -> Result<RefinedClassification> {
    RefinedClassifier::new(reps, seed)?.classify(g)
}

/// Euclidean distance between the RFP of `g` and the critical point at the
/// density of `g`. Zero means indistinguishable from `G(n, d)`.
pub fn randomness_index(g: &Graph) -> Result<f64> {
    let rfp = compute_rfp(g)?;
    randomness_index_of(&rfp, g.n(), g.density()?)
}

/// Randomness index from a precomputed RFP and density.
pub fn randomness_index_of(rfp: &Rfp, n: usize, density: f64) -> Result<f64> {
    let cp = critical_point(&ErParams::new(n, density)?)?;
    Ok(rfp.distance(&cp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_er, ring_lattice};
    use crate::motif::MotifClass;

    #[test]
    fn refined_k_rounding() {
        // d·(n−1) = 2·edges/n
        assert_eq!(refined_k(75, 450), 12);
        assert_eq!(refined_k(50, 300), 12);
        // 2·edges/n = 13 → halves 6.5 → rounds down to 6 → k = 12
        assert_eq!(refined_k(50, 325), 12);
        // 2·edges/n = 13.04 → nearest even 14
        assert_eq!(refined_k(50, 326), 14);
        assert_eq!(refined_k(50, 1), 2);
        assert_eq!(refined_k(50, 1225), 48);
        assert_eq!(refined_k(25, 300), 24);
    }

    #[test]
    fn embedding_of_ring_is_pure_path() {
        let p = WsParams::new(10, 2, 0.0).unwrap();
        assert_eq!(ws_embedding(&p, 5, Seed(1)).unwrap(), Rfp::unit(MotifClass::M1));
    }

    #[test]
    fn embedding_of_densest_even_lattice() {
        // k = 48 on 50 nodes misses a perfect matching of 25 pairs:
        // one missing pair → diamond, two → 4-cycle, none → K4.
        let p = WsParams::new(50, 48, 0.0).unwrap();
        let rfp = ws_embedding(&p, 1, Seed(3)).unwrap();
        let cycles = 300.0; // C(25, 2)
        let diamonds = 25.0 * (1128.0 - 24.0);
        let total = 230_300.0;
        let expected = [0.0, 0.0, cycles / total, 0.0, diamonds / total, (total - cycles - diamonds) / total];
        for (a, b) in rfp.0.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn embedding_is_reproducible() {
        let p = WsParams::new(25, 6, 0.9).unwrap();
        let a = ws_embedding(&p, 100, Seed(77)).unwrap();
        let b = ws_embedding(&p, 100, Seed(77)).unwrap();
        assert_eq!(a.0.map(f64::to_bits), b.0.map(f64::to_bits));
        assert!(ws_embedding(&p, 0, Seed(77)).is_err());
    }

    #[test]
    fn atlas_layout() {
        let atlas = build_atlas(25, 2, Seed(5)).unwrap();
        assert_eq!(atlas.points.len(), 9 + 10 * 12);
        assert!(atlas.provenance.skipped.is_empty());
        assert!(atlas.points.iter().all(|p| p.n == 25));
        let atlas10 = build_atlas(10, 1, Seed(5)).unwrap();
        let er05 = atlas10
            .points
            .iter()
            .find(|p| p.label == ModelLabel::Er { p: 0.5 })
            .unwrap();
        assert_eq!(er05.rfp, critical_point(&ErParams::new(10, 0.5).unwrap()).unwrap());
        assert_eq!(er05.reps, 0);
        assert_eq!(build_atlas(10, 1, Seed(5)).unwrap(), atlas10);
        assert!(matches!(build_atlas(4, 1, Seed(5)), Err(Error::TooSmall { .. })));
    }

    #[test]
    fn classify_examples() {
        let atlas = build_atlas(25, 10, Seed(1)).unwrap();
        let ring = ring_lattice(25, 2).unwrap();
        let c = classify(&ring, &atlas).unwrap();
        assert_eq!(c.best.label, ModelLabel::Ws { p_r: 0.0, k: 2 });
        assert_eq!(c.distance, 0.0);

        // K25 is closest to ER 0.9 among the ER entries
        let k25 = Graph::complete(25);
        let rfp = compute_rfp(&k25).unwrap();
        let best_er = atlas
            .points
            .iter()
            .filter(|p| p.label.is_er())
            .min_by(|a, b| rfp.distance(&a.rfp).total_cmp(&rfp.distance(&b.rfp)))
            .unwrap();
        assert_eq!(best_er.label, ModelLabel::Er { p: 0.9 });

        let g50 = Graph::complete(50);
        assert!(matches!(classify(&g50, &atlas), Err(Error::SizeMismatch { graph: 50, atlas: 25 })));
        assert!(matches!(classify(&Graph::empty(25), &atlas), Err(Error::NoConnectedTetrads)));
    }

    #[test]
    fn classify_reports_ties_in_insertion_order() {
        let atlas = Atlas {
            schema_version: ATLAS_SCHEMA_VERSION,
            n: 10,
            points: vec![
                ModelPoint { label: ModelLabel::Er { p: 0.5 }, rfp: Rfp::unit(MotifClass::M2), n: 10, reps: 0 },
                ModelPoint { label: ModelLabel::Ws { p_r: 0.0, k: 2 }, rfp: Rfp::unit(MotifClass::M3), n: 10, reps: 1 },
            ],
            provenance: build_atlas(10, 1, Seed(0)).unwrap().provenance,
        };
        let c = classify_rfp(&Rfp::unit(MotifClass::M1), &atlas).unwrap();
        assert!(c.tie);
        assert_eq!(c.best.label, ModelLabel::Er { p: 0.5 });
    }

    #[test]
    fn refined_examples() {
        let ring = ring_lattice(50, 12).unwrap();
        let c = classify_refined(&ring, 10, Seed(4)).unwrap();
        assert_eq!(c.label, RefinedLabel::Ws { p_r: 0.0 });
        assert_eq!(c.k_star, 12);
        assert!(c.distance < 1e-12);
        assert!(matches!(
            classify_refined(&Graph::empty(10), 2, Seed(0)),
            Err(Error::DegenerateGraph(_))
        ));
    }

    #[test]
    fn refined_classifier_memo_does_not_change_results() {
        let g = gen_er(&ErParams::new(30, 0.4).unwrap(), Seed(8)).unwrap();
        let shared = RefinedClassifier::new(5, Seed(2)).unwrap();
        let first = shared.classify(&g).unwrap();
        let second = shared.classify(&g).unwrap();
        let fresh = classify_refined(&g, 5, Seed(2)).unwrap();
        assert_eq!(first, second);
        assert_eq!(first, fresh);
    }

    #[test]
    fn randomness_index_examples() {
        for n in [5, 12, 30] {
            assert_eq!(randomness_index(&Graph::complete(n)).unwrap(), 0.0);
        }
        let ring = ring_lattice(50, 2).unwrap();
        let cp = critical_point(&ErParams::new(50, 2.0 / 49.0).unwrap()).unwrap();
        let expected = Rfp::unit(MotifClass::M1).distance(&cp);
        let ri = randomness_index(&ring).unwrap();
        assert!(ri > 0.0);
        assert!((ri - expected).abs() < 1e-15);
        assert!(matches!(randomness_index(&Graph::empty(8)), Err(Error::NoConnectedTetrads)));
    }

    #[test]
    fn atlas_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = AtlasCache::new(dir.path());
        let built = cache.load_or_build(10, 2, Seed(3)).unwrap();
        assert!(cache.path_for(10, 2, Seed(3)).exists());
        let loaded = cache.load_or_build(10, 2, Seed(3)).unwrap();
        assert_eq!(built, loaded);
    }
}
