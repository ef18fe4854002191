//! Census of the six connected induced 4-node motifs and the relative
//! frequency point (RFP) built from it.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub mod oracle;

pub use oracle::census_oracle;

/// The six connected 4-node graphs up to isomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MotifClass {
    /// Path on four nodes.
    M1,
    /// Star with three leaves.
    M2,
    /// 4-cycle.
    M3,
    /// Triangle with a pendant edge.
    M4,
    /// Diamond (K4 minus one edge).
    M5,
    /// Complete graph K4.
    M6,
}

impl MotifClass {
    pub const ALL: [MotifClass; 6] = [
        MotifClass::M1,
        MotifClass::M2,
        MotifClass::M3,
        MotifClass::M4,
        MotifClass::M5,
        MotifClass::M6,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Number of edges.
    pub fn edge_count(self) -> u32 {
        match self {
            MotifClass::M1 | MotifClass::M2 => 3,
            MotifClass::M3 | MotifClass::M4 => 4,
            MotifClass::M5 => 5,
            MotifClass::M6 => 6,
        }
    }

    /// Number of labelled 4-node graphs isomorphic to this motif.
    pub fn isomorph_count(self) -> u32 {
        match self {
            MotifClass::M1 => 12,
            MotifClass::M2 => 4,
            MotifClass::M3 => 3,
            MotifClass::M4 => 12,
            MotifClass::M5 => 6,
            MotifClass::M6 => 1,
        }
    }

    /// Sorted within-motif degree sequence.
    pub fn signature(self) -> [u8; 4] {
        match self {
            MotifClass::M1 => [1, 1, 2, 2],
            MotifClass::M2 => [1, 1, 1, 3],
            MotifClass::M3 => [2, 2, 2, 2],
            MotifClass::M4 => [1, 2, 2, 3],
            MotifClass::M5 => [2, 2, 3, 3],
            MotifClass::M6 => [3, 3, 3, 3],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MotifClass::M1 => "path",
            MotifClass::M2 => "star",
            MotifClass::M3 => "cycle",
            MotifClass::M4 => "triangle-pendant",
            MotifClass::M5 => "diamond",
            MotifClass::M6 => "complete",
        }
    }
}

impl fmt::Display for MotifClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.index() + 1)
    }
}

/// Maps a sorted within-tetrad degree sequence to its motif.
///
/// Returns `Ok(None)` for disconnected tetrads: any signature with an
/// isolated node, and `(1,1,1,1)` (two disjoint edges), which is the only
/// disconnected 4-node graph without one.
pub fn classify_signature(sig: [u8; 4]) -> Result<Option<MotifClass>> {
    if sig.iter().any(|&d| d > 3) || sig.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidSignature(sig));
    }
    if sig[0] == 0 || sig == [1, 1, 1, 1] {
        return Ok(None);
    }
    MotifClass::ALL
        .into_iter()
        .find(|m| m.signature() == sig)
        .map(Some)
        .ok_or(Error::InvalidSignature(sig))
}

/// Node pairs of a tetrad in the order used for 6-bit edge masks.
pub(crate) const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub(crate) fn mask_signature(mask: u8) -> [u8; 4] {
    let mut deg = [0u8; 4];
    for (bit, &(a, b)) in PAIRS.iter().enumerate() {
        if mask >> bit & 1 == 1 {
            deg[a] += 1;
            deg[b] += 1;
        }
    }
    deg.sort_unstable();
    deg
}

/// Motif of every 6-bit tetrad edge mask, via the degree signature.
fn mask_table() -> [Option<MotifClass>; 64] {
    let mut table = [None; 64];
    for (mask, slot) in table.iter_mut().enumerate() {
        *slot = classify_signature(mask_signature(mask as u8))
            .expect("every edge mask has a valid signature");
    }
    table
}

/// Absolute motif frequencies plus the disconnected-tetrad count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MotifCounts {
    pub f: [u64; 6],
    pub disconnected: u64,
}

impl MotifCounts {
    pub fn connected(&self) -> u64 {
        self.f.iter().sum()
    }

    pub fn total_tetrads(&self) -> u64 {
        self.connected() + self.disconnected
    }

    pub fn get(&self, m: MotifClass) -> u64 {
        self.f[m.index()]
    }

    fn merge(mut self, other: MotifCounts) -> MotifCounts {
        for (a, b) in self.f.iter_mut().zip(other.f) {
            *a += b;
        }
        self.disconnected += other.disconnected;
        self
    }
}

/// `C(n, k)` for small `k`, exact in `u64` for the sizes used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Counts every induced 4-node subgraph of `g` by motif class.
///
/// For each node triple `i < j < k` the fourth node `l > k` is grouped by
/// its adjacency to `i`, `j` and `k`; each of the eight groups is a
/// popcount over bitset rows and shares one tetrad edge mask, so every
/// tetrad is classified exactly once. Work is split over `i` and the
/// per-worker tallies are summed, so the result does not depend on the
/// thread count.
pub fn motif_census(g: &Graph) -> Result<MotifCounts> {
    let n = g.n();
    if n < 4 {
        return Err(Error::TooSmall { n, min: 4 });
    }
    let table = mask_table();
    let words = g.words();
    let mut valid = vec![!0u64; words];
    if n % 64 != 0 {
        valid[words - 1] = (1u64 << (n % 64)) - 1;
    }

    let counts = (0..n.saturating_sub(3))
        .into_par_iter()
        .map(|i| {
            let mut local = MotifCounts::default();
            let mut tally = |mask: usize, c: u64| match table[mask] {
                Some(m) => local.f[m.index()] += c,
                None => local.disconnected += c,
            };
            let ri = g.row(i);
            for j in (i + 1)..n {
                let rj = g.row(j);
                let ij = g.has_edge(i, j) as usize;
                for k in (j + 1)..n {
                    let rk = g.row(k);
                    let base = ij | (g.has_edge(i, k) as usize) << 1 | (g.has_edge(j, k) as usize) << 3;
                    let mut groups = [0u64; 8];
                    let first = (k + 1) / 64;
                    for w in first..words {
                        let mut above = valid[w];
                        if w == first {
                            let shift = (k + 1) % 64;
                            above &= !0u64 << shift;
                        }
                        if above == 0 {
                            continue;
                        }
                        let (a, b, c) = (ri[w], rj[w], rk[w]);
                        for (code, slot) in groups.iter_mut().enumerate() {
                            let x = if code & 1 == 1 { a } else { !a };
                            let y = if code & 2 == 2 { b } else { !b };
                            let z = if code & 4 == 4 { c } else { !c };
                            *slot += (x & y & z & above).count_ones() as u64;
                        }
                    }
                    for (code, &c) in groups.iter().enumerate() {
                        if c == 0 {
                            continue;
                        }
                        // l-edges: (i,l) -> bit 2, (j,l) -> bit 4, (k,l) -> bit 5
                        let mask = base | (code & 1) << 2 | (code >> 1 & 1) << 4 | (code >> 2 & 1) << 5;
                        tally(mask, c);
                    }
                }
            }
            local
        })
        .reduce(MotifCounts::default, MotifCounts::merge);
    Ok(counts)
}

/// A point on the 6-simplex of relative motif frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rfp(pub [f64; 6]);

impl Rfp {
    /// Unit vector on a single motif.
    pub fn unit(m: MotifClass) -> Self {
        let mut c = [0.0; 6];
        c[m.index()] = 1.0;
        Rfp(c)
    }

    pub fn coords(&self) -> &[f64; 6] {
        &self.0
    }

    /// Euclidean distance.
    pub fn distance(&self, other: &Rfp) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Coordinate-wise mean of a non-empty set of points.
    pub fn mean<'a, I: IntoIterator<Item = &'a Rfp>>(points: I) -> Option<Rfp> {
        let mut sum = [0.0; 6];
        let mut count = 0usize;
        for p in points {
            for (s, c) in sum.iter_mut().zip(p.0) {
                *s += c;
            }
            count += 1;
        }
        (count > 0).then(|| Rfp(sum.map(|s| s / count as f64)))
    }
}

/// Normalizes the six motif counts to sum 1. Disconnected tetrads are not
/// part of the denominator.
pub fn relative_frequency_point(c: &MotifCounts) -> Result<Rfp> {
    let total = c.connected();
    if total == 0 {
        return Err(Error::NoConnectedTetrads);
    }
    Ok(Rfp(c.f.map(|x| x as f64 / total as f64)))
}

/// Census followed by normalization.
pub fn compute_rfp(g: &Graph) -> Result<Rfp> {
    relative_frequency_point(&motif_census(g)?)
}
