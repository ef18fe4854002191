//! Brute-force reference census for small graphs.
//!
//! Every tetrad's induced subgraph is tested for connectivity by graph
//! search and then looked up in an explicit list of the labelled connected
//! 4-node graphs. Motif labels in that list come from isomorphism against
//! hand-written representatives, never from degree sequences, so this path
//! shares nothing with [`motif_census`](super::motif_census) beyond the
//! [`Graph`] type.

use std::collections::BTreeMap;

use super::{MotifClass, MotifCounts, PAIRS};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest graph accepted by [`census_oracle`].
pub const ORACLE_MAX_NODES: usize = 16;

/// Edge lists of one representative per motif.
const REPRESENTATIVES: [(MotifClass, &[(usize, usize)]); 6] = [
    (MotifClass::M1, &[(0, 1), (1, 2), (2, 3)]),
    (MotifClass::M2, &[(0, 1), (0, 2), (0, 3)]),
    (MotifClass::M3, &[(0, 1), (1, 2), (2, 3), (0, 3)]),
    (MotifClass::M4, &[(0, 1), (1, 2), (0, 2), (2, 3)]),
    (MotifClass::M5, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]),
    (MotifClass::M6, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
];

fn pair_bit(a: usize, b: usize) -> u8 {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    let idx = PAIRS.iter().position(|&p| p == (a, b)).expect("valid pair");
    1 << idx
}

fn edges_to_mask(edges: &[(usize, usize)]) -> u8 {
    edges.iter().fold(0, |m, &(a, b)| m | pair_bit(a, b))
}

fn mask_adjacent(mask: u8, a: usize, b: usize) -> bool {
    a != b && mask & pair_bit(a, b) != 0
}

/// Connectivity of a 4-node graph given as an edge mask, by depth-first search.
pub fn mask_is_connected(mask: u8) -> bool {
    let mut seen = [false; 4];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..4 {
            if !seen[v] && mask_adjacent(mask, u, v) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.iter().all(|&s| s)
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    if p.iter().all(|&x| !std::mem::replace(&mut seen[x], true)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn permute_mask(mask: u8, perm: &[usize; 4]) -> u8 {
    PAIRS
        .iter()
        .enumerate()
        .filter(|(bit, _)| mask >> bit & 1 == 1)
        .fold(0, |m, (_, &(a, b))| m | pair_bit(perm[a], perm[b]))
}

/// Smallest mask over all relabellings; equal iff isomorphic.
pub fn canonical_mask(mask: u8) -> u8 {
    permutations4()
        .iter()
        .map(|p| permute_mask(mask, p))
        .min()
        .expect("24 permutations")
}

/// One isomorphism class of labelled 4-node graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternGroup {
    pub canonical: u8,
    pub edge_count: u32,
    pub members: Vec<u8>,
    pub connected: bool,
    pub motif: Option<MotifClass>,
}

/// Partitions all 64 labelled 4-node graphs into isomorphism classes,
/// ordered by edge count and then by class size.
pub fn enumerate_patterns() -> Vec<PatternGroup> {
    let reps: Vec<(MotifClass, u8)> = REPRESENTATIVES
        .iter()
        .map(|(m, e)| (*m, canonical_mask(edges_to_mask(e))))
        .collect();
    let mut groups: BTreeMap<u8, Vec<u8>> = BTreeMap::new();
    for mask in 0u8..64 {
        groups.entry(canonical_mask(mask)).or_default().push(mask);
    }
    let mut out: Vec<PatternGroup> = groups
        .into_iter()
        .map(|(canonical, members)| PatternGroup {
            canonical,
            edge_count: canonical.count_ones(),
            connected: mask_is_connected(canonical),
            motif: reps.iter().find(|(_, c)| *c == canonical).map(|(m, _)| *m),
            members,
        })
        .collect();
    out.sort_by_key(|g| (g.edge_count, g.members.len(), g.canonical));
    out
}

/// The labelled connected 4-node graphs with their motif.
pub fn connected_patterns() -> Vec<(u8, MotifClass)> {
    let mut out: Vec<(u8, MotifClass)> = enumerate_patterns()
        .into_iter()
        .filter(|g| g.connected)
        .flat_map(|g| {
            let m = g.motif.expect("every connected class has a representative");
            g.members.into_iter().map(move |mask| (mask, m))
        })
        .collect();
    out.sort_unstable();
    out
}

/// Reference census: `C(n, 4)` induced-subgraph extractions, each tested
/// for connectivity and matched against [`connected_patterns`].
pub fn census_oracle(g: &Graph) -> Result<MotifCounts> {
    let n = g.n();
    if n < 4 {
        return Err(Error::TooSmall { n, min: 4 });
    }
    if n > ORACLE_MAX_NODES {
        return Err(Error::OracleTooLarge(n));
    }
    let patterns = connected_patterns();
    let mut counts = MotifCounts::default();
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                for d in (c + 1)..n {
                    let nodes = [a, b, c, d];
                    let mut mask = 0u8;
                    for (bit, &(x, y)) in PAIRS.iter().enumerate() {
                        if g.has_edge(nodes[x], nodes[y]) {
                            mask |= 1 << bit;
                        }
                    }
                    if !mask_is_connected(mask) {
                        counts.disconnected += 1;
                        continue;
                    }
                    let idx = patterns
                        .binary_search_by_key(&mask, |&(m, _)| m)
                        .expect("connected mask is in the pattern list");
                    counts.f[patterns[idx].1.index()] += 1;
                }
            }
        }
    }
    Ok(counts)
}
