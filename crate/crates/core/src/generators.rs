//! Seeded Erdős–Rényi and Watts–Strogatz generators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{check_probability, ErParams};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder};
use crate::rng::Seed;

/// Largest legal lattice degree for `n` nodes: `n − 2` for even `n`,
/// `n − 1` for odd `n`.
pub fn k_max(n: usize) -> usize {
    if n % 2 == 0 {
        n.saturating_sub(2)
    } else {
        n.saturating_sub(1)
    }
}

/// Even lattice degrees `2, 4, ..., k_max(n)`.
pub fn k_grid(n: usize) -> Vec<usize> {
    (2..=k_max(n)).step_by(2).collect()
}

/// Watts–Strogatz parameters. `k` is the lattice degree (`k / 2` neighbours
/// per side) and `p_r` the per-edge rewiring probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WsParams {
    pub n: usize,
    pub k: usize,
    pub p_r: f64,
}

impl WsParams {
    pub fn new(n: usize, k: usize, p_r: f64) -> Result<Self> {
        let params = WsParams { n, k, p_r };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.p_r)?;
        let k_max = k_max(self.n);
        if self.k % 2 != 0 || self.k < 2 || self.k > k_max {
            return Err(Error::InvalidK {
                k: self.k,
                n: self.n,
                k_max,
            });
        }
        Ok(())
    }

    /// Density of every graph the model produces: `k / (n − 1)`.
    pub fn density(&self) -> f64 {
        self.k as f64 / (self.n - 1) as f64
    }
}

/// `G(n, p)`: every pair independently with probability `p`.
pub fn gen_er(params: &ErParams, seed: Seed) -> Result<Graph> {
    check_probability(params.p)?;
    let n = params.n;
    let mut rng = seed.rng();
    let mut b = GraphBuilder::new(n);
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < params.p {
                b.insert(u, v);
            }
        }
    }
    Ok(b.build())
}

/// Ring lattice where node `i` is joined to `i ± 1, ..., i ± k/2 (mod n)`.
pub fn ring_lattice(n: usize, k: usize) -> Result<Graph> {
    WsParams::new(n, k, 0.0)?;
    Ok(lattice_builder(n, k).build())
}

fn lattice_builder(n: usize, k: usize) -> GraphBuilder {
    let mut b = GraphBuilder::new(n);
    for i in 0..n {
        for j in 1..=k / 2 {
            b.insert(i, (i + j) % n);
        }
    }
    b
}

/// Watts–Strogatz small-world graph.
///
/// Starting from the ring lattice, each node `i` in order visits its `k/2`
/// clockwise edges `(i, i + j)`. With probability `p_r` the far endpoint
/// is replaced by a node drawn uniformly from those not already adjacent to
/// `i` (never `i` itself). If `i` is adjacent to every other node the edge
/// is kept. The edge count stays `n·k/2`.
pub fn gen_ws(params: &WsParams, seed: Seed) -> Result<Graph> {
    params.validate()?;
    let WsParams { n, k, p_r } = *params;
    let mut b = lattice_builder(n, k);
    let mut rng = seed.rng();
    for i in 0..n {
        for j in 1..=k / 2 {
            if rng.random::<f64>() >= p_r {
                continue;
            }
            let free = n - 1 - b.degree(i);
            if free == 0 {
                continue;
            }
            let pick = rng.random_range(0..free);
            let target = nth_non_neighbor(&b, i, pick);
            b.remove(i, (i + j) % n);
            b.insert(i, target);
        }
    }
    Ok(b.build())
}

/// The `r`-th node (ascending) that is neither `u` nor adjacent to `u`.
fn nth_non_neighbor(b: &GraphBuilder, u: usize, r: usize) -> usize {
    let row = b.row(u);
    let mut remaining = r;
    for (wi, &word) in row.iter().enumerate() {
        let lo = wi * 64;
        let mut free = !word;
        if lo <= u && u < lo + 64 {
            free &= !(1u64 << (u - lo));
        }
        while free != 0 {
            let bit = free.trailing_zeros() as usize;
            let v = lo + bit;
            if v >= b.n() {
                break;
            }
            if remaining == 0 {
                return v;
            }
            remaining -= 1;
            free &= free - 1;
        }
    }
    unreachable!("fewer than {} non-neighbours of node {u}", r + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn k_max_piecewise() {
        assert_eq!(k_max(10), 8);
        assert_eq!(k_max(25), 24);
        assert_eq!(k_max(50), 48);
        assert_eq!(k_max(75), 74);
        assert_eq!(k_grid(25).len(), 12);
    }

    #[test]
    fn er_boundaries() {
        for s in 0..5 {
            let full = gen_er(&ErParams::new(10, 1.0).unwrap(), Seed(s)).unwrap();
            assert_eq!(full, Graph::complete(10));
            let none = gen_er(&ErParams::new(10, 0.0).unwrap(), Seed(s)).unwrap();
            assert_eq!(none.edge_count(), 0);
        }
        assert!(matches!(
            gen_er(&ErParams { n: 10, p: -0.1 }, Seed(0)),
            Err(Error::InvalidProbability(_))
        ));
    }

    #[test]
    fn er_mean_density() {
        let params = ErParams::new(200, 0.3).unwrap();
        let mean: f64 = (0..100)
            .map(|s| gen_er(&params, Seed(s)).unwrap().density().unwrap())
            .sum::<f64>()
            / 100.0;
        assert!((mean - 0.3).abs() < 0.01, "mean density {mean}");
    }

    #[test]
    fn ws_lattice_examples() {
        let c10 = gen_ws(&WsParams::new(10, 2, 0.0).unwrap(), Seed(3)).unwrap();
        assert_eq!(c10.edge_count(), 10);
        assert!((0..10).all(|i| c10.has_edge(i, (i + 1) % 10)));

        let l = gen_ws(&WsParams::new(10, 4, 0.0).unwrap(), Seed(3)).unwrap();
        assert_eq!(l.edge_count(), 20);
        assert!((0..10).all(|i| l.degree(i) == 4));

        let g = gen_ws(&WsParams::new(50, 12, 0.9).unwrap(), Seed(11)).unwrap();
        assert_eq!(g.edge_count(), 300);
    }

    #[test]
    fn ws_rejects_bad_k() {
        assert!(matches!(WsParams::new(10, 3, 0.0), Err(Error::InvalidK { .. })));
        assert!(matches!(WsParams::new(10, 10, 0.0), Err(Error::InvalidK { .. })));
        assert!(matches!(WsParams::new(10, 0, 0.0), Err(Error::InvalidK { .. })));
        assert!(WsParams::new(11, 10, 0.0).is_ok());
    }

    #[test]
    fn ws_full_degree_keeps_edges() {
        // odd n with k = n - 1 is complete; no rewiring target exists
        let g = gen_ws(&WsParams::new(11, 10, 1.0).unwrap(), Seed(1)).unwrap();
        assert_eq!(g, Graph::complete(11));
    }

    #[test]
    fn ws_is_deterministic_per_seed() {
        let p = WsParams::new(40, 6, 0.5).unwrap();
        assert_eq!(gen_ws(&p, Seed(9)).unwrap(), gen_ws(&p, Seed(9)).unwrap());
        assert_ne!(gen_ws(&p, Seed(9)).unwrap(), gen_ws(&p, Seed(10)).unwrap());
    }

    #[test]
    fn ws_full_rewiring_changes_structure() {
        let p = WsParams::new(60, 4, 1.0).unwrap();
        let g = gen_ws(&p, Seed(5)).unwrap();
        let lattice = ring_lattice(60, 4).unwrap();
        let kept = lattice.edges().filter(|&(u, v)| g.has_edge(u, v)).count();
        assert!(kept < 60, "kept {kept} of 120 lattice edges");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ws_edge_count_and_density(n in 5usize..60, half in 1usize..30, p_r in 0.0f64..=1.0, seed in any::<u64>()) {
            let k = (2 * half).min(k_max(n));
            let params = WsParams::new(n, k, p_r).unwrap();
            let g = gen_ws(&params, Seed(seed)).unwrap();
            prop_assert_eq!(g.edge_count(), n * k / 2);
            prop_assert!((g.density().unwrap() - params.density()).abs() < 1e-12);
        }

        #[test]
        fn ws_without_rewiring_is_seed_invariant(n in 5usize..40, seed in any::<u64>()) {
            let params = WsParams::new(n, 2, 0.0).unwrap();
            prop_assert_eq!(gen_ws(&params, Seed(seed)).unwrap(), ring_lattice(n, 2).unwrap());
        }
    }
}
