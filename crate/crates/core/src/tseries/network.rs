use ndarray::ArrayView2;
use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder};
use crate::rng::Seed;

/// Pearson correlation of two equal-length slices; `None` if either is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let ca = centre(a)?;
    let cb = centre(b)?;
    Some(ca.iter().zip(&cb).map(|(x, y)| x * y).sum())
}

/// Centres and scales to unit Euclidean norm; `None` for a constant input.
fn centre(x: &[f64]) -> Option<Vec<f64>> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let mut out: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() || x.iter().all(|&v| v == x[0]) {
        return None;
    }
    out.iter_mut().for_each(|v| *v /= norm);
    Some(out)
}

/// Correlation networks of one window at one or more significance levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceNetwork {
    #[serde(skip)]
    pub graphs: Vec<Graph>,
    /// Columns that are constant inside the window; they get no edges.
    pub zero_variance: Vec<usize>,
}

/// Index into the ascending null sample of its `(1 − alpha)` quantile.
fn quantile_index(alpha: f64, samples: usize) -> usize {
    let idx = ((1.0 - alpha) * samples as f64).ceil() as usize;
    idx.clamp(1, samples) - 1
}

fn validate(rows: usize, alphas: &[f64], n_surrogates: usize) -> Result<()> {
    if rows < 4 {
        return Err(Error::InvalidParameter(format!("window has {rows} rows, at least 4 required")));
    }
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("at least one significance level required".into()));
    }
    for &alpha in alphas {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha {alpha} outside (0, 1)")));
        }
        if (n_surrogates as f64) < (1.0 / alpha).ceil() {
            return Err(Error::InvalidParameter(format!(
                "{n_surrogates} surrogates cannot resolve alpha {alpha}"
            )));
        }
    }
    Ok(())
}

/// Fisher–Yates shuffler. Swap targets are drawn in batches: one 64-bit
/// word yields several bounded integers whose bounds multiply to at most
/// `2^64`, with a rejection step that keeps every permutation equally likely.
struct Shuffler {
    /// `(top, count, threshold)`: draws from `0..top`, `0..top − 1`, ...
    batches: Vec<(usize, usize, u64)>,
}

impl Shuffler {
    fn new(len: usize) -> Self {
        let mut batches = Vec::new();
        let mut i = len;
        while i > 1 {
            let mut product: u128 = 1;
            let mut count = 0;
            while i - count > 1 && product * (i - count) as u128 <= 1 << 64 {
                product *= (i - count) as u128;
                count += 1;
            }
            let threshold = ((1u128 << 64) % product) as u64;
            batches.push((i, count, threshold));
            i -= count;
        }
        Shuffler { batches }
    }

    fn shuffle(&self, idx: &mut [usize], rng: &mut impl RngCore) {
        for &(top, count, threshold) in &self.batches {
            'draw: loop {
                let mut low = rng.next_u64();
                let mut picks = [0usize; 64];
                for (s, slot) in picks[..count].iter_mut().enumerate() {
                    let m = low as u128 * (top - s) as u128;
                    *slot = (m >> 64) as usize;
                    low = m as u64;
                }
                if low < threshold {
                    continue 'draw;
                }
                for (s, &j) in picks[..count].iter().enumerate() {
                    idx.swap(top - 1 - s, j);
                }
                break;
            }
        }
    }
}

/// Builds a permutation-tested correlation network for each `alpha`.
///
/// For every pair `i < j` the observed `|r|` is compared with `|r|` against
/// `n_surrogates` uniform permutations of column `j`; the edge is kept when
/// the observation strictly exceeds the `(1 − alpha)` empirical quantile
/// of that null sample. Pair `(i, j)` draws from `seed.derive(&[i, j])`, and
/// the same null sample is reused for every `alpha`, so density is monotone
/// in `alpha`.
pub fn significance_networks(
    window: ArrayView2<'_, f64>,
    alphas: &[f64],
    n_surrogates: usize,
    seed: Seed,
) -> Result<SignificanceNetwork> {
    let (rows, n) = window.dim();
    validate(rows, alphas, n_surrogates)?;
    let columns: Vec<Option<Vec<f64>>> = (0..n).map(|c| centre(&window.column(c).to_vec())).collect();
    let zero_variance: Vec<usize> = (0..n).filter(|&c| columns[c].is_none()).collect();
    let mut builders: Vec<GraphBuilder> = alphas.iter().map(|_| GraphBuilder::new(n)).collect();
    let cut: Vec<usize> = alphas.iter().map(|&a| quantile_index(a, n_surrogates)).collect();

    let mut null = vec![0.0; n_surrogates];
    let mut perm: Vec<usize> = (0..rows).collect();
    let shuffler = Shuffler::new(rows);
    for i in 0..n {
        let Some(a) = &columns[i] else { continue };
        for j in (i + 1)..n {
            let Some(b) = &columns[j] else { continue };
            let observed = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().abs();
            let mut rng = seed.derive(&[i as u64, j as u64]).rng();
            perm.iter_mut().enumerate().for_each(|(k, p)| *p = k);
            for slot in null.iter_mut() {
                shuffler.shuffle(&mut perm, &mut rng);
                *slot = a.iter().zip(&perm).map(|(x, &p)| x * b[p]).sum::<f64>().abs();
            }
            for (builder, &q) in builders.iter_mut().zip(&cut) {
                let (_, &mut threshold, _) = null.select_nth_unstable_by(q, f64::total_cmp);
                if observed > threshold {
                    builder.insert(i, j);
                }
            }
        }
    }
    Ok(SignificanceNetwork {
        graphs: builders.into_iter().map(GraphBuilder::build).collect(),
        zero_variance,
    })
}

/// Single-level form of [`significance_networks`].
pub fn significance_network(
    window: ArrayView2<'_, f64>,
    alpha: f64,
    n_surrogates: usize,
    seed: Seed,
) -> Result<Graph> {
    let mut out = significance_networks(window, &[alpha], n_surrogates, seed)?;
    Ok(out.graphs.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::white_noise;
    use ndarray::Array2;

    #[test]
    fn pearson_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let b = [4.0, 3.0, 2.0, 1.0];
        assert!((pearson(&a, &b).unwrap() + 1.0).abs() < 1e-12);
        assert!(pearson(&a, &[2.0; 4]).is_none());
    }

    #[test]
    fn quantile_indices() {
        assert_eq!(quantile_index(0.05, 1000), 949);
        assert_eq!(quantile_index(0.1, 1000), 899);
        assert_eq!(quantile_index(0.5, 2), 0);
    }

    #[test]
    fn shuffle_is_uniform_over_small_permutations() {
        let shuffler = Shuffler::new(4);
        let mut rng = Seed(3).rng();
        let mut counts = std::collections::HashMap::new();
        let trials = 48_000;
        for _ in 0..trials {
            let mut p = vec![0, 1, 2, 3];
            shuffler.shuffle(&mut p, &mut rng);
            *counts.entry(p).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 24);
        let expected = trials as f64 / 24.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 23 degrees of freedom, 99.9% quantile
        assert!(chi2 < 49.7, "chi2 {chi2}");
    }

    #[test]
    fn long_shuffles_split_into_batches() {
        let shuffler = Shuffler::new(45);
        assert!(shuffler.batches.len() > 1);
        assert_eq!(shuffler.batches.iter().map(|b| b.1).sum::<usize>(), 44);
        let mut p: Vec<usize> = (0..45).collect();
        shuffler.shuffle(&mut p, &mut Seed(1).rng());
        let mut sorted = p.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..45).collect::<Vec<_>>());
    }

    #[test]
    fn identical_columns_are_linked() {
        let noise = white_noise(30, 3, Seed(4));
        let mut w = Array2::zeros((30, 4));
        for c in 0..3 {
            w.column_mut(c).assign(&noise.values.column(c));
        }
        w.column_mut(3).assign(&noise.values.column(0));
        for alpha in [0.01, 0.05, 0.5] {
            let g = significance_network(w.view(), alpha, 200, Seed(1)).unwrap();
            assert!(g.has_edge(0, 3), "alpha {alpha}");
        }
    }

    #[test]
    fn constant_column_gets_no_edges() {
        let mut w = white_noise(20, 5, Seed(2)).values;
        w.column_mut(2).fill(1.0);
        let net = significance_networks(w.view(), &[0.5], 100, Seed(0)).unwrap();
        assert_eq!(net.zero_variance, vec![2]);
        assert_eq!(net.graphs[0].degree(2), 0);
    }

    #[test]
    fn density_is_monotone_in_alpha() {
        let w = white_noise(25, 12, Seed(6)).values;
        let net = significance_networks(w.view(), &[0.03, 0.05, 0.1], 300, Seed(7)).unwrap();
        let d: Vec<usize> = net.graphs.iter().map(Graph::edge_count).collect();
        assert!(d[0] <= d[1] && d[1] <= d[2], "{d:?}");
        for (small, large) in [(0, 1), (1, 2)] {
            for (u, v) in net.graphs[small].edges() {
                assert!(net.graphs[large].has_edge(u, v));
            }
        }
    }

    #[test]
    fn single_level_matches_multi_level() {
        let w = white_noise(20, 8, Seed(8)).values;
        let multi = significance_networks(w.view(), &[0.05, 0.1], 200, Seed(3)).unwrap();
        let single = significance_network(w.view(), 0.1, 200, Seed(3)).unwrap();
        assert_eq!(multi.graphs[1], single);
    }

    #[test]
    fn negating_residuals_changes_nothing() {
        let w = white_noise(20, 10, Seed(5)).values;
        let a = significance_networks(w.view(), &[0.1], 200, Seed(1)).unwrap();
        let neg = w.mapv(|v| -v);
        let b = significance_networks(neg.view(), &[0.1], 200, Seed(1)).unwrap();
        assert_eq!(a.graphs, b.graphs);
    }

    #[test]
    fn rejects_bad_parameters() {
        let w = white_noise(20, 4, Seed(5)).values;
        assert!(significance_network(w.view(), 0.0, 100, Seed(0)).is_err());
        assert!(significance_network(w.view(), 0.05, 10, Seed(0)).is_err());
        let short = white_noise(3, 4, Seed(5)).values;
        assert!(significance_network(short.view(), 0.05, 100, Seed(0)).is_err());
    }
}
