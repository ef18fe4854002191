use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use super::{log_returns, prewhiten, significance_networks, SeriesMatrix, DEFAULT_AR_ORDER, DEFAULT_SURROGATES};
use crate::classifier::randomness_index_of;
use crate::error::{Error, Result};
use crate::motif::compute_rfp;
use crate::rng::Seed;

const WINDOW_STREAM: u64 = 0x5749_4e44;

/// Contiguous equal-length row ranges over a residual matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub windows: Vec<Range<usize>>,
    /// Rows after the last full window that were discarded.
    pub dropped_tail: usize,
}

/// Splits `rows` rows into windows of `window_len`; a short tail is dropped.
pub fn partition(rows: usize, window_len: usize) -> Result<Partition> {
    if window_len < 4 {
        return Err(Error::InvalidParameter(format!("window length {window_len} is below 4")));
    }
    if window_len > rows {
        return Err(Error::WindowTooLong { window: window_len, rows });
    }
    if window_len < 10 {
        log::warn!("window length {window_len} gives weak significance tests");
    }
    let count = rows / window_len;
    Ok(Partition {
        windows: (0..count).map(|l| l * window_len..(l + 1) * window_len).collect(),
        dropped_tail: rows - count * window_len,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiConfig {
    pub window_len: usize,
    pub alphas: Vec<f64>,
    pub n_surrogates: usize,
    pub order: usize,
}

impl RiConfig {
    pub fn new(window_len: usize, alphas: Vec<f64>) -> Self {
        RiConfig {
            window_len,
            alphas,
            n_surrogates: DEFAULT_SURROGATES,
            order: DEFAULT_AR_ORDER,
        }
    }
}

/// RI of one window's network at one significance level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiPoint {
    /// Zero-based window index.
    pub window: usize,
    /// Timestamp of the window's last row.
    pub window_end: String,
    pub alpha: f64,
    /// `None` when the network has no connected tetrad.
    pub ri: Option<f64>,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowReport {
    pub window: usize,
    pub rows: Range<usize>,
    pub zero_variance: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiSeries {
    pub config: RiConfig,
    pub seed: Seed,
    pub input_rows: usize,
    pub series: usize,
    /// Leading residual rows lost to the AR lag history.
    pub prewhiten_dropped: usize,
    /// Residual rows after the last full window.
    pub tail_dropped: usize,
    pub regularized: Vec<usize>,
    pub constant: Vec<usize>,
    pub windows: Vec<WindowReport>,
    /// Window-major, then in the order of `config.alphas`.
    pub points: Vec<RiPoint>,
}

impl RiSeries {
    /// Points for one significance level, in window order.
    pub fn for_alpha(&self, alpha: f64) -> impl Iterator<Item = &RiPoint> {
        self.points.iter().filter(move |p| p.alpha == alpha)
    }
}

/// Log returns, prewhitening, partition, then one significance network and
/// its randomness index per window and significance level.
///
/// Window `l` draws from `seed.derive(&[tag, l])`, so windows may run in
/// parallel without changing the output.
pub fn ri_series(x: &SeriesMatrix, config: &RiConfig, seed: Seed) -> Result<RiSeries> {
    let returns = log_returns(x)?;
    let white = prewhiten(&returns, config.order)?;
    let z = &white.residuals;
    let part = partition(z.rows(), config.window_len)?;
    let n = z.cols();

    let per_window: Vec<(WindowReport, Vec<RiPoint>)> = part
        .windows
        .par_iter()
        .enumerate()
        .map(|(l, rows)| {
            window_points(z, l, rows.clone(), config, seed.derive(&[WINDOW_STREAM, l as u64]), n)
                .map_err(|e| Error::Window { window: l, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;

    let (windows, points): (Vec<_>, Vec<_>) = per_window.into_iter().unzip();
    Ok(RiSeries {
        config: config.clone(),
        seed,
        input_rows: x.rows(),
        series: n,
        prewhiten_dropped: white.dropped_rows,
        tail_dropped: part.dropped_tail,
        regularized: white.regularized,
        constant: white.constant,
        windows,
        points: points.into_iter().flatten().collect(),
    })
}

fn window_points(
    z: &SeriesMatrix,
    l: usize,
    rows: Range<usize>,
    config: &RiConfig,
    seed: Seed,
    n: usize,
) -> Result<(WindowReport, Vec<RiPoint>)> {
    let view = z.values.slice(ndarray::s![rows.clone(), ..]);
    let net = significance_networks(view, &config.alphas, config.n_surrogates, seed)?;
    let window_end = z.timestamps[rows.end - 1].clone();
    let mut points = Vec::with_capacity(config.alphas.len());
    for (g, &alpha) in net.graphs.iter().zip(&config.alphas) {
        let density = g.density()?;
        let ri = match compute_rfp(g) {
            Ok(rfp) => Some(randomness_index_of(&rfp, n, density)?),
            Err(Error::NoConnectedTetrads) => None,
            Err(e) => return Err(e),
        };
        points.push(RiPoint {
            window: l,
            window_end: window_end.clone(),
            alpha,
            ri,
            density,
        });
    }
    let report = WindowReport {
        window: l,
        rows,
        zero_variance: net.zero_variance,
    };
    Ok((report, points))
}
