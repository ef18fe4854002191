//! Seeded synthetic series for tests, benches and the bundled fixture.

use std::ops::Range;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::Seed;
use crate::tseries::SeriesMatrix;

fn normals(t: usize, n: usize, seed: Seed) -> Array2<f64> {
    let mut rng = seed.rng();
    Array2::from_shape_simple_fn((t, n), || rng.sample(StandardNormal))
}

fn wrap(values: Array2<f64>) -> SeriesMatrix {
    SeriesMatrix::from_values(values).expect("finite synthetic values")
}

/// `t × n` independent standard normals.
pub fn white_noise(t: usize, n: usize, seed: Seed) -> SeriesMatrix {
    wrap(normals(t, n, seed))
}

/// Independent AR(1) columns `y(t) = phi·y(t − 1) + e(t)` after a burn-in.
pub fn ar1_series(t: usize, n: usize, phi: f64, seed: Seed) -> SeriesMatrix {
    let burn = 200;
    let e = normals(t + burn, n, seed);
    let mut y = Array2::zeros((t, n));
    for c in 0..n {
        let mut prev = 0.0;
        for r in 0..t + burn {
            prev = phi * prev + e[[r, c]];
            if r >= burn {
                y[[r - burn, c]] = prev;
            }
        }
    }
    wrap(y)
}

/// Price levels `100·exp(cumsum(scale·r))` from a returns matrix.
pub fn prices_from_returns(returns: &Array2<f64>, scale: f64) -> Array2<f64> {
    let (t, n) = returns.dim();
    let mut x = Array2::zeros((t + 1, n));
    for c in 0..n {
        let mut level = 0.0;
        x[[0, c]] = 100.0;
        for r in 0..t {
            level += scale * returns[[r, c]];
            x[[r + 1, c]] = 100.0 * level.exp();
        }
    }
    x
}

/// `t` price rows for `n` series with independent Gaussian log returns.
pub fn noise_prices(t: usize, n: usize, seed: Seed) -> SeriesMatrix {
    wrap(prices_from_returns(&normals(t - 1, n, seed), 0.01))
}

/// Seed of the bundled change-point panel.
pub const FIXTURE_SEED: Seed = Seed(55);

/// Price panel whose returns share one latent factor during a block of
/// windows and are independent elsewhere.
///
/// Raw rows are `windows·window_len + order + 1`, so after differencing and
/// prewhitening at `order` the residuals split exactly into `windows`
/// windows. Series `i` loads the factor with `max_loading·((i + 1)/N)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointFixture {
    pub series: usize,
    pub windows: usize,
    pub window_len: usize,
    pub order: usize,
    /// Zero-based windows carrying the common factor.
    pub factor_windows: Range<usize>,
    pub max_loading: f64,
}

impl Default for ChangePointFixture {
    fn default() -> Self {
        ChangePointFixture {
            series: 55,
            windows: 87,
            window_len: 15,
            order: 20,
            factor_windows: 39..45,
            max_loading: 2.5,
        }
    }
}

impl ChangePointFixture {
    pub fn rows(&self) -> usize {
        self.windows * self.window_len + self.order + 1
    }

    pub fn loading(&self, i: usize) -> f64 {
        let x = (i + 1) as f64 / self.series as f64;
        self.max_loading * x * x
    }

    /// Return rows (before prewhitening) that carry the factor.
    pub fn factor_rows(&self) -> Range<usize> {
        let start = self.order + self.factor_windows.start * self.window_len;
        let end = self.order + self.factor_windows.end * self.window_len;
        start..end
    }

    pub fn generate(&self, seed: Seed) -> SeriesMatrix {
        let t = self.rows() - 1;
        let mut r = normals(t, self.series, seed.derive(&[0]));
        let mut rng = seed.derive(&[1]).rng();
        for row in self.factor_rows() {
            let f: f64 = rng.sample(StandardNormal);
            for c in 0..self.series {
                r[[row, c]] += self.loading(c) * f;
            }
        }
        wrap(prices_from_returns(&r, 0.01))
    }
}
