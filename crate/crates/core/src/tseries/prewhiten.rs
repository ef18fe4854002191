use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use serde::Serialize;

use super::SeriesMatrix;
use crate::error::{Error, Result};

/// Relative ridge added to the normal equations when they are singular:
/// `RIDGE_JITTER · trace / order` on the diagonal (absolute when the trace is 0).
pub const RIDGE_JITTER: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prewhitened {
    /// `(T′ − order) × N` residuals; the first `order` rows lack a full lag
    /// history and are dropped.
    pub residuals: SeriesMatrix,
    /// Fitted AR coefficients per column, lag 1 first.
    pub coefficients: Vec<Vec<f64>>,
    /// Columns whose regression needed the ridge fallback.
    pub regularized: Vec<usize>,
    /// Constant columns; their residuals are exactly zero.
    pub constant: Vec<usize>,
    pub dropped_rows: usize,
}

/// Removes autocorrelation column by column.
///
/// Each column is centred, an AR(`order`) model is fitted by least squares
/// on the lag design matrix, one-step predictions get the mean added back,
/// and the residual is `prediction − observation`. That is the negative of
/// the usual convention; correlations downstream only use `|r|`, so the sign
/// does not matter.
pub fn prewhiten(y: &SeriesMatrix, order: usize) -> Result<Prewhitened> {
    let (t, n) = y.values.dim();
    if order == 0 {
        return Err(Error::InvalidParameter("AR order must be at least 1".into()));
    }
    if t <= 2 * order {
        return Err(Error::InsufficientData { rows: t, needed: 2 * order });
    }
    let rows = t - order;
    let mut residuals = Array2::zeros((rows, n));
    let mut coefficients = Vec::with_capacity(n);
    let mut regularized = Vec::new();
    let mut constant = Vec::new();

    for c in 0..n {
        let col: Vec<f64> = y.values.column(c).to_vec();
        if col.iter().all(|&v| v == col[0]) {
            constant.push(c);
            coefficients.push(vec![0.0; order]);
            continue;
        }
        let mean = col.iter().sum::<f64>() / t as f64;
        let centred: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let design = DMatrix::from_fn(rows, order, |r, lag| centred[r + order - 1 - lag]);
        let target = DVector::from_iterator(rows, centred[order..].iter().copied());
        let (coef, ridge) = least_squares(&design, &target);
        if ridge {
            regularized.push(c);
        }
        let predicted = &design * &coef;
        for r in 0..rows {
            residuals[[r, c]] = (predicted[r] + mean) - col[r + order];
        }
        coefficients.push(coef.iter().copied().collect());
    }

    Ok(Prewhitened {
        residuals: SeriesMatrix::new(residuals, y.timestamps[order..].to_vec(), y.names.clone())?,
        coefficients,
        regularized,
        constant,
        dropped_rows: order,
    })
}

fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> (DVector<f64>, bool) {
    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    if let Some(chol) = xtx.clone().cholesky() {
        let sol = chol.solve(&xty);
        if sol.iter().all(|v| v.is_finite()) {
            return (sol, false);
        }
    }
    let k = xtx.nrows();
    let trace = xtx.trace();
    let lambda = if trace > 0.0 { RIDGE_JITTER * trace / k as f64 } else { RIDGE_JITTER };
    let ridged = xtx + DMatrix::identity(k, k) * lambda;
    let sol = ridged
        .clone()
        .cholesky()
        .map(|c| c.solve(&xty))
        .or_else(|| ridged.lu().solve(&xty))
        .unwrap_or_else(|| DVector::zeros(k));
    (sol, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use crate::synthetic::{ar1_series, white_noise};

    fn autocorr(x: &[f64], lag: usize) -> f64 {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        let cov: f64 = (lag..n).map(|t| (x[t] - mean) * (x[t - lag] - mean)).sum();
        cov / var
    }

    fn variance(x: &[f64]) -> f64 {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64
    }

    #[test]
    fn white_noise_residuals_stay_white() {
        let y = white_noise(1304, 8, Seed(21));
        let out = prewhiten(&y, 20).unwrap();
        let t = out.residuals.rows() as f64;
        let bound = 2.0 / t.sqrt();
        let mut inside = 0;
        let mut total = 0;
        for c in 0..8 {
            let z = out.residuals.values.column(c).to_vec();
            for lag in 1..=20 {
                total += 1;
                if autocorr(&z, lag).abs() <= bound {
                    inside += 1;
                }
            }
        }
        assert!(inside as f64 >= 0.9 * total as f64, "{inside}/{total}");
        assert!(out.regularized.is_empty());
    }

    #[test]
    fn ar1_is_whitened() {
        let y = ar1_series(1304, 4, 0.8, Seed(3));
        let out = prewhiten(&y, 20).unwrap();
        for c in 0..4 {
            let z = out.residuals.values.column(c).to_vec();
            let x = y.values.column(c).to_vec();
            assert!(variance(&z) < variance(&x));
            assert!(autocorr(&z, 1).abs() < 0.1);
            assert!((out.coefficients[c][0] - 0.8).abs() < 0.1);
        }
    }

    #[test]
    fn residual_sign_follows_prediction_minus_observation() {
        let y = ar1_series(400, 1, 0.5, Seed(9));
        let out = prewhiten(&y, 2).unwrap();
        let a = &out.coefficients[0];
        let col = y.values.column(0).to_vec();
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let t = 10;
        let pred = mean + a[0] * (col[t - 1] - mean) + a[1] * (col[t - 2] - mean);
        assert!((out.residuals.values[[t - 2, 0]] - (pred - col[t])).abs() < 1e-12);
        assert_eq!(out.residuals.timestamps[0], y.timestamps[2]);
    }

    #[test]
    fn constant_column_gives_zero_residuals() {
        let mut y = white_noise(200, 2, Seed(1));
        y.values.column_mut(1).fill(0.25);
        let out = prewhiten(&y, 5).unwrap();
        assert_eq!(out.constant, vec![1]);
        assert!(out.residuals.values.column(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn too_short_is_rejected() {
        let y = white_noise(40, 2, Seed(1));
        assert!(matches!(
            prewhiten(&y, 20),
            Err(Error::InsufficientData { rows: 40, needed: 40 })
        ));
        assert!(prewhiten(&white_noise(41, 2, Seed(1)), 20).is_ok());
    }

    #[test]
    fn collinear_design_falls_back_to_ridge() {
        // period-2 series: lags 1 and 3 are identical columns
        let vals: Vec<f64> = (0..60).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let y = SeriesMatrix::from_values(Array2::from_shape_vec((60, 1), vals).unwrap()).unwrap();
        let out = prewhiten(&y, 4).unwrap();
        assert_eq!(out.regularized, vec![0]);
        assert!(out.residuals.values.iter().all(|v| v.abs() < 1e-6));
    }
}
