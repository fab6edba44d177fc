use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{solve_spd, symmetric_eigen, DenseMatrix};

/// Ridge added to the normal equations when the design is rank deficient.
pub const FALLBACK_RIDGE: f64 = 1e-8;
/// Relative eigenvalue floor of the centered Gram matrix below which the
/// design counts as rank deficient.
const RANK_RTOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionEval {
    /// One weight per reduced coordinate.
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Residual variance with `m - k - 1` degrees of freedom (or `mse` when
    /// there are none left).
    pub noise_estimate: f64,
    /// Mean squared residual on the fitted data.
    pub mse: f64,
    /// Set when the ridge fallback was used.
    pub regularized: bool,
}

/// Least-squares fit of `z` on the columns of `y` (k x m, one column per
/// sample) with an intercept.
pub fn eval_regression(y: &DenseMatrix, z: &[f64]) -> Result<RegressionEval> {
    let (k, m) = y.shape();
    if m != z.len() {
        return Err(Error::InvalidInput(format!(
            "{m} samples in the reduced data but {} observations",
            z.len()
        )));
    }
    if m == 0 || k == 0 {
        return Err(Error::InvalidInput("empty regression problem".into()));
    }
    if !y.is_finite() || z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite regression data".into()));
    }

    let z_mean = z.iter().sum::<f64>() / m as f64;
    let y_mean: Vec<f64> = (0..k).map(|r| y.row(r).iter().sum::<f64>() / m as f64).collect();
    let mut yc = y.clone();
    for r in 0..k {
        for c in 0..m {
            yc[(r, c)] -= y_mean[r];
        }
    }
    let zc: Vec<f64> = z.iter().map(|v| v - z_mean).collect();

    let mut gram = yc.mul(&yc.transpose());
    let rhs = yc.mul(&DenseMatrix::from_columns(m, &[zc.clone()]));
    let (eig, _) = symmetric_eigen(&gram)?;
    let top = eig.first().copied().unwrap_or(0.0);
    let regularized = !(eig[k - 1] > RANK_RTOL * top && top > 0.0);
    if regularized {
        for i in 0..k {
            gram[(i, i)] += FALLBACK_RIDGE;
        }
    }
    let w = solve_spd(&gram, &rhs)?.column(0);

    let rss: f64 = (0..m)
        .map(|c| {
            let fit: f64 = (0..k).map(|r| w[r] * yc[(r, c)]).sum();
            (zc[c] - fit).powi(2)
        })
        .sum();
    let mse = rss / m as f64;
    let dof = m.saturating_sub(k + 1);
    let intercept = z_mean - w.iter().zip(&y_mean).map(|(a, b)| a * b).sum::<f64>();
    Ok(RegressionEval {
        weights: w,
        intercept,
        noise_estimate: if dof > 0 { rss / dof as f64 } else { mse },
        mse,
        regularized,
    })
}
