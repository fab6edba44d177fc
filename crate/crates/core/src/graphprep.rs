//! Neighbor graph, graph Laplacian and the whitened data matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{cholesky_lower, DenseMatrix};

/// Symmetric 0/1 affinity over data points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NeighborGraph {
    pub weights: DenseMatrix,
    pub k_nn: usize,
}

/// `S_ij = 1` iff point `i` is among the `k_nn` nearest neighbors of `j` or
/// vice versa. Columns of `x` are the points; distances are Euclidean.
///
/// Distance ties go to the lower point index. A point is never its own neighbor.
pub fn knn_weights(x: &DenseMatrix, k_nn: usize) -> Result<NeighborGraph> {
    let m = x.cols();
    if k_nn == 0 || k_nn >= m {
        return Err(Error::InvalidParameter(format!(
            "k_nn must satisfy 1 <= k_nn < m (m = {m}), got {k_nn}"
        )));
    }
    let points: Vec<Vec<f64>> = (0..m).map(|j| x.column(j)).collect();
    let dist2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();

    let mut s = DenseMatrix::zeros(m, m);
    for j in 0..m {
        let mut others: Vec<(f64, usize)> = (0..m)
            .filter(|&i| i != j)
            .map(|i| (dist2(&points[i], &points[j]), i))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, i) in others.iter().take(k_nn) {
            s[(i, j)] = 1.0;
            s[(j, i)] = 1.0;
        }
    }
    Ok(NeighborGraph { weights: s, k_nn })
}

/// `L = diag(S 1) - S`.
pub fn laplacian(g: &NeighborGraph) -> DenseMatrix {
    let s = &g.weights;
    let m = s.rows();
    let mut l = s.scale(-1.0);
    for i in 0..m {
        l[(i, i)] += s.row(i).iter().sum::<f64>();
    }
    l
}

/// `X Σ` where `Σ Σ^T = I + λ1 L`.
pub fn whiten(x: &DenseMatrix, l: &DenseMatrix, lambda1: f64) -> Result<DenseMatrix> {
    if !(lambda1 >= 0.0) || !lambda1.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda1 must be >= 0, got {lambda1}")));
    }
    if !l.is_square() || l.rows() != x.cols() {
        return Err(Error::InvalidInput(format!(
            "Laplacian {:?} does not match {} data points",
            l.shape(),
            x.cols()
        )));
    }
    let inner = DenseMatrix::identity(l.rows()).add(&l.scale(lambda1))?;
    let sigma = cholesky_lower(&inner)?;
    x.matmul(&sigma)
}
