//! The alternating A/B learner for A-optimal projections.
//!
//! This is the direct route: every step solves the linear systems that make
//! the auxiliary objective stationary in one block of variables. It is slow
//! but assumption-free, which makes it the reference the spectral and
//! circuit routes are checked against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{cholesky_lower, cholesky_solve, pca_basis, svd_default, DenseMatrix};

/// Condition estimate above which `update_b` attaches a warning.
pub const CONDITION_WARN: f64 = 1e14;

pub const DEFAULT_LAMBDA2: f64 = 1e-3;
pub const PAPER_MODE_RHO0: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditioningWarning {
    pub iteration: usize,
    pub condition_estimate: f64,
}

/// Output of the B-step.
#[derive(Clone, Debug)]
pub struct BUpdate {
    pub b: DenseMatrix,
    /// Rough condition number of the SPD system, from the Cholesky diagonal.
    pub condition_estimate: f64,
}

impl BUpdate {
    pub fn ill_conditioned(&self) -> bool {
        self.condition_estimate > CONDITION_WARN
    }
}

/// One point on an iterative trajectory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AopState {
    pub a: DenseMatrix,
    /// `None` for the initial state.
    pub b: Option<DenseMatrix>,
    pub iteration: usize,
    pub lambda2: f64,
    pub rho0: Option<f64>,
}

impl AopState {
    /// Column norms of `A`; these are the per-direction scales once the
    /// columns are aligned with the left singular vectors of the data.
    pub fn column_scales(&self) -> Vec<f64> {
        (0..self.a.cols())
            .map(|j| self.a.column(j).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterativeFit {
    pub states: Vec<AopState>,
    pub converged: bool,
    pub warnings: Vec<ConditioningWarning>,
}

impl IterativeFit {
    pub fn last(&self) -> &AopState {
        self.states.last().expect("trajectory always holds the initial state")
    }
}

/// `B = (X̃ᵀA AᵀX̃ + λ2 I)⁻¹ X̃ᵀA`, solved through a Cholesky factor.
pub fn update_b(xt: &DenseMatrix, a: &DenseMatrix, lambda2: f64) -> Result<BUpdate> {
    if !(lambda2 > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda2 must be > 0, got {lambda2}")));
    }
    if a.rows() != xt.rows() {
        return Err(Error::InvalidInput(format!(
            "A has {} rows but the data has {} features",
            a.rows(),
            xt.rows()
        )));
    }
    let p = xt.transpose().mul(a);
    let system = p
        .mul(&p.transpose())
        .add(&DenseMatrix::identity(xt.cols()).scale(lambda2))?;
    let l = cholesky_lower(&system)?;
    let (lo, hi) = (0..l.rows()).fold((f64::INFINITY, 0.0_f64), |(lo, hi), i| {
        (lo.min(l[(i, i)]), hi.max(l[(i, i)]))
    });
    let b = cholesky_solve(&l, &p)?;
    Ok(BUpdate {
        b,
        condition_estimate: (hi / lo).powi(2),
    })
}

/// `A = (X̃B BᵀX̃ᵀ)⁻¹ X̃B`, taken on the range of `X̃B`.
///
/// With `M = X̃B` of full column rank this is `M (MᵀM)⁻¹`, the transpose of
/// the pseudo-inverse of `M`; it is evaluated from the SVD of `M`.
pub fn update_a(xt: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let m = xt.matmul(b)?;
    let k = m.cols();
    let f = svd_default(&m)?;
    if f.rank < k {
        return Err(Error::RankDeficient {
            requested: k,
            deficient: k - f.rank,
        });
    }
    let mut us = f.u.clone();
    for i in 0..us.rows() {
        for (j, s) in f.sigma.iter().enumerate() {
            us[(i, j)] /= s;
        }
    }
    Ok(us.mul(&f.v.transpose()))
}

/// Rescales `A` onto the Frobenius ball of radius `rho0` when it lies outside.
pub fn normalize_a(a: &DenseMatrix, rho0: f64) -> DenseMatrix {
    let norm = a.frobenius_norm();
    if norm <= rho0 {
        a.clone()
    } else {
        a.scale(rho0 / norm)
    }
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Distance between successive normalized scale vectors.
pub fn direction_change(prev: &[f64], next: &[f64]) -> f64 {
    unit(prev)
        .iter()
        .zip(unit(next))
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Runs the alternating learner from the PCA basis of `X̃`.
///
/// Stops after `max_iter` steps or once the normalized column-scale vector
/// moves less than `tol`. `rho0 = None` skips the Frobenius normalization.
pub fn fit_iterative(
    xt: &DenseMatrix,
    k: usize,
    lambda2: f64,
    rho0: Option<f64>,
    max_iter: usize,
    tol: f64,
) -> Result<IterativeFit> {
    if let Some(r) = rho0 {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("rho0 must be > 0, got {r}")));
        }
    }
    let mut a = pca_basis(xt, k)?;
    if let Some(r) = rho0 {
        a = normalize_a(&a, r);
    }
    let mut states = vec![AopState {
        a,
        b: None,
        iteration: 0,
        lambda2,
        rho0,
    }];
    let mut warnings = Vec::new();
    let mut converged = false;
    for it in 1..=max_iter {
        let prev = states.last().unwrap();
        let bu = update_b(xt, &prev.a, lambda2)?;
        if bu.ill_conditioned() {
            warnings.push(ConditioningWarning {
                iteration: it,
                condition_estimate: bu.condition_estimate,
            });
        }
        let mut a = update_a(xt, &bu.b)?;
        if let Some(r) = rho0 {
            a = normalize_a(&a, r);
        }
        let next = AopState {
            a,
            b: Some(bu.b),
            iteration: it,
            lambda2,
            rho0,
        };
        let change = direction_change(&prev.column_scales(), &next.column_scales());
        states.push(next);
        if change < tol {
            converged = true;
            break;
        }
    }
    Ok(IterativeFit {
        states,
        converged,
        warnings,
    })
}

/// `Tr((AᵀX(I + λ1 L)XᵀA + λ2 I)⁻¹)`.
pub fn objective(
    a: &DenseMatrix,
    x: &DenseMatrix,
    l: &DenseMatrix,
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    let m = x.cols();
    let weight = DenseMatrix::identity(m).add(&l.scale(lambda1))?;
    let xa = x.transpose().matmul(a)?;
    let inner = xa
        .transpose()
        .mul(&weight)
        .mul(&xa)
        .add(&DenseMatrix::identity(a.cols()).scale(lambda2))?;
    let chol = cholesky_lower(&inner).map_err(|e| match e {
        Error::Decomposition { pivot } => Error::InvalidState(format!(
            "information matrix is not positive definite (pivot {pivot})"
        )),
        other => other,
    })?;
    let inv = cholesky_solve(&chol, &DenseMatrix::identity(a.cols()))?;
    Ok(inv.trace())
}

/// `‖I − AᵀX̃B‖²_F + λ2 ‖B‖²_F`.
pub fn objective_aux(a: &DenseMatrix, b: &DenseMatrix, xt: &DenseMatrix, lambda2: f64) -> Result<f64> {
    let k = a.cols();
    let resid = DenseMatrix::identity(k).sub(&a.transpose().matmul(xt)?.matmul(b)?)?;
    Ok(resid.frobenius_norm().powi(2) + lambda2 * b.frobenius_norm().powi(2))
}
