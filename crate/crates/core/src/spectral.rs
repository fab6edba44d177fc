//! Closed-form AOP iterations.
//!
//! Starting from the PCA basis of `X̃`, every alternating A/B step keeps the
//! left singular vectors of `A` fixed and only rescales them:
//!
//! ```text
//! A⁽ⁱ⁾ = Σ_j β_j⁽ⁱ⁾ u_j e_jᵀ,   β_j⁽ⁱ⁾ = ((σ_j β_j⁽ⁱ⁻¹⁾)² + λ2) / (σ_j² β_j⁽ⁱ⁻¹⁾),   β_j⁽⁰⁾ = 1
//! ```
//!
//! so a whole trajectory costs one SVD plus `k` scalar updates per step.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{svd_default, DenseMatrix, SvdFactors};

/// The factor paired with `u_j` when a projection is written as a pure state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Companion {
    /// `Σ β_j |u_j⟩|v_j⟩`, an element of the n·m product space.
    #[default]
    RightSingular,
    /// `Σ β_j |u_j⟩|j⟩`, the row-major vectorization of the n x k matrix `A`.
    ColumnIndex,
}

#[derive(Clone, Debug)]
pub struct SpectralModel {
    pub svd: Arc<SvdFactors>,
    pub k: usize,
    pub beta: Vec<f64>,
    pub iteration: usize,
    pub lambda2: f64,
}

impl SpectralModel {
    pub fn sigma(&self) -> &[f64] {
        &self.svd.sigma[..self.k]
    }

    pub fn n(&self) -> usize {
        self.svd.u.rows()
    }

    pub fn m(&self) -> usize {
        self.svd.v.rows()
    }

    /// `Σ_j β_j²`, i.e. `tr(A Aᵀ)`.
    pub fn beta_norm_sq(&self) -> f64 {
        self.beta.iter().map(|b| b * b).sum()
    }

    /// Same singular triplets, different scales.
    pub fn with_beta(&self, beta: Vec<f64>, iteration: usize) -> Self {
        Self {
            svd: Arc::clone(&self.svd),
            k: self.k,
            beta,
            iteration,
            lambda2: self.lambda2,
        }
    }
}

/// PCA initialization: `β = 1`, columns are the top-`k` left singular vectors.
pub fn init_spectral(xt: &DenseMatrix, k: usize, lambda2: f64) -> Result<SpectralModel> {
    let svd = svd_default(xt)?;
    if k > svd.rank {
        return Err(Error::RankDeficient {
            requested: k,
            deficient: k - svd.rank,
        });
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    Ok(SpectralModel {
        svd: Arc::new(svd),
        k,
        beta: vec![1.0; k],
        iteration: 0,
        lambda2,
    })
}

/// One scalar update per retained direction.
pub fn beta_step(model: &SpectralModel) -> Result<SpectralModel> {
    let beta = model
        .sigma()
        .iter()
        .zip(&model.beta)
        .map(|(&s, &b)| {
            if s == 0.0 || b == 0.0 {
                return Err(Error::DivisionByZero("beta_step"));
            }
            Ok(((s * b).powi(2) + model.lambda2) / (s * s * b))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(model.with_beta(beta, model.iteration + 1))
}

/// `s` applications of [`beta_step`]; the returned trajectory starts with the
/// initial model and has `s + 1` entries.
pub fn fit_spectral(xt: &DenseMatrix, k: usize, lambda2: f64, s: usize) -> Result<Vec<SpectralModel>> {
    let mut traj = vec![init_spectral(xt, k, lambda2)?];
    for _ in 0..s {
        let next = beta_step(traj.last().unwrap())?;
        traj.push(next);
    }
    Ok(traj)
}

/// `A = Σ_j β_j u_j e_jᵀ`.
pub fn assemble_projection(model: &SpectralModel) -> DenseMatrix {
    let n = model.n();
    let mut a = DenseMatrix::zeros(n, model.k);
    for (j, b) in model.beta.iter().enumerate() {
        for i in 0..n {
            a[(i, j)] = b * model.svd.u[(i, j)];
        }
    }
    a
}

/// Unit vector `Σ_j β_j |u_j⟩|v_j⟩ / ‖β‖`, indexed `i * m + l`.
pub fn target_state(model: &SpectralModel) -> Vec<f64> {
    target_state_with(model, Companion::RightSingular)
}

/// [`target_state`] with a choice of companion factor.
pub fn target_state_with(model: &SpectralModel, companion: Companion) -> Vec<f64> {
    let n = model.n();
    let c = match companion {
        Companion::RightSingular => model.m(),
        Companion::ColumnIndex => model.k,
    };
    let norm = model.beta_norm_sq().sqrt();
    let mut out = vec![0.0; n * c];
    for (j, b) in model.beta.iter().enumerate() {
        let w = b / norm;
        for i in 0..n {
            let u = model.svd.u[(i, j)];
            if u == 0.0 {
                continue;
            }
            match companion {
                Companion::RightSingular => {
                    for l in 0..c {
                        out[i * c + l] += w * u * model.svd.v[(l, j)];
                    }
                }
                Companion::ColumnIndex => out[i * c + j] += w * u,
            }
        }
    }
    out
}

/// `Σ_j β_j² u_j u_jᵀ / Σ_j β_j²`, i.e. `A Aᵀ / tr(A Aᵀ)`.
pub fn density_formula(model: &SpectralModel) -> DenseMatrix {
    let a = assemble_projection(model);
    a.mul(&a.transpose()).scale(1.0 / model.beta_norm_sq())
}
