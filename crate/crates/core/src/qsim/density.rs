use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::DenseMatrix;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite `d x d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates the density-matrix invariants.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::InvalidState(format!(
                "{dim}x{dim} density matrix needs {} entries",
                dim * dim
            )));
        }
        let rho = Self { dim, data };
        for r in 0..dim {
            for c in 0..dim {
                if (rho.get(r, c) - rho.get(c, r).conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidState(format!("not Hermitian at ({r},{c})")));
                }
            }
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(rho)
    }

    /// From a real symmetric matrix, e.g. `A Aᵀ / tr(A Aᵀ)`.
    pub fn from_real(m: &DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let data = m.as_slice().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(m.rows(), data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_fn(self.dim, self.dim, |r, c| self.get(r, c));
        let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Real part; errors if any imaginary part exceeds `tol`.
    pub fn to_real(&self, tol: f64) -> Result<DenseMatrix> {
        if let Some(x) = self.data.iter().find(|x| x.im.abs() > tol) {
            return Err(Error::InvalidState(format!("imaginary entry {x}")));
        }
        DenseMatrix::from_row_major(self.dim, self.dim, self.data.iter().map(|x| x.re).collect())
    }

    /// Frobenius distance.
    pub fn distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::InvalidState("density matrices differ in size".into()));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}
