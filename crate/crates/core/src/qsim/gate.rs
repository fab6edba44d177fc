use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::DenseMatrix;

const UNITARY_TOL: f64 = 1e-10;

/// Real symmetric operator `O` whose powers `exp(i τ φ O)` are applied
/// conditioned on the integer `τ` held by a control register.
#[derive(Clone, Debug)]
pub struct Evolution {
    /// Eigenvalues of `O`.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors of `O`, one per column.
    pub eigenvectors: DenseMatrix,
    /// Phase per unit of `τ`: the applied operator is `exp(i τ phase O)`.
    pub phase: f64,
}

impl Evolution {
    pub fn new(operator: &DenseMatrix, phase: f64) -> Result<Self> {
        if !operator.is_square() || !operator.rows().is_power_of_two() {
            return Err(Error::InvalidGate(format!(
                "evolution operator must be 2^t x 2^t, got {:?}",
                operator.shape()
            )));
        }
        let (eigenvalues, eigenvectors) = crate::numkit::symmetric_eigen(operator)?;
        Ok(Self {
            eigenvalues,
            eigenvectors,
            phase,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn inverse(&self) -> Self {
        Self {
            phase: -self.phase,
            ..self.clone()
        }
    }

    /// Dense `exp(i τ phase O)`, row-major.
    pub fn power(&self, tau: u64) -> Vec<Complex64> {
        let d = self.dim();
        let v = &self.eigenvectors;
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&e| Complex64::from_polar(1.0, tau as f64 * self.phase * e))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                out[r * d + c] = (0..d).map(|j| phases[j] * v[(r, j)] * v[(c, j)]).sum();
            }
        }
        out
    }
}

#[derive(Clone)]
pub enum GateKind {
    H,
    X,
    Z,
    /// `cos(θ/2)|0⟩ + sin(θ/2)|1⟩` from `|0⟩`.
    Ry(f64),
    /// `diag(1, e^{iφ})`.
    Phase(f64),
    /// `diag(e^{2πi/2^l}, e^{-2πi/2^l})`.
    PhaseR(u32),
    /// `diag(1, -i)`.
    V,
    Swap,
    /// Dense row-major unitary on `2^t` amplitudes.
    Unitary(Arc<Vec<Complex64>>),
    /// `Σ_τ |τ⟩⟨τ| ⊗ exp(i τ phase O)`: the controls hold `τ`, read
    /// most significant qubit first, and act as a register rather than as
    /// all-ones controls.
    Evolution(Arc<Evolution>),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Ry(_) => "Ry",
            GateKind::Phase(_) => "P",
            GateKind::PhaseR(_) => "R",
            GateKind::V => "V",
            GateKind::Swap => "SWAP",
            GateKind::Unitary(_) => "U",
            GateKind::Evolution(_) => "EVOL",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            GateKind::Ry(t) | GateKind::Phase(t) => vec![*t],
            GateKind::PhaseR(l) => vec![*l as f64],
            GateKind::Evolution(e) => vec![e.phase],
            _ => vec![],
        }
    }

    fn arity(&self) -> Option<usize> {
        match self {
            GateKind::Swap => Some(2),
            GateKind::Unitary(u) => {
                let d = (u.len() as f64).sqrt().round() as usize;
                Some(d.trailing_zeros() as usize)
            }
            GateKind::Evolution(e) => Some(e.dim().trailing_zeros() as usize),
            _ => Some(1),
        }
    }

    /// Diagonal entries when the gate is diagonal in the computational basis.
    pub(crate) fn diagonal(&self) -> Option<[Complex64; 2]> {
        let one = Complex64::new(1.0, 0.0);
        match self {
            GateKind::Z => Some([one, -one]),
            GateKind::Phase(p) => Some([one, Complex64::from_polar(1.0, *p)]),
            GateKind::PhaseR(l) => {
                let a = 2.0 * PI / 2f64.powi(*l as i32);
                Some([Complex64::from_polar(1.0, a), Complex64::from_polar(1.0, -a)])
            }
            GateKind::V => Some([one, Complex64::new(0.0, -1.0)]),
            _ => None,
        }
    }

    /// Row-major matrix on the target qubits; `None` for [`GateKind::Evolution`].
    pub fn matrix(&self) -> Option<Vec<Complex64>> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        if let Some([d0, d1]) = self.diagonal() {
            return Some(vec![d0, z, z, d1]);
        }
        Some(match self {
            GateKind::H => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]
            }
            GateKind::X => vec![z, one, one, z],
            GateKind::Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]
            }
            GateKind::Swap => {
                let mut m = vec![z; 16];
                m[0] = one;
                m[6] = one;
                m[9] = one;
                m[15] = one;
                m
            }
            GateKind::Unitary(u) => u.as_ref().clone(),
            GateKind::Evolution(_) => return None,
            _ => unreachable!(),
        })
    }
}

impl fmt::Debug for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.name(), self.params())
    }
}

/// A gate on `targets`, applied only where every control qubit is 1
/// (for [`GateKind::Evolution`] the controls are the `τ` register).
#[derive(Clone, Debug)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>, controls: Vec<usize>) -> Result<Self> {
        if let Some(a) = kind.arity() {
            if a != targets.len() {
                return Err(Error::InvalidGate(format!(
                    "{} acts on {a} qubits, got {} targets",
                    kind.name(),
                    targets.len()
                )));
            }
        }
        let mut all: Vec<usize> = targets.iter().chain(&controls).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGate(format!(
                "{}: control and target spans overlap ({targets:?} / {controls:?})",
                kind.name()
            )));
        }
        Ok(Self {
            kind,
            targets,
            controls,
        })
    }

    pub fn single(kind: GateKind, target: usize) -> Self {
        Self::new(kind, vec![target], vec![]).expect("single-qubit gate")
    }

    pub fn controlled(kind: GateKind, target: usize, controls: Vec<usize>) -> Result<Self> {
        Self::new(kind, vec![target], controls)
    }

    /// Generic unitary; rejected unless `U U† = I` within 1e-10.
    pub fn unitary(matrix: Vec<Complex64>, targets: Vec<usize>, controls: Vec<usize>) -> Result<Self> {
        let d = 1usize << targets.len();
        if matrix.len() != d * d {
            return Err(Error::InvalidGate(format!(
                "unitary on {} qubits needs {} entries, got {}",
                targets.len(),
                d * d,
                matrix.len()
            )));
        }
        for r in 0..d {
            for c in 0..d {
                let dot: Complex64 = (0..d).map(|k| matrix[r * d + k] * matrix[c * d + k].conj()).sum();
                let want = if r == c { 1.0 } else { 0.0 };
                if (dot - want).norm() > UNITARY_TOL {
                    return Err(Error::InvalidGate(format!(
                        "matrix is not unitary: (UU†)[{r},{c}] = {dot}"
                    )));
                }
            }
        }
        Self::new(GateKind::Unitary(Arc::new(matrix)), targets, controls)
    }

    pub fn evolution(evolution: Arc<Evolution>, targets: Vec<usize>, tau_register: Vec<usize>) -> Result<Self> {
        Self::new(GateKind::Evolution(evolution), targets, tau_register)
    }

    /// The inverse gate on the same qubits.
    pub fn inverse(&self) -> Self {
        let kind = match &self.kind {
            GateKind::H | GateKind::X | GateKind::Z | GateKind::Swap => self.kind.clone(),
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Phase(p) => GateKind::Phase(-p),
            GateKind::PhaseR(_) => {
                // R_l† = diag(e^{-iα}, e^{iα}); expressed as a generic unitary.
                let [a, b] = self.kind.diagonal().unwrap();
                let z = Complex64::new(0.0, 0.0);
                GateKind::Unitary(Arc::new(vec![a.conj(), z, z, b.conj()]))
            }
            GateKind::V => GateKind::Phase(PI / 2.0),
            GateKind::Unitary(u) => {
                let d = (u.len() as f64).sqrt().round() as usize;
                let mut t = vec![Complex64::new(0.0, 0.0); d * d];
                for r in 0..d {
                    for c in 0..d {
                        t[c * d + r] = u[r * d + c].conj();
                    }
                }
                GateKind::Unitary(Arc::new(t))
            }
            GateKind::Evolution(e) => GateKind::Evolution(Arc::new(e.inverse())),
        };
        Self {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }
}
