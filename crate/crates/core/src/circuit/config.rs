use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::fixed::{FixedPointFormat, MAX_ARCSIN_TERMS};
use crate::error::{Error, Result};
use crate::qsim::MAX_QUBITS;
use crate::spectral::Companion;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Every stage as gates and arithmetic oracles on the full register set.
    GateLevel,
    /// Exact per-eigencomponent rotation; scales to larger `n`, `k`.
    #[default]
    MatrixLevel,
}

/// Evolution time of the phase estimations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum T0Policy {
    /// `2π(1 − 2^{−b})`: an eigenvalue of the scaled operator equal to 1 lands
    /// on the largest register value.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum RhoPolicy {
    /// `y_cap / (1 + λ2 κ_eff)`, the largest `ρ` keeping every branch amplitude
    /// at most `y_cap`.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    pub t0: T0Policy,
    /// Width of each eigenvalue register.
    pub b: u32,
    /// Width of the `y` and angle registers.
    pub d: u32,
    /// Bits per state-preparation angle.
    pub p: u32,
    pub rho: RhoPolicy,
    pub lambda2: f64,
    /// Outer iterations.
    pub s: usize,
    /// Newton steps.
    pub s_prime: u32,
    /// Terms of the arcsin series.
    pub n_terms: usize,
    pub mode: Mode,
    pub companion: Companion,
    pub qubit_budget: usize,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            t0: T0Policy::Auto,
            b: 6,
            d: 6,
            p: 12,
            rho: RhoPolicy::Auto,
            lambda2: crate::classical::DEFAULT_LAMBDA2,
            s: 1,
            s_prime: 3,
            n_terms: 4,
            mode: Mode::MatrixLevel,
            companion: Companion::ColumnIndex,
            qubit_budget: MAX_QUBITS,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Configuration(m));
        if self.b == 0 || self.b > 16 {
            return bad(format!("b must be in 1..=16, got {}", self.b));
        }
        if self.d < 2 || self.d > 24 {
            return bad(format!("d must be in 2..=24, got {}", self.d));
        }
        if self.p < 2 || self.p > 30 {
            return bad(format!("p must be in 2..=30, got {}", self.p));
        }
        if self.s_prime == 0 {
            return bad("s_prime must be at least 1".into());
        }
        if self.n_terms == 0 || self.n_terms > MAX_ARCSIN_TERMS {
            return bad(format!("n_terms must be in 1..={MAX_ARCSIN_TERMS}"));
        }
        if !(self.lambda2 >= 0.0) || !self.lambda2.is_finite() {
            return bad(format!("lambda2 must be >= 0, got {}", self.lambda2));
        }
        if let RhoPolicy::Fixed(r) = self.rho {
            if !(r > 0.0 && r <= 1.0) {
                return bad(format!("rho must be in (0, 1], got {r}"));
            }
        }
        if let T0Policy::Fixed(t) = self.t0 {
            if !(t > 0.0) || !t.is_finite() {
                return bad(format!("t0 must be positive, got {t}"));
            }
        }
        Ok(())
    }

    pub fn t0(&self) -> f64 {
        match self.t0 {
            T0Policy::Auto => 2.0 * PI * (1.0 - 2f64.powi(-(self.b as i32))),
            T0Policy::Fixed(t) => t,
        }
    }

    /// Branch-amplitude ceiling used by [`RhoPolicy::Auto`]. The gate-level
    /// path keeps `y` inside the arcsin series' accurate range.
    pub fn y_cap(&self) -> f64 {
        match self.mode {
            Mode::GateLevel => super::fixed::ARCSIN_Y_MAX,
            Mode::MatrixLevel => 1.0,
        }
    }

    /// Newton input: the product of the two eigenvalue registers.
    pub fn product_format(&self) -> FixedPointFormat {
        FixedPointFormat::new(2 * self.b, 0)
    }

    /// Newton output; resolves `1/a` for `a < 2^{2b}` with `d` spare bits.
    pub fn z_format(&self) -> FixedPointFormat {
        FixedPointFormat::new(1, 2 * self.b + self.d)
    }

    pub fn y_format(&self) -> FixedPointFormat {
        FixedPointFormat::new(0, self.d)
    }

    pub fn theta_format(&self) -> FixedPointFormat {
        FixedPointFormat::new(1, self.d - 1)
    }
}
