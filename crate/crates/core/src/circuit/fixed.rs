//! Unsigned fixed-point arithmetic shared by the scalar routines and the
//! basis-permutation oracles, so both produce identical bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest input accepted by [`arcsin_angle`].
pub const ARCSIN_Y_MAX: f64 = 0.9;
/// Largest series length [`arcsin_angle`] supports.
pub const MAX_ARCSIN_TERMS: usize = 12;
const ARCSIN_GUARD_BITS: u32 = 16;
const Y_COEFF_BITS: u32 = 40;

/// `int_bits` integer and `frac_bits` fractional bits, unsigned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointFormat {
    pub int_bits: u32,
    pub frac_bits: u32,
}

impl FixedPointFormat {
    pub const fn new(int_bits: u32, frac_bits: u32) -> Self {
        Self { int_bits, frac_bits }
    }

    pub fn total(&self) -> u32 {
        self.int_bits + self.frac_bits
    }

    pub fn max_raw(&self) -> u128 {
        (1u128 << self.total()) - 1
    }

    pub fn resolution(&self) -> f64 {
        2f64.powi(-(self.frac_bits as i32))
    }

    pub fn to_f64(&self, raw: u128) -> f64 {
        raw as f64 * self.resolution()
    }

    /// Largest representable value not above `x`.
    pub fn floor(&self, x: f64) -> Result<Fixed> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("{x} is not a non-negative fixed-point value")));
        }
        let raw = (x * 2f64.powi(self.frac_bits as i32)).floor();
        if raw > self.max_raw() as f64 {
            return Err(Error::Domain(format!("{x} overflows {self:?}")));
        }
        Ok(Fixed {
            raw: raw as u128,
            format: *self,
        })
    }

    pub fn from_raw(&self, raw: u128) -> Result<Fixed> {
        if raw > self.max_raw() {
            return Err(Error::Domain(format!("raw value {raw} overflows {self:?}")));
        }
        Ok(Fixed { raw, format: *self })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fixed {
    pub raw: u128,
    pub format: FixedPointFormat,
}

impl Fixed {
    pub fn value(&self) -> f64 {
        self.format.to_f64(self.raw)
    }
}

fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

/// Newton iterations `z ← 2z − a z²` for `1/a` on raw integers.
///
/// `a = a_raw / 2^a_frac`; the result has `z_fmt`. The start is
/// `z₀ = 2^{−⌈log₂ a⌉}` and each iterate is rounded down, so iterates stay
/// at or below `1/a`. Total on every input: `a = 0` gives 0 and inputs below
/// one saturate, which is what the oracle needs.
pub fn newton_reciprocal_raw(a_raw: u128, a_frac: u32, s_prime: u32, z_fmt: FixedPointFormat) -> u128 {
    if a_raw == 0 {
        return 0;
    }
    let fz = z_fmt.frac_bits;
    let shift = a_frac + fz;
    let log_a = ceil_log2(a_raw) as i64 - a_frac as i64;
    if log_a < 0 {
        return z_fmt.max_raw();
    }
    if log_a as u32 > fz {
        return 0;
    }
    let mut z = 1u128 << (fz - log_a as u32);
    for _ in 0..s_prime {
        let sq = a_raw * z * z;
        let sub = (sq >> shift) + u128::from(sq & ((1u128 << shift) - 1) != 0);
        z = (2 * z).saturating_sub(sub);
    }
    z.min(z_fmt.max_raw())
}

fn check_newton_width(a: &FixedPointFormat, z: &FixedPointFormat) -> Result<()> {
    if a.total() + 2 * z.total() + 1 > 127 {
        return Err(Error::Configuration(format!(
            "Newton arithmetic on {a:?} / {z:?} does not fit 128-bit integers"
        )));
    }
    Ok(())
}

/// `1/a` for `a > 1`; see [`newton_reciprocal_raw`].
pub fn newton_reciprocal(a: Fixed, s_prime: u32, z_fmt: FixedPointFormat) -> Result<Fixed> {
    check_newton_width(&a.format, &z_fmt)?;
    if a.raw <= 1u128 << a.format.frac_bits {
        return Err(Error::Domain(format!("Newton reciprocal needs a > 1, got {}", a.value())));
    }
    Ok(Fixed {
        raw: newton_reciprocal_raw(a.raw, a.format.frac_bits, s_prime, z_fmt),
        format: z_fmt,
    })
}

/// `2^{−2^{s'}} + s'·2^{−d}`.
pub fn newton_error_bound(s_prime: u32, d: u32, _a_max: f64) -> f64 {
    2f64.powf(-(2f64.powi(s_prime as i32))) + s_prime as f64 * 2f64.powi(-(d as i32))
}

/// `ρ` and `ρλ2` quantized for [`compute_y_raw`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct YCoefficients {
    pub rho: u128,
    pub rho_lambda: u128,
}

impl YCoefficients {
    pub fn new(rho: f64, lambda2: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) || !(lambda2 >= 0.0) || !lambda2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need 0 < rho <= 1 and lambda2 >= 0, got rho={rho}, lambda2={lambda2}"
            )));
        }
        let scale = 2f64.powi(Y_COEFF_BITS as i32);
        let rl = (rho * lambda2 * scale).round();
        if rl >= 2f64.powi(80) {
            return Err(Error::Configuration(format!("rho * lambda2 = {} is too large", rho * lambda2)));
        }
        Ok(Self {
            rho: (rho * scale).round() as u128,
            rho_lambda: rl as u128,
        })
    }
}

/// `y = ρ + ρλ2 z` rounded down to `y_fmt`; `None` when `y` overflows.
pub fn compute_y_raw(z_raw: u128, z_frac: u32, c: YCoefficients, y_fmt: FixedPointFormat) -> Option<u128> {
    // y · 2^{G + z_frac}
    let num = (c.rho << z_frac).checked_add(c.rho_lambda.checked_mul(z_raw)?)?;
    let shift = Y_COEFF_BITS + z_frac;
    let y = if shift >= y_fmt.frac_bits {
        num >> (shift - y_fmt.frac_bits)
    } else {
        num.checked_shl(y_fmt.frac_bits - shift)?
    };
    (y <= y_fmt.max_raw()).then_some(y)
}

/// `y = ρ + ρλ2 z` truncated to `y_fmt`.
pub fn compute_y(z: Fixed, rho: f64, lambda2: f64, y_fmt: FixedPointFormat) -> Result<Fixed> {
    let c = YCoefficients::new(rho, lambda2)?;
    compute_y_raw(z.raw, z.format.frac_bits, c, y_fmt)
        .map(|raw| Fixed { raw, format: y_fmt })
        .ok_or_else(|| {
            Error::Configuration(format!(
                "y = rho (1 + lambda2 z) = {} overflows {y_fmt:?}",
                rho * (1.0 + lambda2 * z.value())
            ))
        })
}

/// Exact `(numerator, denominator)` of the arcsin series coefficient
/// `(2t)! / (4^t (t!)² (2t+1))`.
pub fn arcsin_coefficient(t: usize) -> (u128, u128) {
    let fact = |n: usize| (1..=n as u128).product::<u128>();
    let num = fact(2 * t);
    let den = (1u128 << (2 * t)) * fact(t) * fact(t) * (2 * t as u128 + 1);
    let g = gcd(num, den);
    (num / g, den / g)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Partial sum `Σ_{t<n_terms} c_t y^{2t+1}` in fixed point, rounded down to
/// `theta_fmt`. Intermediate powers carry 16 guard bits. Total on `y < 1`.
pub fn arcsin_angle_raw(y_raw: u128, y_frac: u32, n_terms: usize, theta_fmt: FixedPointFormat) -> u128 {
    let w = theta_fmt.frac_bits.max(y_frac) + ARCSIN_GUARD_BITS;
    let y = y_raw << (w - y_frac);
    let y2 = (y * y) >> w;
    let mut pow = y;
    let mut sum = 0u128;
    for t in 0..n_terms {
        let (num, den) = arcsin_coefficient(t);
        sum += pow * num / den;
        pow = (pow * y2) >> w;
    }
    (sum >> (w - theta_fmt.frac_bits)).min(theta_fmt.max_raw())
}

/// Truncated arcsin series for `y ∈ [0, 0.9]`.
pub fn arcsin_angle(y: Fixed, n_terms: usize, theta_fmt: FixedPointFormat) -> Result<Fixed> {
    if y.value() > ARCSIN_Y_MAX {
        return Err(Error::Domain(format!(
            "arcsin series input {} exceeds {ARCSIN_Y_MAX}",
            y.value()
        )));
    }
    if n_terms == 0 || n_terms > MAX_ARCSIN_TERMS {
        return Err(Error::InvalidParameter(format!(
            "n_terms must be in 1..={MAX_ARCSIN_TERMS}, got {n_terms}"
        )));
    }
    if theta_fmt.frac_bits.max(y.format.frac_bits) + ARCSIN_GUARD_BITS > 60 {
        return Err(Error::Configuration("arcsin precision above 44 fractional bits".into()));
    }
    Ok(Fixed {
        raw: arcsin_angle_raw(y.raw, y.format.frac_bits, n_terms, theta_fmt),
        format: theta_fmt,
    })
}
