//! Physical constants and the closed-form admissibility algebra for the
//! viscosity exponent.
//!
//! The viscosity law is `mu = rho^delta`, `lambda = 2 (delta - 1) rho^delta`
//! and the pressure law is `P = rho^gamma` (both coefficients fixed at one).
//! The solver is only guaranteed to approximate a global strong solution
//! when `delta` satisfies
//!
//! ```text
//!   2/3 <= delta < 1   and   p_star(delta) <= p_max(delta)
//! ```
//!
//! where `K(delta) = 2 delta (2 delta - 1) / (1 - delta)^2`,
//! `p_star = (4 - 2 delta) / (1 - delta)` and `p_max` is the larger root of
//! `p^2 - K p + K = 0`.

use crate::error::{Error, Result};

/// Lower end of the admissible viscosity exponent range (`2 mu + 3 lambda >= 0`).
pub const DELTA_MIN: f64 = 2.0 / 3.0;

/// Bisection bracket used by [`find_delta_star`]; endpoints stay clear of the
/// singularity of `K` at `delta = 1`.
pub const DELTA_STAR_BRACKET: (f64, f64) = (DELTA_MIN + 1e-9, 1.0 - 1e-9);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    gamma: f64,
    delta: f64,
    a: f64,
    eta: f64,
    alpha: f64,
}

impl PhysParams {
    /// Validates and builds a parameter set.
    ///
    /// `alpha` is the far-field moment exponent and is only meaningful for the
    /// isothermal case `gamma = 1`, where it must lie in `(1, 2)`. For
    /// `gamma > 1` it must be zero.
    pub fn new(gamma: f64, delta: f64, a: f64, eta: f64, alpha: f64) -> Result<Self> {
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(Error::argument(format!("gamma must be >= 1, got {gamma}")));
        }
        if !(DELTA_MIN..1.0).contains(&delta) {
            return Err(Error::argument(format!(
                "delta must lie in [2/3, 1), got {delta}"
            )));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::argument(format!(
                "inner radius a must be > 0, got {a}"
            )));
        }
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(Error::argument(format!("eta must be >= 0, got {eta}")));
        }
        if gamma == 1.0 {
            if !(alpha > 1.0 && alpha < 2.0) {
                return Err(Error::argument(format!(
                    "gamma = 1 requires alpha in (1, 2), got {alpha}"
                )));
            }
        } else if alpha != 0.0 {
            return Err(Error::argument(format!(
                "alpha is only used when gamma = 1 and must be 0 otherwise, got {alpha}"
            )));
        }
        Ok(Self {
            gamma,
            delta,
            a,
            eta,
            alpha,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Coefficient of the pressure law `P = A1 rho^gamma`.
    pub fn pressure_coeff(&self) -> f64 {
        1.0
    }

    /// Coefficient of the viscosity law `mu = A2 rho^delta`.
    pub fn viscosity_coeff(&self) -> f64 {
        1.0
    }

    pub fn is_isothermal(&self) -> bool {
        self.gamma == 1.0
    }

    /// Damping rate prefactor `gamma / (2 delta)` of the effective velocity equation.
    pub fn damping_coeff(&self) -> f64 {
        self.gamma / (2.0 * self.delta)
    }

    /// Same parameters with a different density floor.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.gamma, self.delta, self.a, eta, self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    pub delta: f64,
    /// `K(delta)`, `None` when `delta` is outside `(0, 1)`.
    pub k: Option<f64>,
    pub p_star: Option<f64>,
    /// Roots of `p^2 - K p + K`, `None` when `K < 4`.
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    /// `2/3 <= delta < 1`, i.e. the viscosity law satisfies `2 mu + 3 lambda >= 0`.
    pub viscosity_law_valid: bool,
    /// `p_star <= p_max`.
    pub exponent_condition: bool,
    pub admissible: bool,
}

impl AdmissibilityReport {
    /// Short human-readable explanation of the verdict.
    pub fn reason(&self) -> &'static str {
        if self.admissible {
            "admissible"
        } else if !self.viscosity_law_valid {
            "delta outside [2/3, 1)"
        } else {
            "p_star exceeds p_max"
        }
    }
}

fn check_open_unit(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )))
    }
}

pub fn k_of_delta(delta: f64) -> Result<f64> {
    check_open_unit(delta)?;
    let gap = 1.0 - delta;
    Ok(2.0 * delta * (2.0 * delta - 1.0) / (gap * gap))
}

/// Roots `(p_min, p_max)` of `p^2 - K p + K = 0`.
pub fn p_range(delta: f64) -> Result<(f64, f64)> {
    let k = k_of_delta(delta)?;
    // K = 4 exactly at delta = 2/3; allow the rounding error of that evaluation.
    if k < 4.0 - 1e-12 {
        return Err(Error::domain(format!(
            "K(delta) = {k} < 4 has no real exponent range (delta = {delta})"
        )));
    }
    // K (K - 4) rather than K^2 - 4K: K grows like (1 - delta)^-2.
    let root = (k * (k - 4.0)).max(0.0).sqrt();
    Ok(((k - root) / 2.0, (k + root) / 2.0))
}

pub fn p_star(delta: f64) -> Result<f64> {
    if delta == 1.0 || !delta.is_finite() {
        return Err(Error::domain(format!(
            "p_star is singular at delta = {delta}"
        )));
    }
    Ok((4.0 - 2.0 * delta) / (1.0 - delta))
}

pub fn check_admissibility(params: &PhysParams) -> AdmissibilityReport {
    admissibility_for_delta(params.delta())
}

/// Admissibility verdict for a bare exponent, including values a
/// [`PhysParams`] would reject.
pub fn admissibility_for_delta(delta: f64) -> AdmissibilityReport {
    let k = k_of_delta(delta).ok();
    let p_star = if delta > 0.0 && delta < 1.0 {
        p_star(delta).ok()
    } else {
        None
    };
    let (p_min, p_max) = match p_range(delta) {
        Ok((lo, hi)) => (Some(lo), Some(hi)),
        Err(_) => (None, None),
    };
    let viscosity_law_valid = (DELTA_MIN..1.0).contains(&delta);
    let exponent_condition = matches!((p_star, p_max), (Some(s), Some(m)) if s <= m);
    AdmissibilityReport {
        delta,
        k,
        p_star,
        p_min,
        p_max,
        viscosity_law_valid,
        exponent_condition,
        admissible: viscosity_law_valid && exponent_condition,
    }
}

/// `p_star(delta) - p_max(delta)`; negative exactly where the exponent
/// condition holds.
pub fn threshold_gap(delta: f64) -> Result<f64> {
    Ok(p_star(delta)? - p_range(delta)?.1)
}

/// Locates the smallest admissible viscosity exponent by bisection on
/// `p_star - p_max` over [`DELTA_STAR_BRACKET`].
pub fn find_delta_star(tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::argument(format!("tolerance must be > 0, got {tol}")));
    }
    let (mut lo, mut hi) = DELTA_STAR_BRACKET;
    let f_lo = threshold_gap(lo)?;
    let f_hi = threshold_gap(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = threshold_gap(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The older sufficient condition `gamma - delta - 1/p >= 0` that tied the
/// pressure exponent to the Lebesgue exponent.
pub fn wz_comparison(gamma: f64, delta: f64, p: f64) -> bool {
    gamma - delta - 1.0 / p >= 0.0
}
