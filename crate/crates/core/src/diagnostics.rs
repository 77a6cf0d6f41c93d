//! Integral functionals evaluated on a state: mass, energies, dissipation,
//! weighted norms and the cut-off weight `zeta`.

use std::f64::consts::E;

use twofloat::TwoFloat;

use crate::domain::{radial_derivative, sup_norm, weighted_lp_norm, RadialGrid, ReformState};
use crate::error::{Error, Result};
use crate::params::{p_star, PhysParams};
use crate::transform::{check_positive, pow_pos};

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub mass: f64,
    /// Kinetic plus internal energy (`r^2 rho ln rho` internal part when `gamma = 1`).
    pub energy: f64,
    /// Same pressure part, kinetic part built on `v`.
    pub bd_energy: f64,
    pub diss_expansion: f64,
    pub diss_shear: f64,
    pub rho_sup: f64,
    /// `sup rho^(delta - 1/2)`.
    pub r_field_sup: f64,
    pub r_field_grad_l2: f64,
    /// `|| r^(2/p) rho^(1/p) u ||_p` with `p = p_star(delta)`.
    pub wlp_u: f64,
    pub wlp_v: f64,
    /// `int r^(2 + alpha) rho`; equals the mass when `alpha = 0`.
    pub moment_alpha: f64,
    /// `-int r^2 rho ln rho`, only for `gamma = 1`.
    pub log_entropy: Option<f64>,
    pub ru_l2: f64,
    pub rv_l2: f64,
    pub v_sup: f64,
    pub ru_r_l2: f64,
    pub u_sup: f64,
}

/// The four quadratures of the energy balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    pub energy: f64,
    pub bd_energy: f64,
    pub dissipation_expansion: f64,
    pub dissipation_shear: f64,
}

impl EnergyTerms {
    pub fn dissipation(&self) -> f64 {
        self.dissipation_expansion + self.dissipation_shear
    }
}

/// `int r^2 rho dr` by the shared midpoint rule.
pub fn mass(state: &ReformState, grid: &RadialGrid) -> Result<f64> {
    let ones = vec![1.0; grid.n()];
    weighted_lp_norm(grid, &ones, &state.rho, 1.0, 2.0, 1.0)
}

fn dissipation_densities(grid: &RadialGrid, rho: &[f64], u: &[f64], delta: f64) -> (f64, f64) {
    let ur = radial_derivative(grid, u);
    let x = grid.nodes();
    let expansion = grid.integrate(|i| {
        let r = x[i];
        let div = ur[i] + 2.0 * u[i] / r;
        pow_pos(rho[i], delta) * (2.0 * delta - 4.0 / 3.0) * r * r * div * div
    });
    let shear = grid.integrate(|i| {
        let r = x[i];
        let s = ur[i] - u[i] / r;
        pow_pos(rho[i], delta) * (4.0 / 3.0) * r * r * s * s
    });
    (expansion, shear)
}

fn kinetic(grid: &RadialGrid, rho: &[f64], w: &[f64]) -> f64 {
    let x = grid.nodes();
    grid.integrate(|i| 0.5 * x[i] * x[i] * rho[i] * w[i] * w[i])
}

/// Energy, BD energy and the two dissipation rates for `gamma > 1`.
pub fn energy_and_bd(
    state: &ReformState,
    grid: &RadialGrid,
    params: &PhysParams,
) -> Result<EnergyTerms> {
    if params.is_isothermal() {
        return Err(Error::domain(
            "energy_and_bd needs gamma > 1; use the isothermal path",
        ));
    }
    energy_terms(state, grid, params)
}

/// Energy terms for any admissible `gamma`; the internal energy is
/// `rho^gamma / (gamma - 1)` or `rho ln rho` at `gamma = 1`.
pub fn energy_terms(
    state: &ReformState,
    grid: &RadialGrid,
    params: &PhysParams,
) -> Result<EnergyTerms> {
    grid.check_len("rho", state.rho.len())?;
    check_positive("rho", &state.rho)?;
    let gamma = params.gamma();
    let x = grid.nodes();
    let internal = if params.is_isothermal() {
        grid.integrate(|i| x[i] * x[i] * state.rho[i] * state.rho[i].ln())
    } else {
        grid.integrate(|i| x[i] * x[i] * pow_pos(state.rho[i], gamma) / (gamma - 1.0))
    };
    let (dissipation_expansion, dissipation_shear) =
        dissipation_densities(grid, &state.rho, &state.u, params.delta());
    Ok(EnergyTerms {
        energy: kinetic(grid, &state.rho, &state.u) + internal,
        bd_energy: kinetic(grid, &state.rho, &state.v) + internal,
        dissipation_expansion,
        dissipation_shear,
    })
}

/// Both sides of the pointwise split of the viscous dissipation density:
/// `lhs = 2 delta (r u_r)^2 + (8 delta - 4) u^2 + (8 delta - 8) r u u_r`,
/// `rhs = (2 delta - 4/3) r^2 (u_r + 2u/r)^2 + (4/3) r^2 (u_r - u/r)^2`.
///
/// For `delta < 2/3` the quadratic form is indefinite and `lhs` can cancel
/// far below the size of its terms, so both sides are accumulated in
/// double-double arithmetic and rounded once.
pub fn dissipation_split_identity(delta: f64, r: f64, u: f64, u_r: f64) -> (f64, f64) {
    let (d, rr, uu, ur) = (
        TwoFloat::from(delta),
        TwoFloat::from(r),
        TwoFloat::from(u),
        TwoFloat::from(u_r),
    );
    let ru = rr * ur;
    let lhs = d * 2.0 * ru * ru + (d * 8.0 - 4.0) * uu * uu + (d * 8.0 - 8.0) * rr * uu * ur;
    // divide by plain f64 values: the double-double by double-double
    // quotient of twofloat 0.8 is only accurate to double precision
    let four_thirds = TwoFloat::from(4.0) / 3.0;
    let div = ur + uu * 2.0 / r;
    let shear = ur - uu / r;
    let r2 = rr * rr;
    let rhs = (d * 2.0 - four_thirds) * r2 * div * div + four_thirds * r2 * shear * shear;
    (f64::from(lhs), f64::from(rhs))
}

/// `(-int r^2 rho ln rho, int r^(2 + alpha) rho)` for the isothermal case.
pub fn gamma1_entropy(
    state: &ReformState,
    grid: &RadialGrid,
    params: &PhysParams,
) -> Result<(f64, f64)> {
    if !params.is_isothermal() {
        return Err(Error::domain(format!(
            "the log-entropy functional needs gamma = 1, got {}",
            params.gamma()
        )));
    }
    check_positive("rho", &state.rho)?;
    let x = grid.nodes();
    let entropy = -grid.integrate(|i| x[i] * x[i] * state.rho[i] * state.rho[i].ln());
    Ok((entropy, moment(state, grid, params.alpha())))
}

fn moment(state: &ReformState, grid: &RadialGrid, alpha: f64) -> f64 {
    let x = grid.nodes();
    grid.integrate(|i| x[i].powf(2.0 + alpha) * state.rho[i])
}

/// `4/e`, the maximum of `s^(1/4) ln(1/s)` on `(0, 1]`; bounds
/// `rho ln(1/rho) <= (4/e) rho^(3/4)`.
pub const LOG_ENTROPY_CONSTANT: f64 = 4.0 / E;

/// `(sup rho^(delta - 1/2), || d/dr rho^(delta - 1/2) ||_2)`.
pub fn density_bound_functionals(
    state: &ReformState,
    grid: &RadialGrid,
    params: &PhysParams,
) -> Result<(f64, f64)> {
    check_positive("rho", &state.rho)?;
    let e = params.delta() - 0.5;
    let field: Vec<f64> = state.rho.iter().map(|&r| pow_pos(r, e)).collect();
    let grad = radial_derivative(grid, &field);
    Ok((sup_norm(&field)?, grid.l2_norm(&grad)))
}

fn check_zeta_arg(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "zeta is defined for finite s >= 0, got {s}"
        )))
    }
}

const ZETA_CUBIC: [f64; 4] = [
    16.0 - 20.0 / E,
    44.0 / E - 36.0,
    24.0 - 29.0 / E,
    6.0 / E - 4.0,
];

/// Cut-off weight: `1` on `[0, 1/2]`, a cubic bridge on `[1/2, 1]`, `e^-s` beyond.
pub fn zeta_weight(s: f64) -> Result<f64> {
    check_zeta_arg(s)?;
    let [a, b, c, d] = ZETA_CUBIC;
    Ok(if s <= 0.5 {
        1.0
    } else if s <= 1.0 {
        ((a * s + b) * s + c) * s + d
    } else {
        (-s).exp()
    })
}

pub fn zeta_weight_derivative(s: f64) -> Result<f64> {
    check_zeta_arg(s)?;
    let [a, b, c, _] = ZETA_CUBIC;
    Ok(if s <= 0.5 {
        0.0
    } else if s <= 1.0 {
        (3.0 * a * s + 2.0 * b) * s + c
    } else {
        -(-s).exp()
    })
}

/// The cubic piece and its derivative evaluated at any `s`, for checking the
/// knot values from both sides.
pub fn zeta_cubic(s: f64) -> (f64, f64) {
    let [a, b, c, d] = ZETA_CUBIC;
    (
        ((a * s + b) * s + c) * s + d,
        (3.0 * a * s + 2.0 * b) * s + c,
    )
}

/// `max |zeta'(s)| / zeta(s)` over `s = 0, step, 2 step, ... <= s_max`.
pub fn zeta_ratio_bound(s_max: f64, step: f64) -> Result<f64> {
    if !(step > 0.0) || !(s_max >= 0.0) {
        return Err(Error::argument(
            "zeta sampling needs step > 0 and s_max >= 0",
        ));
    }
    let count = (s_max / step).round() as usize;
    let mut worst = 0.0_f64;
    for k in 0..=count {
        let s = k as f64 * step;
        let z = zeta_weight(s)?;
        if !(z > 0.0) {
            return Err(Error::domain(format!("zeta vanishes at s = {s}")));
        }
        worst = worst.max(zeta_weight_derivative(s)?.abs() / z);
    }
    Ok(worst)
}

/// Every functional of [`DiagnosticsReport`] on one state.
pub fn full_report(
    state: &ReformState,
    grid: &RadialGrid,
    params: &PhysParams,
) -> Result<DiagnosticsReport> {
    for (name, len) in [
        ("rho", state.rho.len()),
        ("u", state.u.len()),
        ("v", state.v.len()),
    ] {
        grid.check_len(name, len)?;
    }
    check_positive("rho", &state.rho)?;
    let terms = energy_terms(state, grid, params)?;
    let (r_field_sup, r_field_grad_l2) = density_bound_functionals(state, grid, params)?;
    let p = p_star(params.delta())?;
    let wlp_u = weighted_lp_norm(grid, &state.u, &state.rho, p, 2.0 / p, 1.0 / p)?;
    let wlp_v = weighted_lp_norm(grid, &state.v, &state.rho, p, 2.0 / p, 1.0 / p)?;
    let log_entropy = if params.is_isothermal() {
        Some(gamma1_entropy(state, grid, params)?.0)
    } else {
        None
    };
    let x = grid.nodes();
    let ru: Vec<f64> = state.u.iter().zip(x).map(|(u, r)| r * u).collect();
    let rv: Vec<f64> = state.v.iter().zip(x).map(|(v, r)| r * v).collect();
    let ru_r: Vec<f64> = radial_derivative(grid, &state.u)
        .iter()
        .zip(x)
        .map(|(d, r)| r * d)
        .collect();
    Ok(DiagnosticsReport {
        mass: mass(state, grid)?,
        energy: terms.energy,
        bd_energy: terms.bd_energy,
        diss_expansion: terms.dissipation_expansion,
        diss_shear: terms.dissipation_shear,
        rho_sup: sup_norm(&state.rho)?,
        r_field_sup,
        r_field_grad_l2,
        wlp_u,
        wlp_v,
        moment_alpha: moment(state, grid, params.alpha()),
        log_entropy,
        ru_l2: grid.l2_norm(&ru),
        rv_l2: grid.l2_norm(&rv),
        v_sup: sup_norm(&state.v)?,
        ru_r_l2: grid.l2_norm(&ru_r),
        u_sup: sup_norm(&state.u)?,
    })
}
