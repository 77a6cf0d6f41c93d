//! Change of variables between `(rho, u)` and the reformulated unknowns
//! `(rho, h, phi, v, u)`, plus numerical checks of the algebraic identities
//! that connect the two momentum equations.

use crate::domain::{radial_derivative, PrimitiveState, RadialGrid, ReformState};
use crate::error::{Error, Result};
use crate::params::PhysParams;

/// `rho^exponent` evaluated as `exp(exponent * ln rho)` so that densities near
/// the bottom of the floating point range do not underflow intermediate powers.
pub(crate) fn pow_pos(rho: f64, exponent: f64) -> f64 {
    (exponent * rho.ln()).exp()
}

pub(crate) fn check_positive(field: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|&x| !(x > 0.0)) {
        Some(index) => Err(Error::Positivity {
            field,
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// `h = 2 rho^(delta - 1)`.
pub fn h_of_rho(rho: f64, params: &PhysParams) -> f64 {
    2.0 * pow_pos(rho, params.delta() - 1.0)
}

/// `phi = rho^(gamma - delta)`.
pub fn phi_of_rho(rho: f64, params: &PhysParams) -> f64 {
    pow_pos(rho, params.gamma() - params.delta())
}

/// Builds `(h, phi, v)` from density and velocity. The effective velocity is
/// taken through the `h` route, `v = u + delta/(delta - 1) h_r`.
pub fn to_reformulated(
    state: &PrimitiveState,
    params: &PhysParams,
    grid: &RadialGrid,
) -> Result<ReformState> {
    grid.check_len("rho", state.rho.len())?;
    grid.check_len("u", state.u.len())?;
    check_positive("rho", &state.rho)?;
    let h: Vec<f64> = state.rho.iter().map(|&r| h_of_rho(r, params)).collect();
    let phi: Vec<f64> = state.rho.iter().map(|&r| phi_of_rho(r, params)).collect();
    let v = effective_velocity_from_h(grid, &state.u, &h, params);
    Ok(ReformState {
        t: state.t,
        rho: state.rho.clone(),
        h,
        phi,
        v,
        u: state.u.clone(),
    })
}

/// `v = u + delta/(delta - 1) * h_r`.
pub fn effective_velocity_from_h(
    grid: &RadialGrid,
    u: &[f64],
    h: &[f64],
    params: &PhysParams,
) -> Vec<f64> {
    let delta = params.delta();
    let factor = delta / (delta - 1.0);
    radial_derivative(grid, h)
        .iter()
        .zip(u)
        .map(|(hr, u)| u + factor * hr)
        .collect()
}

/// `v = u + 2 delta rho^(delta - 2) rho_r`, the density-gradient route.
pub fn effective_velocity_from_rho(
    grid: &RadialGrid,
    u: &[f64],
    rho: &[f64],
    params: &PhysParams,
) -> Vec<f64> {
    let delta = params.delta();
    radial_derivative(grid, rho)
        .iter()
        .zip(rho)
        .zip(u)
        .map(|((rr, &r), u)| u + 2.0 * delta * pow_pos(r, delta - 2.0) * rr)
        .collect()
}

/// Recovers `rho = (h/2)^(1/(delta - 1))`; the velocity is copied.
pub fn to_primitive(state: &ReformState, params: &PhysParams) -> Result<PrimitiveState> {
    check_positive("h", &state.h)?;
    let inv = 1.0 / (params.delta() - 1.0);
    let rho = state.h.iter().map(|&h| pow_pos(0.5 * h, inv)).collect();
    Ok(PrimitiveState {
        t: state.t,
        rho,
        u: state.u.clone(),
    })
}

/// Largest nodal mismatch between `(rho^gamma)_r` and
/// `gamma/(2 delta) rho^(gamma + 1 - delta) (v - u)`.
pub fn pressure_gradient_identity_residual(
    state: &ReformState,
    params: &PhysParams,
    grid: &RadialGrid,
) -> f64 {
    let gamma = params.gamma();
    let delta = params.delta();
    let pressure: Vec<f64> = state.rho.iter().map(|&r| pow_pos(r, gamma)).collect();
    let dp = radial_derivative(grid, &pressure);
    let c = params.damping_coeff();
    dp.iter()
        .enumerate()
        .map(|(i, dp)| {
            let rhs = c * pow_pos(state.rho[i], gamma + 1.0 - delta) * (state.v[i] - state.u[i]);
            (dp - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// The two ways of writing the `(v - u)` source of the momentum equation at a
/// single point:
///
/// * `delta (v-u) u_r + (delta-1)(v-u) 2u/r` (reformulated system),
/// * `(v-u) u_r + (delta-1)(v-u)(u_r + 2u/r)` (primitive form divided by rho).
pub fn momentum_source_groupings(delta: f64, r: f64, u: f64, u_r: f64, v: f64) -> (f64, f64) {
    let w = v - u;
    let reform = delta * w * u_r + (delta - 1.0) * w * (2.0 / r) * u;
    let primitive = w * u_r + (delta - 1.0) * w * (u_r + 2.0 * u / r);
    (reform, primitive)
}

/// Relative disagreement of the two source groupings over the mesh,
/// normalised by the largest individual summand. Zero when both vanish.
pub fn momentum_forms_agree(state: &ReformState, grid: &RadialGrid, params: &PhysParams) -> f64 {
    let delta = params.delta();
    let ur = radial_derivative(grid, &state.u);
    let mut diff = 0.0_f64;
    let mut scale = 0.0_f64;
    for (i, &r) in grid.nodes().iter().enumerate() {
        let (u, v) = (state.u[i], state.v[i]);
        let (a, b) = momentum_source_groupings(delta, r, u, ur[i], v);
        diff = diff.max((a - b).abs());
        let w = v - u;
        for term in [
            delta * w * ur[i],
            (delta - 1.0) * w * 2.0 * u / r,
            w * ur[i],
            (delta - 1.0) * w * ur[i],
        ] {
            scale = scale.max(term.abs());
        }
    }
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}
