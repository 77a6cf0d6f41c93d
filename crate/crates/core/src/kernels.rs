//! Per-equation update kernels on the cell-centred radial mesh.
//!
//! * density: conservative finite volumes with upwind face values,
//! * `h`, `phi`: upwind (or semi-Lagrangian) advection followed by an explicit
//!   stretching factor,
//! * `v`: upwind advection followed by exact exponential relaxation toward `u`,
//! * `u`: explicit advection and `(v - u)` sources, theta-implicit degenerate
//!   diffusion `delta h (u_r + 2u/r)_r`, one tridiagonal solve.
//!
//! All kernels are pure functions of their inputs.

use crate::domain::{RadialGrid, ReformState};
use crate::error::{Error, Result};
use crate::params::PhysParams;
use crate::tridiag::solve_tridiagonal;

/// Largest admissible CFL number for every explicit kernel.
pub const CFL_LIMIT: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransportMode {
    ConservativeFv,
    UpwindFd,
    Characteristics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Limiter {
    #[default]
    None,
    Minmod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransportScheme {
    pub mode: TransportMode,
    pub limiter: Limiter,
}

impl TransportScheme {
    /// First-order conservative scheme, the only one accepted for density.
    pub const CONTINUITY: Self = Self {
        mode: TransportMode::ConservativeFv,
        limiter: Limiter::None,
    };

    pub const UPWIND: Self = Self {
        mode: TransportMode::UpwindFd,
        limiter: Limiter::None,
    };

    pub fn new(mode: TransportMode, limiter: Limiter) -> Self {
        Self { mode, limiter }
    }
}

/// Boundary treatment for velocities at `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OuterBc {
    #[default]
    Dirichlet,
    Neumann,
}

/// Stencil for the explicit `u u_r`-type term of the momentum equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MomentumAdvection {
    Upwind,
    /// Second-order central differences; stable here because the cell Peclet
    /// number `|w| dr / (delta h)` stays far below 2 on resolved meshes.
    #[default]
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumSolveConfig {
    theta: f64,
    pub outer_bc: OuterBc,
    pub advection: MomentumAdvection,
    /// When false only the diffusion operator is applied (verification mode).
    pub explicit_terms: bool,
}

impl MomentumSolveConfig {
    pub fn new(theta: f64, outer_bc: OuterBc) -> Result<Self> {
        if !(0.5..=1.0).contains(&theta) {
            return Err(Error::argument(format!(
                "theta must lie in [0.5, 1], got {theta}"
            )));
        }
        Ok(Self {
            theta,
            outer_bc,
            advection: MomentumAdvection::default(),
            explicit_terms: true,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn diffusion_only(mut self) -> Self {
        self.explicit_terms = false;
        self
    }
}

impl Default for MomentumSolveConfig {
    fn default() -> Self {
        Self {
            theta: 0.5,
            outer_bc: OuterBc::Dirichlet,
            advection: MomentumAdvection::default(),
            explicit_terms: true,
        }
    }
}

/// Interpolates nodal velocities to the `n + 1` faces. The inner face carries
/// `u(a) = 0`; the outer face is `0` (Dirichlet) or the last nodal value.
pub fn face_velocities(grid: &RadialGrid, u: &[f64], outer: OuterBc) -> Vec<f64> {
    let x = grid.nodes();
    let f = grid.faces();
    let n = x.len();
    let mut out = vec![0.0; n + 1];
    for i in 1..n {
        let w = (f[i] - x[i - 1]) / (x[i] - x[i - 1]);
        out[i] = (1.0 - w) * u[i - 1] + w * u[i];
    }
    out[n] = match outer {
        OuterBc::Dirichlet => 0.0,
        OuterBc::Neumann => u[n - 1],
    };
    out
}

/// `max |velocity| * dt / min(dr)`.
pub fn cfl_number(velocity: &[f64], dt: f64, grid: &RadialGrid) -> f64 {
    let vmax = velocity.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    vmax * dt / grid.min_dr()
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::argument(format!(
            "dt must be positive and finite, got {dt}"
        )))
    }
}

fn check_cfl(velocity: &[f64], dt: f64, grid: &RadialGrid) -> Result<()> {
    let number = cfl_number(velocity, dt, grid);
    if number <= CFL_LIMIT {
        Ok(())
    } else {
        Err(Error::Cfl {
            number,
            limit: CFL_LIMIT,
        })
    }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Limited cell slopes; zero in the end cells.
fn minmod_slopes(grid: &RadialGrid, q: &[f64]) -> Vec<f64> {
    let x = grid.nodes();
    let n = q.len();
    let mut s = vec![0.0; n];
    for i in 1..n - 1 {
        let left = (q[i] - q[i - 1]) / (x[i] - x[i - 1]);
        let right = (q[i + 1] - q[i]) / (x[i + 1] - x[i]);
        s[i] = minmod(left, right);
    }
    s
}

/// Finite-volume expansion rate `r^-2 (r^2 u)_r` per cell from face velocities.
pub fn expansion_rate(grid: &RadialGrid, u_face: &[f64]) -> Vec<f64> {
    let f = grid.faces();
    let x = grid.nodes();
    let dr = grid.dr();
    (0..grid.n())
        .map(|i| {
            (f[i + 1] * f[i + 1] * u_face[i + 1] - f[i] * f[i] * u_face[i]) / (x[i] * x[i] * dr[i])
        })
        .collect()
}

/// Conservative first-order update of `rho_t + r^-2 (r^2 rho u)_r = 0`.
pub fn step_continuity(
    rho: &[f64],
    u_face: &[f64],
    dt: f64,
    grid: &RadialGrid,
) -> Result<Vec<f64>> {
    step_continuity_with(rho, u_face, dt, grid, TransportScheme::CONTINUITY)
}

/// As [`step_continuity`], optionally with minmod-reconstructed face values.
pub fn step_continuity_with(
    rho: &[f64],
    u_face: &[f64],
    dt: f64,
    grid: &RadialGrid,
    scheme: TransportScheme,
) -> Result<Vec<f64>> {
    step_continuity_centered(rho, rho, u_face, dt, grid, scheme)
}

/// Conservative update of `rho_old` with face values reconstructed from
/// `rho_eval`. Passing a time-centred `rho_eval` inside an iteration gives the
/// trapezoidal (second order in time) flux; mass is conserved either way.
pub fn step_continuity_centered(
    rho_old: &[f64],
    rho_eval: &[f64],
    u_face: &[f64],
    dt: f64,
    grid: &RadialGrid,
    scheme: TransportScheme,
) -> Result<Vec<f64>> {
    if scheme.mode != TransportMode::ConservativeFv {
        return Err(Error::argument(
            "the density equation must use the conservative finite-volume mode",
        ));
    }
    let n = grid.n();
    grid.check_len("rho", rho_old.len())?;
    grid.check_len("rho_eval", rho_eval.len())?;
    if u_face.len() != n + 1 {
        return Err(Error::argument(format!(
            "u_face has {} entries, expected {}",
            u_face.len(),
            n + 1
        )));
    }
    check_dt(dt)?;
    check_cfl(u_face, dt, grid)?;

    let f = grid.faces();
    let x = grid.nodes();
    let dr = grid.dr();
    let rho = rho_eval;
    let slopes = match scheme.limiter {
        Limiter::None => vec![0.0; n],
        Limiter::Minmod => minmod_slopes(grid, rho),
    };
    let mut flux = vec![0.0; n + 1];
    for i in 0..=n {
        let uf = u_face[i];
        if uf == 0.0 {
            continue;
        }
        let upwind = if i == 0 {
            rho[0] - 0.5 * dr[0] * slopes[0]
        } else if i == n {
            rho[n - 1] + 0.5 * dr[n - 1] * slopes[n - 1]
        } else if uf > 0.0 {
            rho[i - 1] + 0.5 * dr[i - 1] * slopes[i - 1]
        } else {
            rho[i] - 0.5 * dr[i] * slopes[i]
        };
        flux[i] = f[i] * f[i] * upwind * uf;
    }
    Ok((0..n)
        .map(|i| rho_old[i] - dt / (x[i] * x[i] * dr[i]) * (flux[i + 1] - flux[i]))
        .collect())
}

/// Increment `-dt u q_r` of the advective modes (zero-gradient ghost cells).
fn advection_increment(
    grid: &RadialGrid,
    q: &[f64],
    u: &[f64],
    dt: f64,
    scheme: TransportScheme,
) -> Result<Vec<f64>> {
    let x = grid.nodes();
    let dr = grid.dr();
    let n = q.len();
    match (scheme.mode, scheme.limiter) {
        (TransportMode::ConservativeFv, _) => Err(Error::argument(
            "conservative_fv applies to the density equation only",
        )),
        (TransportMode::UpwindFd, Limiter::None) => Ok((0..n)
            .map(|i| {
                let grad = if u[i] > 0.0 && i > 0 {
                    (q[i] - q[i - 1]) / (x[i] - x[i - 1])
                } else if u[i] < 0.0 && i + 1 < n {
                    (q[i + 1] - q[i]) / (x[i + 1] - x[i])
                } else {
                    0.0
                };
                -dt * u[i] * grad
            })
            .collect()),
        (TransportMode::UpwindFd, Limiter::Minmod) => {
            let s = minmod_slopes(grid, q);
            Ok((0..n)
                .map(|i| {
                    let grad = if u[i] > 0.0 {
                        let right = q[i] + 0.5 * dr[i] * s[i];
                        let left = if i > 0 {
                            q[i - 1] + 0.5 * dr[i - 1] * s[i - 1]
                        } else {
                            q[0]
                        };
                        (right - left) / dr[i]
                    } else if u[i] < 0.0 {
                        let left = q[i] - 0.5 * dr[i] * s[i];
                        let right = if i + 1 < n {
                            q[i + 1] - 0.5 * dr[i + 1] * s[i + 1]
                        } else {
                            q[n - 1]
                        };
                        (right - left) / dr[i]
                    } else {
                        0.0
                    };
                    -dt * u[i] * grad
                })
                .collect())
        }
        (TransportMode::Characteristics, _) => Ok((0..n)
            .map(|i| {
                if u[i] == 0.0 {
                    return 0.0;
                }
                let foot = x[i] - u[i] * dt;
                interpolate_clamped(x, q, foot) - q[i]
            })
            .collect()),
    }
}

/// Piecewise-linear interpolation, constant beyond the end nodes.
fn interpolate_clamped(x: &[f64], q: &[f64], at: f64) -> f64 {
    let n = x.len();
    if at <= x[0] {
        return q[0];
    }
    if at >= x[n - 1] {
        return q[n - 1];
    }
    let j = x.partition_point(|&xi| xi <= at).max(1);
    let w = (at - x[j - 1]) / (x[j] - x[j - 1]);
    (1.0 - w) * q[j - 1] + w * q[j]
}

/// `q_t + u q_r + coeff q (u_r + 2u/r) = 0` with first-order upwinding.
pub fn step_advected_scalar(
    q: &[f64],
    u: &[f64],
    coeff: f64,
    dt: f64,
    grid: &RadialGrid,
) -> Result<Vec<f64>> {
    step_advected_scalar_with(
        q,
        u,
        coeff,
        dt,
        grid,
        TransportScheme::UPWIND,
        OuterBc::Dirichlet,
    )
}

pub fn step_advected_scalar_with(
    q: &[f64],
    u: &[f64],
    coeff: f64,
    dt: f64,
    grid: &RadialGrid,
    scheme: TransportScheme,
    outer: OuterBc,
) -> Result<Vec<f64>> {
    grid.check_len("q", q.len())?;
    grid.check_len("u", u.len())?;
    check_dt(dt)?;
    check_cfl(u, dt, grid)?;
    let div = expansion_rate(grid, &face_velocities(grid, u, outer));
    let worst = dt * coeff.abs() * div.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if worst >= 1.0 {
        return Err(Error::PositivityLoss(worst));
    }
    let inc = advection_increment(grid, q, u, dt, scheme)?;
    let mut out: Vec<f64> = q.iter().zip(&inc).map(|(q, d)| q + d).collect();
    if coeff != 0.0 {
        for (qi, d) in out.iter_mut().zip(&div) {
            *qi *= 1.0 - dt * coeff * d;
        }
    }
    Ok(out)
}

/// `v_t + u v_r + (gamma / 2 delta) phi (v - u) = 0`: upwind advection then
/// exact relaxation `v = u + (v_adv - u) exp(-(gamma/2delta) phi dt)`.
pub fn step_effective_velocity(
    v: &[f64],
    u: &[f64],
    phi: &[f64],
    dt: f64,
    grid: &RadialGrid,
    params: &PhysParams,
) -> Result<Vec<f64>> {
    step_effective_velocity_with(v, u, phi, dt, grid, params, TransportScheme::UPWIND)
}

pub fn step_effective_velocity_with(
    v: &[f64],
    u: &[f64],
    phi: &[f64],
    dt: f64,
    grid: &RadialGrid,
    params: &PhysParams,
    scheme: TransportScheme,
) -> Result<Vec<f64>> {
    grid.check_len("v", v.len())?;
    grid.check_len("u", u.len())?;
    grid.check_len("phi", phi.len())?;
    check_dt(dt)?;
    check_cfl(u, dt, grid)?;
    let c = params.damping_coeff();
    let inc = advection_increment(grid, v, u, dt, scheme)?;
    let mut out: Vec<f64> = v.iter().zip(&inc).map(|(v, d)| v + d).collect();
    for i in 0..out.len() {
        let decay = (-c * phi[i] * dt).exp();
        out[i] = u[i] + (out[i] - u[i]) * decay;
    }
    Ok(out)
}

/// Unsplit update `q_old - dt (u q_r + coeff q (u_r + 2u/r))` with the
/// spatial terms evaluated on `q_eval`. Used with a time-centred `q_eval`
/// inside the Picard iteration; the result is checked for positivity when
/// `q_old` is positive.
#[allow(clippy::too_many_arguments)]
pub fn step_advected_scalar_centered(
    q_old: &[f64],
    q_eval: &[f64],
    u: &[f64],
    coeff: f64,
    dt: f64,
    grid: &RadialGrid,
    scheme: TransportScheme,
    outer: OuterBc,
) -> Result<Vec<f64>> {
    grid.check_len("q", q_old.len())?;
    grid.check_len("q_eval", q_eval.len())?;
    grid.check_len("u", u.len())?;
    check_dt(dt)?;
    check_cfl(u, dt, grid)?;
    let div = expansion_rate(grid, &face_velocities(grid, u, outer));
    let worst = dt * coeff.abs() * div.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if worst >= 1.0 {
        return Err(Error::PositivityLoss(worst));
    }
    let inc = advection_increment(grid, q_eval, u, dt, scheme)?;
    let out: Vec<f64> = (0..q_old.len())
        .map(|i| q_old[i] + inc[i] - dt * coeff * q_eval[i] * div[i])
        .collect();
    if q_old.iter().all(|&q| q > 0.0) {
        if let Some(i) = out.iter().position(|&q| !(q > 0.0)) {
            return Err(Error::PositivityLoss(out[i]));
        }
    }
    Ok(out)
}

/// Exponential-integrator form of the `v` update: with `y = v - u`,
/// `y_new = y_old e^{-k dt} + s (1 - e^{-k dt}) / k`, `k = (gamma/2delta) phi`
/// and the advective rate `s = -u v_r` evaluated on `v_eval`. Exact when
/// `u = 0`; reduces to pure advection when `phi = 0`.
#[allow(clippy::too_many_arguments)]
pub fn step_effective_velocity_centered(
    v_old: &[f64],
    v_eval: &[f64],
    u: &[f64],
    phi: &[f64],
    dt: f64,
    grid: &RadialGrid,
    params: &PhysParams,
    scheme: TransportScheme,
) -> Result<Vec<f64>> {
    grid.check_len("v", v_old.len())?;
    grid.check_len("v_eval", v_eval.len())?;
    grid.check_len("u", u.len())?;
    grid.check_len("phi", phi.len())?;
    check_dt(dt)?;
    check_cfl(u, dt, grid)?;
    let c = params.damping_coeff();
    let inc = advection_increment(grid, v_eval, u, dt, scheme)?;
    Ok((0..v_old.len())
        .map(|i| {
            let k = c * phi[i] * dt;
            let decay = (-k).exp();
            // (1 - e^{-k}) / k, with the series near k = 0
            let phi1 = if k > 1e-8 {
                -(-k).exp_m1() / k
            } else {
                1.0 - 0.5 * k
            };
            u[i] + (v_old[i] - u[i]) * decay + inc[i] * phi1
        })
        .collect())
}

/// Boundary data for the spherical diffusion operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryValue {
    Dirichlet(f64),
    /// Zero radial gradient.
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionBc {
    pub inner: f64,
    pub outer: BoundaryValue,
}

impl DiffusionBc {
    pub fn homogeneous(outer: OuterBc) -> Self {
        Self {
            inner: 0.0,
            outer: match outer {
                OuterBc::Dirichlet => BoundaryValue::Dirichlet(0.0),
                OuterBc::Neumann => BoundaryValue::Neumann,
            },
        }
    }
}

/// Tridiagonal form `L u = A u + b` of `(u_r + 2u/r)_r = (r^-2 (r^2 u)_r)_r`.
///
/// The inner flux `r^-2 (r^2 u)_r` at a face is the difference quotient of
/// `r^2 u` between neighbouring nodes, so `u = c / r^2` lies in the discrete
/// kernel exactly. Returns `(lower, diag, upper, b)`.
pub fn spherical_operator(
    grid: &RadialGrid,
    bc: DiffusionBc,
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let x = grid.nodes();
    let f = grid.faces();
    let dr = grid.dr();
    let n = x.len();
    // w_j = alpha_j * (x_j^2 u_j - x_{j-1}^2 u_{j-1}) at interior face j
    let interior = |j: usize| 1.0 / (f[j] * f[j] * (x[j] - x[j - 1]));

    let mut lower = vec![0.0; n - 1];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n - 1];
    let mut b = vec![0.0; n];

    for i in 0..n {
        let inv = 1.0 / dr[i];
        // right face i + 1
        if i + 1 < n {
            let al = interior(i + 1);
            upper[i] += inv * al * x[i + 1] * x[i + 1];
            diag[i] -= inv * al * x[i] * x[i];
        } else {
            let rm = f[n];
            match bc.outer {
                BoundaryValue::Dirichlet(val) => {
                    let al = 1.0 / (rm * rm * (rm - x[i]));
                    b[i] += inv * al * rm * rm * val;
                    diag[i] -= inv * al * x[i] * x[i];
                }
                BoundaryValue::Neumann => {
                    diag[i] += inv * 2.0 / rm;
                }
            }
        }
        // left face i
        if i > 0 {
            let al = interior(i);
            diag[i] -= inv * al * x[i] * x[i];
            lower[i - 1] += inv * al * x[i - 1] * x[i - 1];
        } else {
            let a = f[0];
            let al = 1.0 / (a * a * (x[0] - a));
            diag[i] -= inv * al * x[0] * x[0];
            b[i] += inv * al * a * a * bc.inner;
        }
    }
    (lower, diag, upper, b)
}

/// Theta-scheme for `u_t = kappa (u_r + 2u/r)_r + source` with
/// node-wise coefficient `kappa >= 0`; one tridiagonal solve.
pub fn step_diffusion(
    u_old: &[f64],
    kappa: &[f64],
    dt: f64,
    grid: &RadialGrid,
    theta: f64,
    bc: DiffusionBc,
    source: &[f64],
) -> Result<Vec<f64>> {
    grid.check_len("u", u_old.len())?;
    grid.check_len("kappa", kappa.len())?;
    grid.check_len("source", source.len())?;
    check_dt(dt)?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::argument(format!(
            "theta must lie in [0, 1], got {theta}"
        )));
    }
    if let Some(index) = kappa.iter().position(|k| !(*k >= 0.0) || !k.is_finite()) {
        return Err(Error::Positivity {
            field: "diffusion coefficient",
            index,
            value: kappa[index],
        });
    }
    let n = grid.n();
    let (lower, diag, upper, b) = spherical_operator(grid, bc);

    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let mut au = diag[i] * u_old[i];
        if i > 0 {
            au += lower[i - 1] * u_old[i - 1];
        }
        if i + 1 < n {
            au += upper[i] * u_old[i + 1];
        }
        rhs[i] = u_old[i] + dt * (kappa[i] * ((1.0 - theta) * au + b[i]) + source[i]);
    }
    let s = dt * theta;
    let m_lower: Vec<f64> = (1..n).map(|i| -s * kappa[i] * lower[i - 1]).collect();
    let m_diag: Vec<f64> = (0..n).map(|i| 1.0 - s * kappa[i] * diag[i]).collect();
    let m_upper: Vec<f64> = (0..n - 1).map(|i| -s * kappa[i] * upper[i]).collect();
    solve_tridiagonal(&m_lower, &m_diag, &m_upper, &rhs)
}

/// Speed at which the explicit part of the momentum equation transports `u`:
/// `(1 + delta) U - delta v`.
pub fn momentum_advection_speed(u_frozen: &[f64], v: &[f64], delta: f64) -> Vec<f64> {
    u_frozen
        .iter()
        .zip(v)
        .map(|(u, v)| (1.0 + delta) * u - delta * v)
        .collect()
}

/// Explicit right-hand side of the momentum equation at frozen velocity `U`:
/// `-((1 + delta) U - delta v) U_r - (gamma/2delta) phi (v - U) + (delta - 1)(v - U)(2/r) U`.
///
/// The `delta (v - U) U_r` source is folded into the upwinded advection
/// speed, so the grouping equals the reformulated one term for term.
pub fn momentum_explicit_terms(
    coeffs: &ReformState,
    u_frozen: &[f64],
    grid: &RadialGrid,
    params: &PhysParams,
    outer: OuterBc,
    advection: MomentumAdvection,
) -> Vec<f64> {
    let delta = params.delta();
    let c = params.damping_coeff();
    let x = grid.nodes();
    let a = grid.a();
    let rm = grid.r_max();
    let n = x.len();
    let w = momentum_advection_speed(u_frozen, &coeffs.v, delta);
    (0..n)
        .map(|i| {
            let uu = u_frozen[i];
            // ghost values mirror u across the boundary faces
            let left = if i > 0 {
                (u_frozen[i - 1], x[i - 1])
            } else {
                (-uu, 2.0 * a - x[0])
            };
            let right = if i + 1 < n {
                (u_frozen[i + 1], x[i + 1])
            } else {
                match outer {
                    OuterBc::Dirichlet => (-uu, 2.0 * rm - x[i]),
                    OuterBc::Neumann => (uu, 2.0 * rm - x[i]),
                }
            };
            let grad = match advection {
                MomentumAdvection::Central => (right.0 - left.0) / (right.1 - left.1),
                MomentumAdvection::Upwind if w[i] > 0.0 => (uu - left.0) / (x[i] - left.1),
                MomentumAdvection::Upwind if w[i] < 0.0 => (right.0 - uu) / (right.1 - x[i]),
                MomentumAdvection::Upwind => 0.0,
            };
            let slip = coeffs.v[i] - uu;
            -w[i] * grad - c * coeffs.phi[i] * slip + (delta - 1.0) * slip * 2.0 / x[i] * uu
        })
        .collect()
}

/// One momentum update using `state` both as the old velocity and as the
/// frozen velocity of the explicit terms.
pub fn step_momentum(
    state: &ReformState,
    dt: f64,
    grid: &RadialGrid,
    params: &PhysParams,
    cfg: MomentumSolveConfig,
) -> Result<Vec<f64>> {
    step_momentum_frozen(state, &state.u, &state.u, dt, grid, params, cfg)
}

/// Momentum update from `u_old` with coefficients `h`, `phi`, `v` taken from
/// `coeffs` and explicit terms evaluated at `u_frozen`.
pub fn step_momentum_frozen(
    coeffs: &ReformState,
    u_old: &[f64],
    u_frozen: &[f64],
    dt: f64,
    grid: &RadialGrid,
    params: &PhysParams,
    cfg: MomentumSolveConfig,
) -> Result<Vec<f64>> {
    grid.check_len("u_old", u_old.len())?;
    grid.check_len("u_frozen", u_frozen.len())?;
    grid.check_len("h", coeffs.h.len())?;
    check_dt(dt)?;
    if let Some(index) = coeffs.h.iter().position(|&h| !(h > 0.0)) {
        return Err(Error::Positivity {
            field: "h",
            index,
            value: coeffs.h[index],
        });
    }
    let n = grid.n();
    let source = if cfg.explicit_terms {
        let w = momentum_advection_speed(u_frozen, &coeffs.v, params.delta());
        check_cfl(&w, dt, grid)?;
        momentum_explicit_terms(coeffs, u_frozen, grid, params, cfg.outer_bc, cfg.advection)
    } else {
        vec![0.0; n]
    };
    let kappa: Vec<f64> = coeffs.h.iter().map(|h| params.delta() * h).collect();
    step_diffusion(
        u_old,
        &kappa,
        dt,
        grid,
        cfg.theta,
        DiffusionBc::homogeneous(cfg.outer_bc),
        &source,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_grid, PrimitiveState};
    use crate::transform::to_reformulated;

    fn params() -> PhysParams {
        PhysParams::new(1.2, 0.8, 1.0, 0.0, 0.0).unwrap()
    }

    fn mass(grid: &RadialGrid, rho: &[f64]) -> f64 {
        let x = grid.nodes();
        grid.integrate(|i| x[i] * x[i] * rho[i])
    }

    #[test]
    fn zero_velocity_leaves_density_bit_exact() {
        let g = make_grid(1.0, 4.0, 40, 1.5).unwrap();
        let rho = g.sample(|r| 1.0 + (r * 3.0).sin() * 0.5);
        let out = step_continuity(&rho, &vec![0.0; 41], 0.1, &g).unwrap();
        assert_eq!(out, rho);
        let lim = step_continuity_with(
            &rho,
            &vec![0.0; 41],
            0.1,
            &g,
            TransportScheme::new(TransportMode::ConservativeFv, Limiter::Minmod),
        )
        .unwrap();
        assert_eq!(lim, rho);
    }

    #[test]
    fn continuity_conserves_mass() {
        let g = make_grid(1.0, 4.0, 64, 2.0).unwrap();
        let rho = g.sample(|r| 0.2 + (-(r - 2.0) * (r - 2.0) * 4.0).exp());
        let u = g.sample(|r| (r - 1.0) * (4.0 - r) * (r * 2.0).cos());
        let uf = face_velocities(&g, &u, OuterBc::Dirichlet);
        let m0 = mass(&g, &rho);
        let mut cur = rho;
        for _ in 0..50 {
            cur = step_continuity(&cur, &uf, 0.01, &g).unwrap();
        }
        assert!((mass(&g, &cur) - m0).abs() <= 1e-13 * m0);
    }

    #[test]
    fn continuity_rejects_cfl_and_wrong_mode() {
        let g = make_grid(1.0, 2.0, 10, 1.0).unwrap();
        let uf = vec![1.0; 11];
        assert!(matches!(
            step_continuity(&[1.0; 10], &uf, 0.5, &g),
            Err(Error::Cfl { .. })
        ));
        assert!(step_continuity_with(&[1.0; 10], &uf, 0.01, &g, TransportScheme::UPWIND).is_err());
        assert!(step_continuity(&[1.0; 10], &uf[1..], 0.01, &g).is_err());
    }

    #[test]
    fn advected_scalar_trivial_cases() {
        let g = make_grid(1.0, 3.0, 32, 1.0).unwrap();
        let q = g.sample(|r| r.exp());
        assert_eq!(
            step_advected_scalar(&q, &vec![0.0; 32], -0.2, 0.1, &g).unwrap(),
            q
        );
        let u = g.sample(|r| (r - 1.0) * (3.0 - r));
        for mode in [TransportMode::UpwindFd, TransportMode::Characteristics] {
            for limiter in [Limiter::None, Limiter::Minmod] {
                let out = step_advected_scalar_with(
                    &vec![2.5; 32],
                    &u,
                    0.0,
                    0.01,
                    &g,
                    TransportScheme::new(mode, limiter),
                    OuterBc::Dirichlet,
                )
                .unwrap();
                assert!(out.iter().all(|&x| x == 2.5), "{mode:?} {limiter:?}");
            }
        }
    }

    #[test]
    fn stretching_guard() {
        let g = make_grid(1.0, 2.0, 20, 1.0).unwrap();
        let u = g.sample(|r| 5.0 * (r - 1.0) * (2.0 - r));
        let q = vec![1.0; 20];
        assert!(matches!(
            step_advected_scalar(&q, &u, 400.0, 0.01, &g),
            Err(Error::PositivityLoss(_))
        ));
        let out = step_advected_scalar(&q, &u, -0.2, 0.01, &g).unwrap();
        assert!(out.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn damping_is_exact() {
        let g = make_grid(1.0, 3.0, 16, 1.0).unwrap();
        let p = PhysParams::new(1.0, 0.8, 1.0, 0.0, 1.5).unwrap();
        let v0 = g.sample(|r| r.sin());
        let dt = 0.3;
        let out = step_effective_velocity(&v0, &[0.0; 16], &[1.0; 16], dt, &g, &p).unwrap();
        for (v, v0) in out.iter().zip(&v0) {
            assert!((v - v0 * (-dt / 1.6_f64).exp()).abs() < 1e-12);
        }
        // vacuum limit: no relaxation
        let out = step_effective_velocity(&v0, &[0.0; 16], &[0.0; 16], dt, &g, &p).unwrap();
        assert_eq!(out, v0);
        // v = u = const is a fixed point
        let c = vec![0.37; 16];
        let out = step_effective_velocity(&c, &c, &[3.0; 16], 0.01, &g, &p).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn operator_kernel_and_linear_profile() {
        let g = make_grid(1.0, 3.0, 40, 1.7).unwrap();
        // u = 1/r^2 with matching Dirichlet data is annihilated exactly
        let bc = DiffusionBc {
            inner: 1.0,
            outer: BoundaryValue::Dirichlet(1.0 / 9.0),
        };
        let (lo, d, up, b) = spherical_operator(&g, bc);
        let u = g.sample(|r| 1.0 / (r * r));
        for i in 0..40 {
            let mut lu = d[i] * u[i] + b[i];
            if i > 0 {
                lu += lo[i - 1] * u[i - 1];
            }
            if i < 39 {
                lu += up[i] * u[i + 1];
            }
            assert!(lu.abs() < 1e-9, "i={i} {lu}");
        }
        // u = 1/r^2 is steady under the implicit solve
        let out = step_diffusion(&u, &vec![1.3; 40], 0.05, &g, 0.5, bc, &vec![0.0; 40]).unwrap();
        for (a, b) in out.iter().zip(&u) {
            assert!((a - b).abs() < 1e-12);
        }
        // u = r: u_r + 2u/r = 3, so the operator vanishes up to O(dr^2) inside
        let interior_residual = |n: usize| {
            let g = make_grid(1.0, 3.0, n, 1.0).unwrap();
            let bc = DiffusionBc {
                inner: 1.0,
                outer: BoundaryValue::Dirichlet(3.0),
            };
            let (lo, d, up, b) = spherical_operator(&g, bc);
            let u = g.nodes().to_vec();
            (1..n - 1)
                .map(|i| (lo[i - 1] * u[i - 1] + d[i] * u[i] + up[i] * u[i + 1] + b[i]).abs())
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (interior_residual(40), interior_residual(80));
        assert!(coarse < 1e-2 && coarse / fine > 3.5, "{coarse} {fine}");
    }

    #[test]
    fn steady_state_momentum() {
        let g = make_grid(1.0, 4.0, 32, 1.0).unwrap();
        let p = params();
        let s = PrimitiveState::new(&g, 0.0, vec![0.6; 32], vec![0.0; 32]).unwrap();
        let rf = to_reformulated(&s, &p, &g).unwrap();
        let u = step_momentum(&rf, 0.05, &g, &p, MomentumSolveConfig::default()).unwrap();
        assert!(u.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn momentum_rejects_bad_inputs() {
        let g = make_grid(1.0, 4.0, 16, 1.0).unwrap();
        let p = params();
        let s =
            PrimitiveState::new(&g, 0.0, vec![0.6; 16], g.sample(|r| 40.0 * (r - 1.0))).unwrap();
        let mut rf = to_reformulated(&s, &p, &g).unwrap();
        let cfg = MomentumSolveConfig::default();
        assert!(matches!(
            step_momentum(&rf, 0.1, &g, &p, cfg),
            Err(Error::Cfl { .. })
        ));
        rf.h[2] = 0.0;
        assert!(matches!(
            step_momentum(&rf, 0.001, &g, &p, cfg),
            Err(Error::Positivity { field: "h", .. })
        ));
        assert!(MomentumSolveConfig::new(0.4, OuterBc::Dirichlet).is_err());
        assert!(MomentumSolveConfig::new(1.0, OuterBc::Neumann).is_ok());
    }

    #[test]
    fn face_velocity_boundaries() {
        let g = make_grid(1.0, 2.0, 8, 1.0).unwrap();
        let u = vec![1.0; 8];
        let d = face_velocities(&g, &u, OuterBc::Dirichlet);
        assert_eq!(d[0], 0.0);
        assert_eq!(d[8], 0.0);
        assert!(d[1..8].iter().all(|&x| (x - 1.0).abs() < 1e-15));
        assert_eq!(face_velocities(&g, &u, OuterBc::Neumann)[8], 1.0);
    }

    #[test]
    fn kernels_are_deterministic() {
        let g = make_grid(1.0, 4.0, 48, 1.3).unwrap();
        let p = params();
        let s = PrimitiveState::new(
            &g,
            0.0,
            g.sample(|r| 0.1 + (-(r - 2.0) * (r - 2.0)).exp()),
            g.sample(|r| 0.1 * (r - 1.0) * (4.0 - r)),
        )
        .unwrap();
        let rf = to_reformulated(&s, &p, &g).unwrap();
        let run = || step_momentum(&rf, 1e-3, &g, &p, MomentumSolveConfig::default()).unwrap();
        assert_eq!(run(), run());
    }
}
