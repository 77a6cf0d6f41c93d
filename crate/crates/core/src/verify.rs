//! Solver-independent oracles: closed-form field descriptors, manufactured
//! sources, a characteristics-based transport reference and convergence
//! order estimation.

use std::cell::Cell;
use std::f64::consts::PI;

use ode_solvers::dop_shared::OutputType;
use ode_solvers::{Dopri5, System, Vector2};
use rayon::prelude::*;

use crate::domain::{make_grid, RadialGrid};
use crate::error::{Error, Result};
use crate::kernels::{
    face_velocities, step_continuity, step_diffusion, BoundaryValue, DiffusionBc, OuterBc,
};
use crate::params::PhysParams;

/// A smooth field `f(r, t)` with closed-form derivatives.
pub trait RadialField: Sync {
    fn value(&self, r: f64, t: f64) -> f64;
    fn dr(&self, r: f64, t: f64) -> f64;
    fn drr(&self, r: f64, t: f64) -> f64;
    fn dt(&self, r: f64, t: f64) -> f64;

    fn sample(&self, grid: &RadialGrid, t: f64) -> Vec<f64> {
        grid.sample(|r| self.value(r, t))
    }
}

/// Radial shapes with analytic first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `amp e^{-rate r}`
    Exp {
        amp: f64,
        rate: f64,
    },
    /// `amp exp(-(r - center)^2 / width^2)`
    Gaussian {
        amp: f64,
        center: f64,
        width: f64,
    },
    /// `amp sin(pi (r - lo) / (hi - lo))`, vanishing at `lo` and `hi`.
    SineBubble {
        amp: f64,
        lo: f64,
        hi: f64,
    },
    /// `c / r^2`
    InverseSquare(f64),
}

impl Profile {
    /// `(P, P', P'')` at `r`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        match *self {
            Profile::Constant(c) => (c, 0.0, 0.0),
            Profile::Exp { amp, rate } => {
                let e = amp * (-rate * r).exp();
                (e, -rate * e, rate * rate * e)
            }
            Profile::Gaussian { amp, center, width } => {
                let z = (r - center) / width;
                let g = amp * (-z * z).exp();
                let d = -2.0 * z / width * g;
                let dd = (4.0 * z * z - 2.0) / (width * width) * g;
                (g, d, dd)
            }
            Profile::SineBubble { amp, lo, hi } => {
                let k = PI / (hi - lo);
                let arg = k * (r - lo);
                (
                    amp * arg.sin(),
                    amp * k * arg.cos(),
                    -amp * k * k * arg.sin(),
                )
            }
            Profile::InverseSquare(c) => (
                c / (r * r),
                -2.0 * c / (r * r * r),
                6.0 * c / (r * r * r * r),
            ),
        }
    }
}

/// Multiplicative time dependence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeFactor {
    Steady,
    /// `1 + eps sin(omega t)`
    Oscillating {
        eps: f64,
        omega: f64,
    },
    /// `e^{-rate t}`
    Decaying {
        rate: f64,
    },
}

impl TimeFactor {
    /// `(T, T')` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            TimeFactor::Steady => (1.0, 0.0),
            TimeFactor::Oscillating { eps, omega } => (
                1.0 + eps * (omega * t).sin(),
                eps * omega * (omega * t).cos(),
            ),
            TimeFactor::Decaying { rate } => {
                let e = (-rate * t).exp();
                (e, -rate * e)
            }
        }
    }
}

/// `offset + T(t) P(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableField {
    pub offset: f64,
    pub profile: Profile,
    pub time: TimeFactor,
}

impl SeparableField {
    pub fn new(offset: f64, profile: Profile, time: TimeFactor) -> Self {
        Self {
            offset,
            profile,
            time,
        }
    }

    pub fn steady(profile: Profile) -> Self {
        Self::new(0.0, profile, TimeFactor::Steady)
    }
}

impl RadialField for SeparableField {
    fn value(&self, r: f64, t: f64) -> f64 {
        self.offset + self.time.eval(t).0 * self.profile.eval(r).0
    }
    fn dr(&self, r: f64, t: f64) -> f64 {
        self.time.eval(t).0 * self.profile.eval(r).1
    }
    fn drr(&self, r: f64, t: f64) -> f64 {
        self.time.eval(t).0 * self.profile.eval(r).2
    }
    fn dt(&self, r: f64, t: f64) -> f64 {
        self.time.eval(t).1 * self.profile.eval(r).0
    }
}

/// `u_r + 2u/r` of a descriptor.
fn expansion(u: &dyn RadialField, r: f64, t: f64) -> f64 {
    u.dr(r, t) + 2.0 * u.value(r, t) / r
}

/// `(u_r + 2u/r)_r = u_rr + 2u_r/r - 2u/r^2`.
fn expansion_dr(u: &dyn RadialField, r: f64, t: f64) -> f64 {
    u.drr(r, t) + 2.0 * u.dr(r, t) / r - 2.0 * u.value(r, t) / (r * r)
}

/// Residuals of the continuity equation and of the conservative momentum
/// equation for a manufactured pair `(rho_m, u_m)` at the nodes of `grid`.
pub fn mms_sources(
    rho_m: &dyn RadialField,
    u_m: &dyn RadialField,
    grid: &RadialGrid,
    params: &PhysParams,
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let gamma = params.gamma();
    let delta = params.delta();
    let mut s_rho = Vec::with_capacity(grid.n());
    let mut s_mom = Vec::with_capacity(grid.n());
    for (index, &r) in grid.nodes().iter().enumerate() {
        let rho = rho_m.value(r, t);
        if !(rho > 0.0) {
            return Err(Error::Positivity {
                field: "manufactured rho",
                index,
                value: rho,
            });
        }
        let (rho_r, rho_t) = (rho_m.dr(r, t), rho_m.dt(r, t));
        let (u, u_r, u_t) = (u_m.value(r, t), u_m.dr(r, t), u_m.dt(r, t));
        let div = expansion(u_m, r, t);
        s_rho.push(rho_t + rho_r * u + rho * div);

        // (rho u)_t + r^-2 (r^2 rho u^2)_r + P_r
        let m_t = rho_t * u + rho * u_t;
        let flux = rho_r * u * u + 2.0 * rho * u * u_r + 2.0 * rho * u * u / r;
        let p_r = gamma * rho.powf(gamma - 1.0) * rho_r;
        let visc = 2.0 * delta * rho.powf(delta) * expansion_dr(u_m, r, t)
            + 2.0 * delta * rho.powf(delta - 1.0) * rho_r * u_r
            + 2.0 * delta * (delta - 1.0) * rho.powf(delta - 1.0) * rho_r * div;
        s_mom.push(m_t + flux + p_r - visc);
    }
    Ok((s_rho, s_mom))
}

/// Source of the velocity form `u_t + ... = ...` obtained from the
/// conservative residuals: `(S_m - u S_rho) / rho`.
pub fn velocity_source(rho: &[f64], u: &[f64], s_rho: &[f64], s_mom: &[f64]) -> Vec<f64> {
    (0..rho.len())
        .map(|i| (s_mom[i] - u[i] * s_rho[i]) / rho[i])
        .collect()
}

/// Source making `u_m` an exact solution of
/// `u_t = delta h (u_r + 2u/r)_r + S` with `h = 2 rho_m^(delta - 1)`.
pub fn diffusion_source(
    rho_m: &dyn RadialField,
    u_m: &dyn RadialField,
    grid: &RadialGrid,
    params: &PhysParams,
    t: f64,
) -> Result<Vec<f64>> {
    let delta = params.delta();
    grid.nodes()
        .iter()
        .enumerate()
        .map(|(index, &r)| {
            let rho = rho_m.value(r, t);
            if !(rho > 0.0) {
                return Err(Error::Positivity {
                    field: "manufactured rho",
                    index,
                    value: rho,
                });
            }
            let h = 2.0 * rho.powf(delta - 1.0);
            Ok(u_m.dt(r, t) - delta * h * expansion_dr(u_m, r, t))
        })
        .collect()
}

struct Characteristic<'a> {
    u: &'a dyn RadialField,
    t: f64,
    lo: &'a Cell<f64>,
    hi: &'a Cell<f64>,
}

type State2 = Vector2<f64>;

impl System<f64, State2> for Characteristic<'_> {
    // tau = t - s runs forward; y = (R, accumulated expansion rate)
    fn system(&self, tau: f64, y: &State2, dy: &mut State2) {
        let s = self.t - tau;
        let r = y[0];
        self.lo.set(self.lo.get().min(r));
        self.hi.set(self.hi.get().max(r));
        dy[0] = -self.u.value(r, s);
        dy[1] = expansion(self.u, r, s);
    }
}

/// Solution of `rho_t + r^-2 (r^2 rho u)_r = 0` at time `t` for a prescribed
/// velocity, by integrating characteristics backward to `t = 0`:
/// `rho(r, t) = rho0(R(0)) exp(-int_0^t (u_r + 2u/r)(R(s), s) ds)`.
///
/// Paths must stay inside `[lo, hi]`.
pub fn characteristics_oracle(
    rho0: &dyn RadialField,
    u: &dyn RadialField,
    t: f64,
    r_query: &[f64],
    lo: f64,
    hi: f64,
) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::argument(format!(
            "oracle time must be >= 0, got {t}"
        )));
    }
    r_query
        .iter()
        .map(|&r| {
            if t == 0.0 {
                return Ok(rho0.value(r, 0.0));
            }
            let (path_lo, path_hi) = (Cell::new(r), Cell::new(r));
            let sys = Characteristic {
                u,
                t,
                lo: &path_lo,
                hi: &path_hi,
            };
            let mut solver = Dopri5::new(sys, 0.0, t, t, State2::new(r, 0.0), 1e-10, 1e-10);
            solver.set_output(OutputType::Sparse);
            solver
                .integrate()
                .map_err(|e| Error::argument(format!("characteristic integration failed: {e}")))?;
            let end = *solver
                .results()
                .get()
                .1
                .last()
                .expect("solver records the end point");
            // every stage evaluation is tracked, so an overshooting trial step
            // also counts as an exit
            let (path_lo, path_hi) = (path_lo.get().min(end[0]), path_hi.get().max(end[0]));
            let exit = |x: f64| Error::CharacteristicExit {
                r_query: r,
                r_exit: x,
            };
            if path_lo < lo {
                return Err(exit(path_lo));
            }
            if path_hi > hi {
                return Err(exit(path_hi));
            }
            Ok(rho0.value(end[0], 0.0) * (-end[1]).exp())
        })
        .collect()
}

/// Least-squares slope of `log(error)` against `log(spacing)`.
pub fn convergence_order(errors: &[f64], spacings: &[f64]) -> Result<f64> {
    if errors.len() != spacings.len() || errors.len() < 3 {
        return Err(Error::argument(
            "need at least three (error, spacing) pairs",
        ));
    }
    if errors
        .iter()
        .chain(spacings)
        .any(|&x| !(x > 0.0) || !x.is_finite())
    {
        return Err(Error::argument(
            "errors and spacings must be positive and finite",
        ));
    }
    if spacings.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::argument("spacings must be strictly decreasing"));
    }
    let xs: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Plain discrete `L^2(dr)` distance between two nodal fields.
pub fn l2_error(grid: &RadialGrid, a: &[f64], b: &[f64]) -> f64 {
    grid.integrate(|i| (a[i] - b[i]) * (a[i] - b[i])).sqrt()
}

/// Manufactured problems with a declared minimum convergence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MmsPreset {
    /// Continuity equation with a prescribed velocity and a manufactured
    /// time-dependent density (first-order upwind).
    Transport,
    /// Degenerate momentum diffusion alone, Crank-Nicolson in time.
    Diffusion,
}

impl MmsPreset {
    pub fn min_slope(&self) -> f64 {
        match self {
            MmsPreset::Transport => 0.8,
            MmsPreset::Diffusion => 1.8,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MmsPreset::Transport => "transport",
            MmsPreset::Diffusion => "diffusion",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "transport" => Ok(MmsPreset::Transport),
            "diffusion" => Ok(MmsPreset::Diffusion),
            other => Err(Error::argument(format!(
                "unknown manufactured preset {other:?} (expected transport or diffusion)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsRow {
    pub n: usize,
    pub dr: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsReport {
    pub preset: MmsPreset,
    pub rows: Vec<MmsRow>,
    pub slope: f64,
    pub min_slope: f64,
}

impl MmsReport {
    pub fn passed(&self) -> bool {
        self.slope >= self.min_slope
    }
}

/// Study setup shared by both presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsSetup {
    pub a: f64,
    pub r_max: f64,
    pub t_end: f64,
    /// Multiplies the discrete operator; `1` is the correct scheme, anything
    /// else is a deliberately inconsistent stencil for negative controls.
    pub operator_scale: f64,
}

impl Default for MmsSetup {
    fn default() -> Self {
        Self {
            a: 1.0,
            r_max: 3.0,
            t_end: 0.5,
            operator_scale: 1.0,
        }
    }
}

impl MmsSetup {
    fn transport_fields(&self) -> (SeparableField, SeparableField) {
        let mid = 0.5 * (self.a + self.r_max);
        let width = 0.15 * (self.r_max - self.a);
        let rho = SeparableField::new(
            1.0,
            Profile::Gaussian {
                amp: 0.5,
                center: mid,
                width,
            },
            TimeFactor::Oscillating {
                eps: 0.3,
                omega: 2.0,
            },
        );
        let u = SeparableField::steady(Profile::SineBubble {
            amp: 0.4,
            lo: self.a,
            hi: self.r_max,
        });
        (rho, u)
    }

    fn diffusion_fields(&self) -> (SeparableField, SeparableField) {
        let mid = 0.5 * (self.a + self.r_max);
        let rho = SeparableField::new(
            0.3,
            Profile::Gaussian {
                amp: 1.0,
                center: mid,
                width: 0.3 * (self.r_max - self.a),
            },
            TimeFactor::Steady,
        );
        let u = SeparableField::new(
            0.0,
            Profile::SineBubble {
                amp: 0.5,
                lo: self.a,
                hi: self.r_max,
            },
            TimeFactor::Decaying { rate: 1.0 },
        );
        (rho, u)
    }
}

fn transport_error(setup: &MmsSetup, n: usize, params: &PhysParams) -> Result<MmsRow> {
    let grid = make_grid(setup.a, setup.r_max, n, 1.0)?;
    let (rho_m, u_m) = setup.transport_fields();
    let u = u_m.sample(&grid, 0.0);
    let u_face = face_velocities(&grid, &u, OuterBc::Dirichlet);
    let umax = u_face.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let steps = (setup.t_end * umax / (0.5 * grid.min_dr())).ceil().max(1.0) as usize;
    let dt = setup.t_end / steps as f64;
    let mut rho = rho_m.sample(&grid, 0.0);
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let (s_rho, _) = mms_sources(&rho_m, &u_m, &grid, params, t_mid)?;
        let mut next = step_continuity(&rho, &u_face, dt, &grid)?;
        for i in 0..n {
            // operator_scale != 1 corrupts the transport increment
            next[i] = rho[i] + setup.operator_scale * (next[i] - rho[i]) + dt * s_rho[i];
        }
        rho = next;
    }
    let exact = rho_m.sample(&grid, setup.t_end);
    Ok(MmsRow {
        n,
        dr: grid.max_dr(),
        error: l2_error(&grid, &rho, &exact),
    })
}

fn diffusion_error(setup: &MmsSetup, n: usize, params: &PhysParams) -> Result<MmsRow> {
    let grid = make_grid(setup.a, setup.r_max, n, 1.0)?;
    let (rho_m, u_m) = setup.diffusion_fields();
    let delta = params.delta();
    let kappa: Vec<f64> = rho_m
        .sample(&grid, 0.0)
        .iter()
        .map(|&r| setup.operator_scale * delta * 2.0 * r.powf(delta - 1.0))
        .collect();
    let steps = (setup.t_end / grid.max_dr()).ceil() as usize;
    let dt = setup.t_end / steps as f64;
    let bc = DiffusionBc {
        inner: 0.0,
        outer: BoundaryValue::Dirichlet(0.0),
    };
    let mut u = u_m.sample(&grid, 0.0);
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let s = diffusion_source(&rho_m, &u_m, &grid, params, t_mid)?;
        u = step_diffusion(&u, &kappa, dt, &grid, 0.5, bc, &s)?;
    }
    let exact = u_m.sample(&grid, setup.t_end);
    Ok(MmsRow {
        n,
        dr: grid.max_dr(),
        error: l2_error(&grid, &u, &exact),
    })
}

/// Runs one manufactured problem on every mesh of `ladder` (coarse to fine).
pub fn mms_study(
    preset: MmsPreset,
    ladder: &[usize],
    setup: &MmsSetup,
    params: &PhysParams,
) -> Result<MmsReport> {
    if ladder.len() < 3 || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::argument(
            "the refinement ladder needs at least three increasing sizes",
        ));
    }
    let rows = ladder
        .par_iter()
        .map(|&n| match preset {
            MmsPreset::Transport => transport_error(setup, n, params),
            MmsPreset::Diffusion => diffusion_error(setup, n, params),
        })
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let spacings: Vec<f64> = rows.iter().map(|r| r.dr).collect();
    Ok(MmsReport {
        preset,
        slope: convergence_order(&errors, &spacings)?,
        min_slope: preset.min_slope(),
        rows,
    })
}

/// Grid solution of the continuity equation (no limiter) against
/// [`characteristics_oracle`] for `u = 0.3 sin(pi (r - a) / (r_max - a))`.
/// The initial density is a smooth bump; `t_end` is short enough that no
/// characteristic leaves the domain. Returns one row per mesh and the slope.
pub fn transport_oracle_study(
    ladder: &[usize],
    a: f64,
    r_max: f64,
    t_end: f64,
) -> Result<(Vec<MmsRow>, f64)> {
    let u_m = SeparableField::steady(Profile::SineBubble {
        amp: 0.3,
        lo: a,
        hi: r_max,
    });
    let rho0 = SeparableField::new(
        0.5,
        Profile::Gaussian {
            amp: 1.0,
            center: 0.5 * (a + r_max),
            width: 0.2 * (r_max - a),
        },
        TimeFactor::Steady,
    );
    let rows = ladder
        .par_iter()
        .map(|&n| {
            let grid = make_grid(a, r_max, n, 1.0)?;
            let u = u_m.sample(&grid, 0.0);
            let u_face = face_velocities(&grid, &u, OuterBc::Dirichlet);
            let umax = u_face.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let steps = (t_end * umax / (0.5 * grid.min_dr())).ceil().max(1.0) as usize;
            let dt = t_end / steps as f64;
            let mut rho = rho0.sample(&grid, 0.0);
            for _ in 0..steps {
                rho = step_continuity(&rho, &u_face, dt, &grid)?;
            }
            let exact = characteristics_oracle(&rho0, &u_m, t_end, grid.nodes(), a, r_max)?;
            Ok(MmsRow {
                n,
                dr: grid.max_dr(),
                error: l2_error(&grid, &rho, &exact),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let spacings: Vec<f64> = rows.iter().map(|r| r.dr).collect();
    let slope = convergence_order(&errors, &spacings)?;
    Ok((rows, slope))
}
