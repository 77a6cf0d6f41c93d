//! Time integration: vacuum regularisation, per-step Picard iteration over
//! the frozen-velocity system, adaptive time stepping and eta-continuation.

use rayon::prelude::*;

use crate::diagnostics::{energy_terms, full_report, DiagnosticsReport};
use crate::domain::{radial_derivative, PrimitiveState, RadialGrid, ReformState};
use crate::error::{Error, Result};
use crate::kernels::{
    expansion_rate, face_velocities, step_advected_scalar_centered, step_continuity_centered,
    step_effective_velocity_centered, step_momentum_frozen, Limiter, MomentumSolveConfig,
    TransportMode, TransportScheme, CFL_LIMIT,
};
use crate::params::{check_admissibility, PhysParams};
use crate::transform::{check_positive, pow_pos, to_reformulated};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    max_iters: usize,
    gamma_tol: f64,
    pub track_contraction: bool,
}

impl PicardConfig {
    pub fn new(max_iters: usize, gamma_tol: f64, track_contraction: bool) -> Result<Self> {
        if max_iters == 0 {
            return Err(Error::argument("max_iters must be at least 1"));
        }
        if !(gamma_tol > 0.0) || !gamma_tol.is_finite() {
            return Err(Error::argument(format!(
                "gamma_tol must be > 0, got {gamma_tol}"
            )));
        }
        Ok(Self {
            max_iters,
            gamma_tol,
            track_contraction,
        })
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
    }

    pub fn gamma_tol(&self) -> f64 {
        self.gamma_tol
    }
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            max_iters: 20,
            gamma_tol: 1e-12,
            track_contraction: true,
        }
    }
}

/// Contraction functional per Picard iterate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContractionTrace {
    /// `Gamma^k` for `k = 1, 2, ...`; `Gamma^1` compares against the previous time level.
    pub gammas: Vec<f64>,
    /// `Gamma^(k+1) / Gamma^k`.
    pub ratios: Vec<f64>,
    /// Number of iterates computed; equals `gammas.len()` when tracking.
    pub iterations: usize,
}

impl ContractionTrace {
    fn push(&mut self, gamma: f64) {
        if let Some(&last) = self.gammas.last() {
            self.ratios
                .push(if last > 0.0 { gamma / last } else { 0.0 });
        }
        self.gammas.push(gamma);
        self.iterations += 1;
    }

    pub fn last_gamma(&self) -> f64 {
        self.gammas.last().copied().unwrap_or(0.0)
    }
}

/// Scheme choices shared by every Picard iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepScheme {
    /// Mode for `h`, `phi` and `v`; density always uses the conservative scheme.
    pub scalar_transport: TransportMode,
    pub limiter: Limiter,
    pub momentum: MomentumSolveConfig,
}

impl Default for StepScheme {
    fn default() -> Self {
        Self {
            scalar_transport: TransportMode::UpwindFd,
            limiter: Limiter::None,
            momentum: MomentumSolveConfig::default(),
        }
    }
}

impl StepScheme {
    fn validate(&self) -> Result<()> {
        if self.scalar_transport == TransportMode::ConservativeFv {
            return Err(Error::argument(
                "h, phi and v are advected with upwind_fd or characteristics",
            ));
        }
        Ok(())
    }

    fn scalar(&self) -> TransportScheme {
        TransportScheme::new(self.scalar_transport, self.limiter)
    }

    fn density(&self) -> TransportScheme {
        TransportScheme::new(TransportMode::ConservativeFv, self.limiter)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub t_end: f64,
    pub cfl: f64,
    /// Constant added to the initial density.
    pub eta: f64,
    /// Emit a snapshot every this many accepted steps (plus `t = 0` and `t_end`).
    pub output_every: usize,
    pub scheme: StepScheme,
    pub picard: PicardConfig,
    pub override_admissibility: bool,
    pub max_steps: usize,
}

impl RunConfig {
    pub fn new(t_end: f64, cfl: f64, eta: f64) -> Result<Self> {
        let cfg = Self {
            t_end,
            cfl,
            eta,
            output_every: 10,
            scheme: StepScheme::default(),
            picard: PicardConfig::default(),
            override_admissibility: false,
            max_steps: 10_000_000,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::argument(format!(
                "t_end must be > 0, got {}",
                self.t_end
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= CFL_LIMIT) {
            return Err(Error::argument(format!(
                "cfl must lie in (0, {CFL_LIMIT}], got {}",
                self.cfl
            )));
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::argument(format!(
                "eta must be >= 0, got {}",
                self.eta
            )));
        }
        if self.output_every == 0 {
            return Err(Error::argument("output_every must be at least 1"));
        }
        self.scheme.validate()
    }
}

/// Shifts the initial density by `eta` and builds `(h, phi, v)`.
pub fn regularize_initial(
    rho0: &[f64],
    u0: &[f64],
    eta: f64,
    params: &PhysParams,
    grid: &RadialGrid,
) -> Result<ReformState> {
    grid.check_len("rho0", rho0.len())?;
    grid.check_len("u0", u0.len())?;
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::argument(format!("eta must be >= 0, got {eta}")));
    }
    if let Some(i) = rho0.iter().position(|r| !(*r >= 0.0) || !r.is_finite()) {
        return Err(Error::argument(format!(
            "initial density must be finite and nonnegative (node {i}: {})",
            rho0[i]
        )));
    }
    let rho: Vec<f64> = rho0.iter().map(|r| r + eta).collect();
    if let Some(i) = rho.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::argument(format!(
            "initial density vanishes at node {i}; a positive eta is required"
        )));
    }
    let state = PrimitiveState::new(grid, 0.0, rho, u0.to_vec())?;
    to_reformulated(&state, params, grid)
}

fn mean(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

fn sq_diff(grid: &RadialGrid, a: &[f64], b: &[f64]) -> f64 {
    grid.integrate(|i| {
        let d = a[i] - b[i];
        d * d
    })
}

/// `Gamma^k` between two iterates and the matching scale of the newer one.
fn contraction_functional(grid: &RadialGrid, new: &ReformState, old: &ReformState) -> (f64, f64) {
    let hphi_diff = grid.integrate(|i| {
        let d = new.h[i] * new.phi[i] - old.h[i] * old.phi[i];
        d * d
    });
    let u_diff = grid.integrate(|i| {
        let d = new.u[i] - old.u[i];
        new.h[i] * d * d
    });
    let gamma = sq_diff(grid, &new.rho, &old.rho)
        + sq_diff(grid, &new.phi, &old.phi)
        + sq_diff(grid, &new.v, &old.v)
        + hphi_diff
        + sq_diff(grid, &new.h, &old.h)
        + u_diff;
    let sq = |f: &[f64]| grid.integrate(|i| f[i] * f[i]);
    let scale = sq(&new.rho)
        + sq(&new.phi)
        + sq(&new.v)
        + grid.integrate(|i| (new.h[i] * new.phi[i]).powi(2))
        + sq(&new.h)
        + grid.integrate(|i| new.h[i] * new.u[i] * new.u[i]);
    (gamma, scale)
}

/// Advances `state` by `dt`.
///
/// Iterate `k` freezes the velocity `U = (u^n + u^(k-1)) / 2` (so `k = 1`
/// uses the previous time level alone) and transports `rho`, `h`, `phi`, `v`
/// with it, evaluating spatial terms on the average of the old level and
/// iterate `k - 1`. It then solves for `u^k` with coefficients averaged
/// between the old level and iterate `k`. A converged iterate is therefore a
/// trapezoidal step; `max_iters = 1` is a single linearly implicit pass.
/// Stops once `Gamma^k <= gamma_tol * scale` or after `max_iters` iterates.
pub fn picard_step(
    state: &ReformState,
    dt: f64,
    grid: &RadialGrid,
    params: &PhysParams,
    scheme: &StepScheme,
    cfg: &PicardConfig,
) -> Result<(ReformState, ContractionTrace)> {
    scheme.validate()?;
    let delta = params.delta();
    let gamma = params.gamma();
    let outer = scheme.momentum.outer_bc;
    let mut trace = ContractionTrace::default();
    let mut prev = state.clone();
    let mut increases = 0;

    for k in 1..=cfg.max_iters {
        let frozen = mean(&state.u, &prev.u);
        let u_face = face_velocities(grid, &frozen, outer);
        let rho = step_continuity_centered(
            &state.rho,
            &mean(&state.rho, &prev.rho),
            &u_face,
            dt,
            grid,
            scheme.density(),
        )?;
        check_positive("rho", &rho)?;
        let h = step_advected_scalar_centered(
            &state.h,
            &mean(&state.h, &prev.h),
            &frozen,
            delta - 1.0,
            dt,
            grid,
            scheme.scalar(),
            outer,
        )?;
        let phi = step_advected_scalar_centered(
            &state.phi,
            &mean(&state.phi, &prev.phi),
            &frozen,
            gamma - delta,
            dt,
            grid,
            scheme.scalar(),
            outer,
        )?;
        let phi_mid = mean(&state.phi, &phi);
        let v = step_effective_velocity_centered(
            &state.v,
            &mean(&state.v, &prev.v),
            &frozen,
            &phi_mid,
            dt,
            grid,
            params,
            scheme.scalar(),
        )?;
        let coeffs = ReformState {
            t: state.t + 0.5 * dt,
            rho: rho.clone(),
            h: mean(&state.h, &h),
            phi: phi_mid,
            v: mean(&state.v, &v),
            u: frozen.clone(),
        };
        let u = step_momentum_frozen(
            &coeffs,
            &state.u,
            &frozen,
            dt,
            grid,
            params,
            scheme.momentum,
        )?;
        let next = ReformState {
            t: state.t + dt,
            rho,
            h,
            phi,
            v,
            u,
        };

        let (g, scale) = contraction_functional(grid, &next, &prev);
        if !g.is_finite() {
            return Err(Error::NonContraction { iterate: k });
        }
        if trace.gammas.last().is_some_and(|&last| g > last) {
            increases += 1;
            if increases >= 3 {
                return Err(Error::NonContraction { iterate: k });
            }
        } else {
            increases = 0;
        }
        trace.push(g);
        prev = next;
        if g <= cfg.gamma_tol * scale {
            break;
        }
    }
    if !cfg.track_contraction {
        trace.gammas = vec![trace.last_gamma()];
        trace.ratios.clear();
    }
    Ok((prev, trace))
}

/// Largest stable step for `state`: the CFL bound on the fastest explicit
/// signal (`|u| + delta |v - u|` plus the sound speed) and the bound that
/// keeps the stretching factors of `h` and `phi` away from zero.
pub fn stable_dt(
    state: &ReformState,
    grid: &RadialGrid,
    params: &PhysParams,
    cfg: &RunConfig,
) -> f64 {
    let delta = params.delta();
    let gamma = params.gamma();
    let mut speed = 0.0_f64;
    for i in 0..state.n() {
        let sound = (gamma * pow_pos(state.rho[i], gamma - 1.0)).sqrt();
        let s = state.u[i].abs() + delta * (state.v[i] - state.u[i]).abs() + sound;
        speed = speed.max(s);
    }
    let cfl_dt = cfg.cfl * grid.min_dr() / (speed + 1e-12);
    let div = expansion_rate(
        grid,
        &face_velocities(grid, &state.u, cfg.scheme.momentum.outer_bc),
    );
    let max_div = div.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let stretch = (1.0 - delta).max((gamma - delta).abs()).max(1e-12);
    let source_dt = if max_div > 0.0 {
        0.5 / (max_div * stretch)
    } else {
        f64::INFINITY
    };
    cfl_dt.min(source_dt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub state: ReformState,
    pub report: DiagnosticsReport,
    /// `int_0^t` of the total viscous dissipation (trapezoidal in time).
    pub dissipation_integral: f64,
    pub picard_iters: usize,
    pub gamma_last: f64,
    pub min_rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    pub admissible: bool,
    /// Discrete `L^2` norm of `g = 2 (u_r + 2u/r)_r rho^(delta - 1)` at `t = 0`.
    pub compat_g_l2: f64,
    /// Largest Picard ratio observed over all accepted steps.
    pub max_ratio: f64,
    pub rejected_steps: usize,
}

impl RunOutput {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("a run always records its initial snapshot")
    }

    pub fn initial_snapshot(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    /// `|E(t) + int diss - E(0)|` at snapshot `i`.
    pub fn energy_residual(&self, i: usize) -> f64 {
        let s = &self.snapshots[i];
        (s.report.energy + s.dissipation_integral - self.snapshots[0].report.energy).abs()
    }
}

/// Discrete `L^2` norm of `2 (u_r + 2u/r)_r rho^(delta - 1)`.
pub fn compatibility_norm(state: &ReformState, grid: &RadialGrid, params: &PhysParams) -> f64 {
    let x = grid.nodes();
    let ur = radial_derivative(grid, &state.u);
    let div: Vec<f64> = (0..state.n())
        .map(|i| ur[i] + 2.0 * state.u[i] / x[i])
        .collect();
    let ddiv = radial_derivative(grid, &div);
    let g: Vec<f64> = (0..state.n())
        .map(|i| 2.0 * ddiv[i] * pow_pos(state.rho[i], params.delta() - 1.0))
        .collect();
    grid.l2_norm(&g)
}

const MAX_RETRIES: usize = 12;

/// Integrates from `init` (before the eta shift) to `cfg.t_end`.
pub fn run(
    init: &PrimitiveState,
    cfg: &RunConfig,
    params: &PhysParams,
    grid: &RadialGrid,
) -> Result<RunOutput> {
    cfg.validate()?;
    let admissible = check_admissibility(params).admissible;
    if !admissible && !cfg.override_admissibility {
        return Err(Error::Inadmissible {
            delta: params.delta(),
        });
    }
    let mut state = regularize_initial(&init.rho, &init.u, cfg.eta, params, grid)?;
    state.t = 0.0;
    let compat_g_l2 = compatibility_norm(&state, grid, params);

    let report = full_report(&state, grid, params)?;
    let mut diss_prev = report.diss_expansion + report.diss_shear;
    let mut snapshots = vec![Snapshot {
        step: 0,
        t: 0.0,
        dt: 0.0,
        min_rho: state.min_rho(),
        state: state.clone(),
        report,
        dissipation_integral: 0.0,
        picard_iters: 0,
        gamma_last: 0.0,
    }];

    let mut t = 0.0;
    let mut step = 0;
    let mut dissipation_integral = 0.0;
    let mut last_dt = f64::INFINITY;
    let mut max_ratio = 0.0_f64;
    let mut rejected_steps = 0;
    while t < cfg.t_end {
        if step >= cfg.max_steps {
            return Err(
                Error::argument(format!("max_steps = {} reached", cfg.max_steps)).at_time(t),
            );
        }
        let mut dt = stable_dt(&state, grid, params, cfg).min(1.2 * last_dt);
        let remaining = cfg.t_end - t;
        let last = dt >= remaining;
        if last {
            dt = remaining;
        }
        let mut attempt = 0;
        let (next, trace) = loop {
            match picard_step(&state, dt, grid, params, &cfg.scheme, &cfg.picard) {
                Ok(out) => break out,
                Err(e) => {
                    attempt += 1;
                    rejected_steps += 1;
                    if attempt > MAX_RETRIES || matches!(e, Error::Argument(_)) {
                        return Err(e.at_time(t));
                    }
                    dt *= 0.5;
                }
            }
        };
        let accepted_last = last && attempt == 0;
        t = if accepted_last { cfg.t_end } else { t + dt };
        step += 1;
        last_dt = dt;
        state = next;
        state.t = t;
        max_ratio = trace.ratios.iter().copied().fold(max_ratio, f64::max);

        let terms = energy_terms(&state, grid, params).map_err(|e| e.at_time(t))?;
        let diss = terms.dissipation();
        dissipation_integral += 0.5 * dt * (diss_prev + diss);
        diss_prev = diss;

        if step % cfg.output_every == 0 || t >= cfg.t_end {
            let report = full_report(&state, grid, params).map_err(|e| e.at_time(t))?;
            snapshots.push(Snapshot {
                step,
                t,
                dt,
                min_rho: state.min_rho(),
                state: state.clone(),
                report,
                dissipation_integral,
                picard_iters: trace.iterations,
                gamma_last: trace.last_gamma(),
            });
        }
    }
    Ok(RunOutput {
        snapshots,
        steps: step,
        admissible,
        compat_g_l2,
        max_ratio,
        rejected_steps,
    })
}

/// Final states of one problem run at each eta, together with the distances
/// `d_j = ||(rho^(eta_j) - eta_j) - (rho^(eta_(j+1)) - eta_(j+1))||_2`.
#[derive(Debug, Clone)]
pub struct EtaContinuation {
    pub etas: Vec<f64>,
    pub finals: Vec<Result<ReformState>>,
    /// `None` when either neighbouring run failed.
    pub distances: Vec<Option<f64>>,
}

/// Runs the same problem for each eta concurrently. Etas must be positive and
/// non-increasing; repeated values are allowed and give `d = 0`.
pub fn eta_continuation(
    init: &PrimitiveState,
    etas: &[f64],
    cfg: &RunConfig,
    params: &PhysParams,
    grid: &RadialGrid,
) -> Result<EtaContinuation> {
    if etas.len() < 2 {
        return Err(Error::argument("eta continuation needs at least two etas"));
    }
    if etas.iter().any(|e| !(*e > 0.0)) || etas.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::argument("etas must be positive and non-increasing"));
    }
    let finals: Vec<Result<ReformState>> = etas
        .par_iter()
        .map(|&eta| {
            let member = RunConfig { eta, ..cfg.clone() };
            run(init, &member, params, grid).map(|out| out.final_snapshot().state.clone())
        })
        .collect();
    let distances = (0..etas.len() - 1)
        .map(|j| match (&finals[j], &finals[j + 1]) {
            (Ok(a), Ok(b)) => {
                let (ea, eb) = (etas[j], etas[j + 1]);
                Some(
                    grid.integrate(|i| {
                        let d = (a.rho[i] - ea) - (b.rho[i] - eb);
                        d * d
                    })
                    .sqrt(),
                )
            }
            _ => None,
        })
        .collect();
    Ok(EtaContinuation {
        etas: etas.to_vec(),
        finals,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::make_grid;

    fn params() -> PhysParams {
        PhysParams::new(1.2, 0.8, 1.0, 0.0, 0.0).unwrap()
    }

    fn bump(grid: &RadialGrid) -> PrimitiveState {
        PrimitiveState::new(
            grid,
            0.0,
            grid.sample(|r| (-(r - 2.5) * (r - 2.5) / 0.25).exp()),
            vec![0.0; grid.n()],
        )
        .unwrap()
    }

    #[test]
    fn regularize_examples() {
        let g = make_grid(1.0, 4.0, 32, 1.0).unwrap();
        let p = params();
        let s = regularize_initial(&vec![0.0; 32], &vec![0.0; 32], 0.1, &p, &g).unwrap();
        assert!(s.rho.iter().all(|&r| (r - 0.1).abs() < 1e-16));
        assert_eq!(s.v, s.u);
        assert!(regularize_initial(&vec![0.0; 32], &vec![0.0; 32], 0.0, &p, &g).is_err());
        let decaying = g.sample(|r| (-r).exp());
        assert!(regularize_initial(&decaying, &vec![0.0; 32], 0.0, &p, &g).is_ok());

        // rho_sup^(delta-1) < h/2 < eta^(delta-1)
        let eta: f64 = 0.05;
        let rho0 = bump(&g).rho;
        let s = regularize_initial(&rho0, &vec![0.0; 32], eta, &p, &g).unwrap();
        let sup = s.rho.iter().copied().fold(0.0, f64::max);
        for &h in &s.h {
            assert!(h / 2.0 >= sup.powf(p.delta() - 1.0) * (1.0 - 1e-14));
            assert!(h / 2.0 < eta.powf(p.delta() - 1.0));
        }
    }

    #[test]
    fn steady_state_exits_after_one_iterate() {
        let g = make_grid(1.0, 4.0, 32, 1.0).unwrap();
        let p = params();
        let s = regularize_initial(&vec![0.5; 32], &vec![0.0; 32], 0.0, &p, &g).unwrap();
        let (next, trace) = picard_step(
            &s,
            0.01,
            &g,
            &p,
            &StepScheme::default(),
            &PicardConfig::default(),
        )
        .unwrap();
        assert_eq!(trace.gammas, vec![0.0]);
        assert_eq!(next.rho, s.rho);
        assert_eq!(next.u, s.u);
    }

    #[test]
    fn picard_contracts_on_a_bump() {
        let g = make_grid(1.0, 5.0, 128, 1.0).unwrap();
        let p = params();
        let init = bump(&g);
        let s = regularize_initial(&init.rho, &init.u, 0.1, &p, &g).unwrap();
        let cfg = RunConfig::new(1.0, 0.5, 0.1).unwrap();
        let dt = stable_dt(&s, &g, &p, &cfg);
        let (_, trace) = picard_step(&s, dt, &g, &p, &cfg.scheme, &cfg.picard).unwrap();
        assert!(trace.gammas.len() > 1);
        assert!(trace.ratios.iter().all(|&r| r <= 0.9), "{trace:?}");
    }

    #[test]
    fn single_iterate_mode() {
        let g = make_grid(1.0, 5.0, 64, 1.0).unwrap();
        let p = params();
        let init = bump(&g);
        let s = regularize_initial(&init.rho, &init.u, 0.1, &p, &g).unwrap();
        let cfg = PicardConfig::new(1, 1e-12, true).unwrap();
        let (_, trace) = picard_step(&s, 1e-3, &g, &p, &StepScheme::default(), &cfg).unwrap();
        assert_eq!(trace.iterations, 1);
        assert!(trace.ratios.is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::new(0.0, 0.5, 0.1).is_err());
        assert!(RunConfig::new(1.0, 0.95, 0.1).is_err());
        assert!(RunConfig::new(1.0, 0.5, -0.1).is_err());
        assert!(PicardConfig::new(0, 1e-12, true).is_err());
        assert!(PicardConfig::new(5, 0.0, true).is_err());
    }

    #[test]
    fn steady_run_is_constant() {
        let g = make_grid(1.0, 3.0, 32, 1.0).unwrap();
        let p = params();
        let init = PrimitiveState::new(&g, 0.0, vec![1.0; 32], vec![0.0; 32]).unwrap();
        let mut cfg = RunConfig::new(0.2, 0.5, 0.0).unwrap();
        cfg.output_every = 3;
        let out = run(&init, &cfg, &p, &g).unwrap();
        assert!(out.snapshots.len() > 2);
        let first = &out.snapshots[0];
        for s in &out.snapshots {
            assert_eq!(s.state.rho, first.state.rho);
            assert_eq!(s.state.u, first.state.u);
            assert_eq!(s.report, first.report);
        }
        assert_eq!(out.final_snapshot().t, 0.2);
    }

    #[test]
    fn inadmissible_needs_override() {
        let g = make_grid(1.0, 3.0, 16, 1.0).unwrap();
        let p = PhysParams::new(1.2, 0.7, 1.0, 0.0, 0.0).unwrap();
        let init = PrimitiveState::new(&g, 0.0, vec![1.0; 16], vec![0.0; 16]).unwrap();
        let mut cfg = RunConfig::new(0.05, 0.5, 0.0).unwrap();
        assert!(matches!(
            run(&init, &cfg, &p, &g),
            Err(Error::Inadmissible { .. })
        ));
        cfg.override_admissibility = true;
        assert!(!run(&init, &cfg, &p, &g).unwrap().admissible);
    }

    #[test]
    fn repeated_eta_gives_zero_distance() {
        let g = make_grid(1.0, 4.0, 48, 1.0).unwrap();
        let p = params();
        let init = bump(&g);
        let cfg = RunConfig::new(0.05, 0.5, 0.1).unwrap();
        let out = eta_continuation(&init, &[0.1, 0.1], &cfg, &p, &g).unwrap();
        assert_eq!(out.distances, vec![Some(0.0)]);
        assert!(eta_continuation(&init, &[0.1, 0.2], &cfg, &p, &g).is_err());
    }
}
