use bdflow::diagnostics::{dissipation_split_identity, mass};
use bdflow::domain::{radial_derivative, weighted_lp_norm};
use bdflow::kernels::{face_velocities, step_advected_scalar, step_continuity, OuterBc};
use bdflow::params::{admissibility_for_delta, k_of_delta, p_range, p_star};
use bdflow::transform::{pressure_gradient_identity_residual, to_primitive, to_reformulated};
use bdflow::{find_delta_star, make_grid, PhysParams, PrimitiveState, RadialGrid, ReformState};
use proptest::prelude::*;

fn grid(n: usize) -> RadialGrid {
    make_grid(1.0, 4.0, n, 1.0).unwrap()
}

/// Smooth positive density built from a few random Fourier modes.
fn smooth_positive(g: &RadialGrid, base: f64, amps: &[f64]) -> Vec<f64> {
    g.sample(|r| {
        let s: f64 = amps
            .iter()
            .enumerate()
            .map(|(k, a)| a * ((k + 1) as f64 * r).sin())
            .sum();
        base + 0.3 * s.tanh()
    })
}

fn bubble(g: &RadialGrid, amp: f64, k: usize) -> Vec<f64> {
    let (a, b) = (g.a(), g.r_max());
    g.sample(|r| amp * (k as f64 * std::f64::consts::PI * (r - a) / (b - a)).sin())
}

proptest! {
    #[test]
    fn k_identity_and_vieta(delta in 2.0 / 3.0..0.999_f64) {
        let k = k_of_delta(delta).unwrap();
        prop_assert!(k >= 4.0 - 1e-9);
        let lhs = k * (1.0 - delta).powi(2);
        let rhs = 2.0 * delta * (2.0 * delta - 1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        let (lo, hi) = p_range(delta).unwrap();
        prop_assert!((lo + hi - k).abs() <= 1e-9 * k);
        prop_assert!((lo * hi - k).abs() <= 1e-9 * k);
        let bigger = k_of_delta((delta + 1e-4).min(0.9995)).unwrap();
        prop_assert!(bigger >= k);
    }

    #[test]
    fn admissible_p_star_is_inside_the_quadratic(delta in 2.0 / 3.0..0.999_f64) {
        let report = admissibility_for_delta(delta);
        if report.admissible {
            let k = k_of_delta(delta).unwrap();
            let p = p_star(delta).unwrap();
            prop_assert!(p * p - k * p + k <= 1e-9 * p * p);
        }
    }

    #[test]
    fn transform_round_trip(amps in prop::collection::vec(-2.0..2.0_f64, 3), base in 0.4..3.0_f64,
                            uamp in -1.0..1.0_f64, gamma in 1.0..2.0_f64, delta in 0.67..0.99_f64) {
        let g = grid(64);
        let params = PhysParams::new(gamma, delta, 1.0, 0.0, 0.0).unwrap();
        let rho = smooth_positive(&g, base, &amps);
        let u = bubble(&g, uamp, 2);
        let prim = PrimitiveState::new(&g, 0.0, rho.clone(), u.clone()).unwrap();
        let back = to_primitive(&to_reformulated(&prim, &params, &g).unwrap(), &params).unwrap();
        for i in 0..g.n() {
            prop_assert!((back.rho[i] - rho[i]).abs() <= 1e-12 * rho[i]);
            prop_assert!((back.u[i] - u[i]).abs() <= 1e-12 * u[i].abs().max(1e-300));
        }
    }

    #[test]
    fn pressure_residual_ignores_a_common_velocity_shift(amps in prop::collection::vec(-2.0..2.0_f64, 3),
                                                         c in -5.0..5.0_f64) {
        let g = grid(64);
        let params = PhysParams::new(1.4, 0.8, 1.0, 0.0, 0.0).unwrap();
        let rho = smooth_positive(&g, 1.0, &amps);
        let prim = PrimitiveState::new(&g, 0.0, rho, vec![0.0; g.n()]).unwrap();
        let s = to_reformulated(&prim, &params, &g).unwrap();
        let shifted = ReformState::new(
            &g, 0.0, s.rho.clone(), s.h.clone(), s.phi.clone(),
            s.v.iter().map(|v| v + c).collect(), s.u.iter().map(|u| u + c).collect(),
        ).unwrap();
        let a = pressure_gradient_identity_residual(&s, &params, &g);
        let b = pressure_gradient_identity_residual(&shifted, &params, &g);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn continuity_conserves_mass_with_closed_ends(amps in prop::collection::vec(-2.0..2.0_f64, 3),
                                                  uamp in -1.0..1.0_f64, k in 1usize..4) {
        let g = grid(100);
        let rho = smooth_positive(&g, 1.0, &amps);
        let u = bubble(&g, uamp, k);
        let faces = face_velocities(&g, &u, OuterBc::Dirichlet);
        let dt = 0.4 * g.min_dr();
        let next = step_continuity(&rho, &faces, dt, &g).unwrap();
        let m = |f: &[f64]| g.integrate(|i| g.nodes()[i].powi(2) * f[i]);
        prop_assert!((m(&next) - m(&rho)).abs() <= 1e-13 * m(&rho));
        // bit-identical on repeat
        prop_assert_eq!(next, step_continuity(&rho, &faces, dt, &g).unwrap());
    }

    #[test]
    fn h_stays_positive(amps in prop::collection::vec(-2.0..2.0_f64, 3), uamp in -1.0..1.0_f64,
                        delta in 0.67..0.99_f64) {
        let g = grid(100);
        let rho = smooth_positive(&g, 0.5, &amps);
        let h: Vec<f64> = rho.iter().map(|r| 2.0 * r.powf(delta - 1.0)).collect();
        let u = bubble(&g, uamp, 2);
        let dt = 0.4 * g.min_dr();
        let next = step_advected_scalar(&h, &u, delta - 1.0, dt, &g).unwrap();
        prop_assert!(next.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn dissipation_split_is_exact(delta in 0.01..0.99_f64, r in 0.1..10.0_f64,
                                  u in -10.0..10.0_f64, ur in -10.0..10.0_f64) {
        let (lhs, rhs) = dissipation_split_identity(delta, r, u, ur);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn mass_shares_the_weighted_norm_quadrature(amps in prop::collection::vec(-2.0..2.0_f64, 3)) {
        let g = grid(50);
        let params = PhysParams::new(1.4, 0.8, 1.0, 0.0, 0.0).unwrap();
        let rho = smooth_positive(&g, 1.0, &amps);
        let prim = PrimitiveState::new(&g, 0.0, rho.clone(), vec![0.0; g.n()]).unwrap();
        let s = to_reformulated(&prim, &params, &g).unwrap();
        let ones = vec![1.0; g.n()];
        prop_assert_eq!(mass(&s, &g).unwrap(), weighted_lp_norm(&g, &ones, &rho, 1.0, 2.0, 1.0).unwrap());
    }

    #[test]
    fn derivative_of_constant_vanishes(c in -1e3..1e3_f64, n in 4usize..200, stretch in 1.0..1.05_f64) {
        let g = make_grid(1.0, 7.0, n, stretch).unwrap();
        let d = radial_derivative(&g, &vec![c; n]);
        prop_assert!(d.iter().all(|x| x.abs() <= 1e-13 * c.abs().max(1.0)));
    }
}

#[test]
fn admissibility_is_monotone_in_delta() {
    let star = find_delta_star(1e-10).unwrap();
    let mut prev = false;
    let mut d = 2.0 / 3.0;
    while d < 0.999 {
        let now = admissibility_for_delta(d).admissible;
        assert!(!prev || now, "admissibility lost at delta = {d}");
        assert_eq!(now, d > star, "delta = {d}");
        prev = now;
        d += 1e-3;
    }
}

#[test]
fn threshold_is_deterministic() {
    let a = find_delta_star(1e-9).unwrap();
    assert_eq!(a.to_bits(), find_delta_star(1e-9).unwrap().to_bits());
}

#[test]
fn mismatched_states_are_rejected() {
    let g = grid(10);
    assert!(PrimitiveState::new(&g, 0.0, vec![1.0; 9], vec![0.0; 10]).is_err());
    assert!(PrimitiveState::new(&g, 0.0, vec![1.0; 10], vec![0.0; 11]).is_err());
    let ok = vec![1.0; 10];
    assert!(ReformState::new(
        &g,
        0.0,
        ok.clone(),
        ok.clone(),
        ok.clone(),
        vec![0.0; 3],
        ok
    )
    .is_err());
}
