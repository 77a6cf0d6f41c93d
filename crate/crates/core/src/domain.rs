//! Truncated radial mesh on `[a, r_max]`, field containers and the shared
//! midpoint quadrature.
//!
//! The mesh is cell-centred: unknowns live at `nodes[i]`, the midpoint of
//! `[faces[i], faces[i + 1]]`. Every integral functional in the crate is a
//! sum `sum_i f(nodes[i]) * dr[i]`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    a: f64,
    r_max: f64,
    nodes: Vec<f64>,
    faces: Vec<f64>,
    dr: Vec<f64>,
}

/// Builds a mesh with `n` cells. `stretch = 1` gives a uniform partition;
/// `stretch > 1` widens cells geometrically toward `r_max` with ratio
/// `stretch^(1/n)` between neighbours.
pub fn make_grid(a: f64, r_max: f64, n: usize, stretch: f64) -> Result<RadialGrid> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::argument(format!("a must be > 0, got {a}")));
    }
    if !(r_max > a) || !r_max.is_finite() {
        return Err(Error::argument(format!("r_max must exceed a, got {r_max}")));
    }
    if n < 4 {
        return Err(Error::argument(format!("need at least 4 cells, got {n}")));
    }
    if !(stretch >= 1.0) || !stretch.is_finite() {
        return Err(Error::argument(format!(
            "stretch must be >= 1, got {stretch}"
        )));
    }
    let len = r_max - a;
    let mut faces = Vec::with_capacity(n + 1);
    faces.push(a);
    if stretch == 1.0 {
        for i in 1..n {
            faces.push(a + len * i as f64 / n as f64);
        }
    } else {
        let q = stretch.powf(1.0 / n as f64);
        let w0 = len * (q - 1.0) / (q.powi(n as i32) - 1.0);
        let mut w = w0;
        let mut x = a;
        for _ in 1..n {
            x += w;
            faces.push(x);
            w *= q;
        }
    }
    faces.push(r_max);
    let dr: Vec<f64> = faces.windows(2).map(|f| f[1] - f[0]).collect();
    if dr.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::argument("grid faces are not strictly increasing"));
    }
    let nodes = faces.windows(2).map(|f| 0.5 * (f[0] + f[1])).collect();
    Ok(RadialGrid {
        a,
        r_max,
        nodes,
        faces,
        dr,
    })
}

impl RadialGrid {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Number of cells.
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn dr(&self) -> &[f64] {
        &self.dr
    }

    pub fn min_dr(&self) -> f64 {
        self.dr.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_dr(&self) -> f64 {
        self.dr.iter().copied().fold(0.0, f64::max)
    }

    /// Samples `f` at the cell centres.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }

    /// Midpoint quadrature `sum_i integrand(i) * dr[i]`.
    pub fn integrate(&self, integrand: impl Fn(usize) -> f64) -> f64 {
        self.dr
            .iter()
            .enumerate()
            .map(|(i, &w)| integrand(i) * w)
            .sum()
    }

    /// Plain `L^2(dr)` norm of a nodal field.
    pub fn l2_norm(&self, field: &[f64]) -> f64 {
        self.integrate(|i| field[i] * field[i]).sqrt()
    }

    pub(crate) fn check_len(&self, what: &str, len: usize) -> Result<()> {
        if len == self.n() {
            Ok(())
        } else {
            Err(Error::argument(format!(
                "{what} has {len} entries, grid has {} cells",
                self.n()
            )))
        }
    }
}

/// Density and velocity of the original system at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveState {
    pub t: f64,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
}

impl PrimitiveState {
    pub fn new(grid: &RadialGrid, t: f64, rho: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        grid.check_len("rho", rho.len())?;
        grid.check_len("u", u.len())?;
        Ok(Self { t, rho, u })
    }

    pub fn min_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Fields of the reformulated system: `h = 2 rho^(delta-1)`,
/// `phi = rho^(gamma-delta)` and the effective velocity `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReformState {
    pub t: f64,
    pub rho: Vec<f64>,
    pub h: Vec<f64>,
    pub phi: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

impl ReformState {
    pub fn new(
        grid: &RadialGrid,
        t: f64,
        rho: Vec<f64>,
        h: Vec<f64>,
        phi: Vec<f64>,
        v: Vec<f64>,
        u: Vec<f64>,
    ) -> Result<Self> {
        for (name, len) in [
            ("rho", rho.len()),
            ("h", h.len()),
            ("phi", phi.len()),
            ("v", v.len()),
            ("u", u.len()),
        ] {
            grid.check_len(name, len)?;
        }
        Ok(Self {
            t,
            rho,
            h,
            phi,
            v,
            u,
        })
    }

    pub fn n(&self) -> usize {
        self.rho.len()
    }

    pub fn min_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Density and velocity only.
    pub fn primitive(&self) -> PrimitiveState {
        PrimitiveState {
            t: self.t,
            rho: self.rho.clone(),
            u: self.u.clone(),
        }
    }
}

/// A weighted Lebesgue norm `|| r^r_pow rho^rho_pow f ||_{L^p}` together with
/// the exponents it was evaluated with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNorm {
    pub p: f64,
    pub weight_exponent: f64,
    pub density_exponent: f64,
    pub value: f64,
}

impl WeightedNorm {
    pub fn evaluate(
        grid: &RadialGrid,
        field: &[f64],
        rho: &[f64],
        p: f64,
        r_pow: f64,
        rho_pow: f64,
    ) -> Result<Self> {
        Ok(Self {
            p,
            weight_exponent: r_pow,
            density_exponent: rho_pow,
            value: weighted_lp_norm(grid, field, rho, p, r_pow, rho_pow)?,
        })
    }
}

/// `(sum_i r_i^(p r_pow) rho_i^(p rho_pow) |f_i|^p dr_i)^(1/p)`.
pub fn weighted_lp_norm(
    grid: &RadialGrid,
    field: &[f64],
    rho: &[f64],
    p: f64,
    r_pow: f64,
    rho_pow: f64,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::argument(format!("p must be >= 1, got {p}")));
    }
    grid.check_len("field", field.len())?;
    grid.check_len("rho", rho.len())?;
    let nodes = grid.nodes();
    let sum = grid.integrate(|i| {
        nodes[i].powf(p * r_pow) * rho[i].powf(p * rho_pow) * field[i].abs().powf(p)
    });
    Ok(sum.powf(1.0 / p))
}

pub fn sup_norm(field: &[f64]) -> Result<f64> {
    if field.is_empty() {
        return Err(Error::argument("sup norm of an empty field"));
    }
    Ok(field.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
}

/// Second-order finite differences on the (possibly non-uniform) nodes:
/// three-point central stencil inside, three-point one-sided at both ends.
pub fn radial_derivative(grid: &RadialGrid, field: &[f64]) -> Vec<f64> {
    let x = grid.nodes();
    let n = x.len();
    assert_eq!(field.len(), n, "field length does not match grid");
    assert!(n >= 3, "radial derivative needs at least three nodes");
    let mut out = vec![0.0; n];

    // Written in difference form so a constant field gives exactly zero.
    let h1 = x[1] - x[0];
    let h2 = x[2] - x[1];
    out[0] = (2.0 * h1 + h2) / (h1 * (h1 + h2)) * (field[1] - field[0])
        - h1 / (h2 * (h1 + h2)) * (field[2] - field[1]);

    for i in 1..n - 1 {
        let h1 = x[i] - x[i - 1];
        let h2 = x[i + 1] - x[i];
        out[i] = h2 / (h1 * (h1 + h2)) * (field[i] - field[i - 1])
            + h1 / (h2 * (h1 + h2)) * (field[i + 1] - field[i]);
    }

    let h1 = x[n - 2] - x[n - 3];
    let h2 = x[n - 1] - x[n - 2];
    out[n - 1] = (2.0 * h2 + h1) / (h2 * (h1 + h2)) * (field[n - 1] - field[n - 2])
        - h2 / (h1 * (h1 + h2)) * (field[n - 2] - field[n - 3]);
    out
}
