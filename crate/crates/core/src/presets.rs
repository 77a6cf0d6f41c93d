//! Initial data. Presets return the unregularized density; `eta` is added
//! by [`crate::stepper::regularize_initial`].

use std::path::{Path, PathBuf};

use crate::domain::RadialGrid;
use crate::error::{Error, Result};

/// Named initial conditions, or a tabulated profile read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum InitPreset {
    /// `rho = 1`, `u = 0`.
    Steady,
    /// `rho = exp(-(r - r0)^2 / w^2)` with `r0` the domain midpoint and
    /// `w = (r_max - a) / 8`, `u = 0`.
    GaussianBump,
    /// `rho = e^{-r}`, `u = 0`.
    Decaying,
    /// Whitespace- or comma-separated columns `r rho [u]`, linearly
    /// interpolated onto the grid. `#` starts a comment.
    File(PathBuf),
}

impl InitPreset {
    /// Recognizes the named presets; anything else is treated as a path.
    pub fn parse(s: &str) -> Self {
        match s {
            "steady" => InitPreset::Steady,
            "gaussian-bump" => InitPreset::GaussianBump,
            "decaying" => InitPreset::Decaying,
            path => InitPreset::File(PathBuf::from(path)),
        }
    }

    /// `(rho0, u0)` at the grid nodes.
    pub fn sample(&self, grid: &RadialGrid) -> Result<(Vec<f64>, Vec<f64>)> {
        let zeros = vec![0.0; grid.n()];
        match self {
            InitPreset::Steady => Ok((vec![1.0; grid.n()], zeros)),
            InitPreset::GaussianBump => {
                let (r0, w) = bump_shape(grid.a(), grid.r_max());
                Ok((grid.sample(|r| (-((r - r0) / w).powi(2)).exp()), zeros))
            }
            InitPreset::Decaying => Ok((grid.sample(|r| (-r).exp()), zeros)),
            InitPreset::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::argument(format!("cannot read {}: {e}", path.display())))?;
                let table = parse_table(&text, path)?;
                let rho = grid.sample(|r| interpolate(&table.r, &table.rho, r));
                let u = match &table.u {
                    Some(u) => grid.sample(|r| interpolate(&table.r, u, r)),
                    None => zeros,
                };
                Ok((rho, u))
            }
        }
    }
}

/// Centre and width of the gaussian bump on `[a, r_max]`.
pub fn bump_shape(a: f64, r_max: f64) -> (f64, f64) {
    (0.5 * (a + r_max), (r_max - a) / 8.0)
}

struct Table {
    r: Vec<f64>,
    rho: Vec<f64>,
    u: Option<Vec<f64>>,
}

fn parse_table(text: &str, path: &Path) -> Result<Table> {
    let bad = |line: usize, msg: &str| Error::argument(format!("{}:{line}: {msg}", path.display()));
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| bad(i + 1, &format!("not a number: {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if !(2..=3).contains(&row.len()) {
            return Err(bad(i + 1, "expected columns r rho [u]"));
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(bad(i + 1, "inconsistent column count"));
            }
        }
        if let Some(prev) = rows.last() {
            if !(row[0] > prev[0]) {
                return Err(bad(i + 1, "r must be strictly increasing"));
            }
        }
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(Error::argument(format!(
            "{}: need at least two rows",
            path.display()
        )));
    }
    let col = |j: usize| rows.iter().map(|row| row[j]).collect::<Vec<_>>();
    Ok(Table {
        r: col(0),
        rho: col(1),
        u: (rows[0].len() == 3).then(|| col(2)),
    })
}

/// Piecewise-linear interpolation, constant beyond the table ends.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let j = xs.partition_point(|&xi| xi <= x) - 1;
    let w = (x - xs[j]) / (xs[j + 1] - xs[j]);
    ys[j] + w * (ys[j + 1] - ys[j])
}
