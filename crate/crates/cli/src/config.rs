//! Flat `key = value` configuration files.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use bdflow::kernels::MomentumSolveConfig;
use bdflow::stepper::StepScheme;
use bdflow::verify::{MmsPreset, MmsSetup};
use bdflow::{
    make_grid, InitPreset, Limiter, OuterBc, PhysParams, PicardConfig, RadialGrid, RunConfig,
};
use thiserror::Error;

/// Every key accepted in a config file. Subcommands read the subset they need.
pub const KNOWN_KEYS: &[&str] = &[
    "gamma",
    "delta",
    "a",
    "r_max",
    "n",
    "stretch",
    "eta",
    "alpha",
    "t_end",
    "cfl",
    "theta",
    "max_iters",
    "gamma_tol",
    "output_every",
    "outer_bc",
    "limiter",
    "init",
    "override_admissibility",
    // mms
    "mms_preset",
    "ladder",
    "mms_fault",
    // sweep
    "delta_min",
    "delta_max",
    "delta_step",
    "gamma_min",
    "gamma_max",
    "gamma_step",
];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key {key:?} given twice")]
    Duplicate { line: usize, key: String },
    #[error("missing required key {0:?}")]
    Missing(&'static str),
    #[error("{keys}: {reason}")]
    Rejected { keys: &'static str, reason: String },
    #[error("invalid value {value:?} for {key}: {reason}")]
    Invalid {
        key: &'static str,
        value: String,
        reason: String,
    },
}

/// Parsed but untyped configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        text.parse()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| ConfigError::Invalid {
                    key,
                    value: v.to_string(),
                    reason: e.to_string(),
                })
            })
            .transpose()
    }

    fn required<T: FromStr>(&self, key: &'static str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.parsed(key)?.ok_or(ConfigError::Missing(key))
    }

    fn or<T: FromStr>(&self, key: &'static str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }
}

impl FromStr for ConfigFile {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: line_no })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax { line: line_no });
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line: line_no,
                    key: key.to_string(),
                });
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::Duplicate {
                    line: line_no,
                    key: key.to_string(),
                });
            }
        }
        Ok(Self { entries })
    }
}

fn invalid(key: &'static str, value: impl ToString, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key,
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn rejected(keys: &'static str, reason: impl ToString) -> ConfigError {
    ConfigError::Rejected {
        keys,
        reason: reason.to_string(),
    }
}

fn parse_outer_bc(s: &str) -> Result<OuterBc, ConfigError> {
    match s {
        "dirichlet" => Ok(OuterBc::Dirichlet),
        "neumann" => Ok(OuterBc::Neumann),
        _ => Err(invalid("outer_bc", s, "expected dirichlet or neumann")),
    }
}

fn parse_limiter(s: &str) -> Result<Limiter, ConfigError> {
    match s {
        "none" => Ok(Limiter::None),
        "minmod" => Ok(Limiter::Minmod),
        _ => Err(invalid("limiter", s, "expected none or minmod")),
    }
}

/// Everything `run` needs, fully resolved. `echo` lists every setting
/// (defaults included) as `key = value` text that parses back to the same run.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub params: PhysParams,
    pub grid: RadialGrid,
    pub run: RunConfig,
    pub init: InitPreset,
    pub echo: BTreeMap<String, String>,
}

impl RunSettings {
    pub fn from_config(cfg: &ConfigFile) -> Result<Self, ConfigError> {
        let gamma: f64 = cfg.required("gamma")?;
        let delta: f64 = cfg.required("delta")?;
        let a: f64 = cfg.required("a")?;
        let r_max: f64 = cfg.required("r_max")?;
        let n: usize = cfg.required("n")?;
        let stretch: f64 = cfg.or("stretch", 1.0)?;
        let eta: f64 = cfg.required("eta")?;
        let alpha: f64 = cfg.or("alpha", 0.0)?;
        let t_end: f64 = cfg.required("t_end")?;
        let cfl: f64 = cfg.or("cfl", 0.5)?;
        let theta: f64 = cfg.or("theta", 0.5)?;
        let max_iters: usize = cfg.or("max_iters", 20)?;
        let gamma_tol: f64 = cfg.or("gamma_tol", 1e-12)?;
        let output_every: usize = cfg.or("output_every", 10)?;
        let outer_bc = cfg.get("outer_bc").unwrap_or("dirichlet");
        let limiter = cfg.get("limiter").unwrap_or("none");
        let init = cfg.get("init").ok_or(ConfigError::Missing("init"))?;
        let override_admissibility: bool = cfg.or("override_admissibility", false)?;

        let params = PhysParams::new(gamma, delta, a, eta, alpha)
            .map_err(|e| rejected("gamma/delta/a/eta/alpha", e))?;
        let grid = make_grid(a, r_max, n, stretch).map_err(|e| rejected("a/r_max/n/stretch", e))?;
        let mut run = RunConfig::new(t_end, cfl, eta).map_err(|e| rejected("t_end/cfl/eta", e))?;
        run.output_every = output_every;
        run.override_admissibility = override_admissibility;
        run.picard = PicardConfig::new(max_iters, gamma_tol, true)
            .map_err(|e| rejected("max_iters/gamma_tol", e))?;
        run.scheme = StepScheme {
            limiter: parse_limiter(limiter)?,
            momentum: MomentumSolveConfig::new(theta, parse_outer_bc(outer_bc)?)
                .map_err(|e| invalid("theta", theta, e))?,
            ..StepScheme::default()
        };
        run.validate()
            .map_err(|e| invalid("output_every", output_every, e))?;

        let echo: BTreeMap<String, String> = [
            ("gamma", format!("{gamma:?}")),
            ("delta", format!("{delta:?}")),
            ("a", format!("{a:?}")),
            ("r_max", format!("{r_max:?}")),
            ("n", n.to_string()),
            ("stretch", format!("{stretch:?}")),
            ("eta", format!("{eta:?}")),
            ("alpha", format!("{alpha:?}")),
            ("t_end", format!("{t_end:?}")),
            ("cfl", format!("{cfl:?}")),
            ("theta", format!("{theta:?}")),
            ("max_iters", max_iters.to_string()),
            ("gamma_tol", format!("{gamma_tol:?}")),
            ("output_every", output_every.to_string()),
            ("outer_bc", outer_bc.to_string()),
            ("limiter", limiter.to_string()),
            ("init", init.to_string()),
            ("override_admissibility", override_admissibility.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();

        Ok(Self {
            params,
            grid,
            run,
            init: InitPreset::parse(init),
            echo,
        })
    }
}

/// Settings of the `mms` subcommand.
#[derive(Debug, Clone)]
pub struct MmsSettings {
    pub preset: MmsPreset,
    pub ladder: Vec<usize>,
    pub setup: MmsSetup,
    pub params: PhysParams,
}

impl MmsSettings {
    pub fn from_config(cfg: &ConfigFile) -> Result<Self, ConfigError> {
        let name = cfg
            .get("mms_preset")
            .ok_or(ConfigError::Missing("mms_preset"))?;
        let preset = MmsPreset::parse(name).map_err(|e| invalid("mms_preset", name, e))?;
        let ladder = match cfg.get("ladder") {
            None => vec![64, 128, 256, 512],
            Some(text) => text
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|e| invalid("ladder", text, e))
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        let defaults = MmsSetup::default();
        let fault: bool = cfg.or("mms_fault", false)?;
        let setup = MmsSetup {
            a: cfg.or("a", defaults.a)?,
            r_max: cfg.or("r_max", defaults.r_max)?,
            t_end: cfg.or("t_end", defaults.t_end)?,
            operator_scale: if fault { 1.1 } else { 1.0 },
        };
        let params = PhysParams::new(
            cfg.or("gamma", 1.4)?,
            cfg.or("delta", 0.8)?,
            setup.a,
            0.0,
            0.0,
        )
        .map_err(|e| rejected("gamma/delta/a", e))?;
        Ok(Self {
            preset,
            ladder,
            setup,
            params,
        })
    }
}

/// An inclusive range `min, min + step, ..., max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Range {
    fn new(key: &'static str, min: f64, max: f64, step: f64) -> Result<Self, ConfigError> {
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(invalid(
                key,
                format!("{min}..{max}"),
                "need finite min <= max",
            ));
        }
        if !(step > 0.0 && step.is_finite()) && min < max {
            return Err(invalid(key, step, "step must be positive"));
        }
        Ok(Self { min, max, step })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.min == self.max {
            return vec![self.min];
        }
        // tolerate round-off so that e.g. 0.70..0.80 step 0.01 keeps 0.80
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| self.min + i as f64 * self.step)
            .collect()
    }
}

/// Settings of the `sweep` subcommand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub delta: Range,
    pub gamma: Range,
}

impl SweepSettings {
    pub fn from_config(cfg: &ConfigFile) -> Result<Self, ConfigError> {
        let delta = Range::new(
            "delta_min/delta_max/delta_step",
            cfg.required("delta_min")?,
            cfg.required("delta_max")?,
            cfg.or("delta_step", 0.0)?,
        )?;
        if !(delta.min > 0.0 && delta.max < 1.0) {
            return Err(invalid(
                "delta_min/delta_max",
                format!("{}..{}", delta.min, delta.max),
                "delta must lie in (0, 1)",
            ));
        }
        let fixed: f64 = cfg.or("gamma", 1.0)?;
        let gamma = Range::new(
            "gamma_min/gamma_max/gamma_step",
            cfg.or("gamma_min", fixed)?,
            cfg.or("gamma_max", fixed)?,
            cfg.or("gamma_step", 0.0)?,
        )?;
        if !(gamma.min >= 1.0) {
            return Err(invalid("gamma_min", gamma.min, "gamma must be >= 1"));
        }
        Ok(Self { delta, gamma })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RUN: &str = "\
# bump
gamma = 1.2
delta = 0.8
a = 1
r_max = 5
n = 64
eta = 0.1   # floor
t_end = 0.1
init = gaussian-bump
";

    #[test]
    fn parses_and_fills_defaults() {
        let cfg: ConfigFile = RUN.parse().unwrap();
        let s = RunSettings::from_config(&cfg).unwrap();
        assert_eq!(s.grid.n(), 64);
        assert_eq!(s.run.cfl, 0.5);
        assert_eq!(s.run.output_every, 10);
        assert_eq!(s.run.scheme.momentum.theta(), 0.5);
        assert_eq!(s.init, InitPreset::GaussianBump);
        assert_eq!(s.echo["limiter"], "none");
        assert_eq!(s.echo["eta"], "0.1");
        assert_eq!(s.echo["gamma_tol"], "1e-12");
    }

    #[test]
    fn echo_round_trips() {
        let s = RunSettings::from_config(&RUN.parse().unwrap()).unwrap();
        let text: String = s.echo.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let again = RunSettings::from_config(&text.parse().unwrap()).unwrap();
        assert_eq!(again.echo, s.echo);
        assert_eq!(again.run, s.run);
        assert_eq!(again.params, s.params);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(
            "foo = 1".parse::<ConfigFile>(),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            "n = 1\nn = 2".parse::<ConfigFile>(),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(
            "gamma".parse::<ConfigFile>(),
            Err(ConfigError::Syntax { line: 1 })
        ));
        let missing: ConfigFile = "gamma = 1.2".parse().unwrap();
        assert_eq!(
            RunSettings::from_config(&missing).unwrap_err(),
            ConfigError::Missing("delta")
        );
        let bad: ConfigFile = RUN.replace("n = 64", "n = many").parse().unwrap();
        assert!(matches!(
            RunSettings::from_config(&bad),
            Err(ConfigError::Invalid { key: "n", .. })
        ));
        let bc: ConfigFile = format!("{RUN}outer_bc = open\n").parse().unwrap();
        assert!(matches!(
            RunSettings::from_config(&bc),
            Err(ConfigError::Invalid {
                key: "outer_bc",
                ..
            })
        ));
    }

    #[test]
    fn ranges() {
        let r = Range::new("d", 0.70, 0.80, 0.01).unwrap();
        let p = r.points();
        assert_eq!(p.len(), 11);
        assert!((p[10] - 0.80).abs() < 1e-12);
        assert_eq!(
            Range::new("d", 0.75, 0.75, 0.0).unwrap().points(),
            vec![0.75]
        );
        assert!(Range::new("d", 0.8, 0.7, 0.01).is_err());
        assert!(Range::new("d", 0.7, 0.8, 0.0).is_err());
    }

    #[test]
    fn mms_settings() {
        let cfg: ConfigFile = "mms_preset = diffusion\nladder = 32, 64, 128\nmms_fault = true"
            .parse()
            .unwrap();
        let s = MmsSettings::from_config(&cfg).unwrap();
        assert_eq!(s.preset, MmsPreset::Diffusion);
        assert_eq!(s.ladder, vec![32, 64, 128]);
        assert_eq!(s.setup.operator_scale, 1.1);
        let bad: ConfigFile = "mms_preset = wave".parse().unwrap();
        assert!(MmsSettings::from_config(&bad).is_err());
    }
}
