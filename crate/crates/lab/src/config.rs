//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # frequencies: axes split by `;`
//! omega = sqrt:2
//! walk.nmax = 400
//! variance.t = 2, 4, 8
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{LabError, LabResult};

/// Every accepted key with its default and meaning; printed by `--help`.
pub const KEYS: &[(&str, &str, &str)] = &[
    (
        "omega",
        "sqrt:2",
        "frequency descriptors, entries split by spaces and axes by `;`",
    ),
    ("precision", "256", "working precision in bits"),
    ("psi.tau", "1", "exponent of psi(q) = c q^-tau ln(1+q)^p"),
    ("psi.c", "0.14", "constant of psi"),
    ("psi.p", "0", "log exponent of psi"),
    ("walk.nmax", "200", "last walk step"),
    ("walk.prune", "1e-16", "pruning threshold for the dense walk"),
    ("walk.neps", "1", "first summed step"),
    ("variance.t", "5, 10, 20", "window radii"),
    ("variance.nmax", "2000", "last convolution power in the variance series"),
    ("mc.reps", "2000", "Monte Carlo replications"),
    ("mc.grid", "16", "grid points per unit length"),
    ("mc.seed", "1", "master seed"),
    ("output.directory", "", "directory for output files; empty means stdout"),
    ("output.format", "csv", "csv or json"),
];

/// Output encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = LabError;
    fn from_str(s: &str) -> LabResult<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(LabError::Parse(format!(
                "unknown format `{other}`; expected csv or json"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsiBlock {
    pub tau: f64,
    pub c: f64,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkBlock {
    pub n_max: u32,
    pub prune: f64,
    pub n_eps: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceBlock {
    pub t: Vec<f64>,
    pub n_max: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McBlock {
    pub reps: u64,
    pub grid: u32,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputBlock {
    pub directory: Option<PathBuf>,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub omega: String,
    pub precision: u32,
    pub psi: PsiBlock,
    pub walk: WalkBlock,
    pub variance: VarianceBlock,
    pub mc: McBlock,
    pub output: OutputBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut c = ExperimentConfig {
            omega: String::new(),
            precision: 0,
            psi: PsiBlock {
                tau: 0.0,
                c: 0.0,
                p: 0.0,
            },
            walk: WalkBlock {
                n_max: 0,
                prune: 0.0,
                n_eps: 0,
            },
            variance: VarianceBlock {
                t: Vec::new(),
                n_max: 0,
            },
            mc: McBlock {
                reps: 0,
                grid: 0,
                seed: 0,
            },
            output: OutputBlock {
                directory: None,
                format: Format::Csv,
            },
        };
        for (k, v, _) in KEYS {
            c.set(k, v).expect("defaults parse");
        }
        c
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> LabResult<T> {
    v.trim()
        .parse()
        .map_err(|_| LabError::Parse(format!("`{key}`: cannot parse `{}`", v.trim())))
}

/// Comma-separated list of numbers.
pub fn parse_list<T: FromStr>(key: &str, v: &str) -> LabResult<Vec<T>> {
    let items: LabResult<Vec<T>> = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| num(key, s))
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(LabError::Parse(format!("`{key}`: empty list")));
    }
    Ok(items)
}

impl ExperimentConfig {
    /// Parses the text format on top of the defaults.
    pub fn parse(text: &str) -> LabResult<Self> {
        let mut c = ExperimentConfig::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LabError::Parse(format!("line {}: expected `key = value`", i + 1)))?;
            let k = k.trim();
            if seen.insert(k.to_string(), i + 1).is_some() {
                return Err(LabError::Parse(format!("line {}: duplicate key `{k}`", i + 1)));
            }
            c.set(k, v)
                .map_err(|e| LabError::Parse(format!("line {}: {e}", i + 1)))?;
        }
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> LabResult<Self> {
        ExperimentConfig::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key; unknown keys are rejected.
    pub fn set(&mut self, key: &str, v: &str) -> LabResult<()> {
        match key {
            "omega" => {
                if v.trim().is_empty() {
                    return Err(LabError::Parse("`omega` is empty".into()));
                }
                self.omega = v.trim().to_string();
            }
            "precision" => self.precision = num(key, v)?,
            "psi.tau" => self.psi.tau = num(key, v)?,
            "psi.c" => self.psi.c = num(key, v)?,
            "psi.p" => self.psi.p = num(key, v)?,
            "walk.nmax" => self.walk.n_max = num(key, v)?,
            "walk.prune" => self.walk.prune = num(key, v)?,
            "walk.neps" => self.walk.n_eps = num(key, v)?,
            "variance.t" => self.variance.t = parse_list(key, v)?,
            "variance.nmax" => self.variance.n_max = num(key, v)?,
            "mc.reps" => self.mc.reps = num(key, v)?,
            "mc.grid" => self.mc.grid = num(key, v)?,
            "mc.seed" => self.mc.seed = num(key, v)?,
            "output.directory" => {
                let v = v.trim();
                self.output.directory = if v.is_empty() { None } else { Some(PathBuf::from(v)) };
            }
            "output.format" => self.output.format = v.parse()?,
            _ => return Err(LabError::Parse(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Help text listing every key and its default.
    pub fn describe_keys() -> String {
        let mut s = String::from("Config keys (`key = value`, `#` starts a comment):\n");
        for (k, v, what) in KEYS {
            s.push_str(&format!("  {k:<18} default `{v}`: {what}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = ExperimentConfig::parse("# sweep\nomega = sqrt:3 ; sqrt:5\nvariance.t = 2,4, 8 # radii\n").unwrap();
        assert_eq!(c.omega, "sqrt:3 ; sqrt:5");
        assert_eq!(c.variance.t, vec![2.0, 4.0, 8.0]);
        assert_eq!(c.walk.prune, 1e-16);
        assert_eq!(c.mc.grid, 16);
        assert_eq!(c.output.format, Format::Csv);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("walk.nmx = 3").is_err());
        assert!(ExperimentConfig::parse("walk.nmax").is_err());
        assert!(ExperimentConfig::parse("walk.nmax = -1").is_err());
        assert!(ExperimentConfig::parse("mc.seed = 1\nmc.seed = 2").is_err());
        assert!(ExperimentConfig::parse("output.format = xml").is_err());
    }
}
