//! Flat `key = value` study configuration.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::{Preconditioner, SolverKind};
use crate::optctl::{ControlBounds, FixedPointOptions};
use crate::problems::{example_params, make_example_with, ErrorMode, ProblemSpec};

/// Which error tables a study prints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norms {
    L2,
    H1,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub example: u8,
    pub alpha: Option<[f64; 2]>,
    pub nu: Option<f64>,
    pub ctilde: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub meshes: Vec<usize>,
    pub solver: SolverKind,
    pub fixed_point: FixedPointOptions,
    pub out: PathBuf,
    pub mode: Option<ErrorMode>,
    pub norms: Norms,
    pub title: Option<String>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            example: 1,
            alpha: None,
            nu: None,
            ctilde: None,
            lower: None,
            upper: None,
            meshes: vec![16, 32, 64, 128],
            solver: SolverKind::Cholesky,
            fixed_point: FixedPointOptions::default(),
            out: PathBuf::from("out"),
            mode: None,
            norms: Norms::Both,
            title: None,
            samples: 1000,
            seed: 2024,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
}

fn parse_bound(key: &str, v: &str) -> Result<f64> {
    match v {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => parse_num(key, v),
    }
}

impl StudyConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut alpha = [None, None];
        let (mut pcg_tol, mut pcg_iter, mut precond) = (1e-12, 20_000, Preconditioner::Jacobi);
        let mut solver_name = String::from("cholesky");
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "example" => cfg.example = parse_num(key, value)?,
                "alpha1" => alpha[0] = Some(parse_num(key, value)?),
                "alpha2" => alpha[1] = Some(parse_num(key, value)?),
                "nu" => cfg.nu = Some(parse_num(key, value)?),
                "ctilde" => cfg.ctilde = Some(parse_num(key, value)?),
                "lower" => cfg.lower = Some(parse_bound(key, value)?),
                "upper" => cfg.upper = Some(parse_bound(key, value)?),
                "meshes" => {
                    cfg.meshes = value
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_num(key, s))
                        .collect::<Result<_>>()?
                }
                "solver" => solver_name = value.to_string(),
                "pcg_tol" => pcg_tol = parse_num(key, value)?,
                "pcg_max_iter" => pcg_iter = parse_num(key, value)?,
                "preconditioner" => {
                    precond = match value {
                        "jacobi" => Preconditioner::Jacobi,
                        "none" => Preconditioner::None,
                        _ => return Err(Error::Config(format!("unknown preconditioner `{value}`"))),
                    }
                }
                "tol" => cfg.fixed_point.tol = parse_num(key, value)?,
                "max_iter" => cfg.fixed_point.max_iter = parse_num(key, value)?,
                "theta" => cfg.fixed_point.theta = parse_num(key, value)?,
                "out" => cfg.out = PathBuf::from(value),
                "norm" => {
                    cfg.mode = Some(match value {
                        "absolute" => ErrorMode::Absolute,
                        "relative" => ErrorMode::Relative,
                        _ => return Err(Error::Config(format!("unknown norm mode `{value}`"))),
                    })
                }
                "tables" => {
                    cfg.norms = match value {
                        "l2" => Norms::L2,
                        "h1" => Norms::H1,
                        "both" => Norms::Both,
                        _ => return Err(Error::Config(format!("unknown table selection `{value}`"))),
                    }
                }
                "title" => cfg.title = Some(value.to_string()),
                "samples" => cfg.samples = parse_num(key, value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                _ => return Err(Error::Config(format!("line {}: unknown key `{key}`", lineno + 1))),
            }
        }
        cfg.alpha = match alpha {
            [None, None] => None,
            [Some(a), Some(b)] => Some([a, b]),
            _ => return Err(Error::Config("`alpha1` and `alpha2` must be given together".into())),
        };
        cfg.solver = match solver_name.as_str() {
            "cholesky" => SolverKind::Cholesky,
            "pcg" => SolverKind::Pcg { rel_tol: pcg_tol, max_iter: pcg_iter, preconditioner: precond },
            other => return Err(Error::Config(format!("unknown solver `{other}`"))),
        };
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.meshes.is_empty() {
            return Err(Error::Config("mesh list is empty".into()));
        }
        if self.meshes.contains(&0) || self.meshes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "mesh list must be positive and strictly increasing, got {:?}",
                self.meshes
            )));
        }
        if let SolverKind::Pcg { rel_tol, max_iter, .. } = self.solver {
            if !(rel_tol > 0.0) || max_iter == 0 {
                return Err(Error::Config("pcg tolerance and iteration budget must be positive".into()));
            }
        }
        if self.samples == 0 {
            return Err(Error::Config("sample count must be positive".into()));
        }
        self.fixed_point.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.problem().map(|_| ())
    }

    /// The benchmark with this configuration's parameter overrides applied.
    pub fn problem(&self) -> Result<ProblemSpec> {
        let bad = |e: Error| Error::Config(e.to_string());
        let mut params = example_params(self.example).map_err(bad)?;
        if let Some(a) = self.alpha {
            params.alpha = a;
        }
        if let Some(nu) = self.nu {
            params.nu = nu;
        }
        if let Some(c) = self.ctilde {
            params.ctilde = c;
        }
        if self.lower.is_some() || self.upper.is_some() {
            let lower = self.lower.unwrap_or(params.bounds.lower);
            let upper = self.upper.unwrap_or(params.bounds.upper);
            params.bounds = ControlBounds::new(lower, upper).map_err(bad)?;
        }
        let mut spec = make_example_with(self.example, params).map_err(bad)?;
        if let Some(mode) = self.mode {
            spec.error_mode = mode;
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let cfg = StudyConfig::parse(
            "# table\nexample = 3\nmeshes = 8, 16 32\nctilde = 7  # override\nnu=0.5\ntheta = 0.5\nlower = -inf\n\
             upper = 0.25\nsolver = pcg\npcg_tol = 1e-10\npreconditioner = none\nnorm = absolute\ntables = h1\n",
        )
        .unwrap();
        assert_eq!(cfg.example, 3);
        assert_eq!(cfg.meshes, vec![8, 16, 32]);
        assert_eq!(cfg.ctilde, Some(7.0));
        assert_eq!(cfg.fixed_point.theta, 0.5);
        assert_eq!(cfg.lower, Some(f64::NEG_INFINITY));
        assert_eq!(cfg.norms, Norms::H1);
        assert!(matches!(cfg.solver, SolverKind::Pcg { preconditioner: Preconditioner::None, .. }));
        cfg.validate().unwrap();
        let spec = cfg.problem().unwrap();
        assert_eq!(spec.bounds.upper, 0.25);
        assert_eq!(spec.error_mode, ErrorMode::Absolute);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(StudyConfig::parse("bogus = 1"), Err(Error::Config(_))));
        assert!(StudyConfig::parse("example").is_err());
        assert!(StudyConfig::parse("alpha1 = 2").is_err());
        assert!(StudyConfig::parse("nu = abc").is_err());
        let empty = StudyConfig::parse("meshes =").unwrap();
        assert!(matches!(empty.validate(), Err(Error::Config(_))));
        let unsorted = StudyConfig::parse("meshes = 32, 16").unwrap();
        assert!(unsorted.validate().is_err());
        assert!(StudyConfig::parse("example = 7").unwrap().validate().is_err());
        assert!(StudyConfig::parse("theta = 0").unwrap().validate().is_err());
    }
}
