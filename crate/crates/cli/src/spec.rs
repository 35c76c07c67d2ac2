use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rpdhg_core::problems::{ProblemKind, SplitMethod};
use rpdhg_core::solvers::{SolverConfig, SolverKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Generator parameters, one variant per experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemParams {
    Lasso {
        n: usize,
        lambda: f64,
    },
    Tv1d {
        num_segs: usize,
        len_segs: usize,
        noise: f64,
        lambda: f64,
    },
    Tv2d {
        size: usize,
        noise: f64,
        /// `dense`, `spectral` or `auto`.
        split: String,
        /// Optional PGM/PFM input image; the built-in synthetic image otherwise.
        image: Option<PathBuf>,
    },
    Mri {
        size: usize,
        nu: f64,
        burden: f64,
        noise: f64,
        /// Data-consistency radius; `noise * sqrt(#samples)` when unset.
        eps: Option<f64>,
        levels: Option<usize>,
    },
}

impl ProblemParams {
    pub fn defaults(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Lasso => ProblemParams::Lasso { n: 200, lambda: 0.1 },
            ProblemKind::Tv1d => ProblemParams::Tv1d { num_segs: 10, len_segs: 50, noise: 0.5, lambda: 1.0 },
            ProblemKind::Tv2d => ProblemParams::Tv2d { size: 64, noise: 0.1, split: "auto".into(), image: None },
            ProblemKind::Mri => {
                ProblemParams::Mri { size: 32, nu: 9.0 / 16.0, burden: 0.3, noise: 0.0, eps: None, levels: None }
            }
        }
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemParams::Lasso { .. } => ProblemKind::Lasso,
            ProblemParams::Tv1d { .. } => ProblemKind::Tv1d,
            ProblemParams::Tv2d { .. } => ProblemKind::Tv2d,
            ProblemParams::Mri { .. } => ProblemKind::Mri,
        }
    }

    pub fn split_method(&self) -> Result<Option<SplitMethod>> {
        match self {
            ProblemParams::Tv2d { split, .. } => Ok(Some(parse_split(split)?)),
            _ => Ok(None),
        }
    }
}

pub fn parse_split(s: &str) -> Result<SplitMethod> {
    match s {
        "dense" => Ok(SplitMethod::Dense),
        "spectral" => Ok(SplitMethod::Spectral),
        "auto" => Ok(SplitMethod::Auto),
        other => Err(CliError::Config(format!("unknown split '{other}' (expected dense, spectral or auto)"))),
    }
}

/// One solver or the four-way fan-out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SolverChoice {
    One(SolverKind),
    All,
}

impl SolverChoice {
    pub fn kinds(self) -> Vec<SolverKind> {
        match self {
            SolverChoice::One(k) => vec![k],
            SolverChoice::All => SolverKind::ALL.to_vec(),
        }
    }
}

impl FromStr for SolverChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(SolverChoice::All);
        }
        s.parse::<SolverKind>().map(SolverChoice::One).map_err(CliError::from)
    }
}

impl TryFrom<String> for SolverChoice {
    type Error = CliError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SolverChoice> for String {
    fn from(c: SolverChoice) -> String {
        c.to_string()
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverChoice::One(k) => write!(f, "{k}"),
            SolverChoice::All => f.write_str("all"),
        }
    }
}

/// Serializable mirror of [`SolverConfig`]; the power-iteration seed is the
/// run seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub tau0: f64,
    pub beta: f64,
    pub delta: f64,
    pub mu: f64,
    pub accept_eps: f64,
    pub eps_hat: f64,
    pub alpha_bar: f64,
    pub alpha_max: f64,
    pub theta0: f64,
    pub max_iters: usize,
    pub max_inner_backtracks: usize,
    pub max_outer_trials: usize,
    pub rtol: f64,
    pub pdhg_tau: Option<f64>,
    pub pdhg_sigma: Option<f64>,
    pub pdhg_rho: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings::from_core(&SolverConfig::default())
    }
}

impl SolverSettings {
    pub fn from_core(c: &SolverConfig) -> Self {
        SolverSettings {
            tau0: c.tau0,
            beta: c.beta,
            delta: c.delta,
            mu: c.mu,
            accept_eps: c.eps,
            eps_hat: c.eps_hat,
            alpha_bar: c.alpha_bar,
            alpha_max: c.alpha_max,
            theta0: c.theta0,
            max_iters: c.max_iters,
            max_inner_backtracks: c.max_inner_backtracks,
            max_outer_trials: c.max_outer_trials,
            rtol: c.rtol,
            pdhg_tau: c.pdhg_tau,
            pdhg_sigma: c.pdhg_sigma,
            pdhg_rho: c.pdhg_rho,
        }
    }

    pub fn to_core(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            tau0: self.tau0,
            beta: self.beta,
            delta: self.delta,
            mu: self.mu,
            eps: self.accept_eps,
            eps_hat: self.eps_hat,
            alpha_bar: self.alpha_bar,
            alpha_max: self.alpha_max,
            theta0: self.theta0,
            max_iters: self.max_iters,
            max_inner_backtracks: self.max_inner_backtracks,
            max_outer_trials: self.max_outer_trials,
            rtol: self.rtol,
            pdhg_tau: self.pdhg_tau,
            pdhg_sigma: self.pdhg_sigma,
            pdhg_rho: self.pdhg_rho,
            seed,
        }
    }
}

/// A fully resolved experiment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub experiment: ProblemParams,
    pub solver: SolverChoice,
    pub config: SolverSettings,
    /// Grid-search the step parameter of baseline solvers before the run.
    pub tune: bool,
    pub seed: u64,
    pub out: PathBuf,
}

impl RunSpec {
    pub fn new(kind: ProblemKind, solver: SolverChoice, out: PathBuf) -> Self {
        RunSpec {
            experiment: ProblemParams::defaults(kind),
            solver,
            config: SolverSettings::default(),
            tune: false,
            seed: 0,
            out,
        }
    }

    /// Rejects bad names and parameters before any computation.
    pub fn validate(&self) -> Result<()> {
        self.config.to_core(self.seed).validate()?;
        self.experiment.split_method()?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be >= 0, got {v}")))
            }
        };
        match &self.experiment {
            ProblemParams::Lasso { lambda, .. } => positive("lambda", *lambda),
            ProblemParams::Tv1d { noise, lambda, .. } => nonneg("noise", *noise).and(positive("lambda", *lambda)),
            ProblemParams::Tv2d { size, noise, image, .. } => {
                if image.is_none() && *size < 2 {
                    return Err(CliError::Config(format!("size must be >= 2, got {size}")));
                }
                nonneg("noise", *noise)
            }
            ProblemParams::Mri { nu, burden, noise, eps, .. } => {
                if !(*nu > 0.5 && *nu <= 1.0) {
                    return Err(CliError::Config(format!("nu must lie in (1/2, 1], got {nu}")));
                }
                if !(*burden > 0.0 && *burden <= 1.0) {
                    return Err(CliError::Config(format!("burden must lie in (0, 1], got {burden}")));
                }
                nonneg("noise", *noise)?;
                eps.map_or(Ok(()), |e| nonneg("eps", e))
            }
        }
    }

    /// Identity of the generated problem: generator parameters and seed.
    pub fn experiment_hash(&self) -> String {
        let key = serde_json::json!({ "experiment": self.experiment, "seed": self.seed });
        let digest = Sha256::digest(key.to_string().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run specs always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: RunSpec = serde_json::from_str(s).map_err(|e| CliError::Config(format!("bad run spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }
}
