use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rpdhg_core::problems::ProblemKind;

use crate::error::{CliError, Result};
use crate::spec::{ProblemParams, RunSpec, SolverChoice};

#[derive(Debug, Parser)]
#[command(name = "rpdhg", version, about = "Relaxed PDHG line search experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a problem, run solvers and write traces and images.
    Run(Box<RunArgs>),
    /// Summarize traces of one experiment.
    Compare(CompareArgs),
    /// Print the default run config of every experiment.
    Describe(DescribeArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// lasso, tv1d, tv2d or mri
    #[arg(required_unless_present = "spec")]
    pub experiment: Option<String>,
    /// Load a run config (e.g. a previous config.json); flags override it.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// pdhg, pdhg-ls, aoi-ls, rpdhg or all
    #[arg(long)]
    pub solver: Option<String>,
    /// Output directory [default: runs/<experiment>]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid-search the step parameter of baseline solvers first.
    #[arg(long)]
    pub tune: bool,

    /// LASSO dimension
    #[arg(long, help_heading = "Problem")]
    pub n: Option<usize>,
    /// Regularization weight (lasso, tv1d)
    #[arg(long, help_heading = "Problem")]
    pub lambda: Option<f64>,
    #[arg(long, help_heading = "Problem")]
    pub num_segs: Option<usize>,
    #[arg(long, help_heading = "Problem")]
    pub len_segs: Option<usize>,
    /// Noise standard deviation
    #[arg(long, help_heading = "Problem")]
    pub noise: Option<f64>,
    /// Grid side (tv2d, mri)
    #[arg(long, help_heading = "Problem")]
    pub size: Option<usize>,
    /// Partial-Fourier fraction (mri)
    #[arg(long, help_heading = "Problem")]
    pub nu: Option<f64>,
    /// Variable-density sampling burden (mri)
    #[arg(long, help_heading = "Problem")]
    pub burden: Option<f64>,
    /// Data-consistency radius (mri)
    #[arg(long, help_heading = "Problem")]
    pub eps: Option<f64>,
    /// Wavelet levels (mri)
    #[arg(long, help_heading = "Problem")]
    pub levels: Option<usize>,
    /// dense, spectral or auto (tv2d)
    #[arg(long, help_heading = "Problem")]
    pub split: Option<String>,
    /// PGM/PFM input image with values in [0, 1] (tv2d)
    #[arg(long, help_heading = "Problem")]
    pub image: Option<PathBuf>,

    #[arg(long, help_heading = "Solver")]
    pub max_iters: Option<usize>,
    #[arg(long, help_heading = "Solver")]
    pub tau0: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    pub beta: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    pub delta: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    pub mu: Option<f64>,
    /// Outer acceptance margin
    #[arg(long, help_heading = "Solver")]
    pub accept_eps: Option<f64>,
    /// Activation threshold
    #[arg(long, help_heading = "Solver")]
    pub eps_hat: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    pub alpha_bar: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    pub alpha_max: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    pub theta0: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    pub max_inner: Option<usize>,
    #[arg(long, help_heading = "Solver")]
    pub max_outer: Option<usize>,
    /// Stop once the residual falls below rtol times the first residual
    #[arg(long, help_heading = "Solver")]
    pub rtol: Option<f64>,
    /// Fixed primal step of pdhg
    #[arg(long, help_heading = "Solver")]
    pub tau: Option<f64>,
    /// Fixed dual step of pdhg
    #[arg(long, help_heading = "Solver")]
    pub sigma: Option<f64>,
    /// Relaxation of pdhg
    #[arg(long, help_heading = "Solver")]
    pub rho: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// trace.csv files, each with its summary.json alongside
    #[arg(required = true)]
    pub traces: Vec<PathBuf>,
    /// Relative threshold for the iterations-to-threshold column
    #[arg(long, default_value_t = 1e-6)]
    pub rel: f64,
    /// Reference objective [default: lowest best objective among the traces]
    #[arg(long)]
    pub reference: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DescribeArgs {
    /// Restrict to one experiment
    pub experiment: Option<String>,
}

fn set<T: Copy>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl RunArgs {
    /// Resolves defaults, the optional spec file and the flag overrides.
    pub fn to_spec(&self) -> Result<RunSpec> {
        let mut spec = match &self.spec {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let spec = RunSpec::from_json(&text)?;
                if let Some(name) = &self.experiment {
                    if name.parse::<ProblemKind>()? != spec.experiment.kind() {
                        return Err(CliError::Config(format!("experiment '{name}' conflicts with {}", path.display())));
                    }
                }
                spec
            }
            None => {
                let kind: ProblemKind = self.experiment.as_deref().unwrap_or_default().parse()?;
                let mut spec = RunSpec::new(kind, SolverChoice::One(rpdhg_core::solvers::SolverKind::Rpdhg), PathBuf::new());
                spec.out = PathBuf::from("runs").join(kind.name());
                spec
            }
        };
        if let Some(s) = &self.solver {
            spec.solver = s.parse()?;
        }
        if let Some(o) = &self.out {
            spec.out = o.clone();
        }
        set(&mut spec.seed, self.seed);
        spec.tune |= self.tune;
        self.apply_problem(&mut spec.experiment)?;

        let c = &mut spec.config;
        set(&mut c.max_iters, self.max_iters);
        set(&mut c.tau0, self.tau0);
        set(&mut c.beta, self.beta);
        set(&mut c.delta, self.delta);
        set(&mut c.mu, self.mu);
        set(&mut c.accept_eps, self.accept_eps);
        set(&mut c.eps_hat, self.eps_hat);
        set(&mut c.alpha_bar, self.alpha_bar);
        set(&mut c.alpha_max, self.alpha_max);
        set(&mut c.theta0, self.theta0);
        set(&mut c.max_inner_backtracks, self.max_inner);
        set(&mut c.max_outer_trials, self.max_outer);
        set(&mut c.rtol, self.rtol);
        set(&mut c.pdhg_rho, self.rho);
        if self.tau.is_some() {
            c.pdhg_tau = self.tau;
        }
        if self.sigma.is_some() {
            c.pdhg_sigma = self.sigma;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn apply_problem(&self, p: &mut ProblemParams) -> Result<()> {
        let name = p.kind().name();
        let given: [(&str, bool); 12] = [
            ("n", self.n.is_some()),
            ("lambda", self.lambda.is_some()),
            ("num-segs", self.num_segs.is_some()),
            ("len-segs", self.len_segs.is_some()),
            ("noise", self.noise.is_some()),
            ("size", self.size.is_some()),
            ("nu", self.nu.is_some()),
            ("burden", self.burden.is_some()),
            ("eps", self.eps.is_some()),
            ("levels", self.levels.is_some()),
            ("split", self.split.is_some()),
            ("image", self.image.is_some()),
        ];
        let allowed: &[&str] = match p {
            ProblemParams::Lasso { n, lambda } => {
                set(n, self.n);
                set(lambda, self.lambda);
                &["n", "lambda"]
            }
            ProblemParams::Tv1d { num_segs, len_segs, noise, lambda } => {
                set(num_segs, self.num_segs);
                set(len_segs, self.len_segs);
                set(noise, self.noise);
                set(lambda, self.lambda);
                &["num-segs", "len-segs", "noise", "lambda"]
            }
            ProblemParams::Tv2d { size, noise, split, image } => {
                set(size, self.size);
                set(noise, self.noise);
                if let Some(s) = &self.split {
                    *split = s.clone();
                }
                if self.image.is_some() {
                    *image = self.image.clone();
                }
                &["size", "noise", "split", "image"]
            }
            ProblemParams::Mri { size, nu, burden, noise, eps, levels } => {
                set(size, self.size);
                set(nu, self.nu);
                set(burden, self.burden);
                set(noise, self.noise);
                if self.eps.is_some() {
                    *eps = self.eps;
                }
                if self.levels.is_some() {
                    *levels = self.levels;
                }
                &["size", "nu", "burden", "noise", "eps", "levels"]
            }
        };
        match given.iter().find(|(flag, on)| *on && !allowed.contains(flag)) {
            Some((flag, _)) => Err(CliError::Config(format!("--{flag} does not apply to {name}"))),
            None => Ok(()),
        }
    }
}

/// Default specs of the requested experiments as one JSON document.
pub fn describe(experiment: Option<&str>) -> Result<String> {
    let kinds = match experiment {
        Some(name) => vec![name.parse::<ProblemKind>()?],
        None => ProblemKind::ALL.to_vec(),
    };
    let mut specs = serde_json::Map::new();
    for kind in kinds {
        let mut spec = RunSpec::new(kind, SolverChoice::One(rpdhg_core::solvers::SolverKind::Rpdhg), PathBuf::new());
        spec.out = PathBuf::from("runs").join(kind.name());
        specs.insert(kind.name().into(), serde_json::to_value(&spec).expect("run specs serialize"));
    }
    let solvers: Vec<&str> = rpdhg_core::solvers::SolverKind::ALL.iter().map(|k| k.name()).chain(["all"]).collect();
    let doc = serde_json::json!({ "solvers": solvers, "experiments": specs });
    Ok(serde_json::to_string_pretty(&doc).expect("json values serialize"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("rpdhg").chain(args.iter().copied()))
    }

    fn run_spec(args: &[&str]) -> Result<RunSpec> {
        match parse(args).unwrap().command {
            Command::Run(r) => r.to_spec(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn overrides_apply() {
        let s = run_spec(&["run", "lasso", "--n", "20", "--seed", "7", "--solver", "pdhg", "--tau", "0.1", "--sigma", "0.2"]).unwrap();
        assert_eq!(s.experiment, ProblemParams::Lasso { n: 20, lambda: 0.1 });
        assert_eq!(s.seed, 7);
        assert_eq!(s.config.pdhg_tau, Some(0.1));
        assert_eq!(s.out, PathBuf::from("runs/lasso"));
        let m = run_spec(&["run", "mri", "--size", "16", "--eps", "0.5", "--solver", "all"]).unwrap();
        assert_eq!(m.solver, SolverChoice::All);
        assert!(matches!(m.experiment, ProblemParams::Mri { size: 16, eps: Some(e), .. } if e == 0.5));
    }

    #[test]
    fn bad_names_and_flags() {
        assert!(run_spec(&["run", "svm"]).is_err());
        assert!(run_spec(&["run", "lasso", "--solver", "adam"]).is_err());
        assert!(run_spec(&["run", "tv1d", "--n", "5"]).is_err());
        assert!(run_spec(&["run", "tv2d", "--split", "lu"]).is_err());
        assert!(parse(&["run"]).is_err());
    }

    #[test]
    fn describe_lists_every_experiment() {
        let doc: serde_json::Value = serde_json::from_str(&describe(None).unwrap()).unwrap();
        for k in ProblemKind::ALL {
            let spec: RunSpec = serde_json::from_value(doc["experiments"][k.name()].clone()).unwrap();
            assert_eq!(spec.experiment.kind(), k);
        }
        assert_eq!(doc["solvers"].as_array().unwrap().len(), 5);
        assert!(describe(Some("nope")).is_err());
    }
}
