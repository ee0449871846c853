//! `nehari`: solve, sweep and check coupled elliptic systems on graphs
//! described by problem files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use log::{info, warn};
use nehari::checks::check_problem;
use nehari::error::EXIT_UNCONVERGED;
use nehari::experiments::{lambda_sweep, SweepConfig};
use nehari::graph::{boundary, validate_graph, DomainSet, WeightedGraph};
use nehari::io::{read_problem, write_solution, write_sweep, ProblemSet};
use nehari::solver::{solve_dirichlet, solve_ground_state, SolveResult, SolverConfig};
use nehari::{Error, Result};

/// Exit status when an invariant check reports failures.
const EXIT_CHECK_FAILED: u8 = 1;

#[derive(Parser)]
#[command(name = "nehari", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state of the λ-problem; writes the solution CSV.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Potential depth; defaults to the first value listed in the file.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Ground state of the Dirichlet problem on the wells; writes the
    /// solution CSV.
    Dirichlet {
        #[command(flatten)]
        common: Common,
    },
    /// λ sweep against the Dirichlet ground state; writes the sweep CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated, strictly increasing λ values; defaults to the
        /// file's list, then to 1, 10, ..., 10^7.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        /// Also start each λ from the previous solution.
        #[arg(long, num_args = 0..=1, default_value_t = true, default_missing_value = "true", action = ArgAction::Set)]
        warm_start: bool,
    },
    /// Randomized invariant checks on the file's graph and potentials.
    Check {
        #[command(flatten)]
        common: Common,
        /// Random trials per check.
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Parses and validates the file and prints a summary.
    Validate {
        file: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Problem file.
    file: PathBuf,
    /// Exponent of u; overrides the file.
    #[arg(long)]
    alpha: Option<f64>,
    /// Exponent of v; overrides the file.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random restarts per solve.
    #[arg(long)]
    restarts: Option<usize>,
    /// Tolerance on the residual norm.
    #[arg(long)]
    tol: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Run everything on the calling thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn problem(&self) -> Result<ProblemSet> {
        load(&self.file, self.alpha, self.beta)
    }

    fn solver(&self) -> Result<SolverConfig> {
        let defaults = SolverConfig::default();
        let cfg = SolverConfig {
            rng_seed: self.seed,
            restarts: self.restarts.unwrap_or(defaults.restarts),
            grad_tol: self.tol.unwrap_or(defaults.grad_tol),
            parallel: !self.sequential,
            ..defaults
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn load(path: &Path, alpha: Option<f64>, beta: Option<f64>) -> Result<ProblemSet> {
    let set = read_problem(path)?;
    let (a, b) = (alpha.unwrap_or(set.alpha()), beta.unwrap_or(set.beta()));
    let set = set.with_exponents(a, b);
    // exponent constraints are enforced by the problem constructors
    set.dirichlet()?;
    Ok(set)
}

fn report(what: &str, r: &SolveResult) {
    eprintln!(
        "{what}: energy {:.12e}, residual {:.3e}, {} iterations (restart {}), {}",
        r.energy,
        r.residual_norm,
        r.iterations,
        r.restart_index,
        if r.converged {
            "converged"
        } else {
            "NOT converged"
        }
    );
}

fn labels(g: &WeightedGraph, s: &DomainSet) -> String {
    s.iter().map(|x| g.label(x)).collect::<Vec<_>>().join(" ")
}

/// Runs a command; `Ok(Some(code))` means it completed but a solve did
/// not converge or a check failed.
fn run(command: Command) -> Result<Option<u8>> {
    match command {
        Command::Solve { common, lambda } => {
            let set = common.problem()?;
            let lambda = lambda.or_else(|| set.lambdas().first().copied()).ok_or(
                Error::InvalidParameter {
                    name: "lambda",
                    value: f64::NAN,
                    reason: "pass --lambda or list lambdas in the file",
                },
            )?;
            let p = set.lambda_problem(lambda)?;
            info!(
                "solving λ = {lambda} on {} vertices",
                set.graph().vertex_count()
            );
            let r = solve_ground_state(&p, &common.solver()?)?;
            write_solution(set.graph(), &r, common.sink()?)?;
            report(&format!("λ = {lambda}"), &r);
            Ok((!r.converged).then_some(EXIT_UNCONVERGED as u8))
        }
        Command::Dirichlet { common } => {
            let set = common.problem()?;
            let r = solve_dirichlet(&set.dirichlet()?, &common.solver()?)?;
            write_solution(set.graph(), &r, common.sink()?)?;
            report("Dirichlet", &r);
            Ok((!r.converged).then_some(EXIT_UNCONVERGED as u8))
        }
        Command::Sweep {
            common,
            lambdas,
            warm_start,
        } => {
            let set = common.problem()?;
            let mut cfg = SweepConfig {
                solver: common.solver()?,
                warm_start,
                ..SweepConfig::default()
            };
            if let Some(l) =
                lambdas.or_else(|| (!set.lambdas().is_empty()).then(|| set.lambdas().to_vec()))
            {
                cfg.lambdas = l;
            }
            let family = set.lambda_problem(cfg.lambdas.first().copied().unwrap_or(1.0))?;
            let outcome = lambda_sweep(&family, &set.dirichlet()?, &cfg)?;
            write_sweep(&outcome.records, common.sink()?)?;
            report("Dirichlet", &outcome.dirichlet);
            let failed: Vec<String> = outcome
                .records
                .iter()
                .filter(|r| !r.converged)
                .map(|r| r.lambda.to_string())
                .collect();
            if failed.is_empty() && outcome.dirichlet.converged {
                eprintln!("{} λ values, all converged", outcome.records.len());
                Ok(None)
            } else {
                warn!("unconverged at λ = {}", failed.join(", "));
                Ok(Some(EXIT_UNCONVERGED as u8))
            }
        }
        Command::Check { common, trials } => {
            let set = common.problem()?;
            let outcomes = check_problem(&set, common.seed, trials, !common.sequential)?;
            let mut sink = common.sink()?;
            for o in &outcomes {
                writeln!(sink, "{o}")?;
            }
            sink.flush()?;
            Ok((!outcomes.iter().all(|o| o.passed())).then_some(EXIT_CHECK_FAILED))
        }
        Command::Validate { file, alpha, beta } => {
            let set = load(&file, alpha, beta)?;
            let g = set.graph();
            let v = validate_graph(g)?;
            let d = set.dirichlet()?;
            println!("vertices {}", v.vertex_count);
            println!("edges {}", v.edge_count);
            println!("mu_min {}", v.mu_min);
            println!("alpha {}", set.alpha());
            println!("beta {}", set.beta());
            println!("omega_a {}", labels(g, d.omega_a()));
            println!("omega_b {}", labels(g, d.omega_b()));
            println!("boundary_a {}", labels(g, &boundary(g, d.omega_a())));
            println!("boundary_b {}", labels(g, &boundary(g, d.omega_b())));
            Ok(None)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(code)) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
