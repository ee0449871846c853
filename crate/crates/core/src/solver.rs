//! Ground states by projected gradient descent on the Nehari manifold.
//!
//! Each restart seeds a positive pair (on `Ω_a ∩ Ω_b`, or on the whole
//! admissible set for odd restarts), scales it onto the manifold, then
//! alternates an Armijo-backtracked step along the (optionally
//! Jacobi-preconditioned) negative residual with a Nehari re-projection.
//! The first trial step grows while the residual falls and shrinks, down
//! to a floor, while it rises. The sufficient-decrease test is applied to the energy
//! of the re-projected trial point, so the accepted energies are
//! non-increasing along a run. Restarts are independent; the lowest
//! converged energy wins, ties going to the lower restart index.

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{PairFunction, VertexFunction};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, stream_seed};
use crate::functional::{
    scale_from_parts, DirichletProblem, LambdaProblem, NehariDiagnostics, Variational,
};
use crate::graph::DomainSet;

/// Search direction transform applied to the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    /// Plain steepest descent along `−R`.
    None,
    /// `−R / D` with `D` the diagonal of the linear operator
    /// `−Δ + (λa + 1)`; keeps the step size independent of λ.
    Jacobi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Tolerance on the L²(dμ) norm of the residual.
    pub grad_tol: f64,
    pub step_init: f64,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub restarts: usize,
    pub rng_seed: u64,
    pub preconditioner: Preconditioner,
    /// Consecutive iterations without progress before a run is abandoned.
    pub stall_window: usize,
    /// Run restarts concurrently when the `parallel` feature is enabled.
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 50_000,
            grad_tol: 1e-9,
            step_init: 1.0,
            armijo_c: 1e-4,
            backtrack: 0.5,
            restarts: 8,
            rng_seed: 0,
            preconditioner: Preconditioner::Jacobi,
            stall_window: 200,
            parallel: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value: f64, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if self.max_iters == 0 {
            return bad("max_iters", 0.0, "must be positive");
        }
        if self.restarts == 0 {
            return bad("restarts", 0.0, "must be positive");
        }
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol", self.grad_tol, "must be positive");
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return bad("step_init", self.step_init, "must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c", self.armijo_c, "must lie in (0, 1)");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack", self.backtrack, "must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub pair: PairFunction,
    pub energy: f64,
    pub residual_norm: f64,
    pub nehari: NehariDiagnostics,
    pub iterations: usize,
    pub restart_index: usize,
    pub converged: bool,
}

impl SolveResult {
    /// True when both components are nonnegative everywhere.
    pub fn is_nonnegative(&self) -> bool {
        self.pair
            .u
            .values()
            .iter()
            .chain(self.pair.v.values())
            .all(|&x| x >= 0.0)
    }
}

/// Why a line search gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stall {
    /// The step shrank below the floor without sufficient decrease.
    StepUnderflow,
    /// Every trial point had zero coupling.
    Degenerate,
}

const MIN_STEP_RATIO: f64 = 1e-16;

// Lower bound of the residual-driven step adaptation, relative to
// `step_init`; the line search may still backtrack below it.
const MIN_ADAPTIVE_STEP: f64 = 1e-3;

// Rounding allowance on energy comparisons; near convergence the exact
// decrease falls below the resolution of the energy itself.
fn energy_slack(energy: f64) -> f64 {
    32.0 * f64::EPSILON * (1.0 + energy.abs())
}

struct Trial {
    raw: PairFunction,
    projected: PairFunction,
    energy: f64,
    step: f64,
}

fn project_onto_nehari<P: Variational + ?Sized>(
    p: &P,
    w: &PairFunction,
) -> Option<(PairFunction, f64)> {
    let norm_sq = p.norm_sq(w);
    let coupling = p.coupling(w);
    let t = scale_from_parts(norm_sq, coupling, p.alpha() + p.beta()).ok()?;
    let projected = w.scaled(t);
    let energy = p.energy(&projected);
    Some((projected, energy))
}

fn precondition(r: &PairFunction, diag: Option<&(Vec<f64>, Vec<f64>)>) -> PairFunction {
    match diag {
        None => r.clone(),
        Some((du, dv)) => {
            let div = |f: &VertexFunction, d: &[f64]| {
                VertexFunction::from_vec(f.values().iter().zip(d).map(|(a, b)| a / b).collect())
            };
            PairFunction {
                u: div(&r.u, du),
                v: div(&r.v, dv),
            }
        }
    }
}

fn l2_pairing<P: Variational + ?Sized>(p: &P, a: &PairFunction, b: &PairFunction) -> f64 {
    let g = p.graph();
    g.vertices()
        .map(|x| g.measure(x) * (a.u[x] * b.u[x] + a.v[x] * b.v[x]))
        .sum()
}

fn line_search<P: Variational + ?Sized>(
    p: &P,
    w: &PairFunction,
    energy: f64,
    residual: &PairFunction,
    direction: &PairFunction,
    step: f64,
    cfg: &SolverConfig,
) -> std::result::Result<Trial, Stall> {
    let slope = l2_pairing(p, residual, direction);
    if slope == 0.0 {
        return Ok(Trial {
            raw: w.clone(),
            projected: w.clone(),
            energy,
            step,
        });
    }
    let floor = cfg.step_init * MIN_STEP_RATIO;
    let slack = energy_slack(energy);
    let mut s = step;
    let mut saw_nondegenerate = false;
    while s >= floor {
        let mut raw = w.add_scaled(-s, direction);
        p.project_admissible(&mut raw);
        if let Some((projected, e)) = project_onto_nehari(p, &raw) {
            saw_nondegenerate = true;
            if e <= energy - cfg.armijo_c * s * slope + slack {
                return Ok(Trial {
                    raw,
                    projected,
                    energy: e,
                    step: s,
                });
            }
        }
        s *= cfg.backtrack;
    }
    Err(if saw_nondegenerate {
        Stall::StepUnderflow
    } else {
        Stall::Degenerate
    })
}

/// One Armijo-backtracked step from `w` along the negative residual of
/// `p`, preconditioned per `cfg`. Returns the trial pair before Nehari
/// re-projection together with the accepted step length; the
/// sufficient-decrease test `J(P(w′)) ≤ J(w) − c·s·⟨R, d⟩` is evaluated
/// at the re-projection `P(w′)`.
pub fn descent_step<P: Variational + ?Sized>(
    p: &P,
    w: &PairFunction,
    step: f64,
    cfg: &SolverConfig,
) -> std::result::Result<(PairFunction, f64), Stall> {
    let residual = p.residual(w);
    let diag = match cfg.preconditioner {
        Preconditioner::None => None,
        Preconditioner::Jacobi => Some(p.linear_diagonal()),
    };
    let direction = precondition(&residual, diag.as_ref());
    let energy = p.energy(w);
    line_search(p, w, energy, &residual, &direction, step, cfg).map(|t| (t.raw, t.step))
}

fn run_descent<P: Variational + ?Sized>(
    p: &P,
    start: &PairFunction,
    restart_index: usize,
    cfg: &SolverConfig,
    diag: Option<&(Vec<f64>, Vec<f64>)>,
) -> Option<SolveResult> {
    let mut w = start.clone();
    p.project_admissible(&mut w);
    let (mut w, mut energy) = project_onto_nehari(p, &w)?;

    let mut step = cfg.step_init;
    let mut best_residual = f64::INFINITY;
    let mut best_energy = energy;
    let mut idle = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;
    let mut residual_norm;

    let mut last_residual = f64::INFINITY;

    loop {
        let residual = p.residual(&w);
        residual_norm = p.l2_norm(&residual);
        // grow the step after a residual decrease, shrink it otherwise;
        // near the minimum this breaks oscillation the energy test alone
        // cannot see
        step = if residual_norm < last_residual {
            (step / cfg.backtrack).min(cfg.step_init)
        } else if residual_norm > last_residual {
            (step * cfg.backtrack).max(cfg.step_init * MIN_ADAPTIVE_STEP)
        } else {
            step
        };
        last_residual = residual_norm;
        if residual_norm <= cfg.grad_tol {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iters {
            break;
        }

        let progressed =
            residual_norm < best_residual || energy < best_energy - energy_slack(best_energy);
        best_residual = best_residual.min(residual_norm);
        best_energy = best_energy.min(energy);
        idle = if progressed { 0 } else { idle + 1 };
        if idle >= cfg.stall_window {
            debug!("restart {restart_index}: no progress for {idle} iterations");
            break;
        }

        let direction = precondition(&residual, diag);
        match line_search(p, &w, energy, &residual, &direction, step, cfg) {
            Ok(trial) => {
                if trial.energy > energy + energy_slack(energy) {
                    warn!(
                        "restart {restart_index}: energy rose from {energy} to {} at iteration {iterations}",
                        trial.energy
                    );
                }
                w = trial.projected;
                energy = trial.energy;
                step = trial.step;
            }
            Err(stall) => {
                debug!("restart {restart_index}: line search stalled ({stall:?}) at iteration {iterations}");
                break;
            }
        }
        iterations += 1;
    }

    let nehari = p.diagnostics(&w);
    if !(nehari.coupling > 0.0) {
        return None;
    }
    debug!(
        "restart {restart_index}: energy {} residual {residual_norm:e} after {iterations} iterations",
        nehari.energy
    );
    Some(SolveResult {
        energy: nehari.energy,
        pair: w,
        residual_norm,
        nehari,
        iterations,
        restart_index,
        converged,
    })
}

/// Positive i.i.d. uniform(0.5, 1.5) values from a generator keyed by
/// `(seed, restart)`. Even restarts seed only the start support (the
/// overlap of the wells) and are zero elsewhere; odd restarts seed every
/// vertex and are then cut to the admissible set. The overlap starts are
/// the natural ones but can all fall into the basin of a local minimum
/// centred on the overlap, which the full-support starts escape.
pub fn initial_pair<P: Variational + ?Sized>(p: &P, seed: u64, restart: usize) -> PairFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, restart));
    let n = p.graph().vertex_count();
    let support = if restart.is_multiple_of(2) {
        p.start_support()
    } else {
        DomainSet::full(n)
    };
    let mut w = PairFunction::zeros(n);
    for x in support.iter() {
        w.u[x] = rng.gen_range(0.5..1.5);
        w.v[x] = rng.gen_range(0.5..1.5);
    }
    p.project_admissible(&mut w);
    w
}

fn better(candidate: &SolveResult, incumbent: &SolveResult) -> bool {
    if candidate.converged != incumbent.converged {
        return candidate.converged;
    }
    let tie = 1e-12 * incumbent.energy.abs().max(1.0);
    candidate.energy < incumbent.energy - tie
}

/// Runs `cfg.restarts` seeded cold starts followed by the given warm
/// starts (restart indices `cfg.restarts..`), and keeps the best.
pub fn solve_with_starts<P: Variational + ?Sized>(
    p: &P,
    cfg: &SolverConfig,
    warm_starts: &[PairFunction],
) -> Result<SolveResult> {
    cfg.validate()?;
    let n = p.graph().vertex_count();
    for w in warm_starts {
        w.check_len(n)?;
    }
    let diag = match cfg.preconditioner {
        Preconditioner::None => None,
        Preconditioner::Jacobi => Some(p.linear_diagonal()),
    };
    let total = cfg.restarts + warm_starts.len();
    let outcomes = map_indexed(total, cfg.parallel, |r| {
        let start = if r < cfg.restarts {
            initial_pair(p, cfg.rng_seed, r)
        } else {
            warm_starts[r - cfg.restarts].clone()
        };
        run_descent(p, &start, r, cfg, diag.as_ref())
    });

    let mut best: Option<SolveResult> = None;
    for result in outcomes.into_iter().flatten() {
        match &best {
            Some(b) if !better(&result, b) => {}
            _ => best = Some(result),
        }
    }
    let best = best.ok_or(Error::AllRestartsDegenerate)?;
    if !best.converged {
        warn!(
            "no restart converged; best residual {:e} (tolerance {:e})",
            best.residual_norm, cfg.grad_tol
        );
    }
    Ok(best)
}

/// Least-energy solution of the λ-system over `cfg.restarts` seeded starts.
pub fn solve_ground_state(p: &LambdaProblem, cfg: &SolverConfig) -> Result<SolveResult> {
    solve_with_starts(p, cfg, &[])
}

/// Least-energy solution of the Dirichlet system.
pub fn solve_dirichlet(d: &DirichletProblem, cfg: &SolverConfig) -> Result<SolveResult> {
    solve_with_starts(d, cfg, &[])
}
