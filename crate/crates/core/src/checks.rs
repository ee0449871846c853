//! Randomized invariant checks: integration by parts, gradient against
//! central finite differences, and the L∞ embedding bound. Each trial
//! draws from its own seeded stream, so results are identical with or
//! without parallel execution.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{
    gamma_at, laplacian_all, norm_h_lambda_sq, norm_lq, Exponent, PairFunction, VertexFunction,
};
use crate::exec::{map_indexed, stream_seed};
use crate::functional::{DirichletProblem, LambdaProblem, Variational};
use crate::graph::{DomainSet, GraphBuilder, PotentialField, VertexId, WeightedGraph};
use crate::io::ProblemSet;

pub fn trial_rng(seed: u64, k: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, k))
}

/// Shape of the random graphs drawn by [`random_connected_graph`].
#[derive(Debug, Clone, PartialEq)]
pub struct RandomGraphConfig {
    pub min_vertices: usize,
    pub max_vertices: usize,
    /// Probability of each non-tree edge.
    pub extra_edge_prob: f64,
    pub weight_range: (f64, f64),
    pub measure_range: (f64, f64),
}

impl Default for RandomGraphConfig {
    fn default() -> Self {
        RandomGraphConfig {
            min_vertices: 3,
            max_vertices: 30,
            extra_edge_prob: 0.15,
            weight_range: (0.1, 3.0),
            measure_range: (0.1, 3.0),
        }
    }
}

/// A random spanning tree (each vertex attached to an earlier one) plus
/// independent extra edges; weights and measures uniform in their ranges.
pub fn random_connected_graph<R: Rng>(rng: &mut R, cfg: &RandomGraphConfig) -> WeightedGraph {
    let n = rng.gen_range(cfg.min_vertices..=cfg.max_vertices.max(cfg.min_vertices));
    random_graph_with(rng, n, cfg)
}

pub fn random_graph_with<R: Rng>(rng: &mut R, n: usize, cfg: &RandomGraphConfig) -> WeightedGraph {
    let (w0, w1) = cfg.weight_range;
    let (m0, m1) = cfg.measure_range;
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.add_vertex(format!("x{}", i + 1), rng.gen_range(m0..=m1))
            .expect("fresh labels");
    }
    let mut tree = vec![None; n];
    for (i, parent) in tree.iter_mut().enumerate().skip(1) {
        let j = rng.gen_range(0..i);
        *parent = Some(j);
        b.add_edge(VertexId(i), VertexId(j), rng.gen_range(w0..=w1))
            .expect("tree edges are distinct");
    }
    for i in 0..n {
        for (j, parent) in tree.iter().enumerate().skip(i + 1) {
            if *parent == Some(i) {
                continue;
            }
            if rng.gen_bool(cfg.extra_edge_prob) {
                b.add_edge(VertexId(i), VertexId(j), rng.gen_range(w0..=w1))
                    .expect("each pair visited once");
            }
        }
    }
    b.build().expect("spanning tree makes the graph connected")
}

/// i.i.d. uniform values in `[-scale, scale]`.
pub fn random_function<R: Rng>(rng: &mut R, n: usize, scale: f64) -> VertexFunction {
    VertexFunction::new((0..n).map(|_| rng.gen_range(-scale..=scale)).collect())
        .expect("finite samples")
}

pub fn random_pair<R: Rng>(rng: &mut R, n: usize, scale: f64) -> PairFunction {
    PairFunction {
        u: random_function(rng, n, scale),
        v: random_function(rng, n, scale),
    }
}

/// Two random wells sharing at least one vertex.
pub fn random_wells<R: Rng>(rng: &mut R, n: usize) -> (DomainSet, DomainSet) {
    let shared = rng.gen_range(0..n);
    let a = DomainSet::from_predicate(n, |x| x.0 == shared || rng.gen_bool(0.4));
    let b = DomainSet::from_predicate(n, |x| x.0 == shared || rng.gen_bool(0.4));
    (a, b)
}

/// Potentials vanishing exactly on random overlapping wells and uniform
/// in `[0.5, 3]` elsewhere.
pub fn random_potentials<R: Rng>(rng: &mut R, g: &WeightedGraph) -> PotentialField {
    let n = g.vertex_count();
    let (wa, wb) = random_wells(rng, n);
    let mut draw = |well: &DomainSet| -> Vec<f64> {
        (0..n)
            .map(|i| {
                if well.contains(VertexId(i)) {
                    0.0
                } else {
                    rng.gen_range(0.5..=3.0)
                }
            })
            .collect()
    };
    let a = draw(&wa);
    let b = draw(&wb);
    PotentialField::new(g, a, b).expect("wells overlap")
}

/// Relative defect of `∫Γ(u,ξ)dμ = −∫(Δu)ξ dμ`, measured against
/// `∫|Γ(u,ξ)|dμ + ∫|(Δu)ξ|dμ` so cancellation cannot inflate it.
pub fn integration_by_parts_error(
    g: &WeightedGraph,
    u: &VertexFunction,
    xi: &VertexFunction,
) -> f64 {
    let lap = laplacian_all(g, u);
    let (mut lhs, mut rhs, mut scale) = (0.0, 0.0, 0.0);
    for x in g.vertices() {
        let m = g.measure(x);
        let gamma = m * gamma_at(g, u.values(), xi.values(), x);
        let flux = m * lap[x] * xi[x];
        lhs += gamma;
        rhs += flux;
        scale += gamma.abs() + flux.abs();
    }
    if scale == 0.0 {
        0.0
    } else {
        (lhs + rhs).abs() / scale
    }
}

/// Central finite difference of the energy along `dir` compared with the
/// residual pairing `∫(R_u h_u + R_v h_v) dμ`.
///
/// The error is relative to `max(|pairing|, 1e-3·‖R‖·‖h‖)`, the second
/// term guarding directions nearly orthogonal to the residual.
pub fn gradient_fd_error<P: Variational + ?Sized>(
    p: &P,
    w: &PairFunction,
    dir: &PairFunction,
) -> f64 {
    let g = p.graph();
    let r = p.residual(w);
    let pairing: f64 = g
        .vertices()
        .map(|x| g.measure(x) * (r.u[x] * dir.u[x] + r.v[x] * dir.v[x]))
        .sum();
    let scale = w.u.sup_abs().max(w.v.sup_abs()).max(1.0);
    let h = 1e-5 * scale / dir.u.sup_abs().max(dir.v.sup_abs()).max(f64::MIN_POSITIVE);
    let jp = p.energy(&w.add_scaled(h, dir));
    let jm = p.energy(&w.add_scaled(-h, dir));
    let fd = (jp - jm) / (2.0 * h);
    let denom = pairing.abs().max(1e-3 * p.l2_norm(&r) * p.l2_norm(dir));
    if denom == 0.0 {
        fd.abs()
    } else {
        (fd - pairing).abs() / denom
    }
}

/// `‖w‖_{L∞} / (2·sqrt(1/μ_min)·‖w‖_{H_λ})`; at most 1 by the embedding.
pub fn embedding_ratio(p: &LambdaProblem, w: &PairFunction) -> f64 {
    let g = p.graph();
    let lhs = norm_lq(g, w, Exponent::Infinity).expect("q = infinity is valid");
    let rhs = 2.0 * (1.0 / g.mu_min()).sqrt() * norm_h_lambda_sq(p, w).sqrt();
    if rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// Aggregate of one randomized check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub trials: usize,
    /// Largest observed error (or ratio, for the embedding bound).
    pub worst: f64,
    pub tolerance: f64,
    pub failures: usize,
}

impl CheckOutcome {
    fn from_values(name: &'static str, values: &[f64], tolerance: f64) -> Self {
        CheckOutcome {
            name,
            trials: values.len(),
            worst: values.iter().fold(0.0f64, |m, &v| m.max(v)),
            tolerance,
            failures: values.iter().filter(|&&v| !(v <= tolerance)).count(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: {} trials, worst {:.3e} (tolerance {:.1e}), {} failures",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.trials,
            self.worst,
            self.tolerance,
            self.failures
        )
    }
}

pub const IBP_TOLERANCE: f64 = 1e-12;
pub const GRADIENT_TOLERANCE: f64 = 1e-6;
pub const EMBEDDING_TOLERANCE: f64 = 1.0;

/// Integration by parts on `graphs` random graphs, each with random `u`, `ξ`.
pub fn integration_by_parts_suite(
    seed: u64,
    graphs: usize,
    cfg: &RandomGraphConfig,
    parallel: bool,
) -> CheckOutcome {
    let errors = map_indexed(graphs, parallel, |k| {
        let mut rng = trial_rng(seed, k);
        let g = random_connected_graph(&mut rng, cfg);
        let n = g.vertex_count();
        let u = random_function(&mut rng, n, 10.0);
        let xi = random_function(&mut rng, n, 10.0);
        integration_by_parts_error(&g, &u, &xi)
    });
    CheckOutcome::from_values("integration by parts", &errors, IBP_TOLERANCE)
}

/// Finite-difference checks of both energies on one random graph with
/// `n` vertices, over `directions` random directions each.
pub fn gradient_suite(seed: u64, n: usize, directions: usize, parallel: bool) -> Vec<CheckOutcome> {
    let mut rng = trial_rng(seed, usize::MAX);
    let g = Arc::new(random_graph_with(
        &mut rng,
        n,
        &RandomGraphConfig::default(),
    ));
    let potentials = random_potentials(&mut rng, &g);
    let lambda = 10f64.powf(rng.gen_range(-1.0..=3.0));
    let (alpha, beta) = (rng.gen_range(1.5..=3.5), rng.gen_range(1.5..=3.5));
    let p = LambdaProblem::new(Arc::clone(&g), potentials.clone(), lambda, alpha, beta)
        .expect("valid parameters");
    let d = DirichletProblem::from_potentials(g, &potentials, alpha, beta).expect("wells overlap");
    gradient_checks(&p, &d, seed, directions, parallel)
}

fn gradient_checks(
    p: &LambdaProblem,
    d: &DirichletProblem,
    seed: u64,
    directions: usize,
    parallel: bool,
) -> Vec<CheckOutcome> {
    let n = p.graph().vertex_count();
    let lambda_errors = map_indexed(directions, parallel, |k| {
        let mut rng = trial_rng(seed, k);
        let w = random_pair(&mut rng, n, 2.0);
        let dir = random_pair(&mut rng, n, 1.0);
        gradient_fd_error(p, &w, &dir)
    });
    let omega_errors = map_indexed(directions, parallel, |k| {
        let mut rng = trial_rng(seed ^ 0x5EED, k);
        let mut w = random_pair(&mut rng, n, 2.0);
        let mut dir = random_pair(&mut rng, n, 1.0);
        d.project_admissible(&mut w);
        d.project_admissible(&mut dir);
        gradient_fd_error(d, &w, &dir)
    });
    vec![
        CheckOutcome::from_values("gradient of J_lambda", &lambda_errors, GRADIENT_TOLERANCE),
        CheckOutcome::from_values("gradient of J_Omega", &omega_errors, GRADIENT_TOLERANCE),
    ]
}

/// Embedding bound on `pairs` random pairs over random graphs, cycling
/// through `lambdas`.
pub fn embedding_suite(seed: u64, pairs: usize, lambdas: &[f64], parallel: bool) -> CheckOutcome {
    let cfg = RandomGraphConfig::default();
    let ratios = map_indexed(pairs, parallel, |k| {
        let mut rng = trial_rng(seed, k);
        let g = Arc::new(random_connected_graph(&mut rng, &cfg));
        let potentials = random_potentials(&mut rng, &g);
        let n = g.vertex_count();
        let lambda = lambdas[k % lambdas.len()];
        let p = LambdaProblem::new(g, potentials, lambda, 2.0, 2.0).expect("valid parameters");
        let scale = 10f64.powf(rng.gen_range(-3.0..=3.0));
        let w = random_pair(&mut rng, n, scale);
        embedding_ratio(&p, &w)
    });
    CheckOutcome::from_values("embedding bound", &ratios, EMBEDDING_TOLERANCE)
}

/// The invariant suite on the graph and potentials of a problem file:
/// integration by parts, both gradients, and the embedding bound at each
/// λ (the file's list, or `1, 10, ..., 10^4` when it has none).
pub fn check_problem(
    set: &ProblemSet,
    seed: u64,
    trials: usize,
    parallel: bool,
) -> crate::Result<Vec<CheckOutcome>> {
    let g = set.graph();
    let n = g.vertex_count();
    let ibp = map_indexed(trials, parallel, |k| {
        let mut rng = trial_rng(seed, k);
        let u = random_function(&mut rng, n, 10.0);
        let xi = random_function(&mut rng, n, 10.0);
        integration_by_parts_error(g, &u, &xi)
    });
    let mut out = vec![CheckOutcome::from_values(
        "integration by parts",
        &ibp,
        IBP_TOLERANCE,
    )];

    let lambdas: Vec<f64> = if set.lambdas().is_empty() {
        vec![1.0, 10.0, 100.0, 1e3, 1e4]
    } else {
        set.lambdas().to_vec()
    };
    let d = set.dirichlet()?;
    let p = set.lambda_problem(lambdas[0])?;
    out.extend(gradient_checks(&p, &d, seed, trials, parallel));

    let problems = lambdas
        .iter()
        .map(|&l| set.lambda_problem(l))
        .collect::<crate::Result<Vec<_>>>()?;
    let ratios = map_indexed(trials, parallel, |k| {
        let mut rng = trial_rng(seed ^ 0xE1B, k);
        let scale = 10f64.powf(rng.gen_range(-3.0..=3.0));
        let w = random_pair(&mut rng, n, scale);
        embedding_ratio(&problems[k % problems.len()], &w)
    });
    out.push(CheckOutcome::from_values(
        "embedding bound",
        &ratios,
        EMBEDDING_TOLERANCE,
    ));
    Ok(out)
}
