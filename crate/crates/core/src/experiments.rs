//! The 22-vertex well experiment: graph construction, the λ sweep and its
//! concentration/convergence metrics, and comparison against tabulated
//! Dirichlet values.

use std::sync::Arc;

use log::info;

use crate::calculus::{norm_h_sq, PairFunction};
use crate::error::{Component, Error, Result};
use crate::exec::map_indexed;
use crate::functional::{DirichletProblem, LambdaProblem};
use crate::graph::{boundary, DomainSet, GraphBuilder, PotentialField, VertexId, WeightedGraph};
use crate::solver::{solve_dirichlet, solve_with_starts, SolveResult, SolverConfig};

/// Reference adjacency for the 22-vertex graph. It reproduces the listed
/// boundaries of both wells and is invariant under [`G22_MIRROR`].
pub const G22_EDGES: [(&str, &str); 34] = [
    ("x1", "x2"),
    ("x1", "x5"),
    ("x1", "x4"),
    ("x3", "x4"),
    ("x4", "x6"),
    ("x2", "x3"),
    ("x5", "x6"),
    ("x7", "x8"),
    ("x8", "x9"),
    ("x10", "x11"),
    ("x11", "x12"),
    ("x2", "x7"),
    ("x5", "x10"),
    ("x3", "x9"),
    ("x6", "x12"),
    ("x8", "x11"),
    ("x1", "x13"),
    ("x4", "x22"),
    ("x7", "x17"),
    ("x10", "x17"),
    ("x9", "x18"),
    ("x12", "x18"),
    ("x7", "x14"),
    ("x10", "x19"),
    ("x9", "x16"),
    ("x12", "x21"),
    ("x14", "x15"),
    ("x15", "x19"),
    ("x16", "x20"),
    ("x20", "x21"),
    ("x13", "x22"),
    ("x15", "x20"),
    ("x13", "x17"),
    ("x18", "x22"),
];

/// Indices `i` (of `x_i`) where `a` vanishes.
pub const G22_WELL_A: [usize; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];
/// Indices `i` (of `x_i`) where `b` vanishes.
pub const G22_WELL_B: [usize; 9] = [1, 2, 3, 4, 5, 6, 10, 11, 12];
pub const G22_BOUNDARY_A: [usize; 9] = [10, 11, 12, 13, 14, 16, 17, 18, 22];
pub const G22_BOUNDARY_B: [usize; 9] = [7, 8, 9, 13, 17, 18, 19, 21, 22];

/// Transpositions of the well-exchanging automorphism; other vertices
/// are fixed.
pub const G22_MIRROR: [(usize, usize); 7] = [
    (2, 5),
    (3, 6),
    (7, 10),
    (8, 11),
    (9, 12),
    (14, 19),
    (16, 21),
];

/// Tabulated Dirichlet ground state: `(vertex index, component, value)`.
/// Vertices not listed are zero.
pub const G22_TABLE: [(usize, Component, f64); 18] = [
    (1, Component::U, 3.5308),
    (2, Component::U, 2.0210),
    (3, Component::U, 2.0210),
    (4, Component::U, 3.5308),
    (5, Component::U, 2.1900),
    (6, Component::U, 2.1900),
    (7, Component::U, 1.2943),
    (8, Component::U, 0.7708),
    (9, Component::U, 1.2943),
    (1, Component::V, 3.5308),
    (2, Component::V, 2.1900),
    (3, Component::V, 2.1900),
    (4, Component::V, 3.5308),
    (5, Component::V, 2.0210),
    (6, Component::V, 2.0210),
    (10, Component::V, 1.2943),
    (11, Component::V, 0.7708),
    (12, Component::V, 1.2943),
];

fn label(i: usize) -> String {
    format!("x{i}")
}

/// The graph, potentials and Dirichlet problem of the 22-vertex experiment.
#[derive(Debug, Clone)]
pub struct G22Instance {
    pub graph: Arc<WeightedGraph>,
    pub potentials: PotentialField,
    pub dirichlet: DirichletProblem,
}

impl G22Instance {
    /// The λ-problem on this instance with `α = β = 2`.
    pub fn lambda_problem(&self, lambda: f64) -> Result<LambdaProblem> {
        LambdaProblem::new(
            Arc::clone(&self.graph),
            self.potentials.clone(),
            lambda,
            2.0,
            2.0,
        )
    }
}

fn check_listing(
    g: &WeightedGraph,
    computed: &DomainSet,
    listed: &[usize],
    domain: &'static str,
) -> Result<()> {
    let names: Vec<String> = listed.iter().map(|&i| label(i)).collect();
    let expected = DomainSet::from_labels(g, names.iter().map(String::as_str))?;
    for x in g.vertices() {
        match (expected.contains(x), computed.contains(x)) {
            (true, false) => {
                return Err(Error::BoundaryMismatch {
                    domain,
                    vertex: g.label(x).to_owned(),
                    detail: "listed but not adjacent to the well",
                })
            }
            (false, true) => {
                return Err(Error::BoundaryMismatch {
                    domain,
                    vertex: g.label(x).to_owned(),
                    detail: "adjacent to the well but not listed",
                })
            }
            _ => {}
        }
    }
    Ok(())
}

/// Builds the 22-vertex instance (unit measure and weights) from an edge
/// list over labels `x1..x22`, and checks that both well boundaries match
/// the reference listings.
pub fn build_g22(edges: &[(&str, &str)]) -> Result<G22Instance> {
    let mut b = GraphBuilder::with_vertices(22, 1.0);
    for &(x, y) in edges {
        b.add_edge_by_label(x, y, 1.0)?;
    }
    let graph = b.build()?;
    let a = (1..=22)
        .map(|i| if G22_WELL_A.contains(&i) { 0.0 } else { 1.0 })
        .collect();
    let bv = (1..=22)
        .map(|i| if G22_WELL_B.contains(&i) { 0.0 } else { 1.0 })
        .collect();
    let potentials = PotentialField::new(&graph, a, bv)?;
    check_listing(
        &graph,
        &boundary(&graph, &potentials.omega_a()),
        &G22_BOUNDARY_A,
        "omega_a",
    )?;
    check_listing(
        &graph,
        &boundary(&graph, &potentials.omega_b()),
        &G22_BOUNDARY_B,
        "omega_b",
    )?;
    let graph = Arc::new(graph);
    let dirichlet = DirichletProblem::from_potentials(Arc::clone(&graph), &potentials, 2.0, 2.0)?;
    Ok(G22Instance {
        graph,
        potentials,
        dirichlet,
    })
}

/// [`build_g22`] on [`G22_EDGES`].
pub fn reference_g22() -> G22Instance {
    build_g22(&G22_EDGES).expect("reference adjacency is consistent")
}

/// The well-exchanging vertex permutation of the reference graph, as an
/// index map `x ↦ σ(x)`.
pub fn g22_mirror(g: &WeightedGraph) -> Vec<VertexId> {
    let mut map: Vec<VertexId> = g.vertices().collect();
    for &(i, j) in &G22_MIRROR {
        let (xi, xj) = (
            g.vertex(&label(i)).expect("x1..x22 present"),
            g.vertex(&label(j)).expect("x1..x22 present"),
        );
        map[xi.index()] = xj;
        map[xj.index()] = xi;
    }
    map
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    pub solver: SolverConfig,
    pub warm_start: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            lambdas: decade_grid(0, 7, 1),
            solver: SolverConfig::default(),
            warm_start: true,
        }
    }
}

impl SweepConfig {
    /// Four points per decade over the same range.
    pub fn dense() -> Self {
        SweepConfig {
            lambdas: decade_grid(0, 7, 4),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for &l in &self.lambdas {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "lambda",
                    value: l,
                    reason: "lambda must be positive",
                });
            }
        }
        if let Some(w) = self.lambdas.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter {
                name: "lambdas",
                value: w[1],
                reason: "sweep values must be strictly increasing",
            });
        }
        self.solver.validate()
    }
}

/// `10^from ..= 10^to` with `per_decade` log-spaced points per decade.
pub fn decade_grid(from: i32, to: i32, per_decade: usize) -> Vec<f64> {
    let steps = (to - from) as usize * per_decade;
    (0..=steps)
        .map(|k| {
            if k % per_decade == 0 {
                10f64.powi(from + (k / per_decade) as i32)
            } else {
                10f64.powf(from as f64 + k as f64 / per_decade as f64)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub lambda: f64,
    /// Ground-state level `c_λ`.
    pub energy: f64,
    /// `max |u_λ|` off the Dirichlet well of `u`.
    pub sup_u_outside: f64,
    /// `max |v_λ|` off the Dirichlet well of `v`.
    pub sup_v_outside: f64,
    /// `‖(u_λ, v_λ) − (u_Ω, v_Ω)‖_H` after sign alignment.
    pub h_distance: f64,
    pub residual_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub dirichlet: SolveResult,
    pub records: Vec<SweepRecord>,
    /// Per-λ solutions, `None` where the solver failed.
    pub solutions: Vec<Option<SolveResult>>,
}

/// `min` over independent sign flips of each component of
/// `‖(s_u u, s_v v) − reference‖_H`.
pub fn aligned_h_distance(g: &WeightedGraph, w: &PairFunction, reference: &PairFunction) -> f64 {
    let mut best = f64::INFINITY;
    for su in [1.0, -1.0] {
        for sv in [1.0, -1.0] {
            let flipped = PairFunction {
                u: w.u.scaled(su),
                v: w.v.scaled(sv),
            };
            let diff = flipped.add_scaled(-1.0, reference);
            best = best.min(norm_h_sq(g, &diff).sqrt());
        }
    }
    best
}

fn record_for(
    d: &DirichletProblem,
    lambda: f64,
    result: Option<&SolveResult>,
    reference: &PairFunction,
) -> SweepRecord {
    match result {
        Some(r) => {
            let g = d.graph();
            SweepRecord {
                lambda,
                energy: r.energy,
                sup_u_outside: r.pair.u.sup_abs_on(&d.omega_a().complement()),
                sup_v_outside: r.pair.v.sup_abs_on(&d.omega_b().complement()),
                h_distance: aligned_h_distance(g, &r.pair, reference),
                residual_norm: r.residual_norm,
                converged: r.converged,
            }
        }
        None => SweepRecord {
            lambda,
            energy: f64::NAN,
            sup_u_outside: f64::NAN,
            sup_v_outside: f64::NAN,
            h_distance: f64::NAN,
            residual_norm: f64::NAN,
            converged: false,
        },
    }
}

/// Solves the Dirichlet problem once, then the λ-problem at every sweep
/// value, and reports concentration and convergence metrics per λ.
///
/// With `warm_start`, each λ also starts from the previous λ's solution in
/// addition to the cold restarts; the cold restarts win energy ties.
pub fn lambda_sweep(
    family: &LambdaProblem,
    d: &DirichletProblem,
    cfg: &SweepConfig,
) -> Result<SweepOutcome> {
    cfg.validate()?;
    let (gf, gd) = (family.graph(), d.graph());
    if gf.vertex_count() != gd.vertex_count() || gf.labels() != gd.labels() {
        return Err(Error::SizeMismatch {
            expected: gd.vertex_count(),
            got: gf.vertex_count(),
        });
    }

    let dirichlet = solve_dirichlet(d, &cfg.solver)?;
    info!(
        "dirichlet level {} (residual {:e})",
        dirichlet.energy, dirichlet.residual_norm
    );
    let reference = dirichlet.pair.clone();

    let solve_at = |lambda: f64, warm: Option<&PairFunction>| -> Option<SolveResult> {
        let p = family.with_lambda(lambda).ok()?;
        let starts: Vec<PairFunction> = warm.into_iter().cloned().collect();
        match solve_with_starts(&p, &cfg.solver, &starts) {
            Ok(r) => Some(r),
            Err(e) => {
                log::warn!("lambda = {lambda}: {e}");
                None
            }
        }
    };

    let solutions: Vec<Option<SolveResult>> = if cfg.warm_start {
        let mut out: Vec<Option<SolveResult>> = Vec::with_capacity(cfg.lambdas.len());
        for &lambda in &cfg.lambdas {
            let warm = out.iter().rev().flatten().next().map(|r| &r.pair);
            let r = solve_at(lambda, warm);
            out.push(r);
        }
        out
    } else {
        map_indexed(cfg.lambdas.len(), cfg.solver.parallel, |k| {
            solve_at(cfg.lambdas[k], None)
        })
    };

    let records = cfg
        .lambdas
        .iter()
        .zip(&solutions)
        .map(|(&lambda, r)| {
            let rec = record_for(d, lambda, r.as_ref(), &reference);
            info!(
                "lambda {lambda:e}: level {} sup|u| off-well {:e} H-distance {:e}",
                rec.energy, rec.sup_u_outside, rec.h_distance
            );
            rec
        })
        .collect();

    Ok(SweepOutcome {
        dirichlet,
        records,
        solutions,
    })
}

/// One tabulated value keyed by vertex label and component.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceValue {
    pub label: String,
    pub component: Component,
    pub value: f64,
}

/// The tabulated Dirichlet ground state of the 22-vertex experiment.
pub fn g22_reference_table() -> Vec<ReferenceValue> {
    G22_TABLE
        .iter()
        .map(|&(i, component, value)| ReferenceValue {
            label: label(i),
            component,
            value,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Match,
    AdjacencyDivergence,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Match => "MATCH",
            Verdict::AdjacencyDivergence => "ADJACENCY-DIVERGENCE",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEntry {
    pub label: String,
    pub component: Component,
    pub reference: f64,
    pub computed: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceReport {
    /// One entry per vertex and component; untabulated entries compare
    /// against zero.
    pub entries: Vec<ReferenceEntry>,
    pub max_deviation: f64,
    pub atol: f64,
    pub verdict: Verdict,
}

/// Compares a solution against tabulated values at every vertex, taking
/// untabulated entries as zero.
pub fn compare_reference(
    g: &WeightedGraph,
    result: &SolveResult,
    reference: &[ReferenceValue],
    atol: f64,
) -> Result<ReferenceReport> {
    result.pair.check_len(g.vertex_count())?;
    let n = g.vertex_count();
    let mut table = vec![[0.0f64; 2]; n];
    for r in reference {
        let x = g
            .vertex(&r.label)
            .ok_or_else(|| Error::UnknownLabel(r.label.clone()))?;
        let slot = match r.component {
            Component::U => 0,
            Component::V => 1,
        };
        table[x.index()][slot] = r.value;
    }
    let mut entries = Vec::with_capacity(2 * n);
    for component in [Component::U, Component::V] {
        let slot = if component == Component::U { 0 } else { 1 };
        let f = result.pair.component(component);
        for x in g.vertices() {
            let reference = table[x.index()][slot];
            let computed = f[x];
            entries.push(ReferenceEntry {
                label: g.label(x).to_owned(),
                component,
                reference,
                computed,
                abs_diff: (computed - reference).abs(),
            });
        }
    }
    let max_deviation = entries.iter().fold(0.0f64, |m, e| m.max(e.abs_diff));
    Ok(ReferenceReport {
        entries,
        max_deviation,
        atol,
        verdict: if max_deviation <= atol {
            Verdict::Match
        } else {
            Verdict::AdjacencyDivergence
        },
    })
}

/// A solution written as a reference table (every nonzero entry).
pub fn reference_from_result(g: &WeightedGraph, result: &SolveResult) -> Vec<ReferenceValue> {
    let mut out = Vec::new();
    for component in [Component::U, Component::V] {
        let f = result.pair.component(component);
        for x in g.vertices() {
            if f[x] != 0.0 {
                out.push(ReferenceValue {
                    label: g.label(x).to_owned(),
                    component,
                    value: f[x],
                });
            }
        }
    }
    out
}
