//! Energy functionals of the λ-system and of its Dirichlet limit, their
//! first variations in strong (pointwise residual) form, and the algebra
//! of the Nehari manifold.
//!
//! With `ρ(u, v) = |u|^α |v|^β` the λ-energy is
//!
//! ```text
//! J_λ(u, v) = ½‖(u, v)‖²_{H_λ} − (1/(α+β)) ∫_V ρ(u, v) dμ
//! ```
//!
//! and its residual is
//!
//! ```text
//! R_u = −Δu + (λa + 1)u − (α/(α+β)) |u|^{α−2}u |v|^β
//! R_v = −Δv + (λb + 1)v − (β/(α+β)) |u|^α |v|^{β−2}v
//! ```
//!
//! so that `⟨J′(w), ζ⟩ = ∫_V (R_u ζ_u + R_v ζ_v) dμ` for every direction ζ.

use std::sync::Arc;

use crate::calculus::{
    check_admissible, closure_union, inner_h_omega_unchecked, laplacian_at, norm_h_lambda_sq,
    PairFunction, VertexFunction,
};
use crate::error::{Error, Result};
use crate::graph::{DomainSet, PotentialField, WeightedGraph};

fn check_exponents(alpha: f64, beta: f64) -> Result<()> {
    for (name, value) in [("alpha", alpha), ("beta", beta)] {
        if !(value > 1.0 && value.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                value,
                reason: "exponents must exceed 1",
            });
        }
    }
    Ok(())
}

/// An instance of the λ-system on a finite graph.
#[derive(Debug, Clone)]
pub struct LambdaProblem {
    graph: Arc<WeightedGraph>,
    potentials: PotentialField,
    lambda: f64,
    alpha: f64,
    beta: f64,
    // λa + 1 and λb + 1
    mass_u: Vec<f64>,
    mass_v: Vec<f64>,
}

impl LambdaProblem {
    pub fn new(
        graph: Arc<WeightedGraph>,
        potentials: PotentialField,
        lambda: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "lambda must be positive",
            });
        }
        check_exponents(alpha, beta)?;
        if potentials.a().len() != graph.vertex_count() {
            return Err(Error::SizeMismatch {
                expected: graph.vertex_count(),
                got: potentials.a().len(),
            });
        }
        let mass_u = potentials.a().iter().map(|a| lambda * a + 1.0).collect();
        let mass_v = potentials.b().iter().map(|b| lambda * b + 1.0).collect();
        Ok(LambdaProblem {
            graph,
            potentials,
            lambda,
            alpha,
            beta,
            mass_u,
            mass_v,
        })
    }

    /// Same graph, potentials and exponents at a different λ.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(
            Arc::clone(&self.graph),
            self.potentials.clone(),
            lambda,
            self.alpha,
            self.beta,
        )
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn shared_graph(&self) -> &Arc<WeightedGraph> {
        &self.graph
    }

    pub fn potentials(&self) -> &PotentialField {
        &self.potentials
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn omega_a(&self) -> DomainSet {
        self.potentials.omega_a()
    }

    pub fn omega_b(&self) -> DomainSet {
        self.potentials.omega_b()
    }
}

/// An instance of the Dirichlet limit system posed on the wells.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    graph: Arc<WeightedGraph>,
    omega_a: DomainSet,
    omega_b: DomainSet,
    alpha: f64,
    beta: f64,
    gradient_support: DomainSet,
    mass_support: DomainSet,
}

impl DirichletProblem {
    pub fn new(
        graph: Arc<WeightedGraph>,
        omega_a: DomainSet,
        omega_b: DomainSet,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        check_exponents(alpha, beta)?;
        let n = graph.vertex_count();
        for set in [&omega_a, &omega_b] {
            if set.universe_size() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    got: set.universe_size(),
                });
            }
        }
        if omega_a.is_empty() {
            return Err(Error::EmptyDomain("omega_a"));
        }
        if omega_b.is_empty() {
            return Err(Error::EmptyDomain("omega_b"));
        }
        if omega_a.intersection(&omega_b).is_empty() {
            return Err(Error::EmptyDomain("omega_a ∩ omega_b"));
        }
        let gradient_support = closure_union(&graph, &omega_a, &omega_b);
        let mass_support = omega_a.union(&omega_b);
        Ok(DirichletProblem {
            graph,
            omega_a,
            omega_b,
            alpha,
            beta,
            gradient_support,
            mass_support,
        })
    }

    /// Wells inferred as the zero sets of the potentials.
    pub fn from_potentials(
        graph: Arc<WeightedGraph>,
        potentials: &PotentialField,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        Self::new(
            graph,
            potentials.omega_a(),
            potentials.omega_b(),
            alpha,
            beta,
        )
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn shared_graph(&self) -> &Arc<WeightedGraph> {
        &self.graph
    }

    pub fn omega_a(&self) -> &DomainSet {
        &self.omega_a
    }

    pub fn omega_b(&self) -> &DomainSet {
        &self.omega_b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `Ω̄_a ∪ Ω̄_b`, where gradient terms are integrated.
    pub fn gradient_support(&self) -> &DomainSet {
        &self.gradient_support
    }

    /// `Ω_a ∪ Ω_b`, where mass and coupling terms are integrated.
    pub fn mass_support(&self) -> &DomainSet {
        &self.mass_support
    }

    /// Exchanges the roles of the two wells (and of α, β).
    pub fn mirrored(&self) -> Self {
        DirichletProblem {
            graph: Arc::clone(&self.graph),
            omega_a: self.omega_b.clone(),
            omega_b: self.omega_a.clone(),
            alpha: self.beta,
            beta: self.alpha,
            gradient_support: self.gradient_support.clone(),
            mass_support: self.mass_support.clone(),
        }
    }
}

/// Nehari bookkeeping for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NehariDiagnostics {
    /// `‖(u,v)‖²` in the problem's norm.
    pub norm_sq: f64,
    /// `∫ |u|^α |v|^β dμ`.
    pub coupling: f64,
    /// `norm_sq − coupling`, which equals `⟨J′(w), w⟩`.
    pub defect: f64,
    pub energy: f64,
    /// False only for the zero pair, which is excluded from the manifold.
    pub nontrivial: bool,
}

/// `|s|^{p−2}s` for `p > 1`, continuous at zero.
#[inline]
pub(crate) fn signed_pow(s: f64, p: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else if p == 2.0 {
        s
    } else {
        s.signum() * s.abs().powf(p - 1.0)
    }
}

#[inline]
pub(crate) fn abs_pow(s: f64, p: f64) -> f64 {
    if p == 2.0 {
        s * s
    } else {
        s.abs().powf(p)
    }
}

/// The common shape of both problems as seen by the solver.
pub trait Variational: Sync {
    fn graph(&self) -> &WeightedGraph;
    fn alpha(&self) -> f64;
    fn beta(&self) -> f64;

    /// Quadratic part `‖w‖²` of the energy.
    fn norm_sq(&self, w: &PairFunction) -> f64;

    /// `∫ |u|^α |v|^β dμ` over the problem's integration set.
    fn coupling(&self, w: &PairFunction) -> f64;

    /// Strong-form residual; zero at non-admissible coordinates.
    fn residual(&self, w: &PairFunction) -> PairFunction;

    /// Zeroes every non-admissible coordinate.
    fn project_admissible(&self, w: &mut PairFunction);

    /// Vertices where a solver start is seeded.
    fn start_support(&self) -> DomainSet;

    /// Diagonals of the linear part of the residual, per component.
    fn linear_diagonal(&self) -> (Vec<f64>, Vec<f64>);

    fn energy(&self, w: &PairFunction) -> f64 {
        0.5 * self.norm_sq(w) - self.coupling(w) / (self.alpha() + self.beta())
    }

    fn diagnostics(&self, w: &PairFunction) -> NehariDiagnostics {
        let norm_sq = self.norm_sq(w);
        let coupling = self.coupling(w);
        NehariDiagnostics {
            norm_sq,
            coupling,
            defect: norm_sq - coupling,
            energy: 0.5 * norm_sq - coupling / (self.alpha() + self.beta()),
            nontrivial: !w.is_zero(),
        }
    }

    /// The `t > 0` with `t·w` on the Nehari manifold:
    /// `t = (norm_sq / coupling)^{1/(α+β−2)}`.
    fn nehari_scale(&self, w: &PairFunction) -> Result<f64> {
        let coupling = self.coupling(w);
        let norm_sq = self.norm_sq(w);
        scale_from_parts(norm_sq, coupling, self.alpha() + self.beta())
    }

    /// L²(dμ) norm of a residual pair, restricted to admissible coordinates.
    fn l2_norm(&self, r: &PairFunction) -> f64 {
        let g = self.graph();
        g.vertices()
            .map(|x| g.measure(x) * (r.u[x] * r.u[x] + r.v[x] * r.v[x]))
            .sum::<f64>()
            .sqrt()
    }
}

pub(crate) fn scale_from_parts(norm_sq: f64, coupling: f64, sum_exp: f64) -> Result<f64> {
    if !(coupling > 0.0) || !coupling.is_finite() {
        return Err(Error::DegeneratePair);
    }
    let t = (norm_sq / coupling).powf(1.0 / (sum_exp - 2.0));
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(Error::DegeneratePair)
    }
}

fn coupling_over(
    g: &WeightedGraph,
    w: &PairFunction,
    alpha: f64,
    beta: f64,
    over: Option<&DomainSet>,
) -> f64 {
    let term = |x| g.measure(x) * abs_pow(w.u[x], alpha) * abs_pow(w.v[x], beta);
    match over {
        None => g.vertices().map(term).sum(),
        Some(s) => s.iter().map(term).sum(),
    }
}

fn nonlinear_terms(alpha: f64, beta: f64, u: f64, v: f64) -> (f64, f64) {
    let s = alpha + beta;
    (
        alpha / s * signed_pow(u, alpha) * abs_pow(v, beta),
        beta / s * abs_pow(u, alpha) * signed_pow(v, beta),
    )
}

impl Variational for LambdaProblem {
    fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn norm_sq(&self, w: &PairFunction) -> f64 {
        norm_h_lambda_sq(self, w)
    }

    fn coupling(&self, w: &PairFunction) -> f64 {
        coupling_over(&self.graph, w, self.alpha, self.beta, None)
    }

    fn residual(&self, w: &PairFunction) -> PairFunction {
        let g = &*self.graph;
        let (u, v) = (w.u.values(), w.v.values());
        let mut ru = Vec::with_capacity(u.len());
        let mut rv = Vec::with_capacity(v.len());
        for x in g.vertices() {
            let i = x.index();
            let (nu, nv) = nonlinear_terms(self.alpha, self.beta, u[i], v[i]);
            ru.push(-laplacian_at(g, u, x) + self.mass_u[i] * u[i] - nu);
            rv.push(-laplacian_at(g, v, x) + self.mass_v[i] * v[i] - nv);
        }
        PairFunction {
            u: VertexFunction::from_vec(ru),
            v: VertexFunction::from_vec(rv),
        }
    }

    fn project_admissible(&self, _w: &mut PairFunction) {}

    fn start_support(&self) -> DomainSet {
        self.omega_a().intersection(&self.omega_b())
    }

    fn linear_diagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &*self.graph;
        let lap: Vec<f64> = g
            .vertices()
            .map(|x| g.weighted_degree(x) / g.measure(x))
            .collect();
        (
            lap.iter().zip(&self.mass_u).map(|(l, m)| l + m).collect(),
            lap.iter().zip(&self.mass_v).map(|(l, m)| l + m).collect(),
        )
    }
}

impl Variational for DirichletProblem {
    fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn norm_sq(&self, w: &PairFunction) -> f64 {
        inner_h_omega_unchecked(self, w, w)
    }

    fn coupling(&self, w: &PairFunction) -> f64 {
        coupling_over(
            &self.graph,
            w,
            self.alpha,
            self.beta,
            Some(&self.mass_support),
        )
    }

    fn residual(&self, w: &PairFunction) -> PairFunction {
        let g = &*self.graph;
        let (u, v) = (w.u.values(), w.v.values());
        let mut ru = vec![0.0; u.len()];
        let mut rv = vec![0.0; v.len()];
        for x in g.vertices() {
            let i = x.index();
            let (in_a, in_b) = (self.omega_a.contains(x), self.omega_b.contains(x));
            if !(in_a || in_b) {
                continue;
            }
            let (nu, nv) = nonlinear_terms(self.alpha, self.beta, u[i], v[i]);
            if in_a {
                ru[i] = -laplacian_at(g, u, x) + u[i] - nu;
            }
            if in_b {
                rv[i] = -laplacian_at(g, v, x) + v[i] - nv;
            }
        }
        PairFunction {
            u: VertexFunction::from_vec(ru),
            v: VertexFunction::from_vec(rv),
        }
    }

    fn project_admissible(&self, w: &mut PairFunction) {
        for (f, omega) in [(&mut w.u, &self.omega_a), (&mut w.v, &self.omega_b)] {
            for (value, &inside) in f.values_mut().iter_mut().zip(omega.mask()) {
                if !inside {
                    *value = 0.0;
                }
            }
        }
    }

    fn start_support(&self) -> DomainSet {
        self.omega_a.intersection(&self.omega_b)
    }

    fn linear_diagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &*self.graph;
        let d: Vec<f64> = g
            .vertices()
            .map(|x| g.weighted_degree(x) / g.measure(x) + 1.0)
            .collect();
        (d.clone(), d)
    }
}

/// `∫_V |u|^α |v|^β dμ`.
pub fn coupling_integral(p: &LambdaProblem, w: &PairFunction) -> f64 {
    p.coupling(w)
}

/// `∫_{Ω_a ∪ Ω_b} |u|^α |v|^β dμ`.
pub fn coupling_integral_omega(d: &DirichletProblem, w: &PairFunction) -> f64 {
    d.coupling(w)
}

pub fn energy_j_lambda(p: &LambdaProblem, w: &PairFunction) -> f64 {
    p.energy(w)
}

/// Strong-form residual of the λ-system.
pub fn grad_j_lambda(p: &LambdaProblem, w: &PairFunction) -> PairFunction {
    p.residual(w)
}

pub fn energy_j_omega(d: &DirichletProblem, w: &PairFunction) -> Result<f64> {
    check_admissible(d, w)?;
    Ok(d.energy(w))
}

/// Strong-form residual of the Dirichlet system on `Ω_a` (resp. `Ω_b`),
/// pinned to zero elsewhere.
pub fn grad_j_omega(d: &DirichletProblem, w: &PairFunction) -> Result<PairFunction> {
    check_admissible(d, w)?;
    Ok(d.residual(w))
}

pub fn nehari_scale(p: &LambdaProblem, w: &PairFunction) -> Result<f64> {
    p.nehari_scale(w)
}

pub fn nehari_diagnostics(p: &LambdaProblem, w: &PairFunction) -> NehariDiagnostics {
    p.diagnostics(w)
}

pub fn nehari_scale_omega(d: &DirichletProblem, w: &PairFunction) -> Result<f64> {
    check_admissible(d, w)?;
    d.nehari_scale(w)
}

pub fn nehari_diagnostics_omega(
    d: &DirichletProblem,
    w: &PairFunction,
) -> Result<NehariDiagnostics> {
    check_admissible(d, w)?;
    Ok(d.diagnostics(w))
}

/// `(½ − 1/(α+β))`, the ratio `J / coupling` on the Nehari manifold.
pub fn level_factor(alpha: f64, beta: f64) -> f64 {
    0.5 - 1.0 / (alpha + beta)
}

/// Upper bound `2(α+β)c / (α+β−2)` on `‖w‖²` for a ground state at level `c`.
pub fn level_norm_bound(alpha: f64, beta: f64, level: f64) -> f64 {
    2.0 * (alpha + beta) * level / (alpha + beta - 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphBuilder, VertexId};

    fn single_vertex(alpha: f64, beta: f64) -> LambdaProblem {
        let g = GraphBuilder::with_vertices(1, 1.0).build().unwrap();
        let pot = PotentialField::new(&g, vec![0.0], vec![0.0]).unwrap();
        LambdaProblem::new(Arc::new(g), pot, 1.0, alpha, beta).unwrap()
    }

    fn pair(u: &[f64], v: &[f64]) -> PairFunction {
        PairFunction::new(
            VertexFunction::new(u.to_vec()).unwrap(),
            VertexFunction::new(v.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn parameters_are_validated() {
        let p = single_vertex(2.0, 2.0);
        assert!(p.with_lambda(0.0).is_err());
        assert!(p.with_lambda(-1.0).is_err());
        let g = Arc::clone(p.shared_graph());
        let pot = p.potentials().clone();
        assert!(matches!(
            LambdaProblem::new(g, pot, 1.0, 1.0, 2.0),
            Err(Error::InvalidParameter { name: "alpha", .. })
        ));
    }

    #[test]
    fn coupling_single_vertex() {
        let p = single_vertex(2.0, 2.0);
        assert_eq!(coupling_integral(&p, &pair(&[2.0], &[3.0])), 36.0);
        assert_eq!(coupling_integral(&p, &pair(&[0.0], &[3.0])), 0.0);
    }

    #[test]
    fn energy_single_vertex_scalar_profile() {
        // u = v = t: J = t² − t⁴/4
        let p = single_vertex(2.0, 2.0);
        assert_eq!(energy_j_lambda(&p, &pair(&[1.0], &[1.0])), 0.75);
        assert_eq!(energy_j_lambda(&p, &PairFunction::zeros(1)), 0.0);
        let t = 0.3;
        let e = energy_j_lambda(&p, &pair(&[t], &[t]));
        assert!((e - (t * t - t.powi(4) / 4.0)).abs() < 1e-15);
    }

    #[test]
    fn residual_vanishes_at_scalar_critical_point() {
        let p = single_vertex(2.0, 2.0);
        let s = 2f64.sqrt();
        let r = grad_j_lambda(&p, &pair(&[s], &[s]));
        assert!(r.u[VertexId(0)].abs() < 1e-15);
        assert!(r.v[VertexId(0)].abs() < 1e-15);
        assert!(grad_j_lambda(&p, &PairFunction::zeros(1)).is_zero());
    }

    #[test]
    fn nehari_scale_examples() {
        let p = single_vertex(2.0, 2.0);
        let s = 2f64.sqrt();
        // on N already: norm² = 4 = coupling
        assert!((nehari_scale(&p, &pair(&[s], &[s])).unwrap() - 1.0).abs() < 1e-15);
        // u = v = 1: norm² = 2, coupling = 1
        let t = nehari_scale(&p, &pair(&[1.0], &[1.0])).unwrap();
        assert!((t - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            nehari_scale(&p, &pair(&[1.0], &[0.0])),
            Err(Error::DegeneratePair)
        ));
        assert_eq!(scale_from_parts(4.0, 1.0, 4.0).unwrap(), 2.0);
    }

    #[test]
    fn zero_pair_diagnostics() {
        let p = single_vertex(2.0, 3.0);
        let d = nehari_diagnostics(&p, &PairFunction::zeros(1));
        assert_eq!(d.norm_sq, 0.0);
        assert_eq!(d.coupling, 0.0);
        assert_eq!(d.defect, 0.0);
        assert_eq!(d.energy, 0.0);
        assert!(!d.nontrivial);
    }

    #[test]
    fn signed_power_is_continuous_at_zero() {
        assert_eq!(signed_pow(0.0, 1.5), 0.0);
        assert_eq!(signed_pow(-4.0, 1.5), -2.0);
        assert_eq!(signed_pow(-3.0, 2.0), -3.0);
        assert!((signed_pow(1e-300, 1.2)).is_finite());
    }

    #[test]
    fn dirichlet_domain_violation_is_an_error() {
        let mut b = GraphBuilder::with_vertices(3, 1.0);
        b.add_edge(VertexId(0), VertexId(1), 1.0).unwrap();
        b.add_edge(VertexId(1), VertexId(2), 1.0).unwrap();
        let g = Arc::new(b.build().unwrap());
        let a = DomainSet::from_ids(3, [VertexId(0), VertexId(1)]).unwrap();
        let bb = DomainSet::from_ids(3, [VertexId(0)]).unwrap();
        let d = DirichletProblem::new(g, a, bb, 2.0, 2.0).unwrap();
        assert!(energy_j_omega(&d, &pair(&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0])).is_ok());
        assert!(matches!(
            energy_j_omega(&d, &pair(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0])),
            Err(Error::DomainViolation { .. })
        ));
        let r = grad_j_omega(&d, &pair(&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(r.u[VertexId(2)], 0.0);
        assert_eq!(r.v[VertexId(1)], 0.0);
    }
}
