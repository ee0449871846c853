//! Discrete differential operators on a [`WeightedGraph`] and the norms
//! and inner products of the function spaces the problems live in.
//!
//! All sums run in vertex order, then neighbor order, so results are
//! deterministic for fixed input.

use std::ops::{Index, IndexMut};

use crate::error::{Component, Error, Result};
use crate::functional::{DirichletProblem, LambdaProblem};
use crate::graph::{closure, DomainSet, VertexId, WeightedGraph};

/// A real value at every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction(Vec<f64>);

impl VertexFunction {
    pub fn zeros(n: usize) -> Self {
        VertexFunction(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        VertexFunction(vec![c; n])
    }

    /// Wraps `values`, rejecting NaN and infinities.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "vertex value",
                value: values[i],
                reason: "function values must be finite",
            });
        }
        Ok(VertexFunction(values))
    }

    pub(crate) fn from_vec(values: Vec<f64>) -> Self {
        VertexFunction(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn scaled(&self, c: f64) -> Self {
        VertexFunction(self.0.iter().map(|v| c * v).collect())
    }

    pub fn sup_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|f(x)|` over the vertices of `over`; zero on an empty set.
    pub fn sup_abs_on(&self, over: &DomainSet) -> f64 {
        over.iter().fold(0.0, |m, x| m.max(self[x].abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

impl Index<VertexId> for VertexFunction {
    type Output = f64;
    #[inline]
    fn index(&self, x: VertexId) -> &f64 {
        &self.0[x.0]
    }
}

impl IndexMut<VertexId> for VertexFunction {
    #[inline]
    fn index_mut(&mut self, x: VertexId) -> &mut f64 {
        &mut self.0[x.0]
    }
}

/// The unknown pair `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFunction {
    pub u: VertexFunction,
    pub v: VertexFunction,
}

impl PairFunction {
    pub fn new(u: VertexFunction, v: VertexFunction) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::SizeMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        Ok(PairFunction { u, v })
    }

    pub fn zeros(n: usize) -> Self {
        PairFunction {
            u: VertexFunction::zeros(n),
            v: VertexFunction::zeros(n),
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn component(&self, c: Component) -> &VertexFunction {
        match c {
            Component::U => &self.u,
            Component::V => &self.v,
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        PairFunction {
            u: self.u.scaled(t),
            v: self.v.scaled(t),
        }
    }

    /// `self + t * other`
    pub fn add_scaled(&self, t: f64, other: &PairFunction) -> Self {
        let comb = |a: &VertexFunction, b: &VertexFunction| {
            VertexFunction(a.0.iter().zip(&b.0).map(|(x, y)| x + t * y).collect())
        };
        PairFunction {
            u: comb(&self.u, &other.u),
            v: comb(&self.v, &other.v),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    /// `(v, u)`.
    pub fn swapped(&self) -> Self {
        PairFunction {
            u: self.v.clone(),
            v: self.u.clone(),
        }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.u.len() != n || self.v.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: self.u.len().min(self.v.len()),
            });
        }
        Ok(())
    }
}

/// `Δu(x) = (1/μ(x)) Σ_{y∼x} w_xy (u(y) − u(x))`.
pub fn laplacian(g: &WeightedGraph, u: &VertexFunction, x: VertexId) -> Result<f64> {
    g.check_vertex(x)?;
    Ok(laplacian_at(g, u.values(), x))
}

#[inline]
pub(crate) fn laplacian_at(g: &WeightedGraph, u: &[f64], x: VertexId) -> f64 {
    let ux = u[x.0];
    let s: f64 = g.neighbors(x).map(|(y, w)| w * (u[y.0] - ux)).sum();
    s / g.measure(x)
}

/// `Δu` at every vertex.
pub fn laplacian_all(g: &WeightedGraph, u: &VertexFunction) -> VertexFunction {
    VertexFunction(
        g.vertices()
            .map(|x| laplacian_at(g, u.values(), x))
            .collect(),
    )
}

/// `Γ(u, v)(x) = (1/(2μ(x))) Σ_{y∼x} w_xy (u(y) − u(x))(v(y) − v(x))`.
pub fn gradient_form(
    g: &WeightedGraph,
    u: &VertexFunction,
    v: &VertexFunction,
    x: VertexId,
) -> Result<f64> {
    g.check_vertex(x)?;
    Ok(gamma_at(g, u.values(), v.values(), x))
}

#[inline]
pub(crate) fn gamma_at(g: &WeightedGraph, u: &[f64], v: &[f64], x: VertexId) -> f64 {
    let (ux, vx) = (u[x.0], v[x.0]);
    let s: f64 = g
        .neighbors(x)
        .map(|(y, w)| w * (u[y.0] - ux) * (v[y.0] - vx))
        .sum();
    s / (2.0 * g.measure(x))
}

/// `|∇u|(x) = sqrt(Γ(u)(x))`.
pub fn grad_length(g: &WeightedGraph, u: &VertexFunction, x: VertexId) -> Result<f64> {
    Ok(gradient_form(g, u, u, x)?.sqrt())
}

/// `Σ_{x ∈ over} μ(x) f(x)`.
pub fn integrate(g: &WeightedGraph, f: &VertexFunction, over: &DomainSet) -> f64 {
    over.iter().map(|x| g.measure(x) * f[x]).sum()
}

/// `∫_V f dμ`.
pub fn integrate_all(g: &WeightedGraph, f: &VertexFunction) -> f64 {
    g.vertices().map(|x| g.measure(x) * f[x]).sum()
}

/// `∫_S Γ(u, ξ) dμ` with the sum restricted to `over` (all of V when `None`).
pub(crate) fn dirichlet_form(
    g: &WeightedGraph,
    u: &[f64],
    xi: &[f64],
    over: Option<&DomainSet>,
) -> f64 {
    match over {
        None => g
            .vertices()
            .map(|x| g.measure(x) * gamma_at(g, u, xi, x))
            .sum(),
        Some(s) => s.iter().map(|x| g.measure(x) * gamma_at(g, u, xi, x)).sum(),
    }
}

/// `∫_V c(x) f(x) h(x) dμ`.
fn weighted_mass(g: &WeightedGraph, f: &[f64], h: &[f64], coef: impl Fn(usize) -> f64) -> f64 {
    g.vertices()
        .map(|x| g.measure(x) * coef(x.0) * f[x.0] * h[x.0])
        .sum()
}

/// `⟨(u,v),(ξ,η)⟩_{H_λ}`.
pub fn inner_h_lambda(p: &LambdaProblem, w1: &PairFunction, w2: &PairFunction) -> f64 {
    let g = p.graph();
    let (a, b, lambda) = (p.potentials().a(), p.potentials().b(), p.lambda());
    dirichlet_form(g, w1.u.values(), w2.u.values(), None)
        + weighted_mass(g, w1.u.values(), w2.u.values(), |i| lambda * a[i] + 1.0)
        + dirichlet_form(g, w1.v.values(), w2.v.values(), None)
        + weighted_mass(g, w1.v.values(), w2.v.values(), |i| lambda * b[i] + 1.0)
}

/// `‖(u,v)‖²_{H_λ}`.
pub fn norm_h_lambda_sq(p: &LambdaProblem, w: &PairFunction) -> f64 {
    inner_h_lambda(p, w, w)
}

/// `⟨(u,v),(ξ,η)⟩_H`, the unweighted `W^{1,2} × W^{1,2}` inner product.
pub fn inner_h(g: &WeightedGraph, w1: &PairFunction, w2: &PairFunction) -> f64 {
    dirichlet_form(g, w1.u.values(), w2.u.values(), None)
        + weighted_mass(g, w1.u.values(), w2.u.values(), |_| 1.0)
        + dirichlet_form(g, w1.v.values(), w2.v.values(), None)
        + weighted_mass(g, w1.v.values(), w2.v.values(), |_| 1.0)
}

/// `‖(u,v)‖²_H`.
pub fn norm_h_sq(g: &WeightedGraph, w: &PairFunction) -> f64 {
    inner_h(g, w, w)
}

/// Errors unless `u` vanishes off `Ω_a` and `v` vanishes off `Ω_b`.
pub fn check_admissible(d: &DirichletProblem, w: &PairFunction) -> Result<()> {
    let g = d.graph();
    w.check_len(g.vertex_count())?;
    for (component, f, omega) in [
        (Component::U, &w.u, d.omega_a()),
        (Component::V, &w.v, d.omega_b()),
    ] {
        if let Some(x) = g.vertices().find(|&x| !omega.contains(x) && f[x] != 0.0) {
            return Err(Error::DomainViolation {
                component,
                vertex: g.label(x).to_owned(),
            });
        }
    }
    Ok(())
}

/// `⟨(u,v),(ξ,η)⟩_{H_Ω}`: gradient terms over `Ω̄_a ∪ Ω̄_b`, mass terms over
/// `Ω_a ∪ Ω_b`. Both pairs must be admissible.
pub fn inner_h_omega(d: &DirichletProblem, w1: &PairFunction, w2: &PairFunction) -> Result<f64> {
    check_admissible(d, w1)?;
    check_admissible(d, w2)?;
    Ok(inner_h_omega_unchecked(d, w1, w2))
}

pub(crate) fn inner_h_omega_unchecked(
    d: &DirichletProblem,
    w1: &PairFunction,
    w2: &PairFunction,
) -> f64 {
    let g = d.graph();
    let grad_set = d.gradient_support();
    let mass_set = d.mass_support();
    let grad = dirichlet_form(g, w1.u.values(), w2.u.values(), Some(grad_set))
        + dirichlet_form(g, w1.v.values(), w2.v.values(), Some(grad_set));
    let mass: f64 = mass_set
        .iter()
        .map(|x| g.measure(x) * (w1.u[x] * w2.u[x] + w1.v[x] * w2.v[x]))
        .sum();
    grad + mass
}

/// `‖(u,v)‖²_{H_Ω}`.
pub fn norm_h_omega_sq(d: &DirichletProblem, w: &PairFunction) -> Result<f64> {
    inner_h_omega(d, w, w)
}

/// Exponent of an `L^q` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

/// `‖(u,v)‖_{L^q}`: `(∫(|u|^q + |v|^q) dμ)^{1/q}` for finite `q ≥ 2`,
/// `sup|u| + sup|v|` for `q = ∞`.
pub fn norm_lq(g: &WeightedGraph, w: &PairFunction, q: Exponent) -> Result<f64> {
    match q {
        Exponent::Infinity => Ok(w.u.sup_abs() + w.v.sup_abs()),
        Exponent::Finite(q) if q >= 2.0 && q.is_finite() => {
            let s: f64 = g
                .vertices()
                .map(|x| g.measure(x) * (w.u[x].abs().powf(q) + w.v[x].abs().powf(q)))
                .sum();
            Ok(s.powf(1.0 / q))
        }
        Exponent::Finite(q) => Err(Error::InvalidParameter {
            name: "q",
            value: q,
            reason: "L^q(V) norms are defined for q >= 2 or q = infinity",
        }),
    }
}

/// `Σ_{Ω_a} μ|u| + Σ_{Ω_b} μ|v|`, the `L¹(Ω_a) × L¹(Ω_b)` norm.
pub fn norm_l1_domains(d: &DirichletProblem, w: &PairFunction) -> f64 {
    let g = d.graph();
    let part = |f: &VertexFunction, omega: &DomainSet| -> f64 {
        omega.iter().map(|x| g.measure(x) * f[x].abs()).sum()
    };
    part(&w.u, d.omega_a()) + part(&w.v, d.omega_b())
}

/// `Ω̄_a ∪ Ω̄_b`.
pub(crate) fn closure_union(g: &WeightedGraph, a: &DomainSet, b: &DomainSet) -> DomainSet {
    closure(g, a).union(&closure(g, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphBuilder, PotentialField};
    use std::sync::Arc;

    fn single_edge() -> WeightedGraph {
        let mut b = GraphBuilder::with_vertices(2, 1.0);
        b.add_edge(VertexId(0), VertexId(1), 1.0).unwrap();
        b.build().unwrap()
    }

    fn vf(v: &[f64]) -> VertexFunction {
        VertexFunction::new(v.to_vec()).unwrap()
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let g = single_edge();
        let c = VertexFunction::constant(2, 3.7);
        for x in g.vertices() {
            assert_eq!(laplacian(&g, &c, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn laplacian_two_vertices() {
        let g = single_edge();
        let u = vf(&[0.0, 1.0]);
        assert_eq!(laplacian(&g, &u, VertexId(0)).unwrap(), 1.0);
        assert_eq!(laplacian(&g, &u, VertexId(1)).unwrap(), -1.0);
        assert!(matches!(
            laplacian(&g, &u, VertexId(2)),
            Err(Error::UnknownVertex(2))
        ));
    }

    #[test]
    fn laplacian_star_center() {
        let k = 5;
        let mut b = GraphBuilder::with_vertices(k + 1, 1.0);
        for leaf in 1..=k {
            b.add_edge(VertexId(0), VertexId(leaf), 1.0).unwrap();
        }
        let g = b.build().unwrap();
        let mut u = VertexFunction::zeros(k + 1);
        u[VertexId(0)] = 1.0;
        assert_eq!(laplacian(&g, &u, VertexId(0)).unwrap(), -(k as f64));
    }

    #[test]
    fn gradient_form_examples() {
        let g = single_edge();
        let u = vf(&[0.0, 1.0]);
        let c = VertexFunction::constant(2, -2.0);
        assert_eq!(gradient_form(&g, &u, &u, VertexId(0)).unwrap(), 0.5);
        assert_eq!(gradient_form(&g, &u, &c, VertexId(1)).unwrap(), 0.0);
        assert_eq!(grad_length(&g, &u, VertexId(0)).unwrap(), 0.5f64.sqrt());
        assert_eq!(grad_length(&g, &c, VertexId(0)).unwrap(), 0.0);
    }

    #[test]
    fn integrals() {
        let g = GraphBuilder::with_vertices(22, 1.0);
        let mut g = g;
        for i in 0..21 {
            g.add_edge(VertexId(i), VertexId(i + 1), 1.0).unwrap();
        }
        let g = g.build().unwrap();
        let all = DomainSet::full(22);
        assert_eq!(integrate(&g, &VertexFunction::zeros(22), &all), 0.0);
        assert_eq!(
            integrate(&g, &VertexFunction::constant(22, 1.0), &all),
            22.0
        );
        assert_eq!(integrate_all(&g, &VertexFunction::constant(22, 1.0)), 22.0);
    }

    fn unit_problem(g: WeightedGraph, lambda: f64) -> LambdaProblem {
        let n = g.vertex_count();
        let mut a = vec![1.0; n];
        let mut b = vec![1.0; n];
        a[0] = 0.0;
        b[0] = 0.0;
        let pot = PotentialField::new(&g, a, b).unwrap();
        LambdaProblem::new(Arc::new(g), pot, lambda, 2.0, 2.0).unwrap()
    }

    #[test]
    fn h_lambda_norm_single_edge() {
        // wells must be nonempty, so a = b = 1 only at the second vertex and
        // the unit bump is placed there
        let g = single_edge();
        let p = unit_problem(g, 1.0);
        let w = PairFunction::new(vf(&[0.0, 1.0]), VertexFunction::zeros(2)).unwrap();
        // gradient: Γ(u)(x1) + Γ(u)(x2) = 1/2 + 1/2; mass: (λ·1 + 1)·1 = 2
        assert_eq!(norm_h_lambda_sq(&p, &w), 3.0);
        // H-norm drops the potential: 1 + 1
        assert_eq!(norm_h_sq(p.graph(), &w), 2.0);
        let w = PairFunction::new(vf(&[1.0, 0.0]), VertexFunction::zeros(2)).unwrap();
        // on the well vertex the mass coefficient is 1
        assert_eq!(norm_h_lambda_sq(&p, &w), 2.0);
        assert_eq!(norm_h_lambda_sq(&p, &PairFunction::zeros(2)), 0.0);
    }

    #[test]
    fn lq_norms() {
        let g = single_edge();
        let w = PairFunction::new(vf(&[3.0, 4.0]), VertexFunction::zeros(2)).unwrap();
        assert!((norm_lq(&g, &w, Exponent::Finite(2.0)).unwrap() - 5.0).abs() < 1e-15);
        let w = PairFunction::new(vf(&[2.0, -1.0]), vf(&[0.5, -3.0])).unwrap();
        assert_eq!(norm_lq(&g, &w, Exponent::Infinity).unwrap(), 5.0);
        let z = PairFunction::zeros(2);
        for q in [2.0, 3.5, 10.0] {
            assert_eq!(norm_lq(&g, &z, Exponent::Finite(q)).unwrap(), 0.0);
        }
        assert_eq!(norm_lq(&g, &z, Exponent::Infinity).unwrap(), 0.0);
        assert!(matches!(
            norm_lq(&g, &z, Exponent::Finite(1.5)),
            Err(Error::InvalidParameter { name: "q", .. })
        ));
    }
}
