//! Shared fixtures: the small-graph corpus and a dense Newton oracle that
//! recomputes residual, Jacobian and energy directly from the graph data.

#![allow(dead_code)]

use std::path::PathBuf;

use nehari::graph::{DomainSet, VertexId, WeightedGraph};
use nehari::io::{parse_problem, ProblemSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn g22_text() -> String {
    std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/g22.graph"))
        .unwrap()
}

/// Every problem file of the small corpus, sorted by name.
pub fn small_corpus() -> Vec<(String, ProblemSet)> {
    let mut paths: Vec<_> = std::fs::read_dir(data_dir().join("small"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "graph"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let set = parse_problem(&std::fs::read_to_string(&p).unwrap())
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, set)
        })
        .collect()
}

/// λ values a corpus file is exercised at.
pub fn corpus_lambdas(set: &ProblemSet) -> Vec<f64> {
    if set.lambdas().is_empty() {
        vec![1.0]
    } else {
        set.lambdas().to_vec()
    }
}

/// The system written out from its definition:
/// `F_u(x) = (1/μ)Σ w (u(x) − u(y)) + m_u(x) u − (α/(α+β)) |u|^{α−2}u |v|^β`
/// and symmetrically for `v`, restricted to the active coordinates.
pub struct DenseSystem<'g> {
    pub g: &'g WeightedGraph,
    pub mass_u: Vec<f64>,
    pub mass_v: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub active_u: Vec<bool>,
    pub active_v: Vec<bool>,
}

impl<'g> DenseSystem<'g> {
    pub fn lambda(
        g: &'g WeightedGraph,
        a: &[f64],
        b: &[f64],
        lambda: f64,
        alpha: f64,
        beta: f64,
    ) -> Self {
        let n = g.vertex_count();
        DenseSystem {
            g,
            mass_u: a.iter().map(|a| lambda * a + 1.0).collect(),
            mass_v: b.iter().map(|b| lambda * b + 1.0).collect(),
            alpha,
            beta,
            active_u: vec![true; n],
            active_v: vec![true; n],
        }
    }

    pub fn dirichlet(
        g: &'g WeightedGraph,
        omega_a: &DomainSet,
        omega_b: &DomainSet,
        alpha: f64,
        beta: f64,
    ) -> Self {
        let n = g.vertex_count();
        DenseSystem {
            g,
            mass_u: vec![1.0; n],
            mass_v: vec![1.0; n],
            alpha,
            beta,
            active_u: omega_a.mask().to_vec(),
            active_v: omega_b.mask().to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.g.vertex_count()
    }

    /// Unknown index → (component, vertex); u coordinates come first.
    fn unknowns(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (c, act) in [&self.active_u, &self.active_v].into_iter().enumerate() {
            for (i, &on) in act.iter().enumerate() {
                if on {
                    out.push((c, i));
                }
            }
        }
        out
    }

    fn expand(&self, z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let (mut u, mut v) = (vec![0.0; n], vec![0.0; n]);
        for (&(c, i), &val) in self.unknowns().iter().zip(z) {
            if c == 0 {
                u[i] = val
            } else {
                v[i] = val
            }
        }
        (u, v)
    }

    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.g
            .edges()
            .iter()
            .map(|e| (e.lo.0, e.hi.0, e.weight))
            .collect()
    }

    fn mu(&self, i: usize) -> f64 {
        self.g.measure(VertexId(i))
    }

    pub fn energy(&self, u: &[f64], v: &[f64]) -> f64 {
        let p = self.alpha + self.beta;
        let mut quad = 0.0;
        for (x, y, w) in self.edges() {
            quad += w * ((u[x] - u[y]).powi(2) + (v[x] - v[y]).powi(2));
        }
        let mut coupling = 0.0;
        for i in 0..self.n() {
            quad += self.mu(i) * (self.mass_u[i] * u[i] * u[i] + self.mass_v[i] * v[i] * v[i]);
            coupling += self.mu(i) * u[i].abs().powf(self.alpha) * v[i].abs().powf(self.beta);
        }
        0.5 * quad - coupling / p
    }

    pub fn coupling(&self, u: &[f64], v: &[f64]) -> f64 {
        (0..self.n())
            .map(|i| self.mu(i) * u[i].abs().powf(self.alpha) * v[i].abs().powf(self.beta))
            .sum()
    }

    fn full_residual(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let (a, b, p) = (self.alpha, self.beta, self.alpha + self.beta);
        let mut ru: Vec<f64> = (0..n).map(|i| self.mass_u[i] * u[i]).collect();
        let mut rv: Vec<f64> = (0..n).map(|i| self.mass_v[i] * v[i]).collect();
        for (x, y, w) in self.edges() {
            ru[x] += w * (u[x] - u[y]) / self.mu(x);
            ru[y] += w * (u[y] - u[x]) / self.mu(y);
            rv[x] += w * (v[x] - v[y]) / self.mu(x);
            rv[y] += w * (v[y] - v[x]) / self.mu(y);
        }
        for i in 0..n {
            let (su, sv) = (u[i].abs(), v[i].abs());
            if su > 0.0 {
                ru[i] -= a / p * su.powf(a - 1.0) * u[i].signum() * sv.powf(b);
            }
            if sv > 0.0 {
                rv[i] -= b / p * su.powf(a) * sv.powf(b - 1.0) * v[i].signum();
            }
        }
        (ru, rv)
    }

    pub fn residual(&self, z: &[f64]) -> Vec<f64> {
        let (u, v) = self.expand(z);
        let (ru, rv) = self.full_residual(&u, &v);
        self.unknowns()
            .iter()
            .map(|&(c, i)| if c == 0 { ru[i] } else { rv[i] })
            .collect()
    }

    /// Analytic Jacobian; requires α, β ≥ 2 away from zero coordinates.
    pub fn jacobian(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let (u, v) = self.expand(z);
        let (a, b, p) = (self.alpha, self.beta, self.alpha + self.beta);
        let idx = self.unknowns();
        let pos = |c: usize, i: usize| idx.iter().position(|&k| k == (c, i));
        let m = idx.len();
        let mut jac = vec![vec![0.0; m]; m];
        let pw = |s: f64, e: f64| if e == 0.0 { 1.0 } else { s.abs().powf(e) };
        for (row, &(c, i)) in idx.iter().enumerate() {
            let mu = self.mu(i);
            let mass = if c == 0 {
                self.mass_u[i]
            } else {
                self.mass_v[i]
            };
            let mut diag = mass;
            for (x, y, w) in self.edges() {
                let other = if x == i {
                    y
                } else if y == i {
                    x
                } else {
                    continue;
                };
                diag += w / mu;
                if let Some(col) = pos(c, other) {
                    jac[row][col] -= w / mu;
                }
            }
            let (su, sv) = (u[i], v[i]);
            if c == 0 {
                diag -= a * (a - 1.0) / p * pw(su, a - 2.0) * pw(sv, b);
                if let Some(col) = pos(1, i) {
                    jac[row][col] -=
                        a * b / p * pw(su, a - 1.0) * su.signum() * pw(sv, b - 1.0) * sv.signum();
                }
            } else {
                diag -= b * (b - 1.0) / p * pw(su, a) * pw(sv, b - 2.0);
                if let Some(col) = pos(0, i) {
                    jac[row][col] -=
                        a * b / p * pw(su, a - 1.0) * su.signum() * pw(sv, b - 1.0) * sv.signum();
                }
            }
            jac[row][pos(c, i).unwrap()] += diag;
        }
        jac
    }

    /// Damped Newton from `z0`; returns the root when `‖F‖∞ ≤ tol`.
    pub fn newton(&self, z0: &[f64], tol: f64, max_iter: usize) -> Option<Vec<f64>> {
        let mut z = z0.to_vec();
        let norm = |f: &[f64]| f.iter().map(|x| x * x).sum::<f64>();
        let mut f = self.residual(&z);
        for _ in 0..max_iter {
            if f.iter().all(|r| r.abs() <= tol) {
                return Some(z);
            }
            let step = solve_dense(self.jacobian(&z), f.iter().map(|r| -r).collect())?;
            let f0 = norm(&f);
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = z.iter().zip(&step).map(|(a, s)| a + t * s).collect();
                let ft = self.residual(&trial);
                if norm(&ft) < (1.0 - 1e-4 * t) * f0 || t < 1e-10 {
                    z = trial;
                    f = ft;
                    break;
                }
                t *= 0.5;
            }
        }
        f.iter().all(|r| r.abs() <= tol).then_some(z)
    }

    pub fn pair(&self, z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        self.expand(z)
    }

    pub fn unknown_count(&self) -> usize {
        self.unknowns().len()
    }

    pub fn pack(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        self.unknowns()
            .iter()
            .map(|&(c, i)| if c == 0 { u[i] } else { v[i] })
            .collect()
    }

    /// Least energy over the nontrivial roots reached from `starts` random
    /// starting points.
    pub fn global_minimum(&self, starts: usize, seed: u64) -> Option<(f64, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = self.unknown_count();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..starts {
            let scale = 10f64.powf(rng.gen_range(-0.5..1.0));
            let z0: Vec<f64> = (0..m).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
            let Some(z) = self.newton(&z0, 1e-12, 200) else {
                continue;
            };
            let (u, v) = self.expand(&z);
            if self.coupling(&u, &v) < 1e-8 {
                continue;
            }
            let e = self.energy(&u, &v);
            if best.as_ref().is_none_or(|(b, _)| e < *b) {
                best = Some((e, z));
            }
        }
        best
    }
}

/// Dense LU solve of `a x = b`.
pub fn solve_dense(a: Vec<Vec<f64>>, b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let x = m.lu().solve(&nalgebra::DVector::from_vec(b))?;
    Some(x.iter().copied().collect())
}

/// Hop distances by Floyd–Warshall over the edge list.
pub fn all_pairs_hops(g: &WeightedGraph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for e in g.edges() {
        d[e.lo.0][e.hi.0] = 1;
        d[e.hi.0][e.lo.0] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}
