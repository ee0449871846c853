//! Finite weighted graphs with a vertex measure, plus the domain
//! combinatorics (boundary, closure, potential wells) used by the
//! variational problems.
//!
//! Graphs are finite, so coercivity of the potentials at infinity holds
//! vacuously and is not checked. Bounded-domain conditions are likewise
//! automatic.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};

/// Dense vertex index in `0..vertex_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

/// An undirected edge stored once, with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub lo: VertexId,
    pub hi: VertexId,
    pub weight: f64,
}

/// Immutable finite graph with symmetric edge weights and a positive
/// vertex measure.
///
/// Each unordered pair carries exactly one stored weight; the adjacency
/// lists refer back to it, so `w_xy = w_yx` holds by construction.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    labels: Vec<String>,
    label_index: HashMap<String, usize>,
    measure: Vec<f64>,
    edges: Vec<Edge>,
    // (neighbor, index into `edges`), sorted by neighbor
    adjacency: Vec<Vec<(usize, usize)>>,
    mu_min: f64,
}

impl WeightedGraph {
    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = VertexId> + '_ {
        (0..self.labels.len()).map(VertexId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn label(&self, x: VertexId) -> &str {
        &self.labels[x.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex(&self, label: &str) -> Option<VertexId> {
        self.label_index.get(label).copied().map(VertexId)
    }

    pub fn measure(&self, x: VertexId) -> f64 {
        self.measure[x.0]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    pub fn mu_min(&self) -> f64 {
        self.mu_min
    }

    pub fn check_vertex(&self, x: VertexId) -> Result<()> {
        if x.0 < self.labels.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(x.0))
        }
    }

    /// Neighbors of `x` with the weight of the connecting edge, in
    /// increasing neighbor order.
    pub fn neighbors(&self, x: VertexId) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.adjacency[x.0]
            .iter()
            .map(move |&(y, e)| (VertexId(y), self.edges[e].weight))
    }

    pub fn degree(&self, x: VertexId) -> usize {
        self.adjacency[x.0].len()
    }

    /// Sum of incident edge weights.
    pub fn weighted_degree(&self, x: VertexId) -> f64 {
        self.neighbors(x).map(|(_, w)| w).sum()
    }

    /// Weight of the edge `{x, y}` looked up in either order, `None` if absent.
    pub fn weight(&self, x: VertexId, y: VertexId) -> Option<f64> {
        let list = self.adjacency.get(x.0)?;
        list.binary_search_by_key(&y.0, |&(n, _)| n)
            .ok()
            .map(|i| self.edges[list[i].1].weight)
    }

    pub fn is_adjacent(&self, x: VertexId, y: VertexId) -> bool {
        self.weight(x, y).is_some()
    }
}

/// Incremental constructor for [`WeightedGraph`].
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    labels: Vec<String>,
    label_index: HashMap<String, usize>,
    measure: Vec<f64>,
    edges: Vec<Edge>,
    seen: HashSet<(usize, usize)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// `n` vertices labelled `x1..xn` with the given measure.
    pub fn with_vertices(n: usize, mu: f64) -> Self {
        let mut b = Self::new();
        for i in 1..=n {
            b.add_vertex(format!("x{i}"), mu)
                .expect("generated labels are unique");
        }
        b
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn vertex(&self, label: &str) -> Option<VertexId> {
        self.label_index.get(label).copied().map(VertexId)
    }

    pub fn add_vertex(&mut self, label: impl Into<String>, mu: f64) -> Result<VertexId> {
        let label = label.into();
        if self.label_index.contains_key(&label) {
            return Err(Error::DuplicateLabel(label));
        }
        let id = self.labels.len();
        self.label_index.insert(label.clone(), id);
        self.labels.push(label);
        self.measure.push(mu);
        Ok(VertexId(id))
    }

    pub fn add_edge(&mut self, x: VertexId, y: VertexId, weight: f64) -> Result<()> {
        let n = self.labels.len();
        for v in [x, y] {
            if v.0 >= n {
                return Err(Error::UnknownVertex(v.0));
            }
        }
        if x == y {
            return Err(Error::SelfLoop(self.labels[x.0].clone()));
        }
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        if !self.seen.insert((lo.0, hi.0)) {
            return Err(Error::DuplicateEdge(
                self.labels[lo.0].clone(),
                self.labels[hi.0].clone(),
            ));
        }
        self.edges.push(Edge { lo, hi, weight });
        Ok(())
    }

    pub fn add_edge_by_label(&mut self, x: &str, y: &str, weight: f64) -> Result<()> {
        let xi = self
            .vertex(x)
            .ok_or_else(|| Error::UnknownLabel(x.to_owned()))?;
        let yi = self
            .vertex(y)
            .ok_or_else(|| Error::UnknownLabel(y.to_owned()))?;
        self.add_edge(xi, yi, weight)
    }

    /// Assembles the graph without checking connectivity or positivity.
    /// Pair with [`validate_graph`] before use.
    pub fn build_unchecked(self) -> WeightedGraph {
        let n = self.labels.len();
        let mut adjacency = vec![Vec::new(); n];
        for (k, e) in self.edges.iter().enumerate() {
            adjacency[e.lo.0].push((e.hi.0, k));
            adjacency[e.hi.0].push((e.lo.0, k));
        }
        for list in &mut adjacency {
            list.sort_unstable_by_key(|&(y, _)| y);
        }
        let mu_min = self.measure.iter().copied().fold(f64::INFINITY, f64::min);
        WeightedGraph {
            labels: self.labels,
            label_index: self.label_index,
            measure: self.measure,
            edges: self.edges,
            adjacency,
            mu_min,
        }
    }

    pub fn build(self) -> Result<WeightedGraph> {
        let g = self.build_unchecked();
        validate_graph(&g)?;
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub mu_min: f64,
}

/// Checks positivity of measures and weights and connectivity by
/// breadth-first search from vertex 0.
pub fn validate_graph(g: &WeightedGraph) -> Result<ValidationReport> {
    if g.vertex_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    for x in g.vertices() {
        let mu = g.measure(x);
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::NonPositiveMeasure(g.label(x).to_owned(), mu));
        }
    }
    for e in g.edges() {
        if !(e.weight > 0.0 && e.weight.is_finite()) {
            return Err(Error::NonPositiveWeight(
                g.label(e.lo).to_owned(),
                g.label(e.hi).to_owned(),
                e.weight,
            ));
        }
    }
    let dist = bfs_distances(g, VertexId(0));
    if let Some(x) = dist.iter().position(Option::is_none) {
        return Err(Error::Disconnected(g.labels[x].clone()));
    }
    Ok(ValidationReport {
        vertex_count: g.vertex_count(),
        edge_count: g.edge_count(),
        mu_min: g.mu_min(),
    })
}

fn bfs_distances(g: &WeightedGraph, source: VertexId) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.vertex_count()];
    let mut queue = VecDeque::new();
    dist[source.0] = Some(0);
    queue.push_back(source);
    while let Some(x) = queue.pop_front() {
        let d = dist[x.0].unwrap_or_default();
        for (y, _) in g.neighbors(x) {
            if dist[y.0].is_none() {
                dist[y.0] = Some(d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Hop-count distance: the least number of edges joining `x` and `y`.
pub fn graph_distance(g: &WeightedGraph, x: VertexId, y: VertexId) -> Result<usize> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    bfs_distances(g, x)[y.0].ok_or_else(|| Error::Disconnected(g.label(y).to_owned()))
}

/// A subset of the vertex set, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainSet {
    mask: Vec<bool>,
}

impl DomainSet {
    pub fn empty(vertex_count: usize) -> Self {
        DomainSet {
            mask: vec![false; vertex_count],
        }
    }

    pub fn full(vertex_count: usize) -> Self {
        DomainSet {
            mask: vec![true; vertex_count],
        }
    }

    pub fn from_ids<I>(vertex_count: usize, ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = VertexId>,
    {
        let mut set = Self::empty(vertex_count);
        for x in ids {
            if x.0 >= vertex_count {
                return Err(Error::UnknownVertex(x.0));
            }
            set.mask[x.0] = true;
        }
        Ok(set)
    }

    pub fn from_labels<'a, I>(g: &WeightedGraph, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut set = Self::empty(g.vertex_count());
        for l in labels {
            let x = g
                .vertex(l)
                .ok_or_else(|| Error::UnknownLabel(l.to_owned()))?;
            set.mask[x.0] = true;
        }
        Ok(set)
    }

    pub fn from_predicate(vertex_count: usize, mut pred: impl FnMut(VertexId) -> bool) -> Self {
        DomainSet {
            mask: (0..vertex_count).map(|i| pred(VertexId(i))).collect(),
        }
    }

    pub fn universe_size(&self) -> usize {
        self.mask.len()
    }

    #[inline]
    pub fn contains(&self, x: VertexId) -> bool {
        self.mask.get(x.0).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| VertexId(i))
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn union(&self, other: &DomainSet) -> DomainSet {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &DomainSet) -> DomainSet {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn complement(&self) -> DomainSet {
        DomainSet {
            mask: self.mask.iter().map(|&m| !m).collect(),
        }
    }

    pub fn is_subset(&self, other: &DomainSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn labels<'g>(&self, g: &'g WeightedGraph) -> Vec<&'g str> {
        self.iter().map(|x| g.label(x)).collect()
    }

    fn zip_with(&self, other: &DomainSet, f: impl Fn(bool, bool) -> bool) -> DomainSet {
        assert_eq!(self.mask.len(), other.mask.len(), "domain universes differ");
        DomainSet {
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

/// `∂Ω`: vertices outside `omega` adjacent to at least one vertex of `omega`.
pub fn boundary(g: &WeightedGraph, omega: &DomainSet) -> DomainSet {
    let mut out = DomainSet::empty(g.vertex_count());
    for x in omega.iter() {
        for (y, _) in g.neighbors(x) {
            if !omega.contains(y) {
                out.mask[y.0] = true;
            }
        }
    }
    out
}

/// `Ω ∪ ∂Ω`.
pub fn closure(g: &WeightedGraph, omega: &DomainSet) -> DomainSet {
    omega.union(&boundary(g, omega))
}

/// The pair of nonnegative potentials `a`, `b` whose zero sets are the
/// potential wells.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PotentialField {
    pub fn new(g: &WeightedGraph, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let n = g.vertex_count();
        for values in [&a, &b] {
            if values.len() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    got: values.len(),
                });
            }
        }
        for (name, values) in [("a", &a), ("b", &b)] {
            for (i, &value) in values.iter().enumerate() {
                if !(value >= 0.0 && value.is_finite()) {
                    return Err(Error::NegativePotential {
                        name,
                        vertex: g.labels[i].clone(),
                        value,
                    });
                }
            }
        }
        let field = PotentialField { a, b };
        if field.omega_a().is_empty() {
            return Err(Error::EmptyDomain("zero set of a"));
        }
        if field.omega_b().is_empty() {
            return Err(Error::EmptyDomain("zero set of b"));
        }
        if field.omega_a().intersection(&field.omega_b()).is_empty() {
            return Err(Error::EmptyDomain(
                "intersection of the zero sets of a and b",
            ));
        }
        Ok(field)
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `Ω_a = {x : a(x) = 0}`.
    pub fn omega_a(&self) -> DomainSet {
        DomainSet {
            mask: self.a.iter().map(|&v| v == 0.0).collect(),
        }
    }

    /// `Ω_b = {x : b(x) = 0}`.
    pub fn omega_b(&self) -> DomainSet {
        DomainSet {
            mask: self.b.iter().map(|&v| v == 0.0).collect(),
        }
    }
}
