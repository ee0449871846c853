//! Problem files and CSV output.
//!
//! A problem file is line oriented, with `#` comments and whitespace
//! separated fields:
//!
//! ```text
//! [vertices]
//! # label  mu  a  b
//! x1 1 0 0
//! x2 1 1 0
//! [edges]
//! # x  y  w
//! x1 x2 1
//! [params]
//! alpha 2
//! beta 2
//! lambdas 1,10,100
//! [domains]
//! omega_a x1
//! omega_b x1 x2
//! ```
//!
//! `[params]` and `[domains]` are optional. Missing exponents default to 2;
//! a missing domain is the zero set of its potential.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::experiments::SweepRecord;
use crate::functional::{DirichletProblem, LambdaProblem};
use crate::graph::{DomainSet, GraphBuilder, PotentialField, WeightedGraph};
use crate::solver::SolveResult;

pub const DEFAULT_EXPONENT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct VertexLine {
    pub label: String,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLine {
    pub x: String,
    pub y: String,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Params {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Domains {
    pub omega_a: Option<Vec<String>>,
    pub omega_b: Option<Vec<String>>,
}

/// The parsed sections of a problem file, before any graph is built.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProblemFile {
    pub vertices: Vec<VertexLine>,
    pub edges: Vec<EdgeLine>,
    pub params: Params,
    pub domains: Domains,
}

/// Source positions of the records of a [`ProblemFile`], used to locate
/// validation errors.
#[derive(Debug, Clone, Default)]
struct Loci {
    vertices: Vec<(usize, [usize; 4])>,
    edges: Vec<(usize, [usize; 3])>,
    vertices_header: usize,
    edges_header: usize,
    omega_a: Option<(usize, Vec<usize>)>,
    omega_b: Option<(usize, Vec<usize>)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Vertices,
    Edges,
    Params,
    Domains,
}

/// Whitespace-separated fields of a line with their 1-based columns.
fn fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, f)| (line[..byte].chars().count() + 1, f))
        .collect()
}

fn number(line: usize, column: usize, field: &str, what: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(
            line,
            column,
            format!("expected a finite number for {what}, found `{field}`"),
        )),
    }
}

fn parse_located(text: &str) -> Result<(ProblemFile, Loci)> {
    let mut file = ProblemFile::default();
    let mut loci = Loci::default();
    let mut section = Section::None;
    let mut seen = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let f = fields(content);
        let Some(&(col, head)) = f.first() else {
            continue;
        };

        if head.starts_with('[') {
            if f.len() > 1 {
                return Err(Error::parse(
                    line,
                    f[1].0,
                    "unexpected text after section header",
                ));
            }
            section = match head {
                "[vertices]" => Section::Vertices,
                "[edges]" => Section::Edges,
                "[params]" => Section::Params,
                "[domains]" => Section::Domains,
                _ => return Err(Error::parse(line, col, format!("unknown section `{head}`"))),
            };
            if !seen.insert(head.to_owned()) {
                return Err(Error::parse(
                    line,
                    col,
                    format!("section `{head}` appears twice"),
                ));
            }
            match section {
                Section::Vertices => loci.vertices_header = line,
                Section::Edges => loci.edges_header = line,
                _ => {}
            }
            continue;
        }

        let arity = |n: usize, what: &str| -> Result<()> {
            if f.len() == n {
                Ok(())
            } else if f.len() < n {
                let end = content.trim_end().chars().count() + 1;
                Err(Error::parse(
                    line,
                    end,
                    format!("expected {n} fields ({what}), found {}", f.len()),
                ))
            } else {
                Err(Error::parse(
                    line,
                    f[n].0,
                    format!("expected {n} fields ({what}), found {}", f.len()),
                ))
            }
        };

        match section {
            Section::None => {
                return Err(Error::parse(
                    line,
                    col,
                    "data before the first section header",
                ));
            }
            Section::Vertices => {
                arity(4, "label mu a b")?;
                file.vertices.push(VertexLine {
                    label: head.to_owned(),
                    mu: number(line, f[1].0, f[1].1, "mu")?,
                    a: number(line, f[2].0, f[2].1, "a")?,
                    b: number(line, f[3].0, f[3].1, "b")?,
                });
                loci.vertices.push((line, [f[0].0, f[1].0, f[2].0, f[3].0]));
            }
            Section::Edges => {
                arity(3, "x y w")?;
                file.edges.push(EdgeLine {
                    x: head.to_owned(),
                    y: f[1].1.to_owned(),
                    w: number(line, f[2].0, f[2].1, "w")?,
                });
                loci.edges.push((line, [f[0].0, f[1].0, f[2].0]));
            }
            Section::Params => {
                arity(2, "key value")?;
                let (vcol, value) = f[1];
                let slot_taken = match head {
                    "alpha" => file
                        .params
                        .alpha
                        .replace(number(line, vcol, value, "alpha")?)
                        .is_some(),
                    "beta" => file
                        .params
                        .beta
                        .replace(number(line, vcol, value, "beta")?)
                        .is_some(),
                    "lambdas" => {
                        let mut list = Vec::new();
                        let mut offset = 0;
                        for item in value.split(',') {
                            let c = vcol + value[..offset].chars().count();
                            list.push(number(line, c, item, "lambda")?);
                            offset += item.len() + 1;
                        }
                        file.params.lambdas.replace(list).is_some()
                    }
                    _ => {
                        return Err(Error::parse(
                            line,
                            col,
                            format!("unknown parameter `{head}`"),
                        ))
                    }
                };
                if slot_taken {
                    return Err(Error::parse(
                        line,
                        col,
                        format!("parameter `{head}` given twice"),
                    ));
                }
            }
            Section::Domains => {
                let labels: Vec<String> = f[1..].iter().map(|&(_, l)| l.to_owned()).collect();
                let cols: Vec<usize> = f[1..].iter().map(|&(c, _)| c).collect();
                let (slot, locus) = match head {
                    "omega_a" => (&mut file.domains.omega_a, &mut loci.omega_a),
                    "omega_b" => (&mut file.domains.omega_b, &mut loci.omega_b),
                    _ => return Err(Error::parse(line, col, format!("unknown domain `{head}`"))),
                };
                if slot.replace(labels).is_some() {
                    return Err(Error::parse(
                        line,
                        col,
                        format!("domain `{head}` given twice"),
                    ));
                }
                *locus = Some((line, cols));
            }
        }
    }
    if file.vertices.is_empty() {
        return Err(Error::parse(
            text.lines().count().max(1),
            1,
            "no vertices declared",
        ));
    }
    Ok((file, loci))
}

/// A validated problem: graph, potentials, wells and exponents, from which
/// λ-problems and the Dirichlet problem are instantiated.
#[derive(Debug, Clone)]
pub struct ProblemSet {
    graph: Arc<WeightedGraph>,
    potentials: PotentialField,
    omega_a: DomainSet,
    omega_b: DomainSet,
    alpha: f64,
    beta: f64,
    lambdas: Vec<f64>,
}

impl ProblemSet {
    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn shared_graph(&self) -> &Arc<WeightedGraph> {
        &self.graph
    }

    pub fn potentials(&self) -> &PotentialField {
        &self.potentials
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// λ values listed in the file, possibly empty.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Replaces the exponents.
    pub fn with_exponents(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn lambda_problem(&self, lambda: f64) -> Result<LambdaProblem> {
        LambdaProblem::new(
            Arc::clone(&self.graph),
            self.potentials.clone(),
            lambda,
            self.alpha,
            self.beta,
        )
    }

    pub fn dirichlet(&self) -> Result<DirichletProblem> {
        DirichletProblem::new(
            Arc::clone(&self.graph),
            self.omega_a.clone(),
            self.omega_b.clone(),
            self.alpha,
            self.beta,
        )
    }
}

fn build(file: &ProblemFile, loci: Option<&Loci>) -> Result<ProblemSet> {
    let locate = |e: Error, line: Option<usize>, column: usize| match line {
        Some(l) => e.at(l, column),
        None => e,
    };

    let mut b = GraphBuilder::new();
    for (i, v) in file.vertices.iter().enumerate() {
        let pos = loci.map(|l| l.vertices[i]);
        let at =
            |err: Error, field: usize| locate(err, pos.map(|p| p.0), pos.map_or(0, |p| p.1[field]));
        if !(v.mu > 0.0) {
            return Err(at(Error::NonPositiveMeasure(v.label.clone(), v.mu), 1));
        }
        b.add_vertex(v.label.clone(), v.mu).map_err(|e| at(e, 0))?;
    }
    let mut seen = HashSet::new();
    for (i, e) in file.edges.iter().enumerate() {
        let pos = loci.map(|l| l.edges[i]);
        let at =
            |err: Error, field: usize| locate(err, pos.map(|p| p.0), pos.map_or(0, |p| p.1[field]));
        let x = b
            .vertex(&e.x)
            .ok_or_else(|| at(Error::UnknownLabel(e.x.clone()), 0))?;
        let y = b
            .vertex(&e.y)
            .ok_or_else(|| at(Error::UnknownLabel(e.y.clone()), 1))?;
        if !(e.w > 0.0) {
            return Err(at(
                Error::NonPositiveWeight(e.x.clone(), e.y.clone(), e.w),
                2,
            ));
        }
        if !seen.insert((x.min(y), x.max(y))) {
            return Err(at(Error::DuplicateEdge(e.x.clone(), e.y.clone()), 0));
        }
        b.add_edge(x, y, e.w).map_err(|err| at(err, 0))?;
    }
    let graph = b.build().map_err(|e| {
        let line = loci.map(|l| {
            if l.edges_header > 0 {
                l.edges_header
            } else {
                l.vertices_header
            }
        });
        locate(e, line, 1)
    })?;

    let a = file.vertices.iter().map(|v| v.a).collect();
    let bv = file.vertices.iter().map(|v| v.b).collect();
    let potentials = PotentialField::new(&graph, a, bv).map_err(|e| {
        let (line, column) = match (&e, loci) {
            (Error::NegativePotential { name, vertex, .. }, Some(l)) => {
                let i = graph.vertex(vertex).map_or(0, |x| x.index());
                let field = if *name == "a" { 2 } else { 3 };
                (Some(l.vertices[i].0), l.vertices[i].1[field])
            }
            (_, Some(l)) => (Some(l.vertices_header), 1),
            _ => (None, 0),
        };
        locate(e, line, column)
    })?;

    let domain = |labels: &Option<Vec<String>>,
                  locus: Option<&(usize, Vec<usize>)>,
                  inferred: DomainSet|
     -> Result<DomainSet> {
        let Some(labels) = labels else {
            return Ok(inferred);
        };
        for (k, l) in labels.iter().enumerate() {
            if graph.vertex(l).is_none() {
                let col = locus.map_or(0, |p| p.1[k]);
                return Err(locate(
                    Error::UnknownLabel(l.clone()),
                    locus.map(|p| p.0),
                    col,
                ));
            }
        }
        DomainSet::from_labels(&graph, labels.iter().map(String::as_str))
    };
    let omega_a = domain(
        &file.domains.omega_a,
        loci.and_then(|l| l.omega_a.as_ref()),
        potentials.omega_a(),
    )?;
    let omega_b = domain(
        &file.domains.omega_b,
        loci.and_then(|l| l.omega_b.as_ref()),
        potentials.omega_b(),
    )?;

    let set = ProblemSet {
        graph: Arc::new(graph),
        potentials,
        omega_a,
        omega_b,
        alpha: file.params.alpha.unwrap_or(DEFAULT_EXPONENT),
        beta: file.params.beta.unwrap_or(DEFAULT_EXPONENT),
        lambdas: file.params.lambdas.clone().unwrap_or_default(),
    };
    // validate exponents, λ values and domains up front
    let domains_line = loci.and_then(|l| l.omega_a.as_ref().or(l.omega_b.as_ref()).map(|p| p.0));
    set.dirichlet().map_err(|e| match e {
        Error::EmptyDomain(_) => locate(e, domains_line.or(loci.map(|l| l.vertices_header)), 1),
        e => e,
    })?;
    for &l in &set.lambdas {
        set.lambda_problem(l)?;
    }
    Ok(set)
}

impl ProblemFile {
    /// Parses and validates; errors carry their line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let (file, loci) = parse_located(text)?;
        build(&file, Some(&loci))?;
        Ok(file)
    }

    pub fn to_problem(&self) -> Result<ProblemSet> {
        build(self, None)
    }

    /// Canonical text form; parsing it yields an equal `ProblemFile`.
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::from("[vertices]\n");
        for v in &self.vertices {
            let _ = writeln!(s, "{} {} {} {}", v.label, v.mu, v.a, v.b);
        }
        s.push_str("[edges]\n");
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {}", e.x, e.y, e.w);
        }
        let p = &self.params;
        if p.alpha.is_some() || p.beta.is_some() || p.lambdas.is_some() {
            s.push_str("[params]\n");
            if let Some(a) = p.alpha {
                let _ = writeln!(s, "alpha {a}");
            }
            if let Some(b) = p.beta {
                let _ = writeln!(s, "beta {b}");
            }
            if let Some(ls) = &p.lambdas {
                let list: Vec<String> = ls.iter().map(|l| l.to_string()).collect();
                let _ = writeln!(s, "lambdas {}", list.join(","));
            }
        }
        let d = &self.domains;
        if d.omega_a.is_some() || d.omega_b.is_some() {
            s.push_str("[domains]\n");
            for (name, labels) in [("omega_a", &d.omega_a), ("omega_b", &d.omega_b)] {
                if let Some(labels) = labels {
                    let _ = writeln!(s, "{name} {}", labels.join(" "));
                }
            }
        }
        s
    }

    /// The file describing an existing graph and potentials.
    pub fn from_parts(g: &WeightedGraph, potentials: &PotentialField, params: Params) -> Self {
        ProblemFile {
            vertices: g
                .vertices()
                .map(|x| VertexLine {
                    label: g.label(x).to_owned(),
                    mu: g.measure(x),
                    a: potentials.a()[x.index()],
                    b: potentials.b()[x.index()],
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeLine {
                    x: g.label(e.lo).to_owned(),
                    y: g.label(e.hi).to_owned(),
                    w: e.weight,
                })
                .collect(),
            params,
            domains: Domains::default(),
        }
    }
}

/// Parses and validates a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemSet> {
    let (file, loci) = parse_located(text)?;
    build(&file, Some(&loci))
}

pub fn read_problem(path: &std::path::Path) -> Result<ProblemSet> {
    parse_problem(&std::fs::read_to_string(path)?)
}

/// 17 significant digits, enough to round-trip any `f64`.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SOLUTION_HEADER: [&str; 3] = ["vertex", "u", "v"];
pub const SWEEP_HEADER: [&str; 7] = [
    "lambda",
    "energy",
    "sup_u_outside",
    "sup_v_outside",
    "h_distance",
    "residual_norm",
    "converged",
];

/// Writes `vertex,u,v`, one row per vertex in label order.
pub fn write_solution<W: Write>(g: &WeightedGraph, result: &SolveResult, sink: W) -> Result<()> {
    result.pair.check_len(g.vertex_count())?;
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(SOLUTION_HEADER)?;
    for x in g.vertices() {
        w.write_record([g.label(x), &real(result.pair.u[x]), &real(result.pair.v[x])])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRow {
    pub vertex: String,
    pub u: f64,
    pub v: f64,
}

fn csv_field(record: &csv::StringRecord, i: usize, row: usize) -> Result<f64> {
    let s = record.get(i).unwrap_or("");
    s.parse()
        .map_err(|_| Error::parse(row, i + 1, format!("expected a number, found `{s}`")))
}

fn check_header(r: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let h = r.headers()?;
    if h.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(
            1,
            1,
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    Ok(())
}

pub fn read_solution<R: Read>(source: R) -> Result<Vec<SolutionRow>> {
    let mut r = csv::Reader::from_reader(source);
    check_header(&mut r, &SOLUTION_HEADER)?;
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = k + 2;
        out.push(SolutionRow {
            vertex: rec.get(0).unwrap_or("").to_owned(),
            u: csv_field(&rec, 1, row)?,
            v: csv_field(&rec, 2, row)?,
        });
    }
    Ok(out)
}

pub fn write_sweep<W: Write>(records: &[SweepRecord], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(SWEEP_HEADER)?;
    for r in records {
        w.write_record([
            real(r.lambda),
            real(r.energy),
            real(r.sup_u_outside),
            real(r.sup_v_outside),
            real(r.h_distance),
            real(r.residual_norm),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep<R: Read>(source: R) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_reader(source);
    check_header(&mut r, &SWEEP_HEADER)?;
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = k + 2;
        let converged = match rec.get(6) {
            Some("true") => true,
            Some("false") => false,
            other => {
                return Err(Error::parse(
                    row,
                    7,
                    format!("expected true or false, found `{}`", other.unwrap_or("")),
                ))
            }
        };
        out.push(SweepRecord {
            lambda: csv_field(&rec, 0, row)?,
            energy: csv_field(&rec, 1, row)?,
            sup_u_outside: csv_field(&rec, 2, row)?,
            sup_v_outside: csv_field(&rec, 3, row)?,
            h_distance: csv_field(&rec, 4, row)?,
            residual_norm: csv_field(&rec, 5, row)?,
            converged,
        });
    }
    Ok(out)
}
