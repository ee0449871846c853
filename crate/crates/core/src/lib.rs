//! Ground states of the coupled system
//!
//! ```text
//! −Δu + (λa(x) + 1)u = (α/(α+β)) |u|^{α−2}u |v|^β
//! −Δv + (λb(x) + 1)v = (β/(α+β)) |u|^α |v|^{β−2}v
//! ```
//!
//! on a finite weighted graph, and of its Dirichlet limit on the potential
//! wells `Ω_a = {a = 0}`, `Ω_b = {b = 0}`, computed by energy minimization
//! over the Nehari manifold.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod checks;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod functional;
pub mod graph;
pub mod io;
pub mod solver;

pub use calculus::{Exponent, PairFunction, VertexFunction};
pub use error::{Component, Error, ErrorCategory, Result};
pub use functional::{DirichletProblem, LambdaProblem, NehariDiagnostics, Variational};
pub use graph::{DomainSet, GraphBuilder, PotentialField, VertexId, WeightedGraph};
pub use solver::{Preconditioner, SolveResult, SolverConfig};
