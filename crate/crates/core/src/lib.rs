//! Distributed basis pursuit over simulated networks.
//!
//! Solves `min ‖x‖₁ s.t. A x = b` when the rows or the columns of `A` are
//! spread over the nodes of a connected graph, with D-ADMM and a set of
//! baseline distributed solvers. Everything is generic over [`Real`]
//! (`f32` or `f64`); the aliases below fix the scalar to `f64`.

// `!(x > 0)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod engine;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod scalar;
pub mod solvers;
pub mod subproblem;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix = linalg::DenseMatrix<f64>;
pub type RowNode = subproblem::RowSubproblem<f64>;
pub type ColNode = subproblem::ColSubproblem<f64>;
pub type BbSettings = subproblem::BbConfig<f64>;
pub type Kind = solvers::SolverKind<f64>;
pub type DistSolver = solvers::Solver<f64>;
pub type Trace = engine::RunTrace<f64>;
pub type Instance = bench::ProblemInstance<f64>;
