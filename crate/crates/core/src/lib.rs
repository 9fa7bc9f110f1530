//! Low-rank solver for diagonally constrained semidefinite programs.
//!
//! Minimizes `f(V) = <C, V'V>` over `k x n` matrices `V` whose columns lie on
//! the unit sphere, which is the Burer-Monteiro form of
//! `min <C, X> s.t. X psd, X_ii = 1`. The solver is a coordinate power
//! iteration: each step replaces one column by the normalized negative
//! weighted sum of the others, optionally combined with a heavy-ball
//! momentum step between two normalizations. Coordinate order is pluggable
//! (cyclic, uniform, importance-sampled, greedy).
//!
//! The crate also ships the standard reductions onto this form (MaxCut,
//! MaxSAT with a truth column, MIMO sign detection), randomized rounding,
//! instance/result file formats, and a set of dense reference oracles used
//! by the test suite and the `check` diagnostics.

pub mod cost_matrix;
pub mod error;
pub mod factor;
pub mod io;
pub mod problems;
pub mod rounding;
pub mod solver;
pub mod validation;

pub use cost_matrix::CostMatrix;
pub use error::Error;
pub use factor::{default_rank, objective, Degenerate, FactorMatrix, GradientArray};
pub use solver::{
    solve, CoordinateRule, MomentumSchedule, Rank, SolveResult, SolveTrace, SolverConfig,
    TraceLevel,
};
