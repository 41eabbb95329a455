//! Numeric kernel: linear programming, convex-hull membership certificates,
//! Perron eigenvalues by power iteration, and concave maximization over
//! polytopes by conditional gradient.
//!
//! Everything here works in floating point with explicit absolute tolerances;
//! certificates are self-verifying by direct arithmetic so callers can recheck
//! any decision independently of the solver path.

mod frank_wolfe;
mod hull;
mod lp;
mod power;

pub use frank_wolfe::{maximize_concave_over_polytope, ConcaveObjective, FwOutcome, Polytope};
pub use hull::{hull_membership, HullCertificate};
pub use lp::{solve_lp, LpSolution, StandardForm};
pub use power::power_iteration;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: &'static str },
    #[error("problem is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("simplex stalled; numerical trouble")]
    NumericalStall,
    #[error("matrix entry ({row}, {col}) is negative or non-finite")]
    BadMatrixEntry { row: usize, col: usize },
}
