//! Cut-cell finite differences for `Δu + f(u) = 0` with `u = 0` on the boundary.

mod field;
mod grid;
pub mod io;
mod nonlinearity;
mod solver;

pub use field::{min_unu, seminorm_unu, seminorm_unu_with, BoundaryDerivative, Field, Metric, ReflectedDifference};
pub use grid::{discretize, Grid, NodeKind, Stencil, DIRS};
pub use nonlinearity::{Nonlinearity, NonlinearitySpec};
pub use solver::{eigen_demo, solve_semilinear, Laplacian, SolveReport, SolverOptions};

/// Boundary samples used for `u_ν` unless told otherwise.
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 256;
