//! Exact rational arithmetic, linear algebra, linear programming and
//! polytope vertex enumeration. Nothing in here touches floating point.

pub mod dd;
pub mod matrix;
pub mod rational;
pub mod simplex;

pub use dd::{dd_enumerate, dd_vertices, DdOutput, VertexSet};
pub use matrix::{null_space, RationalMatrix};
pub use rational::{format_rational, int, parse_rational, rat, Rational, RationalVector};
pub use simplex::{find_feasible, lp_solve, LinearProgram, LpOutcome, Sense};
