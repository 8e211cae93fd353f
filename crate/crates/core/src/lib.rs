//! Non-overlapping domain decomposition: FETI and BDD interface solvers,
//! interface force splittings, and the structured meshes they run on.

pub mod bdd;
pub mod error;
pub mod fe;
pub mod feti;
pub mod interface;
pub mod linalg;
pub mod mesh;
pub mod problem;
pub mod registry;
pub mod solve;
pub mod splitting;

pub use error::{Error, Result};
pub use problem::{two_spring_decomposition, Decomposition, NodalLoad, ProblemSpec, RawAssignment, SubdomainSystem};
pub use registry::{solve, Strategies};
pub use solve::{relative_error, Scaling, Solution, SolveOptions, Stopping};
