//! Interior-point solver for conic programs over products of zero,
//! nonnegative, second-order and rotated second-order cones.
//!
//! Problems are stated as `min c'x  s.t.  A x + s = b, s ∈ K` (see
//! [`ConicProgram`]). The bundled solver is a homogeneous self-dual
//! embedding with Nesterov–Todd scaling and Mehrotra corrections; other
//! solvers can be plugged in through [`ConicBackend`] and selected by name
//! from a [`BackendRegistry`].
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod backend;
#[cfg(feature = "clarabel")]
pub mod clarabel_backend;
pub mod cones;
pub mod dump;
pub mod ipm;
pub mod ldl;
pub mod program;
pub mod scalar;
pub mod sparse;

pub use backend::{BackendRegistry, Bundled, ConicBackend, RegistryError};
pub use cones::Cone;
pub use dump::{read_program, write_program, DumpError};
pub use ipm::{
    solve, IterateRecord, Residuals, SolveOutcome, SolveSettings, SolveStatus, SolverError,
};
pub use program::{Affine, ConicProgram, ProgramBuilder, ProgramError, VarMap};
pub use scalar::Scalar;
pub use sparse::CscMatrix;

pub type ConicProgram64 = ConicProgram<f64>;
pub type SolveSettings64 = SolveSettings<f64>;
pub type SolveOutcome64 = SolveOutcome<f64>;
pub type BackendRegistry64 = BackendRegistry<f64>;
pub type ConicProgram32 = ConicProgram<f32>;
pub type SolveSettings32 = SolveSettings<f32>;
pub type SolveOutcome32 = SolveOutcome<f32>;
