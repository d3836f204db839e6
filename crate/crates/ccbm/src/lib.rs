//! Free-boundary solver for the exterior Bernoulli problem.
//!
//! The unknown outer boundary is found by minimizing the L2 mass of the
//! imaginary part of a complex Robin potential: the true boundary is exactly
//! the one where that imaginary part vanishes. A Kohn-Vogelius energy gap is
//! carried along as an independent reference.
//!
//! Layout:
//! - [`mesh`]: annular triangulations, boundary geometry, Hausdorff distance;
//! - [`fem`]: P1 assembly and direct sparse solves with a residual contract;
//! - [`state`], [`gradient`]: the complex forward/adjoint pair and the shape
//!   derivative of the cost in boundary and volume form;
//! - [`kv`]: the Kohn-Vogelius reference pair;
//! - [`descent`]: Sobolev-gradient loop with backtracking;
//! - [`scenario`]: named benchmark setups, batch sweeps, CSV artifacts.

pub mod descent;
pub mod error;
pub mod fem;
pub mod gradient;
pub mod kv;
pub mod mesh;
pub mod scenario;
pub mod state;
pub mod validate;
pub mod vec2;

pub use error::{DescentError, MeshError, ScenarioError, SolveError};
pub use vec2::Vec2;
