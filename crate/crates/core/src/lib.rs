//! One-dimensional Schrödinger problems on `(0, pi)` whose endpoints carry
//! either an inverse-square singularity or a boundary condition depending
//! rationally on the eigenvalue parameter, together with the Darboux-type
//! transformations that move between them.

pub mod analysis;
pub mod error;
pub mod herglotz;
pub mod io;
pub mod numeric;
pub mod ode;
pub mod potential;
pub mod presets;
pub mod problem;
pub mod spectrum;
pub mod transform;

pub use error::{Error, Result};
pub use herglotz::{BoundaryObject, PolyPair, RationalHN};
pub use ode::{SolutionTrace, SolverOptions};
pub use potential::{Potential, Preset, SampledPotential};
pub use problem::Problem;
pub use spectrum::SpectralData;
