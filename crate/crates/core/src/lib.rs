//! Classical and quantum mechanics of a particle confined in a cavity bounded
//! by two confocal paraboloids.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: parabolic coordinates, wall quadrics, ray intersection.
//! * [`dynamics`]: constants of motion, caustics, billiard simulation,
//!   Poincaré fields.
//! * [`actions`]: action integrals, winding number, azimuthal closure.
//! * [`orbits`]: periodic-orbit solver and builder.
//! * [`specfun`]: Kummer and Whittaker functions for complex arguments.
//! * [`quantum`]: Dirichlet eigenpairs, eigenmodes and correspondence.
//!
//! Units are natural: `ħ = 1`, `2M = 1`, so the energy of a mode is `k²`.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actions;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod orbits;
pub mod quadrature;
pub mod quantum;
mod roots;
pub mod specfun;

pub use actions::{ActionTriple, ClosedFormAux};
pub use dynamics::{CausticPair, MotionConstants, PhaseState, Trajectory, Triangle};
pub use error::{Error, Result};
pub use geometry::{CartesianPoint, Cavity, ParabolicPoint, Vector3, WallId};
pub use orbits::{OrbitSpec, PeriodicOrbit};
pub use quantum::{EigenPair, Eigenmode, QuantumConstants};
