//! Curvature algebra of Hermitian symmetric spaces, pinching constants,
//! convergence constants for mean curvature flow of symplectomorphisms, and
//! a flat-torus graphical mean curvature flow simulator.

pub mod convergence;
pub mod curvature;
pub mod error;
pub mod mcf;
pub mod pinching;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
