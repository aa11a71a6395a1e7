//! Moving planes, Harnack chains and a quantitative symmetry experiment for
//! the semilinear problem `Δu + f(u) = 0`, `u = 0` on the boundary of a
//! star-shaped planar domain.

pub mod error;
pub mod geometry;
pub mod harnack;
pub mod movingplanes;
pub mod numeric;
pub mod pde;
pub mod stability;

pub use error::{Error, Result};
pub use geometry::{DomainSpec, Point};
