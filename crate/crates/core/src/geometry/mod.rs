//! Star-shaped planar domains and the geometric primitives built on them.

mod domain;
mod metrics;

use serde::Serialize;

pub use domain::{BoundaryPoint, CoeffsFile, DomainFile, DomainSpec, Radial, SmoothnessGuard, DEFAULT_SAMPLES};
pub use metrics::{
    diameter, diameter_with, inner_outer_radii, interior_sphere_radius, interior_sphere_radius_with,
    nearest_boundary, parallel_set_contains, reflect, signed_distance, summary, NearestBoundary,
};
pub(crate) use metrics::reflect_unchecked;

pub type Point = nalgebra::Vector2<f64>;

/// Diameter, uniform interior sphere radius and convexity flag of a domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometrySummary {
    pub d_omega: f64,
    pub r_omega: f64,
    pub is_convex: bool,
}
