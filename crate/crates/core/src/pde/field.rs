use std::sync::Arc;

use nalgebra::{SMatrix, SVector};
use serde::Serialize;

use super::grid::DIRS;
use super::{Grid, NonlinearitySpec, SolveReport};
use crate::error::{invalid, Error, Result};
use crate::geometry::{signed_distance, Point};
use crate::movingplanes::CriticalCap;

/// Weight scale of the local quadratic fit, in cells.
const MLS_SCALE: f64 = 1.5;
/// Half-width of the node window used by the fit, in cells.
const MLS_WINDOW: i64 = 3;

/// A solved discrete field. Immutable once built.
#[derive(Clone, Debug)]
pub struct Field {
    pub grid: Arc<Grid>,
    /// One value per unknown, in grid order.
    pub u: Vec<f64>,
    pub nonlinearity: NonlinearitySpec,
    pub report: SolveReport,
}

/// Inward normal derivative at a boundary sample.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundaryDerivative {
    pub angle: f64,
    pub point: Point,
    pub normal: Point,
    pub u_nu: f64,
    /// Set when the two-step stencil left the domain and a one-step quotient
    /// was used instead.
    pub first_order: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Metric {
    Chordal,
    /// Arc length along the sampled boundary polygon. For sensitivity studies.
    Geodesic,
}

/// `w = u(x^λ) - u(x)` on the grid nodes of the cap.
#[derive(Clone, Debug, Serialize)]
pub struct ReflectedDifference {
    /// Unknown indices with `x·ω > λ`.
    pub nodes: Vec<usize>,
    /// `w` per entry of `nodes`; `None` for excluded nodes.
    pub w: Vec<Option<f64>>,
    /// Nodes whose reflection left the domain by at most `h` and were given
    /// `u(x^λ) = 0`.
    pub extended: Vec<usize>,
    /// Nodes whose reflection left the domain by more than `h`.
    pub excluded: Vec<usize>,
}

impl ReflectedDifference {
    pub fn values(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().zip(&self.w).filter_map(|(k, w)| w.map(|w| (*k, w)))
    }

    pub fn min(&self) -> f64 {
        self.values().map(|(_, w)| w).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values().map(|(_, w)| w).fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Field {
    pub fn new(grid: Arc<Grid>, u: Vec<f64>, nonlinearity: NonlinearitySpec, report: SolveReport) -> Self {
        Field { grid, u, nonlinearity, report }
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().cloned().fold(0.0, f64::max)
    }

    /// `1e-12 · max u`.
    pub fn tol_num(&self) -> f64 {
        1e-12 * self.max_u()
    }

    /// `u(p)`, extended by zero outside the domain.
    ///
    /// Weighted quadratic fit through nearby nodes and boundary cut points
    /// (where `u = 0`). Exact on quadratics, so the one-sided `u_ν` stencil
    /// keeps second order and stays smooth along the boundary.
    pub fn value_at(&self, p: &Point) -> f64 {
        if self.grid.domain.level(p) >= 0.0 {
            return 0.0;
        }
        self.local_fit(p)
    }

    fn local_fit(&self, p: &Point) -> f64 {
        let g = &self.grid;
        let (ci, cj) = g.cell_of(p);
        let mut ata = SMatrix::<f64, 6, 6>::zeros();
        let mut atb = SVector::<f64, 6>::zeros();
        let mut add = |x: Point, v: f64| {
            let q = (x - p) / g.h;
            let wgt = (-(q.norm_squared()) / (MLS_SCALE * MLS_SCALE)).exp();
            let row = SVector::<f64, 6>::from([1.0, q.x, q.y, q.x * q.x, q.x * q.y, q.y * q.y]);
            ata += wgt * row * row.transpose();
            atb += wgt * v * row;
        };
        for j in cj - MLS_WINDOW + 1..=cj + MLS_WINDOW {
            for i in ci - MLS_WINDOW + 1..=ci + MLS_WINDOW {
                let Some(k) = g.unknown_at(i, j) else { continue };
                let s = &g.stencils[k];
                let x = g.node(s.i, s.j);
                add(x, self.u[k]);
                for (a, d) in DIRS.iter().enumerate() {
                    if s.neighbor[a].is_none() {
                        add(x + Point::new(d.0 as f64, d.1 as f64) * (s.cut[a] * g.h), 0.0);
                    }
                }
            }
        }
        match ata.cholesky() {
            Some(ch) => ch.solve(&atb)[0],
            None => ata.lu().solve(&atb).map(|c| c[0]).unwrap_or(0.0),
        }
    }

    /// `w(p) = u(p^λ) - u(p)` with both values interpolated.
    pub fn w_at(&self, cap: &CriticalCap, p: &Point) -> f64 {
        self.value_at(&cap.reflect(p)) - self.value_at(p)
    }

    pub fn normal_derivative(&self, m: usize) -> Result<Vec<BoundaryDerivative>> {
        let h = self.grid.h;
        let dom = &self.grid.domain;
        let samples = dom.boundary_sample(m)?;
        Ok(samples
            .iter()
            .map(|b| {
                let x1 = b.position + h * b.inward_normal;
                let x2 = b.position + 2.0 * h * b.inward_normal;
                let (u_nu, first_order) = if dom.level(&x2) < 0.0 {
                    ((4.0 * self.value_at(&x1) - self.value_at(&x2)) / (2.0 * h), false)
                } else {
                    (self.value_at(&x1) / h, true)
                };
                BoundaryDerivative { angle: b.angle, point: b.position, normal: b.inward_normal, u_nu, first_order }
            })
            .collect())
    }

    /// `w` on every unknown with `x·ω > λ`.
    pub fn reflect_difference(&self, cap: &CriticalCap) -> Result<ReflectedDifference> {
        let g = &self.grid;
        let mut out = ReflectedDifference { nodes: vec![], w: vec![], extended: vec![], excluded: vec![] };
        for k in 0..g.len() {
            let x = g.position(k);
            if !cap.in_halfplane(&x) {
                continue;
            }
            let xr = cap.reflect(&x);
            out.nodes.push(k);
            if g.domain.level(&xr) < 0.0 {
                out.w.push(Some(self.value_at(&xr) - self.u[k]));
            } else if signed_distance(&g.domain, &xr).abs() <= g.h {
                out.extended.push(k);
                out.w.push(Some(-self.u[k]));
            } else {
                out.excluded.push(k);
                out.w.push(None);
            }
        }
        if out.nodes.is_empty() {
            return Err(Error::Empty("cap contains no grid nodes".into()));
        }
        Ok(out)
    }

    /// `c(x)` on the same nodes as [`Field::reflect_difference`].
    pub fn coefficient_c(&self, cap: &CriticalCap) -> Result<Vec<(usize, f64)>> {
        let f = &self.nonlinearity;
        let g = &self.grid;
        let tol = self.tol_num();
        let bound = f.lipschitz_l * (1.0 + 1e-9) + 1e-9;
        let mut out = Vec::new();
        for k in 0..g.len() {
            let x = g.position(k);
            if !cap.in_halfplane(&x) {
                continue;
            }
            let ur = self.value_at(&cap.reflect(&x));
            let u = self.u[k];
            let c = if (ur - u).abs() <= tol { 0.0 } else { (f.eval(ur) - f.eval(u)) / (ur - u) };
            if c.abs() > bound {
                return Err(Error::LipschitzViolated { value: c.abs(), bound: f.lipschitz_l });
            }
            out.push((k, c));
        }
        if out.is_empty() {
            return Err(Error::Empty("cap contains no grid nodes".into()));
        }
        Ok(out)
    }

    /// Measured `(min, max)` of `u / dist(x, ∂Ω)` over nodes at distance
    /// at least `delta0`.
    pub fn growth_constants(&self, delta0: f64) -> Result<(f64, f64)> {
        let h = self.grid.h;
        if !(delta0 >= 2.0 * h * (1.0 - 1e-12)) {
            return Err(invalid(format!("delta0 = {delta0} must be at least 2h = {}", 2.0 * h)));
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (s, u) in self.grid.stencils.iter().zip(&self.u) {
            if s.signed_distance >= delta0 {
                let r = u / s.signed_distance;
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        if !lo.is_finite() {
            return Err(Error::Empty(format!("no nodes at distance >= {delta0}")));
        }
        if lo <= 0.0 && self.nonlinearity.f0 > 0.0 {
            return Err(Error::NotPositive { value: lo });
        }
        Ok((lo, hi))
    }
}

/// `sup |u_ν(x) - u_ν(y)| / dist(x, y)` over all sample pairs.
pub fn seminorm_unu(samples: &[BoundaryDerivative]) -> Result<f64> {
    seminorm_unu_with(samples, Metric::Chordal)
}

pub fn seminorm_unu_with(samples: &[BoundaryDerivative], metric: Metric) -> Result<f64> {
    let m = samples.len();
    if m < 2 {
        return Err(invalid("need at least two boundary samples"));
    }
    // cumulative polygon length, for the geodesic variant
    let mut arc = vec![0.0; m + 1];
    for i in 0..m {
        arc[i + 1] = arc[i] + (samples[(i + 1) % m].point - samples[i].point).norm();
    }
    let total = arc[m];
    let mut best = 0.0f64;
    for i in 0..m {
        for j in i + 1..m {
            let dist = match metric {
                Metric::Chordal => (samples[i].point - samples[j].point).norm(),
                Metric::Geodesic => {
                    let s = arc[j] - arc[i];
                    s.min(total - s)
                }
            };
            if dist > 0.0 {
                best = best.max((samples[i].u_nu - samples[j].u_nu).abs() / dist);
            }
        }
    }
    Ok(best)
}

pub fn min_unu(samples: &[BoundaryDerivative]) -> f64 {
    samples.iter().map(|s| s.u_nu).fold(f64::INFINITY, f64::min)
}
