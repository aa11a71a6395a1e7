use std::f64::consts::TAU;

use super::{DomainSpec, GeometrySummary, Point, DEFAULT_SAMPLES};
use crate::error::{invalid, Error, Result};
use crate::numeric::{golden_max, golden_min, stationary_point};

/// Nearest boundary point to a query point.
#[derive(Clone, Copy, Debug)]
pub struct NearestBoundary {
    pub angle: f64,
    pub point: Point,
    pub distance: f64,
}

/// Mirror image of `x` in the line `{y : y·omega = mu}`.
pub fn reflect(x: &Point, omega: &Point, mu: f64) -> Result<Point> {
    let norm = omega.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitDirection { norm });
    }
    Ok(reflect_unchecked(x, omega, mu))
}

#[inline]
pub(crate) fn reflect_unchecked(x: &Point, omega: &Point, mu: f64) -> Point {
    x - 2.0 * (x.dot(omega) - mu) * omega
}

pub fn diameter(domain: &DomainSpec) -> f64 {
    diameter_with(domain, DEFAULT_SAMPLES)
}

/// Largest pairwise distance over `m` boundary samples, then refined by
/// alternating one-dimensional maximization in the two angle parameters.
pub fn diameter_with(domain: &DomainSpec, m: usize) -> f64 {
    let m = m.max(16);
    let pts: Vec<Point> = (0..m).map(|i| domain.position(TAU * i as f64 / m as f64)).collect();
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..m {
        for j in (i + 1)..m {
            let d = (pts[i] - pts[j]).norm_squared();
            if d > best {
                best = d;
                bi = i;
                bj = j;
            }
        }
    }
    let step = TAU / m as f64;
    let mut phi = bi as f64 * step;
    let mut psi = bj as f64 * step;
    let mut value = best.sqrt();
    for _ in 0..60 {
        let xp = domain.position(psi);
        let (p1, _) = golden_max(|t| (domain.position(t) - xp).norm(), phi - step, phi + step, 1e-14);
        phi = p1;
        let xq = domain.position(phi);
        let (p2, v) = golden_max(|t| (domain.position(t) - xq).norm(), psi - step, psi + step, 1e-14);
        psi = p2;
        let done = (v - value).abs() <= 1e-15 * v;
        value = value.max(v);
        if done {
            break;
        }
    }
    value
}

pub fn interior_sphere_radius(domain: &DomainSpec) -> Result<f64> {
    interior_sphere_radius_with(domain, DEFAULT_SAMPLES)
}

/// Uniform interior touching-ball radius.
///
/// For each sample `x`, the radius of the largest ball tangent at `x` is the
/// minimum over other samples `y` of `|x-y|^2 / (2 nu(x)·(y-x))` (positive
/// denominators only), capped by the local radius of curvature. The minimizing
/// sample is then refined by a golden-section search in the angle.
pub fn interior_sphere_radius_with(domain: &DomainSpec, m: usize) -> Result<f64> {
    let samples = domain.boundary_sample(m.max(16))?;
    // work relative to the star center to keep chord round-off small
    let c = domain.center();
    let positions: Vec<Point> = samples.iter().map(|b| b.position - c).collect();
    let step = TAU / samples.len() as f64;
    // short chords only re-measure curvature (already covered by the cap, and
    // the minimum over x picks up the largest curvature in between) while
    // suffering cancellation
    let min_len2 = (8.0 * step * domain.guard().min_radius).powi(2);
    let touching = |phi: f64| -> f64 {
        let bp = domain.boundary_point(phi);
        let x = bp.position - c;
        let mut r = if bp.curvature > 0.0 { 1.0 / bp.curvature } else { f64::INFINITY };
        for y in &positions {
            let d = y - x;
            let den = 2.0 * bp.inward_normal.dot(&d);
            let len2 = d.norm_squared();
            if den > 0.0 && len2 > min_len2 {
                r = r.min(len2 / den);
            }
        }
        r
    };
    let (mut arg, mut best) = (0.0, f64::INFINITY);
    for bp in &samples {
        let r = touching(bp.angle);
        if r < best {
            best = r;
            arg = bp.angle;
        }
    }
    let (_, refined) = golden_min(touching, arg - step, arg + step, 1e-10);
    let r = best.min(refined);
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::DegenerateBoundary(format!("interior sphere radius evaluated to {r}")));
    }
    Ok(r)
}

/// Nearest boundary point: coarse table scan, then Newton refinement of
/// `|x(phi) - p|^2` around every competitive local minimum.
pub fn nearest_boundary(domain: &DomainSpec, p: &Point) -> NearestBoundary {
    let table = domain.coarse_table();
    let m = table.len();
    let dists: Vec<f64> = table.iter().map(|(_, x)| (x - p).norm()).collect();
    let mut seg = 0.0f64;
    for i in 0..m {
        seg = seg.max((table[i].1 - table[(i + 1) % m].1).norm());
    }
    let best = dists.iter().cloned().fold(f64::INFINITY, f64::min);
    let step = TAU / m as f64;
    let mut out = NearestBoundary { angle: 0.0, point: table[0].1, distance: f64::INFINITY };
    for i in 0..m {
        let d = dists[i];
        if d > best + seg || d > dists[(i + m - 1) % m] || d > dists[(i + 1) % m] {
            continue;
        }
        let phi0 = table[i].0;
        let (lo, hi) = (phi0 - step, phi0 + step);
        let g1 = |t: f64| {
            let (x, dx, _) = domain.position_derivatives(t);
            (x - p).dot(&dx)
        };
        let g2 = |t: f64| {
            let (x, dx, ddx) = domain.position_derivatives(t);
            dx.norm_squared() + (x - p).dot(&ddx)
        };
        let phi = match stationary_point(g1, g2, lo, hi, 1e-15) {
            Some(t) => t,
            None => golden_min(|t| (domain.position(t) - p).norm(), lo, hi, 1e-12).0,
        };
        let x = domain.position(phi);
        let dist = (x - p).norm();
        let (dist, phi, x) = if dist <= d { (dist, phi, x) } else { (d, phi0, table[i].1) };
        if dist < out.distance {
            out = NearestBoundary { angle: phi, point: x, distance: dist };
        }
    }
    out
}

/// Distance to the boundary, positive inside and negative outside.
pub fn signed_distance(domain: &DomainSpec, p: &Point) -> f64 {
    let d = nearest_boundary(domain, p).distance;
    if domain.level(p) < 0.0 {
        d
    } else {
        -d
    }
}

/// Membership in the parallel set `{x in domain : dist(x, boundary) > delta}`.
pub fn parallel_set_contains(domain: &DomainSpec, delta: f64, x: &Point) -> Result<bool> {
    if !(delta >= 0.0) {
        return Err(invalid(format!("delta must be nonnegative, got {delta}")));
    }
    let r_omega = summary(domain)?.r_omega;
    if delta >= r_omega {
        return Err(Error::ParallelSetNotSmooth { delta, r_omega });
    }
    Ok(signed_distance(domain, x) > delta)
}

/// Smallest and largest distance from `center` to the boundary.
pub fn inner_outer_radii(domain: &DomainSpec, center: &Point) -> Result<(f64, f64)> {
    if !domain.contains(center) {
        return Err(Error::OutsideDomain { point: *center });
    }
    let samples = domain.dense_sample();
    let step = TAU / samples.len() as f64;
    let dist = |t: f64| (domain.position(t) - center).norm();
    let (mut imin, mut imax) = (0, 0);
    let mut vals = Vec::with_capacity(samples.len());
    for (i, bp) in samples.iter().enumerate() {
        let v = (bp.position - center).norm();
        if v < vals.get(imin).copied().unwrap_or(f64::INFINITY) {
            imin = i;
        }
        if v > vals.get(imax).copied().unwrap_or(f64::NEG_INFINITY) {
            imax = i;
        }
        vals.push(v);
    }
    let a = samples[imin].angle;
    let b = samples[imax].angle;
    let (_, r_i) = golden_min(dist, a - step, a + step, 1e-12);
    let (_, r_e) = golden_max(dist, b - step, b + step, 1e-12);
    Ok((r_i.min(vals[imin]), r_e.max(vals[imax])))
}

/// Diameter, interior sphere radius and convexity, cached on the domain.
pub fn summary(domain: &DomainSpec) -> Result<GeometrySummary> {
    if let Some(s) = domain.summary_cell().get() {
        return Ok(*s);
    }
    let s = GeometrySummary {
        d_omega: diameter(domain),
        r_omega: interior_sphere_radius(domain)?,
        is_convex: domain.is_convex(),
    };
    Ok(*domain.summary_cell().get_or_init(|| s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ellipse() -> DomainSpec {
        DomainSpec::ellipse(Point::zeros(), 1.05, 1.0, 0.0).unwrap()
    }

    #[test]
    fn reflection_examples() {
        let e1 = Point::new(1.0, 0.0);
        assert_eq!(reflect(&Point::new(1.0, 0.0), &e1, 0.0).unwrap(), Point::new(-1.0, 0.0));
        let r = reflect(&Point::new(1.0, 2.0), &e1, 0.3).unwrap();
        assert!((r - Point::new(-0.4, 2.0)).norm() < 1e-15);
        let on = Point::new(0.3, -7.0);
        assert_eq!(reflect(&on, &e1, 0.3).unwrap(), on);
        assert!(matches!(reflect(&on, &Point::new(1.0, 1.0), 0.0), Err(Error::NonUnitDirection { .. })));
    }

    #[test]
    fn diameters() {
        let disk = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
        assert!((diameter(&disk) - 2.0).abs() < 1e-9);
        assert!((diameter(&ellipse()) - 2.1).abs() < 1e-9);
        let moved = DomainSpec::disk(Point::new(-3.0, 7.5), 0.7).unwrap();
        assert!((diameter(&moved) - 1.4).abs() < 1e-9);
    }

    #[test]
    fn interior_radii() {
        let disk = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
        assert!((interior_sphere_radius(&disk).unwrap() - 1.0).abs() < 1e-9);
        let big = DomainSpec::disk(Point::new(1.0, 1.0), 2.0).unwrap();
        let rb = interior_sphere_radius(&big).unwrap();
        assert!((rb - 2.0).abs() < 1e-9, "{rb}");
        let r = interior_sphere_radius(&ellipse()).unwrap();
        assert!((r - 1.0 / 1.05).abs() < 1e-4, "{r}");
    }

    #[test]
    fn signed_distances() {
        let disk = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
        assert!((signed_distance(&disk, &Point::zeros()) - 1.0).abs() < 1e-12);
        assert!((signed_distance(&disk, &Point::new(2.0, 0.0)) + 1.0).abs() < 1e-12);
        assert!(signed_distance(&ellipse(), &Point::new(1.05, 0.0)).abs() < 1e-12);
        // nearest point on an ellipse from the inside: analytic along the minor axis
        assert!((signed_distance(&ellipse(), &Point::new(0.0, 0.5)) - 0.5).abs() < 1e-9);
        let p = Point::new(0.3, -0.4);
        assert!((signed_distance(&disk, &p) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parallel_sets() {
        let disk = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
        assert!(parallel_set_contains(&disk, 0.5, &Point::zeros()).unwrap());
        assert!(!parallel_set_contains(&disk, 0.5, &Point::new(0.6, 0.0)).unwrap());
        assert!(matches!(parallel_set_contains(&disk, 1.0, &Point::zeros()), Err(Error::ParallelSetNotSmooth { .. })));
        assert!(parallel_set_contains(&ellipse(), 0.9, &Point::zeros()).is_ok());
    }

    #[test]
    fn annulus_radii() {
        let disk = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
        let (ri, re) = inner_outer_radii(&disk, &Point::zeros()).unwrap();
        assert!((ri - 1.0).abs() < 1e-9 && (re - 1.0).abs() < 1e-9);
        let (ri, re) = inner_outer_radii(&ellipse(), &Point::zeros()).unwrap();
        assert!((ri - 1.0).abs() < 1e-9 && (re - 1.05).abs() < 1e-9);
        let (ri, re) = inner_outer_radii(&disk, &Point::new(0.1, 0.0)).unwrap();
        assert!((ri - 0.9).abs() < 1e-9 && (re - 1.1).abs() < 1e-9);
        assert!(inner_outer_radii(&disk, &Point::new(1.5, 0.0)).is_err());
    }
}
