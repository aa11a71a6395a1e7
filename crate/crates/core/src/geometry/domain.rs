use std::f64::consts::TAU;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::{GeometrySummary, Point};
use crate::error::{invalid, Error, Result};

/// Samples used to validate star-shapedness and convexity at construction.
const GUARD_SAMPLES: usize = 4096;
/// Coarse boundary table used to seed nearest-point searches.
pub(crate) const COARSE_SAMPLES: usize = 512;
/// Default dense sample count for minima/maxima over the boundary.
pub const DEFAULT_SAMPLES: usize = 2048;

/// Radius function and its first two angular derivatives at one angle.
#[derive(Clone, Copy, Debug)]
pub struct Radial {
    pub rho: f64,
    pub d1: f64,
    pub d2: f64,
}

/// A point of the boundary together with its differential data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub position: Point,
    pub angle: f64,
    pub inward_normal: Point,
    pub curvature: f64,
}

/// Declared bounds checked when the domain is built.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SmoothnessGuard {
    pub min_radius: f64,
    pub max_radius: f64,
    pub min_curvature: f64,
    pub max_curvature: f64,
}

impl SmoothnessGuard {
    /// Smallest radius of curvature over convex boundary arcs.
    pub fn min_curvature_radius(&self) -> f64 {
        if self.max_curvature > 0.0 {
            1.0 / self.max_curvature
        } else {
            f64::INFINITY
        }
    }
}

/// Star-shaped planar domain with boundary `center + rho(phi) (cos phi, sin phi)`,
/// `rho(phi) = c0 + sum_k a_k cos(k phi) + b_k sin(k phi)`.
#[derive(Clone, Debug)]
pub struct DomainSpec {
    center: Point,
    c0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    convex: bool,
    guard: SmoothnessGuard,
    coarse: Arc<Vec<(f64, Point)>>,
    summary: OnceLock<GeometrySummary>,
    dense: OnceLock<Arc<Vec<BoundaryPoint>>>,
}

/// On-disk representation:
/// `{"center":[x,y], "coeffs":{"c0":…, "cos":[…], "sin":[…]}, "convex":bool}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub center: [f64; 2],
    pub coeffs: CoeffsFile,
    #[serde(default)]
    pub convex: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoeffsFile {
    pub c0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl DomainSpec {
    pub fn new(center: Point, c0: f64, cos: Vec<f64>, sin: Vec<f64>, convex: bool) -> Result<Self> {
        if !center.iter().all(|v| v.is_finite())
            || !c0.is_finite()
            || !cos.iter().chain(sin.iter()).all(|v| v.is_finite())
        {
            return Err(invalid("domain coefficients must be finite"));
        }
        let k = cos.len().max(sin.len());
        let mut cos = cos;
        let mut sin = sin;
        cos.resize(k, 0.0);
        sin.resize(k, 0.0);
        let mut spec = DomainSpec {
            center,
            c0,
            cos,
            sin,
            convex,
            guard: SmoothnessGuard { min_radius: 0.0, max_radius: 0.0, min_curvature: 0.0, max_curvature: 0.0 },
            coarse: Arc::new(Vec::new()),
            summary: OnceLock::new(),
            dense: OnceLock::new(),
        };
        spec.guard = spec.compute_guard()?;
        let coarse = (0..COARSE_SAMPLES)
            .map(|i| {
                let phi = TAU * i as f64 / COARSE_SAMPLES as f64;
                (phi, spec.position(phi))
            })
            .collect();
        spec.coarse = Arc::new(coarse);
        Ok(spec)
    }

    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(invalid(format!("disk radius must be positive, got {radius}")));
        }
        Self::new(center, radius, Vec::new(), Vec::new(), true)
    }

    /// Ellipse with semi-axes `a` (along the direction at angle `rotation`) and `b`.
    ///
    /// The polar radius about the center is analytic, so its Fourier series is
    /// truncated once the coefficients drop below round-off.
    pub fn ellipse(center: Point, a: f64, b: f64, rotation: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(invalid(format!("ellipse semi-axes must be positive, got a={a}, b={b}")));
        }
        let rho = |phi: f64| {
            let t = phi - rotation;
            a * b / ((b * t.cos()).powi(2) + (a * t.sin()).powi(2)).sqrt()
        };
        let (c0, cos, sin) = fourier_coefficients(rho, 1024, 256);
        Self::new(center, c0, cos, sin, true)
    }

    pub fn from_file_repr(file: &DomainFile) -> Result<Self> {
        Self::new(
            Point::new(file.center[0], file.center[1]),
            file.coeffs.c0,
            file.coeffs.cos.clone(),
            file.coeffs.sin.clone(),
            file.convex,
        )
    }

    pub fn to_file_repr(&self) -> DomainFile {
        DomainFile {
            center: [self.center.x, self.center.y],
            coeffs: CoeffsFile { c0: self.c0, cos: self.cos.clone(), sin: self.sin.clone() },
            convex: self.convex,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: DomainFile = serde_json::from_str(&text)?;
        Self::from_file_repr(&file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file_repr())?)?;
        Ok(())
    }

    /// Rigid rotation by `angle` about `about`.
    pub fn rotated(&self, angle: f64, about: Point) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        let rel = self.center - about;
        let center = about + Point::new(c * rel.x - s * rel.y, s * rel.x + c * rel.y);
        let mut cos = Vec::with_capacity(self.cos.len());
        let mut sin = Vec::with_capacity(self.sin.len());
        for (k, (&ak, &bk)) in self.cos.iter().zip(&self.sin).enumerate() {
            let (sk, ck) = ((k + 1) as f64 * angle).sin_cos();
            cos.push(ak * ck - bk * sk);
            sin.push(ak * sk + bk * ck);
        }
        Self::new(center, self.c0, cos, sin, self.convex)
    }

    pub fn translated(&self, shift: Point) -> Result<Self> {
        Self::new(self.center + shift, self.c0, self.cos.clone(), self.sin.clone(), self.convex)
    }

    /// Uniform scaling about the star center.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(invalid("scale factor must be positive"));
        }
        let sc = |v: &Vec<f64>| v.iter().map(|x| x * factor).collect();
        Self::new(self.center, self.c0 * factor, sc(&self.cos), sc(&self.sin), self.convex)
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn guard(&self) -> &SmoothnessGuard {
        &self.guard
    }

    pub fn coefficients(&self) -> (f64, &[f64], &[f64]) {
        (self.c0, &self.cos, &self.sin)
    }

    pub fn radial(&self, phi: f64) -> Radial {
        let (s1, c1) = phi.sin_cos();
        let (mut sk, mut ck) = (s1, c1);
        let mut rho = self.c0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for (k, (&a, &b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kf = (k + 1) as f64;
            rho += a * ck + b * sk;
            d1 += kf * (b * ck - a * sk);
            d2 -= kf * kf * (a * ck + b * sk);
            let next_c = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = next_c;
        }
        Radial { rho, d1, d2 }
    }

    pub fn rho(&self, phi: f64) -> f64 {
        let (s1, c1) = phi.sin_cos();
        let (mut sk, mut ck) = (s1, c1);
        let mut rho = self.c0;
        for (&a, &b) in self.cos.iter().zip(&self.sin) {
            rho += a * ck + b * sk;
            let next_c = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = next_c;
        }
        rho
    }

    pub fn position(&self, phi: f64) -> Point {
        let (s, c) = phi.sin_cos();
        self.center + self.rho(phi) * Point::new(c, s)
    }

    /// Boundary position and its first two derivatives in the angle parameter.
    pub fn position_derivatives(&self, phi: f64) -> (Point, Point, Point) {
        let r = self.radial(phi);
        let (s, c) = phi.sin_cos();
        let er = Point::new(c, s);
        let ephi = Point::new(-s, c);
        let x = self.center + r.rho * er;
        let dx = r.d1 * er + r.rho * ephi;
        let ddx = (r.d2 - r.rho) * er + 2.0 * r.d1 * ephi;
        (x, dx, ddx)
    }

    pub fn boundary_point(&self, phi: f64) -> BoundaryPoint {
        let r = self.radial(phi);
        let (s, c) = phi.sin_cos();
        let er = Point::new(c, s);
        let ephi = Point::new(-s, c);
        let tangent = r.d1 * er + r.rho * ephi;
        let speed = tangent.norm();
        BoundaryPoint {
            position: self.center + r.rho * er,
            angle: phi,
            inward_normal: Point::new(-tangent.y, tangent.x) / speed,
            curvature: curvature_of(r),
        }
    }

    /// `m` boundary points at equally spaced angles starting from 0.
    pub fn boundary_sample(&self, m: usize) -> Result<Vec<BoundaryPoint>> {
        if m < 4 {
            return Err(invalid(format!("boundary sample needs m >= 4, got {m}")));
        }
        (0..m)
            .map(|i| {
                let phi = TAU * i as f64 / m as f64;
                let bp = self.boundary_point(phi);
                let rho = (bp.position - self.center).norm();
                if self.rho(phi) <= 0.0 {
                    Err(Error::NotStarShaped { angle: phi, rho: -rho })
                } else {
                    Ok(bp)
                }
            })
            .collect()
    }

    /// Cached dense boundary sample with [`DEFAULT_SAMPLES`] points.
    pub fn dense_sample(&self) -> Arc<Vec<BoundaryPoint>> {
        self.dense
            .get_or_init(|| Arc::new(self.boundary_sample(DEFAULT_SAMPLES).expect("validated at construction")))
            .clone()
    }

    pub(crate) fn coarse_table(&self) -> &[(f64, Point)] {
        &self.coarse
    }

    pub(crate) fn summary_cell(&self) -> &OnceLock<GeometrySummary> {
        &self.summary
    }

    /// Radial level function: negative inside, zero on the boundary, positive outside.
    pub fn level(&self, p: &Point) -> f64 {
        let v = p - self.center;
        let r = v.norm();
        if r == 0.0 {
            return -self.c0.max(self.guard.min_radius);
        }
        r - self.rho(v.y.atan2(v.x))
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.level(p) < 0.0
    }

    fn compute_guard(&self) -> Result<SmoothnessGuard> {
        let mut g = SmoothnessGuard {
            min_radius: f64::INFINITY,
            max_radius: f64::NEG_INFINITY,
            min_curvature: f64::INFINITY,
            max_curvature: f64::NEG_INFINITY,
        };
        for i in 0..GUARD_SAMPLES {
            let phi = TAU * i as f64 / GUARD_SAMPLES as f64;
            let r = self.radial(phi);
            if !(r.rho > 0.0) {
                return Err(Error::NotStarShaped { angle: phi, rho: r.rho });
            }
            let kappa = curvature_of(r);
            if self.convex && kappa < -1e-10 {
                return Err(Error::NotConvex { angle: phi, curvature: kappa });
            }
            g.min_radius = g.min_radius.min(r.rho);
            g.max_radius = g.max_radius.max(r.rho);
            g.min_curvature = g.min_curvature.min(kappa);
            g.max_curvature = g.max_curvature.max(kappa);
        }
        Ok(g)
    }
}

fn curvature_of(r: Radial) -> f64 {
    let q = r.rho * r.rho + r.d1 * r.d1;
    (r.rho * r.rho + 2.0 * r.d1 * r.d1 - r.rho * r.d2) / (q * q.sqrt())
}

/// Real Fourier coefficients of a smooth periodic function by the trapezoidal
/// rule on `n` nodes, truncated after the last harmonic above round-off.
fn fourier_coefficients<F: Fn(f64) -> f64>(f: F, n: usize, kmax: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let values: Vec<f64> = (0..n).map(|j| f(TAU * j as f64 / n as f64)).collect();
    let c0 = values.iter().sum::<f64>() / n as f64;
    let mut cos = Vec::with_capacity(kmax);
    let mut sin = Vec::with_capacity(kmax);
    // exact angle table: reduce k*j modulo n before evaluating sin/cos
    let table: Vec<(f64, f64)> = (0..n).map(|m| (TAU * m as f64 / n as f64).sin_cos()).collect();
    for k in 1..=kmax.min(n / 2 - 1) {
        let (mut a, mut b) = (0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            let (s, c) = table[(k * j) % n];
            a += v * c;
            b += v * s;
        }
        cos.push(2.0 * a / n as f64);
        sin.push(2.0 * b / n as f64);
    }
    let floor = 1e-15 * c0.abs();
    let keep = (0..cos.len())
        .rev()
        .find(|&k| cos[k].abs() > floor || sin[k].abs() > floor)
        .map_or(0, |k| k + 1);
    cos.truncate(keep);
    sin.truncate(keep);
    for v in cos.iter_mut().chain(sin.iter_mut()) {
        if v.abs() <= floor {
            *v = 0.0;
        }
    }
    (c0, cos, sin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn unit_disk_four_points_face_center() {
        let d = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
        let pts = d.boundary_sample(4).unwrap();
        let expected = [Point::new(1.0, 0.0), Point::new(0.0, 1.0), Point::new(-1.0, 0.0), Point::new(0.0, -1.0)];
        for (bp, e) in pts.iter().zip(expected) {
            assert!((bp.position - e).norm() < 1e-15);
            assert!((bp.inward_normal + e).norm() < 1e-15);
            assert!((bp.curvature - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ellipse_curvature_matches_closed_form() {
        let (a, b) = (1.05, 1.0);
        let d = DomainSpec::ellipse(Point::zeros(), a, b, 0.0).unwrap();
        let pts = d.boundary_sample(360).unwrap();
        let best = pts.iter().max_by(|p, q| p.curvature.total_cmp(&q.curvature)).unwrap();
        assert!(best.position.y.abs() < 1e-12 && (best.position.x.abs() - a).abs() < 1e-12);
        for bp in &pts {
            // closed-form ellipse curvature at the point's parametric angle
            let t = (bp.position.y / b).atan2(bp.position.x / a);
            let exact = a * b / ((a * t.sin()).powi(2) + (b * t.cos()).powi(2)).powf(1.5);
            assert!((bp.curvature - exact).abs() < 1e-12, "{} vs {}", bp.curvature, exact);
            assert!((bp.inward_normal.norm() - 1.0).abs() < 1e-12);
            assert!(((bp.position.x / a).powi(2) + (bp.position.y / b).powi(2) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn radius_crossing_zero_is_rejected() {
        let err = DomainSpec::new(Point::zeros(), 0.4, vec![0.5], vec![], false).unwrap_err();
        assert!(matches!(err, Error::NotStarShaped { .. }));
    }

    #[test]
    fn convex_flag_is_audited() {
        let err = DomainSpec::new(Point::zeros(), 1.0, vec![0.0, 0.5], vec![], true).unwrap_err();
        assert!(matches!(err, Error::NotConvex { .. }));
        assert!(DomainSpec::new(Point::zeros(), 1.0, vec![0.0, 0.5], vec![], false).is_ok());
    }

    #[test]
    fn rotation_moves_the_major_axis() {
        let d = DomainSpec::ellipse(Point::new(0.2, -0.1), 1.2, 1.0, 0.0).unwrap();
        let r = d.rotated(FRAC_PI_2 / 3.0, Point::new(0.2, -0.1)).unwrap();
        let direct = DomainSpec::ellipse(Point::new(0.2, -0.1), 1.2, 1.0, FRAC_PI_2 / 3.0).unwrap();
        for i in 0..64 {
            let phi = 2.0 * PI * i as f64 / 64.0;
            assert!((r.rho(phi) - direct.rho(phi)).abs() < 1e-13);
        }
    }

    #[test]
    fn file_roundtrip() {
        let d = DomainSpec::new(Point::new(0.1, 0.2), 1.0, vec![0.1], vec![0.0, 0.02], true).unwrap();
        let text = serde_json::to_string(&d.to_file_repr()).unwrap();
        let back: DomainFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d.to_file_repr());
        assert!(serde_json::from_str::<DomainFile>(r#"{"center":[0,0],"coeffs":{"c0":1},"bogus":1}"#).is_err());
    }
}
