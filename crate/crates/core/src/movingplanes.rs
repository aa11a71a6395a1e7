//! Moving planes: extent, critical position, tangency/orthogonality
//! classification, the interior half-ball at the touching point, and sampled
//! cone certificates for maximal caps.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{self, reflect_unchecked, signed_distance, DomainSpec, Point};
use crate::numeric::{brent_root, golden_max, golden_min};

/// Tolerances for the plane search, relative to the diameter where noted.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PlaneTolerances {
    /// Bisection width for the critical value, times `d_Omega`.
    pub lambda_rel: f64,
    /// Containment slack for reflected points, times `d_Omega`.
    pub geo_rel: f64,
    /// Orthogonality tolerance `|nu·omega|` for the S2 test (radians).
    pub angle: f64,
    /// Points closer than this (times `d_Omega`) to the plane are not tested
    /// for tangency; near the plane every point nearly reflects onto itself.
    pub separation_rel: f64,
    /// Lateral samples per cone in the certificate.
    pub lateral_samples: usize,
}

impl Default for PlaneTolerances {
    fn default() -> Self {
        PlaneTolerances { lambda_rel: 1e-6, geo_rel: 1e-9, angle: 1e-3, separation_rel: 1e-2, lateral_samples: 4096 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// The reflected cap touches the boundary at a point off the plane.
    S1,
    /// The plane meets the boundary orthogonally.
    S2,
}

/// How the critical value was located.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SearchPath {
    Bisection,
    /// Containment was not monotone on the bisection bracket.
    LinearScan,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LambdaSearch {
    pub lambda: f64,
    pub extent: f64,
    pub path: SearchPath,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub primary: Case,
    pub touch_point: Point,
    pub touch_angle: f64,
    /// The other case, when both fire.
    pub secondary: Option<(Case, Point)>,
}

/// Outcome of moving the plane in one direction.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalCap {
    pub omega: Point,
    pub extent: f64,
    pub lambda: f64,
    pub case: Case,
    pub touch_point: Point,
    pub touch_angle: f64,
    pub secondary: Option<(Case, Point)>,
    /// Center of the interior touching ball at the touch point; grid checks
    /// take the connected component of the cap containing this point.
    pub component_seed: Point,
    pub search: SearchPath,
    pub tol: f64,
}

impl CriticalCap {
    /// `x^lambda`.
    pub fn reflect(&self, x: &Point) -> Point {
        reflect_unchecked(x, &self.omega, self.lambda)
    }

    /// Open half-plane on the cap side.
    pub fn in_halfplane(&self, x: &Point) -> bool {
        x.dot(&self.omega) > self.lambda
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HalfBall {
    pub center: Point,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeWitness {
    pub vertex: Point,
    pub xi: Point,
    pub half_aperture: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeCertificate {
    pub theta: f64,
    pub t_param: f64,
    pub ball_center: Point,
    pub ball_radius: f64,
    pub witness_points: Vec<ConeWitness>,
    /// Always `"sampled"`: a finite set of vertices and lateral points was checked.
    pub coverage: &'static str,
}

pub(crate) fn check_unit(omega: &Point) -> Result<()> {
    let norm = omega.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitDirection { norm });
    }
    Ok(())
}

/// Unit vector at angle `theta`.
pub fn direction(theta: f64) -> Point {
    Point::new(theta.cos(), theta.sin())
}

/// `sup { x·omega : x in domain }`.
pub fn extent(domain: &DomainSpec, omega: &Point) -> Result<f64> {
    check_unit(omega)?;
    let samples = domain.dense_sample();
    let step = TAU / samples.len() as f64;
    let (i, _) = samples
        .iter()
        .enumerate()
        .map(|(i, b)| (i, b.position.dot(omega)))
        .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
    let a = samples[i].angle;
    let (_, v) = golden_max(|t| domain.position(t).dot(omega), a - step, a + step, 1e-13);
    Ok(v.max(samples[i].position.dot(omega)))
}

/// Largest reflected outward excursion over the cap boundary, measured with
/// the radial level function and refined around its worst local maxima.
/// Returns `(angle, level)` of the worst point.
fn worst_reflection(domain: &DomainSpec, omega: &Point, mu: f64) -> Option<(f64, f64)> {
    let samples = domain.dense_sample();
    let m = samples.len();
    let step = TAU / m as f64;
    let g = |phi: f64| {
        let x = domain.position(phi);
        if x.dot(omega) <= mu {
            f64::NEG_INFINITY
        } else {
            domain.level(&reflect_unchecked(&x, omega, mu))
        }
    };
    let vals: Vec<f64> = samples.iter().map(|b| g(b.angle)).collect();
    let mut peaks: Vec<usize> = (0..m)
        .filter(|&i| vals[i].is_finite() && vals[i] >= vals[(i + m - 1) % m] && vals[i] >= vals[(i + 1) % m])
        .collect();
    if peaks.is_empty() {
        return None;
    }
    peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    peaks.truncate(3);
    peaks
        .into_iter()
        .map(|i| {
            let a = samples[i].angle;
            let (t, v) = golden_max(g, a - step, a + step, 1e-12);
            if v >= vals[i] {
                (t, v)
            } else {
                (a, vals[i])
            }
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

/// True iff every sampled boundary point beyond `{x·omega = mu}` reflects to
/// a point with signed distance at least `-tol_geo`.
pub fn reflected_cap_inside(domain: &DomainSpec, omega: &Point, mu: f64) -> Result<bool> {
    check_unit(omega)?;
    let d = geometry::summary(domain)?.d_omega;
    Ok(cap_inside(domain, omega, mu, PlaneTolerances::default().geo_rel * d))
}

fn cap_inside(domain: &DomainSpec, omega: &Point, mu: f64, tol_geo: f64) -> bool {
    match worst_reflection(domain, omega, mu) {
        None => true,
        Some((_, v)) if v <= 0.0 => true,
        Some((phi, _)) => {
            let x = domain.position(phi);
            signed_distance(domain, &reflect_unchecked(&x, omega, mu)) >= -tol_geo
        }
    }
}

/// Critical value `lambda` for direction `omega`, to bisection width `tol`.
pub fn critical_lambda(domain: &DomainSpec, omega: &Point, tol: f64) -> Result<f64> {
    Ok(critical_lambda_search(domain, omega, tol, &PlaneTolerances::default())?.lambda)
}

/// Moves the plane down from the extent in geometrically growing steps until
/// containment fails, then bisects. Monotonicity of containment above the
/// result is audited at 64 points; if it fails, a linear scan from the top
/// locates the first failure instead. The returned value is the last
/// position at which containment held.
pub fn critical_lambda_search(
    domain: &DomainSpec,
    omega: &Point,
    tol: f64,
    tols: &PlaneTolerances,
) -> Result<LambdaSearch> {
    check_unit(omega)?;
    if !(tol > 0.0) {
        return Err(invalid("lambda tolerance must be positive"));
    }
    let d = geometry::summary(domain)?.d_omega;
    let tol_geo = tols.geo_rel * d;
    let big = extent(domain, omega)?;
    let floor = -extent(domain, &(-omega))?;
    let inside = |mu: f64| cap_inside(domain, omega, mu, tol_geo);

    let mut hi = big - tol;
    let mut step = tol;
    let lo = loop {
        let mu = hi - step;
        if mu <= floor {
            if inside(floor) {
                return Err(Error::NoBracket { lower: floor });
            }
            break floor;
        }
        if !inside(mu) {
            break mu;
        }
        hi = mu;
        step *= 2.0;
    };
    let mut lam = bisect(&inside, lo, hi, tol);
    let mut path = SearchPath::Bisection;
    let monotone = (1..=64).all(|j| inside(lam + (big - lam) * j as f64 / 65.0));
    if !monotone {
        path = SearchPath::LinearScan;
        let n = 4096;
        let dmu = (big - floor) / n as f64;
        let mut prev = big - tol;
        let mut found = None;
        for j in 1..n {
            let mu = big - tol - j as f64 * dmu;
            if !inside(mu) {
                found = Some(mu);
                break;
            }
            prev = mu;
        }
        let lo = found.ok_or(Error::NoBracket { lower: floor })?;
        lam = bisect(&inside, lo, prev, tol);
    }
    Ok(LambdaSearch { lambda: lam, extent: big, path })
}

fn bisect<F: Fn(f64) -> bool>(inside: &F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Decides which of the two critical configurations occurs at `lambda`.
pub fn classify_case(domain: &DomainSpec, omega: &Point, lambda: f64, tol: f64) -> Result<CaseReport> {
    classify_with(domain, omega, lambda, tol, &PlaneTolerances::default())
}

pub fn classify_with(
    domain: &DomainSpec,
    omega: &Point,
    lambda: f64,
    tol: f64,
    tols: &PlaneTolerances,
) -> Result<CaseReport> {
    check_unit(omega)?;
    let d = geometry::summary(domain)?.d_omega;
    let s1 = tangency_point(domain, omega, lambda, tols.geo_rel * d + 4.0 * tol, tols.separation_rel * d);
    let s2 = orthogonal_point(domain, omega, lambda, tols.angle);
    match (s1, s2) {
        (Some((p, a)), s2) => Ok(CaseReport {
            primary: Case::S1,
            touch_point: p,
            touch_angle: a,
            secondary: s2.map(|(q, _)| (Case::S2, q)),
        }),
        (None, Some((q, a))) => Ok(CaseReport { primary: Case::S2, touch_point: q, touch_angle: a, secondary: None }),
        (None, None) => Err(Error::CriticalValueInconsistent { lambda }),
    }
}

/// Boundary point beyond the plane whose reflection lands on the boundary.
/// Among all such points the one farthest along `omega` is returned.
fn tangency_point(domain: &DomainSpec, omega: &Point, lambda: f64, tol_s1: f64, sep: f64) -> Option<(Point, f64)> {
    let samples = domain.dense_sample();
    let m = samples.len();
    let step = TAU / m as f64;
    let depth = |phi: f64| {
        let x = domain.position(phi);
        domain.level(&reflect_unchecked(&x, omega, lambda)).abs()
    };
    let eligible: Vec<bool> = samples.iter().map(|b| b.position.dot(omega) - lambda > sep).collect();
    let vals: Vec<f64> = samples.iter().map(|b| depth(b.angle)).collect();
    let mut best: Option<(Point, f64)> = None;
    let mut consider = |phi: f64| {
        let x = domain.position(phi);
        if x.dot(omega) - lambda <= sep {
            return;
        }
        let sd = signed_distance(domain, &reflect_unchecked(&x, omega, lambda));
        if sd.abs() <= tol_s1 && best.is_none_or(|(b, _)| x.dot(omega) > b.dot(omega)) {
            best = Some((x, phi));
        }
    };
    for i in 0..m {
        if !eligible[i] {
            continue;
        }
        let a = samples[i].angle;
        if vals[i] <= vals[(i + m - 1) % m] && vals[i] <= vals[(i + 1) % m] {
            let (t, _) = golden_min(depth, a - step, a + step, 1e-13);
            consider(t);
        }
        if vals[i] <= tol_s1 {
            consider(a);
        }
    }
    best
}

/// Boundary point on the plane where the normal is orthogonal to `omega`.
fn orthogonal_point(domain: &DomainSpec, omega: &Point, lambda: f64, tol_angle: f64) -> Option<(Point, f64)> {
    let samples = domain.dense_sample();
    let m = samples.len();
    let h = |phi: f64| domain.position(phi).dot(omega) - lambda;
    let mut best: Option<(Point, f64, f64)> = None;
    for i in 0..m {
        let a = samples[i].angle;
        let b = if i + 1 == m { TAU } else { samples[i + 1].angle };
        let (ha, hb) = (h(a), h(b));
        if ha.signum() == hb.signum() && ha != 0.0 {
            continue;
        }
        if let Some(t) = brent_root(h, a, b, 1e-15) {
            let bp = domain.boundary_point(t);
            let c = bp.inward_normal.dot(omega).abs();
            if c <= tol_angle && best.is_none_or(|(_, _, bc)| c < bc) {
                best = Some((bp.position, t, c));
            }
        }
    }
    best.map(|(p, t, _)| (p, t))
}

/// Full moving-planes pass for one direction.
pub fn critical_cap(domain: &DomainSpec, omega: &Point, tols: &PlaneTolerances) -> Result<CriticalCap> {
    let d = geometry::summary(domain)?.d_omega;
    let tol = tols.lambda_rel * d;
    let search = critical_lambda_search(domain, omega, tol, tols)?;
    let report = classify_with(domain, omega, search.lambda, tol, tols)?;
    let mut cap = CriticalCap {
        omega: *omega,
        extent: search.extent,
        lambda: search.lambda,
        case: report.primary,
        touch_point: report.touch_point,
        touch_angle: report.touch_angle,
        secondary: report.secondary,
        component_seed: report.touch_point,
        search: search.path,
        tol,
    };
    let ball = touching_ball(domain, &cap)?;
    cap.component_seed = ball.center;
    Ok(cap)
}

fn touching_ball(domain: &DomainSpec, cap: &CriticalCap) -> Result<HalfBall> {
    let r = geometry::summary(domain)?.r_omega;
    let bp = domain.boundary_point(cap.touch_angle);
    Ok(HalfBall { center: bp.position + r * bp.inward_normal, radius: r })
}

/// Interior ball of radius `r_Omega` touching the boundary at the cap's touch
/// point; checks that its center is not behind the plane and that its part
/// beyond the plane lies in the cap (sampled on a polar grid and the circle).
pub fn tangent_halfball(domain: &DomainSpec, cap: &CriticalCap) -> Result<HalfBall> {
    let ball = touching_ball(domain, cap)?;
    let d = geometry::summary(domain)?.d_omega;
    if ball.center.dot(&cap.omega) < cap.lambda - cap.tol {
        return Err(Error::HalfBallEscapes { point: ball.center });
    }
    if let Some(p) = halfball_escape(domain, cap, &ball, 1e-6 * d) {
        return Err(Error::HalfBallEscapes { point: p });
    }
    Ok(ball)
}

fn halfball_escape(domain: &DomainSpec, cap: &CriticalCap, ball: &HalfBall, tol: f64) -> Option<Point> {
    let mut pts = Vec::with_capacity(16 * 64 + 256);
    for i in 1..=16 {
        let rr = ball.radius * i as f64 / 16.0;
        for j in 0..64 {
            pts.push(ball.center + rr * direction(TAU * (j as f64 + 0.5 * (i % 2) as f64) / 64.0));
        }
    }
    for j in 0..256 {
        pts.push(ball.center + ball.radius * direction(TAU * j as f64 / 256.0));
    }
    pts.into_iter()
        .filter(|q| cap.in_halfplane(q))
        .find(|q| domain.level(q) > 0.0 && signed_distance(domain, q) < -tol)
}

/// `arctan((1-t) r_Omega / (2 d_Omega))`.
pub fn theta_lower_bound(d_omega: f64, r_omega: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 0.5) {
        return Err(invalid(format!("t must lie in (0, 1/2), got {t}")));
    }
    if !(d_omega > 0.0 && r_omega > 0.0) {
        return Err(invalid("d_Omega and r_Omega must be positive"));
    }
    Ok(((1.0 - t) * r_omega / (2.0 * d_omega)).atan())
}

/// `2 d_Omega / r_Omega`.
pub fn lipschitz_cap_bound(d_omega: f64, r_omega: f64) -> Result<f64> {
    if !(d_omega > 0.0 && r_omega > 0.0) {
        return Err(invalid("d_Omega and r_Omega must be positive"));
    }
    Ok(2.0 * d_omega / r_omega)
}

pub fn ctheta_check(domain: &DomainSpec, cap: &CriticalCap, t: f64) -> Result<ConeCertificate> {
    ctheta_check_with(domain, cap, t, &PlaneTolerances::default())
}

/// Sampled cone certificate for one maximal cap.
///
/// The ball `B` of radius `(1-t) r_Omega / 2` sits in the half-ball at the
/// touch point, pushed off the plane by its own radius. Vertices `x` are taken
/// in the boundary layer of the cap (boundary samples pushed inward by a
/// fraction of `t r_Omega`). The cone from `x` over the cross-section of `B`
/// through its center has half-aperture `atan(rbar / |x - y|)`; its two lateral
/// segments are sampled and must stay inside the cap.
pub fn ctheta_check_with(
    domain: &DomainSpec,
    cap: &CriticalCap,
    t: f64,
    tols: &PlaneTolerances,
) -> Result<ConeCertificate> {
    if !(t > 0.0 && t < 0.5) {
        return Err(invalid(format!("t must lie in (0, 1/2), got {t}")));
    }
    let s = geometry::summary(domain)?;
    let ball = tangent_halfball(domain, cap)?;
    let core = t * s.r_omega;
    let rbar = 0.5 * (1.0 - t) * s.r_omega;
    let y = ball.center + rbar * cap.omega;
    if signed_distance(domain, &y) <= core {
        return Err(Error::Empty(format!("shrunk cap G_lambda misses the ball center ({}, {})", y.x, y.y)));
    }
    let tol_contain = 1e-6 * s.d_omega;
    let per_side = (tols.lateral_samples / 2).max(2);

    let mut witnesses = Vec::new();
    let mut theta = f64::INFINITY;
    for j in 0..256 {
        let bp = domain.boundary_point(TAU * j as f64 / 256.0);
        if !cap.in_halfplane(&bp.position) {
            continue;
        }
        for frac in [1e-3, 0.5, 0.95] {
            let x = bp.position + frac * core * bp.inward_normal;
            if !cap.in_halfplane(&x) {
                continue;
            }
            let sd = signed_distance(domain, &x);
            if !(sd > 0.0 && sd < core) {
                continue;
            }
            let axis = y - x;
            let len = axis.norm();
            let ell = axis / len;
            let n = Point::new(-ell.y, ell.x);
            for side in [-1.0, 1.0] {
                let end = y + side * rbar * n;
                for k in 1..=per_side {
                    let q = x + (end - x) * (k as f64 / per_side as f64);
                    let outside_plane = q.dot(&cap.omega) < cap.lambda - cap.tol;
                    let outside_domain = domain.level(&q) > 0.0 && signed_distance(domain, &q) < -tol_contain;
                    if outside_plane || outside_domain {
                        return Err(Error::ConeEscapes { vertex: x, escape: q });
                    }
                }
            }
            let xi = axis_exit(domain, &x, &ell, len, core);
            let half = (rbar / len).atan();
            theta = theta.min(half);
            witnesses.push(ConeWitness { vertex: x, xi, half_aperture: half });
        }
    }
    if witnesses.is_empty() {
        return Err(Error::Empty("no cone vertices in the cap boundary layer".into()));
    }
    Ok(ConeCertificate {
        theta,
        t_param: t,
        ball_center: y,
        ball_radius: rbar,
        witness_points: witnesses,
        coverage: "sampled",
    })
}

/// First point along the axis where the distance to the boundary reaches `core`.
fn axis_exit(domain: &DomainSpec, x: &Point, ell: &Point, len: f64, core: f64) -> Point {
    let f = |s: f64| signed_distance(domain, &(x + s * ell)) - core;
    let s = brent_root(f, 0.0, len, 1e-12 * len).unwrap_or(len);
    x + s * ell
}
