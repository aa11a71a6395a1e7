//! Harnack constants and ball chains in right spherical cones.
//!
//! Formulas are dimension-generic; chain geometry works in any `D` through
//! `nalgebra::SVector`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::SVector;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::Point;

fn check_a(a: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return Err(invalid(format!("a must lie in (0, 1), got {a}")));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if theta == 0.0 {
        return Err(invalid("theta = 0 gives beta = 1; gamma is undefined"));
    }
    if !(theta > 0.0 && theta <= FRAC_PI_2) {
        return Err(invalid(format!("half-aperture must lie in (0, pi/2], got {theta}")));
    }
    Ok(())
}

/// `((1+a)/(1-a))^N`, the Poisson-kernel Harnack constant for harmonic functions.
pub fn harnack_constant_harmonic(a: f64, n: u32) -> Result<f64> {
    check_a(a)?;
    if n == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    Ok(((1.0 + a) / (1.0 - a)).powi(n as i32))
}

/// `base^(sqrt(N) + sqrt(r c_sup))` for an equation with zero-order
/// coefficient bounded by `c_sup`. The base is not known in closed form and
/// must be supplied.
pub fn harnack_constant_general(a: f64, n: u32, r: f64, c_sup: f64, base: f64) -> Result<f64> {
    check_a(a)?;
    if n == 0 || !(base >= 1.0) || !(r >= 0.0) || !(c_sup >= 0.0) {
        return Err(invalid("need N >= 1, base >= 1, r >= 0, c_sup >= 0"));
    }
    Ok(base.powf((n as f64).sqrt() + (r * c_sup).sqrt()))
}

/// `beta = (1 + a sin theta) / (1 - a sin theta)`.
pub fn beta(a: f64, theta: f64) -> Result<f64> {
    check_a(a)?;
    check_theta(theta)?;
    let s = a * theta.sin();
    Ok((1.0 + s) / (1.0 - s))
}

/// `(gamma, beta)` with `gamma = log_beta(H_a)`.
pub fn gamma_beta(a: f64, theta: f64, h_a: f64) -> Result<(f64, f64)> {
    let b = beta(a, theta)?;
    if !(h_a >= 1.0) {
        return Err(invalid(format!("Harnack constant must be >= 1, got {h_a}")));
    }
    Ok((h_a.ln() / b.ln(), b))
}

/// Exponent for harmonic `w`: `N log((1+a)/(1-a)) / log(beta)`; never below `N`.
pub fn gamma_torsion(a: f64, theta: f64, n: u32) -> Result<f64> {
    let b = beta(a, theta)?;
    let g = n as f64 * ((1.0 + a) / (1.0 - a)).ln() / b.ln();
    if g < n as f64 * (1.0 - 4.0 * f64::EPSILON) {
        return Err(invalid(format!("gamma {g} fell below N = {n}")));
    }
    Ok(g)
}

/// `K = H_a [ |xi - z| (1 - a sin theta) / (1 - a) ]^gamma`.
pub fn k_constant(a: f64, theta: f64, dist_xi_z: f64, h_a: f64) -> Result<f64> {
    if !(dist_xi_z > 0.0) {
        return Err(invalid("|xi - z| must be positive"));
    }
    let (g, _) = gamma_beta(a, theta, h_a)?;
    let s = a * theta.sin();
    Ok(h_a * (dist_xi_z * (1.0 - s) / (1.0 - a)).powf(g))
}

/// `1 + log( (|xi-z|/r0) (1 - a sin theta)/(1 - a) ) / log(beta)`.
///
/// The Harnack constant cancels between numerator and denominator; it is
/// validated but otherwise unused, so `H_a = 1` is accepted.
pub fn chain_length_bound(a: f64, theta: f64, r0: f64, dist_xi_z: f64, h_a: f64) -> Result<f64> {
    if !(r0 > 0.0 && dist_xi_z > 0.0) {
        return Err(invalid("r0 and |xi - z| must be positive"));
    }
    let (_, b) = gamma_beta(a, theta, h_a)?;
    let s = a * theta.sin();
    Ok(1.0 + (dist_xi_z / r0 * (1.0 - s) / (1.0 - a)).ln() / b.ln())
}

/// Right spherical cone with vertex `z`, unit axis, half-aperture and height.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConeSpec<const D: usize> {
    pub vertex: SVector<f64, D>,
    pub axis: SVector<f64, D>,
    pub half_aperture: f64,
    pub height: f64,
}

impl<const D: usize> ConeSpec<D> {
    pub fn new(vertex: SVector<f64, D>, axis: SVector<f64, D>, half_aperture: f64, height: f64) -> Result<Self> {
        check_theta(half_aperture)?;
        if !(height > 0.0) {
            return Err(invalid("cone height must be positive"));
        }
        let norm = axis.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NonUnitDirection { norm });
        }
        Ok(ConeSpec { vertex, axis, half_aperture, height })
    }

    /// Distance from `p` to the lateral surface of the infinite cone, positive
    /// inside. For `theta = pi/2` the surface is the plane through the vertex.
    pub fn lateral_distance(&self, p: &SVector<f64, D>) -> f64 {
        let v = p - self.vertex;
        let h = v.dot(&self.axis);
        let rho = (v - h * self.axis).norm();
        let (s, c) = self.half_aperture.sin_cos();
        let inside = rho < h * self.half_aperture.tan() || (self.half_aperture == FRAC_PI_2 && h > 0.0);
        let d = if h * c + rho * s >= 0.0 { (h * s - rho * c).abs() } else { h.hypot(rho) };
        if inside {
            d
        } else {
            -d
        }
    }

    /// Distance of `p` from the axis line.
    pub fn axis_offset(&self, p: &SVector<f64, D>) -> f64 {
        let v = p - self.vertex;
        (v - v.dot(&self.axis) * self.axis).norm()
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChainBall<const D: usize> {
    pub center: SVector<f64, D>,
    pub radius: f64,
}

/// Ball chain from `x` to `xi` along the cone axis.
#[derive(Clone, Debug, Serialize)]
pub struct HarnackChain<const D: usize> {
    pub a: f64,
    pub h_a: f64,
    pub theta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub k: f64,
    pub balls: Vec<ChainBall<D>>,
    pub n: usize,
    pub bound: f64,
}

impl<const D: usize> HarnackChain<D> {
    /// Ball `i >= 1` as printed in closed form:
    /// `r_i = r0 (1-a) sin(theta)/(1 - a sin theta) beta^i`,
    /// `p_i = z + r0 (1-a)/(1 - a sin theta) beta^i axis`.
    /// It agrees with the constructed chain only for `theta = pi/2`.
    pub fn closed_form_ball(&self, cone: &ConeSpec<D>, r0: f64, i: usize) -> ChainBall<D> {
        let s = self.a * self.theta.sin();
        let dist = r0 * (1.0 - self.a) / (1.0 - s) * self.beta.powi(i as i32);
        ChainBall { center: cone.vertex + dist * cone.axis, radius: dist * self.theta.sin() }
    }
}

/// Builds the chain from the construction clauses:
/// centers on the axis; `p_0 = x`, `r_0 = |x - z|`; balls `i >= 1` tangent to
/// the lateral surface (`r_i = |p_i - z| sin theta`); consecutive shrunk balls
/// `B_{a r_i}(p_i)` touching at `p_i + a r_i axis`. This gives
/// `|p_1 - z| = r_0 (1+a)/(1 - a sin theta)` and `|p_{i+1} - z| = beta |p_i - z|`.
/// `n` is the smallest index with `|xi - p_n| < r_n`.
pub fn build_chain<const D: usize>(
    cone: &ConeSpec<D>,
    x: &SVector<f64, D>,
    xi: &SVector<f64, D>,
    a: f64,
    h_a: f64,
) -> Result<HarnackChain<D>> {
    let (gamma, b) = gamma_beta(a, cone.half_aperture, h_a)?;
    let scale = (xi - cone.vertex).norm().max(f64::MIN_POSITIVE);
    for (name, p) in [("x", x), ("xi", xi)] {
        let off = cone.axis_offset(p);
        let along = (p - cone.vertex).dot(&cone.axis);
        if off > 1e-9 * scale || along <= 0.0 {
            return Err(invalid(format!("{name} is not on the cone axis beyond the vertex")));
        }
    }
    let r0 = (x - cone.vertex).norm();
    let dist_xi = (xi - cone.vertex).norm();
    if !(r0 < dist_xi) {
        return Err(invalid("need |x - z| < |xi - z|"));
    }
    if dist_xi > cone.height * (1.0 + 1e-12) {
        return Err(invalid("xi lies beyond the cone height"));
    }
    let sin = cone.half_aperture.sin();
    let s = a * sin;
    let mut balls = vec![ChainBall { center: *x, radius: r0 }];
    let mut dist = r0 * (1.0 + a) / (1.0 - s);
    while (xi - balls.last().unwrap().center).norm() >= balls.last().unwrap().radius {
        balls.push(ChainBall { center: cone.vertex + dist * cone.axis, radius: dist * sin });
        dist *= b;
        if balls.len() > 100_000 {
            return Err(invalid("chain does not reach xi"));
        }
    }
    let n = balls.len() - 1;
    Ok(HarnackChain {
        a,
        h_a,
        theta: cone.half_aperture,
        beta: b,
        gamma,
        k: k_constant(a, cone.half_aperture, dist_xi, h_a)?,
        balls,
        n,
        bound: chain_length_bound(a, cone.half_aperture, r0, dist_xi, h_a)?,
    })
}

/// Slack in the two-sided estimate `(r0^g/K) w(x) <= w(xi) <= (K/r0^g) w(x)`:
/// `lower = w(xi) / ((r0^g/K) w(x))` and `upper = ((K/r0^g) w(x)) / w(xi)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Margins {
    pub lower: f64,
    pub upper: f64,
}

/// Evaluates both Harnack-chain inequalities for a positive solution `w`.
/// `w` is checked for positivity at `x`, `xi` and every chain center.
pub fn verify_two_sided<const D: usize, F>(
    w: F,
    cone: &ConeSpec<D>,
    x: &SVector<f64, D>,
    xi: &SVector<f64, D>,
    a: f64,
    h_a: f64,
) -> Result<Margins>
where
    F: Fn(&SVector<f64, D>) -> f64,
{
    let chain = build_chain(cone, x, xi, a, h_a)?;
    for p in chain.balls.iter().map(|b| &b.center).chain([x, xi]) {
        let v = w(p);
        if !(v > 0.0) {
            return Err(Error::NotPositive { value: v });
        }
    }
    let r0g = (x - cone.vertex).norm().powf(chain.gamma);
    let (wx, wxi) = (w(x), w(xi));
    Ok(Margins { lower: wxi / (r0g / chain.k * wx), upper: chain.k / r0g * wx / wxi })
}

/// `sup / inf` of `w` over an `m x m` grid of the closed disk `B_{a r}(center)`.
pub fn harnack_ratio_on_ball<F: Fn(&Point) -> f64>(w: F, center: &Point, r: f64, a: f64, m: usize) -> Result<f64> {
    check_a(a)?;
    if m < 2 || !(r > 0.0) {
        return Err(invalid("need m >= 2 and r > 0"));
    }
    let rad = a * r;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..m {
        for j in 0..m {
            let off = Point::new(
                -rad + 2.0 * rad * i as f64 / (m - 1) as f64,
                -rad + 2.0 * rad * j as f64 / (m - 1) as f64,
            );
            if off.norm() > rad * (1.0 + 1e-12) {
                continue;
            }
            let v = w(&(center + off));
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !(lo > 0.0) {
        return Err(Error::NotPositive { value: lo });
    }
    Ok(hi / lo)
}

/// Closed-form harmonic functions used as positivity oracles.
#[derive(Clone, Debug, Serialize)]
pub enum Harmonic<const D: usize> {
    Constant(f64),
    /// `normal·p + offset`.
    Linear { normal: SVector<f64, D>, offset: f64 },
    /// `log(scale / |p - pole|)` in the plane, `|p - pole|^(2-D)` otherwise.
    Potential { pole: SVector<f64, D>, scale: f64 },
}

impl<const D: usize> Harmonic<D> {
    pub fn eval(&self, p: &SVector<f64, D>) -> f64 {
        match self {
            Harmonic::Constant(c) => *c,
            Harmonic::Linear { normal, offset } => normal.dot(p) + offset,
            Harmonic::Potential { pole, scale } => {
                let r = (p - pole).norm();
                if D == 2 {
                    (scale / r).ln()
                } else {
                    r.powi(2 - D as i32)
                }
            }
        }
    }
}

/// Nonnegative combination of closed-form harmonic functions.
#[derive(Clone, Debug, Serialize)]
pub struct HarmonicCombination<const D: usize> {
    pub terms: Vec<(f64, Harmonic<D>)>,
}

impl<const D: usize> HarmonicCombination<D> {
    pub fn eval(&self, p: &SVector<f64, D>) -> f64 {
        self.terms.iter().map(|(w, h)| w * h.eval(p)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Vector2, Vector3};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn harnack_constants() {
        assert!(rel(harnack_constant_harmonic(0.5, 2).unwrap(), 9.0) < 1e-15);
        assert!(rel(harnack_constant_harmonic(0.5, 3).unwrap(), 27.0) < 1e-15);
        assert!((harnack_constant_harmonic(1e-12, 2).unwrap() - 1.0).abs() < 1e-11);
        assert!(rel(harnack_constant_general(0.5, 2, 1.0, 0.0, 7.0).unwrap(), 7f64.powf(2f64.sqrt())) < 1e-15);
        // 9^(sqrt 2 + 1)
        assert!(rel(harnack_constant_general(0.5, 2, 1.0, 1.0, 9.0).unwrap(), 201.254_318_445_873_45) < 1e-12);
        assert_eq!(harnack_constant_general(0.5, 5, 3.0, 2.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn gamma_and_beta() {
        let (g, b) = gamma_beta(0.5, FRAC_PI_2, 9.0).unwrap();
        assert!(rel(b, 3.0) < 1e-15 && rel(g, 2.0) < 1e-15);
        let (g, b) = gamma_beta(0.5, FRAC_PI_6, 9.0).unwrap();
        assert!(rel(b, 5.0 / 3.0) < 1e-15);
        assert!(rel(g, 4.301_320_206_174_247) < 1e-12);
        assert_eq!(gamma_beta(0.5, FRAC_PI_6, 1.0).unwrap().0, 0.0);
        assert!(gamma_beta(0.5, 0.0, 9.0).is_err());
        assert_eq!(gamma_torsion(0.3, FRAC_PI_2, 2).unwrap(), 2.0);
        assert_eq!(gamma_torsion(0.5, FRAC_PI_2, 3).unwrap(), 3.0);
        assert!(rel(gamma_torsion(0.5, FRAC_PI_6, 2).unwrap(), 4.301_320_206_174_247) < 1e-12);
    }

    #[test]
    fn k_and_bound() {
        assert!(rel(k_constant(0.5, FRAC_PI_2, 1.0, 9.0).unwrap(), 9.0) < 1e-15);
        assert!(rel(k_constant(0.5, FRAC_PI_2, 2.0, 9.0).unwrap(), 36.0) < 1e-14);
        assert!(rel(k_constant(0.5, FRAC_PI_6, 1.0, 9.0).unwrap(), 51.483_421_320_691_04) < 1e-12);
        assert!(rel(chain_length_bound(0.5, FRAC_PI_2, 0.01, 1.0, 9.0).unwrap(), 5.191_806_548_578_77) < 1e-12);
        let s = 0.5 * FRAC_PI_4.sin();
        // the logarithm vanishes when r0 = |xi - z| (1 - a sin theta) / (1 - a)
        let r0 = 1.0 * (1.0 - s) / 0.5;
        assert!((chain_length_bound(0.5, FRAC_PI_4, r0, 1.0, 9.0).unwrap() - 1.0).abs() < 1e-14);
        let b1 = chain_length_bound(0.5, FRAC_PI_4, 0.02, 1.0, 9.0).unwrap();
        let b2 = chain_length_bound(0.5, FRAC_PI_4, 0.01, 1.0, 9.0).unwrap();
        let (_, beta) = gamma_beta(0.5, FRAC_PI_4, 9.0).unwrap();
        assert!(((b2 - b1) - 2f64.ln() / beta.ln()).abs() < 1e-13);
    }

    #[test]
    fn right_angle_chain() {
        let cone = ConeSpec::new(Vector2::zeros(), Vector2::new(0.0, 1.0), FRAC_PI_2, 2.0).unwrap();
        let chain = build_chain(&cone, &Vector2::new(0.0, 0.1), &Vector2::new(0.0, 1.0), 0.5, 9.0).unwrap();
        assert_eq!(chain.n, 2);
        for (i, b) in chain.balls.iter().enumerate() {
            let e = 0.1 * 3f64.powi(i as i32);
            assert!((b.radius - e).abs() < 1e-15 && (b.center.y - e).abs() < 1e-15);
            if i >= 1 {
                let cf = chain.closed_form_ball(&cone, 0.1, i);
                assert!((cf.radius - b.radius).abs() < 1e-15);
            }
        }
        let one = build_chain(&cone, &Vector2::new(0.0, 0.1), &Vector2::new(0.0, 0.35), 0.5, 9.0).unwrap();
        assert_eq!(one.n, 1);
    }

    #[test]
    fn chain_in_three_dimensions_is_tangent() {
        let axis = Vector3::new(1.0, 2.0, 2.0) / 3.0;
        let z = Vector3::new(0.5, -1.0, 0.25);
        let cone = ConeSpec::new(z, axis, FRAC_PI_4, 10.0).unwrap();
        let chain = build_chain(&cone, &(z + 0.01 * axis), &(z + 5.0 * axis), 0.5, 27.0).unwrap();
        for b in &chain.balls[1..] {
            assert!((cone.lateral_distance(&b.center) - b.radius).abs() <= 1e-12 * 5.0);
        }
        assert!(chain.n >= 1 && (chain.n as f64) <= chain.bound);
    }

    #[test]
    fn misordered_points_are_rejected() {
        let cone = ConeSpec::new(Vector2::zeros(), Vector2::new(0.0, 1.0), FRAC_PI_4, 2.0).unwrap();
        assert!(build_chain(&cone, &Vector2::new(0.0, 1.0), &Vector2::new(0.0, 0.5), 0.5, 9.0).is_err());
        assert!(build_chain(&cone, &Vector2::new(0.1, 0.2), &Vector2::new(0.0, 1.0), 0.5, 9.0).is_err());
    }

    #[test]
    fn ball_ratios() {
        let ratio = harnack_ratio_on_ball(|p| p.y + 2.0, &Point::zeros(), 1.0, 0.5, 41).unwrap();
        assert!((ratio - 5.0 / 3.0).abs() < 1e-14);
        assert_eq!(harnack_ratio_on_ball(|_| 3.0, &Point::zeros(), 1.0, 0.5, 9).unwrap(), 1.0);
    }

    #[test]
    fn half_plane_margins() {
        let cone = ConeSpec::new(Vector2::zeros(), Vector2::new(0.0, 1.0), FRAC_PI_2, 2.0).unwrap();
        let m = verify_two_sided(|p: &Vector2<f64>| p.y, &cone, &Vector2::new(0.0, 0.05), &Vector2::new(0.0, 1.0), 0.5, 9.0)
            .unwrap();
        assert!(m.lower >= 1.0 && m.upper >= 1.0);
        let m = verify_two_sided(|_: &Vector2<f64>| 1.0, &cone, &Vector2::new(0.0, 0.05), &Vector2::new(0.0, 1.0), 0.5, 9.0)
            .unwrap();
        assert!(m.lower >= 1.0 && m.upper >= 1.0);
        let neg = verify_two_sided(|p: &Vector2<f64>| p.y - 0.5, &cone, &Vector2::new(0.0, 0.05), &Vector2::new(0.0, 1.0), 0.5, 9.0);
        assert!(matches!(neg, Err(Error::NotPositive { .. })));
    }
}
