use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

use nalgebra::{SVector, Vector2};
use proptest::prelude::*;
use serrin_core::harnack::{
    build_chain, gamma_beta, harnack_constant_harmonic, harnack_ratio_on_ball, verify_two_sided, ConeSpec, Harmonic,
    HarmonicCombination,
};
use serrin_core::Point;

fn unit<const D: usize>(v: SVector<f64, D>) -> SVector<f64, D> {
    if v.norm() < 1e-3 {
        let mut e = SVector::zeros();
        e[0] = 1.0;
        e
    } else {
        v.normalize()
    }
}

/// Every construction clause, checked as geometry rather than through the
/// recurrence used to build the chain.
fn check_clauses<const D: usize>(theta: f64, a: f64, r0: f64, dist: f64, z: SVector<f64, D>, axis: SVector<f64, D>) {
    let h_a = harnack_constant_harmonic(a, D as u32).unwrap();
    let cone = ConeSpec::new(z, axis, theta, dist).unwrap();
    let (x, xi) = (z + r0 * axis, z + dist * axis);
    let chain = build_chain(&cone, &x, &xi, a, h_a).unwrap();
    let scale = dist;
    let tol = 1e-12 * scale;

    // centers on the axis, ball 0 centered at x with radius |x - z|
    assert_eq!(chain.balls[0].center, x);
    assert!((chain.balls[0].radius - r0).abs() <= tol);
    for b in &chain.balls {
        assert!(cone.axis_offset(&b.center) <= tol);
    }
    for (i, b) in chain.balls.iter().enumerate().skip(1) {
        // inside the cone and tangent to its lateral surface
        let lat = cone.lateral_distance(&b.center);
        assert!((lat - b.radius).abs() <= tol.max(1e-12 * b.radius), "ball {i}: {lat} vs {}", b.radius);
    }
    for w in chain.balls.windows(2) {
        // shrunk balls touch at exactly one point on the axis
        let (p, q) = (&w[0], &w[1]);
        let gap = (q.center - p.center).norm() - a * (p.radius + q.radius);
        assert!(gap.abs() <= 1e-12 * q.center.norm().max(scale), "gap {gap}");
        let touch = p.center + a * p.radius * axis;
        assert!((touch - (q.center - a * q.radius * axis)).norm() <= 1e-12 * scale.max(q.radius));
    }
    // n is minimal and within the bound
    let last = chain.balls.last().unwrap();
    assert!((xi - last.center).norm() < last.radius);
    for b in &chain.balls[..chain.n] {
        assert!((xi - b.center).norm() >= b.radius);
    }
    // n = 0 (xi already in ball 0) is outside the bound's derivation
    if chain.n >= 1 {
        assert!(chain.n as f64 <= chain.bound * (1.0 + 1e-12), "n {} bound {}", chain.n, chain.bound);
    }
}

fn tuple() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    // r0 from 1e-4 to 0.9 of |xi - z|; above one half xi already lies in ball 0
    (0.05..FRAC_PI_2, 0.05..0.95f64, -4.0..0.0f64, 0.01..100.0f64)
        .prop_map(|(theta, a, lr, dist)| (theta, a, dist * 10f64.powf(lr).min(0.9), dist))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn chain_clauses_in_the_plane(
        (theta, a, r0, dist) in tuple(),
        z in prop::array::uniform2(-10.0..10.0f64),
        ax in prop::array::uniform2(-1.0..1.0f64),
    ) {
        check_clauses(theta, a, r0, dist, Vector2::from(z), unit(Vector2::from(ax)));
    }

    #[test]
    fn chain_clauses_in_space(
        (theta, a, r0, dist) in tuple(),
        z in prop::array::uniform3(-10.0..10.0f64),
        ax in prop::array::uniform3(-1.0..1.0f64),
    ) {
        check_clauses(theta, a, r0, dist, SVector::<f64, 3>::from(z), unit(SVector::<f64, 3>::from(ax)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chain_scales_with_the_cone((theta, a, r0, dist) in tuple(), k in -20i32..20) {
        // powers of two scale every length without rounding
        let s = 2f64.powi(k);
        let axis = Vector2::new(0.6, 0.8);
        let z = Vector2::new(0.25, -0.5);
        let build = |s: f64| {
            let cone = ConeSpec::new(s * z, axis, theta, s * dist).unwrap();
            build_chain(&cone, &(s * (z + r0 * axis)), &(s * (z + dist * axis)), a, 9.0).unwrap()
        };
        let (c1, cs) = (build(1.0), build(s));
        prop_assert_eq!(c1.n, cs.n);
        prop_assert_eq!(c1.beta, cs.beta);
        prop_assert_eq!(c1.gamma, cs.gamma);
        for (b1, bs) in c1.balls.iter().zip(&cs.balls) {
            prop_assert_eq!(s * b1.radius, bs.radius);
            prop_assert_eq!(s * (b1.center - z).norm(), (bs.center - s * z).norm());
        }
    }

    #[test]
    fn chain_scaling_is_covariant_for_any_factor((theta, a, r0, dist) in tuple(), s in 1e-3..1e3f64) {
        let axis = Vector2::new(0.0, 1.0);
        let build = |s: f64| {
            let cone = ConeSpec::new(Vector2::zeros(), axis, theta, s * dist).unwrap();
            build_chain(&cone, &(s * r0 * axis), &(s * dist * axis), a, 9.0).unwrap()
        };
        let (c1, cs) = (build(1.0), build(s));
        prop_assert!((c1.gamma - cs.gamma).abs() <= 1e-15 * c1.gamma);
        for (b1, bs) in c1.balls.iter().zip(&cs.balls) {
            prop_assert!((s * b1.radius - bs.radius).abs() <= 1e-12 * bs.radius);
        }
        // n may only differ when xi sits on a ball boundary to round-off
        if c1.n != cs.n {
            let b = &c1.balls[c1.n.min(cs.n)];
            prop_assert!(((dist * axis - b.center).norm() - b.radius).abs() <= 1e-12 * dist);
        }
    }

    /// Positive harmonic functions on B_r have sup/inf at most 9 on B_{r/2}.
    #[test]
    fn ball_ratio_of_positive_harmonics(
        c in prop::array::uniform2(-5.0..5.0f64),
        r in 0.1..3.0f64,
        terms in prop::collection::vec((0.0..1.0f64, 0usize..3, 0.0..std::f64::consts::TAU, 1.0..5.0f64, 0.0..2.0f64), 1..5),
    ) {
        let center = Point::from(c);
        let w = HarmonicCombination::<2> {
            terms: terms
                .iter()
                .map(|&(wt, kind, ang, far, slack)| {
                    let dir = Vector2::new(ang.cos(), ang.sin());
                    let h = match kind {
                        0 => Harmonic::Constant(1.0 + slack),
                        // nonnegative on B_r, vanishing on its boundary when slack = 0
                        1 => Harmonic::Linear { normal: dir, offset: r * (1.0 + slack) - dir.dot(&center) },
                        // pole outside the disk, positive inside it
                        _ => Harmonic::Potential { pole: center + far * r * dir, scale: (far + 1.0) * r * (1.0 + slack) },
                    };
                    (wt + 1e-3, h)
                })
                .collect(),
        };
        let ratio = harnack_ratio_on_ball(|p| w.eval(p), &center, r, 0.5, 41).unwrap();
        prop_assert!(ratio <= 9.0 + 1e-9, "ratio {ratio}");
    }

    #[test]
    fn two_sided_margins_for_positive_harmonics(
        t in 0usize..4,
        r0 in 0.005..0.5f64,
        kind in 0usize..3,
        c in 0.05..3.0f64,
    ) {
        let theta = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3, FRAC_PI_2][t];
        let axis = Vector2::new(0.0, 1.0);
        let cone = ConeSpec::new(Vector2::zeros(), axis, theta, 1.0).unwrap();
        let w = match kind {
            0 => Harmonic::Constant(c),
            1 => Harmonic::Linear { normal: axis, offset: c },
            // pole below the vertex; ball 0 reaches down to the vertex, never past it
            _ => Harmonic::Potential { pole: Vector2::new(0.0, -c), scale: 10.0 + c },
        };
        let m = verify_two_sided(|p| w.eval(p), &cone, &(r0 * axis), &axis, 0.5, 9.0).unwrap();
        prop_assert!(m.lower >= 1.0 && m.upper >= 1.0, "{m:?}");
    }
}

#[test]
fn gamma_decreases_with_the_aperture() {
    for &a in &[0.1, 0.25, 0.5, 0.75, 0.9] {
        for &h_a in &[1.5, 9.0, 27.0, 1e3] {
            let gammas: Vec<f64> =
                (1..=200).map(|i| gamma_beta(a, FRAC_PI_2 * i as f64 / 200.0, h_a).unwrap().0).collect();
            assert!(gammas.windows(2).all(|w| w[1] < w[0]), "a={a} H={h_a}");
        }
    }
}
