use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use serrin_core::geometry::{self, signed_distance};
use serrin_core::movingplanes::{
    critical_cap, critical_lambda, ctheta_check, direction, extent, reflected_cap_inside, tangent_halfball,
    theta_lower_bound, PlaneTolerances,
};
use serrin_core::{DomainSpec, Point};

const TOL: f64 = 1e-6;

/// Ellipses and mildly perturbed disks, all convex.
fn convex_domain() -> impl Strategy<Value = DomainSpec> {
    let c = prop::array::uniform2(-2.0..2.0f64).prop_map(Point::from);
    prop_oneof![
        (c.clone(), 1.0..1.6f64, 0.6..1.0f64, 0.0..PI)
            .prop_map(|(c, a, b, r)| DomainSpec::ellipse(c, a, b, r).unwrap()),
        (c, prop::array::uniform4(-0.03..0.03f64)).prop_map(|(c, m)| {
            DomainSpec::new(c, 1.0, vec![0.0, m[0], m[1]], vec![0.0, m[2], m[3]], true).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn critical_position_is_rotation_equivariant(d in convex_domain(), t in 0.0..TAU, rot in 0.0..TAU) {
        let w = direction(t);
        let lam = critical_lambda(&d, &w, TOL).unwrap();
        let turned = d.rotated(rot, Point::zeros()).unwrap();
        let lam_r = critical_lambda(&turned, &direction(t + rot), TOL).unwrap();
        prop_assert!((lam - lam_r).abs() <= 2.0 * TOL, "{lam} vs {lam_r}");
    }

    #[test]
    fn symmetric_ellipse_stops_on_its_axis(
        c in prop::array::uniform2(-2.0..2.0f64),
        a in 1.05..1.6f64,
        rot in 0.0..PI,
        flip in any::<bool>(),
        minor in any::<bool>(),
    ) {
        let c = Point::from(c);
        let d = DomainSpec::ellipse(c, a, 1.0, rot).unwrap();
        let t = rot + if minor { PI / 2.0 } else { 0.0 } + if flip { PI } else { 0.0 };
        let w = direction(t);
        let lam = critical_lambda(&d, &w, TOL).unwrap();
        prop_assert!((lam - c.dot(&w)).abs() <= 2.0 * TOL, "{lam} vs {}", c.dot(&w));
        // the reflected cap lands on the other half of the boundary
        let tol_geo = 1e-6 * geometry::diameter(&d);
        for bp in d.boundary_sample(256).unwrap() {
            if bp.position.dot(&w) > lam {
                let q = bp.position - 2.0 * (bp.position.dot(&w) - lam) * w;
                prop_assert!(signed_distance(&d, &q).abs() <= tol_geo + 2.0 * TOL);
            }
        }
    }

    #[test]
    fn caps_stay_inside_above_the_critical_position(d in convex_domain(), t in 0.0..TAU, s in prop::collection::vec(0.0..1.0f64, 8)) {
        let w = direction(t);
        let cap = critical_cap(&d, &w, &PlaneTolerances::default()).unwrap();
        let top = extent(&d, &w).unwrap();
        for f in s {
            let mu = cap.lambda + f * (top - cap.lambda);
            prop_assert!(reflected_cap_inside(&d, &w, mu).unwrap(), "mu {mu} in ({}, {top})", cap.lambda);
        }
        // the interior half-ball at the touching point lies in the cap
        let ball = tangent_halfball(&d, &cap).unwrap();
        prop_assert!(ball.radius > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn convex_domains_are_certified_in_sixteen_directions(d in convex_domain()) {
        let s = geometry::summary(&d).unwrap();
        let t = 1.0 / 32.0;
        let bound = theta_lower_bound(s.d_omega, s.r_omega, t).unwrap();
        for k in 0..16 {
            let cap = critical_cap(&d, &direction(TAU * k as f64 / 16.0), &PlaneTolerances::default()).unwrap();
            let cert = ctheta_check(&d, &cap, t).unwrap();
            prop_assert!(cert.theta >= bound - 0.01, "direction {k}: {} < {bound}", cert.theta);
            prop_assert_eq!(cert.coverage, "sampled");
        }
    }
}
