use proptest::prelude::*;
use serrin_core::geometry::{
    diameter, inner_outer_radii, interior_sphere_radius, interior_sphere_radius_with, reflect, signed_distance,
};
use serrin_core::{DomainSpec, Point};

fn point(r: f64) -> impl Strategy<Value = Point> {
    prop::array::uniform2(-r..r).prop_map(Point::from)
}

fn unit() -> impl Strategy<Value = Point> {
    (0.0..std::f64::consts::TAU).prop_map(|t| Point::new(t.cos(), t.sin()))
}

/// Small perturbations of a disk; amplitudes keep the boundary convex.
fn smooth_domain() -> impl Strategy<Value = DomainSpec> {
    (point(3.0), 0.5..2.0f64, prop::array::uniform4(-0.02..0.02f64)).prop_map(|(c, c0, m)| {
        DomainSpec::new(c, c0, vec![0.0, m[0] * c0, m[1] * c0], vec![0.0, m[2] * c0, m[3] * c0], true).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reflection_is_an_isometric_involution(x in point(100.0), y in point(100.0), w in unit(), mu in -50.0..50.0f64) {
        let (rx, ry) = (reflect(&x, &w, mu).unwrap(), reflect(&y, &w, mu).unwrap());
        let scale = 1.0 + x.norm() + y.norm() + mu.abs();
        prop_assert!(((rx - ry).norm() - (x - y).norm()).abs() <= 1e-12 * scale);
        prop_assert!((reflect(&rx, &w, mu).unwrap() - x).norm() <= 1e-12 * scale);
        // the mirror line is fixed
        let on = x - (x.dot(&w) - mu) * w;
        prop_assert!((reflect(&on, &w, mu).unwrap() - on).norm() <= 1e-12 * scale);
    }

    #[test]
    fn reflection_rejects_non_unit_directions(x in point(1.0), s in 1.01..3.0f64) {
        prop_assert!(reflect(&x, &Point::new(s, 0.0), 0.0).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn diameter_ignores_translation_and_scales_linearly(d in smooth_domain(), shift in point(10.0), s in 0.2..5.0f64) {
        let base = diameter(&d);
        let moved = diameter(&d.translated(shift).unwrap());
        prop_assert!((moved - base).abs() <= 1e-12 * base * (1.0 + shift.norm()));
        let scaled = diameter(&d.scaled(s).unwrap());
        prop_assert!((scaled - s * base).abs() <= 1e-10 * s * base);
    }

    #[test]
    fn interior_radius_is_capped_by_curvature(d in smooth_domain()) {
        let r = interior_sphere_radius(&d).unwrap();
        prop_assert!(r > 0.0 && r <= d.guard().min_curvature_radius() * (1.0 + 1e-6));
        prop_assert!(r <= diameter(&d) / 2.0);
    }

    #[test]
    fn ellipse_interior_radius_is_the_smallest_curvature_radius(a in 1.0..2.0f64, b in 0.5..1.0f64, rot in 0.0..3.2f64) {
        let d = DomainSpec::ellipse(Point::new(0.3, -0.1), a, b, rot).unwrap();
        let r = interior_sphere_radius_with(&d, 2048).unwrap();
        prop_assert!((r - b * b / a).abs() <= 1e-4, "{r} vs {}", b * b / a);
    }

    #[test]
    fn disk_radii_about_the_center_are_equal(c in point(5.0), r in 0.1..10.0f64) {
        let d = DomainSpec::disk(c, r).unwrap();
        let (ri, re) = inner_outer_radii(&d, &c).unwrap();
        prop_assert!((ri - r).abs() <= 1e-9 && (re - r).abs() <= 1e-9);
    }

    #[test]
    fn signed_distance_in_a_disk_is_exact(c in point(5.0), r in 0.1..10.0f64, p in point(12.0)) {
        let d = DomainSpec::disk(c, r).unwrap();
        prop_assert!((signed_distance(&d, &p) - (r - (p - c).norm())).abs() <= 1e-9 * (1.0 + r));
    }

    #[test]
    fn boundary_samples_are_consistent(d in smooth_domain(), m in 16usize..256) {
        for bp in d.boundary_sample(m).unwrap() {
            prop_assert!((bp.inward_normal.norm() - 1.0).abs() <= 1e-12);
            let e = Point::new(bp.angle.cos(), bp.angle.sin());
            prop_assert!((bp.position - (d.center() + d.rho(bp.angle) * e)).norm() <= 1e-12 * (1.0 + d.center().norm()));
            prop_assert!(d.rho(bp.angle) > 0.0);
        }
    }
}
