use std::sync::Arc;

use serrin_core::geometry::{DomainSpec, Point};
use serrin_core::movingplanes::{critical_cap, direction, PlaneTolerances};
use serrin_core::pde::{
    discretize, eigen_demo, min_unu, seminorm_unu, solve_semilinear, BoundaryDerivative, Field, Nonlinearity,
    NonlinearitySpec, SolverOptions,
};

fn torsion(domain: &DomainSpec, h: f64) -> Field {
    let grid = Arc::new(discretize(domain, h).unwrap());
    solve_semilinear(&grid, &NonlinearitySpec::torsion(), &SolverOptions::default()).unwrap()
}

fn ellipse_exact(a: f64, b: f64, p: &Point) -> f64 {
    (1.0 - p.x * p.x / (a * a) - p.y * p.y / (b * b)) * a * a * b * b / (2.0 * (a * a + b * b))
}

fn max_error(field: &Field, exact: impl Fn(&Point) -> f64) -> f64 {
    (0..field.grid.len()).map(|k| (field.u[k] - exact(&field.grid.position(k))).abs()).fold(0.0, f64::max)
}

#[test]
fn disk_torsion_matches_closed_form() {
    let disk = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
    let field = torsion(&disk, 1.0 / 128.0);
    assert!((field.value_at(&Point::zeros()) - 0.25).abs() < 1e-3);
    assert!(max_error(&field, |p| (1.0 - p.norm_squared()) / 4.0) < 1e-3);
    assert!(field.u.iter().all(|&u| u >= 0.0));
    let unu = field.normal_derivative(256).unwrap();
    for s in &unu {
        assert!((s.u_nu - 0.5).abs() < 1e-2, "{} at {}", s.u_nu, s.angle);
        assert!(!s.first_order);
    }
    assert!(seminorm_unu(&unu).unwrap() <= 2e-2);
}

#[test]
fn ellipse_torsion_and_normal_derivative() {
    let (a, b) = (1.05, 1.0);
    let ell = DomainSpec::ellipse(Point::zeros(), a, b, 0.0).unwrap();
    let field = torsion(&ell, 1.0 / 128.0);
    assert!(max_error(&field, |p| ellipse_exact(a, b, p)) < 1e-3);
    let unu = field.normal_derivative(256).unwrap();
    // samples at angle 0 and pi/2 sit on (a, 0) and (0, b)
    let at = |phi: f64| unu.iter().find(|s| (s.angle - phi).abs() < 1e-12).unwrap().u_nu;
    assert!((at(0.0) - a * b * b / (a * a + b * b)).abs() < 1e-2);
    assert!((at(std::f64::consts::FRAC_PI_2) - a * a * b / (a * a + b * b)).abs() < 1e-2);

    // closed-form |grad u| on the same samples
    let k = a * a * b * b / (a * a + b * b);
    let exact: Vec<BoundaryDerivative> = unu
        .iter()
        .map(|s| {
            let g = Point::new(s.point.x / (a * a), s.point.y / (b * b)) * k;
            BoundaryDerivative { u_nu: g.norm(), ..*s }
        })
        .collect();
    let (num, ex) = (seminorm_unu(&unu).unwrap(), seminorm_unu(&exact).unwrap());
    assert!(ex > 0.0 && (num - ex).abs() < 0.1 * ex, "{num} vs {ex}");
}

#[test]
fn torsion_converges_at_second_order() {
    let (a, b) = (1.05, 1.0);
    let ell = DomainSpec::ellipse(Point::zeros(), a, b, 0.0).unwrap();
    let disk = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
    for (dom, a, b) in [(disk, 1.0, 1.0), (ell, a, b)] {
        let errs: Vec<f64> = [32.0, 64.0, 128.0]
            .iter()
            .map(|n| max_error(&torsion(&dom, 1.0 / n), |p| ellipse_exact(a, b, p)))
            .collect();
        let order = (errs[0] / errs[2]).log2() / 2.0;
        // the disk solution is quadratic, so the scheme is exact up to round-off
        assert!(errs[2] < 1e-12 || order >= 1.8, "{errs:?}");
    }
}

#[test]
fn sampled_nonlinearity_reaches_tolerance() {
    let disk = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
    let grid = Arc::new(discretize(&disk, 1.0 / 32.0).unwrap());
    let f = NonlinearitySpec::new(Nonlinearity::Sampled { knots: vec![(0.0, 1.0), (1.0, 3.0)] }).unwrap();
    let field = solve_semilinear(&grid, &f, &SolverOptions::default()).unwrap();
    assert!(field.report.residual <= 1e-10);
    assert!(field.report.iterations > 1);
    assert!(field.u.iter().all(|&u| u > 0.0));
    // larger forcing than torsion
    assert!(field.max_u() > 0.25);
}

#[test]
fn growth_constants_on_disks() {
    for r in [1.0, 2.0] {
        let disk = DomainSpec::disk(Point::zeros(), r).unwrap();
        let field = torsion(&disk, r / 64.0);
        let (lo, hi) = field.growth_constants(2.0 * field.grid.h).unwrap();
        assert!(lo >= r / 4.0 - 1e-9 && hi <= r / 2.0 + 1e-9, "{lo} {hi}");
        assert!(lo < r / 4.0 + 0.05 * r && hi > r / 2.0 - 0.05 * r);
    }
}

#[test]
fn reflected_difference_vanishes_on_symmetric_domains() {
    let disk = DomainSpec::disk(Point::new(0.3, -0.2), 1.0).unwrap();
    let field = torsion(&disk, 1.0 / 64.0);
    let tol_w = 10.0 * field.grid.h.powi(2) * field.max_u();
    for theta in [0.0, 0.7, 2.0] {
        let cap = critical_cap(&disk, &direction(theta), &PlaneTolerances::default()).unwrap();
        let w = field.reflect_difference(&cap).unwrap();
        assert!(w.min() >= -tol_w && w.max() <= tol_w, "{} {}", w.min(), w.max());
        let c = field.coefficient_c(&cap).unwrap();
        assert!(c.iter().all(|(_, c)| *c == 0.0));
    }
}

#[test]
fn reflected_difference_is_nonnegative_on_rotated_ellipse() {
    let ell = DomainSpec::ellipse(Point::new(0.1, 0.05), 1.2, 1.0, 0.5).unwrap();
    let field = torsion(&ell, 1.0 / 64.0);
    let tol_w = 10.0 * field.grid.h.powi(2) * field.max_u();
    for theta in [0.3, 1.9, 4.0] {
        let cap = critical_cap(&ell, &direction(theta), &PlaneTolerances::default()).unwrap();
        let w = field.reflect_difference(&cap).unwrap();
        assert!(w.min() >= -tol_w, "{}", w.min());
    }
}

#[test]
fn coefficient_of_linear_nonlinearity_is_lambda() {
    let ell = DomainSpec::ellipse(Point::zeros(), 1.2, 1.0, 0.0).unwrap();
    let grid = Arc::new(discretize(&ell, 1.0 / 32.0).unwrap());
    let field = eigen_demo(&grid, 1).unwrap();
    let lambda = field.nonlinearity.lipschitz_l;
    let cap = critical_cap(&ell, &direction(0.4), &PlaneTolerances::default()).unwrap();
    let c = field.coefficient_c(&cap).unwrap();
    assert!(c.iter().filter(|(_, c)| *c != 0.0).all(|(_, c)| (c - lambda).abs() < 1e-9 * lambda));
    assert!(c.iter().any(|(_, c)| *c != 0.0));
}

#[test]
fn disk_eigenvalue_and_scaling() {
    let disk = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
    let grid = Arc::new(discretize(&disk, 1.0 / 128.0).unwrap());
    let one = eigen_demo(&grid, 1).unwrap();
    let lambda = one.report.lambda1_h.unwrap();
    // first zero of J0, squared
    assert!((lambda - 2.404825557695773f64.powi(2)).abs() < 1e-2, "{lambda}");
    let two = eigen_demo(&grid, 2).unwrap();
    let (u1, u2) = (one.normal_derivative(64).unwrap(), two.normal_derivative(64).unwrap());
    for (a, b) in u1.iter().zip(&u2) {
        assert!((a.u_nu - 2.0 * b.u_nu).abs() <= 1e-12 * a.u_nu.abs().max(1.0));
    }
    assert!(min_unu(&u2) > 0.0);
    let (lo, _) = two.growth_constants(2.0 * grid.h).unwrap();
    assert!(lo > 0.0);
}

#[test]
fn ellipse_eigenvalue_is_bracketed_by_disks() {
    let j = 2.404825557695773f64.powi(2);
    let ell = DomainSpec::ellipse(Point::zeros(), 1.05, 1.0, 0.0).unwrap();
    let grid = Arc::new(discretize(&ell, 1.0 / 64.0).unwrap());
    let lambda = eigen_demo(&grid, 1).unwrap().report.lambda1_h.unwrap();
    assert!(lambda > j / 1.05f64.powi(2) && lambda < j, "{lambda}");
}

#[test]
fn seminorm_of_a_single_outlier() {
    let disk = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
    let field = torsion(&disk, 1.0 / 16.0);
    let mut s = field.normal_derivative(8).unwrap();
    for x in &mut s {
        x.u_nu = 1.0;
    }
    s[0].u_nu = 1.25;
    // the nearest neighbours of sample 0 are at chord 2 sin(pi/8)
    let d = 2.0 * (std::f64::consts::PI / 8.0).sin();
    assert!((seminorm_unu(&s).unwrap() - 0.25 / d).abs() < 1e-12);
    assert!(seminorm_unu(&s[..1]).is_err());
}

#[test]
fn field_dump_roundtrip() {
    let disk = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
    let field = torsion(&disk, 1.0 / 16.0);
    let mut buf = Vec::new();
    serrin_core::pde::io::write_field(&field, &mut buf).unwrap();
    let dump = serrin_core::pde::io::read_field(buf.as_slice()).unwrap();
    assert_eq!(dump.nodes.len(), field.grid.len());
    assert_eq!(dump.h, field.grid.h);
    assert!(dump.nodes.iter().zip(&field.u).all(|(n, u)| n.2 == *u));
    assert!(serrin_core::pde::io::read_field(&b"XXXX"[..]).is_err());
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn convex_domain() -> impl Strategy<Value = DomainSpec> {
        let c = prop::array::uniform2(-1.0..1.0f64).prop_map(Point::from);
        prop_oneof![
            (c.clone(), 1.0..1.5f64, 0.7..1.0f64, 0.0..3.2f64)
                .prop_map(|(c, a, b, r)| DomainSpec::ellipse(c, a, b, r).unwrap()),
            (c, prop::array::uniform4(-0.03..0.03f64)).prop_map(|(c, m)| {
                DomainSpec::new(c, 1.0, vec![0.0, m[0], m[1]], vec![0.0, m[2], m[3]], true).unwrap()
            }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]

        #[test]
        fn torsion_on_convex_domains(d in convex_domain(), t in prop::collection::vec(0.0..std::f64::consts::TAU, 4)) {
            let field = torsion(&d, 1.0 / 32.0);
            let grid = &field.grid;
            for s in &grid.stencils {
                prop_assert!(s.signed_distance > 0.0);
                prop_assert!(s.cut.iter().all(|c| *c > 0.0 && *c <= 1.0));
            }
            // discrete maximum principle
            prop_assert!(field.u.iter().all(|v| *v >= -field.tol_num()));
            prop_assert!(field.max_u() > 0.0);
            let unu = field.normal_derivative(128).unwrap();
            prop_assert!(min_unu(&unu) > 0.0);
            // w is nonnegative on every maximal cap, up to discretization
            let tol_w = 10.0 * grid.h.powi(2) * field.max_u();
            for theta in t {
                let cap = critical_cap(&d, &direction(theta), &PlaneTolerances::default()).unwrap();
                let w = field.reflect_difference(&cap).unwrap();
                prop_assert!(w.min() >= -tol_w, "theta {theta}: {}", w.min());
            }
        }
    }
}
