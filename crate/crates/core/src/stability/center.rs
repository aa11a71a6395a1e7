use std::f64::consts::TAU;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{self, reflect, signed_distance, DomainSpec, Point};
use crate::movingplanes::CriticalCap;
use crate::numeric::golden_max;

/// Boundary samples scanned before refining a defect maximum.
const DEFECT_SAMPLES: usize = 512;

fn defect_scan(domain: &DomainSpec, omega: &Point, lambda: f64, cap_side_only: bool) -> Result<f64> {
    reflect(&Point::zeros(), omega, lambda)?;
    let dist = |phi: f64| {
        let x = domain.position(phi);
        if cap_side_only && x.dot(omega) <= lambda {
            return 0.0;
        }
        signed_distance(domain, &(x - 2.0 * (x.dot(omega) - lambda) * omega)).abs()
    };
    let step = TAU / DEFECT_SAMPLES as f64;
    let vals: Vec<f64> = (0..DEFECT_SAMPLES).map(|i| dist(step * i as f64)).collect();
    let mut best = vals.iter().cloned().fold(0.0, f64::max);
    // refine the three largest local maxima
    let mut peaks: Vec<usize> = (0..DEFECT_SAMPLES)
        .filter(|&i| {
            let (l, r) = (vals[(i + DEFECT_SAMPLES - 1) % DEFECT_SAMPLES], vals[(i + 1) % DEFECT_SAMPLES]);
            vals[i] > 0.0 && vals[i] >= l && vals[i] >= r
        })
        .collect();
    peaks.sort_by(|a, b| vals[*b].total_cmp(&vals[*a]));
    for &i in peaks.iter().take(3) {
        let c = step * i as f64;
        let (_, v) = golden_max(dist, c - step, c + step, 1e-10);
        best = best.max(v);
    }
    Ok(best)
}

/// `sup dist(x^λ, ∂Ω)` over boundary points `x` with `x·ω > λ`.
pub fn reflection_defect(domain: &DomainSpec, omega: &Point, lambda: f64) -> Result<f64> {
    defect_scan(domain, omega, lambda, true)
}

/// Same supremum over the whole boundary; this is the quantity the
/// point-reflection audit composes.
pub fn reflection_defect_two_sided(domain: &DomainSpec, omega: &Point, lambda: f64) -> Result<f64> {
    defect_scan(domain, omega, lambda, false)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CenterReport {
    pub center: Point,
    /// Two-sided reflection defect per direction.
    pub defects: Vec<f64>,
    /// Half the largest defect.
    pub sigma_emp: f64,
    /// `max dist(2O - x, ∂Ω)` over boundary samples.
    pub audit_max: f64,
    /// `2 N σ_emp`.
    pub audit_bound: f64,
    pub audit_ok: bool,
}

/// Intersection of the critical lines of two orthogonal directions, with the
/// point-reflection audit: composing the two reflections maps `x` to
/// `2O - x`, which must lie within `2Nσ_emp` of the boundary.
pub fn approximate_center(domain: &DomainSpec, caps: &[CriticalCap]) -> Result<CenterReport> {
    let [c1, c2] = caps else {
        return Err(invalid(format!("need caps for exactly two directions, got {}", caps.len())));
    };
    if c1.omega.dot(&c2.omega).abs() > 1e-9 {
        return Err(invalid("directions must be orthogonal"));
    }
    let m = Matrix2::new(c1.omega.x, c1.omega.y, c2.omega.x, c2.omega.y);
    let center = m
        .lu()
        .solve(&Point::new(c1.lambda, c2.lambda))
        .ok_or_else(|| invalid("critical lines are parallel"))?;
    let defects = caps
        .iter()
        .map(|c| reflection_defect_two_sided(domain, &c.omega, c.lambda))
        .collect::<Result<Vec<_>>>()?;
    let sigma_emp = defects.iter().cloned().fold(0.0, f64::max) / 2.0;
    let audit_max = domain
        .dense_sample()
        .iter()
        .step_by(4)
        .map(|b| signed_distance(domain, &(2.0 * center - b.position)).abs())
        .fold(0.0, f64::max);
    let audit_bound = 2.0 * caps.len() as f64 * sigma_emp;
    let slack = 1e-6 * geometry::summary(domain)?.d_omega + 2.0 * (c1.tol + c2.tol);
    Ok(CenterReport { center, defects, sigma_emp, audit_max, audit_bound, audit_ok: audit_max <= audit_bound + slack })
}

/// `4N (1 + d_Ω) σ`: how far any critical line may sit from the center.
pub fn center_bound(n: u32, d_omega: f64, sigma: f64) -> f64 {
    4.0 * n as f64 * (1.0 + d_omega) * sigma
}
