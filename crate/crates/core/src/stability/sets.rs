use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{self, signed_distance, Point};
use crate::movingplanes::CriticalCap;
use crate::pde::{Field, Grid};

/// Grid component of `Ω(δ) ∩ {x·ω > λ}` grown from the touching-ball center.
#[derive(Clone, Debug)]
pub struct SigmaComponent {
    pub omega: Point,
    pub lambda: f64,
    pub delta: f64,
    pub grid: Arc<Grid>,
    /// Per unknown: member of the component.
    pub member: Vec<bool>,
    pub count: usize,
    /// Number of 4-connected components of the eligible nodes.
    pub components: usize,
}

fn eligible(grid: &Grid, cap: &CriticalCap, delta: f64, k: usize) -> bool {
    cap.in_halfplane(&grid.position(k)) && grid.stencils[k].signed_distance > delta
}

/// Flood fill over unknowns in the cap at distance more than `delta` from
/// the boundary, seeded at the eligible node nearest `cap.component_seed`.
pub fn sigma_delta(grid: &Arc<Grid>, cap: &CriticalCap, delta: f64) -> Result<SigmaComponent> {
    let r_omega = geometry::summary(&grid.domain)?.r_omega;
    if !(delta > 0.0 && delta <= r_omega / 32.0 * (1.0 + 1e-12)) {
        return Err(invalid(format!("delta must lie in (0, r_Omega/32 = {}], got {delta}", r_omega / 32.0)));
    }
    let n = grid.len();
    let ok: Vec<bool> = (0..n).map(|k| eligible(grid, cap, delta, k)).collect();
    let seed = (0..n)
        .filter(|&k| ok[k])
        .min_by(|&a, &b| {
            let da = (grid.position(a) - cap.component_seed).norm_squared();
            let db = (grid.position(b) - cap.component_seed).norm_squared();
            da.total_cmp(&db)
        })
        .ok_or_else(|| Error::Empty(format!("no grid node of the cap lies deeper than delta = {delta}")))?;

    let mut label = vec![usize::MAX; n];
    let mut components = 0;
    let fill = |start: usize, id: usize, label: &mut Vec<usize>| -> usize {
        let mut queue = VecDeque::from([start]);
        label[start] = id;
        let mut count = 0;
        while let Some(k) = queue.pop_front() {
            count += 1;
            for nb in grid.stencils[k].neighbor.iter().flatten() {
                if ok[*nb] && label[*nb] == usize::MAX {
                    label[*nb] = id;
                    queue.push_back(*nb);
                }
            }
        }
        count
    };
    let count = fill(seed, 0, &mut label);
    components += 1;
    for k in 0..n {
        if ok[k] && label[k] == usize::MAX {
            fill(k, components, &mut label);
            components += 1;
        }
    }
    let member = label.iter().map(|&l| l == 0).collect();
    Ok(SigmaComponent { omega: cap.omega, lambda: cap.lambda, delta, grid: grid.clone(), member, count, components })
}

impl SigmaComponent {
    fn reflect(&self, p: &Point) -> Point {
        p - 2.0 * (p.dot(&self.omega) - self.lambda) * self.omega
    }

    /// Membership of an arbitrary point: in the open half-plane, deeper than
    /// `delta`, and attached to the component. When the eligible set is
    /// connected the last test is vacuous; otherwise some component node must
    /// lie within two cells.
    pub fn contains(&self, p: &Point) -> bool {
        if p.dot(&self.omega) <= self.lambda {
            return false;
        }
        let g = &self.grid;
        if self.components > 1 {
            let (i, j) = g.cell_of(p);
            let near = (j - 1..=j + 2)
                .flat_map(|b| (i - 1..=i + 2).map(move |a| (a, b)))
                .filter_map(|(a, b)| g.unknown_at(a, b))
                .any(|k| self.member[k]);
            if !near {
                return false;
            }
        }
        g.domain.level(p) < 0.0 && signed_distance(&g.domain, p) > self.delta
    }

    /// Unknown indices in the component.
    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.member.iter().enumerate().filter(|(_, m)| **m).map(|(k, _)| k)
    }
}

/// `X(δ)`: the component, its mirror image, and the plane between them.
#[derive(Clone, Debug)]
pub struct SymmetricSet {
    pub sigma: SigmaComponent,
}

pub fn build_x(sigma: SigmaComponent) -> SymmetricSet {
    SymmetricSet { sigma }
}

impl SymmetricSet {
    pub fn omega(&self) -> Point {
        self.sigma.omega
    }

    pub fn lambda(&self) -> f64 {
        self.sigma.lambda
    }

    pub fn delta(&self) -> f64 {
        self.sigma.delta
    }

    /// Invariant under `x ↦ x^λ` by construction.
    pub fn contains(&self, p: &Point) -> bool {
        let s = &self.sigma;
        let off = p.dot(&s.omega) - s.lambda;
        if off == 0.0 {
            // points of the plane between two mirrored members
            let h = s.grid.h;
            return s.contains(&(p + h * 1e-6 * s.omega));
        }
        s.contains(p) || s.contains(&s.reflect(p))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InclusionReport {
    pub holds: bool,
    /// `Ω(σ) ⊂ X(δ)` on the sampled points.
    pub inner: bool,
    /// `X(δ) ⊂ Ω` on the sampled points.
    pub outer: bool,
    pub witness: Option<Point>,
    pub samples: usize,
}

/// Sampled check of `Ω(σ) ⊂ X(δ) ⊂ Ω`.
///
/// The first inclusion is tested at every grid node deeper than `sigma`; the
/// second at the mirror image of every component node (component nodes lie in
/// the domain by construction).
pub fn inclusion_check(x: &SymmetricSet, sigma: f64) -> Result<InclusionReport> {
    let s = &x.sigma;
    let g = &s.grid;
    let r_omega = geometry::summary(&g.domain)?.r_omega;
    let cap = r_omega / 16.0 * (1.0 + 1e-12);
    if !(sigma > 0.0 && sigma <= cap && s.delta <= cap) {
        return Err(invalid(format!("sigma and delta must lie in (0, r_Omega/16 = {}]", r_omega / 16.0)));
    }
    let mut report = InclusionReport { holds: true, inner: true, outer: true, witness: None, samples: 0 };
    for k in s.nodes() {
        report.samples += 1;
        let q = s.reflect(&g.position(k));
        if !g.domain.contains(&q) {
            report.outer = false;
            report.witness = Some(q);
            break;
        }
    }
    if report.outer {
        for (k, st) in g.stencils.iter().enumerate() {
            if st.signed_distance <= sigma || s.member[k] {
                continue;
            }
            report.samples += 1;
            let p = g.position(k);
            if !x.contains(&p) {
                report.inner = false;
                report.witness = Some(p);
                break;
            }
        }
    }
    report.holds = report.inner && report.outer;
    Ok(report)
}

/// Measured sizes of `w` behind the bound `sup_{Σ_δ} w ≤ C δ^{-γ} [u_ν]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupWCheck {
    pub delta: f64,
    /// `sup |w|` over the component nodes.
    pub sup_w: f64,
    /// `δ^{-γ} [u_ν]`.
    pub rhs: f64,
    /// `max(sup_w, tol_w) / rhs`, the measured `C`; `None` when `[u_ν]` is
    /// at or below [`SEMINORM_FLOOR`].
    /// When `w` is at noise level the noise floor stands in for `sup_w`.
    pub c_emp: Option<f64>,
    /// `sup_w ≤ tol_w`.
    pub w_at_noise: bool,
    /// `sup w` over nodes of the cap deeper than `t r_Ω`.
    pub sup_w_core: f64,
    /// `sup_w_core / [u_ν]`, the measured `M C`.
    pub mc_emp: Option<f64>,
    /// `sup_w_core` over `sup w` on the nodes farther than `r_Ω/64` from the
    /// edge of the cap, the measured boundary-Harnack ratio.
    pub m_emp: Option<f64>,
    /// `[u_ν]` is at noise level while `w` is not.
    pub anomaly: bool,
}

/// Seminorms at or below this are treated as zero.
pub const SEMINORM_FLOOR: f64 = 1e-8;

/// Noise level for `w` on a field: `10 h² max u`.
pub fn tol_w(field: &Field) -> f64 {
    10.0 * field.grid.h * field.grid.h * field.max_u()
}

pub fn sup_w_bound_check(
    field: &Field,
    cap: &CriticalCap,
    sigma: &SigmaComponent,
    gamma: f64,
    seminorm: f64,
    t: f64,
) -> Result<SupWCheck> {
    if !(gamma > 0.0) || !(seminorm >= 0.0) || !(t > 0.0 && t < 0.5) {
        return Err(invalid("need gamma > 0, seminorm >= 0 and t in (0, 1/2)"));
    }
    let g = &field.grid;
    let r_omega = geometry::summary(&g.domain)?.r_omega;
    let w = field.reflect_difference(cap)?;
    let (mut sup_w, mut sup_core, mut sup_tilde) = (0.0f64, 0.0f64, 0.0f64);
    for (k, wk) in w.values() {
        let wk = wk.abs();
        let sd = g.stencils[k].signed_distance;
        if sigma.member[k] {
            sup_w = sup_w.max(wk);
        }
        if sd > t * r_omega {
            sup_core = sup_core.max(wk);
        }
        let plane = g.position(k).dot(&cap.omega) - cap.lambda;
        if sd > r_omega / 64.0 && plane > r_omega / 64.0 {
            sup_tilde = sup_tilde.max(wk);
        }
    }
    let noise = tol_w(field);
    let rhs = sigma.delta.powf(-gamma) * seminorm;
    Ok(SupWCheck {
        delta: sigma.delta,
        sup_w,
        rhs,
        c_emp: (seminorm > SEMINORM_FLOOR).then(|| sup_w.max(noise) / rhs),
        w_at_noise: sup_w <= noise,
        sup_w_core: sup_core,
        mc_emp: (seminorm > SEMINORM_FLOOR && sup_core > noise).then(|| sup_core / seminorm),
        m_emp: (sup_tilde > noise && sup_core > noise).then(|| sup_core / sup_tilde),
        anomaly: seminorm <= SEMINORM_FLOOR && sup_w > noise,
    })
}
