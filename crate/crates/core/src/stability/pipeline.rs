use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::center::{approximate_center, reflection_defect, CenterReport};
use super::formulas::{bnst_crossover, choose_parameters, condition_ksigma, tau_theory, tau_torsion, Parameters};
use super::sets::{
    build_x, inclusion_check, sigma_delta, sup_w_bound_check, InclusionReport, SupWCheck, SEMINORM_FLOOR,
};
use crate::error::{invalid, Error, Result};
use crate::geometry::{self, inner_outer_radii, DomainSpec, Point};
use crate::harnack::gamma_torsion;
use crate::movingplanes::{critical_cap, ctheta_check_with, direction, theta_lower_bound, Case, PlaneTolerances};
use crate::pde::{self, discretize, eigen_demo, solve_semilinear, NonlinearitySpec, SolverOptions};

/// Knobs shared by every member of a sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub h: f64,
    /// Core depth `G = Ω(t r_Ω)`.
    pub t: f64,
    /// Ball shrink factor of the Harnack chain.
    pub a: f64,
    /// Slack in the torsion exponent `1/(τ+η)`.
    pub eta: f64,
    /// Angle of the first direction; the second is a quarter turn later.
    pub frame_angle: f64,
    pub boundary_samples: usize,
    /// With `f(0) = 0`, `min u_ν` below this voids the shape estimate.
    pub unu_threshold: f64,
    /// Gaps below `gap_floor_rel · d_Ω` are treated as zero.
    pub gap_floor_rel: f64,
    pub seminorm_floor: f64,
    /// The fitted slope may undershoot `τ` by this much.
    pub fit_tol: f64,
    /// Scaled residual at which the solve stops.
    pub solver_tol: f64,
    /// Plane search tolerances; see `PlaneTolerances`.
    pub lambda_rel: f64,
    pub geo_rel: f64,
    pub angle_tol: f64,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            h: 1.0 / 128.0,
            t: 1.0 / 32.0,
            a: 0.5,
            eta: 0.1,
            frame_angle: 0.0,
            boundary_samples: pde::DEFAULT_BOUNDARY_SAMPLES,
            unu_threshold: 0.5,
            gap_floor_rel: 1e-4,
            seminorm_floor: SEMINORM_FLOOR,
            fit_tol: 0.05,
            solver_tol: 1e-10,
            lambda_rel: PlaneTolerances::default().lambda_rel,
            geo_rel: PlaneTolerances::default().geo_rel,
            angle_tol: PlaneTolerances::default().angle,
            bootstrap: 200,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn plane_tolerances(&self) -> PlaneTolerances {
        PlaneTolerances {
            lambda_rel: self.lambda_rel,
            geo_rel: self.geo_rel,
            angle: self.angle_tol,
            ..PlaneTolerances::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.h,
            self.eta,
            self.unu_threshold,
            self.gap_floor_rel,
            self.seminorm_floor,
            self.fit_tol,
            self.solver_tol,
            self.lambda_rel,
            self.geo_rel,
            self.angle_tol,
        ];
        if pos.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(invalid("h, eta and all tolerances must be positive"));
        }
        if !(self.t > 0.0 && self.t < 0.5) {
            return Err(invalid(format!("t must lie in (0, 1/2), got {}", self.t)));
        }
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(invalid(format!("a must lie in (0, 1), got {}", self.a)));
        }
        if self.boundary_samples < 16 || !self.frame_angle.is_finite() {
            return Err(invalid("need at least 16 boundary samples and a finite frame angle"));
        }
        Ok(())
    }
}

/// What gets solved on a member's domain.
#[derive(Clone, Debug)]
pub enum Source {
    Solve(NonlinearitySpec),
    /// `φ₁ / n`.
    Eigen(u32),
}

#[derive(Clone, Debug)]
pub struct Member {
    pub id: String,
    pub domain: DomainSpec,
    pub source: Source,
    pub known_center: Option<Point>,
}

#[derive(Clone, Debug)]
pub struct Family {
    pub name: String,
    pub members: Vec<Member>,
}

impl Family {
    /// Ellipses with semi-axes `a_k` and `b`, rotated about their center.
    pub fn ellipses(a: &[f64], b: f64, center: Point, rotation: f64, f: NonlinearitySpec) -> Result<Self> {
        let members = a
            .iter()
            .map(|&ak| {
                Ok(Member {
                    id: format!("ellipse_a{ak}"),
                    domain: DomainSpec::ellipse(center, ak, b, rotation)?,
                    source: Source::Solve(f.clone()),
                    known_center: Some(center),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Family { name: "ellipse".into(), members })
    }

    pub fn disks(radii: &[f64], center: Point, f: NonlinearitySpec) -> Result<Self> {
        let members = radii
            .iter()
            .map(|&r| {
                Ok(Member {
                    id: format!("disk_r{r}"),
                    domain: DomainSpec::disk(center, r)?,
                    source: Source::Solve(f.clone()),
                    known_center: Some(center),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Family { name: "ball".into(), members })
    }

    /// `φ₁ / n` on one fixed domain.
    pub fn eigen(domain: &DomainSpec, ns: &[u32], known_center: Option<Point>) -> Self {
        let members = ns
            .iter()
            .map(|&n| Member { id: format!("eigen_n{n}"), domain: domain.clone(), source: Source::Eigen(n), known_center })
            .collect();
        Family { name: "eigen".into(), members }
    }

    /// One member per named domain, with no known center.
    pub fn from_domains(domains: Vec<(String, DomainSpec)>, f: NonlinearitySpec) -> Self {
        let members = domains
            .into_iter()
            .map(|(id, domain)| Member { id, domain, source: Source::Solve(f.clone()), known_center: None })
            .collect();
        Family { name: "domains".into(), members }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirectionRecord {
    pub omega: Point,
    pub lambda: f64,
    pub case: Case,
    pub touch_point: Point,
    /// One-sided reflection defect.
    pub defect: f64,
    /// Half-aperture certified for this cap, if the certificate passed.
    pub cone_theta: Option<f64>,
    pub certificate_error: Option<String>,
    /// `w` bound measurements at `δ = r_Ω/32`.
    pub sup_w: Option<SupWCheck>,
    pub inclusion: Option<InclusionReport>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KsigmaProbe {
    pub delta: f64,
    pub sigma: f64,
    pub condition: bool,
    /// Inclusion held for both directions.
    pub inclusion: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub id: String,
    pub h: f64,
    pub d_omega: f64,
    pub r_omega: f64,
    pub is_convex: bool,
    pub f0: f64,
    pub seminorm: f64,
    pub min_unu: f64,
    pub max_u: f64,
    pub residual: f64,
    pub directions: Vec<DirectionRecord>,
    pub center: CenterReport,
    pub known_center: Option<Point>,
    pub center_error: Option<f64>,
    pub r_i: f64,
    pub r_e: f64,
    pub gap: f64,
    pub theta_used: f64,
    /// `"certificate"` or `"lower-bound"`.
    pub theta_source: String,
    pub gamma: f64,
    pub tau_theory: f64,
    /// `1 + N sqrt(1 + (2d/r)²)` for the torsion problem on convex domains.
    pub tau_torsion: Option<f64>,
    pub k_lower: f64,
    pub k_upper: f64,
    /// Largest measured `C` over directions and `δ = r_Ω/k`, `k ∈ {32, 48, 64, 96, 128}`, `δ ≥ h`.
    pub c_emp: Option<f64>,
    pub mc_emp: Option<f64>,
    pub m_emp: Option<f64>,
    pub params: Option<Parameters>,
    pub condition_ksigma: Option<bool>,
    pub inclusion: Option<bool>,
    /// Condition and inclusion on a fixed grid of `(δ, σ)` in the regime.
    pub probes: Vec<KsigmaProbe>,
    pub flags: Vec<String>,
    /// Why the record is left out of the exponent fit.
    pub excluded: Option<String>,
}

pub const FLAG_LOW_UNU: &str = "min_unu_below_threshold";
pub const FLAG_GAP_NOISE: &str = "gap_below_noise";
pub const FLAG_SEMINORM_NOISE: &str = "seminorm_below_noise";

/// Runs the whole chain for one member.
pub fn run_member(member: &Member, cfg: &PipelineConfig) -> Result<StabilityRecord> {
    cfg.validate()?;
    let domain = &member.domain;
    let s = geometry::summary(domain)?;
    let grid = Arc::new(discretize(domain, cfg.h)?);
    let field = match &member.source {
        Source::Solve(f) => solve_semilinear(&grid, f, &SolverOptions { tol: cfg.solver_tol, ..SolverOptions::default() })?,
        Source::Eigen(n) => eigen_demo(&grid, *n)?,
    };
    let unu = field.normal_derivative(cfg.boundary_samples)?;
    let seminorm = pde::seminorm_unu(&unu)?;
    let min_unu = pde::min_unu(&unu);
    let mut flags = Vec::new();

    let tols = cfg.plane_tolerances();
    let omegas = [direction(cfg.frame_angle), direction(cfg.frame_angle + FRAC_PI_2)];
    let caps = omegas.iter().map(|w| critical_cap(domain, w, &tols)).collect::<Result<Vec<_>>>()?;
    let mut directions = Vec::new();
    for cap in &caps {
        let (cone_theta, certificate_error) = match ctheta_check_with(domain, cap, cfg.t, &tols) {
            Ok(c) => (Some(c.theta), None),
            Err(e) => (None, Some(e.to_string())),
        };
        directions.push(DirectionRecord {
            omega: cap.omega,
            lambda: cap.lambda,
            case: cap.case,
            touch_point: cap.touch_point,
            defect: reflection_defect(domain, &cap.omega, cap.lambda)?,
            cone_theta,
            certificate_error,
            sup_w: None,
            inclusion: None,
        });
    }

    let lower = theta_lower_bound(s.d_omega, s.r_omega, cfg.t)?;
    let certified: Option<f64> = directions.iter().map(|d| d.cone_theta).sum::<Option<f64>>().map(|_| {
        directions.iter().filter_map(|d| d.cone_theta).fold(f64::INFINITY, f64::min)
    });
    let (theta_used, theta_source) = match certified {
        Some(th) => (th, "certificate"),
        None => {
            flags.push("certificate_failed".to_string());
            (lower, "lower-bound")
        }
    };
    if !s.is_convex {
        flags.push("nonconvex".into());
    }
    let gamma = gamma_torsion(cfg.a, theta_used, 2)?;
    if !field.nonlinearity.is_torsion() {
        flags.push("gamma_from_harmonic_constant".into());
    }
    let tau = tau_theory(gamma)?;
    let tau_t = (field.nonlinearity.is_torsion() && s.is_convex).then(|| tau_torsion(2, s.d_omega, s.r_omega)).transpose()?;

    let center = approximate_center(domain, &caps)?;
    if !center.audit_ok {
        flags.push("center_audit_failed".into());
    }
    let (r_i, r_e) = inner_outer_radii(domain, &center.center)?;
    let gap = r_e - r_i;
    let (k_lower, k_upper) = field.growth_constants(2.0 * cfg.h)?;

    // measured constants of the w bound
    let (mut c_emp, mut mc_emp, mut m_emp) = (None::<f64>, None::<f64>, None::<f64>);
    let deltas: Vec<f64> = [32.0, 48.0, 64.0, 96.0, 128.0].iter().map(|k| s.r_omega / k).filter(|d| *d >= cfg.h).collect();
    let max_opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    };
    for (cap, dir) in caps.iter().zip(directions.iter_mut()) {
        for (i, &delta) in deltas.iter().enumerate() {
            let comp = sigma_delta(&grid, cap, delta)?;
            let check = sup_w_bound_check(&field, cap, &comp, gamma, seminorm, cfg.t)?;
            if check.anomaly && !flags.iter().any(|f| f == "w_without_seminorm") {
                flags.push("w_without_seminorm".into());
            }
            if check.w_at_noise && !flags.iter().any(|f| f == "c_from_noise_floor") {
                flags.push("c_from_noise_floor".into());
            }
            c_emp = max_opt(c_emp, check.c_emp);
            mc_emp = max_opt(mc_emp, check.mc_emp);
            m_emp = max_opt(m_emp, check.m_emp);
            if i == 0 {
                dir.sup_w = Some(check);
            }
        }
    }

    let mut probes = Vec::new();
    if let Some(c) = c_emp.filter(|_| seminorm > cfg.seminorm_floor) {
        for &delta in &deltas {
            let sets = caps
                .iter()
                .map(|cap| Ok(build_x(sigma_delta(&grid, cap, delta)?)))
                .collect::<Result<Vec<_>>>()?;
            for sigma in [s.r_omega / 16.0, s.r_omega / 24.0] {
                if sigma <= delta {
                    continue;
                }
                let condition = condition_ksigma(k_lower, k_upper, c, gamma, delta, sigma, seminorm)?;
                let mut inclusion = true;
                for x in &sets {
                    inclusion &= inclusion_check(x, sigma)?.holds;
                }
                probes.push(KsigmaProbe { delta, sigma, condition, inclusion });
            }
        }
    }

    let (mut params, mut condition, mut inclusion) = (None, None, None);
    if let Some(c) = c_emp.filter(|_| seminorm > cfg.seminorm_floor) {
        match choose_parameters(c, k_lower, k_upper, gamma, seminorm, s.r_omega) {
            Ok(p) => {
                condition = Some(condition_ksigma(k_lower, k_upper, c, gamma, p.delta, p.sigma, seminorm)?);
                let mut all = true;
                for (cap, dir) in caps.iter().zip(directions.iter_mut()) {
                    let x = build_x(sigma_delta(&grid, cap, p.delta)?);
                    let rep = inclusion_check(&x, p.sigma)?;
                    all &= rep.holds;
                    dir.inclusion = Some(rep);
                }
                inclusion = Some(all);
                params = Some(p);
            }
            Err(Error::OutsideRegime { .. }) => flags.push("outside_regime".into()),
            Err(e) => return Err(e),
        }
    }

    let low_unu = field.nonlinearity.f0 == 0.0 && min_unu < cfg.unu_threshold;
    if low_unu {
        flags.push(FLAG_LOW_UNU.into());
    }
    let gap_noise = gap <= cfg.gap_floor_rel * s.d_omega;
    if gap_noise {
        flags.push(FLAG_GAP_NOISE.into());
    }
    let seminorm_noise = seminorm <= cfg.seminorm_floor;
    if seminorm_noise {
        flags.push(FLAG_SEMINORM_NOISE.into());
    }
    let excluded = if low_unu {
        Some("min u_nu below threshold with f(0) = 0".to_string())
    } else if gap_noise || seminorm_noise {
        Some("gap or seminorm at noise level".to_string())
    } else if !s.is_convex && certified.is_none() {
        Some("no cone certificate on a nonconvex domain".to_string())
    } else {
        None
    };

    Ok(StabilityRecord {
        id: member.id.clone(),
        h: cfg.h,
        d_omega: s.d_omega,
        r_omega: s.r_omega,
        is_convex: s.is_convex,
        f0: field.nonlinearity.f0,
        seminorm,
        min_unu,
        max_u: field.max_u(),
        residual: field.report.residual,
        directions,
        known_center: member.known_center,
        center_error: member.known_center.map(|c| (c - center.center).norm()),
        center,
        r_i,
        r_e,
        gap,
        theta_used,
        theta_source: theta_source.into(),
        gamma,
        tau_theory: tau,
        tau_torsion: tau_t,
        k_lower,
        k_upper,
        c_emp,
        mc_emp,
        m_emp,
        params,
        condition_ksigma: condition,
        inclusion,
        probes,
        flags,
        excluded,
    })
}

/// Least-squares slope of `log gap` against `log [u_ν]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fit {
    pub n: usize,
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    /// 2.5% and 97.5% quantiles of the residual-bootstrap slopes.
    pub ci95: (f64, f64),
    /// Largest `τ = 1/(1+γ)` over the fitted records.
    pub tau_theory: f64,
    pub slope_ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyResult {
    pub name: String,
    pub records: Vec<StabilityRecord>,
    /// Members whose pipeline failed, with the error.
    pub failures: Vec<(String, String)>,
    pub fit: Option<Fit>,
    /// Why the fit was skipped, or which records it left out.
    pub notes: Vec<String>,
    pub eta: f64,
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// OLS on log-log pairs with a seeded residual bootstrap for the slope.
pub fn fit_exponent(pairs: &[(f64, f64)], bootstrap: usize, seed: u64) -> Result<(f64, f64, f64, (f64, f64))> {
    if pairs.len() < 2 || pairs.iter().any(|(s, g)| !(*s > 0.0 && *g > 0.0)) {
        return Err(invalid("need at least two positive (seminorm, gap) pairs"));
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept) = ols(&x, &y);
    let res: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - (intercept + slope * a)).collect();
    let rms = (res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes: Vec<f64> = (0..bootstrap)
        .map(|_| {
            let yb: Vec<f64> =
                x.iter().map(|a| intercept + slope * a + res[rng.gen_range(0..res.len())]).collect();
            ols(&x, &yb).0
        })
        .collect();
    slopes.sort_by(f64::total_cmp);
    let ci = if slopes.is_empty() {
        (slope, slope)
    } else {
        let q = |p: f64| slopes[((p * (slopes.len() - 1) as f64).round()) as usize];
        (q(0.025), q(0.975))
    };
    Ok((slope, intercept, rms, ci))
}

/// Runs every member (in parallel), then fits the exponent on the usable
/// records. Records come back in member order.
pub fn run_family(family: &Family, cfg: &PipelineConfig) -> Result<FamilyResult> {
    cfg.validate()?;
    if family.members.is_empty() {
        return Err(Error::Empty("family has no members".into()));
    }
    let outcomes: Vec<Result<StabilityRecord>> = family.members.par_iter().map(|m| run_member(m, cfg)).collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (m, out) in family.members.iter().zip(outcomes) {
        match out {
            Ok(r) => records.push(r),
            Err(e) => failures.push((m.id.clone(), e.to_string())),
        }
    }
    let mut notes = Vec::new();
    for (id, e) in &failures {
        notes.push(format!("{id}: pipeline failed ({e}); excluded from fit"));
    }
    let fit = fit_family(&records, cfg, &mut notes)?;
    Ok(FamilyResult { name: family.name.clone(), records, failures, fit, notes, eta: cfg.eta })
}

fn fit_family(records: &[StabilityRecord], cfg: &PipelineConfig, notes: &mut Vec<String>) -> Result<Option<Fit>> {
    if records.is_empty() {
        notes.push("fit skipped: no records".into());
        return Ok(None);
    }
    if records.iter().any(|r| r.flags.iter().any(|f| f == FLAG_LOW_UNU)) {
        notes.push(
            "family excluded from exponent fit: min u_nu below threshold with f(0) = 0, \
             so the seminorm carries no shape information"
                .into(),
        );
        return Ok(None);
    }
    if records.iter().all(|r| r.flags.iter().any(|f| f == FLAG_GAP_NOISE)) {
        notes.push("degenerate: all gaps below noise floor; fit skipped".into());
        return Ok(None);
    }
    let used: Vec<&StabilityRecord> = records.iter().filter(|r| r.excluded.is_none()).collect();
    for r in records.iter().filter(|r| r.excluded.is_some()) {
        notes.push(format!("{}: excluded ({})", r.id, r.excluded.as_deref().unwrap_or("")));
    }
    if used.len() < 5 {
        notes.push(format!("fit skipped: {} usable records, need 5", used.len()));
        return Ok(None);
    }
    let pairs: Vec<(f64, f64)> = used.iter().map(|r| (r.seminorm, r.gap)).collect();
    let (lo, hi) = pairs.iter().fold((f64::INFINITY, 0.0f64), |(l, h), p| (l.min(p.0), h.max(p.0)));
    if hi < 10.0 * lo {
        notes.push(format!("fit skipped: seminorms span {:.3} decades, need 1", (hi / lo).log10()));
        return Ok(None);
    }
    let (slope, intercept, residual_rms, ci95) = fit_exponent(&pairs, cfg.bootstrap, cfg.seed)?;
    let tau = used.iter().map(|r| r.tau_theory).fold(0.0, f64::max);
    Ok(Some(Fit {
        n: pairs.len(),
        slope,
        intercept,
        residual_rms,
        ci95,
        tau_theory: tau,
        slope_ok: slope >= tau - cfg.fit_tol,
    }))
}

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

/// Sweep CSV: `id,seminorm,r_i,r_e,gap,lambda_e1,lambda_e2,sigma_emp,gamma,tau_theory,flags`.
pub fn write_sweep_csv<W: Write>(result: &FamilyResult, mut out: W) -> io::Result<()> {
    writeln!(out, "# family: {}", result.name)?;
    writeln!(out, "# seminorm: 1 (u_nu per length); measured, chordal sup over boundary sample pairs")?;
    writeln!(out, "# r_i,r_e,gap: length; measured, min/max boundary distance from the approximate center")?;
    writeln!(out, "# lambda_e1,lambda_e2: length; measured, critical plane positions for the frame directions")?;
    writeln!(out, "# sigma_emp: length; measured, half the largest two-sided reflection defect")?;
    writeln!(out, "# gamma: 1; formula, harmonic Harnack exponent at the certified half-aperture")?;
    writeln!(out, "# tau_theory: 1; formula, 1/(1+gamma)")?;
    writeln!(out, "# flags: ';'-separated status flags")?;
    writeln!(out, "id,seminorm,r_i,r_e,gap,lambda_e1,lambda_e2,sigma_emp,gamma,tau_theory,flags")?;
    for r in &result.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.id,
            num(r.seminorm),
            num(r.r_i),
            num(r.r_e),
            num(r.gap),
            num(r.directions[0].lambda),
            num(r.directions[1].lambda),
            num(r.center.sigma_emp),
            num(r.gamma),
            num(r.tau_theory),
            r.flags.join(";")
        )?;
    }
    out.flush()
}

/// `log seminorm, log gap` pairs followed by the fit line.
pub fn write_plot_data<W: Write>(result: &FamilyResult, mut out: W) -> io::Result<()> {
    writeln!(out, "# log_seminorm log_gap (natural logs; measured)")?;
    for r in result.records.iter().filter(|r| r.seminorm > 0.0 && r.gap > 0.0) {
        writeln!(out, "{} {}", num(r.seminorm.ln()), num(r.gap.ln()))?;
    }
    match &result.fit {
        Some(f) => writeln!(out, "# fit slope {} intercept {}", num(f.slope), num(f.intercept))?,
        None => writeln!(out, "# fit none")?,
    }
    out.flush()
}

/// Human-readable summary of a sweep.
pub fn summary_text(result: &FamilyResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "family {}: {} records, {} failures", result.name, result.records.len(), result.failures.len());
    for r in &result.records {
        let _ = writeln!(
            s,
            "  {}: seminorm {:.4e} gap {:.4e} min u_nu {:.4e} gamma {:.4} tau {:.4}{}",
            r.id,
            r.seminorm,
            r.gap,
            r.min_unu,
            r.gamma,
            r.tau_theory,
            if r.flags.is_empty() { String::new() } else { format!(" [{}]", r.flags.join(", ")) }
        );
    }
    match &result.fit {
        Some(f) => {
            let _ = writeln!(
                s,
                "fitted slope {:.4} (95% bootstrap {:.4}..{:.4}, rms {:.2e}, n {}); tau_theory {:.4}: {}",
                f.slope,
                f.ci95.0,
                f.ci95.1,
                f.residual_rms,
                f.n,
                f.tau_theory,
                if f.slope_ok { "consistent" } else { "below theory" }
            );
        }
        None => {
            let _ = writeln!(s, "no fit");
        }
    }
    let torsion: Vec<&StabilityRecord> = result.records.iter().filter(|r| r.tau_torsion.is_some()).collect();
    if !torsion.is_empty() {
        let cross = bnst_crossover(2).unwrap_or(f64::NAN);
        for r in torsion {
            let tt = r.tau_torsion.unwrap_or(f64::NAN);
            let ratio = r.d_omega / r.r_omega;
            let _ = writeln!(
                s,
                "  {}: torsion tau {:.4}, exponent 1/(tau+eta) = {:.4}; d/r = {:.4} vs crossover {:.4}: {}",
                r.id,
                tt,
                1.0 / (tt + result.eta),
                ratio,
                cross,
                if ratio <= cross { "favorable" } else { "not favorable" }
            );
        }
    }
    for n in &result.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}
