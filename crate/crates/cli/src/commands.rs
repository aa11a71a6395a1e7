use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::SVector;
use rayon::prelude::*;
use serde::Serialize;
use serrin_core::geometry::{self, Point};
use serrin_core::harnack::{build_chain, harnack_constant_harmonic, ConeSpec};
use serrin_core::movingplanes::{critical_cap, ctheta_check, direction, theta_lower_bound, Case, PlaneTolerances};
use serrin_core::pde::{self, discretize, io as field_io, solve_semilinear, SolverOptions};
use serrin_core::stability::{run_family, summary_text, write_plot_data, write_sweep_csv, FamilyResult};
use sha2::{Digest, Sha256};

use crate::config::{load_domain, FamilySpec, RunConfig, Values};
use crate::{parse, parse_config, CliError, Command, FamilyKind, ReportFormat};

pub fn dispatch(cmd: Command) -> Result<String, CliError> {
    match cmd {
        Command::Solve { domain, f, h, out, boundary, samples, tol } => {
            solve(&domain, &f, &h, &out, boundary.as_deref(), samples, tol)
        }
        Command::Movingplanes { domain, omega, tol } => movingplanes(&domain, &omega, tol),
        Command::Ctheta { domain, t, directions } => ctheta(&domain, &t, directions),
        Command::Harnack { theta, a, r0, xi, dim, json } => harnack(&theta, a, r0, xi, dim, json),
        Command::StabilitySweep { config, family, a, b, radii, n, domain, f, h, seed, out } => {
            let mut cfg = match &config {
                Some(p) => parse_config(p)?,
                None => RunConfig::default(),
            };
            if let Some(kind) = family {
                let need = |v: Option<String>, flag: &str| {
                    v.ok_or_else(|| CliError::validation(format!("--family needs {flag}")))
                };
                cfg.family = Some(match kind {
                    FamilyKind::Ellipse => FamilySpec::Ellipse {
                        a: Values::Text(need(a, "--a")?),
                        b,
                        center: [0.0, 0.0],
                        rotation: 0.0,
                    },
                    FamilyKind::Disk => FamilySpec::Disk { radii: Values::Text(need(radii, "--radii")?), center: [0.0, 0.0] },
                    FamilyKind::Eigen => {
                        let d = domain.ok_or_else(|| CliError::validation("--family eigen needs --domain"))?;
                        cfg.domains = vec![d];
                        if n.is_empty() {
                            return Err(CliError::validation("--family eigen needs --n"));
                        }
                        FamilySpec::Eigen { n, known_center: None }
                    }
                });
            }
            if let Some(f) = f {
                cfg.nonlinearity = parse::nonlinearity(&f)?.kind;
            }
            if let Some(h) = h {
                cfg.h = parse::fraction(&h)?;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate().map_err(|(field, msg)| CliError::validation(format!("{field}: {msg}")))?;
            let out = out.unwrap_or_else(|| cfg.out_dir.join("sweep.csv"));
            stability_sweep(&cfg, &out)
        }
        Command::Report { records, out_dir, format } => {
            let text = fs::read_to_string(&records).map_err(|e| CliError::Io(format!("{}: {e}", records.display())))?;
            let result: FamilyResult = serde_json::from_str(&text)
                .map_err(|e| CliError::validation(format!("{}: {e}", records.display())))?;
            report(&result, &out_dir, format)?;
            Ok(summary_text(&result))
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

#[derive(Serialize)]
struct SolveSummary {
    h: f64,
    unknowns: usize,
    max_u: f64,
    residual: f64,
    iterations: usize,
    damping: f64,
    lambda1_h: Option<f64>,
    seminorm: f64,
    min_unu: f64,
    field: PathBuf,
    boundary: PathBuf,
}

fn solve(
    domain: &Path,
    f: &str,
    h: &str,
    out: &Path,
    boundary: Option<&Path>,
    samples: usize,
    tol: f64,
) -> Result<String, CliError> {
    let dom = load_domain(domain)?;
    let f = parse::nonlinearity(f)?;
    let h = parse::fraction(h)?;
    if !(tol > 0.0) || samples < 2 {
        return Err(CliError::validation("--tol must be positive and --samples at least 2"));
    }
    let grid = Arc::new(discretize(&dom, h)?);
    let field = solve_semilinear(&grid, &f, &SolverOptions { tol, ..SolverOptions::default() })?;
    let unu = field.normal_derivative(samples)?;
    let boundary = boundary.map(Path::to_path_buf).unwrap_or_else(|| out.with_extension("boundary.csv"));
    field_io::write_field(&field, create(out)?)?;
    field_io::write_boundary_csv(&unu, create(&boundary)?)?;
    json(&SolveSummary {
        h,
        unknowns: grid.len(),
        max_u: field.max_u(),
        residual: field.report.residual,
        iterations: field.report.iterations,
        damping: field.report.damping,
        lambda1_h: field.report.lambda1_h,
        seminorm: pde::seminorm_unu(&unu)?,
        min_unu: pde::min_unu(&unu),
        field: out.to_path_buf(),
        boundary,
    })
}

fn plane_tol(tol: f64) -> Result<PlaneTolerances, CliError> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CliError::validation(format!("--tol must lie in (0, 1), got {tol}")));
    }
    Ok(PlaneTolerances { lambda_rel: tol, ..PlaneTolerances::default() })
}

fn movingplanes(domain: &Path, omega: &str, tol: f64) -> Result<String, CliError> {
    let dom = load_domain(domain)?;
    let cap = critical_cap(&dom, &direction(parse::angle(omega)?), &plane_tol(tol)?)?;
    json(&cap)
}

#[derive(Serialize)]
struct DirectionCertificate {
    angle: f64,
    lambda: f64,
    case: Case,
    theta: Option<f64>,
    ball_center: Option<Point>,
    ball_radius: Option<f64>,
    witnesses: usize,
    error: Option<String>,
}

#[derive(Serialize)]
struct CthetaReport {
    t: f64,
    d_omega: f64,
    r_omega: f64,
    is_convex: bool,
    theta_lower_bound: f64,
    theta_min: Option<f64>,
    all_certified: bool,
    coverage: &'static str,
    directions: Vec<DirectionCertificate>,
}

fn ctheta(domain: &Path, t: &str, count: usize) -> Result<String, CliError> {
    let dom = load_domain(domain)?;
    let t = parse::fraction(t)?;
    if count == 0 {
        return Err(CliError::validation("--directions must be positive"));
    }
    let s = geometry::summary(&dom)?;
    let lower = theta_lower_bound(s.d_omega, s.r_omega, t)?;
    let tols = PlaneTolerances::default();
    let directions = (0..count)
        .into_par_iter()
        .map(|k| {
            let angle = TAU * k as f64 / count as f64;
            let cap = critical_cap(&dom, &direction(angle), &tols)?;
            let mut d = DirectionCertificate {
                angle,
                lambda: cap.lambda,
                case: cap.case,
                theta: None,
                ball_center: None,
                ball_radius: None,
                witnesses: 0,
                error: None,
            };
            match ctheta_check(&dom, &cap, t) {
                Ok(c) => {
                    d.theta = Some(c.theta);
                    d.ball_center = Some(c.ball_center);
                    d.ball_radius = Some(c.ball_radius);
                    d.witnesses = c.witness_points.len();
                }
                Err(e) => d.error = Some(e.to_string()),
            }
            Ok(d)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let all = directions.iter().all(|d| d.theta.is_some());
    json(&CthetaReport {
        t,
        d_omega: s.d_omega,
        r_omega: s.r_omega,
        is_convex: s.is_convex,
        theta_lower_bound: lower,
        theta_min: directions.iter().filter_map(|d| d.theta).reduce(f64::min),
        all_certified: all,
        coverage: "sampled",
        directions,
    })
}

#[derive(Serialize)]
struct HarnackTable {
    dim: u32,
    a: f64,
    theta: f64,
    r0: f64,
    xi: f64,
    h_a: f64,
    beta: f64,
    gamma: f64,
    k: f64,
    n: usize,
    bound: f64,
}

fn chain_table<const D: usize>(theta: f64, a: f64, r0: f64, xi: f64) -> Result<HarnackTable, CliError> {
    let mut axis = SVector::<f64, D>::zeros();
    axis[0] = 1.0;
    let cone = ConeSpec::new(SVector::zeros(), axis, theta, xi)?;
    let h_a = harnack_constant_harmonic(a, D as u32)?;
    let chain = build_chain(&cone, &(r0 * axis), &(xi * axis), a, h_a)?;
    Ok(HarnackTable {
        dim: D as u32,
        a,
        theta,
        r0,
        xi,
        h_a,
        beta: chain.beta,
        gamma: chain.gamma,
        k: chain.k,
        n: chain.n,
        bound: chain.bound,
    })
}

fn harnack(theta: &str, a: f64, r0: f64, xi: f64, dim: u32, as_json: bool) -> Result<String, CliError> {
    let theta = parse::angle(theta)?;
    if !(r0 > 0.0 && xi > r0) {
        return Err(CliError::validation("need 0 < --r0 < --xi"));
    }
    let t = match dim {
        2 => chain_table::<2>(theta, a, r0, xi)?,
        3 => chain_table::<3>(theta, a, r0, xi)?,
        _ => return Err(CliError::validation(format!("--dim must be 2 or 3, got {dim}"))),
    };
    if as_json {
        return json(&t);
    }
    let mut s = String::new();
    let rows: [(&str, String); 11] = [
        ("N", t.dim.to_string()),
        ("a", t.a.to_string()),
        ("theta", format!("{} rad ({} deg)", t.theta, t.theta.to_degrees())),
        ("r0", t.r0.to_string()),
        ("|xi-z|", t.xi.to_string()),
        ("H_a", t.h_a.to_string()),
        ("beta", t.beta.to_string()),
        ("gamma", t.gamma.to_string()),
        ("K", t.k.to_string()),
        ("n", t.n.to_string()),
        ("bound", t.bound.to_string()),
    ];
    let _ = writeln!(s, "{:<8} value", "quantity");
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<8} {v}");
    }
    Ok(s)
}

#[derive(Serialize)]
struct OutputHash {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    family: &'a str,
    members: Vec<&'a str>,
    outputs: Vec<OutputHash>,
}

fn hash_file(path: &Path) -> Result<OutputHash, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(OutputHash {
        file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        sha256: format!("{:x}", Sha256::digest(&bytes)),
    })
}

/// Runs the sweep and writes the CSV at `out` plus siblings
/// `.plot.dat`, `.summary.txt`, `.records.json` and `.manifest.json`.
pub fn stability_sweep(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let family = cfg.family()?;
    let result = run_family(&family, &cfg.pipeline())?;
    if result.records.is_empty() {
        let why: Vec<String> = result.failures.iter().map(|(id, e)| format!("{id}: {e}")).collect();
        return Err(CliError::Numerical(format!("every member failed: {}", why.join("; "))));
    }
    let paths = [
        out.to_path_buf(),
        out.with_extension("plot.dat"),
        out.with_extension("summary.txt"),
        out.with_extension("records.json"),
    ];
    write_sweep_csv(&result, create(&paths[0])?)?;
    write_plot_data(&result, create(&paths[1])?)?;
    let summary = summary_text(&result);
    write_text(&paths[2], &summary)?;
    write_text(&paths[3], &json(&result)?)?;
    let manifest = Manifest {
        tool: "serrin",
        version: env!("CARGO_PKG_VERSION"),
        command: "stability-sweep",
        config: cfg,
        family: &family.name,
        members: family.members.iter().map(|m| m.id.as_str()).collect(),
        outputs: paths.iter().map(|p| hash_file(p)).collect::<Result<_, _>>()?,
    };
    write_text(&out.with_extension("manifest.json"), &json(&manifest)?)?;
    Ok(summary)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Writes `sweep.csv`, `summary.txt` and/or `plot.dat` into `dir`.
pub fn report(result: &FamilyResult, dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>, CliError> {
    if result.records.is_empty() {
        return Err(CliError::validation("no records to report"));
    }
    let mut written = Vec::new();
    let want = |f: ReportFormat| format == f || format == ReportFormat::All;
    if want(ReportFormat::Csv) {
        let p = dir.join("sweep.csv");
        write_sweep_csv(result, create(&p)?)?;
        written.push(p);
    }
    if want(ReportFormat::Summary) {
        let p = dir.join("summary.txt");
        write_text(&p, &summary_text(result))?;
        written.push(p);
    }
    if want(ReportFormat::Plot) {
        let p = dir.join("plot.dat");
        write_plot_data(result, create(&p)?)?;
        written.push(p);
    }
    Ok(written)
}
