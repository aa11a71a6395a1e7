//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serrin_core::geometry::{DomainSpec, Point};
use serrin_core::harnack::{beta, gamma_torsion, harnack_constant_harmonic};
use serrin_core::movingplanes::PlaneTolerances;
use serrin_core::pde::{Nonlinearity, NonlinearitySpec, DEFAULT_BOUNDARY_SAMPLES};
use serrin_core::stability::{Family, PipelineConfig, SEMINORM_FLOOR};

use crate::{parse, CliError};

fn spacing<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Text(s) => parse::fraction(&s).map_err(serde::de::Error::custom),
    }
}

fn angle_list<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    Vec::<String>::deserialize(d)?.iter().map(|s| parse::angle(s).map_err(serde::de::Error::custom)).collect()
}

fn angle_list_out<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|a| format!("{a}rad")))
}

fn one_angle_out<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{v}rad"))
}

fn one_angle<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    parse::angle(&String::deserialize(d)?).map_err(serde::de::Error::custom)
}

/// A list of numbers, or a string `lo:hi:count` / `v1,v2,...`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Values {
    List(Vec<f64>),
    Text(String),
}

impl Values {
    pub fn resolve(&self, base: Option<f64>) -> Result<Vec<f64>, CliError> {
        match self {
            Values::List(v) if !v.is_empty() => Ok(v.clone()),
            Values::List(_) => Err(CliError::validation("empty value list")),
            Values::Text(s) => parse::values(s, base),
        }
    }
}

/// Which domains a sweep runs over.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// Semi-axes `a` (swept) and `b`; `a` sweeps space `a - b` geometrically.
    Ellipse {
        a: Values,
        #[serde(default = "one")]
        b: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default, deserialize_with = "one_angle", serialize_with = "one_angle_out")]
        rotation: f64,
    },
    Disk {
        radii: Values,
        #[serde(default)]
        center: [f64; 2],
    },
    /// `φ₁ / n` on the first configured domain.
    Eigen {
        n: Vec<u32>,
        #[serde(default)]
        known_center: Option<[f64; 2]>,
    },
    /// One member per configured domain file.
    Domains,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub lambda_rel: f64,
    pub geo_rel: f64,
    pub angle: f64,
    pub solver: f64,
    pub unu_threshold: f64,
    pub gap_floor_rel: f64,
    pub seminorm_floor: f64,
    pub fit_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let p = PlaneTolerances::default();
        let s = PipelineConfig::default();
        Tolerances {
            lambda_rel: p.lambda_rel,
            geo_rel: p.geo_rel,
            angle: p.angle,
            solver: s.solver_tol,
            unu_threshold: s.unu_threshold,
            gap_floor_rel: s.gap_floor_rel,
            seminorm_floor: SEMINORM_FLOOR,
            fit_tol: s.fit_tol,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Domain files, relative to the config file.
    pub domains: Vec<PathBuf>,
    pub nonlinearity: Nonlinearity,
    /// A number or `"p/q"`.
    #[serde(deserialize_with = "spacing")]
    pub h: f64,
    pub tolerances: Tolerances,
    /// At most two orthogonal directions, as `"30deg"` or `"0.5rad"`; the
    /// first sets the frame of the center estimate. Stored in radians.
    #[serde(deserialize_with = "angle_list", serialize_with = "angle_list_out")]
    pub directions: Vec<f64>,
    pub family: Option<FamilySpec>,
    pub t: f64,
    pub a: f64,
    pub eta: f64,
    pub boundary_samples: usize,
    pub bootstrap: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = PipelineConfig::default();
        RunConfig {
            domains: Vec::new(),
            nonlinearity: Nonlinearity::Torsion,
            h: s.h,
            tolerances: Tolerances::default(),
            directions: Vec::new(),
            family: None,
            t: s.t,
            a: s.a,
            eta: s.eta,
            boundary_samples: DEFAULT_BOUNDARY_SAMPLES,
            bootstrap: s.bootstrap,
            out_dir: PathBuf::from("out"),
            seed: s.seed,
        }
    }
}

/// Harnack constants implied by the configured `a` at one half-aperture.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HarnackConstants {
    pub a: f64,
    pub h_a: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Reads, fills defaults and validates a config file. Relative domain paths
/// are resolved against the file's directory.
pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig, CliError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config_str(&text).map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    for d in &mut cfg.domains {
        if d.is_relative() {
            *d = base.join(&*d);
        }
    }
    Ok(cfg)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        CliError::validation(format!(
            "line {} column {}: field `{}`: {inner}",
            inner.line(),
            inner.column(),
            e.path()
        ))
    })?;
    cfg.validate().map_err(|(field, msg)| {
        let line = key_line(text, field.rsplit('.').next().unwrap_or(&field));
        CliError::validation(match line {
            Some(l) => format!("line {l}: field `{field}`: {msg}"),
            None => format!("field `{field}`: {msg}"),
        })
    })?;
    Ok(cfg)
}

/// First line mentioning `"key"`, 1-based.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let pat = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&pat)).map(|i| i + 1)
}

impl RunConfig {
    /// Returns the offending field and a message.
    pub fn validate(&self) -> Result<(), (String, String)> {
        let err = |f: &str, m: String| Err((f.to_string(), m));
        if !(self.h > 0.0 && self.h.is_finite()) {
            return err("h", format!("h must be positive, got {}", self.h));
        }
        if !(self.t > 0.0 && self.t < 0.5) {
            return err("t", format!("t must lie in (0, 1/2), got {}", self.t));
        }
        if !(self.a > 0.0 && self.a < 1.0) {
            return err("a", format!("a must lie in (0, 1), got {}", self.a));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return err("eta", format!("eta must be positive, got {}", self.eta));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("lambda_rel", t.lambda_rel),
            ("geo_rel", t.geo_rel),
            ("angle", t.angle),
            ("solver", t.solver),
            ("unu_threshold", t.unu_threshold),
            ("gap_floor_rel", t.gap_floor_rel),
            ("seminorm_floor", t.seminorm_floor),
            ("fit_tol", t.fit_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return err(&format!("tolerances.{name}"), format!("tolerance must be positive, got {v}"));
            }
        }
        if self.boundary_samples < 16 {
            return err("boundary_samples", "need at least 16 boundary samples".into());
        }
        match self.directions.as_slice() {
            [] | [_] => {}
            [u, v] => {
                if (u - v).cos().abs() > 1e-9 {
                    return err("directions", "the two directions must be orthogonal".into());
                }
            }
            _ => return err("directions", "give at most two directions".into()),
        }
        if let Err(e) = NonlinearitySpec::new(self.nonlinearity.clone()) {
            return err("nonlinearity", e.to_string());
        }
        Ok(())
    }

    pub fn nonlinearity_spec(&self) -> Result<NonlinearitySpec, CliError> {
        Ok(NonlinearitySpec::new(self.nonlinearity.clone())?)
    }

    pub fn pipeline(&self) -> PipelineConfig {
        let t = &self.tolerances;
        PipelineConfig {
            h: self.h,
            t: self.t,
            a: self.a,
            eta: self.eta,
            frame_angle: self.directions.first().copied().unwrap_or(0.0),
            boundary_samples: self.boundary_samples,
            unu_threshold: t.unu_threshold,
            gap_floor_rel: t.gap_floor_rel,
            seminorm_floor: t.seminorm_floor,
            fit_tol: t.fit_tol,
            solver_tol: t.solver,
            lambda_rel: t.lambda_rel,
            geo_rel: t.geo_rel,
            angle_tol: t.angle,
            bootstrap: self.bootstrap,
            seed: self.seed,
        }
    }

    /// `H_a`, `β` and the harmonic exponent `γ` in the plane for this `a`.
    pub fn harnack_constants(&self, theta: f64) -> Result<HarnackConstants, CliError> {
        Ok(HarnackConstants {
            a: self.a,
            h_a: harnack_constant_harmonic(self.a, 2)?,
            beta: beta(self.a, theta)?,
            gamma: gamma_torsion(self.a, theta, 2)?,
        })
    }

    pub fn load_domains(&self) -> Result<Vec<DomainSpec>, CliError> {
        self.domains.iter().map(|p| load_domain(p)).collect()
    }

    pub fn family(&self) -> Result<Family, CliError> {
        let spec = self.family.as_ref().ok_or_else(|| CliError::validation("no family configured"))?;
        let f = self.nonlinearity_spec()?;
        let pt = |c: &[f64; 2]| Point::new(c[0], c[1]);
        Ok(match spec {
            FamilySpec::Ellipse { a, b, center, rotation } => {
                Family::ellipses(&a.resolve(Some(*b))?, *b, pt(center), *rotation, f)?
            }
            FamilySpec::Disk { radii, center } => Family::disks(&radii.resolve(None)?, pt(center), f)?,
            FamilySpec::Eigen { n, known_center } => {
                let domain = self.load_domains()?.into_iter().next().ok_or_else(|| {
                    CliError::validation("the eigen family needs a domain file")
                })?;
                if n.is_empty() || n.contains(&0) {
                    return Err(CliError::validation("eigen scalings must be positive"));
                }
                Family::eigen(&domain, n, known_center.as_ref().map(pt))
            }
            FamilySpec::Domains => {
                if self.domains.is_empty() {
                    return Err(CliError::validation("the domains family needs domain files"));
                }
                Family::from_domains(
                    self.domains.iter().map(|p| Ok((stem(p), load_domain(p)?))).collect::<Result<Vec<_>, CliError>>()?,
                    f,
                )
            }
        })
    }
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string())
}

pub fn load_domain(path: &Path) -> Result<DomainSpec, CliError> {
    DomainSpec::load(path).map_err(|e| match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        CliError::Io(m) => CliError::Io(format!("{}: {m}", path.display())),
        other => other,
    })
}
