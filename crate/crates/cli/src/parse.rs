//! Parsers for command-line and config values.

use serrin_core::pde::{Nonlinearity, NonlinearitySpec};

use crate::CliError;

/// Angle with an explicit `deg` or `rad` suffix, returned in radians.
pub fn angle(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let (num, deg) = if let Some(v) = s.strip_suffix("deg") {
        (v, true)
    } else if let Some(v) = s.strip_suffix("rad") {
        (v, false)
    } else {
        return Err(CliError::validation(format!("angle {s:?} needs a 'deg' or 'rad' suffix")));
    };
    let v: f64 = num.trim().parse().map_err(|_| CliError::validation(format!("bad angle {s:?}")))?;
    if !v.is_finite() {
        return Err(CliError::validation(format!("bad angle {s:?}")));
    }
    Ok(if deg { v.to_radians() } else { v })
}

/// A positive number, written plainly or as a fraction `p/q`.
pub fn fraction(s: &str) -> Result<f64, CliError> {
    let bad = || CliError::validation(format!("expected a positive number or p/q, got {s:?}"));
    let v = match s.trim().split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            p / q
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if !(v > 0.0 && v.is_finite()) {
        return Err(bad());
    }
    Ok(v)
}

/// `torsion` or `linear:λ`.
pub fn nonlinearity(s: &str) -> Result<NonlinearitySpec, CliError> {
    let s = s.trim();
    let kind = if s == "torsion" {
        Nonlinearity::Torsion
    } else if let Some(l) = s.strip_prefix("linear:") {
        let lambda = l.trim().parse().map_err(|_| CliError::validation(format!("bad linear coefficient in {s:?}")))?;
        Nonlinearity::Linear { lambda }
    } else {
        return Err(CliError::validation(format!("nonlinearity must be 'torsion' or 'linear:<lambda>', got {s:?}")));
    };
    Ok(NonlinearitySpec::new(kind)?)
}

/// A comma list `v1,v2,...` or a sweep `lo:hi:count`.
///
/// A sweep spaces `value - base` geometrically between its ends, so
/// `1.01:1.2:5` with base 1 gives excesses from 0.01 to 0.2 evenly in log
/// scale. With `base = None` the spacing is linear.
pub fn values(s: &str, base: Option<f64>) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::validation(format!("expected v1,v2,... or lo:hi:count, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let out = match parts.as_slice() {
        [lo, hi, n] => {
            let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            if n < 2 || !(hi > lo) {
                return Err(CliError::validation(format!("sweep {s:?} needs hi > lo and count >= 2")));
            }
            let t = |k: usize| k as f64 / (n - 1) as f64;
            match base {
                Some(b) => {
                    if !(lo > b) {
                        return Err(CliError::validation(format!("sweep {s:?} must start above {b}")));
                    }
                    let (l, h) = ((lo - b).ln(), (hi - b).ln());
                    (0..n).map(|k| if k == n - 1 { hi } else if k == 0 { lo } else { b + (l + (h - l) * t(k)).exp() }).collect()
                }
                None => (0..n).map(|k| lo + (hi - lo) * t(k)).collect(),
            }
        }
        [list] => list.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(bad()),
    };
    if out.is_empty() || out.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles_need_a_suffix() {
        assert!((angle("30deg").unwrap() - std::f64::consts::FRAC_PI_6).abs() < 1e-15);
        assert_eq!(angle("0.5rad").unwrap(), 0.5);
        assert_eq!(angle(" -90 deg").unwrap(), -std::f64::consts::FRAC_PI_2);
        assert!(angle("30").is_err());
        assert!(angle("xdeg").is_err());
    }

    #[test]
    fn fractions() {
        assert_eq!(fraction("1/128").unwrap(), 1.0 / 128.0);
        assert_eq!(fraction("0.25").unwrap(), 0.25);
        assert!(fraction("1/0").is_err());
        assert!(fraction("-1").is_err());
        assert!(fraction("a/b").is_err());
    }

    #[test]
    fn nonlinearities() {
        assert!(nonlinearity("torsion").unwrap().is_torsion());
        assert_eq!(nonlinearity("linear:2.5").unwrap().lipschitz_l, 2.5);
        assert!(nonlinearity("cubic").is_err());
    }

    #[test]
    fn sweeps() {
        let v = values("1.01:1.2:5", Some(1.0)).unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!((v[0], v[4]), (1.01, 1.2));
        for w in v.windows(2) {
            assert!(((w[1] - 1.0) / (w[0] - 1.0) - (20f64).powf(0.25)).abs() < 1e-12);
        }
        assert_eq!(values("0:1:3", None).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(values("1.01,1.02", None).unwrap(), vec![1.01, 1.02]);
        assert!(values("1:0:3", None).is_err());
        assert!(values("1:2:3:4", None).is_err());
    }
}
