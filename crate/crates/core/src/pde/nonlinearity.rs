use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Right-hand side `f` of `Δu + f(u) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `f ≡ 1`.
    Torsion,
    /// `f(u) = lambda u`.
    Linear { lambda: f64 },
    /// Piecewise linear through `(u_k, f_k)` knots, constant beyond the ends.
    Sampled { knots: Vec<(f64, f64)> },
}

/// A nonlinearity together with its Lipschitz constant and value at zero.
#[derive(Clone, Debug, Serialize)]
pub struct NonlinearitySpec {
    pub kind: Nonlinearity,
    pub lipschitz_l: f64,
    pub f0: f64,
}

impl NonlinearitySpec {
    pub fn new(kind: Nonlinearity) -> Result<Self> {
        let (lipschitz_l, f0) = match &kind {
            Nonlinearity::Torsion => (0.0, 1.0),
            Nonlinearity::Linear { lambda } => {
                if !lambda.is_finite() {
                    return Err(invalid("linear coefficient must be finite"));
                }
                (lambda.abs(), 0.0)
            }
            Nonlinearity::Sampled { knots } => {
                if knots.is_empty() || knots.iter().any(|(u, f)| !u.is_finite() || !f.is_finite()) {
                    return Err(invalid("sampled nonlinearity needs finite knots"));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(invalid("sampled knots must have strictly increasing u"));
                }
                let l = knots.windows(2).map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs()).fold(0.0, f64::max);
                (l, sampled(knots, 0.0))
            }
        };
        if f0 < 0.0 {
            return Err(invalid(format!("f(0) = {f0} < 0 is outside the supported regime")));
        }
        Ok(NonlinearitySpec { kind, lipschitz_l, f0 })
    }

    pub fn torsion() -> Self {
        Self::new(Nonlinearity::Torsion).expect("torsion is valid")
    }

    pub fn linear(lambda: f64) -> Result<Self> {
        Self::new(Nonlinearity::Linear { lambda })
    }

    pub fn eval(&self, u: f64) -> f64 {
        match &self.kind {
            Nonlinearity::Torsion => 1.0,
            Nonlinearity::Linear { lambda } => lambda * u,
            Nonlinearity::Sampled { knots } => sampled(knots, u),
        }
    }

    pub fn is_torsion(&self) -> bool {
        matches!(self.kind, Nonlinearity::Torsion)
    }
}

fn sampled(knots: &[(f64, f64)], u: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if u <= first.0 {
        return first.1;
    }
    if u >= last.0 {
        return last.1;
    }
    let k = knots.partition_point(|(x, _)| *x <= u);
    let (x0, f0) = knots[k - 1];
    let (x1, f1) = knots[k];
    f0 + (f1 - f0) * (u - x0) / (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_interpolates_and_bounds_slope() {
        let f = NonlinearitySpec::new(Nonlinearity::Sampled { knots: vec![(0.0, 1.0), (1.0, 3.0), (2.0, 2.0)] }).unwrap();
        assert_eq!(f.f0, 1.0);
        assert_eq!(f.lipschitz_l, 2.0);
        assert!((f.eval(0.5) - 2.0).abs() < 1e-15);
        assert!((f.eval(1.5) - 2.5).abs() < 1e-15);
        assert_eq!(f.eval(5.0), 2.0);
        assert!(NonlinearitySpec::new(Nonlinearity::Sampled { knots: vec![(0.0, -1.0)] }).is_err());
    }
}
