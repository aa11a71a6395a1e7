use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `K̲ σ > C δ^{-γ} [u_ν] + K̄ δ`, evaluated as written (strict).
pub fn condition_ksigma(
    k_lower: f64,
    k_upper: f64,
    c: f64,
    gamma: f64,
    delta: f64,
    sigma: f64,
    seminorm: f64,
) -> Result<bool> {
    if !(k_lower > 0.0 && k_upper > 0.0 && c > 0.0 && gamma > 0.0 && delta > 0.0 && sigma > 0.0) || !(seminorm >= 0.0) {
        return Err(invalid("condition inputs must be positive (seminorm nonnegative)"));
    }
    Ok(k_lower * sigma > c * delta.powf(-gamma) * seminorm + k_upper * delta)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Parameters {
    pub delta: f64,
    pub sigma: f64,
    /// Largest seminorm for which `σ ≤ r_Ω/16`.
    pub eps: f64,
    /// `σ / [u_ν]^{1/(γ+1)}`.
    pub sigma_constant: f64,
}

/// `δ = (C/K̄)^{1/(γ+1)} [u_ν]^{1/(γ+1)}`, `σ = 4 K̄ δ / K̲` and
/// `ε = (K̄/C) (r_Ω K̲ / (64 K̄))^{γ+1}`.
pub fn choose_parameters(
    c: f64,
    k_lower: f64,
    k_upper: f64,
    gamma: f64,
    seminorm: f64,
    r_omega: f64,
) -> Result<Parameters> {
    if !(c > 0.0 && k_lower > 0.0 && k_upper > 0.0 && gamma > 0.0 && r_omega > 0.0 && seminorm > 0.0) {
        return Err(invalid("parameter inputs must be positive"));
    }
    let p = 1.0 / (gamma + 1.0);
    let eps = k_upper / c * (r_omega * k_lower / (64.0 * k_upper)).powf(gamma + 1.0);
    if seminorm > eps {
        return Err(Error::OutsideRegime { seminorm, eps });
    }
    let delta = (c / k_upper).powf(p) * seminorm.powf(p);
    let sigma = 4.0 * k_upper / k_lower * delta;
    let sigma_constant = sigma / seminorm.powf(p);
    if !(delta < sigma) {
        return Err(invalid(format!("delta {delta} is not below sigma {sigma}")));
    }
    Ok(Parameters { delta, sigma, eps, sigma_constant })
}

/// `1 / (1 + γ)`.
pub fn tau_theory(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    Ok(1.0 / (1.0 + gamma))
}

/// `1 + N sqrt(1 + (2 d/r)²)`; the torsion exponent is `1/(τ + η)`.
pub fn tau_torsion(n: u32, d_omega: f64, r_omega: f64) -> Result<f64> {
    if n == 0 || !(d_omega > 0.0 && r_omega > 0.0) {
        return Err(invalid("need N >= 1 and positive d_Omega, r_Omega"));
    }
    let q = 2.0 * d_omega / r_omega;
    Ok(1.0 + n as f64 * (1.0 + q * q).sqrt())
}

/// `sqrt((2N² + N - 5/2) / N)`: the largest `d/r` at which the torsion
/// exponent beats the competing estimate.
pub fn bnst_crossover(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("N must be at least 2, got {n}")));
    }
    let n = n as f64;
    Ok(((2.0 * n * n + n - 2.5) / n).sqrt())
}
