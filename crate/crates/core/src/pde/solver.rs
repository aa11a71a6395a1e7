use std::sync::Arc;

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use serde::Serialize;

use super::{Field, Grid, NonlinearitySpec};
use crate::error::{invalid, Error, Result};

/// Discrete `-Δ` with Shortley–Weller arms and its sparse LU factorization.
pub struct Laplacian {
    diag: Vec<f64>,
    /// Off-diagonal couplings per row: `(column, coefficient)` with the
    /// coefficient entering as `-c u_col`.
    off: Vec<[(usize, f64); 4]>,
    lu: Lu<usize, f64>,
}

impl Laplacian {
    pub fn new(grid: &Grid) -> Result<Self> {
        let h = grid.h;
        let n = grid.len();
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n);
        let mut triplets = Vec::with_capacity(5 * n);
        for (k, s) in grid.stencils.iter().enumerate() {
            let [he, hw, hn, hs] = s.cut.map(|c| c * h);
            let coef = [
                2.0 / (he * (he + hw)),
                2.0 / (hw * (he + hw)),
                2.0 / (hn * (hn + hs)),
                2.0 / (hs * (hn + hs)),
            ];
            let d: f64 = coef.iter().sum();
            diag.push(d);
            triplets.push(Triplet::new(k, k, d));
            let mut row = [(usize::MAX, 0.0); 4];
            for a in 0..4 {
                if let Some(nb) = s.neighbor[a] {
                    triplets.push(Triplet::new(k, nb, -coef[a]));
                    row[a] = (nb, coef[a]);
                }
            }
            off.push(row);
        }
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        let lu = mat.sp_lu().map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        Ok(Laplacian { diag, off, lu })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len())
            .map(|k| {
                let mut v = self.diag[k] * u[k];
                for &(c, a) in &self.off[k] {
                    if c != usize::MAX {
                        v -= a * u[c];
                    }
                }
                v
            })
            .collect()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Col::<f64>::from_fn(rhs.len(), |i| rhs[i]);
        let x = self.lu.solve(&b);
        (0..rhs.len()).map(|i| x[i]).collect()
    }

    /// `max_i |(A u - f(u))_i| / a_ii`: the residual in units of `u`.
    pub fn scaled_residual(&self, u: &[f64], f: &NonlinearitySpec) -> f64 {
        let au = self.apply(u);
        au.iter()
            .zip(u)
            .zip(&self.diag)
            .map(|((a, v), d)| ((a - f.eval(*v)) / d).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue by inverse iteration from the constant vector.
    /// Returns `(lambda, phi)` with `max phi = 1`.
    pub fn principal_eigen(&self, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>)> {
        let mut v = vec![1.0; self.len()];
        let mut lambda = 0.0;
        let mut history = Vec::new();
        for it in 0..max_iter {
            let w = self.solve(&v);
            let norm = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if !(norm > 0.0) {
                return Err(Error::LinearSolver("inverse iteration collapsed".into()));
            }
            let next = 1.0 / norm;
            v = w.into_iter().map(|x| x / norm).collect();
            let change = (next - lambda).abs() / next;
            history.push(change);
            lambda = next;
            if it > 2 && change < tol {
                return Ok((lambda, v));
            }
        }
        Err(Error::NoConvergence { iterations: max_iter, residuals: history })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    /// Final scaled residual `max |A u - f(u)| / a_ii`.
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub damping: f64,
    /// Discrete principal eigenvalue, when it was needed.
    pub lambda1_h: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Starting iterate (one value per unknown). Defaults to zero.
    pub seed: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter: 500, seed: None }
    }
}

/// Solves `Δu + f(u) = 0` in the domain, `u = 0` on the boundary.
///
/// Picard iteration `u <- (1-ω) u + ω A^{-1} f(u)` with `A = -Δ_h`; `ω = 1/2`
/// once the Lipschitz constant of `f` is within 10% of the discrete principal
/// eigenvalue, `ω = 1` otherwise. The torsion problem is a single solve.
pub fn solve_semilinear(grid: &Arc<Grid>, f: &NonlinearitySpec, opts: &SolverOptions) -> Result<Field> {
    if !(opts.tol > 0.0) {
        return Err(invalid("solver tolerance must be positive"));
    }
    let lap = Laplacian::new(grid)?;
    let n = grid.len();
    let mut u = match &opts.seed {
        Some(s) if s.len() == n => s.clone(),
        Some(s) => return Err(invalid(format!("seed has {} values for {n} unknowns", s.len()))),
        None => vec![0.0; n],
    };
    let mut lambda1_h = None;
    let mut damping = 1.0;
    if f.lipschitz_l > 0.0 {
        let (l1, _) = lap.principal_eigen(1e-10, 2000)?;
        lambda1_h = Some(l1);
        if f.lipschitz_l >= 0.9 * l1 {
            damping = 0.5;
        }
    }
    let mut history = vec![lap.scaled_residual(&u, f)];
    let mut iterations = 0;
    while history[history.len() - 1] > opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::NoConvergence { iterations, residuals: history });
        }
        let rhs: Vec<f64> = u.iter().map(|&v| f.eval(v)).collect();
        let next = lap.solve(&rhs);
        for (a, b) in u.iter_mut().zip(next) {
            *a = (1.0 - damping) * *a + damping * b;
        }
        iterations += 1;
        history.push(lap.scaled_residual(&u, f));
    }
    check_positive(&u)?;
    let report = SolveReport {
        residual: history[history.len() - 1],
        iterations,
        residual_history: history,
        damping,
        lambda1_h,
    };
    Ok(Field::new(grid.clone(), u, f.clone(), report))
}

fn check_positive(u: &[f64]) -> Result<()> {
    let max = u.iter().cloned().fold(0.0, f64::max);
    let min = u.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -10.0 * 1e-12 * max {
        return Err(Error::PositivityViolated { min });
    }
    Ok(())
}

/// `φ₁ / n` where `φ₁` is the discrete principal eigenfunction with
/// `max φ₁ = 1`; solves `Δu + λ₁ u = 0` with `u = 0` on the boundary.
pub fn eigen_demo(grid: &Arc<Grid>, n: u32) -> Result<Field> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let lap = Laplacian::new(grid)?;
    let (lambda, phi) = lap.principal_eigen(1e-13, 5000)?;
    let u: Vec<f64> = phi.iter().map(|v| v / n as f64).collect();
    check_positive(&u)?;
    let f = NonlinearitySpec::linear(lambda)?;
    let residual = lap.scaled_residual(&u, &f);
    let report = SolveReport { residual, iterations: 0, residual_history: vec![residual], damping: 1.0, lambda1_h: Some(lambda) };
    Ok(Field::new(grid.clone(), u, f, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainSpec, Point};
    use crate::pde::discretize;

    #[test]
    fn quadratic_is_exact_on_a_disk() {
        let disk = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
        let grid = Arc::new(discretize(&disk, 1.0 / 16.0).unwrap());
        let field = solve_semilinear(&grid, &NonlinearitySpec::torsion(), &SolverOptions::default()).unwrap();
        for k in 0..grid.len() {
            let p = grid.position(k);
            assert!((field.u[k] - (1.0 - p.norm_squared()) / 4.0).abs() < 1e-12);
        }
        assert_eq!(field.report.iterations, 1);
    }

    #[test]
    fn homogeneous_linear_problem_stays_zero() {
        let disk = DomainSpec::disk(Point::zeros(), 1.0).unwrap();
        let grid = Arc::new(discretize(&disk, 1.0 / 16.0).unwrap());
        let f = NonlinearitySpec::linear(2.0).unwrap();
        let field = solve_semilinear(&grid, &f, &SolverOptions::default()).unwrap();
        assert!(field.u.iter().all(|&v| v == 0.0));
    }
}
