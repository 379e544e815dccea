//! Newton iteration for the implicit time steps.

use crate::error::{param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Stop once the residual ∞-norm is at or below this value.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            tolerance: 1e-12,
            max_iterations: 50,
        }
    }
}

impl NewtonSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return param(format!("Newton tolerance must be positive, got {}", self.tolerance));
        }
        if self.max_iterations == 0 {
            return param("Newton needs at least one iteration");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
}

pub fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// A square nonlinear system `R(v) = 0`.
pub trait NonlinearSystem {
    fn residual(&self, v: &[f64]) -> Vec<f64>;

    /// Solves `J(v) δ = rhs` for the Newton correction.
    fn solve_jacobian(&self, v: &[f64], rhs: &[f64]) -> Result<Vec<f64>>;
}

/// Runs Newton from `guess` until `‖R‖∞ ≤ tolerance`.
pub fn solve(
    system: &impl NonlinearSystem,
    guess: Vec<f64>,
    settings: &NewtonSettings,
) -> Result<(Vec<f64>, NewtonReport)> {
    let mut v = guess;
    let mut iterations = 0;
    loop {
        let r = system.residual(&v);
        let residual = max_norm(&r);
        if !residual.is_finite() {
            return Err(Error::NewtonDivergence { iterations, residual });
        }
        if residual <= settings.tolerance {
            return Ok((v, NewtonReport { iterations, residual }));
        }
        if iterations == settings.max_iterations {
            return Err(Error::NewtonDivergence { iterations, residual });
        }
        let neg: Vec<f64> = r.iter().map(|x| -x).collect();
        let delta = system.solve_jacobian(&v, &neg)?;
        v.iter_mut().zip(&delta).for_each(|(x, d)| *x += d);
        iterations += 1;
    }
}
