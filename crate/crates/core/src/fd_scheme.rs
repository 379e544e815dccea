//! Energy-preserving finite difference scheme on a uniform grid.
//!
//! With central differences `δ1`, `δ2` and the midpoint `m = (u⁽ⁿ⁾ + u⁽ⁿ⁺¹⁾)/2`,
//!
//! ```text
//! δ2 (u⁽ⁿ⁺¹⁾ - u⁽ⁿ⁾)/Δt = -(δ2 m)(δ1 m) - δ1(m δ2 m),   k = 1..N
//! ```
//!
//! with `u_0 = 0`, `u_{-1} = u_1`, `u_{N+1} = u_{N-1}` and
//! `u_{N+2} = 2u_N - u_{N-2}`. Ghost values are eliminated before Newton, so
//! the unknowns are `u_1..u_N`.
//!
//! The residual handed to Newton is the equation multiplied by `Δt Δx`, which
//! puts it on the same scale as the Galerkin residual `A(v - u) - Δt g1`.

use crate::banded::BandedMatrix;
use crate::error::{param, Result};
use crate::mesh::Mesh;
use crate::newton::{self, NewtonReport, NewtonSettings, NonlinearSystem};

/// Grid function `u_0..u_N` on a uniform grid, with `u_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdState {
    values: Vec<f64>,
    dx: f64,
    dt: f64,
}

impl FdState {
    pub fn new(values: Vec<f64>, dx: f64, dt: f64) -> Result<Self> {
        if values.len() < 4 {
            return param(format!("need at least 4 grid values, got {}", values.len()));
        }
        if values[0] != 0.0 {
            return param(format!("boundary value u_0 must be 0, got {}", values[0]));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return param("grid values must be finite");
        }
        if !(dx.is_finite() && dx > 0.0) {
            return param(format!("grid spacing must be positive, got {dx}"));
        }
        if !(dt.is_finite() && dt != 0.0) {
            return param(format!("time step must be finite and nonzero, got {dt}"));
        }
        Ok(FdState { values, dx, dt })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `u_1..u_N`.
    pub fn unknowns(&self) -> &[f64] {
        &self.values[1..]
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Sparse linear combination of the unknowns `u_1..u_N` (index `j` ↔ `u_{j+1}`).
type Sparse = Vec<(usize, f64)>;

fn dot(s: &Sparse, v: &[f64]) -> f64 {
    s.iter().map(|&(j, c)| c * v[j]).sum()
}

fn combine(terms: &[(f64, &Sparse)]) -> Sparse {
    let mut out: Sparse = Vec::new();
    for &(scale, s) in terms {
        for &(j, c) in s {
            match out.iter_mut().find(|(k, _)| *k == j) {
                Some(entry) => entry.1 += scale * c,
                None => out.push((j, scale * c)),
            }
        }
    }
    out.retain(|&(_, c)| c != 0.0);
    out
}

/// Ghost-eliminated difference operators for `N` intervals.
#[derive(Debug, Clone)]
struct Stencils {
    n: usize,
    dx: f64,
    /// `value[k + 1]` expresses `u_k` for `k = -1..=N+2`.
    value: Vec<Sparse>,
    /// `second[k]` is `δ2 u_k` for `k = 0..=N+1`.
    second: Vec<Sparse>,
    /// `first[k]` is `δ1 u_k` for `k = 0..=N` (entry 0 unused).
    first: Vec<Sparse>,
}

impl Stencils {
    fn new(n: usize, dx: f64) -> Self {
        let unit = |k: usize| -> Sparse { vec![(k - 1, 1.0)] };
        let mut value: Vec<Sparse> = Vec::with_capacity(n + 4);
        value.push(unit(1)); // u_{-1} = u_1
        value.push(Vec::new()); // u_0 = 0
        for k in 1..=n {
            value.push(unit(k));
        }
        value.push(unit(n - 1)); // u_{N+1} = u_{N-1}
        let ghost = combine(&[(2.0, &unit(n)), (-1.0, &unit(n - 2))]);
        value.push(ghost); // u_{N+2} = 2u_N - u_{N-2}

        let v = |k: usize| &value[k + 1];
        let second: Vec<Sparse> = (0..=n + 1)
            .map(|k| {
                let below = &value[k];
                combine(&[(1.0, v(k + 1)), (-2.0, v(k)), (1.0, below)])
                    .into_iter()
                    .map(|(j, c)| (j, c / (dx * dx)))
                    .collect()
            })
            .collect();
        let first: Vec<Sparse> = (0..=n)
            .map(|k| {
                combine(&[(1.0, v(k + 1)), (-1.0, &value[k])])
                    .into_iter()
                    .map(|(j, c)| (j, c / (2.0 * dx)))
                    .collect()
            })
            .collect();
        Stencils {
            n,
            dx,
            value,
            second,
            first,
        }
    }

    fn val(&self, k: usize) -> &Sparse {
        &self.value[k + 1]
    }

    /// `(δ2 m)(δ1 m) + δ1(m δ2 m)` at `k = 1..N`.
    fn nonlinear(&self, m: &[f64]) -> Vec<f64> {
        let d2: Vec<f64> = self.second.iter().map(|s| dot(s, m)).collect();
        (1..=self.n)
            .map(|k| {
                let flux_right = dot(self.val(k + 1), m) * d2[k + 1];
                let flux_left = dot(self.val(k - 1), m) * d2[k - 1];
                d2[k] * dot(&self.first[k], m) + (flux_right - flux_left) / (2.0 * self.dx)
            })
            .collect()
    }

    /// Gradient of `nonlinear` row `k` with respect to `m`.
    fn nonlinear_gradient(&self, m: &[f64], k: usize) -> Sparse {
        let d2 = |i: usize| dot(&self.second[i], m);
        let inv = 1.0 / (2.0 * self.dx);
        combine(&[
            (d2(k), &self.first[k]),
            (dot(&self.first[k], m), &self.second[k]),
            (inv * dot(self.val(k + 1), m), &self.second[k + 1]),
            (inv * d2(k + 1), self.val(k + 1)),
            (-inv * dot(self.val(k - 1), m), &self.second[k - 1]),
            (-inv * d2(k - 1), self.val(k - 1)),
        ])
    }
}

/// One midpoint step of the finite difference scheme as a nonlinear system.
struct FdStep<'a> {
    stencils: &'a Stencils,
    dt: f64,
    previous: &'a [f64],
}

impl FdStep<'_> {
    fn midpoint(&self, v: &[f64]) -> Vec<f64> {
        self.previous.iter().zip(v).map(|(a, b)| 0.5 * (a + b)).collect()
    }
}

impl NonlinearSystem for FdStep<'_> {
    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let s = self.stencils;
        let m = self.midpoint(v);
        let diff: Vec<f64> = v.iter().zip(self.previous).map(|(a, b)| a - b).collect();
        let p = s.nonlinear(&m);
        (1..=s.n)
            .map(|k| s.dx * (dot(&s.second[k], &diff) + self.dt * p[k - 1]))
            .collect()
    }

    fn solve_jacobian(&self, v: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let s = self.stencils;
        let m = self.midpoint(v);
        let mut triplets = Vec::new();
        for k in 1..=s.n {
            let row = combine(&[
                (s.dx, &s.second[k]),
                (0.5 * self.dt * s.dx, &s.nonlinear_gradient(&m, k)),
            ]);
            triplets.extend(row.into_iter().map(|(j, c)| (k - 1, j, c)));
        }
        let jac = BandedMatrix::from_triplets(s.n, &triplets);
        Ok(jac.lu()?.solve(rhs))
    }
}

/// Finite difference stepper for a fixed grid and time step.
#[derive(Debug, Clone)]
pub struct FdScheme {
    stencils: Stencils,
    dt: f64,
    newton: NewtonSettings,
}

impl FdScheme {
    pub fn new(n: usize, dx: f64, dt: f64, newton: NewtonSettings) -> Result<Self> {
        if n < 3 {
            return param(format!("need at least 3 grid intervals, got {n}"));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return param(format!("grid spacing must be positive, got {dx}"));
        }
        if !(dt.is_finite() && dt != 0.0) {
            return param(format!("time step must be finite and nonzero, got {dt}"));
        }
        newton.validate()?;
        Ok(FdScheme {
            stencils: Stencils::new(n, dx),
            dt,
            newton,
        })
    }

    /// Builds the scheme on a mesh, which must be uniform.
    pub fn on_mesh(mesh: &Mesh, dt: f64, newton: NewtonSettings) -> Result<Self> {
        let Some(dx) = mesh.uniform_spacing() else {
            return param("the finite difference scheme requires a uniform mesh");
        };
        FdScheme::new(mesh.elements(), dx, dt, newton)
    }

    pub fn intervals(&self) -> usize {
        self.stencils.n
    }

    pub fn dx(&self) -> f64 {
        self.stencils.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Scaled residual `Δx (δ2(v - u) + Δt P(m))` on unknowns `u_1..u_N`.
    pub fn residual(&self, previous: &[f64], next: &[f64]) -> Vec<f64> {
        FdStep {
            stencils: &self.stencils,
            dt: self.dt,
            previous,
        }
        .residual(next)
    }

    /// Advances the unknowns `u_1..u_N` by one step.
    pub fn step_unknowns(&self, previous: &[f64]) -> Result<(Vec<f64>, NewtonReport)> {
        assert_eq!(previous.len(), self.stencils.n);
        let system = FdStep {
            stencils: &self.stencils,
            dt: self.dt,
            previous,
        };
        newton::solve(&system, previous.to_vec(), &self.newton)
    }

    /// `fd_step`: advances a full grid state.
    pub fn step(&self, state: &FdState) -> Result<(FdState, NewtonReport)> {
        if state.values.len() != self.stencils.n + 1 {
            return param("state does not match the grid size");
        }
        if (state.dx - self.dx()).abs() > 1e-12 * self.dx() || state.dt != self.dt {
            return param("state grid spacing or time step does not match the scheme");
        }
        let (next, report) = self.step_unknowns(state.unknowns())?;
        let mut values = Vec::with_capacity(next.len() + 1);
        values.push(0.0);
        values.extend(next);
        Ok((
            FdState {
                values,
                dx: state.dx,
                dt: state.dt,
            },
            report,
        ))
    }
}

/// Grid value at `k = -1..=N+1` with the ghost rules applied.
fn ghosted(values: &[f64], k: isize) -> f64 {
    let n = values.len() as isize - 1;
    let idx = if k == -1 {
        1
    } else if k == n + 1 {
        n - 1
    } else {
        k
    };
    values[idx as usize]
}

/// `(δ⁺u_k)² + (δ⁻u_k)²` for `k = 0..=N`.
fn squared_differences(values: &[f64], dx: f64) -> impl Iterator<Item = f64> + '_ {
    (0..values.len() as isize).map(move |k| {
        let fwd = (ghosted(values, k + 1) - ghosted(values, k)) / dx;
        let bwd = (ghosted(values, k) - ghosted(values, k - 1)) / dx;
        fwd * fwd + bwd * bwd
    })
}

/// Trapezoidal sum `Δx Σ'' f_k`.
fn trapezoid(dx: f64, f: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = f.collect();
    let n = terms.len() - 1;
    dx * terms
        .iter()
        .enumerate()
        .map(|(k, v)| if k == 0 || k == n { 0.5 * v } else { *v })
        .sum::<f64>()
}

/// Discrete energy `Σ'' Δx ((δ⁺u)² + (δ⁻u)²)/4` on grid values `u_0..u_N`.
pub fn hamiltonian(values: &[f64], dx: f64) -> f64 {
    trapezoid(dx, squared_differences(values, dx).map(|s| 0.25 * s))
}

/// Trapezoidal approximation of `½ ∫ u u_x²` using the same averaged squares.
pub fn second_hamiltonian(values: &[f64], dx: f64) -> f64 {
    trapezoid(
        dx,
        squared_differences(values, dx)
            .zip(values)
            .map(|(s, u)| 0.25 * u * s),
    )
}

pub fn fd_hamiltonian(state: &FdState) -> f64 {
    hamiltonian(&state.values, state.dx)
}

/// Central difference `u_x` at every node, ghost rules at the ends.
pub fn central_slopes(values: &[f64], dx: f64) -> Vec<f64> {
    (0..values.len() as isize)
        .map(|k| (ghosted(values, k + 1) - ghosted(values, k - 1)) / (2.0 * dx))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::ExactSolution;

    #[test]
    fn hamiltonian_of_ramp() {
        let (l, n) = (3.0, 12);
        let dx = 2.0 * l / n as f64;
        let ramp: Vec<f64> = (0..=n).map(|k| k as f64 * dx).collect();
        // direct summation: every squared difference is 1 after ghosting
        let mut direct = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            direct += w * dx * 0.25 * 2.0;
        }
        assert!((hamiltonian(&ramp, dx) - direct).abs() < 1e-14);
        assert!((hamiltonian(&ramp, dx) - l).abs() < 1e-13);
        let scaled: Vec<f64> = ramp.iter().map(|v| -3.0 * v).collect();
        assert!((hamiltonian(&scaled, dx) - 9.0 * l).abs() < 1e-12);
        assert_eq!(hamiltonian(&vec![0.0; 13], dx), 0.0);
    }

    #[test]
    fn zero_is_fixed_point() {
        let scheme = FdScheme::new(10, 0.1, 0.01, NewtonSettings::default()).unwrap();
        let state = FdState::new(vec![0.0; 11], 0.1, 0.01).unwrap();
        let (next, report) = scheme.step(&state).unwrap();
        assert!(next.values().iter().all(|&v| v == 0.0));
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn one_step_conserves_energy() {
        let exact = ExactSolution::new(6.0).unwrap();
        let n = 8;
        let dx = 12.0 / n as f64;
        let values: Vec<f64> = (0..=n)
            .map(|k| exact.u(-6.0 + k as f64 * dx, 0.0).unwrap())
            .collect();
        let state = FdState::new(values, dx, 0.01).unwrap();
        let scheme = FdScheme::new(n, dx, 0.01, NewtonSettings::default()).unwrap();
        let (next, _) = scheme.step(&state).unwrap();
        assert!((fd_hamiltonian(&next) - fd_hamiltonian(&state)).abs() < 1e-11);
        let r = scheme.residual(state.unknowns(), next.unknowns());
        assert!(newton::max_norm(&r) <= 1e-12);
    }

    #[test]
    fn state_validation() {
        assert!(FdState::new(vec![1.0, 0.0, 0.0, 0.0], 0.1, 0.01).is_err());
        assert!(FdState::new(vec![0.0, 0.0, 0.0], 0.1, 0.01).is_err());
        assert!(FdState::new(vec![0.0, f64::NAN, 0.0, 0.0], 0.1, 0.01).is_err());
        assert!(FdState::new(vec![0.0; 4], 0.0, 0.01).is_err());
    }

    #[test]
    fn rejects_non_uniform_mesh() {
        let mesh = Mesh::graded(6.0, 40, (0.0, 3.0), 0.5).unwrap();
        assert!(FdScheme::on_mesh(&mesh, 0.01, NewtonSettings::default()).is_err());
    }

    #[test]
    fn central_slopes_vanish_at_ends() {
        let values = [0.0, 0.3, 0.5, 0.6, 0.65];
        let s = central_slopes(&values, 0.5);
        assert_eq!(s[0], 0.0);
        assert_eq!(s[4], 0.0);
        assert!((s[2] - 0.3).abs() < 1e-15);
    }
}
