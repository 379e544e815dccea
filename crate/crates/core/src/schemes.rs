//! Time steppers and trajectory driver.
//!
//! Both Galerkin schemes advance `u ∈ X1` with a reduced nonlinear system of
//! size `N`:
//!
//! ```text
//! Galerkin1: A (u⁺ - u) = Δt g1(m, q(m)),   q(m) = -B⁻¹ Cᵀ m
//! Galerkin2: D (u⁺ - u) = Δt g2(m, r(m)),   r(m) = D⁻ᵀ A m
//! ```
//!
//! with `m = (u + u⁺)/2`; the Euler references use the Galerkin1 operators with
//! `m = u` (explicit) or `m = u⁺` (implicit).
//!
//! The auxiliary map makes the reduced Jacobian dense. Each Newton correction
//! `δ` is therefore obtained from the equivalent sparse system in `(δ, w)`
//! with `w = M δ` kept as a second unknown, interleaved so that the combined
//! matrix is banded with small bandwidth:
//!
//! ```text
//! ⎡ L - θΔt ∂g/∂u   -θΔt ∂g/∂w ⎤ ⎡δ⎤   ⎡-R⎤
//! ⎣      K                P    ⎦ ⎣w⎦ = ⎣ 0⎦ ,    K δ + P w = 0  ⇔  w = M δ
//! ```

use std::str::FromStr;
use std::sync::Arc;

use crate::banded::{BandedCholesky, BandedMatrix};
use crate::error::{param, Error, Result};
use crate::fd_scheme::{self, FdScheme};
use crate::fem::{self, CurvatureMap, LinearMap, SlopeMap, Space};
use crate::mesh::Mesh;
use crate::newton::{self, NewtonReport, NewtonSettings, NonlinearSystem};
use crate::reference::ExactSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Fd,
    Galerkin1,
    Galerkin2,
    EulerExplicit,
    EulerImplicit,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::Fd,
        SchemeKind::Galerkin1,
        SchemeKind::Galerkin2,
        SchemeKind::EulerExplicit,
        SchemeKind::EulerImplicit,
    ];

    /// Short command-line name.
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Fd => "fd",
            SchemeKind::Galerkin1 => "g1",
            SchemeKind::Galerkin2 => "g2",
            SchemeKind::EulerExplicit => "euler-exp",
            SchemeKind::EulerImplicit => "euler-imp",
        }
    }

    /// Whether the scheme conserves its discrete energy.
    pub fn is_conservative(self) -> bool {
        matches!(self, SchemeKind::Fd | SchemeKind::Galerkin1 | SchemeKind::Galerkin2)
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fd" => Ok(SchemeKind::Fd),
            "g1" | "galerkin1" => Ok(SchemeKind::Galerkin1),
            "g2" | "galerkin2" => Ok(SchemeKind::Galerkin2),
            "euler-exp" | "euler_explicit" => Ok(SchemeKind::EulerExplicit),
            "euler-imp" | "euler_implicit" => Ok(SchemeKind::EulerImplicit),
            other => param(format!("unknown scheme {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub dt: f64,
    pub t_end: f64,
    pub newton: NewtonSettings,
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind, dt: f64, t_end: f64) -> Self {
        SchemeConfig {
            kind,
            dt,
            t_end,
            newton: NewtonSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return param(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return param(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.dt > self.t_end {
            return param(format!("dt = {} exceeds t_end = {}", self.dt, self.t_end));
        }
        self.newton.validate()
    }

    /// `⌈t_end / dt⌉`, ignoring round-off just above an integer.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }
}

/// Outcome of a single step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub dofs: Vec<f64>,
    pub newton_iterations: usize,
}

/// Derivative profiles of a state, one value per mesh node.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeProfile {
    /// Slope of the element to the right of each node (left for the last node).
    pub element: Vec<f64>,
    /// Nodal derivative recovered by the scheme's own operators.
    pub recovered: Vec<f64>,
}

/// A discretization that advances the dofs `u(x_1)..u(x_N)` in time.
///
/// Every scheme here pins `u(x_0) = 0`, so all of them share the same dof
/// layout as `X1`.
pub trait TimeStepper: Send + Sync {
    fn kind(&self) -> SchemeKind;
    fn mesh(&self) -> &Arc<Mesh>;
    fn dt(&self) -> f64;
    fn step(&self, dofs: &[f64]) -> Result<StepOutcome>;
    /// The scheme's own discrete `H1`.
    fn energy(&self, dofs: &[f64]) -> f64;
    fn second_energy(&self, dofs: &[f64]) -> f64;
    fn derivatives(&self, dofs: &[f64]) -> DerivativeProfile;

    fn nodal_values(&self, dofs: &[f64]) -> Vec<f64> {
        fem::nodal_values(Space::X1, dofs)
    }

    /// Interpolates initial data that vanishes at `x = -L`.
    fn initial_dofs(&self, f: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
        Ok(fem::interpolate(f, self.mesh().clone(), Space::X1)?.into_values())
    }
}

fn element_profile(mesh: &Mesh, dofs: &[f64]) -> Vec<f64> {
    let slopes = fem::element_slopes(mesh, Space::X1, dofs);
    let mut out = slopes.clone();
    out.push(*slopes.last().unwrap());
    out
}

/// Nodal average of the two adjacent element slopes.
fn averaged_slopes(mesh: &Mesh, dofs: &[f64]) -> Vec<f64> {
    let s = fem::element_slopes(mesh, Space::X1, dofs);
    let n = s.len();
    (0..=n)
        .map(|k| match k {
            0 => s[0],
            k if k == n => s[n - 1],
            k => 0.5 * (s[k - 1] + s[k]),
        })
        .collect()
}

/// The pieces that distinguish the two Galerkin formulations.
trait Formulation: Send + Sync {
    /// Left-hand matrix `L` (`A` or `D`).
    fn lhs(&self) -> &BandedMatrix;
    fn solve_lhs(&self, rhs: &[f64]) -> Result<Vec<f64>>;
    fn auxiliary(&self, m: &[f64]) -> Vec<f64>;
    fn nonlinear(&self, mesh: &Mesh, m: &[f64], w: &[f64]) -> Vec<f64>;
    fn partials(&self, mesh: &Mesh, m: &[f64], w: &[f64]) -> (BandedMatrix, BandedMatrix);
    /// `(K, P)` with `K δ + P w = 0` equivalent to `w = M δ`.
    fn constraint(&self) -> (&BandedMatrix, &BandedMatrix);
}

struct CurvatureForm {
    stiffness: BandedMatrix,
    stiffness_factor: BandedCholesky,
    map: CurvatureMap,
    /// `Cᵀ`
    coupling_t: BandedMatrix,
    mass: BandedMatrix,
}

impl CurvatureForm {
    fn new(mesh: &Mesh) -> Result<Self> {
        let stiffness = fem::assemble_a(mesh);
        Ok(CurvatureForm {
            stiffness_factor: stiffness.cholesky()?,
            stiffness,
            map: CurvatureMap::new(mesh)?,
            coupling_t: fem::assemble_c(mesh).transpose(),
            mass: fem::assemble_b(mesh),
        })
    }
}

impl Formulation for CurvatureForm {
    fn lhs(&self) -> &BandedMatrix {
        &self.stiffness
    }

    fn solve_lhs(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.stiffness_factor.solve(rhs))
    }

    fn auxiliary(&self, m: &[f64]) -> Vec<f64> {
        self.map.apply(m)
    }

    fn nonlinear(&self, mesh: &Mesh, m: &[f64], w: &[f64]) -> Vec<f64> {
        fem::g1(mesh, m, w)
    }

    fn partials(&self, mesh: &Mesh, m: &[f64], w: &[f64]) -> (BandedMatrix, BandedMatrix) {
        fem::g1_partials(mesh, m, w)
    }

    fn constraint(&self) -> (&BandedMatrix, &BandedMatrix) {
        // B q + Cᵀ u = 0
        (&self.coupling_t, &self.mass)
    }
}

struct SlopeForm {
    mixed: BandedMatrix,
    map: SlopeMap,
    neg_stiffness: BandedMatrix,
    mixed_t: BandedMatrix,
}

impl SlopeForm {
    fn new(mesh: &Mesh) -> Self {
        let mixed = fem::assemble_d(mesh);
        SlopeForm {
            mixed_t: mixed.transpose(),
            mixed,
            map: SlopeMap::new(mesh),
            neg_stiffness: fem::assemble_a(mesh).scaled(-1.0),
        }
    }
}

impl Formulation for SlopeForm {
    fn lhs(&self) -> &BandedMatrix {
        &self.mixed
    }

    fn solve_lhs(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.mixed.solve_lower(rhs)
    }

    fn auxiliary(&self, m: &[f64]) -> Vec<f64> {
        self.map.apply(m)
    }

    fn nonlinear(&self, mesh: &Mesh, m: &[f64], w: &[f64]) -> Vec<f64> {
        fem::g2(mesh, m, w)
    }

    fn partials(&self, mesh: &Mesh, m: &[f64], w: &[f64]) -> (BandedMatrix, BandedMatrix) {
        fem::g2_partials(mesh, m, w)
    }

    fn constraint(&self) -> (&BandedMatrix, &BandedMatrix) {
        // Dᵀ r - A u = 0
        (&self.neg_stiffness, &self.mixed_t)
    }
}

/// One θ-step `L(v - u) = Δt g(m, M m)`, `m = (1-θ) u + θ v`, as a nonlinear system.
struct ThetaStep<'a, F: Formulation> {
    form: &'a F,
    mesh: &'a Mesh,
    dt: f64,
    theta: f64,
    previous: &'a [f64],
}

impl<F: Formulation> ThetaStep<'_, F> {
    fn evaluation_point(&self, v: &[f64]) -> Vec<f64> {
        self.previous
            .iter()
            .zip(v)
            .map(|(a, b)| (1.0 - self.theta) * a + self.theta * b)
            .collect()
    }
}

impl<F: Formulation> NonlinearSystem for ThetaStep<'_, F> {
    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let m = self.evaluation_point(v);
        let w = self.form.auxiliary(&m);
        let g = self.form.nonlinear(self.mesh, &m, &w);
        let diff: Vec<f64> = v.iter().zip(self.previous).map(|(a, b)| a - b).collect();
        self.form
            .lhs()
            .matvec(&diff)
            .into_iter()
            .zip(g)
            .map(|(l, g)| l - self.dt * g)
            .collect()
    }

    fn solve_jacobian(&self, v: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let n = v.len();
        let m = self.evaluation_point(v);
        let w = self.form.auxiliary(&m);
        let (du, dw) = self.form.partials(self.mesh, &m, &w);
        let scale = -self.theta * self.dt;
        let top_left = self.form.lhs().add_scaled(scale, &du);
        let (k, p) = self.form.constraint();

        let mut triplets = Vec::with_capacity(16 * n);
        let mut push = |block: &BandedMatrix, alpha: f64, row_off: usize, col_off: usize| {
            for i in 0..n {
                let lo = i.saturating_sub(block.lower_bandwidth());
                let hi = (i + block.upper_bandwidth() + 1).min(n);
                for j in lo..hi {
                    let val = block.get(i, j);
                    if val != 0.0 {
                        triplets.push((2 * i + row_off, 2 * j + col_off, alpha * val));
                    }
                }
            }
        };
        push(&top_left, 1.0, 0, 0);
        push(&dw, scale, 0, 1);
        push(k, 1.0, 1, 0);
        push(p, 1.0, 1, 1);
        let system = BandedMatrix::from_triplets(2 * n, &triplets);

        let mut full = vec![0.0; 2 * n];
        for (i, r) in rhs.iter().enumerate() {
            full[2 * i] = *r;
        }
        system.lu()?.solve_in_place(&mut full);
        Ok(full.iter().step_by(2).copied().collect())
    }
}

/// Shared state of the Galerkin-type steppers.
struct GalerkinCore<F: Formulation> {
    mesh: Arc<Mesh>,
    form: F,
    dt: f64,
    newton: NewtonSettings,
}

impl<F: Formulation> GalerkinCore<F> {
    fn implicit_step(&self, dofs: &[f64], theta: f64) -> Result<(Vec<f64>, NewtonReport)> {
        let system = ThetaStep {
            form: &self.form,
            mesh: &self.mesh,
            dt: self.dt,
            theta,
            previous: dofs,
        };
        newton::solve(&system, dofs.to_vec(), &self.newton)
    }

    fn explicit_step(&self, dofs: &[f64]) -> Result<Vec<f64>> {
        let w = self.form.auxiliary(dofs);
        let g: Vec<f64> = self
            .form
            .nonlinear(&self.mesh, dofs, &w)
            .iter()
            .map(|v| self.dt * v)
            .collect();
        let incr = self.form.solve_lhs(&g)?;
        let next: Vec<f64> = dofs.iter().zip(&incr).map(|(a, b)| a + b).collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(next)
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt != 0.0) {
        return param(format!("time step must be finite and nonzero, got {dt}"));
    }
    Ok(())
}

/// Galerkin scheme with auxiliary `q ≈ u_xx ∈ X2`, midpoint in time.
pub struct Galerkin1 {
    core: GalerkinCore<CurvatureForm>,
}

impl Galerkin1 {
    /// `dt` may be negative to step backwards.
    pub fn new(mesh: Arc<Mesh>, dt: f64, newton: NewtonSettings) -> Result<Self> {
        check_dt(dt)?;
        newton.validate()?;
        Ok(Galerkin1 {
            core: GalerkinCore {
                form: CurvatureForm::new(&mesh)?,
                mesh,
                dt,
                newton,
            },
        })
    }

    /// `A (v - u) - Δt g1(m, q(m))` with `m = (u + v)/2`.
    pub fn residual(&self, previous: &[f64], next: &[f64]) -> Vec<f64> {
        ThetaStep {
            form: &self.core.form,
            mesh: &self.core.mesh,
            dt: self.core.dt,
            theta: 0.5,
            previous,
        }
        .residual(next)
    }

    /// `q = -B⁻¹ Cᵀ u`.
    pub fn curvature(&self, dofs: &[f64]) -> Vec<f64> {
        self.core.form.auxiliary(dofs)
    }

    pub fn step_with_report(&self, dofs: &[f64]) -> Result<(Vec<f64>, NewtonReport)> {
        self.core.implicit_step(dofs, 0.5)
    }
}

impl TimeStepper for Galerkin1 {
    fn kind(&self) -> SchemeKind {
        SchemeKind::Galerkin1
    }

    fn mesh(&self) -> &Arc<Mesh> {
        &self.core.mesh
    }

    fn dt(&self) -> f64 {
        self.core.dt
    }

    fn step(&self, dofs: &[f64]) -> Result<StepOutcome> {
        let (dofs, report) = self.step_with_report(dofs)?;
        Ok(StepOutcome {
            dofs,
            newton_iterations: report.iterations,
        })
    }

    fn energy(&self, dofs: &[f64]) -> f64 {
        fem::h1(&self.core.mesh, dofs)
    }

    fn second_energy(&self, dofs: &[f64]) -> f64 {
        fem::h2(&self.core.mesh, dofs)
    }

    fn derivatives(&self, dofs: &[f64]) -> DerivativeProfile {
        DerivativeProfile {
            element: element_profile(&self.core.mesh, dofs),
            recovered: averaged_slopes(&self.core.mesh, dofs),
        }
    }
}

/// Galerkin scheme with auxiliary `r ≈ u_x ∈ X2`, midpoint in time.
pub struct Galerkin2 {
    core: GalerkinCore<SlopeForm>,
}

impl Galerkin2 {
    /// `dt` may be negative to step backwards.
    pub fn new(mesh: Arc<Mesh>, dt: f64, newton: NewtonSettings) -> Result<Self> {
        check_dt(dt)?;
        newton.validate()?;
        Ok(Galerkin2 {
            core: GalerkinCore {
                form: SlopeForm::new(&mesh),
                mesh,
                dt,
                newton,
            },
        })
    }

    /// `D (v - u) - Δt g2(m, r(m))` with `m = (u + v)/2`.
    pub fn residual(&self, previous: &[f64], next: &[f64]) -> Vec<f64> {
        ThetaStep {
            form: &self.core.form,
            mesh: &self.core.mesh,
            dt: self.core.dt,
            theta: 0.5,
            previous,
        }
        .residual(next)
    }

    /// `r = D⁻ᵀ A u`.
    pub fn slope(&self, dofs: &[f64]) -> Vec<f64> {
        self.core.form.auxiliary(dofs)
    }

    pub fn step_with_report(&self, dofs: &[f64]) -> Result<(Vec<f64>, NewtonReport)> {
        self.core.implicit_step(dofs, 0.5)
    }
}

impl TimeStepper for Galerkin2 {
    fn kind(&self) -> SchemeKind {
        SchemeKind::Galerkin2
    }

    fn mesh(&self) -> &Arc<Mesh> {
        &self.core.mesh
    }

    fn dt(&self) -> f64 {
        self.core.dt
    }

    fn step(&self, dofs: &[f64]) -> Result<StepOutcome> {
        let (dofs, report) = self.step_with_report(dofs)?;
        Ok(StepOutcome {
            dofs,
            newton_iterations: report.iterations,
        })
    }

    fn energy(&self, dofs: &[f64]) -> f64 {
        fem::h1(&self.core.mesh, dofs)
    }

    fn second_energy(&self, dofs: &[f64]) -> f64 {
        fem::h2(&self.core.mesh, dofs)
    }

    fn derivatives(&self, dofs: &[f64]) -> DerivativeProfile {
        DerivativeProfile {
            element: element_profile(&self.core.mesh, dofs),
            recovered: fem::nodal_values(Space::X2, &self.slope(dofs)),
        }
    }
}

/// Explicit or implicit Euler with the Galerkin1 spatial operators.
pub struct Euler {
    core: GalerkinCore<CurvatureForm>,
    implicit: bool,
}

impl Euler {
    pub fn explicit(mesh: Arc<Mesh>, dt: f64) -> Result<Self> {
        Euler::new(mesh, dt, NewtonSettings::default(), false)
    }

    pub fn implicit(mesh: Arc<Mesh>, dt: f64, newton: NewtonSettings) -> Result<Self> {
        Euler::new(mesh, dt, newton, true)
    }

    fn new(mesh: Arc<Mesh>, dt: f64, newton: NewtonSettings, implicit: bool) -> Result<Self> {
        check_dt(dt)?;
        newton.validate()?;
        Ok(Euler {
            core: GalerkinCore {
                form: CurvatureForm::new(&mesh)?,
                mesh,
                dt,
                newton,
            },
            implicit,
        })
    }

    /// `A (v - u) - Δt g1(v, q(v))`; only meaningful for the implicit variant.
    pub fn residual(&self, previous: &[f64], next: &[f64]) -> Vec<f64> {
        ThetaStep {
            form: &self.core.form,
            mesh: &self.core.mesh,
            dt: self.core.dt,
            theta: if self.implicit { 1.0 } else { 0.0 },
            previous,
        }
        .residual(next)
    }
}

impl TimeStepper for Euler {
    fn kind(&self) -> SchemeKind {
        if self.implicit {
            SchemeKind::EulerImplicit
        } else {
            SchemeKind::EulerExplicit
        }
    }

    fn mesh(&self) -> &Arc<Mesh> {
        &self.core.mesh
    }

    fn dt(&self) -> f64 {
        self.core.dt
    }

    fn step(&self, dofs: &[f64]) -> Result<StepOutcome> {
        if self.implicit {
            let (dofs, report) = self.core.implicit_step(dofs, 1.0)?;
            Ok(StepOutcome {
                dofs,
                newton_iterations: report.iterations,
            })
        } else {
            Ok(StepOutcome {
                dofs: self.core.explicit_step(dofs)?,
                newton_iterations: 0,
            })
        }
    }

    fn energy(&self, dofs: &[f64]) -> f64 {
        fem::h1(&self.core.mesh, dofs)
    }

    fn second_energy(&self, dofs: &[f64]) -> f64 {
        fem::h2(&self.core.mesh, dofs)
    }

    fn derivatives(&self, dofs: &[f64]) -> DerivativeProfile {
        DerivativeProfile {
            element: element_profile(&self.core.mesh, dofs),
            recovered: averaged_slopes(&self.core.mesh, dofs),
        }
    }
}

/// The finite difference scheme behind the common stepper interface.
pub struct FdStepper {
    mesh: Arc<Mesh>,
    scheme: FdScheme,
}

impl FdStepper {
    pub fn new(mesh: Arc<Mesh>, dt: f64, newton: NewtonSettings) -> Result<Self> {
        let scheme = FdScheme::on_mesh(&mesh, dt, newton)?;
        Ok(FdStepper { mesh, scheme })
    }

    pub fn scheme(&self) -> &FdScheme {
        &self.scheme
    }
}

impl TimeStepper for FdStepper {
    fn kind(&self) -> SchemeKind {
        SchemeKind::Fd
    }

    fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    fn dt(&self) -> f64 {
        self.scheme.dt()
    }

    fn step(&self, dofs: &[f64]) -> Result<StepOutcome> {
        let (dofs, report) = self.scheme.step_unknowns(dofs)?;
        Ok(StepOutcome {
            dofs,
            newton_iterations: report.iterations,
        })
    }

    fn energy(&self, dofs: &[f64]) -> f64 {
        fd_scheme::hamiltonian(&self.nodal_values(dofs), self.scheme.dx())
    }

    fn second_energy(&self, dofs: &[f64]) -> f64 {
        fd_scheme::second_hamiltonian(&self.nodal_values(dofs), self.scheme.dx())
    }

    fn derivatives(&self, dofs: &[f64]) -> DerivativeProfile {
        let nodal = self.nodal_values(dofs);
        let dx = self.scheme.dx();
        let mut element: Vec<f64> = nodal.windows(2).map(|w| (w[1] - w[0]) / dx).collect();
        element.push(*element.last().unwrap());
        DerivativeProfile {
            element,
            recovered: fd_scheme::central_slopes(&nodal, dx),
        }
    }
}

/// Builds the stepper for `kind`. `dt` may be negative.
pub fn build_stepper(
    kind: SchemeKind,
    mesh: Arc<Mesh>,
    dt: f64,
    newton: NewtonSettings,
) -> Result<Box<dyn TimeStepper>> {
    Ok(match kind {
        SchemeKind::Fd => Box::new(FdStepper::new(mesh, dt, newton)?),
        SchemeKind::Galerkin1 => Box::new(Galerkin1::new(mesh, dt, newton)?),
        SchemeKind::Galerkin2 => Box::new(Galerkin2::new(mesh, dt, newton)?),
        SchemeKind::EulerExplicit => Box::new(Euler::new(mesh, dt, newton, false)?),
        SchemeKind::EulerImplicit => Box::new(Euler::implicit(mesh, dt, newton)?),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    /// Dofs `u(x_1)..u(x_N)`.
    pub coefficients: Vec<f64>,
    pub h1: f64,
    pub h2: f64,
    /// Nodal L∞ error, when the exact solution covers this time.
    pub linf_error: Option<f64>,
    pub newton_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: SchemeKind,
    pub mesh: Arc<Mesh>,
    pub dt: f64,
    /// State at `t = 0`.
    pub initial: StepRecord,
    /// One record per step, `n = 1..=steps`.
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn last(&self) -> &StepRecord {
        self.records.last().unwrap_or(&self.initial)
    }

    /// `max_n |H1(n) - H1(0)|`.
    pub fn h1_drift(&self) -> f64 {
        self.records
            .iter()
            .map(|r| (r.h1 - self.initial.h1).abs())
            .fold(0.0, f64::max)
    }
}

fn record(
    stepper: &dyn TimeStepper,
    exact: Option<&ExactSolution>,
    step: usize,
    time: f64,
    dofs: Vec<f64>,
    newton_iterations: usize,
) -> Result<StepRecord> {
    let linf_error = match exact {
        Some(e) if e.covers(time) => {
            Some(e.linf_error(stepper.mesh(), &stepper.nodal_values(&dofs), time)?)
        }
        _ => None,
    };
    Ok(StepRecord {
        step,
        time,
        h1: stepper.energy(&dofs),
        h2: stepper.second_energy(&dofs),
        linf_error,
        newton_iterations,
        coefficients: dofs,
    })
}

/// Integrates `initial` for `⌈t_end/dt⌉` steps with the scheme in `config`.
///
/// The L∞ error is recorded while `exact` (if given) covers the step time.
pub fn run(
    config: &SchemeConfig,
    mesh: Arc<Mesh>,
    initial: &dyn Fn(f64) -> f64,
    exact: Option<&ExactSolution>,
) -> Result<Trajectory> {
    config.validate()?;
    let stepper = build_stepper(config.kind, mesh.clone(), config.dt, config.newton)?;
    run_with(stepper.as_ref(), config, initial, exact)
}

/// As [`run`], with a prebuilt stepper.
pub fn run_with(
    stepper: &dyn TimeStepper,
    config: &SchemeConfig,
    initial: &dyn Fn(f64) -> f64,
    exact: Option<&ExactSolution>,
) -> Result<Trajectory> {
    config.validate()?;
    let steps = config.steps();
    let dofs = stepper.initial_dofs(initial)?;
    let first = record(stepper, exact, 0, 0.0, dofs, 0)?;
    let mut records: Vec<StepRecord> = Vec::with_capacity(steps);
    for n in 1..=steps {
        let prev = records.last().unwrap_or(&first);
        let outcome = stepper.step(&prev.coefficients).map_err(|source| Error::Step {
            step: n,
            source: Box::new(source),
        })?;
        let time = n as f64 * config.dt;
        records.push(record(
            stepper,
            exact,
            n,
            time,
            outcome.dofs,
            outcome.newton_iterations,
        )?);
    }
    Ok(Trajectory {
        kind: stepper.kind(),
        mesh: stepper.mesh().clone(),
        dt: config.dt,
        initial: first,
        records,
    })
}

/// Nodal profile of a state with derivative recoveries and exact values.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub ux_element: Vec<f64>,
    pub ux_recovered: Vec<f64>,
    pub u_exact: Option<Vec<f64>>,
    pub ux_exact: Option<Vec<f64>>,
}

pub fn profile(
    stepper: &dyn TimeStepper,
    dofs: &[f64],
    time: f64,
    exact: Option<&ExactSolution>,
) -> Result<Profile> {
    let x = stepper.mesh().nodes().to_vec();
    let derivs = stepper.derivatives(dofs);
    let (u_exact, ux_exact) = match exact {
        Some(e) if e.covers(time) => {
            let u = x.iter().map(|&xk| e.u(xk, time)).collect::<Result<Vec<_>>>()?;
            let ux = x
                .iter()
                .map(|&xk| e.ux(xk, time).map(|s| s.value))
                .collect::<Result<Vec<_>>>()?;
            (Some(u), Some(ux))
        }
        _ => (None, None),
    };
    Ok(Profile {
        u: stepper.nodal_values(dofs),
        x,
        ux_element: derivs.element,
        ux_recovered: derivs.recovered,
        u_exact,
        ux_exact,
    })
}

/// Total variation `Σ |v_{k+1} - v_k|`.
pub fn total_variation(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_mesh() -> Arc<Mesh> {
        Arc::new(Mesh::uniform(6.0, 200).unwrap())
    }

    fn exact_initial(mesh: &Arc<Mesh>) -> Vec<f64> {
        let e = ExactSolution::new(mesh.half_width()).unwrap();
        fem::interpolate(|x| e.u(x, 0.0).unwrap(), mesh.clone(), Space::X1)
            .unwrap()
            .into_values()
    }

    #[test]
    fn scheme_names_round_trip() {
        for kind in SchemeKind::ALL {
            assert_eq!(kind.name().parse::<SchemeKind>().unwrap(), kind);
        }
        assert!("rk4".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn step_count() {
        assert_eq!(SchemeConfig::new(SchemeKind::Galerkin1, 0.01, 1.0).steps(), 100);
        assert_eq!(SchemeConfig::new(SchemeKind::Galerkin1, 0.3, 1.0).steps(), 4);
        assert!(SchemeConfig::new(SchemeKind::Galerkin1, 2.0, 1.0).validate().is_err());
        assert!(SchemeConfig::new(SchemeKind::Galerkin1, -0.1, 1.0).validate().is_err());
    }

    #[test]
    fn zero_is_fixed_point_for_every_scheme() {
        let mesh = Arc::new(Mesh::uniform(2.0, 16).unwrap());
        for kind in SchemeKind::ALL {
            let s = build_stepper(kind, mesh.clone(), 0.01, NewtonSettings::default()).unwrap();
            let out = s.step(&[0.0; 16]).unwrap();
            assert!(out.dofs.iter().all(|&v| v == 0.0), "{kind}");
        }
    }

    #[test]
    fn galerkin_single_step_conserves() {
        let mesh = reference_mesh();
        let u0 = exact_initial(&mesh);
        let h0 = fem::h1(&mesh, &u0);
        let g1 = Galerkin1::new(mesh.clone(), 0.01, NewtonSettings::default()).unwrap();
        let (u1, _) = g1.step_with_report(&u0).unwrap();
        assert!((fem::h1(&mesh, &u1) - h0).abs() < 1e-10);
        let g2 = Galerkin2::new(mesh.clone(), 0.01, NewtonSettings::default()).unwrap();
        let (u1, _) = g2.step_with_report(&u0).unwrap();
        assert!((fem::h1(&mesh, &u1) - h0).abs() < 1e-10);
    }

    #[test]
    fn run_records_every_step() {
        let mesh = Arc::new(Mesh::uniform(6.0, 60).unwrap());
        let e = ExactSolution::new(6.0).unwrap();
        let config = SchemeConfig::new(SchemeKind::Galerkin1, 0.01, 1.0);
        let traj = run(&config, mesh, &|x| e.u(x, 0.0).unwrap(), Some(&e)).unwrap();
        assert_eq!(traj.records.len(), 100);
        for (i, r) in traj.records.iter().enumerate() {
            assert_eq!(r.step, i + 1);
            assert!((r.time - 0.01 * (i + 1) as f64).abs() < 1e-12);
            assert!(r.linf_error.is_some());
        }
        assert!(traj.h1_drift() < 1e-10);
        assert_eq!(traj.initial.linf_error, Some(0.0));
    }

    #[test]
    fn fd_rejects_graded_mesh() {
        let mesh = Arc::new(Mesh::graded(6.0, 40, (0.0, 3.0), 0.5).unwrap());
        let config = SchemeConfig::new(SchemeKind::Fd, 0.01, 0.1);
        assert!(run(&config, mesh, &|x| x.max(0.0), None).is_err());
    }

    #[test]
    fn errors_absent_past_horizon() {
        let mesh = Arc::new(Mesh::uniform(2.0, 20).unwrap());
        let e = ExactSolution::new(2.0).unwrap();
        // horizon 2(√2 - 1) ≈ 0.83
        let config = SchemeConfig::new(SchemeKind::Galerkin1, 0.1, 1.0);
        let traj = run(&config, mesh, &|x| e.u(x, 0.0).unwrap(), Some(&e)).unwrap();
        assert!(traj.records[7].linf_error.is_some());
        assert!(traj.records[8].linf_error.is_none());
    }

    #[test]
    fn profile_columns_have_node_length() {
        let mesh = Arc::new(Mesh::uniform(6.0, 30).unwrap());
        let e = ExactSolution::new(6.0).unwrap();
        let u0 = exact_initial(&mesh);
        for kind in SchemeKind::ALL {
            let s = build_stepper(kind, mesh.clone(), 0.01, NewtonSettings::default()).unwrap();
            let p = profile(s.as_ref(), &u0, 0.0, Some(&e)).unwrap();
            assert_eq!(p.x.len(), 31);
            assert_eq!(p.u.len(), 31);
            assert_eq!(p.ux_element.len(), 31);
            assert_eq!(p.ux_recovered.len(), 31);
            assert_eq!(p.u_exact.as_ref().unwrap().len(), 31);
        }
    }

    #[test]
    fn total_variation_basic() {
        assert_eq!(total_variation(&[0.0, 1.0, 0.0, 2.0]), 4.0);
        assert_eq!(total_variation(&[]), 0.0);
    }
}
