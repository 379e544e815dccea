//! P1 finite-element spaces, matrices and nonlinear forms.
//!
//! Two continuous piecewise-linear spaces live on a mesh with `N` elements:
//!
//! - `X1`: functions vanishing at `x_0 = -L`; dof `i` is the value at `x_{i+1}`,
//! - `X2`: functions vanishing at `x_N = L`; dof `i` is the value at `x_i`.
//!
//! Both have dimension `N`. With these orderings
//!
//! ```text
//! A_ij = (φ_i', φ_j')   X1 × X1, tridiagonal SPD
//! B_ij = (ϕ_i, ϕ_j)     X2 × X2, tridiagonal SPD
//! C_ij = (φ_i', ϕ_j')   X1 × X2, offsets 0..=2
//! D_ij = (ϕ_i, φ_j')    X2 × X1, ½ on the diagonal, -½ two below
//! ```
//!
//! Every integrand of the nonlinear forms is at most cubic on an element, so
//! the two-point Gauss rule evaluates them exactly and the discrete
//! conservation identities `u·g1(u, q) = 0`, `r·g2(u, r) = 0` hold to round-off.

use std::sync::Arc;

use crate::banded::{BandedCholesky, BandedMatrix};
use crate::error::{param, Result};
use crate::mesh::Mesh;
use crate::quadrature::GaussLegendre;

/// Which of the two P1 spaces a coefficient vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Zero at the left endpoint.
    X1,
    /// Zero at the right endpoint.
    X2,
}

impl Space {
    /// Dof index of mesh node `node`, or `None` for the pinned endpoint.
    pub fn dof(self, node: usize, elements: usize) -> Option<usize> {
        match self {
            Space::X1 => node.checked_sub(1),
            Space::X2 => (node < elements).then_some(node),
        }
    }

    /// Mesh node carrying dof `dof`.
    pub fn node(self, dof: usize) -> usize {
        match self {
            Space::X1 => dof + 1,
            Space::X2 => dof,
        }
    }
}

/// Coefficients of a P1 function in `X1` or `X2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    space: Space,
    values: Vec<f64>,
    mesh: Arc<Mesh>,
}

impl CoeffVector {
    pub fn new(space: Space, mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.elements() {
            return param(format!(
                "coefficient vector has {} entries, mesh has {} elements",
                values.len(),
                mesh.elements()
            ));
        }
        Ok(CoeffVector { space, values, mesh })
    }

    pub fn zeros(space: Space, mesh: Arc<Mesh>) -> Self {
        let n = mesh.elements();
        CoeffVector {
            space,
            values: vec![0.0; n],
            mesh,
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// Values at all `N + 1` mesh nodes, including the pinned zero.
    pub fn nodal_values(&self) -> Vec<f64> {
        nodal_values(self.space, &self.values)
    }

    fn expect(&self, space: Space) -> Result<()> {
        if self.space != space {
            return param(format!("expected a coefficient vector in {space:?}, got {:?}", self.space));
        }
        Ok(())
    }
}

/// Expands dofs to the `N + 1` nodal values.
pub fn nodal_values(space: Space, dofs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(dofs.len() + 1);
    match space {
        Space::X1 => {
            out.push(0.0);
            out.extend_from_slice(dofs);
        }
        Space::X2 => {
            out.extend_from_slice(dofs);
            out.push(0.0);
        }
    }
    out
}

fn same_mesh(a: &CoeffVector, b: &CoeffVector) -> Result<()> {
    if Arc::ptr_eq(&a.mesh, &b.mesh) || a.mesh == b.mesh {
        Ok(())
    } else {
        param("coefficient vectors live on different meshes")
    }
}

#[inline]
fn node_value(space: Space, dofs: &[f64], node: usize) -> f64 {
    space.dof(node, dofs.len()).map_or(0.0, |i| dofs[i])
}

/// Assembles `Σ_e local(e)` into an `N × N` matrix with the given row/column spaces.
fn assemble(
    mesh: &Mesh,
    rows: Space,
    cols: Space,
    local: impl Fn(f64) -> [[f64; 2]; 2],
) -> BandedMatrix {
    let n = mesh.elements();
    let mut triplets = Vec::with_capacity(4 * n);
    for e in 0..n {
        let m = local(mesh.element_length(e));
        for (b, row) in m.iter().enumerate() {
            let Some(i) = rows.dof(e + b, n) else { continue };
            for (a, &v) in row.iter().enumerate() {
                if let Some(j) = cols.dof(e + a, n) {
                    triplets.push((i, j, v));
                }
            }
        }
    }
    BandedMatrix::from_triplets(n, &triplets)
}

fn local_stiffness(h: f64) -> [[f64; 2]; 2] {
    [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]]
}

/// Stiffness matrix on `X1`.
pub fn assemble_a(mesh: &Mesh) -> BandedMatrix {
    assemble(mesh, Space::X1, Space::X1, local_stiffness)
}

/// Mass matrix on `X2`.
pub fn assemble_b(mesh: &Mesh) -> BandedMatrix {
    assemble(mesh, Space::X2, Space::X2, |h| {
        [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]]
    })
}

/// Mixed stiffness matrix, rows in `X1`, columns in `X2`.
pub fn assemble_c(mesh: &Mesh) -> BandedMatrix {
    assemble(mesh, Space::X1, Space::X2, local_stiffness)
}

/// Mixed matrix `(ϕ_i, φ_j')`, rows in `X2`, columns in `X1`.
///
/// `∫_e ψ_b ψ_a' dx = ±½` on every element regardless of its length, so the
/// result depends only on `N`.
pub fn assemble_d(mesh: &Mesh) -> BandedMatrix {
    assemble(mesh, Space::X2, Space::X1, |_| [[-0.5, 0.5], [-0.5, 0.5]])
}

/// Local trilinear tensor `T[b][a][c]` of an element: the form evaluated at
/// test hat `b`, first-argument hat `a`, second-argument hat `c`.
type Tensor = [[[f64; 2]; 2]; 2];

/// Element tensor of `∫ (p_c w_a' ... ) ψ_b` assembled by two-point Gauss.
fn element_tensor(h: f64, integrand: impl Fn([f64; 2], [f64; 2], usize, usize, usize) -> f64) -> Tensor {
    let rule = GaussLegendre::two_point();
    let dpsi = [-1.0 / h, 1.0 / h];
    let mut t = [[[0.0; 2]; 2]; 2];
    for (&xi, &w) in rule.points().iter().zip(rule.weights()) {
        let psi = [0.5 * (1.0 - xi), 0.5 * (1.0 + xi)];
        let weight = 0.5 * h * w;
        for (b, tb) in t.iter_mut().enumerate() {
            for (a, ta) in tb.iter_mut().enumerate() {
                for (c, v) in ta.iter_mut().enumerate() {
                    *v += weight * integrand(psi, dpsi, b, a, c);
                }
            }
        }
    }
    t
}

/// Tensor of `(q u_x + (q u)_x, v) = ∫ (2 q u_x + q_x u) v`; `a` indexes `u`, `c` indexes `q`.
fn g1_tensor(h: f64) -> Tensor {
    element_tensor(h, |psi, dpsi, b, a, c| {
        (2.0 * psi[c] * dpsi[a] + dpsi[c] * psi[a]) * psi[b]
    })
}

/// Tensor of `-½ (u r_x + (u r)_x, v) = -½ ∫ (2 u r_x + u_x r) v`; `a` indexes `u`, `c` indexes `r`.
fn g2_tensor(h: f64) -> Tensor {
    element_tensor(h, |psi, dpsi, b, a, c| {
        -0.5 * (2.0 * psi[a] * dpsi[c] + dpsi[a] * psi[c]) * psi[b]
    })
}

/// A bilinear form `g(u, w)` with `u ∈ X1`, tested against `test` space and
/// with second argument in `X2`.
struct Bilinear {
    test: Space,
    tensor: fn(f64) -> Tensor,
}

const G1: Bilinear = Bilinear {
    test: Space::X1,
    tensor: g1_tensor,
};

const G2: Bilinear = Bilinear {
    test: Space::X2,
    tensor: g2_tensor,
};

impl Bilinear {
    fn eval(&self, mesh: &Mesh, u: &[f64], w: &[f64]) -> Vec<f64> {
        let n = mesh.elements();
        assert_eq!(u.len(), n);
        assert_eq!(w.len(), n);
        let mut out = vec![0.0; n];
        for e in 0..n {
            let t = (self.tensor)(mesh.element_length(e));
            let ul = [node_value(Space::X1, u, e), node_value(Space::X1, u, e + 1)];
            let wl = [node_value(Space::X2, w, e), node_value(Space::X2, w, e + 1)];
            for (b, tb) in t.iter().enumerate() {
                let Some(i) = self.test.dof(e + b, n) else { continue };
                let mut s = 0.0;
                for (a, ta) in tb.iter().enumerate() {
                    for (c, &v) in ta.iter().enumerate() {
                        s += v * ul[a] * wl[c];
                    }
                }
                out[i] += s;
            }
        }
        out
    }

    /// `(∂g/∂u, ∂g/∂w)` at `(u, w)`.
    fn partials(&self, mesh: &Mesh, u: &[f64], w: &[f64]) -> (BandedMatrix, BandedMatrix) {
        let n = mesh.elements();
        let mut du = Vec::with_capacity(4 * n);
        let mut dw = Vec::with_capacity(4 * n);
        for e in 0..n {
            let t = (self.tensor)(mesh.element_length(e));
            let ul = [node_value(Space::X1, u, e), node_value(Space::X1, u, e + 1)];
            let wl = [node_value(Space::X2, w, e), node_value(Space::X2, w, e + 1)];
            for (b, tb) in t.iter().enumerate() {
                let Some(i) = self.test.dof(e + b, n) else { continue };
                for k in 0..2 {
                    if let Some(j) = Space::X1.dof(e + k, n) {
                        du.push((i, j, tb[k][0] * wl[0] + tb[k][1] * wl[1]));
                    }
                    if let Some(j) = Space::X2.dof(e + k, n) {
                        dw.push((i, j, tb[0][k] * ul[0] + tb[1][k] * ul[1]));
                    }
                }
            }
        }
        (
            BandedMatrix::from_triplets(n, &du),
            BandedMatrix::from_triplets(n, &dw),
        )
    }
}

/// `g1(u, q)_i = (q u_x + (q u)_x, φ_i)` on raw dofs.
pub fn g1(mesh: &Mesh, u: &[f64], q: &[f64]) -> Vec<f64> {
    G1.eval(mesh, u, q)
}

/// `g2(u, r)_i = -½ (u r_x + (u r)_x, ϕ_i)` on raw dofs.
pub fn g2(mesh: &Mesh, u: &[f64], r: &[f64]) -> Vec<f64> {
    G2.eval(mesh, u, r)
}

/// `(∂g1/∂u, ∂g1/∂q)` on raw dofs.
pub fn g1_partials(mesh: &Mesh, u: &[f64], q: &[f64]) -> (BandedMatrix, BandedMatrix) {
    G1.partials(mesh, u, q)
}

/// `(∂g2/∂u, ∂g2/∂r)` on raw dofs.
pub fn g2_partials(mesh: &Mesh, u: &[f64], r: &[f64]) -> (BandedMatrix, BandedMatrix) {
    G2.partials(mesh, u, r)
}

pub fn eval_g1(u: &CoeffVector, q: &CoeffVector) -> Result<Vec<f64>> {
    u.expect(Space::X1)?;
    q.expect(Space::X2)?;
    same_mesh(u, q)?;
    Ok(g1(&u.mesh, &u.values, &q.values))
}

pub fn eval_g2(u: &CoeffVector, r: &CoeffVector) -> Result<Vec<f64>> {
    u.expect(Space::X1)?;
    r.expect(Space::X2)?;
    same_mesh(u, r)?;
    Ok(g2(&u.mesh, &u.values, &r.values))
}

/// Linear map from `X1` coefficients to auxiliary `X2` coefficients.
pub trait LinearMap {
    fn dim(&self) -> usize;
    fn apply(&self, u: &[f64]) -> Vec<f64>;
}

/// `u ↦ q = -B⁻¹ Cᵀ u`, the P1 approximation of `u_xx` in `X2`.
#[derive(Debug, Clone)]
pub struct CurvatureMap {
    mass: BandedCholesky,
    coupling: BandedMatrix,
}

impl CurvatureMap {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        Ok(CurvatureMap {
            mass: assemble_b(mesh).cholesky()?,
            coupling: assemble_c(mesh),
        })
    }
}

impl LinearMap for CurvatureMap {
    fn dim(&self) -> usize {
        self.coupling.order()
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut rhs = self.coupling.transpose_matvec(u);
        rhs.iter_mut().for_each(|v| *v = -*v);
        self.mass.solve(&rhs)
    }
}

/// `u ↦ r = D⁻ᵀ A u`, the `X2` function with `(r, v') = (u_x, v')` for all `v ∈ X1`.
#[derive(Debug, Clone)]
pub struct SlopeMap {
    mixed: BandedMatrix,
    stiffness: BandedMatrix,
}

impl SlopeMap {
    pub fn new(mesh: &Mesh) -> Self {
        SlopeMap {
            mixed: assemble_d(mesh),
            stiffness: assemble_a(mesh),
        }
    }
}

impl LinearMap for SlopeMap {
    fn dim(&self) -> usize {
        self.stiffness.order()
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let au = self.stiffness.matvec(u);
        // the diagonal of D is ½ on every mesh
        self.mixed
            .solve_lower_transpose(&au)
            .expect("D has a nonzero diagonal")
    }
}

/// `∂g/∂u + ∂g/∂w · M` as a (full-band) matrix.
fn compose(partial_u: BandedMatrix, partial_w: &BandedMatrix, map: &dyn LinearMap) -> BandedMatrix {
    let n = partial_u.order();
    let mut triplets = Vec::with_capacity(n * n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = partial_w.matvec(&map.apply(&e));
        e[j] = 0.0;
        for (i, v) in col.into_iter().enumerate() {
            triplets.push((i, j, v + partial_u.get(i, j)));
        }
    }
    BandedMatrix::from_triplets(n, &triplets)
}

/// Jacobian of `u ↦ g1(u, M u)` at `(u, q)` where `map` is `M`.
pub fn jacobian_g1(u: &CoeffVector, q: &CoeffVector, map: &dyn LinearMap) -> Result<BandedMatrix> {
    u.expect(Space::X1)?;
    q.expect(Space::X2)?;
    same_mesh(u, q)?;
    if map.dim() != u.values.len() {
        return param("linear map dimension does not match the mesh");
    }
    let (du, dq) = g1_partials(&u.mesh, &u.values, &q.values);
    Ok(compose(du, &dq, map))
}

/// Jacobian of `u ↦ g2(u, M u)` at `(u, r)` where `map` is `M`.
pub fn jacobian_g2(u: &CoeffVector, r: &CoeffVector, map: &dyn LinearMap) -> Result<BandedMatrix> {
    u.expect(Space::X1)?;
    r.expect(Space::X2)?;
    same_mesh(u, r)?;
    if map.dim() != u.values.len() {
        return param("linear map dimension does not match the mesh");
    }
    let (du, dr) = g2_partials(&u.mesh, &u.values, &r.values);
    Ok(compose(du, &dr, map))
}

/// Slope of `u` on each element.
pub fn element_slopes(mesh: &Mesh, space: Space, dofs: &[f64]) -> Vec<f64> {
    (0..mesh.elements())
        .map(|e| {
            (node_value(space, dofs, e + 1) - node_value(space, dofs, e)) / mesh.element_length(e)
        })
        .collect()
}

/// `½ ∫ u_x² dx` of raw `X1` dofs.
pub fn h1(mesh: &Mesh, u: &[f64]) -> f64 {
    element_slopes(mesh, Space::X1, u)
        .iter()
        .zip(mesh.element_lengths())
        .map(|(s, h)| s * s * h)
        .sum::<f64>()
        * 0.5
}

/// `½ ∫ u u_x² dx` of raw `X1` dofs.
pub fn h2(mesh: &Mesh, u: &[f64]) -> f64 {
    element_slopes(mesh, Space::X1, u)
        .iter()
        .enumerate()
        .map(|(e, s)| {
            let mean = 0.5 * (node_value(Space::X1, u, e) + node_value(Space::X1, u, e + 1));
            s * s * mean * mesh.element_length(e)
        })
        .sum::<f64>()
        * 0.5
}

pub fn h1_energy(u: &CoeffVector) -> Result<f64> {
    u.expect(Space::X1)?;
    Ok(h1(&u.mesh, &u.values))
}

pub fn h2_energy(u: &CoeffVector) -> Result<f64> {
    u.expect(Space::X1)?;
    Ok(h2(&u.mesh, &u.values))
}

/// Nodal interpolant of `f` in `space`. `f` must vanish (to 1e-12) at the
/// pinned endpoint of the space.
pub fn interpolate(f: impl Fn(f64) -> f64, mesh: Arc<Mesh>, space: Space) -> Result<CoeffVector> {
    let nodes = mesh.nodes();
    let n = mesh.elements();
    let pinned = match space {
        Space::X1 => nodes[0],
        Space::X2 => nodes[n],
    };
    let boundary = f(pinned);
    if !(boundary.abs() <= 1e-12) {
        return param(format!(
            "function must vanish at x = {pinned} for {space:?}, got {boundary}"
        ));
    }
    let values = (0..n).map(|i| f(nodes[space.node(i)])).collect();
    CoeffVector::new(space, mesh, values)
}
