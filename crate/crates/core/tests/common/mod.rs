//! Independent oracles for the integration and acceptance tests.
//!
//! Everything here works with dense nalgebra matrices, explicit hat
//! functions and high-order quadrature, and shares no code path with the
//! banded assembly or the steppers under test.

#![allow(dead_code)]

use hunter_saxton::quadrature::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Piecewise-linear function on `nodes` given by its nodal values.
pub struct P1<'a> {
    pub nodes: &'a [f64],
    pub values: Vec<f64>,
}

impl P1<'_> {
    /// Value and slope on element `e` at `x`.
    pub fn on_element(&self, e: usize, x: f64) -> (f64, f64) {
        let (x0, x1) = (self.nodes[e], self.nodes[e + 1]);
        let (v0, v1) = (self.values[e], self.values[e + 1]);
        let slope = (v1 - v0) / (x1 - x0);
        (v0 + slope * (x - x0), slope)
    }
}

/// Hat function of node `k`, restricted to element `e`: (value, slope).
pub fn hat(nodes: &[f64], k: usize, e: usize, x: f64) -> (f64, f64) {
    let (x0, x1) = (nodes[e], nodes[e + 1]);
    let h = x1 - x0;
    if k == e {
        ((x1 - x) / h, -1.0 / h)
    } else if k == e + 1 {
        ((x - x0) / h, 1.0 / h)
    } else {
        (0.0, 0.0)
    }
}

/// `∫ f` over the whole mesh, element by element with a 10-point rule.
pub fn integrate(nodes: &[f64], f: impl Fn(usize, f64) -> f64) -> f64 {
    let rule = GaussLegendre::new(10);
    (0..nodes.len() - 1)
        .map(|e| rule.integrate(nodes[e], nodes[e + 1], |x| f(e, x)))
        .sum()
}

/// Node carrying dof `i` of X1 / X2.
pub fn x1_node(i: usize) -> usize {
    i + 1
}

pub fn x2_node(i: usize) -> usize {
    i
}

/// Dense Gram-type matrix `∫ F(row hat, col hat)` by quadrature.
pub fn dense_matrix(
    nodes: &[f64],
    row_node: fn(usize) -> usize,
    col_node: fn(usize) -> usize,
    f: impl Fn((f64, f64), (f64, f64)) -> f64,
) -> DMatrix<f64> {
    let n = nodes.len() - 1;
    DMatrix::from_fn(n, n, |i, j| {
        integrate(nodes, |e, x| {
            f(hat(nodes, row_node(i), e, x), hat(nodes, col_node(j), e, x))
        })
    })
}

pub fn dense_a(nodes: &[f64]) -> DMatrix<f64> {
    dense_matrix(nodes, x1_node, x1_node, |a, b| a.1 * b.1)
}

pub fn dense_b(nodes: &[f64]) -> DMatrix<f64> {
    dense_matrix(nodes, x2_node, x2_node, |a, b| a.0 * b.0)
}

pub fn dense_c(nodes: &[f64]) -> DMatrix<f64> {
    dense_matrix(nodes, x1_node, x2_node, |a, b| a.1 * b.1)
}

pub fn dense_d(nodes: &[f64]) -> DMatrix<f64> {
    dense_matrix(nodes, x2_node, x1_node, |a, b| a.0 * b.1)
}

pub fn x1_nodal(u: &[f64]) -> Vec<f64> {
    std::iter::once(0.0).chain(u.iter().copied()).collect()
}

pub fn x2_nodal(q: &[f64]) -> Vec<f64> {
    q.iter().copied().chain(std::iter::once(0.0)).collect()
}

/// `∫ (q u_x + (q u)_x) φ_i` for X1 test functions, by quadrature.
pub fn oracle_g1(nodes: &[f64], u: &[f64], q: &[f64]) -> Vec<f64> {
    let uf = P1 { nodes, values: x1_nodal(u) };
    let qf = P1 { nodes, values: x2_nodal(q) };
    (0..u.len())
        .map(|i| {
            integrate(nodes, |e, x| {
                let (uv, ux) = uf.on_element(e, x);
                let (qv, qx) = qf.on_element(e, x);
                let (phi, _) = hat(nodes, x1_node(i), e, x);
                (qv * ux + (qx * uv + qv * ux)) * phi
            })
        })
        .collect()
}

/// `-½ ∫ (u r_x + (u r)_x) ϕ_i` for X2 test functions, by quadrature.
pub fn oracle_g2(nodes: &[f64], u: &[f64], r: &[f64]) -> Vec<f64> {
    let uf = P1 { nodes, values: x1_nodal(u) };
    let rf = P1 { nodes, values: x2_nodal(r) };
    (0..u.len())
        .map(|i| {
            integrate(nodes, |e, x| {
                let (uv, ux) = uf.on_element(e, x);
                let (rv, rx) = rf.on_element(e, x);
                let (phi, _) = hat(nodes, x2_node(i), e, x);
                -0.5 * (uv * rx + (ux * rv + uv * rx)) * phi
            })
        })
        .collect()
}

pub fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Dense operators of both Galerkin formulations on one mesh.
pub struct DenseGalerkin {
    pub nodes: Vec<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl DenseGalerkin {
    pub fn new(nodes: &[f64]) -> Self {
        DenseGalerkin {
            nodes: nodes.to_vec(),
            a: dense_a(nodes),
            b: dense_b(nodes),
            c: dense_c(nodes),
            d: dense_d(nodes),
        }
    }

    /// `q = -B⁻¹ Cᵀ u`
    pub fn curvature(&self, u: &[f64]) -> Vec<f64> {
        let rhs = -(self.c.transpose() * DVector::from_column_slice(u));
        to_vec(&self.b.clone().lu().solve(&rhs).expect("B invertible"))
    }

    /// `r = D⁻ᵀ A u`
    pub fn slope(&self, u: &[f64]) -> Vec<f64> {
        let rhs = &self.a * DVector::from_column_slice(u);
        to_vec(&self.d.transpose().lu().solve(&rhs).expect("D invertible"))
    }

    /// `A(v - u)/Δt - g1(m, q(m))`, `m = (1-θ)u + θv`.
    pub fn residual1(&self, u: &[f64], v: &[f64], dt: f64, theta: f64) -> Vec<f64> {
        let m: Vec<f64> = u.iter().zip(v).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
        let q = self.curvature(&m);
        let g = oracle_g1(&self.nodes, &m, &q);
        let diff = DVector::from_iterator(u.len(), v.iter().zip(u).map(|(a, b)| (a - b) / dt));
        let lhs = &self.a * diff;
        lhs.iter().zip(&g).map(|(l, g)| l - g).collect()
    }

    /// `D(v - u)/Δt - g2(m, r(m))`, `m = (u + v)/2`.
    pub fn residual2(&self, u: &[f64], v: &[f64], dt: f64) -> Vec<f64> {
        let m: Vec<f64> = u.iter().zip(v).map(|(a, b)| 0.5 * (a + b)).collect();
        let r = self.slope(&m);
        let g = oracle_g2(&self.nodes, &m, &r);
        let diff = DVector::from_iterator(u.len(), v.iter().zip(u).map(|(a, b)| (a - b) / dt));
        let lhs = &self.d * diff;
        lhs.iter().zip(&g).map(|(l, g)| l - g).collect()
    }
}

/// Finite difference equation residual written directly on a ghost-padded
/// array `[u_{-1}, u_0, ..., u_{N+2}]`.
pub fn oracle_fd_residual(u: &[f64], v: &[f64], dx: f64, dt: f64) -> Vec<f64> {
    let n = u.len();
    let pad = |w: &[f64]| -> Vec<f64> {
        // w holds u_1..u_N
        let mut g = vec![0.0; n + 4];
        g[1] = 0.0;
        g[2..n + 2].copy_from_slice(w);
        g[0] = w[0];
        g[n + 2] = w[n - 2];
        g[n + 3] = 2.0 * w[n - 1] - w[n - 3];
        g
    };
    let m: Vec<f64> = u.iter().zip(v).map(|(a, b)| 0.5 * (a + b)).collect();
    let (pu, pv, pm) = (pad(u), pad(v), pad(&m));
    let at = |g: &[f64], k: isize| g[(k + 1) as usize];
    let d2 = |g: &[f64], k: isize| (at(g, k + 1) - 2.0 * at(g, k) + at(g, k - 1)) / (dx * dx);
    let d1 = |g: &[f64], k: isize| (at(g, k + 1) - at(g, k - 1)) / (2.0 * dx);
    (1..=n as isize)
        .map(|k| {
            let lhs = (d2(&pv, k) - d2(&pu, k)) / dt;
            let prod = |j: isize| at(&pm, j) * d2(&pm, j);
            let rhs = -d2(&pm, k) * d1(&pm, k) - (prod(k + 1) - prod(k - 1)) / (2.0 * dx);
            lhs - rhs
        })
        .collect()
}

/// Newton with a central-difference Jacobian and dense LU.
pub fn dense_solve(residual: impl Fn(&[f64]) -> Vec<f64>, guess: &[f64]) -> Vec<f64> {
    let n = guess.len();
    let mut v = guess.to_vec();
    for _ in 0..60 {
        let r = residual(&v);
        let eps = 1e-6;
        let jac = DMatrix::from_fn(n, n, |_, _| 0.0);
        let mut jac = jac;
        for j in 0..n {
            let mut plus = v.clone();
            let mut minus = v.clone();
            plus[j] += eps;
            minus[j] -= eps;
            let (rp, rm) = (residual(&plus), residual(&minus));
            for i in 0..n {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * eps);
            }
        }
        let rhs = -DVector::from_column_slice(&r);
        let delta = jac.lu().solve(&rhs).expect("oracle Jacobian singular");
        let step = delta.amax();
        v.iter_mut().zip(delta.iter()).for_each(|(x, d)| *x += d);
        if step < 1e-15 {
            break;
        }
    }
    v
}

pub fn random_mesh_nodes(rng: &mut impl Rng, n: usize, half_width: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v *= 2.0 * half_width / total);
    let mut nodes = vec![-half_width];
    for h in w.iter().take(n - 1) {
        let last = *nodes.last().unwrap();
        nodes.push(last + h);
    }
    nodes.push(half_width);
    nodes
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
