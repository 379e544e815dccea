//! Exact rarefaction solution used as reference.
//!
//! ```text
//!          ⎧ 0              x ≤ 0
//! u(x,t) = ⎨ x / s(t)       0 < x < s(t)²        s(t) = 0.5 t + 1
//!          ⎩ s(t)           s(t)² ≤ x
//! ```
//!
//! It solves the bounded problem on `[-L, L]` while the kink `s(t)²` stays
//! inside the domain, i.e. for `t ∈ [0, 2(√L - 1))`.

use crate::error::{param, Error, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution {
    half_width: f64,
}

/// A sample of `u_x`; `at_kink` marks a point where the derivative jumps and
/// the left-branch value was returned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeSample {
    pub value: f64,
    pub at_kink: bool,
}

fn s(t: f64) -> f64 {
    0.5 * t + 1.0
}

impl ExactSolution {
    pub fn new(half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 1.0) {
            return param(format!(
                "the exact solution needs L > 1 so that its kink starts inside the domain, got {half_width}"
            ));
        }
        Ok(ExactSolution { half_width })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// `2(√L - 1)`: the kink reaches `x = L` at this time.
    pub fn horizon(&self) -> f64 {
        2.0 * (self.half_width.sqrt() - 1.0)
    }

    pub fn covers(&self, t: f64) -> bool {
        (0.0..self.horizon()).contains(&t)
    }

    fn check(&self, x: f64, t: f64) -> Result<()> {
        if !self.covers(t) {
            return Err(Error::Domain(format!(
                "t = {t} outside [0, {})",
                self.horizon()
            )));
        }
        if !(x.abs() <= self.half_width) {
            return Err(Error::Domain(format!(
                "x = {x} outside [-{0}, {0}]",
                self.half_width
            )));
        }
        Ok(())
    }

    pub fn u(&self, x: f64, t: f64) -> Result<f64> {
        self.check(x, t)?;
        let st = s(t);
        Ok(if x <= 0.0 {
            0.0
        } else if x < st * st {
            x / st
        } else {
            st
        })
    }

    pub fn ux(&self, x: f64, t: f64) -> Result<SlopeSample> {
        self.check(x, t)?;
        let st = s(t);
        let kink = st * st;
        Ok(if x < 0.0 {
            SlopeSample { value: 0.0, at_kink: false }
        } else if x == 0.0 {
            SlopeSample { value: 0.0, at_kink: true }
        } else if x < kink {
            SlopeSample { value: 1.0 / st, at_kink: false }
        } else if x == kink {
            SlopeSample { value: 1.0 / st, at_kink: true }
        } else {
            SlopeSample { value: 0.0, at_kink: false }
        })
    }

    /// `u_t`; zero left of the origin, `-x/(2 s²)` on the ramp, `½` on the plateau.
    pub fn ut(&self, x: f64, t: f64) -> Result<f64> {
        self.check(x, t)?;
        let st = s(t);
        Ok(if x <= 0.0 {
            0.0
        } else if x < st * st {
            -0.5 * x / (st * st)
        } else {
            0.5
        })
    }

    /// `(H1, H2)` of the exact solution at time `t`.
    pub fn invariants(&self, t: f64) -> Result<(f64, f64)> {
        self.check(0.0, t)?;
        Ok((0.5, 0.25 * s(t)))
    }

    /// Max over mesh nodes of `|u_k - u(x_k, t)|`; `nodal` has one value per node.
    pub fn linf_error(&self, mesh: &Mesh, nodal: &[f64], t: f64) -> Result<f64> {
        if nodal.len() != mesh.nodes().len() {
            return param("nodal values do not match the mesh");
        }
        let mut err = 0.0f64;
        for (&x, &v) in mesh.nodes().iter().zip(nodal) {
            err = err.max((v - self.u(x, t)?).abs());
        }
        Ok(err)
    }
}
