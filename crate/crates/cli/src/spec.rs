use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use hunter_saxton::{ExactSolution, Mesh, NewtonSettings, SchemeConfig, SchemeKind};

use crate::error::{spec, CliError, Result};

pub const DEFAULT_HALF_WIDTH: f64 = 6.0;
pub const DEFAULT_ELEMENTS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Uniform,
    /// `graded:a,b,fraction`
    Graded { focus: (f64, f64), fraction: f64 },
    File(PathBuf),
}

impl FromStr for MeshSource {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "uniform" {
            return Ok(MeshSource::Uniform);
        }
        if let Some(params) = s.strip_prefix("graded:") {
            let values: Vec<f64> = params
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| CliError::Spec(format!("graded mesh parameters {params:?}: {e}")))?;
            return match values[..] {
                [a, b, fraction] => Ok(MeshSource::Graded {
                    focus: (a, b),
                    fraction,
                }),
                _ => spec(format!("graded mesh needs a,b,fraction, got {params:?}")),
            };
        }
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return spec("file mesh needs a path");
            }
            return Ok(MeshSource::File(PathBuf::from(path)));
        }
        spec(format!(
            "unknown mesh {s:?}; expected uniform, graded:a,b,frac or file:path"
        ))
    }
}

impl fmt::Display for MeshSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshSource::Uniform => f.write_str("uniform"),
            MeshSource::Graded { focus, fraction } => {
                write!(f, "graded:{},{},{}", focus.0, focus.1, fraction)
            }
            MeshSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emit {
    pub profile: bool,
    pub timeseries: bool,
    pub mesh: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Emit {
            profile: true,
            timeseries: true,
            mesh: false,
        }
    }
}

/// Everything needed for one run.
///
/// `half_width` and `elements` default to 6 and 200 for generated meshes.
/// For file meshes they are read from the file and, when given, must agree
/// with it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub scheme: SchemeKind,
    pub half_width: Option<f64>,
    pub elements: Option<usize>,
    pub dt: f64,
    pub t_end: f64,
    pub mesh: MeshSource,
    pub out: PathBuf,
    pub newton: NewtonSettings,
    pub emit: Emit,
}

impl RunSpec {
    pub fn new(scheme: SchemeKind, out: impl Into<PathBuf>) -> Self {
        RunSpec {
            scheme,
            half_width: None,
            elements: None,
            dt: 0.01,
            t_end: 1.0,
            mesh: MeshSource::Uniform,
            out: out.into(),
            newton: NewtonSettings::default(),
            emit: Emit::default(),
        }
    }

    pub fn config(&self) -> SchemeConfig {
        SchemeConfig {
            kind: self.scheme,
            dt: self.dt,
            t_end: self.t_end,
            newton: self.newton,
        }
    }

    /// Checks everything that does not need the mesh file.
    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.half_width {
            if !(l.is_finite() && l > 0.0) {
                return spec(format!("L must be positive, got {l}"));
            }
        }
        if self.elements == Some(0) {
            return spec("N must be positive");
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return spec(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return spec(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.dt > self.t_end {
            return spec(format!("dt = {} exceeds t_end = {}", self.dt, self.t_end));
        }
        if !(self.newton.tolerance.is_finite() && self.newton.tolerance > 0.0) {
            return spec(format!("Newton tolerance must be positive, got {}", self.newton.tolerance));
        }
        if self.newton.max_iterations == 0 {
            return spec("Newton iteration limit must be positive");
        }
        if self.scheme == SchemeKind::Fd && matches!(self.mesh, MeshSource::Graded { .. }) {
            return spec("the fd scheme needs a uniform mesh");
        }
        Ok(())
    }

    /// Builds (or loads) the mesh and checks it against the spec.
    pub fn build_mesh(&self) -> Result<Arc<Mesh>> {
        self.validate()?;
        let mesh = match &self.mesh {
            MeshSource::Uniform => Mesh::uniform(self.l(), self.n())?,
            MeshSource::Graded { focus, fraction } => {
                Mesh::graded(self.l(), self.n(), *focus, *fraction)?
            }
            MeshSource::File(path) => {
                let mesh = Mesh::load(path)?;
                if let Some(l) = self.half_width {
                    if l != mesh.half_width() {
                        return spec(format!(
                            "L = {l} does not match the mesh file (L = {})",
                            mesh.half_width()
                        ));
                    }
                }
                if let Some(n) = self.elements {
                    if n != mesh.elements() {
                        return spec(format!(
                            "N = {n} does not match the mesh file (N = {})",
                            mesh.elements()
                        ));
                    }
                }
                mesh
            }
        };
        if self.scheme == SchemeKind::Fd && !mesh.is_uniform() {
            return spec("the fd scheme needs a uniform mesh");
        }
        if mesh.half_width() <= 1.0 {
            return spec(format!(
                "the initial profile needs L > 1, got L = {}",
                mesh.half_width()
            ));
        }
        Ok(Arc::new(mesh))
    }

    fn l(&self) -> f64 {
        self.half_width.unwrap_or(DEFAULT_HALF_WIDTH)
    }

    fn n(&self) -> usize {
        self.elements.unwrap_or(DEFAULT_ELEMENTS)
    }
}

/// Reference solution for a mesh of half-width `half_width > 1`.
pub fn reference(half_width: f64) -> Result<ExactSolution> {
    Ok(ExactSolution::new(half_width)?)
}
