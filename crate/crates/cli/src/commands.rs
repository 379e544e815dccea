use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hunter_saxton::schemes::{self, build_stepper, Profile, Trajectory};
use hunter_saxton::{ExactSolution, Mesh};
use rayon::prelude::*;

use crate::error::{spec, CliError, Result};
use crate::spec::{reference, MeshSource, RunSpec, DEFAULT_ELEMENTS, DEFAULT_HALF_WIDTH};

pub const PROFILE_FILE: &str = "profile.csv";
pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const MESH_FILE: &str = "mesh.txt";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const COMPARE_FILE: &str = "compare.csv";

/// Initial profile: the reference solution at `t = 0`.
pub fn initial_profile(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// A finished run, before anything is written.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub mesh: Arc<Mesh>,
    pub exact: ExactSolution,
    pub trajectory: Trajectory,
    pub warnings: Vec<String>,
}

pub fn simulate(spec: &RunSpec) -> Result<Simulation> {
    let mesh = spec.build_mesh()?;
    let exact = reference(mesh.half_width())?;
    let mut warnings = Vec::new();
    let steps = spec.config().steps();
    let t_last = steps as f64 * spec.dt;
    if !exact.covers(t_last) {
        warnings.push(format!(
            "t = {t_last} reaches the reference horizon {} for L = {}; errors past it are left empty",
            exact.horizon(),
            mesh.half_width()
        ));
    }
    let trajectory = schemes::run(&spec.config(), mesh.clone(), &initial_profile, Some(&exact))?;
    Ok(Simulation {
        mesh,
        exact,
        trajectory,
        warnings,
    })
}

impl Simulation {
    pub fn final_profile(&self, spec: &RunSpec) -> Result<Profile> {
        let stepper = build_stepper(spec.scheme, self.mesh.clone(), spec.dt, spec.newton)?;
        let last = self.trajectory.last();
        Ok(schemes::profile(
            stepper.as_ref(),
            &last.coefficients,
            last.time,
            Some(&self.exact),
        )?)
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub h1_drift: f64,
    pub final_error: Option<f64>,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let wrap = |source: csv::Error| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn profile_rows(p: &Profile) -> Vec<Vec<String>> {
    (0..p.x.len())
        .map(|k| {
            vec![
                num(p.x[k]),
                num(p.u[k]),
                num(p.ux_element[k]),
                num(p.ux_recovered[k]),
                opt(p.u_exact.as_ref().map(|v| v[k])),
                opt(p.ux_exact.as_ref().map(|v| v[k])),
            ]
        })
        .collect()
}

pub fn timeseries_rows(t: &Trajectory) -> Vec<Vec<String>> {
    t.records
        .iter()
        .map(|r| {
            vec![
                r.step.to_string(),
                num(r.time),
                num(r.h1),
                num(r.h2),
                opt(r.linf_error),
                r.newton_iterations.to_string(),
            ]
        })
        .collect()
}

/// Runs one spec and writes its CSVs into `spec.out`.
pub fn cmd_run(spec: &RunSpec) -> Result<RunSummary> {
    let sim = simulate(spec)?;
    create_dir(&spec.out)?;
    let mut files = Vec::new();
    if spec.emit.profile {
        let path = spec.out.join(PROFILE_FILE);
        let cols = ["x", "u", "ux_element", "ux_recovered", "u_exact", "ux_exact"];
        write_csv(&path, &header(&cols), &profile_rows(&sim.final_profile(spec)?))?;
        files.push(path);
    }
    if spec.emit.timeseries {
        let path = spec.out.join(TIMESERIES_FILE);
        let cols = ["n", "t", "H1", "H2", "linf_error", "newton_iters"];
        write_csv(&path, &header(&cols), &timeseries_rows(&sim.trajectory))?;
        files.push(path);
    }
    if spec.emit.mesh {
        let path = spec.out.join(MESH_FILE);
        sim.mesh.write(&path)?;
        files.push(path);
    }
    Ok(RunSummary {
        steps: sim.trajectory.records.len(),
        h1_drift: sim.trajectory.h1_drift(),
        final_error: sim.trajectory.last().linf_error,
        files,
        warnings: sim.warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub elements: usize,
    pub dx: f64,
    pub linf_error: Option<f64>,
    pub h1_drift: f64,
}

/// Repeats `base` for every `N` in `elements` and writes `convergence.csv`.
pub fn cmd_convergence(base: &RunSpec, elements: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if elements.len() < 2 {
        return spec("a convergence study needs at least two resolutions");
    }
    if let MeshSource::File(_) = base.mesh {
        return spec("a convergence study needs a generated mesh, not a file");
    }
    base.validate()?;
    let half_width = base.half_width.unwrap_or(DEFAULT_HALF_WIDTH);
    let rows = elements
        .par_iter()
        .map(|&n| {
            let member = RunSpec {
                elements: Some(n),
                ..base.clone()
            };
            let sim = simulate(&member).map_err(|e| CliError::Member {
                label: format!("N = {n}"),
                source: Box::new(e),
            })?;
            Ok(ConvergenceRow {
                elements: n,
                dx: 2.0 * half_width / n as f64,
                linf_error: sim.trajectory.last().linf_error,
                h1_drift: sim.trajectory.h1_drift(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    create_dir(&base.out)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.elements.to_string(),
                num(r.dx),
                opt(r.linf_error),
                num(r.h1_drift),
            ]
        })
        .collect();
    let cols = ["N", "dx", "linf_error_at_t_end", "H1_drift"];
    write_csv(&base.out.join(CONVERGENCE_FILE), &header(&cols), &table)?;
    Ok(rows)
}

/// Column labels: scheme names, with `-2`, `-3`, ... on repeats.
pub fn labels(specs: &[RunSpec]) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(specs.len());
    for s in specs {
        let base = s.scheme.name().to_string();
        let seen = out
            .iter()
            .filter(|l| **l == base || l.starts_with(&format!("{base}-")))
            .count();
        out.push(if seen == 0 {
            base
        } else {
            format!("{base}-{}", seen + 1)
        });
    }
    out
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub labels: Vec<String>,
    pub trajectories: Vec<Trajectory>,
    pub warnings: Vec<String>,
}

/// Runs every spec and writes their time series side by side to
/// `out/compare.csv`.
pub fn cmd_compare(specs: &[RunSpec], out: &Path) -> Result<Comparison> {
    if specs.len() < 2 {
        return spec("a comparison needs at least two runs");
    }
    let (dt, t_end) = (specs[0].dt, specs[0].t_end);
    if specs.iter().any(|s| s.dt != dt || s.t_end != t_end) {
        return spec("all compared runs must share dt and t_end");
    }
    for s in specs {
        s.validate()?;
    }
    let labels = labels(specs);
    let sims = specs
        .par_iter()
        .zip(labels.par_iter())
        .map(|(s, label)| {
            simulate(s).map_err(|e| CliError::Member {
                label: label.clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cols = header(&["n", "t"]);
    for label in &labels {
        cols.push(format!("{label}_H1"));
        cols.push(format!("{label}_H2"));
        cols.push(format!("{label}_linf_error"));
    }
    let steps = sims[0].trajectory.records.len();
    let rows: Vec<Vec<String>> = (0..steps)
        .map(|i| {
            let first = &sims[0].trajectory.records[i];
            let mut row = vec![first.step.to_string(), num(first.time)];
            for sim in &sims {
                let r = &sim.trajectory.records[i];
                row.extend([num(r.h1), num(r.h2), opt(r.linf_error)]);
            }
            row
        })
        .collect();
    create_dir(out)?;
    write_csv(&out.join(COMPARE_FILE), &cols, &rows)?;

    let mut warnings: Vec<String> = sims.iter().flat_map(|s| s.warnings.clone()).collect();
    warnings.dedup();
    Ok(Comparison {
        labels,
        trajectories: sims.into_iter().map(|s| s.trajectory).collect(),
        warnings,
    })
}

/// Generates a uniform or graded mesh and writes it to `path`.
pub fn cmd_mesh(
    source: &MeshSource,
    half_width: Option<f64>,
    elements: Option<usize>,
    path: &Path,
) -> Result<Mesh> {
    let l = half_width.unwrap_or(DEFAULT_HALF_WIDTH);
    let n = elements.unwrap_or(DEFAULT_ELEMENTS);
    let mesh = match source {
        MeshSource::Uniform => Mesh::uniform(l, n)?,
        MeshSource::Graded { focus, fraction } => Mesh::graded(l, n, *focus, *fraction)?,
        MeshSource::File(_) => return spec("the mesh command generates uniform or graded meshes"),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    mesh.write(path)?;
    Ok(mesh)
}
