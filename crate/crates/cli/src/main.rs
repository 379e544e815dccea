use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hs_cli::{cmd_compare, cmd_convergence, cmd_mesh, cmd_run, CliError, Emit, MeshSource, RunSpec};
use hunter_saxton::{NewtonSettings, SchemeKind};

#[derive(Parser)]
#[command(name = "hs", version, about = "Hunter-Saxton experiments with CSV output")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Half-width of the domain [-L, L] (default 6, or taken from a mesh file)
    #[arg(long = "L")]
    half_width: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long = "t-end", default_value_t = 1.0)]
    t_end: f64,
    /// uniform | graded:a,b,fraction | file:path
    #[arg(long, default_value = "uniform")]
    mesh: String,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long = "newton-tol", default_value_t = 1e-12)]
    newton_tol: f64,
    #[arg(long = "newton-max-iter", default_value_t = 50)]
    newton_max_iter: usize,
}

impl Common {
    fn spec(&self, scheme: SchemeKind, elements: Option<usize>) -> Result<RunSpec, CliError> {
        Ok(RunSpec {
            scheme,
            half_width: self.half_width,
            elements,
            dt: self.dt,
            t_end: self.t_end,
            mesh: self.mesh.parse()?,
            out: self.out.clone(),
            newton: NewtonSettings {
                tolerance: self.newton_tol,
                max_iterations: self.newton_max_iter,
            },
            emit: Emit::default(),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scheme and write profile.csv and timeseries.csv
    Run {
        /// fd | g1 | g2 | euler-exp | euler-imp
        #[arg(long, default_value = "g1")]
        scheme: SchemeKind,
        /// Number of elements (default 200, or taken from a mesh file)
        #[arg(long = "N")]
        elements: Option<usize>,
        #[arg(long)]
        no_profile: bool,
        #[arg(long)]
        no_timeseries: bool,
        /// Also write the mesh as mesh.txt
        #[arg(long)]
        emit_mesh: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Repeat a run over several N and write convergence.csv
    Convergence {
        #[arg(long, default_value = "g1")]
        scheme: SchemeKind,
        /// Comma-separated element counts
        #[arg(long = "N", value_delimiter = ',', required = true)]
        elements: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run several schemes on the same setup and write compare.csv
    Compare {
        /// Comma-separated schemes
        #[arg(long, value_delimiter = ',', required = true)]
        scheme: Vec<SchemeKind>,
        #[arg(long = "N")]
        elements: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Write a mesh file
    Mesh {
        /// uniform | graded:a,b,fraction
        #[arg(long, default_value = "uniform")]
        mesh: String,
        #[arg(long = "L")]
        half_width: Option<f64>,
        #[arg(long = "N")]
        elements: Option<usize>,
        /// Mesh file to write
        #[arg(long)]
        out: PathBuf,
    },
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            scheme,
            elements,
            no_profile,
            no_timeseries,
            emit_mesh,
            common,
        } => {
            let mut spec = common.spec(scheme, elements)?;
            spec.emit = Emit {
                profile: !no_profile,
                timeseries: !no_timeseries,
                mesh: emit_mesh,
            };
            let summary = cmd_run(&spec)?;
            warn(&summary.warnings);
            let error = summary
                .final_error
                .map_or_else(|| "n/a".to_string(), |e| format!("{e:e}"));
            println!(
                "{scheme}: {} steps, H1 drift {:e}, final L-inf error {error}",
                summary.steps, summary.h1_drift
            );
            for f in summary.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Convergence {
            scheme,
            elements,
            common,
        } => {
            let spec = common.spec(scheme, None)?;
            let rows = cmd_convergence(&spec, &elements)?;
            for r in rows {
                let error = r.linf_error.map_or_else(|| "n/a".to_string(), |e| format!("{e:e}"));
                println!("N = {:>5}  error {error}  drift {:e}", r.elements, r.h1_drift);
            }
        }
        Command::Compare {
            scheme,
            elements,
            common,
        } => {
            let specs = scheme
                .iter()
                .map(|&s| common.spec(s, elements))
                .collect::<Result<Vec<_>, _>>()?;
            let cmp = cmd_compare(&specs, &common.out)?;
            warn(&cmp.warnings);
            println!("wrote {}", common.out.join(hs_cli::commands::COMPARE_FILE).display());
        }
        Command::Mesh {
            mesh,
            half_width,
            elements,
            out,
        } => {
            let source: MeshSource = mesh.parse()?;
            let m = cmd_mesh(&source, half_width, elements, &out)?;
            println!("wrote {} ({} elements)", out.display(), m.elements());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
