use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bearing_rigidity::io::{block_sidecar, framework_to_json, matrix_csv, read_framework, to_dot};
use bearing_rigidity::report::{analyze, batch_analyze, report_json, AnalysisOptions, BatchRow};
use bearing_rigidity::scenario::{augment_to_ibr, fixture, random_framework, GeneratorSpec, Placement, FIXTURE_NAMES};
use bearing_rigidity::{Error, ErrorKind, MetricSpace, SpaceAssignment, TolerancePolicy};
use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "brl", version, about = "Bearing rigidity analysis for multi-agent formations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Tuning {
    /// Relative singular-value cutoff per matrix dimension.
    #[arg(long, global = true)]
    rank_rtol: Option<f64>,
    /// Residual tolerance for subspace comparisons.
    #[arg(long, global = true)]
    subspace_tol: Option<f64>,
    /// Step of the finite-difference Jacobian check.
    #[arg(long, global = true)]
    fd_step: Option<f64>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of random variations in the finite-difference check.
    #[arg(long, global = true)]
    fd_trials: Option<usize>,
    /// JSON file with defaults for any of the flags above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one framework file and print the JSON report.
    Analyze {
        file: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write rigidity matrices as CSV (plus block-structure JSON) into this directory.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        /// Include wall-clock timing in the report.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Render a framework as Graphviz DOT.
    ExportDot {
        file: PathBuf,
        /// Greedily add edges until the framework is IBR and highlight them.
        #[arg(long)]
        augment: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Analyze every *.json file of a directory and print a summary table.
    Batch {
        dir: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Emit framework JSON: a named fixture or a seeded random framework.
    Gen {
        /// Named fixture; other generator flags are ignored.
        #[arg(long, conflicts_with_all = ["space", "spaces"])]
        fixture: Option<String>,
        /// Space label for every agent: R2, R3, R2xS1, R3xS1 or SE3.
        #[arg(long, default_value = "R2")]
        space: String,
        /// Comma-separated per-agent space labels (heterogeneous framework).
        #[arg(long, value_delimiter = ',')]
        spaces: Vec<String>,
        /// Rotation axis for R3xS1 agents, as x,y,z.
        #[arg(long, value_delimiter = ',')]
        axis: Option<Vec<f64>>,
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Fraction of the complete graph's edges.
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        /// Place agents on a line through the origin with this direction x,y,z.
        #[arg(long, value_delimiter = ',')]
        collinear: Option<Vec<f64>>,
        /// List fixture names and exit.
        #[arg(long)]
        list: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    rank_rtol: Option<f64>,
    subspace_tol: Option<f64>,
    fd_step: Option<f64>,
    seed: Option<u64>,
    fd_trials: Option<usize>,
    /// Named tolerance preset used as the base for the values above.
    profile: Option<String>,
}

enum Failure {
    Lib(Error),
    /// Batch finished but some files failed.
    Batch,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn base_policy(profile: Option<&str>) -> Result<TolerancePolicy, Error> {
    let Some(name) = profile else {
        return Ok(TolerancePolicy::default());
    };
    TolerancePolicy::profile(name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown tolerance profile '{name}' (default, strict, loose)")))
}

/// Flag > config file > `BRL_TOLERANCE_PROFILE` > built-in default.
fn resolve(t: &Tuning) -> Result<AnalysisOptions, Error> {
    let cfg: ConfigFile = match &t.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => ConfigFile::default(),
    };
    let env_profile = std::env::var("BRL_TOLERANCE_PROFILE").ok();
    let base = base_policy(cfg.profile.as_deref().or(env_profile.as_deref()))?;
    let tolerance = TolerancePolicy::new(
        t.rank_rtol.or(cfg.rank_rtol).unwrap_or(base.rank_rtol),
        t.subspace_tol.or(cfg.subspace_tol).unwrap_or(base.subspace_tol),
        t.fd_step.or(cfg.fd_step).unwrap_or(base.fd_step),
    )?;
    let defaults = AnalysisOptions::default();
    Ok(AnalysisOptions {
        tolerance,
        seed: t.seed.or(cfg.seed).unwrap_or(defaults.seed),
        fd_trials: t.fd_trials.or(cfg.fd_trials).unwrap_or(defaults.fd_trials),
        timing: false,
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn vec3(v: &[f64]) -> Result<Vector3<f64>, Error> {
    match v {
        [x, y, z] => Ok(Vector3::new(*x, *y, *z)),
        _ => Err(Error::InvalidArgument(format!("expected 3 comma-separated components, got {}", v.len()))),
    }
}

fn parse_space(label: &str, axis: Option<Vector3<f64>>) -> Result<MetricSpace, Error> {
    match label.trim().to_ascii_uppercase().as_str() {
        "R2" => MetricSpace::rd(2),
        "R3" => MetricSpace::rd(3),
        "R2XS1" | "SE2" => MetricSpace::rd_s1(2, None),
        "R3XS1" => MetricSpace::rd_s1(3, Some(axis.unwrap_or_else(Vector3::z))),
        "SE3" => Ok(MetricSpace::Se3),
        other => Err(Error::InvalidArgument(format!("unknown space '{other}' (R2, R3, R2xS1, R3xS1, SE3)"))),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { file, out, csv_dir, timing, tuning } => {
            let opts = AnalysisOptions { timing, ..resolve(&tuning)? };
            let fw = read_framework(&file)?;
            let a = analyze(&fw, &opts)?;
            if let Some(dir) = csv_dir {
                std::fs::create_dir_all(&dir)?;
                let mut mats = vec![("unified", &a.unified)];
                if let Some(b) = &a.per_space {
                    mats.push(("per_space", b));
                }
                for (name, b) in mats {
                    std::fs::write(dir.join(format!("{name}.csv")), matrix_csv(&b.matrix))?;
                    let side = serde_json::to_string_pretty(&block_sidecar(b)).map_err(Error::from)?;
                    std::fs::write(dir.join(format!("{name}.blocks.json")), side + "\n")?;
                }
            }
            emit(&(report_json(&a.report) + "\n"), out.as_deref())?;
        }
        Command::ExportDot { file, augment, out, tuning } => {
            let opts = resolve(&tuning)?;
            let fw = read_framework(&file)?;
            let (fw, added) = if augment { augment_to_ibr(&fw, &opts.tolerance)? } else { (fw, vec![]) };
            emit(&to_dot(&fw, &added), out.as_deref())?;
        }
        Command::Batch { dir, tuning } => {
            let opts = resolve(&tuning)?;
            let rows = batch_analyze(&dir, &opts)?;
            println!("{}", BatchRow::header());
            for r in &rows {
                println!("{}", r.to_tsv());
            }
            if rows.iter().any(BatchRow::is_error) {
                return Err(Failure::Batch);
            }
        }
        Command::Gen { fixture: name, space, spaces, axis, n, density, collinear, list, out, tuning } => {
            if list {
                emit(&(FIXTURE_NAMES.join("\n") + "\n"), out.as_deref())?;
                return Ok(());
            }
            let fw = if let Some(name) = name {
                fixture(&name)?
            } else {
                let opts = resolve(&tuning)?;
                let axis = axis.as_deref().map(vec3).transpose()?;
                let assignment = if spaces.is_empty() {
                    SpaceAssignment::Homogeneous(parse_space(&space, axis)?)
                } else {
                    SpaceAssignment::Heterogeneous(spaces.iter().map(|s| parse_space(s, axis)).collect::<Result<_, _>>()?)
                };
                let n = if spaces.is_empty() { n } else { spaces.len() };
                let mut spec = GeneratorSpec::homogeneous(MetricSpace::Se3, n, density, opts.seed);
                spec.spaces = assignment;
                if let Some(dir) = collinear {
                    spec = spec.with_placement(Placement::Collinear(vec3(&dir)?));
                }
                random_framework(&spec)?
            };
            emit(&(framework_to_json(&fw) + "\n"), out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Batch) => ExitCode::from(1),
        Err(Failure::Lib(e)) => {
            eprintln!("brl: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Parse => 2,
                ErrorKind::Validation => 3,
                ErrorKind::Numerical => 4,
            })
        }
    }
}
