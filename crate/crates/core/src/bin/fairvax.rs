use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fairvax::exact_solver::{solve_exact, SolveConfig, SolveStatus};
use fairvax::formulation::{evaluate, SolutionFile};
use fairvax::harness::{compare, render_svg, to_json, write_csv, write_file, CompareConfig};
use fairvax::instance::{self, compute_distances, generate_clustered, GeneratorConfig};
use fairvax::reduced_alloc::{heuristic_solve, HeuristicConfig};
use fairvax::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fairvax",
    version,
    about = "Fair vaccination site selection and dose allocation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Heuristic,
}

#[derive(clap::Args)]
struct Limits {
    /// Largest zone count the exact solver accepts.
    #[arg(long, default_value_t = 10)]
    max_zones_exact: usize,
    /// Largest site count the exact solver accepts.
    #[arg(long, default_value_t = 6)]
    max_sites_exact: usize,
}

impl Limits {
    fn config(&self) -> Result<SolveConfig> {
        Ok(SolveConfig {
            max_zones_exact: self.max_zones_exact,
            max_sites_exact: self.max_sites_exact,
            ..SolveConfig::from_env()?
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded instance with planted zone clusters.
    Generate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        clusters: usize,
        /// Zones per cluster: one value for all clusters, or a comma list.
        #[arg(long, value_delimiter = ',', default_value = "9,8,9,8")]
        zones_per_cluster: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        sites: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance and write the solution with its metrics.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        k_min: usize,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        /// Override the instance's equity weight.
        #[arg(long)]
        theta: Option<f64>,
        /// Override the instance's accessibility weight.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Heuristic mode: also write clustering diagnostics here.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Run both methods and write a comparison row and report.
    Compare {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_json: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        k_min: usize,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        /// Include wall times (outputs are then no longer reproducible).
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        limits: Limits,
    },
    /// Render a solution as an SVG scatter plot.
    Report {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out_svg: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })
}

fn json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text.into_bytes()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            seed,
            clusters,
            zones_per_cluster,
            sites,
            out,
        } => {
            let cfg = GeneratorConfig {
                seed,
                num_clusters: clusters,
                zones_per_cluster,
                sites,
                ..GeneratorConfig::default()
            };
            let inst = generate_clustered(&cfg)?;
            write_file(&out, inst.to_json_string().as_bytes())?;
            eprintln!(
                "wrote {} zones and {} sites to {}",
                inst.num_zones(),
                inst.num_sites(),
                out.display()
            );
        }
        Command::Solve {
            instance,
            mode,
            seed,
            k_min,
            k_max,
            theta,
            alpha,
            out,
            diagnostics,
            limits,
        } => {
            let mut inst = instance::load(&instance)?;
            if let Some(t) = theta {
                inst.theta = t;
            }
            if let Some(a) = alpha {
                inst.alpha = a;
            }
            let file = match mode {
                Mode::Exact => {
                    let result = solve_exact(&inst, &compute_distances(&inst), &limits.config()?)?;
                    eprintln!("status: {:?}, nodes explored: {}", result.status, result.nodes_explored);
                    match (result.status, result.best) {
                        (_, Some(best)) => best.to_file(&inst),
                        (SolveStatus::Infeasible, None) => {
                            return Err(Error::InvalidArgument("no feasible solution exists".into()))
                        }
                        (_, None) => {
                            return Err(Error::InvalidArgument("time limit reached before any solution".into()))
                        }
                    }
                }
                Mode::Heuristic => {
                    let cfg = HeuristicConfig {
                        seed,
                        k_min,
                        k_max,
                        retry_smaller_k: false,
                    };
                    let mut result = heuristic_solve(&inst, &cfg)?;
                    eprintln!(
                        "clusters: {}, search space {} instead of {}",
                        result.diagnostics.k, result.diagnostics.space_reduced, result.diagnostics.space_full
                    );
                    if let Some(path) = diagnostics {
                        result.diagnostics.wall_time_s = None;
                        write_file(path, &json(&result.diagnostics))?;
                    }
                    result.evaluated.to_file(&inst)
                }
            };
            write_file(&out, &json(&file))?;
        }
        Command::Compare {
            instance,
            out_csv,
            out_json,
            seed,
            k_min,
            k_max,
            timings,
            limits,
        } => {
            let inst = instance::load(&instance)?;
            let cfg = CompareConfig {
                solve: limits.config()?,
                heuristic: HeuristicConfig {
                    seed,
                    k_min,
                    k_max,
                    retry_smaller_k: false,
                },
                timings,
            };
            let report = compare(&inst, &cfg)?;
            let mut csv = Vec::new();
            write_csv(&mut csv, std::slice::from_ref(&report))?;
            write_file(&out_csv, &csv)?;
            write_file(&out_json, to_json(&report).as_bytes())?;
            match report.gap_abs {
                Some(gap) => eprintln!("objective gap (exact - heuristic): {gap}"),
                None => eprintln!("exact solver skipped: instance beyond its limits"),
            }
        }
        Command::Report {
            solution,
            instance,
            out_svg,
        } => {
            let inst = instance::load(&instance)?;
            let sol = SolutionFile::from_json_str(&read(&solution)?)?.to_solution(&inst)?;
            evaluate(&inst, &compute_distances(&inst), &sol)?;
            write_file(&out_svg, render_svg(&inst, &sol, None).as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
