use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use far3::bench::{covariance_scaling, linear_fit_r2, run_bench, BenchSpec};
use far3::convergence::{run_convergence, ConvergenceSpec};
use far3::icp::{icp, Correspondence, IcpConfig};
use far3::io::{parse_cloud, parse_d_matrix, parse_point_pairs, read_text};
use far3::output::{render, to_json, Format};
use far3::solve::{solve_d_matrix, solve_pairs};
use far3::{CliError, Result};
use far3_core::fa3r::{DEFAULT_EPSILON, DEFAULT_MAX_ITERATIONS};
use far3_core::fixed_point::DEFAULT_SCALE_BITS;
use far3_core::synth::run_case_catalog;
use far3_core::{Fa3rConfig, FixedConfig, SolverKind, SolverOptions};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "far3", version, about = "Rigid 3D registration by cross-product iteration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// svd, eig-p, eig-g, eig-k, eig-w, fa3r or fa3r-fixed
    #[arg(long, default_value = "fa3r")]
    solver: SolverKind,
    /// FA3R stopping threshold on the summed squared step.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// FA3R iteration cap (floating and fixed point).
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    max_iter: usize,
    /// Fixed-point scale exponent.
    #[arg(long, default_value_t = DEFAULT_SCALE_BITS)]
    scale_bits: u32,
}

impl SolverFlags {
    fn options(&self) -> Result<SolverOptions> {
        let fa3r = Fa3rConfig { epsilon: self.epsilon, max_iterations: self.max_iter, ..Fa3rConfig::default() };
        fa3r.validate()?;
        let fixed = FixedConfig { max_iterations: self.max_iter, ..FixedConfig::with_scale_bits(self.scale_bits) };
        fixed.validate()?;
        Ok(SolverOptions { fa3r, fixed, ..SolverOptions::default() })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Register a point-pair file, or a covariance given with --d-matrix.
    Solve {
        /// Rows of `rx ry rz bx by bz [weight]`.
        file: Option<PathBuf>,
        /// Nine comma-separated reals, row-major; replaces the file.
        #[arg(long, allow_hyphen_values = true)]
        d_matrix: Option<String>,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Time the solvers on identical synthetic inputs.
    Bench {
        /// Comma-separated solver list.
        #[arg(long, value_delimiter = ',', default_value = "svd,eig-w,fa3r")]
        solver: Vec<SolverKind>,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
        max_iter: usize,
        #[arg(long, default_value_t = DEFAULT_SCALE_BITS)]
        scale_bits: u32,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 10.0)]
        snr: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        warmup: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Time covariance construction at these point counts instead.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Per-iteration FA3R traces for a list of SNRs.
    Convergence {
        #[arg(long, value_delimiter = ',', default_value = "0.0001,0.01,1,100")]
        snr: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
        max_iter: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Align two clouds (3-column files) by iterative closest point.
    Icp {
        source: PathBuf,
        target: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, default_value_t = 50)]
        max_outer: usize,
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
        #[arg(long, value_enum, default_value_t = Correspondence::Auto)]
        correspondence: Correspondence,
    },
    /// The nine-case robustness catalog.
    Cases {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

/// Catalog row with the vector fields spread into columns.
#[derive(Serialize)]
struct CaseRow {
    case_id: usize,
    solver_name: String,
    estimated_euler_phi: f64,
    estimated_euler_theta: f64,
    estimated_euler_psi: f64,
    estimated_translation_x: f64,
    estimated_translation_y: f64,
    estimated_translation_z: f64,
    metric_error: f64,
    geodesic_error: f64,
    iterations: usize,
    wall_time: f64,
    degenerate: bool,
    gimbal_lock: bool,
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("FAR3_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| CliError::Input(format!("FAR3_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot size the worker pool: {e}")))
}

fn run(cli: Cli) -> Result<String> {
    configure_threads()?;
    match cli.command {
        Command::Solve { file, d_matrix, solver, format } => {
            let opts = solver.options()?;
            let out = match (d_matrix, file) {
                (Some(d), None) => solve_d_matrix(parse_d_matrix(&d)?, solver.solver, &opts)?,
                (None, Some(path)) => {
                    let pairs = parse_point_pairs(&read_text(&path)?, &path.display().to_string())?;
                    solve_pairs(&pairs, solver.solver, &opts)?
                }
                (Some(_), Some(_)) => return Err(CliError::Input("give either a file or --d-matrix, not both".into())),
                (None, None) => return Err(CliError::Input("missing input file (or --d-matrix)".into())),
            };
            match format {
                Format::Json => to_json(&out),
                Format::Csv => render(&[out.row()], Format::Csv),
            }
        }
        Command::Bench { solver, epsilon, max_iter, scale_bits, n, snr, trials, warmup, seed, sizes, format } => {
            if let Some(sizes) = sizes {
                let rows = covariance_scaling(&sizes, trials, seed)?;
                let xs: Vec<f64> = rows.iter().map(|r| r.n_points as f64).collect();
                let ys: Vec<f64> = rows.iter().map(|r| r.median_covariance_s).collect();
                eprintln!("linear fit R^2 = {}", linear_fit_r2(&xs, &ys));
                return render(&rows, format);
            }
            let flags = SolverFlags { solver: SolverKind::Fa3r, epsilon, max_iter, scale_bits };
            let spec = BenchSpec { solvers: solver, n_points: n, snr, trials, warmup, seed, options: flags.options()? };
            render(&run_bench(&spec)?, format)
        }
        Command::Convergence { snr, epsilon, max_iter, seed, trials, n, format } => {
            let config = Fa3rConfig { epsilon, max_iterations: max_iter, ..Fa3rConfig::default() };
            config.validate()?;
            render(&run_convergence(&ConvergenceSpec { snrs: snr, config, seed, trials, n_points: n })?, format)
        }
        Command::Icp { source, target, solver, max_outer, threshold, correspondence } => {
            let src = parse_cloud(&read_text(&source)?, &source.display().to_string())?;
            let tgt = parse_cloud(&read_text(&target)?, &target.display().to_string())?;
            let cfg = IcpConfig {
                max_outer_iterations: max_outer,
                correspondence,
                threshold,
                solver: solver.solver,
                options: solver.options()?,
            };
            to_json(&icp(&src, &tgt, &cfg)?)
        }
        Command::Cases { format } => {
            let rows: Vec<CaseRow> = run_case_catalog()
                .into_iter()
                .map(|r| CaseRow {
                    case_id: r.case_id,
                    solver_name: r.solver_name,
                    estimated_euler_phi: r.estimated_euler[0],
                    estimated_euler_theta: r.estimated_euler[1],
                    estimated_euler_psi: r.estimated_euler[2],
                    estimated_translation_x: r.estimated_translation[0],
                    estimated_translation_y: r.estimated_translation[1],
                    estimated_translation_z: r.estimated_translation[2],
                    metric_error: r.metric_error,
                    geodesic_error: r.geodesic_error,
                    iterations: r.iterations,
                    wall_time: r.wall_time,
                    degenerate: r.degenerate,
                    gimbal_lock: r.gimbal_lock,
                })
                .collect();
            render(&rows, format)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => match writeln!(std::io::stdout(), "{}", text.trim_end()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                eprintln!("error: cannot write output: {e}");
                ExitCode::from(1)
            }
            _ => ExitCode::SUCCESS,
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
