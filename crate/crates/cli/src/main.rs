//! `bdf3`: experiment driver for the variable-step BDF3 library.
//!
//! Every subcommand writes CSV (or Markdown) to stdout. With `--check` the
//! process exits with status 1 when the corresponding acceptance check
//! fails; usage and input errors exit with status 2.

use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};

use bdf3_core::bdf3_kernels::{
    compute_gamma_bar, monotonicity_check, re, re_equation, scan_lemma_positivity, RE_TOL,
};
use bdf3_core::doc_kernels::DocKernelTable;
use bdf3_core::experiments::{
    converge_table, emit, regression_slope, ConvergenceSetup, Format, MeshKind,
};
use bdf3_core::heat_solver::{
    smooth_random_field, truncation_error_direct, HeatSolver, Problem, SolverConfig, SpectralGrid,
    Starter,
};
use bdf3_core::quad_forms::eigscan;
use bdf3_core::TimeMesh;

#[derive(Parser, Debug)]
#[command(name = "bdf3", version, about = "Variable-step BDF3 experiments")]
struct Cli {
    /// Exit with status 1 if the subcommand's acceptance check fails.
    #[arg(long, global = true)]
    check: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convergence table for the manufactured heat solution.
    Converge {
        #[arg(long, value_enum, default_value_t = MeshArg::Periodic)]
        mesh: MeshArg,
        /// Ratio of the periodic mesh: a number, `Re`, or a multiple such as `2Re`.
        #[arg(long, default_value = "2Re", value_parser = parse_ratio)]
        mu: f64,
        #[arg(long, value_enum, default_value_t = StarterArg::Rk3)]
        starter: StarterArg,
        #[arg(long, value_delimiter = ',', default_value = "80,160,320,640,1280")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Minimum eigenvalue of the step-rescaled matrix over random ratios.
    Eigscan {
        /// Upper end of the ratio interval (number or multiple of `Re`).
        #[arg(long = "re", default_value = "Re", value_parser = parse_ratio)]
        limit: f64,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        runs: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Grid scans of the positivity lemmas and the coefficient monotonicity.
    Lemmas {
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Discrete energy of an unforced run.
    Energy {
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        kappa: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = MeshArg::Admissible)]
        mesh: MeshArg,
        #[arg(long, default_value = "2Re", value_parser = parse_ratio)]
        mu: f64,
        /// Lower end of the ratio interval of an admissible mesh.
        #[arg(long, default_value_t = 0.4)]
        r_min: f64,
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = StarterArg::Rk3)]
        starter: StarterArg,
    },
    /// Absolute row sums and leading DOC kernels.
    DocStats {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, value_enum, default_value_t = MeshArg::Admissible)]
        mesh: MeshArg,
        #[arg(long, default_value = "2Re", value_parser = parse_ratio)]
        mu: f64,
        #[arg(long, default_value_t = 0.4)]
        r_min: f64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Truncation error at `t = 1/2` on uniform meshes.
    Trunc {
        #[arg(long = "fn", value_enum, default_value_t = TruncFn::Sin)]
        function: TruncFn,
        /// Step counts; each must be even.
        #[arg(long, value_delimiter = ',', default_value = "20,40,80,160,320")]
        levels: Vec<usize>,
    },
    /// Step-ratio limit `R_e` and the companion pair of the gradient structure.
    ReRoot,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MeshArg {
    Uniform,
    Periodic,
    /// Normalized uniform random steps.
    Random,
    /// Random ratios on `(r_min, R_e)`.
    Admissible,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StarterArg {
    Rk3,
    Bdf2,
}

impl From<StarterArg> for Starter {
    fn from(s: StarterArg) -> Self {
        match s {
            StarterArg::Rk3 => Starter::Sdirk3,
            StarterArg::Bdf2 => Starter::Bdf2,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Csv,
    Md,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TruncFn {
    Cubic,
    Sin,
    Quartic,
}

/// `2Re`, `4Re`, `Re`, `1.5Re` or a plain number.
fn parse_ratio(text: &str) -> Result<f64, String> {
    let value = match text.strip_suffix("Re") {
        Some("") => re(),
        Some(factor) => factor
            .parse::<f64>()
            .map_err(|_| format!("bad ratio '{text}'"))?
            * re(),
        None => text.parse::<f64>().map_err(|_| format!("bad ratio '{text}'"))?,
    };
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(format!("ratio must be positive, got '{text}'"))
    }
}

fn build_mesh(kind: MeshArg, n: usize, mu: f64, r_min: f64, seed: u64) -> Result<TimeMesh> {
    Ok(match kind {
        MeshArg::Uniform => TimeMesh::uniform(1.0, n)?,
        MeshArg::Periodic => TimeMesh::periodic_ratio(1.0, n, mu)?,
        MeshArg::Random => TimeMesh::random(1.0, n, seed)?,
        MeshArg::Admissible => TimeMesh::random_ratios(1.0, n, r_min, re(), seed)?,
    })
}

/// Output text and whether the acceptance check passed.
struct Outcome {
    text: String,
    ok: bool,
}

#[allow(clippy::too_many_arguments)]
fn converge(
    mesh: MeshArg,
    mu: f64,
    starter: StarterArg,
    levels: Vec<usize>,
    seed: u64,
    grid: usize,
    eps: f64,
    horizon: f64,
    format: FormatArg,
) -> Result<Outcome> {
    let kind = match mesh {
        MeshArg::Periodic => MeshKind::Periodic { mu },
        MeshArg::Random => MeshKind::Random { seed },
        other => bail!("converge supports --mesh periodic or random, got {other:?}"),
    };
    let mut setup = ConvergenceSetup::new(kind, starter.into());
    setup.levels = levels;
    setup.grid = grid;
    setup.eps = eps;
    setup.horizon = horizon;
    let rows = converge_table(&setup)?;
    let ok = match kind {
        MeshKind::Periodic { .. } => rows
            .iter()
            .filter(|r| r.n >= 160)
            .all(|r| r.order.is_some_and(|o| (2.85..=3.15).contains(&o))),
        MeshKind::Random { .. } => rows.len() < 2 || (regression_slope(&rows)? - 3.0).abs() <= 0.2,
    };
    let format = match format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Md => Format::Markdown,
    };
    Ok(Outcome {
        text: emit(&rows, format),
        ok,
    })
}

fn eig(limit: f64, n: usize, runs: usize, seed: u64) -> Result<Outcome> {
    let scan = eigscan(limit, n, runs, seed)?;
    let mut text = String::from("run,min_eig\n");
    for (i, v) in scan.per_run.iter().enumerate() {
        text.push_str(&format!("{i},{v:e}\n"));
    }
    text.push_str(&format!(
        "# min over {runs} runs (limit {limit}, n {n}): {:e}\n",
        scan.min_over_runs
    ));
    let ok = limit > re() || scan.min_over_runs > 0.0;
    Ok(Outcome { text, ok })
}

fn lemmas(grid: usize, samples: usize, seed: u64) -> Result<Outcome> {
    let scan = scan_lemma_positivity(grid);
    let mono = monotonicity_check(samples, seed);
    let mut text = scan.to_csv();
    text.push_str(&format!(
        "# monotonicity: {} samples, {} violations, max |d2| {:e}, d2(Re, Re) {:e}\n",
        mono.samples, mono.violations, mono.max_abs_d2, mono.d2_at_limit
    ));
    Ok(Outcome {
        text,
        ok: scan.total_violations() == 0 && mono.violations == 0,
    })
}

#[allow(clippy::too_many_arguments)]
fn energy(
    kappa: f64,
    eps: f64,
    n: usize,
    seed: u64,
    mesh: MeshArg,
    mu: f64,
    r_min: f64,
    grid: usize,
    starter: StarterArg,
) -> Result<Outcome> {
    let mesh = build_mesh(mesh, n, mu, r_min, seed)?;
    let admissible = mesh.ratio_stats(re()).count_ge == 0;
    let solver = HeatSolver::new(SolverConfig {
        eps,
        kappa,
        starter: starter.into(),
        mesh,
        grid,
    })?;
    let initial = smooth_random_field(&SpectralGrid::new(grid)?, seed);
    let trace = solver
        .run(&Problem::Unforced { initial }, true)?
        .energy
        .unwrap_or_default();
    let mut text = String::from("n,E,grad_term,reaction_term,G_term,delta_E\n");
    let mut ok = true;
    let slack = 1e-12 * trace.records.first().map_or(1.0, |r| r.energy.max(1.0));
    let mut prev: Option<f64> = None;
    for r in &trace.records {
        let delta = prev.map(|p| r.energy - p);
        if let Some(d) = delta {
            ok &= d <= slack;
        }
        text.push_str(&format!(
            "{},{:e},{:e},{:e},{:e},{}\n",
            r.n,
            r.energy,
            r.grad_term,
            r.reaction_term,
            r.g_term,
            delta.map(|d| format!("{d:e}")).unwrap_or_default()
        ));
        prev = Some(r.energy);
    }
    // the dissipation law is only claimed for κ <= 0 on admissible meshes
    let ok = ok || kappa > 0.0 || !admissible;
    Ok(Outcome { text, ok })
}

fn doc_stats(n: usize, mesh: MeshArg, mu: f64, r_min: f64, seed: u64) -> Result<Outcome> {
    let mesh = build_mesh(mesh, n, mu, r_min, seed)?;
    let table = DocKernelTable::build(&mesh, n)?;
    let sums = table.abs_sums();
    let mut text = String::from("n,row_abs_sum,theta_0\n");
    let mut worst = 0.0_f64;
    for k in 3..=n {
        text.push_str(&format!("{k},{:e},{:e}\n", sums.row_sums[k - 3], table.theta(k, k)));
        worst = worst
            .max(table.orthogonality_residual(k)?)
            .max(table.mutual_orthogonality_residual(k)?);
    }
    text.push_str(&format!("# K3_hat {:e}, max orthogonality residual {worst:e}\n", sums.k3_hat));
    Ok(Outcome {
        text,
        ok: worst < 1e-11,
    })
}

fn trunc(function: TruncFn, levels: Vec<usize>) -> Result<Outcome> {
    let mut text = String::from("tau,zeta,slope\n");
    let mut ok = true;
    let mut prev: Option<(f64, f64)> = None;
    for &n in &levels {
        if n % 2 != 0 {
            bail!("trunc levels must be even, got {n}");
        }
        let mesh = TimeMesh::uniform(1.0, n)?;
        let j = n / 2;
        if j < 3 {
            bail!("trunc levels must be at least 6, got {n}");
        }
        let zeta = match function {
            TruncFn::Cubic => truncation_error_direct(|t| t * t * t, |t| 3.0 * t * t, &mesh, j)?,
            TruncFn::Sin => truncation_error_direct(f64::sin, f64::cos, &mesh, j)?,
            TruncFn::Quartic => truncation_error_direct(|t| t.powi(4), |t| 4.0 * t.powi(3), &mesh, j)?,
        };
        let tau = 1.0 / n as f64;
        let slope = match (function, prev) {
            (TruncFn::Cubic, _) | (_, None) => None,
            (_, Some((t0, z0))) => Some((z0.abs() / zeta.abs()).ln() / (t0 / tau).ln()),
        };
        match function {
            TruncFn::Cubic => ok &= zeta.abs() <= 1e-12,
            _ => ok &= slope.is_none_or(|s| (s - 3.0).abs() <= 0.05),
        }
        text.push_str(&format!(
            "{tau:e},{zeta:e},{}\n",
            slope.map(|s| s.to_string()).unwrap_or_default()
        ));
        prev = Some((tau, zeta));
    }
    Ok(Outcome { text, ok })
}

fn re_root() -> Result<Outcome> {
    let start = std::time::Instant::now();
    let r = re();
    let elapsed = start.elapsed();
    let residual = re_equation(r);
    let (gamma_bar, r_bar) = compute_gamma_bar(RE_TOL)?;
    let text = format!(
        "Re,residual,gamma_bar,Re_bar\n{r},{residual:e},{gamma_bar},{r_bar}\n# computed in {elapsed:?}\n"
    );
    Ok(Outcome {
        text,
        ok: (r - 1.4877).abs() <= 5e-4 && residual.abs() < 1e-10,
    })
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Converge {
            mesh,
            mu,
            starter,
            levels,
            seed,
            grid,
            eps,
            horizon,
            format,
        } => converge(mesh, mu, starter, levels, seed, grid, eps, horizon, format),
        Command::Eigscan { limit, n, runs, seed } => eig(limit, n, runs, seed),
        Command::Lemmas { grid, samples, seed } => lemmas(grid, samples, seed),
        Command::Energy {
            kappa,
            eps,
            n,
            seed,
            mesh,
            mu,
            r_min,
            grid,
            starter,
        } => energy(kappa, eps, n, seed, mesh, mu, r_min, grid, starter),
        Command::DocStats {
            n,
            mesh,
            mu,
            r_min,
            seed,
        } => doc_stats(n, mesh, mu, r_min, seed),
        Command::Trunc { function, levels } => trunc(function, levels),
        Command::ReRoot => re_root(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            if cli.check && !outcome.ok {
                eprintln!("check failed");
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
