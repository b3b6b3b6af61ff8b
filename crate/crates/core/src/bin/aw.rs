//! `aw`: adapted Wasserstein distances, plans, geodesics and curve
//! representations from the shell.
//!
//! Exit codes: 0 success, 1 negative answer (not equivalent, not bicausal,
//! failed check), 2 bad input, 3 shape mismatch, 4 size guard.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use adawass::bicausal::{bicausal_violation, check_multicausal};
use adawass::config::{Config, GridSpec, OutputFormat};
use adawass::curves::{Interpolation, IntervalQuotient};
use adawass::io;
use adawass::{
    aw_distance, aw_value, canonicalize, equivalent, flow_energy, geodesic, metric_derivative,
    p_energy, quantize_paths, represent_curve, skorokhod, validate, verify_flow_ac, Error,
    FlowOptions, TreeProcess,
};

#[derive(Parser)]
#[command(name = "aw", version, about = "Adapted optimal transport on scenario trees")]
struct Cli {
    /// Worker threads for the internal parallelism (default: all cores).
    #[arg(long, global = true, env = "ADAWASS_THREADS")]
    threads: Option<usize>,

    /// Largest admissible level of a product tree.
    #[arg(long, global = true, default_value_t = adawass::curves::DEFAULT_MAX_LEAVES)]
    max_leaves: usize,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Explicit grid, comma separated, e.g. 0,0.25,1
    #[arg(long, value_delimiter = ',', conflicts_with = "dyadic")]
    grid: Option<Vec<f64>>,
    /// Dyadic grid i/2^N.
    #[arg(long)]
    dyadic: Option<u32>,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        match (&self.grid, self.dyadic) {
            (Some(g), _) => GridSpec::Explicit(g.clone()),
            (None, Some(n)) => GridSpec::Dyadic(n),
            (None, None) => Config::default().grid,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a tree file against the schema and its invariants.
    Validate { tree: PathBuf },
    /// Adapted Wasserstein distance between two trees.
    Dist {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Also write the optimal bicausal plan.
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Optimal bicausal plan as JSON.
    Plan {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a plan file is a bicausal coupling of two trees.
    Check {
        x: PathBuf,
        y: PathBuf,
        plan: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Displacement-interpolation geodesic between two trees.
    Geodesic {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[command(flatten)]
        grid: GridArgs,
        /// Flow file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of grid interval and metric derivative.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// CSV of particle positions.
        #[arg(long)]
        particles: Option<PathBuf>,
    },
    /// Metric derivative and p-energy of a grid curve.
    CurveEnergy {
        curve: PathBuf,
        /// Order, unless the curve file fixes it.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Common-space flow representing a grid curve.
    Represent {
        curve: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Hold labels constant between grid points.
        #[arg(long)]
        piecewise_constant: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        particles: Option<PathBuf>,
    },
    /// Skorokhod representation of a sequence converging to a limit.
    Skorokhod {
        /// Directory of tree files, taken in file-name order.
        seq_dir: PathBuf,
        limit: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Interval weights, comma separated (canonical if omitted).
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy of a flow file.
    FlowEnergy {
        flow: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Per-interval comparison of adapted and common-space costs of a flow.
    VerifyFlow {
        flow: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Canonical representative of a tree.
    Canonical {
        tree: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two trees define the same process.
    Equiv {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Empirical tree from sample paths.
    Quantize {
        samples: PathBuf,
        /// Branching factor per time step, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        branching: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Lib(Error),
    /// A well-formed negative answer.
    Negative,
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

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ShapeMismatch(_) => 3,
        Error::SizeLimit { .. } => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative) => ExitCode::from(1),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => println!("{}", body.trim_end()),
    }
    Ok(())
}

fn config(cli: &Cli, p: f64) -> Result<Config, Failure> {
    let cfg = Config { p, max_leaves: cli.max_leaves, threads: cli.threads, ..Config::default() };
    cfg.validate()?;
    Ok(cfg)
}

fn opts(cfg: &Config, interpolation: Interpolation) -> FlowOptions {
    FlowOptions { max_leaves: cfg.max_leaves, interpolation }
}

fn read_two(x: &Path, y: &Path) -> Result<(TreeProcess, TreeProcess), Failure> {
    Ok((io::read_tree(x)?, io::read_tree(y)?))
}

fn quotient_table(q: &[IntervalQuotient], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => io::metric_derivative_csv(q),
        OutputFormat::Json => {
            let rows: Vec<_> = q
                .iter()
                .map(|r| serde_json::json!({"u_start": r.start, "u_end": r.end, "metric_derivative": r.quotient}))
                .collect();
            serde_json::to_string_pretty(&rows).expect("tables serialize")
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    }
    match &cli.cmd {
        Cmd::Validate { tree } => {
            let raw: adawass::RawTree = serde_json::from_str(&std::fs::read_to_string(tree)?)
                .map_err(Error::from)?;
            let v = validate(&raw);
            if v.is_empty() {
                println!("valid");
            } else {
                return Err(Error::InvalidTree(v).into());
            }
        }
        Cmd::Dist { x, y, p, plan_out } => {
            let cfg = config(&cli, *p)?;
            let (x, y) = read_two(x, y)?;
            let (v, plan) = aw_distance(&x, &y, cfg.p)?;
            println!("{v:.12}");
            if let Some(path) = plan_out {
                std::fs::write(path, io::plan_to_json(&plan))?;
            }
        }
        Cmd::Plan { x, y, p, out } => {
            let cfg = config(&cli, *p)?;
            let (x, y) = read_two(x, y)?;
            let (_, plan) = aw_distance(&x, &y, cfg.p)?;
            emit(out.as_deref(), &io::plan_to_json(&plan))?;
        }
        Cmd::Check { x, y, plan, tol } => {
            let cfg = Config { tol_check: *tol, ..Config::default() };
            cfg.validate()?;
            let (x, y) = read_two(x, y)?;
            let plan = io::plan_from_json(&std::fs::read_to_string(plan)?)?;
            let pairs = plan.index_pairs(&x, &y)?;
            let viol = bicausal_violation(&x, &y, &pairs);
            if viol <= cfg.tol_check {
                println!("bicausal (max residual {viol:e})");
            } else {
                println!("not bicausal (max residual {viol:e})");
                return Err(Failure::Negative);
            }
        }
        Cmd::Geodesic { x, y, p, grid, out, csv, particles } => {
            let cfg = Config { grid: grid.spec(), ..config(&cli, *p)? };
            cfg.validate()?;
            let (x, y) = read_two(x, y)?;
            let g = cfg.grid.points()?;
            let flow = geodesic(&x, &y, cfg.p, &g, opts(&cfg, Interpolation::Linear))?;
            if let Some(path) = csv {
                let curve = adawass::GridCurve::new(
                    g.clone(),
                    (0..g.len()).map(|k| flow.process_at(k)).collect(),
                    cfg.p,
                )?;
                std::fs::write(path, io::metric_derivative_csv(&metric_derivative(&curve)?))?;
            }
            if let Some(path) = particles {
                std::fs::write(path, io::particles_csv(&flow))?;
            }
            emit(out.as_deref(), &io::flow_to_json(&flow))?;
        }
        Cmd::CurveEnergy { curve, p, format } => {
            let cfg = Config {
                format: match format {
                    Format::Json => OutputFormat::Json,
                    Format::Csv => OutputFormat::Csv,
                },
                ..config(&cli, *p)?
            };
            let curve = io::curve_from_json(&std::fs::read_to_string(curve)?, cfg.p)?;
            let q = metric_derivative(&curve)?;
            println!("{}", quotient_table(&q, cfg.format).trim_end());
            println!("p_energy {:.12}", p_energy(&curve)?);
        }
        Cmd::Represent { curve, p, piecewise_constant, out, particles } => {
            let cfg = config(&cli, *p)?;
            let curve = io::curve_from_json(&std::fs::read_to_string(curve)?, cfg.p)?;
            let rule = if *piecewise_constant {
                Interpolation::PiecewiseConstant
            } else {
                Interpolation::Linear
            };
            let flow = represent_curve(&curve, opts(&cfg, rule))?;
            if let Some(c) = flow.coupling() {
                if !check_multicausal(c) {
                    eprintln!("warning: glued coupling fails the multicausality check");
                }
            }
            if let Some(path) = particles {
                std::fs::write(path, io::particles_csv(&flow))?;
            }
            emit(out.as_deref(), &io::flow_to_json(&flow))?;
        }
        Cmd::Skorokhod { seq_dir, limit, p, weights, out } => {
            let cfg = config(&cli, *p)?;
            let mut files: Vec<PathBuf> = std::fs::read_dir(seq_dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "json"))
                .collect();
            files.sort();
            let seq: Vec<TreeProcess> =
                files.iter().map(io::read_tree).collect::<adawass::Result<_>>()?;
            let limit = io::read_tree(limit)?;
            let flow =
                skorokhod(&seq, &limit, cfg.p, weights.as_deref(), opts(&cfg, Interpolation::Linear))?;
            let mut table = String::from("n\tu\tAW(Y^u, X^n)\n");
            for (k, target) in seq.iter().chain(std::iter::once(&limit)).enumerate() {
                let d = aw_value(&flow.process_at(k), target, cfg.p)?;
                let name = if k < seq.len() { (k + 1).to_string() } else { "limit".into() };
                let _ = writeln!(table, "{name}\t{}\t{d:e}", flow.grid()[k]);
            }
            match out {
                Some(path) => {
                    std::fs::write(path, io::flow_to_json(&flow))?;
                    print!("{table}");
                }
                None => {
                    eprint!("{table}");
                    println!("{}", io::flow_to_json(&flow));
                }
            }
        }
        Cmd::FlowEnergy { flow, p } => {
            let cfg = config(&cli, *p)?;
            let flow = io::flow_from_json(&std::fs::read_to_string(flow)?)?;
            println!("{:.12}", flow_energy(&flow, cfg.p)?);
        }
        Cmd::VerifyFlow { flow, p, tol } => {
            let cfg = config(&cli, *p)?;
            let flow = io::flow_from_json(&std::fs::read_to_string(flow)?)?;
            let report = verify_flow_ac(&flow, cfg.p)?;
            println!("u_start,u_end,lhs,rhs,slack");
            for c in &report.intervals {
                println!("{},{},{},{},{}", c.start, c.end, c.lhs, c.rhs, c.slack);
            }
            if !report.holds(*tol) {
                return Err(Failure::Negative);
            }
        }
        Cmd::Canonical { tree, tol, out } => {
            let cfg = Config { tol_equiv: *tol, ..Config::default() };
            cfg.validate()?;
            let t = io::read_tree(tree)?;
            let c = canonicalize(&t, cfg.tol_equiv);
            if let Some(path) = out {
                std::fs::write(path, io::tree_to_json(&c))?;
                println!("{}", c.len());
            } else {
                eprintln!("{} nodes", c.len());
                println!("{}", io::tree_to_json(&c));
            }
        }
        Cmd::Equiv { x, y, tol } => {
            let cfg = Config { tol_equiv: *tol, ..Config::default() };
            cfg.validate()?;
            let (x, y) = read_two(x, y)?;
            if equivalent(&x, &y, cfg.tol_equiv)? {
                println!("equivalent");
            } else {
                println!("not equivalent");
                return Err(Failure::Negative);
            }
        }
        Cmd::Quantize { samples, branching, seed, out } => {
            let cfg = Config { seed: *seed, ..Config::default() };
            let s = io::samples_from_json(&std::fs::read_to_string(samples)?)?;
            let t = quantize_paths(&s, branching, cfg.seed)?;
            emit(out.as_deref(), &io::tree_to_json(&t))?;
        }
    }
    Ok(())
}
