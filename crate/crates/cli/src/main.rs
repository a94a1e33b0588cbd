use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use mlmc_expmv::bench::{bench_complexity, bench_l0, bench_levels, write_rows_csv};
use mlmc_expmv::io::{read_matrix_market, read_vector, write_matrix_market, write_result_to, Format, ResultRecord};
use mlmc_expmv::parallel::with_threads;
use mlmc_expmv::{
    load_fem_system, mc_auto, mlmc_driver, node_communicability, solve_convdiff_point, solve_heat_point,
    total_communicability, ChainDecomposition, Error, ErrorControl, GraphSpec, Grid3D, MlmcConfig, MlmcResult,
    Problem, SparseMatrix,
};

#[derive(Parser)]
#[command(name = "mlmc-expmv", version, about = "Multilevel Monte Carlo for e^{beta A} u")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Global random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Target root-mean-square error.
    #[arg(long, global = true, default_value_t = 1e-3)]
    epsilon: f64,
    /// Inverse temperature / time, or `auto` for 1 / d_max.
    #[arg(long, global = true, default_value = "auto", value_parser = parse_auto_f64)]
    beta: Auto<f64>,
    /// Coarsest level, or `auto` for round(log2(2 beta d_max)).
    #[arg(long, global = true, default_value = "auto", value_parser = parse_auto_u32)]
    l0: Auto<u32>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Stop on the statistical error alone (never add levels).
    #[arg(long, global = true)]
    statistical_only: bool,
    /// Levels allowed above l0 before the run gives up (exit code 2).
    #[arg(long, global = true, default_value_t = 30)]
    max_levels: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Json => Format::Json,
            OutputFormat::Csv => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Smallw,
    Pref,
}

#[derive(Args, Clone)]
struct MatrixSource {
    /// Matrix Market file holding A.
    #[arg(long, conflicts_with = "graph")]
    matrix: Option<PathBuf>,
    /// Generate A instead of reading it.
    #[arg(long, value_enum)]
    graph: Option<Kind>,
    #[command(flatten)]
    spec: GraphArgs,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Nodes.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Ring neighbours per side (smallw).
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Shortcut probability (smallw).
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Edges per new node (pref).
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 1)]
    graph_seed: u64,
}

impl GraphArgs {
    fn spec(&self, kind: Kind) -> GraphSpec {
        let base = match kind {
            Kind::Smallw => GraphSpec::smallw(self.n, self.graph_seed),
            Kind::Pref => GraphSpec::pref(self.n, self.graph_seed),
        };
        GraphSpec {
            k: self.k,
            p: self.p,
            d: self.d,
            ..base
        }
    }
}

impl MatrixSource {
    fn load(&self) -> Result<SparseMatrix> {
        match (&self.matrix, self.graph) {
            (Some(path), _) => read_matrix_market(path).with_context(|| format!("reading {}", path.display())),
            (None, Some(kind)) => Ok(self.spec.spec(kind).generate()?),
            (None, None) => bail!("give either --matrix or --graph"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Mlmc,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Initial {
    /// exp(-(x^2 + y^2 + z^2))
    Gaussian,
    /// Lowest discrete Dirichlet eigenfunction.
    Sine,
    Constant,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a network and write it as Matrix Market.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[command(flatten)]
        spec: GraphArgs,
    },
    /// Node or total communicability.
    Communicability {
        #[command(flatten)]
        source: MatrixSource,
        /// Node index; total communicability when omitted.
        #[arg(long)]
        node: Option<usize>,
    },
    /// One entry of e^{beta A} u.
    Entry {
        #[command(flatten)]
        source: MatrixSource,
        /// Vector u; all ones when omitted.
        #[arg(long)]
        vector: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, value_enum, default_value_t = Method::Mlmc)]
        method: Method,
    },
    /// Point value of the 3D heat equation on [-delta, delta]^3.
    Heat3d {
        #[arg(long, default_value_t = 16)]
        nx: usize,
        #[arg(long, default_value_t = 4.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Point as `x,y,z`.
        #[arg(long, default_value = "0,0,0", value_parser = parse_point)]
        point: [f64; 3],
        #[arg(long, value_enum, default_value_t = Initial::Gaussian)]
        initial: Initial,
    },
    /// Point value of a lumped FEM convection-diffusion system.
    Convdiff {
        #[arg(long)]
        mass: PathBuf,
        #[arg(long)]
        stiffness: PathBuf,
        #[arg(long)]
        load: PathBuf,
        #[arg(long)]
        u0: PathBuf,
        #[arg(long)]
        node: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Per-level means, variances and costs at a fixed sample count.
    BenchLevels {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, default_value_t = 0)]
        node: usize,
        /// Correction levels above l0.
        #[arg(long, default_value_t = 5)]
        levels: u32,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Cost against accuracy for MLMC and classical Monte Carlo.
    BenchComplexity {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, default_value_t = 0)]
        node: usize,
        /// Comma-separated accuracies.
        #[arg(long, value_delimiter = ',', default_value = "4e-3,2e-3,1e-3,5e-4,2.5e-4")]
        eps: Vec<f64>,
        /// Skip classical Monte Carlo.
        #[arg(long)]
        no_mc: bool,
    },
    /// Total cost at fixed accuracy against the coarsest level.
    BenchL0 {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, default_value_t = 0)]
        node: usize,
        #[arg(long, default_value_t = 0)]
        l0_min: u32,
        #[arg(long, default_value_t = 8)]
        l0_max: u32,
    },
}

/// A value or `auto`.
#[derive(Debug, Clone, Copy)]
struct Auto<T>(Option<T>);

fn parse_auto_f64(s: &str) -> std::result::Result<Auto<f64>, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Auto(None));
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is neither a number nor `auto`"))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(format!("must be positive, got {v}"));
    }
    Ok(Auto(Some(v)))
}

fn parse_auto_u32(s: &str) -> std::result::Result<Auto<u32>, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Auto(None));
    }
    s.parse()
        .map(|v| Auto(Some(v)))
        .map_err(|_| format!("`{s}` is neither an integer nor `auto`"))
}

fn parse_point(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| format!("bad point `{s}`: {e}"))?;
    parts
        .try_into()
        .map_err(|_| format!("point needs three coordinates, got `{s}`"))
}

impl Common {
    fn config(&self) -> Result<MlmcConfig> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            bail!(UsageError(format!("--epsilon must be positive, got {}", self.epsilon)));
        }
        let mut c = MlmcConfig::new(self.epsilon, self.seed).with_l0(self.l0.0);
        c.max_extra_levels = self.max_levels;
        if self.statistical_only {
            c.error_control = ErrorControl::Statistical;
        }
        Ok(c)
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn emit(&self, record: &ResultRecord) -> Result<()> {
        let mut w = self.sink()?;
        write_result_to(record, &mut w, self.format.into())?;
        w.flush()?;
        Ok(())
    }

    fn emit_report<T: serde::Serialize, R: serde::Serialize>(&self, report: &R, rows: &[T]) -> Result<()> {
        let mut w = self.sink()?;
        match self.format {
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut w, report)?;
                writeln!(w)?;
            }
            OutputFormat::Csv => write_rows_csv(rows, &mut w)?,
        }
        w.flush()?;
        Ok(())
    }

    fn record(&self, result: &MlmcResult, beta: f64, clock: Instant) -> ResultRecord {
        ResultRecord::from_mlmc(result, beta, clock.elapsed().as_secs_f64())
            .with_config("seed", self.seed)
            .with_config("epsilon", self.epsilon)
            .with_config("beta", beta)
            .with_config("l0", result.l0)
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn resolve_beta(beta: Option<f64>, dec: &ChainDecomposition) -> Result<f64> {
    match beta {
        Some(b) => Ok(b),
        None => Ok(dec.spectral_scale()?),
    }
}

/// Runs the driver and writes its record, also when it fails to converge.
fn finish(common: &Common, outcome: mlmc_expmv::Result<MlmcResult>, beta: f64, clock: Instant) -> Result<()> {
    match outcome {
        Ok(r) => common.emit(&common.record(&r, beta, clock)),
        Err(Error::NotConverged(partial)) => {
            common.emit(&common.record(&partial, beta, clock))?;
            Err(Error::NotConverged(partial).into())
        }
        Err(e) => Err(e.into()),
    }
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    match &cli.command {
        Command::Gen { kind, spec } => {
            let a = spec.spec(*kind).generate()?;
            match &common.output {
                Some(path) => write_matrix_market(&a, path)?,
                None => {
                    let mut out = io::stdout().lock();
                    mlmc_expmv::io::write_matrix_market_to(&a, &mut out)?;
                }
            }
            info!("generated n = {}, nnz = {}", a.n(), a.nnz());
            Ok(())
        }
        Command::Communicability { source, node } => {
            let a = source.load()?;
            let dec = ChainDecomposition::decompose(&a)?;
            let beta = resolve_beta(common.beta.0, &dec)?;
            let config = common.config()?;
            let clock = Instant::now();
            let outcome = with_threads(common.threads, || match node {
                Some(i) => node_communicability(&a, *i, Some(beta), &config),
                None => total_communicability(&a, Some(beta), &config),
            })?;
            finish(common, outcome, beta, clock)
        }
        Command::Entry {
            source,
            vector,
            index,
            method,
        } => {
            let a = source.load()?;
            let dec = ChainDecomposition::decompose(&a)?;
            let u = match vector {
                Some(p) => read_vector(p)?,
                None => vec![1.0; a.n()],
            };
            let beta = resolve_beta(common.beta.0, &dec)?;
            let config = common.config()?;
            let clock = Instant::now();
            match method {
                Method::Mlmc => {
                    let problem = Problem::Entry {
                        dec: &dec,
                        u: &u,
                        i: *index,
                        beta,
                    };
                    let outcome = with_threads(common.threads, || mlmc_driver(&problem, &config))?;
                    finish(common, outcome, beta, clock)
                }
                Method::Mc => {
                    let mc = with_threads(common.threads, || mc_auto(&dec, &u, *index, beta, common.epsilon, common.seed))??;
                    let r = &mc.result;
                    let record = ResultRecord {
                        estimate: r.estimate,
                        statistical_error: r.std_error,
                        bias_estimate: mc.bias_constant * r.dt * r.dt,
                        total_cost: r.wall_cost + mc.pilot_cost,
                        wall_time_seconds: clock.elapsed().as_secs_f64(),
                        converged: true,
                        levels: Vec::new(),
                        config: Default::default(),
                    }
                    .with_config("seed", common.seed)
                    .with_config("epsilon", common.epsilon)
                    .with_config("beta", beta)
                    .with_config("method", "mc")
                    .with_config("dt", r.dt)
                    .with_config("samples", r.samples);
                    common.emit(&record)
                }
            }
        }
        Command::Heat3d {
            nx,
            delta,
            t,
            point,
            initial,
        } => {
            let grid = Grid3D::new(*nx, *delta)?;
            let config = common.config()?;
            let d = *delta;
            let f = move |x: [f64; 3]| match initial {
                Initial::Gaussian => (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp(),
                Initial::Sine => x
                    .iter()
                    .map(|&c| (std::f64::consts::PI * (c + d) / (2.0 * d)).sin())
                    .product(),
                Initial::Constant => 1.0,
            };
            let clock = Instant::now();
            let outcome = with_threads(common.threads, || solve_heat_point(&grid, f, *point, *t, &config))?;
            let beta = t * grid.time_scale();
            let record = |sol: &mlmc_expmv::HeatSolution| {
                common
                    .record(&sol.result, sol.beta, clock)
                    .with_config("node", sol.node)
                    .with_config("t", t)
                    .with_config("nx", nx)
            };
            match outcome {
                Ok(sol) => common.emit(&record(&sol)),
                Err(Error::NotConverged(partial)) => {
                    common.emit(&common.record(&partial, beta, clock))?;
                    Err(Error::NotConverged(partial).into())
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Convdiff {
            mass,
            stiffness,
            load,
            u0,
            node,
            t,
        } => {
            let sys = load_fem_system(mass, stiffness, load, u0)?;
            let config = common.config()?;
            let clock = Instant::now();
            match with_threads(common.threads, || solve_convdiff_point(&sys, *node, *t, &config))? {
                Ok(r) => common.emit(
                    &common
                        .record(&r.result, *t, clock)
                        .with_config("node", node)
                        .with_config("quadrature_error", r.quadrature_error),
                ),
                Err(Error::NotConverged(partial)) => {
                    common.emit(&common.record(&partial, *t, clock))?;
                    Err(Error::NotConverged(partial).into())
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::BenchLevels {
            source,
            node,
            levels,
            samples,
        } => {
            let a = source.load()?;
            let dec = ChainDecomposition::decompose(&a)?;
            let beta = resolve_beta(common.beta.0, &dec)?;
            let u = vec![1.0; a.n()];
            let l0 = common.l0.0.unwrap_or_else(|| mlmc_expmv::initial_level(beta, dec.d_max()));
            let problem = Problem::Entry {
                dec: &dec,
                u: &u,
                i: *node,
                beta,
            };
            let report = with_threads(common.threads, || bench_levels(&problem, l0, *levels, *samples, common.seed))??;
            info!(
                "slopes: mean {:.3}, variance {:.3}, cost {:.3}",
                report.mean_slope, report.variance_slope, report.cost_slope
            );
            common.emit_report(&report, &report.rows)
        }
        Command::BenchComplexity {
            source,
            node,
            eps,
            no_mc,
        } => {
            let a = source.load()?;
            let dec = ChainDecomposition::decompose(&a)?;
            let beta = resolve_beta(common.beta.0, &dec)?;
            let u = vec![1.0; a.n()];
            let config = common.config()?;
            let report = with_threads(common.threads, || {
                bench_complexity(&dec, &u, *node, beta, eps, &config, !no_mc)
            })??;
            info!("slopes: mlmc {:.3}, mc {:.3}", report.mlmc_slope, report.mc_slope);
            common.emit_report(&report, &report.rows)
        }
        Command::BenchL0 {
            source,
            node,
            l0_min,
            l0_max,
        } => {
            if l0_min > l0_max {
                bail!(UsageError("--l0-min exceeds --l0-max".into()));
            }
            let a = source.load()?;
            let dec = ChainDecomposition::decompose(&a)?;
            let beta = resolve_beta(common.beta.0, &dec)?;
            let u = vec![1.0; a.n()];
            let config = common.config()?;
            let problem = Problem::Entry {
                dec: &dec,
                u: &u,
                i: *node,
                beta,
            };
            let values: Vec<u32> = (*l0_min..=*l0_max).collect();
            let report = with_threads(common.threads, || bench_l0(&problem, &values, &config))??;
            info!("best l0 {:?}, predicted {}", report.best_l0, report.predicted_l0);
            common.emit_report(&report, &report.rows)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::NotConverged(_)) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
