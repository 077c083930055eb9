//! The `ebvariant` command line.
//!
//! Exit codes: `0` success, `2` usage or input-format error, `3` data,
//! estimation or IO failure. `--threads` (or `EBVARIANT_THREADS`) sets the
//! worker count; outputs do not depend on it.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::benchmark::{run_grid, run_roc, standard_grid, BenchmarkConfig, GridCell, Method};
use crate::embayes::{call_pipeline, HyperSource, Mode};
use crate::error::Error;
use crate::io::{read_counts, write_benchmark_table, write_calls, write_counts, write_roc, write_truth};
use crate::model::{Hyperparameters, PoolDesign, SiteCountMatrix};
use crate::moments::estimate;
use crate::simulator::{simulate, SimulationSpec, DEFAULT_COVERAGE_MEAN, DEFAULT_COVERAGE_SHAPE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ebvariant", version, about = "Empirical Bayes variant calling for pooled sequencing")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "EBVARIANT_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Call variants from a count table.
    Call(CallArgs),
    /// Simulate a count table and its truth sidecar.
    Simulate(SimulateArgs),
    /// Monte-Carlo ER/EV/FDR table over a (pi1, a) grid.
    Benchmark(BenchmarkArgs),
    /// Averaged top-k ROC curves for one (pi1, a) setting.
    Roc(RocArgs),
    /// Print moment statistics and estimated hyperparameters.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub pools: usize,
    #[arg(long, default_value_t = 20)]
    pub pool_size: u32,
    #[arg(long, default_value_t = 0.01)]
    pub error_rate: f64,
}

impl DesignArgs {
    fn design(&self) -> Result<PoolDesign, Failure> {
        if self.pools == 0 {
            return Err(Failure::Usage("--pools must be at least 1".into()));
        }
        if self.pool_size == 0 {
            return Err(Failure::Usage("--pool-size must be at least 1".into()));
        }
        PoolDesign::new(self.pools, self.pool_size, self.error_rate).map_err(usage)
    }
}

#[derive(Debug, Args)]
pub struct CallArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, requires = "oracle_a", conflicts_with_all = ["fixed_pi1", "fixed_a"])]
    pub oracle_pi1: Option<f64>,
    #[arg(long, requires = "oracle_pi1")]
    pub oracle_a: Option<f64>,
    #[arg(long, requires = "fixed_a")]
    pub fixed_pi1: Option<f64>,
    #[arg(long, requires = "fixed_pi1", conflicts_with = "oracle_a")]
    pub fixed_a: Option<f64>,
    /// Calls file (default: standard output).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 5)]
    pub pools: usize,
    #[arg(long, default_value_t = 20)]
    pub pool_size: u32,
    #[arg(long)]
    pub pi1: f64,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 0.01)]
    pub error_rate: f64,
    #[arg(long, default_value_t = DEFAULT_COVERAGE_MEAN)]
    pub coverage_mean: f64,
    #[arg(long, default_value_t = DEFAULT_COVERAGE_SHAPE)]
    pub coverage_shape: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Writes `<prefix>.counts.tsv` and `<prefix>.truth.tsv`.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Table1,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub p: usize,
    #[arg(long, default_value_t = 10)]
    pub replications: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub pools: usize,
    #[arg(long, default_value_t = 20)]
    pub pool_size: u32,
    #[arg(long, default_value_t = 0.01)]
    pub error_rate: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', default_value = "embayes,oracle,snver,meta")]
    pub methods: Vec<String>,
}

impl MonteCarloArgs {
    fn config(&self) -> Result<BenchmarkConfig, Failure> {
        check_alpha(self.alpha)?;
        let design = DesignArgs { pools: self.pools, pool_size: self.pool_size, error_rate: self.error_rate }
            .design()?;
        if self.p == 0 || self.replications == 0 {
            return Err(Failure::Usage("--p and --replications must be at least 1".into()));
        }
        let mut methods = Vec::new();
        for name in &self.methods {
            let m: Method = name.parse().map_err(usage)?;
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        if methods.is_empty() {
            return Err(Failure::Usage("--methods is empty".into()));
        }
        let mut config = BenchmarkConfig::standard(self.p, self.replications, self.seed);
        config.design = design;
        config.alpha = self.alpha;
        config.methods = methods;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, conflicts_with_all = ["pi1", "a"])]
    pub preset: Option<Preset>,
    /// Variant proportions of an explicit grid.
    #[arg(long, value_delimiter = ',', requires = "a")]
    pub pi1: Vec<f64>,
    /// Frequency bounds of an explicit grid.
    #[arg(long, value_delimiter = ',', requires = "pi1")]
    pub a: Vec<f64>,
    #[command(flatten)]
    pub run: MonteCarloArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[arg(long)]
    pub pi1: f64,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_calls: usize,
    #[command(flatten)]
    pub run: MonteCarloArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub design: DesignArgs,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => Failure::Usage(e.to_string()),
            other => Failure::Data(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(Error::Io(e))
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn check_alpha(alpha: f64) -> Result<(), Failure> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_cell(pi1: f64, a: f64) -> Result<GridCell, Failure> {
    Hyperparameters::new(pi1, a).map_err(usage)?;
    if pi1 >= 1.0 {
        return Err(Failure::Usage(format!("--pi1 must be below 1, got {pi1}")));
    }
    Ok(GridCell { pi1, a })
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_counts(path: &Path, design: &PoolDesign) -> Result<SiteCountMatrix, Failure> {
    let file = File::open(path).map_err(|e| Failure::Data(Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))))?;
    Ok(read_counts(BufReader::new(file), design)?)
}

fn cmd_call(args: &CallArgs) -> Result<(), Failure> {
    check_alpha(args.alpha)?;
    let design = args.design.design()?;
    let mode = match (args.oracle_pi1, args.oracle_a, args.fixed_pi1, args.fixed_a) {
        (Some(pi1), Some(a), None, None) => Mode::Oracle(Hyperparameters::new(pi1, a).map_err(usage)?),
        (None, None, Some(pi1), Some(a)) => Mode::Fixed(Hyperparameters::new(pi1, a).map_err(usage)?),
        (None, None, None, None) => Mode::Empirical,
        _ => return Err(Failure::Usage("give both --oracle-pi1/--oracle-a or both --fixed-pi1/--fixed-a".into())),
    };
    let data = load_counts(&args.input, &design)?;
    let result = call_pipeline(&data, &design, args.alpha, mode)?;
    let ids: Vec<String> = (0..data.num_sites()).map(|i| data.site_id(i).into_owned()).collect();
    let mut out = open_output(args.output.as_deref())?;
    write_calls(&result.calls, &result.scores, &ids, &mut out)?;
    out.flush()?;

    let calls = &result.calls;
    let mut summary = format!("sites={} rejected={}", data.num_sites(), calls.num_rejected);
    if let Some(source) = &calls.hyper_used {
        let h = source.hyper();
        summary += &format!(" mode={} pi1={} a={}", source.mode_name(), h.pi1(), h.a());
        if let HyperSource::Estimated(e) = source {
            if e.truncated_pi1 || e.truncated_a {
                summary += " (truncated)";
            }
        }
    }
    summary += &format!(" attained_bfdr={}", calls.attained_bfdr.unwrap_or(0.0));
    eprintln!("{summary}");
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let design = DesignArgs { pools: args.pools, pool_size: args.pool_size, error_rate: args.error_rate }.design()?;
    let mut spec = SimulationSpec::new(args.p, design, args.pi1, args.a, args.seed);
    spec.coverage_mean = args.coverage_mean;
    spec.coverage_shape = args.coverage_shape;
    spec.validate().map_err(usage)?;
    let (data, truth) = simulate(&spec)?;
    let prefix = args.out_prefix.display().to_string();
    let mut counts = BufWriter::new(File::create(format!("{prefix}.counts.tsv"))?);
    write_counts(&data, &mut counts)?;
    let mut truth_out = BufWriter::new(File::create(format!("{prefix}.truth.tsv"))?);
    write_truth(&data, &truth, &mut truth_out)?;
    eprintln!("sites={} variants={}", data.num_sites(), truth.num_variants());
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<(), Failure> {
    let config = args.run.config()?;
    let cells = match args.preset {
        Some(Preset::Table1) => standard_grid(),
        None if args.pi1.is_empty() => {
            return Err(Failure::Usage("give --preset table1 or --pi1 and --a lists".into()));
        }
        None => {
            let mut cells = Vec::new();
            for &pi1 in &args.pi1 {
                for &a in &args.a {
                    cells.push(check_cell(pi1, a)?);
                }
            }
            cells
        }
    };
    let results = run_grid(&config, &cells)?;
    let mut out = open_output(args.out.as_deref())?;
    write_benchmark_table(&results, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_roc(args: &RocArgs) -> Result<(), Failure> {
    let config = args.run.config()?;
    let cell = check_cell(args.pi1, args.a)?;
    if args.max_calls == 0 {
        return Err(Failure::Usage("--max-calls must be at least 1".into()));
    }
    let curves = run_roc(&config, cell, args.max_calls)?;
    let meta = [
        ("pi1", cell.pi1.to_string()),
        ("a", cell.a.to_string()),
        ("p", config.p.to_string()),
        ("replications", config.replications.to_string()),
    ];
    let mut out = open_output(args.out.as_deref())?;
    write_roc(&curves, &meta, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_estimate(args: &EstimateArgs) -> Result<(), Failure> {
    let design = args.design.design()?;
    let data = load_counts(&args.input, &design)?;
    let (m, e) = estimate(&data, &design)?;
    let mut out = io::stdout().lock();
    writeln!(out, "m1\t{}", m.m1)?;
    writeln!(out, "m2\t{}", m.m2)?;
    writeln!(out, "n_terms\t{}", m.n_terms)?;
    writeln!(out, "n_excluded\t{}", m.n_excluded)?;
    writeln!(out, "raw_pi1\t{}", e.raw_pi1)?;
    writeln!(out, "raw_a\t{}", e.raw_a)?;
    writeln!(out, "pi0\t{}", e.hyper.pi0())?;
    writeln!(out, "pi1\t{}", e.hyper.pi1())?;
    writeln!(out, "a\t{}", e.hyper.a())?;
    writeln!(out, "truncated_pi1\t{}", e.truncated_pi1 as u8)?;
    writeln!(out, "truncated_a\t{}", e.truncated_a as u8)?;
    writeln!(out, "clamped_pi1\t{}", e.clamped_pi1 as u8)?;
    writeln!(out, "clamped_a\t{}", e.clamped_a as u8)?;
    Ok(())
}

fn dispatch(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Call(a) => cmd_call(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Roc(a) => cmd_roc(a),
        Command::Estimate(a) => cmd_estimate(a),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(Failure::Data(Error::Domain(format!("thread pool: {e}")))),
        },
        None => dispatch(&cli.command),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}
