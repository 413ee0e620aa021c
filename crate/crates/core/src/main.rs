use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hdcp::detect::{
    self, single_test_asymptotic, single_test_on_matrix, Calibration, DetectConfig,
};
use hdcp::eval::{run_experiment, DetectorConfig, DetectorMethod, SchemeChoice};
use hdcp::io::{ingest_csv, log_returns, write_csv_file, write_text};
use hdcp::limitdist::{estimate_quantiles, LimitMethod, QuantileTable};
use hdcp::metric::{
    build_scheme, pairwise_matrix, DataMatrix, DistanceMatrix, GroupingScheme, SchemeSpec,
};
use hdcp::report::{profiles_csv, to_json, DatasetSidecar, ReportConfig, SingleReport, WbsReport};
use hdcp::scan::weighted_t_profile;
use hdcp::simgen::{generate, Scenario};
use hdcp::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hdcp",
    version,
    about = "Change-point detection for high-dimensional sequences"
)]
struct Cli {
    /// Worker threads for permutation replicates (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test for a single change-point.
    DetectSingle(DetectArgs),
    /// Detect multiple change-points by wild binary segmentation.
    DetectWbs(DetectArgs),
    /// Simulate quantiles of the limiting null law.
    Quantiles(QuantileArgs),
    /// Generate a labeled synthetic dataset.
    Simulate(SimulateArgs),
    /// Score a detector on seeded replicates of a scenario.
    Evaluate(EvaluateArgs),
    /// Convert a price table to log returns.
    Returns(ReturnsArgs),
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    input: PathBuf,
    /// Input has a header row.
    #[arg(long)]
    header: bool,
    /// l1sqrt | euclid | groups:FILE | graph:FILE | dag:FILE
    #[arg(long, default_value = "l1sqrt")]
    scheme: String,
    #[arg(long, default_value_t = detect::DEFAULT_ALPHA)]
    alpha: f64,
    /// Permutation replicates B.
    #[arg(long, default_value_t = detect::DEFAULT_PERMUTATIONS)]
    perms: usize,
    /// Wild intervals M.
    #[arg(long, default_value_t = detect::DEFAULT_INTERVALS)]
    intervals: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON report path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Statistic profile CSV per analyzed segment.
    #[arg(long)]
    curve_out: Option<PathBuf>,
    /// Use a `prob,quantile` table instead of permutations (single test only).
    #[arg(long)]
    quantile_table: Option<PathBuf>,
    /// Record wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantileMethod {
    PairArray,
    DataBased,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct QuantileArgs {
    #[arg(long, value_enum, default_value = "pair-array")]
    method: QuantileMethod,
    /// Grid size N of the pair array.
    #[arg(long, default_value_t = 500)]
    grid: usize,
    /// Series length for the data-based sampler.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Dimension for the data-based sampler.
    #[arg(long, default_value_t = 400)]
    p: usize,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.95, 0.99])]
    probs: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Data CSV; the JSON sidecar goes to the same path with `.json`.
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    header: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalScheme {
    L1sqrt,
    Euclid,
    ChainGraph,
    ChainDag,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalMethod {
    Single,
    Wbs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, value_enum, default_value = "single")]
    method: EvalMethod,
    #[arg(long, value_enum, default_value = "l1sqrt")]
    scheme: EvalScheme,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    p: usize,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = detect::DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = detect::DEFAULT_PERMUTATIONS)]
    perms: usize,
    #[arg(long, default_value_t = detect::DEFAULT_INTERVALS)]
    intervals: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON summary path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-replicate CSV.
    #[arg(long)]
    records_out: Option<PathBuf>,
}

#[derive(Args)]
struct ReturnsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    header: bool,
    #[arg(long)]
    output: PathBuf,
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn parse_scheme(arg: &str, p: usize) -> Result<GroupingScheme> {
    let spec = match arg.split_once(':') {
        None if arg == "l1sqrt" => SchemeSpec::L1Sqrt,
        None if arg == "euclid" => SchemeSpec::Euclidean,
        Some(("groups", f)) => SchemeSpec::parse_groups(&read_file(Path::new(f))?)?,
        Some(("graph", f)) => SchemeSpec::parse_graph(&read_file(Path::new(f))?)?,
        Some(("dag", f)) => SchemeSpec::parse_dag(&read_file(Path::new(f))?)?,
        _ => {
            return Err(Error::Config(format!(
                "unknown scheme \"{arg}\"; expected l1sqrt, euclid, groups:FILE, graph:FILE or dag:FILE"
            )))
        }
    };
    build_scheme(&spec, p)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &DetectArgs) -> Result<(DataMatrix, DistanceMatrix)> {
    let data = ingest_csv(&args.input, args.header)?;
    let scheme = parse_scheme(&args.scheme, data.p())?;
    let d = pairwise_matrix(&data, &scheme)?;
    Ok((data, d))
}

fn detect_single(args: &DetectArgs) -> Result<()> {
    let start = Instant::now();
    let config = DetectConfig::new(args.alpha, args.perms, args.intervals, args.seed)?;
    let (data, d) = load(args)?;
    let result = match &args.quantile_table {
        Some(path) => single_test_asymptotic(&d, &QuantileTable::read_csv(path)?, args.alpha)?,
        None => single_test_on_matrix(&d, &config)?,
    };
    if let Some(path) = &args.curve_out {
        write_text(path, &profiles_csv(&[weighted_t_profile(&d, 1, d.n())?]))?;
    }
    let rc = ReportConfig::new(
        "detect-single",
        Some(args.input.display().to_string()),
        &args.scheme,
        data.n(),
        data.p(),
        &config,
        result.calibration,
    );
    let runtime = args.timing.then(|| start.elapsed().as_secs_f64());
    emit(
        args.output.as_deref(),
        &to_json(&SingleReport::new(rc, &result, runtime))?,
    )
}

fn detect_wbs(args: &DetectArgs) -> Result<()> {
    let start = Instant::now();
    if args.quantile_table.is_some() {
        return Err(Error::Config(
            "--quantile-table applies to detect-single only".into(),
        ));
    }
    let config = DetectConfig::new(args.alpha, args.perms, args.intervals, args.seed)?;
    let (data, d) = load(args)?;
    let set = detect::wbs_on_matrix(&d, &config)?;
    if let Some(path) = &args.curve_out {
        let mut segments = vec![(1, d.n())];
        for c in &set.details {
            for seg in [(c.segment.0, c.tau), (c.tau + 1, c.segment.1)] {
                if seg.1 + 1 >= seg.0 + 8 && !segments.contains(&seg) {
                    segments.push(seg);
                }
            }
        }
        segments.sort();
        let profiles = segments
            .iter()
            .map(|&(s, e)| weighted_t_profile(&d, s, e))
            .collect::<Result<Vec<_>>>()?;
        write_text(path, &profiles_csv(&profiles))?;
    }
    let rc = ReportConfig::new(
        "detect-wbs",
        Some(args.input.display().to_string()),
        &args.scheme,
        data.n(),
        data.p(),
        &config,
        Calibration::Permutation,
    );
    let runtime = args.timing.then(|| start.elapsed().as_secs_f64());
    emit(
        args.output.as_deref(),
        &to_json(&WbsReport::new(rc, set, runtime))?,
    )
}

fn quantiles(args: &QuantileArgs) -> Result<()> {
    let method = match args.method {
        QuantileMethod::PairArray => LimitMethod::PairArray { grid: args.grid },
        QuantileMethod::DataBased => LimitMethod::DataBased {
            n: args.n,
            p: args.p,
        },
    };
    let table = estimate_quantiles(method, args.reps, &args.probs, args.seed)?;
    let text = match args.format {
        Format::Csv => table.to_csv(),
        Format::Json => to_json(&table)?,
    };
    emit(args.output.as_deref(), &text)
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let scenario: Scenario = args.scenario.parse()?;
    let ds = generate(scenario, args.n, args.p, args.seed)?;
    write_csv_file(&args.output, &ds.data, args.header)?;
    let sidecar = DatasetSidecar::new(&ds, &args.output.display().to_string());
    write_text(&args.output.with_extension("json"), &to_json(&sidecar)?)
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let scenario: Scenario = args.scenario.parse()?;
    let detector = DetectorConfig {
        method: match args.method {
            EvalMethod::Single => DetectorMethod::Single,
            EvalMethod::Wbs => DetectorMethod::Wbs,
        },
        scheme: match args.scheme {
            EvalScheme::L1sqrt => SchemeChoice::L1Sqrt,
            EvalScheme::Euclid => SchemeChoice::Euclidean,
            EvalScheme::ChainGraph => SchemeChoice::ChainGraph,
            EvalScheme::ChainDag => SchemeChoice::ChainDag,
        },
        alpha: args.alpha,
        permutations: args.perms,
        intervals: args.intervals,
    };
    let summary = run_experiment(scenario, args.n, args.p, &detector, args.reps, args.seed)?;
    if let Some(path) = &args.records_out {
        write_text(path, &summary.records_csv())?;
    }
    emit(args.output.as_deref(), &to_json(&summary)?)
}

fn returns(args: &ReturnsArgs) -> Result<()> {
    let prices = ingest_csv(&args.input, args.header)?;
    write_csv_file(&args.output, &log_returns(&prices)?, args.header)
}

#[cfg(feature = "parallel")]
fn set_threads(threads: Option<usize>) -> Result<()> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn set_threads(_threads: Option<usize>) -> Result<()> {
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    set_threads(cli.threads)?;
    match &cli.command {
        Command::DetectSingle(a) => detect_single(a),
        Command::DetectWbs(a) => detect_wbs(a),
        Command::Quantiles(a) => quantiles(a),
        Command::Simulate(a) => simulate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Returns(a) => returns(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(3),
    }
}
