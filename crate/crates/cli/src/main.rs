use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hospec::{
    default_window, generate_gaussian_ar, generate_qpc, load_series, parallel_estimate, BenchPlan,
    CellStatus, EstimationConfig, Partition, SegmentConfig, SeriesFormat, SmoothingPlan,
    SpectrumOrder, WorkerConfig,
};

/// Direct-method bispectrum and trispectrum estimation.
#[derive(Parser)]
#[command(name = "hospec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a spectrum from a series file and write it as csv.
    Estimate(EstimateArgs),
    /// Time and meter a grid of configurations, writing a json report.
    Bench(BenchArgs),
    /// Write a synthetic series.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Args)]
struct EstimateArgs {
    /// 3 for the bispectrum, 4 for the trispectrum.
    #[arg(long, default_value = "3")]
    order: SpectrumOrder,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "csv")]
    format: SeriesFormat,
    /// Samples per segment; defaults to the series length over `--segments`.
    #[arg(long = "seg-len")]
    seg_len: Option<usize>,
    #[arg(long, default_value_t = 1)]
    segments: usize,
    /// Smoothing window M3; defaults to the table value for the segment length.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, default_value = "EFFICIENT")]
    plan: SmoothingPlan,
    #[arg(long, env = "HOSPEC_THREADS", default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value = "row_blocks")]
    partition: Partition,
    /// Conjugate the sum-frequency factor.
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    conjugate: Toggle,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "3")]
    orders: Vec<SpectrumOrder>,
    #[arg(long, value_delimiter = ',', default_value = "256,512")]
    sizes: Vec<usize>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "NAIVE,WS,PREFIX,FAST,EFFICIENT,STREAMING"
    )]
    plans: Vec<SmoothingPlan>,
    #[arg(
        long = "threads-list",
        value_delimiter = ',',
        env = "HOSPEC_THREADS",
        default_value = "1"
    )]
    threads_list: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 1)]
    segments: usize,
    /// Fixed M3 for every cell instead of the per-size table value.
    #[arg(long)]
    window: Option<usize>,
    /// Seconds allowed for a cell's first repeat.
    #[arg(long = "time-limit", default_value_t = 60.0)]
    time_limit: f64,
    /// Smoothing working-set bytes allowed for a cell.
    #[arg(long = "mem-limit", default_value_t = 4 << 30)]
    mem_limit: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Qpc,
    Ar,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    f1: f64,
    #[arg(long, default_value_t = 0.15)]
    f2: f64,
    /// Standard deviation of the additive noise (qpc).
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Comma-separated AR coefficients (ar).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Vec<f64>,
    #[arg(long, default_value = "csv")]
    format: SeriesFormat,
    #[arg(long)]
    out: PathBuf,
}

/// Failure with its exit status: 2 for configuration, 1 for I/O.
struct Failure {
    code: u8,
    message: String,
}

impl From<hospec::Error> for Failure {
    fn from(e: hospec::Error) -> Self {
        use hospec::Error;
        let flag = match &e {
            Error::Config { param, .. } => Some(flag_for(param)),
            Error::Unstable(_) => Some("--coeffs".to_string()),
            _ => None,
        };
        Failure {
            code: if e.is_config() { 2 } else { 1 },
            message: match flag {
                Some(flag) => format!("{flag}: {e}"),
                None => e.to_string(),
            },
        }
    }
}

fn flag_for(param: &str) -> String {
    match param {
        "M" => "--seg-len".into(),
        "K" => "--segments".into(),
        "K*M" => "--segments/--seg-len".into(),
        "frequency" => "--f1/--f2".into(),
        other => format!("--{other}"),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 1,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

fn estimate(args: EstimateArgs) -> Result<(), Failure> {
    let series = load_series(&args.input, args.format)?;
    let k = args.segments;
    if k == 0 {
        return Err(hospec::Error::Config {
            param: "K",
            message: "segment count must be positive".into(),
        }
        .into());
    }
    let m = args.seg_len.unwrap_or(series.len() / k);
    let m3 = args.window.unwrap_or_else(|| default_window(m));
    let cfg = EstimationConfig::new(args.order, SegmentConfig::new(m, k)?, m3, args.plan)
        .with_conjugate_last(matches!(args.conjugate, Toggle::On));
    let workers = WorkerConfig::new(args.threads)?.with_partition(args.partition);
    let grid = parallel_estimate(&series, &cfg, &workers)?;
    grid.write_csv(&args.out)?;
    eprintln!(
        "order {} M={m} K={k} M3={m3} plan {}: {} points written to {}",
        args.order,
        args.plan,
        grid.len(),
        args.out.display()
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    if !(args.time_limit > 0.0 && args.time_limit.is_finite()) {
        return Err(Failure {
            code: 2,
            message: format!(
                "--time-limit: must be a positive number of seconds, got {}",
                args.time_limit
            ),
        });
    }
    let plan = BenchPlan {
        orders: args.orders,
        sizes: args.sizes,
        plans: args.plans,
        threads: args.threads_list,
        repeats: args.repeats,
        segments: args.segments,
        window: args.window,
        time_limit: Duration::from_secs_f64(args.time_limit),
        mem_limit: args.mem_limit,
        seed: args.seed,
    };
    // fail on an unwritable report before spending time on the runs
    let file = File::create(&args.out).map_err(|e| io_failure(&args.out, e))?;
    eprintln!(
        "{:>9} {:>5} {:>6} {:>4} {:>3} {:>12} {:>14} {:>9}",
        "plan", "order", "n", "M3", "P", "seconds", "extra bytes", "status"
    );
    let reports = plan.run(|r| {
        let status = match r.status {
            CellStatus::Ok => "ok",
            CellStatus::Exceeded => "exceeded",
        };
        eprintln!(
            "{:>9} {:>5} {:>6} {:>4} {:>3} {:>12.6} {:>14} {:>9}",
            r.plan.name(),
            r.order,
            r.n,
            r.m3,
            r.p,
            r.wall_seconds,
            r.peak_extra_bytes,
            status
        );
    })?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, &reports)
        .map_err(std::io::Error::from)
        .and_then(|_| writeln!(out))
        .and_then(|_| out.flush())
        .map_err(|e| io_failure(&args.out, e))?;
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let series = match args.kind {
        Kind::Qpc => generate_qpc(args.f1, args.f2, args.n, args.noise, args.seed)?,
        Kind::Ar => generate_gaussian_ar(&args.coeffs, args.n, args.seed)?,
    };
    series.write(&args.out, args.format)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
