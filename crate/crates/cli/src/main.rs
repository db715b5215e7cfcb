use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lramm::bench::{
    profile, profile_model, run_experiment, run_mm, run_sweep, spectrum, spectrum_csv, sweep_csv,
    verify_bounds, with_threads, ErrorReport, ExperimentSpec, MmOptions, Strategy, SweepSpec,
    VerifyConfig,
};
use lramm::lramm::{LrammParams, Preset, DEFAULT_D0};
use lramm::matcore::{
    generate, load_matrix, read_csv, save_matrix, write_csv, DenseMatrix, Distribution,
};
use lramm::rsvd::{rsvd, RsvdParams, DEFAULT_OVERSAMPLE};
use lramm::{Error, Result};

/// Low-rank approximate matrix multiplication with mixed-bit quantized GEMM.
///
/// Speedups are reported from a bit-width-weighted MAC model (d² per
/// multiply-accumulate); wall-clock timings are informational only.
#[derive(Parser)]
#[command(name = "lramm", version)]
struct Cli {
    /// Base seed for generators and sketches.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "LRAMM_THREADS")]
    threads: Option<usize>,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Output path (stdout when omitted, except for `gen`).
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random matrix (LRMM binary, or CSV for a .csv path).
    Gen(GenArgs),
    /// Multiply two matrices with a strategy and report the error.
    Mm(MmArgs),
    /// Randomized SVD of a matrix.
    Rsvd(RsvdArgs),
    /// Run a JSON sweep spec and emit one row per grid point and seed.
    Sweep(SweepArgs),
    /// Singular values of a matrix.
    Spectrum(SpectrumArgs),
    /// Per-stage MAC and wall-clock breakdown of one multiply.
    Profile(ProfileArgs),
    /// Run the seeded bound checks; exits 1 on any violation.
    VerifyBounds(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// uniform, normal, exponential, binary, lowrank or lowrank:R:NOISE.
    #[arg(long, default_value = "uniform")]
    dist: String,
    /// Rank for `--dist lowrank`.
    #[arg(long)]
    rank: Option<usize>,
    /// Noise level for `--dist lowrank`.
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("inputs").required(true).args(["a", "spec"]))]
struct MmArgs {
    /// Left operand (m×k).
    #[arg(long, requires = "b")]
    a: Option<PathBuf>,
    /// Right operand (k×n).
    #[arg(long, requires = "a")]
    b: Option<PathBuf>,
    /// JSON experiment spec generating seeded operands instead of files.
    #[arg(long, conflicts_with_all = ["a", "b", "c"])]
    spec: Option<PathBuf>,
    /// exact | qgemm:D | trunc-svd:R | lramm:R:D1:D2:D3[:Q] | lramm:R:PRESET
    #[arg(long, default_value = "exact")]
    strategy: String,
    /// Addend for `α·A·B + β·C`.
    #[arg(long)]
    c: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = DEFAULT_OVERSAMPLE)]
    oversample: usize,
    /// Unquantized bit width in the MAC model.
    #[arg(long, default_value_t = DEFAULT_D0)]
    d0: u32,
    /// Also write the product matrix here.
    #[arg(long)]
    save: Option<PathBuf>,
}

#[derive(Args)]
struct RsvdArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    power_iters: u32,
    #[arg(long, default_value_t = DEFAULT_OVERSAMPLE)]
    oversample: usize,
    /// Write the factors as LRMM files next to this JSON manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep spec.
    spec: PathBuf,
    /// Drop the wall_ns column so the output is byte-stable.
    #[arg(long)]
    no_wall: bool,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["input", "rows"]))]
struct SpectrumArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, requires = "cols")]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long, default_value = "uniform")]
    dist: String,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long, requires = "b")]
    a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    b: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    m: usize,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 256)]
    k: usize,
    #[arg(long, default_value = "uniform")]
    dist: String,
    #[arg(long)]
    rank: usize,
    /// paper-tuned, balanced or max-speed.
    #[arg(long, default_value = "balanced", conflicts_with = "bits")]
    preset: String,
    /// Bit triple D1,D2,D3.
    #[arg(long, value_delimiter = ',')]
    bits: Option<Vec<u32>>,
    #[arg(long, default_value_t = DEFAULT_D0)]
    d0: u32,
    /// Evaluate the MAC model only, without running the multiply.
    #[arg(long)]
    model_only: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Seeds per check.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Scale the quantizer λ used by the bound check (fault injection).
    #[arg(long, default_value_t = 1.0, hide = true)]
    fault_lambda: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match with_threads(cli.threads, || run(&cli)).and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lramm: {e}");
            let usage =
                e.is_usage() || matches!(&e, Error::Io(io) if io.kind() == io::ErrorKind::NotFound);
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(args) => cmd_gen(cli, args),
        Command::Mm(args) => cmd_mm(cli, args),
        Command::Rsvd(args) => cmd_rsvd(cli, args),
        Command::Sweep(args) => cmd_sweep(cli, args),
        Command::Spectrum(args) => cmd_spectrum(cli, args),
        Command::Profile(args) => cmd_profile(cli, args),
        Command::VerifyBounds(args) => cmd_verify(cli, args),
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    if is_csv(path) {
        read_csv(&fs::read_to_string(path)?)
    } else {
        load_matrix(path)
    }
}

fn write_matrix(a: &DenseMatrix, path: &Path) -> Result<()> {
    if is_csv(path) {
        let mut out = io::BufWriter::new(fs::File::create(path)?);
        write_csv(a, &mut out)?;
        out.flush()?;
        Ok(())
    } else {
        save_matrix(a, path)
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.output {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn parse_dist(name: &str, rank: Option<usize>, noise: Option<f64>) -> Result<Distribution> {
    match (name, rank) {
        ("lowrank", Some(rank)) => Ok(Distribution::LowRankPlusNoise {
            rank,
            noise_sigma: noise.unwrap_or(0.0),
        }),
        _ => name.parse(),
    }
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<()> {
    let dist = parse_dist(&args.dist, args.rank, args.noise)?;
    let a = generate(args.rows, args.cols, dist, cli.seed)?;
    match &cli.output {
        Some(path) => write_matrix(&a, path),
        None => write_csv(&a, io::stdout().lock()),
    }
}

fn reports_text(cli: &Cli, reports: &[ErrorReport]) -> String {
    match cli.format.unwrap_or(Format::Json) {
        Format::Json if reports.len() == 1 => to_json(&reports[0]),
        Format::Json => to_json(&reports),
        Format::Csv => {
            let mut s = format!("{}\n", ErrorReport::CSV_HEADER);
            for r in reports {
                s.push_str(&r.csv_row());
                s.push('\n');
            }
            s
        }
    }
}

fn cmd_mm(cli: &Cli, args: &MmArgs) -> Result<()> {
    if let Some(spec_path) = &args.spec {
        let spec = ExperimentSpec::from_json(&fs::read_to_string(spec_path)?)?;
        let reports = run_experiment(&spec)?;
        let text = reports_text(cli, &reports);
        return match (&spec.output, &cli.output) {
            (Some(path), None) => Ok(fs::write(path, text)?),
            _ => emit(cli, &text),
        };
    }
    let strategy: Strategy = args.strategy.parse()?;
    let (a_path, b_path) = (args.a.as_ref(), args.b.as_ref());
    let a = read_matrix(a_path.expect("clap enforces --a"))?;
    let b = read_matrix(b_path.expect("clap enforces --b"))?;
    let c = args.c.as_deref().map(read_matrix).transpose()?;
    let opts = MmOptions {
        seed: cli.seed,
        alpha: args.alpha,
        beta: args.beta,
        oversample: args.oversample,
        d0: args.d0,
    };
    let out = run_mm(&a, &b, c.as_ref(), strategy, &opts)?;
    if let Some(path) = &args.save {
        write_matrix(&out.d, path)?;
    }
    emit(cli, &reports_text(cli, &[out.report]))
}

fn cmd_rsvd(cli: &Cli, args: &RsvdArgs) -> Result<()> {
    let a = read_matrix(&args.input)?;
    let params = RsvdParams::new(args.rank)
        .power_iters(args.power_iters)
        .oversample(args.oversample)
        .seed(cli.seed);
    let f = rsvd(&a, &params)?;
    if let Some(manifest) = &args.manifest {
        f.save(manifest)?;
    }
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => spectrum_csv(&f.sigma),
        Format::Json => to_json(&serde_json::json!({
            "m": a.rows(),
            "n": a.cols(),
            "r": args.rank,
            "q": args.power_iters,
            "oversample": args.oversample,
            "seed": cli.seed,
            "sigma": f.sigma,
        })),
    };
    emit(cli, &text)
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<()> {
    let spec = SweepSpec::from_json(&fs::read_to_string(&args.spec)?)?;
    let rows = run_sweep(&spec)?;
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_csv(&rows, !args.no_wall),
        Format::Json => to_json(&rows),
    };
    emit(cli, &text)
}

fn cmd_spectrum(cli: &Cli, args: &SpectrumArgs) -> Result<()> {
    let a = match (&args.input, args.rows, args.cols) {
        (Some(path), _, _) => read_matrix(path)?,
        (None, Some(rows), Some(cols)) => generate(rows, cols, args.dist.parse()?, cli.seed)?,
        _ => unreachable!("clap enforces an input source"),
    };
    let sigma = spectrum(&a)?;
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => spectrum_csv(&sigma),
        Format::Json => to_json(&serde_json::json!({ "sigma": sigma })),
    };
    emit(cli, &text)
}

fn cmd_profile(cli: &Cli, args: &ProfileArgs) -> Result<()> {
    let bits = match &args.bits {
        Some(b) => <[u32; 3]>::try_from(b.as_slice())
            .map_err(|_| Error::Parameter("--bits takes exactly three values".into()))?,
        None => args.preset.parse::<Preset>()?.bits(),
    };
    let mut params = LrammParams::new(args.rank)
        .bits(bits[0], bits[1], bits[2])
        .seed(cli.seed);
    params.oversample = DEFAULT_OVERSAMPLE;
    let report = if args.model_only {
        params.validate(args.m, args.k, args.n)?;
        profile_model((args.m, args.n, args.k), args.rank, args.d0, bits)?
    } else {
        let (a, b) = match (&args.a, &args.b) {
            (Some(a), Some(b)) => (read_matrix(a)?, read_matrix(b)?),
            _ => {
                let dist: Distribution = args.dist.parse()?;
                lramm::bench::trial_operands(dist, (args.m, args.n, args.k), cli.seed)?
            }
        };
        profile(&a, &b, &params, args.d0)?
    };
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("stage,macs,mac_share,wall_ns,wall_share\n");
            let macs = report.macs.parts();
            let mac_shares = report.mac_shares.parts();
            let wall = report.wall_ns.parts();
            let wall_shares = report.wall_shares.parts();
            for i in 0..macs.len() {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    macs[i].0, macs[i].1, mac_shares[i].1, wall[i].1, wall_shares[i].1
                ));
            }
            s
        }
    };
    emit(cli, &text)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<()> {
    let cfg = VerifyConfig {
        seeds: args.seeds,
        base_seed: cli.seed,
        lambda_fault: args.fault_lambda,
    };
    let report = verify_bounds(&cfg)?;
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => report.csv(),
        Format::Json => to_json(&report),
    };
    emit(cli, &text)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        Err(Error::Io(io::Error::other(format!(
            "bound violated: {}",
            failed.join(", ")
        ))))
    }
}
