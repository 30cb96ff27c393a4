//! Command-line front end: BLER sweeps, gap readout at a target BLER, and a
//! quick transform cost comparison.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shortblock::channel::ChannelModel;
use shortblock::hadamard::{fast_transform, naive_transform};
use shortblock::sim::{
    estimate_gap_at_bler, gap_reports_to_csv, run_bler_sweep, BlerTable, SimConfig, SnrGrid,
};
use shortblock::{ReceiverKind, RegionScheme};

#[derive(Parser)]
#[command(
    name = "shortblock",
    version,
    about = "Link-level Monte Carlo toolkit for short-block uplink control payloads"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a BLER sweep and emit the result table as CSV.
    Simulate(SimulateArgs),
    /// Read a sweep CSV and report the SNR gap between two receivers.
    Gap(GapArgs),
    /// Compare fast and naive Hadamard transform cost on random blocks.
    CodecBench(CodecBenchArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON file mirroring the simulation config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Payload size in bits. Without --config this selects the default
    /// experiment template for that payload.
    #[arg(long)]
    payload: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated receiver keys
    /// (noncoherent, full-ec, quasi-coherent, fht-block, ht-block).
    #[arg(long, value_delimiter = ',')]
    receivers: Option<Vec<ReceiverKind>>,
    /// SNR grid in dB as start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    /// Trial budget per SNR point.
    #[arg(long)]
    trials: Option<u64>,
    /// Stop a point early once every receiver has this many errors
    /// (floored at 50).
    #[arg(long)]
    target_errors: Option<u64>,
    /// DMRS amplitude boost.
    #[arg(long)]
    beta: Option<f64>,
    /// Receive antenna count.
    #[arg(long)]
    antennas: Option<usize>,
    #[arg(long, value_enum)]
    channel: Option<ChannelArg>,
    /// Flatness-region granularity for channel estimation and metrics
    /// (per-prb or whole-frame).
    #[arg(long)]
    flatness: Option<RegionScheme>,
}

#[derive(Copy, Clone, ValueEnum)]
enum ChannelArg {
    /// Random line-of-sight phase per antenna.
    Los,
    /// TDL-C fading, 300 ns delay spread by default.
    Tdlc,
}

#[derive(Args)]
struct GapArgs {
    /// Sweep CSV produced by `simulate`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Receiver measured against the baseline.
    #[arg(long)]
    a: ReceiverKind,
    /// Baseline receiver.
    #[arg(long)]
    b: ReceiverKind,
    /// Target block error rate, e.g. 0.01.
    #[arg(long)]
    target: f64,
}

#[derive(Args)]
struct CodecBenchArgs {
    /// Transform order; block length is 2^m.
    #[arg(long, default_value_t = 5)]
    m: usize,
    /// Number of random blocks to transform.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Seed for the random blocks.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Gap(args) => gap(args),
        Command::CodecBench(args) => codec_bench(args),
    }
}

fn parse_snr(spec: &str) -> Result<SnrGrid, Box<dyn std::error::Error>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("--snr expects start:stop:step, got {spec:?}").into());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("--snr {spec:?}: {e}"))?;
    Ok(SnrGrid::new(nums[0], nums[1], nums[2])?)
}

fn simulate(args: SimulateArgs) -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            let mut cfg: SimConfig = serde_json::from_str(&text)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            if let Some(k) = args.payload {
                cfg.payload_k = k;
            }
            cfg
        }
        None => SimConfig::default_for_payload(args.payload.unwrap_or(4))?,
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(receivers) = args.receivers {
        cfg.receivers = receivers;
    }
    if let Some(snr) = &args.snr {
        cfg.snr = parse_snr(snr)?;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(target) = args.target_errors {
        cfg.target_errors = Some(target);
    }
    if let Some(beta) = args.beta {
        cfg.frame.beta = beta;
    }
    if let Some(antennas) = args.antennas {
        cfg.channel.n_rx = antennas;
    }
    if let Some(channel) = args.channel {
        cfg.channel.model = match channel {
            ChannelArg::Los => ChannelModel::LosPhase,
            ChannelArg::Tdlc => ChannelModel::TdlC,
        };
    }
    if let Some(flatness) = args.flatness {
        cfg.flatness = flatness;
    }
    let table = run_bler_sweep(&cfg)?;
    let csv = table.to_csv_string();
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| format!("{}: {e}", path.display()))?;
            eprintln!(
                "wrote {} rows to {}",
                table.rows.len(),
                path.display()
            );
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn gap(args: GapArgs) -> Result<(), Box<dyn std::error::Error>> {
    let table = BlerTable::read_csv(&args.input)?;
    let report = estimate_gap_at_bler(&table, args.a, args.b, args.target)?;
    print!("{}", gap_reports_to_csv(std::slice::from_ref(&report)));
    Ok(())
}

fn codec_bench(args: CodecBenchArgs) -> Result<(), Box<dyn std::error::Error>> {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    if args.m == 0 || args.m > 16 {
        return Err("--m must be in 1..=16".into());
    }
    if args.reps == 0 {
        return Err("--reps must be positive".into());
    }
    let n = 1usize << args.m;
    let mut rng = StdRng::seed_from_u64(args.seed);
    let blocks: Vec<Vec<f64>> = (0..args.reps)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();

    let start = Instant::now();
    let mut fast_ops = 0u64;
    for block in &blocks {
        let out = std::hint::black_box(fast_transform(block)?);
        fast_ops = out.ops;
    }
    let fast_time = start.elapsed();

    let start = Instant::now();
    let mut naive_ops = 0u64;
    for block in &blocks {
        let out = std::hint::black_box(naive_transform(block)?);
        naive_ops = out.ops;
    }
    let naive_time = start.elapsed();

    let mut max_diff = 0.0f64;
    for block in &blocks {
        let f = fast_transform(block)?;
        let v = naive_transform(block)?;
        for (a, b) in f.values.iter().zip(&v.values) {
            max_diff = max_diff.max((a - b).abs());
        }
    }

    println!("block length 2^{} = {}, {} repetitions", args.m, n, args.reps);
    println!(
        "fast transform:  {:>12} ops per block, total {:?}",
        fast_ops, fast_time
    );
    println!(
        "naive transform: {:>12} ops per block, total {:?}",
        naive_ops, naive_time
    );
    println!("max |fast - naive| = {max_diff:.3e}");
    Ok(())
}
