//! Command-line front end for the exponent compression toolkit.
//!
//! Exit codes: 0 success, 1 usage problem (bad flags or paths), 2 data
//! problem (malformed or corrupt input contents).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lexi_core::baselines;
use lexi_core::codebook::build_layer_codebook;
use lexi_core::container::{compress_to_vec, decompress_from_slice};
use lexi_core::flit::Flit;
use lexi_core::histogram::{run_histogram, EncoderConfig};
use lexi_core::io::{read_bf16_file, write_bf16_file};
use lexi_core::stream::encode_layer;
use lexi_core::synth::{
    generate_bf16, geometric_ratio_for_entropy, SynthDistribution,
};
use lexi_core::timing::{
    measure_exponent_cr, parse_trace_csv, simulate_trace, LinkModel, TrafficMode,
};
use lexi_core::{profile_stream, Bf16Triple};

#[derive(Parser)]
#[command(
    name = "lexi",
    version,
    about = "BF16 exponent-plane compression toolkit",
    after_help = "Exit codes: 0 success, 1 usage error, 2 data error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report per-field entropy of a raw .bf16 file as JSON
    Profile {
        /// Raw little-endian bf16 words
        input: PathBuf,
        #[command(flatten)]
        report: ReportArg,
    },
    /// Compress a .bf16 file into a self-describing container
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        report: ReportArg,
    },
    /// Expand a container back into the exact original .bf16 bytes
    Decompress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        report: ReportArg,
    },
    /// Encode a layer into link flits, reporting codebook cycles and ratios
    EncodeStream {
        input: PathBuf,
        /// Leading values fed to the histogram phase
        #[arg(long, default_value_t = 512)]
        sample: usize,
        /// Histogram lanes
        #[arg(long, default_value_t = 10)]
        lanes: usize,
        /// Per-lane cache depth
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Write the raw 16-byte-per-flit dump here
        #[arg(long)]
        flits: Option<PathBuf>,
        #[command(flatten)]
        report: ReportArg,
    },
    /// Compare codecs on the exponent plane of a .bf16 file
    Bench {
        #[arg(long, value_enum)]
        codec: CodecChoice,
        input: PathBuf,
        #[command(flatten)]
        report: ReportArg,
    },
    /// Grid-sweep lane count and cache depth, emitting CSV
    Sweep {
        /// Comma-separated lane counts
        #[arg(long, value_delimiter = ',', required = true)]
        lanes: Vec<usize>,
        /// Comma-separated cache depths
        #[arg(long, value_delimiter = ',', required = true)]
        depth: Vec<usize>,
        /// Leading values per histogram run; 0 means the whole file
        #[arg(long, default_value_t = 512)]
        sample: usize,
        input: PathBuf,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a transfer trace under a traffic mode and report link timing
    Simulate {
        /// uncompressed, weights, or lexi
        #[arg(long)]
        mode: String,
        /// Trace CSV: layerId,kind,valueCount,src,dst[,dataFile]
        #[arg(long)]
        trace: PathBuf,
        /// Exponent-plane ratio assumed for rows without a dataFile
        #[arg(long, default_value_t = 3.14)]
        cr: f64,
        #[command(flatten)]
        report: ReportArg,
    },
    /// Generate a synthetic .bf16 file with a shaped exponent distribution
    Gen {
        #[arg(long, value_enum)]
        dist: DistChoice,
        /// Distinct exponent values, most-probable-first around 0x7C
        #[arg(long, default_value_t = 32)]
        distinct: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Zipf exponent (zipf only)
        #[arg(long)]
        zipf_s: Option<f64>,
        /// Geometric decay ratio in (0, 1] (geometric only)
        #[arg(long)]
        ratio: Option<f64>,
        /// Target exponent entropy in bits; solves the geometric ratio
        #[arg(long)]
        entropy: Option<f64>,
        output: PathBuf,
    },
}

#[derive(Args)]
struct ReportArg {
    /// Also write the JSON report to this file
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodecChoice {
    Lexi,
    Rle,
    Bdi,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistChoice {
    Zipf,
    Geometric,
    Uniform,
}

enum CliError {
    /// Bad flags or unusable paths.
    Usage(String),
    /// Input bytes exist but do not parse or verify.
    Data(String),
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// File-content errors are data errors; failures to reach the file are
/// usage errors (a bad path on the command line).
fn classify(context: &str, err: lexi_core::Error) -> CliError {
    match err {
        lexi_core::Error::Io(e) => CliError::Usage(format!("{context}: {e}")),
        other => CliError::Data(format!("{context}: {other}")),
    }
}

fn read_values(path: &Path) -> CliResult<Vec<u16>> {
    read_bf16_file(path).map_err(|e| classify(&path.display().to_string(), e))
}

fn read_raw(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_raw(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn check_distinct_paths(input: &Path, output: &Path) -> CliResult<()> {
    if input == output {
        return Err(usage("output path equals input path; inputs are never rewritten"));
    }
    Ok(())
}

fn emit_report(value: &serde_json::Value, report: &ReportArg) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    println!("{text}");
    if let Some(path) = &report.report {
        write_raw(path, format!("{text}\n").as_bytes())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Profile { input, report } => cmd_profile(&input, &report),
        Command::Compress { input, output, report } => cmd_compress(&input, &output, &report),
        Command::Decompress { input, output, report } => cmd_decompress(&input, &output, &report),
        Command::EncodeStream { input, sample, lanes, depth, flits, report } => {
            cmd_encode_stream(&input, sample, lanes, depth, flits.as_deref(), &report)
        }
        Command::Bench { codec, input, report } => cmd_bench(codec, &input, &report),
        Command::Sweep { lanes, depth, sample, input, out } => {
            cmd_sweep(&lanes, &depth, sample, &input, out.as_deref())
        }
        Command::Simulate { mode, trace, cr, report } => cmd_simulate(&mode, &trace, cr, &report),
        Command::Gen { dist, distinct, count, seed, zipf_s, ratio, entropy, output } => {
            cmd_gen(dist, distinct, count, seed, zipf_s, ratio, entropy, &output)
        }
    }
}

fn cmd_profile(input: &Path, report: &ReportArg) -> CliResult<()> {
    let values = read_values(input)?;
    let profile =
        profile_stream(&values).map_err(|e| classify(&input.display().to_string(), e))?;
    let mut histogram = vec![0u64; 256];
    for &v in &values {
        histogram[Bf16Triple::split(v).exponent as usize] += 1;
    }
    let mut out = serde_json::to_value(&profile).expect("profile serializes");
    out["exponentHistogram"] = json!(histogram);
    out["config"] = json!({ "command": "profile", "input": input.display().to_string() });
    emit_report(&out, report)
}

fn cmd_compress(input: &Path, output: &Path, report: &ReportArg) -> CliResult<()> {
    check_distinct_paths(input, output)?;
    let values = read_values(input)?;
    let (bytes, stats) =
        compress_to_vec(&values).map_err(|e| classify(&input.display().to_string(), e))?;
    write_raw(output, &bytes)?;
    let out = json!({
        "config": {
            "command": "compress",
            "input": input.display().to_string(),
            "output": output.display().to_string(),
        },
        "stats": stats,
        "bytesIn": values.len() as u64 * 2,
        "bytesOut": bytes.len() as u64,
    });
    emit_report(&out, report)
}

fn cmd_decompress(input: &Path, output: &Path, report: &ReportArg) -> CliResult<()> {
    check_distinct_paths(input, output)?;
    let bytes = read_raw(input)?;
    let values =
        decompress_from_slice(&bytes).map_err(|e| classify(&input.display().to_string(), e))?;
    write_bf16_file(output, &values)
        .map_err(|e| usage(format!("{}: {e}", output.display())))?;
    let out = json!({
        "config": {
            "command": "decompress",
            "input": input.display().to_string(),
            "output": output.display().to_string(),
        },
        "valueCount": values.len() as u64,
        "bytesIn": bytes.len() as u64,
        "bytesOut": values.len() as u64 * 2,
    });
    emit_report(&out, report)
}

fn cmd_encode_stream(
    input: &Path,
    sample: usize,
    lanes: usize,
    depth: usize,
    flit_path: Option<&Path>,
    report: &ReportArg,
) -> CliResult<()> {
    let cfg = EncoderConfig { lanes, cache_depth: depth, sample_size: sample };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let values = read_values(input)?;
    let exponents: Vec<u8> = values.iter().map(|&v| Bf16Triple::split(v).exponent).collect();
    let build = build_layer_codebook(&exponents, &cfg)
        .map_err(|e| classify(&input.display().to_string(), e))?;
    let layer = encode_layer(&values, &build.codebook)
        .map_err(|e| classify(&input.display().to_string(), e))?;
    if let Some(path) = flit_path {
        write_raw(path, &Flit::dump(&layer.all_flits()))?;
    }
    let out = json!({
        "config": {
            "command": "encode-stream",
            "input": input.display().to_string(),
            "sample": sample,
            "lanes": lanes,
            "depth": depth,
            "flits": flit_path.map(|p| p.display().to_string()),
        },
        "cycles": build.cycles,
        "stats": layer.stats,
        "codedSymbols": build.codebook.coded_count(),
    });
    emit_report(&out, report)
}

fn cmd_bench(codec: CodecChoice, input: &Path, report: &ReportArg) -> CliResult<()> {
    let values = read_values(input)?;
    if values.is_empty() {
        return Err(CliError::Data(format!("{}: empty input", input.display())));
    }
    let n = values.len() as u64;
    let exponents: Vec<u8> = values.iter().map(|&v| Bf16Triple::split(v).exponent).collect();
    // Baselines leave sign and mantissa uncompressed at 8 bits per value, so
    // their whole-value size is n bytes plus the exponent wire.
    let (name, exponent_cr, bytes_out) = match codec {
        CodecChoice::Lexi => {
            let (bytes, stats) =
                compress_to_vec(&values).map_err(|e| classify(&input.display().to_string(), e))?;
            ("lexi", stats.cr_exponent, bytes.len() as u64)
        }
        CodecChoice::Rle => {
            let records = baselines::rle_compress(&exponents);
            let wire = baselines::rle_to_bytes(&records);
            let cr = baselines::rle_cr(exponents.len(), records.len());
            ("rle", cr, n + wire.len() as u64)
        }
        CodecChoice::Bdi => {
            let stream = baselines::bdi_compress(&exponents);
            let wire = baselines::bdi_to_bytes(&stream);
            ("bdi", stream.cr(), n + wire.len() as u64)
        }
    };
    let out = json!({
        "config": {
            "command": "bench",
            "codec": name,
            "input": input.display().to_string(),
        },
        "codec": name,
        "exponentCR": exponent_cr,
        "totalCR": 16.0 * n as f64 / (8.0 * bytes_out as f64),
        "bytesIn": n * 2,
        "bytesOut": bytes_out,
    });
    emit_report(&out, report)
}

fn cmd_sweep(
    lanes: &[usize],
    depths: &[usize],
    sample: usize,
    input: &Path,
    out: Option<&Path>,
) -> CliResult<()> {
    let values = read_values(input)?;
    if values.is_empty() {
        return Err(CliError::Data(format!("{}: empty input", input.display())));
    }
    let exponents: Vec<u8> = values.iter().map(|&v| Bf16Triple::split(v).exponent).collect();
    let window = if sample == 0 { exponents.len() } else { sample.min(exponents.len()) };
    let exponents = &exponents[..window];
    let grid: Vec<(usize, usize)> = lanes
        .iter()
        .flat_map(|&m| depths.iter().map(move |&d| (m, d)))
        .collect();
    for &(m, d) in &grid {
        EncoderConfig { lanes: m, cache_depth: d, sample_size: window }
            .validate()
            .map_err(|e| usage(e.to_string()))?;
    }
    // Grid points run concurrently; rows land by grid index so output order
    // never depends on scheduling.
    let mut rows: Vec<Option<(usize, usize, f64, u64)>> = vec![None; grid.len()];
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(grid.len().max(1));
    let chunk = grid.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (grid_chunk, row_chunk) in grid.chunks(chunk).zip(rows.chunks_mut(chunk)) {
            scope.spawn(move || {
                for ((m, d), slot) in grid_chunk.iter().zip(row_chunk.iter_mut()) {
                    let cfg =
                        EncoderConfig { lanes: *m, cache_depth: *d, sample_size: window };
                    let (_, run) = run_histogram(exponents, &cfg)
                        .expect("validated config and non-empty window");
                    *slot = Some((*m, *d, run.lane_hit_rate(), run.histogram_cycles));
                }
            });
        }
    });
    let mut csv = String::from("lanes,depth,hitRate,histogramCycles\n");
    for row in rows {
        let (m, d, hit, cycles) = row.expect("every grid point ran");
        csv.push_str(&format!("{m},{d},{hit:.6},{cycles}\n"));
    }
    match out {
        Some(path) => write_raw(path, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_simulate(mode: &str, trace_path: &Path, cr: f64, report: &ReportArg) -> CliResult<()> {
    let mode = TrafficMode::parse(mode).map_err(|e| usage(e.to_string()))?;
    if !(cr.is_finite() && cr > 0.0) {
        return Err(usage(format!("--cr must be positive and finite, got {cr}")));
    }
    let bytes = read_raw(trace_path)?;
    let mut records = parse_trace_csv(&bytes)
        .map_err(|e| CliError::Data(format!("{}: {e}", trace_path.display())))?;
    let base = trace_path.parent().unwrap_or_else(|| Path::new("."));
    for record in &mut records {
        if let Some(file) = record.data_file.clone() {
            // dataFile paths resolve relative to the trace file.
            let path = base.join(&file);
            let values = read_bf16_file(&path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let (measured, header_bits) = measure_exponent_cr(&values)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            record.measured_cr = Some(measured);
            record.codebook_header_bits = Some(header_bits);
        }
    }
    let link = LinkModel::default();
    let sim = simulate_trace(&records, &link, cr)
        .map_err(|e| CliError::Data(format!("{}: {e}", trace_path.display())))?;
    let requested_total_ns = match mode {
        TrafficMode::Uncompressed => sim.total_ns_uncompressed,
        TrafficMode::WeightsOnly => sim.total_ns_weights_only,
        TrafficMode::Lexi => sim.total_ns_lexi,
    };
    let out = json!({
        "config": {
            "command": "simulate",
            "mode": mode,
            "trace": trace_path.display().to_string(),
            "cr": cr,
        },
        "requestedMode": mode,
        "requestedTotalNs": requested_total_ns,
        "simulation": sim,
    });
    emit_report(&out, report)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    dist: DistChoice,
    distinct: usize,
    count: usize,
    seed: u64,
    zipf_s: Option<f64>,
    ratio: Option<f64>,
    entropy: Option<f64>,
    output: &Path,
) -> CliResult<()> {
    if dist != DistChoice::Zipf && zipf_s.is_some() {
        return Err(usage("--zipf-s only applies to --dist zipf"));
    }
    if dist != DistChoice::Geometric && (ratio.is_some() || entropy.is_some()) {
        return Err(usage("--ratio and --entropy only apply to --dist geometric"));
    }
    if ratio.is_some() && entropy.is_some() {
        return Err(usage("--ratio and --entropy are mutually exclusive"));
    }
    let (distribution, shape) = match dist {
        DistChoice::Zipf => {
            let s = zipf_s.unwrap_or(1.0);
            (SynthDistribution::Zipf { s }, json!({ "dist": "zipf", "s": s }))
        }
        DistChoice::Geometric => {
            let r = match (ratio, entropy) {
                (Some(r), None) => r,
                (None, target) => {
                    let target = target.unwrap_or(2.56);
                    geometric_ratio_for_entropy(target, distinct)
                        .map_err(|e| usage(e.to_string()))?
                }
                (Some(_), Some(_)) => unreachable!("rejected above"),
            };
            (
                SynthDistribution::Geometric { ratio: r },
                json!({ "dist": "geometric", "ratio": r, "entropyTarget": entropy }),
            )
        }
        DistChoice::Uniform => (SynthDistribution::Uniform, json!({ "dist": "uniform" })),
    };
    let values =
        generate_bf16(distribution, distinct, count, seed).map_err(|e| usage(e.to_string()))?;
    write_bf16_file(output, &values).map_err(|e| usage(format!("{}: {e}", output.display())))?;
    let out = json!({
        "config": {
            "command": "gen",
            "distribution": shape,
            "distinct": distinct,
            "count": count,
            "seed": seed,
            "output": output.display().to_string(),
        },
        "valueCount": count,
        "bytesOut": count as u64 * 2,
    });
    emit_report(&out, &ReportArg { report: None })
}
