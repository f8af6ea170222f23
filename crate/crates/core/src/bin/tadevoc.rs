//! `tadevoc` — decode 1.6 kb/s coded speech to 16 kHz WAV, inspect
//! model complexity, generate seeded fixtures, and run the invariant
//! suite.
//!
//! Exit codes are stable: 0 success, 2 usage, 3 I/O, 4 malformed file,
//! 5 validation, 6 self-test failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use tadevoc::bitstream::{
    dequantize_packet, parse_packet, read_stream, write_stream, CodebookSet, PACKET_BYTES,
};
use tadevoc::engine::{decode_offline, latency_report, measure_throughput, Session};
use tadevoc::model::{
    build_generator, mac_count, param_count, random_weights, Generator, GeneratorConfig,
    WeightStore, DEFAULT_WEIGHT_SEED,
};
use tadevoc::selftest::{run_selftest, DEFAULT_SELFTEST_SEED};
use tadevoc::wav::{write_wav_f32, write_wav_i16};
use tadevoc::{Error, Result};

// --- Constants ---

const EXIT_IO: u8 = 3;
const EXIT_FORMAT: u8 = 4;
const EXIT_VALIDATION: u8 = 5;
const EXIT_SELFTEST: u8 = 6;

/// Reference parameter budget the design was sized against.
const PARAM_BUDGET: f64 = 2.73e6;

#[derive(Parser)]
#[command(
    name = "tadevoc",
    version,
    about = "Streaming neural speech decoder: 1.6 kb/s packets to 16 kHz WAV"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decode a coded bitstream to a WAV file
    Decode(DecodeArgs),
    /// Print complexity, parameter, and delay figures for a model
    Info(InfoArgs),
    /// Run the seeded invariant suite
    Selftest {
        /// Seed for weights and inputs; any seed must pass
        #[arg(long, default_value_t = DEFAULT_SELFTEST_SEED)]
        seed: u64,
    },
    /// Generate seeded fixtures: weights, codebooks, and a random bitstream
    Gen(GenArgs),
}

#[derive(Args)]
struct DecodeArgs {
    /// Coded input stream
    #[arg(long)]
    bitstream: PathBuf,
    /// Weight container
    #[arg(long)]
    weights: PathBuf,
    /// Codebook tables
    #[arg(long)]
    codebooks: PathBuf,
    /// Output WAV path
    #[arg(long)]
    out: PathBuf,
    /// Frame-by-frame streaming or whole-utterance offline evaluation
    #[arg(long, value_enum, default_value_t = Mode::Streaming)]
    mode: Mode,
    /// Write 32-bit float samples instead of 16-bit PCM
    #[arg(long)]
    float: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Streaming,
    Offline,
}

impl Mode {
    fn label(self) -> &'static str {
        match self {
            Mode::Streaming => "streaming",
            Mode::Offline => "offline",
        }
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InfoArgs {
    /// Weight container to describe
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Describe the built-in default configuration instead
    #[arg(long)]
    default_config: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Seed for weights and packet contents
    #[arg(long, default_value_t = DEFAULT_WEIGHT_SEED)]
    seed: u64,
    /// Packets to generate (25 = one second)
    #[arg(long, default_value_t = 25)]
    packets: u32,
    /// Output path for the weight container
    #[arg(long)]
    weights: PathBuf,
    /// Output path for the codebook tables
    #[arg(long)]
    codebooks: PathBuf,
    /// Output path for the coded bitstream
    #[arg(long)]
    bitstream: PathBuf,
}

fn main() -> ExitCode {
    // die silently when the reader closes the pipe (`tadevoc info | head`)
    // instead of panicking mid-print
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Decode(args) => cmd_decode(&args),
        Cmd::Info(args) => cmd_info(&args),
        Cmd::Selftest { seed } => cmd_selftest(seed),
        Cmd::Gen(args) => cmd_gen(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => EXIT_IO,
                Error::Format(_) => EXIT_FORMAT,
                Error::Validation(_) | Error::Range { .. } => EXIT_VALIDATION,
            })
        }
    }
}

/// Reads a whole file, keeping the path in the error message without
/// changing the error class.
fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Loads a weight container and builds the generator it describes.
fn load_generator(path: &Path) -> Result<(GeneratorConfig, Generator)> {
    let store = WeightStore::from_bytes(&read_file(path)?)?;
    let config = GeneratorConfig::from_doc(store.config_doc())?;
    let gen = build_generator(&config, &store)?;
    Ok((config, gen))
}

fn print_delay_budget(gen: &Generator) {
    let lat = latency_report(gen);
    println!("delay budget:");
    println!("  encoder       {:>9.4} ms (upstream, reported not incurred)", lat.encoder_ms);
    println!("  filter bank   {:>9.4} ms (measured group delay)", lat.filter_bank_ms);
    println!("  network       {:>9.4} ms (all convolutions causal)", lat.network_ms);
    println!("  total         {:>9.4} ms", lat.total_ms());
}

fn cmd_decode(args: &DecodeArgs) -> Result<ExitCode> {
    let (config, gen) = load_generator(&args.weights)?;
    let books = CodebookSet::from_bytes(&read_file(&args.codebooks)?)?;
    books.validate()?;
    let (info, packets) = read_stream(&read_file(&args.bitstream)?)?;
    if info.sample_rate != config.sample_rate {
        return Err(Error::validation(format!(
            "stream is {} Hz but the model decodes at {} Hz",
            info.sample_rate, config.sample_rate
        )));
    }
    if packets.is_empty() {
        return Err(Error::validation("stream contains no packets"));
    }

    let gen = Arc::new(gen);
    let started = Instant::now();
    let pcm: Vec<f32> = match args.mode {
        Mode::Streaming => {
            let mut session = Session::new(gen.clone());
            let mut pcm = Vec::with_capacity(packets.len() * 4 * config.frame_samples());
            for pkt in &packets {
                pcm.extend_from_slice(session.decode_packet(pkt, &books)?);
            }
            pcm
        }
        Mode::Offline => {
            let mut frames = Vec::with_capacity(packets.len() * 4);
            let mut prev = None;
            for pkt in &packets {
                let dq = dequantize_packet(pkt, prev.as_ref(), &books)?;
                frames.extend_from_slice(&dq.frames);
                prev = Some(dq.carry);
            }
            decode_offline(&gen, &frames)?
        }
    };
    let decode_secs = started.elapsed().as_secs_f64().max(1e-9);
    let audio_secs = pcm.len() as f64 / config.sample_rate as f64;

    let mut bytes = Vec::new();
    if args.float {
        write_wav_f32(&mut bytes, config.sample_rate, &pcm)?;
    } else {
        write_wav_i16(&mut bytes, config.sample_rate, &pcm)?;
    }
    write_file(&args.out, &bytes)?;

    println!("packets:     {} ({} b/s coded)", packets.len(), info.bitrate_bps());
    println!(
        "audio:       {:.3} s ({} samples at {} Hz)",
        audio_secs,
        pcm.len(),
        config.sample_rate
    );
    println!("mode:        {}", args.mode.label());
    println!(
        "decode time: {:.3} s ({:.2}x real time)",
        decode_secs,
        audio_secs / decode_secs
    );
    print_delay_budget(&gen);
    println!(
        "wrote {} ({})",
        args.out.display(),
        if args.float { "32-bit float" } else { "16-bit PCM" }
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_info(args: &InfoArgs) -> Result<ExitCode> {
    let (config, gen, store) = match &args.weights {
        Some(path) => {
            let store = WeightStore::from_bytes(&read_file(path)?)?;
            let config = GeneratorConfig::from_doc(store.config_doc())?;
            let gen = build_generator(&config, &store)?;
            (config, gen, store)
        }
        None => {
            let config = GeneratorConfig::default();
            let store = random_weights(&config, DEFAULT_WEIGHT_SEED);
            let gen = build_generator(&config, &store)?;
            (config, gen, store)
        }
    };

    println!(
        "configuration: {} blocks, hidden {}, kernel {}, cond {}, {} bands at {} Hz",
        config.rate_schedule.len(),
        config.hidden,
        config.kernel,
        config.cond_channels,
        config.bands,
        config.sample_rate
    );

    let macs = mac_count(&config);
    println!("complexity (MAC/s):");
    for entry in &macs.entries {
        println!(
            "  {:<12} @ {:>5} Hz {:>12}",
            entry.name, entry.rate_hz, entry.macs_per_second
        );
    }
    println!(
        "  total {:>21} = {:.2} GMAC/s",
        macs.total_macs_per_second,
        macs.total_gmacs()
    );

    let params = param_count(&store);
    println!("parameters:");
    for group in &params.groups {
        println!("  {:<12} {:>9}", group.name, group.parameters);
    }
    println!(
        "  total {:>15} (reference budget {}, delta {:+.1}%)",
        params.total,
        PARAM_BUDGET as u64,
        (params.total as f64 - PARAM_BUDGET) / PARAM_BUDGET * 100.0
    );

    let gen = Arc::new(gen);
    print_delay_budget(&gen);

    let mut session = Session::new(gen);
    let probe = measure_throughput(&mut session, 50)?;
    println!(
        "throughput:  {} frames in {:.3} s = {:.1} frames/s ({:.2}x real time)",
        probe.frames,
        probe.seconds,
        probe.frames_per_second(),
        probe.realtime_factor(config.frame_ms)
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(seed: u64) -> Result<ExitCode> {
    let report = run_selftest(seed);
    print!("{}", report.render());
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_SELFTEST)
    })
}

fn cmd_gen(args: &GenArgs) -> Result<ExitCode> {
    let config = GeneratorConfig::default();
    let store = random_weights(&config, args.seed);
    // make sure what we write can actually decode
    build_generator(&config, &store)?;
    let books = CodebookSet::default();

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut packets = Vec::with_capacity(args.packets as usize);
    for _ in 0..args.packets {
        let mut bytes = [0u8; PACKET_BYTES];
        rng.fill_bytes(&mut bytes);
        packets.push(parse_packet(&bytes)?);
    }

    write_file(&args.weights, &store.to_bytes())?;
    write_file(&args.codebooks, &books.to_bytes())?;
    write_file(&args.bitstream, &write_stream(config.sample_rate, &packets)?)?;
    println!(
        "wrote {} ({} tensors), {}, {} ({} packets, {:.1} s)",
        args.weights.display(),
        store.tensors().len(),
        args.codebooks.display(),
        args.bitstream.display(),
        packets.len(),
        packets.len() as f64 * 0.04
    );
    Ok(ExitCode::SUCCESS)
}
