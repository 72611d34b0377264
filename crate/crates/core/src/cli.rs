//! Command-line front end: `run`, `listen` and `replay`.
//!
//! Every flag can also be given in a TOML file passed with `--config`,
//! using the flag name as key (`gain1 = 0.2`, `osc-freq = 110`). Flags win
//! over the file, the file wins over built-in defaults.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use crate::control::ControlServer;
use crate::engine::{
    render_run, spectrogram_export, write_wav, Engine, EngineError, EngineParams, EngineQueue,
    LiveEngine, RunEventLog, RunHeader, SharedState, WavFormat,
};
use crate::harness::{run_algorithm, Algorithm, HarnessError, NullSink, Problem, ProblemKind};
use crate::osc::{OscServer, ServerStats};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "sonopt", version, about = "Sonify bi-objective optimizer runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a built-in optimizer and render its fronts offline.
    Run {
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        algo: Option<String>,
        #[arg(long)]
        gens: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Receive fronts over OSC and render them in real time.
    Listen {
        #[arg(long)]
        port: Option<u16>,
        /// Address to bind the OSC socket to.
        #[arg(long)]
        host: Option<String>,
        /// Stop after this many seconds without a datagram.
        #[arg(long)]
        idle_timeout: Option<f64>,
        /// Stop once this many fronts have been received and sounded.
        #[arg(long)]
        max_gens: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-render a recorded run log.
    Replay {
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Default, Clone, Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// WAV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    snapshots: Option<PathBuf>,
    #[arg(long)]
    spectrogram: Option<PathBuf>,
    /// Where to write the run's event log.
    #[arg(long)]
    log_out: Option<PathBuf>,
    #[arg(long)]
    wav_format: Option<String>,
    #[arg(long)]
    scaling: Option<f64>,
    #[arg(long)]
    osc_freq: Option<f64>,
    #[arg(long)]
    fund_freq: Option<f64>,
    #[arg(long)]
    gain1: Option<f64>,
    #[arg(long)]
    gain2: Option<f64>,
    #[arg(long)]
    sr: Option<f64>,
    #[arg(long)]
    spg: Option<f64>,
    #[arg(long)]
    recurrence_keep: Option<f64>,
    #[arg(long)]
    control_port: Option<u16>,
}

/// Contents of a `--config` file. Keys mirror the flags.
#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub algo: Option<String>,
    pub gens: Option<u64>,
    pub seed: Option<u64>,
    pub port: Option<u16>,
    pub host: Option<String>,
    pub idle_timeout: Option<f64>,
    pub max_gens: Option<u64>,
    pub log: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub snapshots: Option<PathBuf>,
    pub spectrogram: Option<PathBuf>,
    pub log_out: Option<PathBuf>,
    pub wav_format: Option<String>,
    pub scaling: Option<f64>,
    pub osc_freq: Option<f64>,
    pub fund_freq: Option<f64>,
    pub gain1: Option<f64>,
    pub gain2: Option<f64>,
    pub sr: Option<f64>,
    pub spg: Option<f64>,
    pub recurrence_keep: Option<f64>,
    pub control_port: Option<u16>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("--config {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Run {
        problem: ProblemKind,
        algorithm: Algorithm,
        generations: u64,
        seed: u64,
    },
    Listen {
        host: String,
        port: u16,
        idle_timeout: Duration,
        max_gens: Option<u64>,
    },
    Replay {
        log: PathBuf,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub wav: Option<PathBuf>,
    pub wav_format: WavFormat,
    pub snapshots: Option<PathBuf>,
    pub spectrogram: Option<PathBuf>,
    pub log: Option<PathBuf>,
}

/// Engine parameter overrides gathered from flags or the config file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamOverrides {
    pub scaling: Option<f64>,
    pub osc_freq: Option<f64>,
    pub fund_freq: Option<f64>,
    pub gain1: Option<f64>,
    pub gain2: Option<f64>,
    pub sr: Option<f64>,
    pub spg: Option<f64>,
    pub recurrence_keep: Option<f64>,
}

impl ParamOverrides {
    pub fn apply(&self, params: &mut EngineParams) {
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut params.sample_value_scaling, self.scaling);
        set(&mut params.oscillator_hz, self.osc_freq);
        set(&mut params.fundamental_hz, self.fund_freq);
        set(&mut params.gain_p1, self.gain1);
        set(&mut params.gain_p2, self.gain2);
        set(&mut params.sample_rate_hz, self.sr);
        set(&mut params.seconds_per_generation, self.spg);
        set(&mut params.recurrence_keep, self.recurrence_keep);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub overrides: ParamOverrides,
    /// Defaults with overrides applied. Replay starts from the log header
    /// instead.
    pub params: EngineParams,
    pub outputs: Outputs,
    pub control_port: Option<u16>,
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Parses arguments (program name first) into a validated configuration.
pub fn parse_cli<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    resolve(cli)
        .map_err(|e| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n")))
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let common = match &cli.command {
        Command::Run { common, .. }
        | Command::Listen { common, .. }
        | Command::Replay { common, .. } => common.clone(),
    };
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let mode = match cli.command {
        Command::Run {
            problem,
            algo,
            gens,
            seed,
            ..
        } => {
            let problem = pick(problem, file.problem.clone()).unwrap_or_else(|| "zdt1".into());
            let algo = pick(algo, file.algo.clone()).unwrap_or_else(|| "nsga2".into());
            Mode::Run {
                problem: ProblemKind::from_str(&problem)
                    .map_err(|e| usage(format!("--problem: {e}")))?,
                algorithm: Algorithm::from_str(&algo).map_err(|e| usage(format!("--algo: {e}")))?,
                generations: pick(gens, file.gens).unwrap_or(250),
                seed: pick(seed, file.seed).unwrap_or(0),
            }
        }
        Command::Listen {
            port,
            host,
            idle_timeout,
            max_gens,
            ..
        } => {
            let idle = pick(idle_timeout, file.idle_timeout).unwrap_or(10.0);
            if !(idle.is_finite() && idle > 0.0) {
                return Err(usage("--idle-timeout must be a positive number of seconds"));
            }
            Mode::Listen {
                host: pick(host, file.host.clone()).unwrap_or_else(|| "127.0.0.1".into()),
                port: pick(port, file.port).unwrap_or(9000),
                idle_timeout: Duration::from_secs_f64(idle),
                max_gens: pick(max_gens, file.max_gens),
            }
        }
        Command::Replay { log, .. } => Mode::Replay {
            log: pick(log, file.log.clone()).ok_or_else(|| usage("replay needs --log <path>"))?,
        },
    };
    let wav_format = match pick(common.wav_format.clone(), file.wav_format.clone()).as_deref() {
        None | Some("pcm16") => WavFormat::Pcm16,
        Some("float32") => WavFormat::Float32,
        Some(other) => {
            return Err(usage(format!(
                "--wav-format: expected pcm16 or float32, got `{other}`"
            )))
        }
    };
    let outputs = Outputs {
        wav: pick(common.out.clone(), file.out.clone()),
        wav_format,
        snapshots: pick(common.snapshots.clone(), file.snapshots.clone()),
        spectrogram: pick(common.spectrogram.clone(), file.spectrogram.clone()),
        log: pick(common.log_out.clone(), file.log_out.clone()),
    };
    if matches!(mode, Mode::Run { .. } | Mode::Replay { .. }) && outputs.wav.is_none() {
        return Err(usage("--out <file.wav> is required"));
    }
    let overrides = ParamOverrides {
        scaling: pick(common.scaling, file.scaling),
        osc_freq: pick(common.osc_freq, file.osc_freq),
        fund_freq: pick(common.fund_freq, file.fund_freq),
        gain1: pick(common.gain1, file.gain1),
        gain2: pick(common.gain2, file.gain2),
        sr: pick(common.sr, file.sr),
        spg: pick(common.spg, file.spg),
        recurrence_keep: pick(common.recurrence_keep, file.recurrence_keep),
    };
    let mut params = EngineParams::default();
    overrides.apply(&mut params);
    params
        .validate()
        .map_err(|e| usage(format!("engine parameters: {e}")))?;
    Ok(RunConfig {
        mode,
        overrides,
        params,
        outputs,
        control_port: pick(common.control_port, file.control_port),
    })
}

/// Entry point used by the `sonopt` binary. Returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_cli(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&config) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(config: &RunConfig) -> Result<(), CliError> {
    match &config.mode {
        Mode::Run {
            problem,
            algorithm,
            generations,
            seed,
        } => {
            if config.control_port.is_some() {
                log::warn!("--control-port is only served in listen mode; ignoring it");
            }
            let problem = Problem::new(*problem);
            let mut log = run_algorithm(&problem, *algorithm, *generations, *seed, &mut NullSink)?;
            log.header.params = config.params.clone();
            let log_path = config
                .outputs
                .log
                .clone()
                .or_else(|| sibling(config.outputs.wav.as_deref(), "jsonl"));
            if let Some(path) = log_path {
                log.save(path)?;
            }
            let snapshots = config
                .outputs
                .snapshots
                .clone()
                .or_else(|| sibling(config.outputs.wav.as_deref(), "snapshots.json"));
            render_outputs(&log, &config.params, &config.outputs, snapshots.as_deref())
        }
        Mode::Replay { log } => {
            let log = RunEventLog::load(log)?;
            let mut params = log.header.params.clone();
            config.overrides.apply(&mut params);
            params.validate()?;
            if let Some(path) = &config.outputs.log {
                log.save(path)?;
            }
            render_outputs(
                &log,
                &params,
                &config.outputs,
                config.outputs.snapshots.as_deref(),
            )
        }
        Mode::Listen { .. } => listen(config),
    }
}

fn sibling(path: Option<&Path>, ext: &str) -> Option<PathBuf> {
    path.map(|p| p.with_extension(ext))
}

fn render_outputs(
    log: &RunEventLog,
    params: &EngineParams,
    outputs: &Outputs,
    snapshots: Option<&Path>,
) -> Result<(), CliError> {
    let out = render_run(log, params, false)?;
    if let Some(path) = &outputs.wav {
        write_wav(
            path,
            &out.audio,
            params.sample_rate_hz.round() as u32,
            outputs.wav_format,
        )?;
    }
    if let Some(path) = snapshots {
        out.snapshots.save(path)?;
    }
    if let Some(path) = &outputs.spectrogram {
        let sg = spectrogram_export(&out.audio, 4096, 1024)?;
        sg.write_csv(BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

/// Block size of the real-time pacer, in frames.
const LIVE_BLOCK: usize = 480;

fn listen(config: &RunConfig) -> Result<(), CliError> {
    let Mode::Listen {
        host,
        port,
        idle_timeout,
        max_gens,
    } = &config.mode
    else {
        unreachable!("listen called for another mode");
    };
    let params = config.params.clone();
    let queue = EngineQueue::new(64);
    let state = SharedState::new();
    let mut live = LiveEngine::new(Engine::new(params.clone())?, queue.clone(), state.clone());

    let mut header = RunHeader::new(params.clone());
    header.problem = None;
    let recording = Arc::new(Mutex::new(RunEventLog::new(header)));
    let last_gen = Arc::new(Mutex::new(None::<u64>));

    let server = {
        let recording = recording.clone();
        let last_gen = last_gen.clone();
        OscServer::spawn((host.as_str(), *port), queue.clone(), move |f| {
            if let Ok(mut g) = last_gen.lock() {
                *g = Some(f.generation_index);
            }
            if let Ok(mut log) = recording.lock() {
                log.push_front(f.clone());
            }
        })?
    };
    log::info!("listening for OSC on {}", server.local_addr());
    let control = match config.control_port {
        Some(p) => {
            let recording = recording.clone();
            let last_gen = last_gen.clone();
            let srv = ControlServer::spawn(
                ("127.0.0.1", p),
                queue.clone(),
                state.clone(),
                move |param, v| {
                    let g = last_gen.lock().ok().and_then(|g| *g).map_or(0, |g| g + 1);
                    if let Ok(mut log) = recording.lock() {
                        log.push_param(g, param.name(), v);
                    }
                },
            )?;
            log::info!("control endpoint on ws://{}", srv.local_addr());
            Some(srv)
        }
        None => None,
    };
    log::warn!("no audio output device support; audio is rendered to --out only");

    let sr = params.sample_rate_hz;
    let mut audio: Vec<f64> = Vec::new();
    let mut block = vec![0.0; LIVE_BLOCK];
    let start = Instant::now();
    let mut rendered = 0u64;
    let mut last_packets = 0;
    let mut last_activity = Instant::now();
    let mut tail_frames: Option<usize> = None;
    loop {
        let packets = ServerStats::get(&server.stats().packets);
        if packets != last_packets {
            last_packets = packets;
            last_activity = Instant::now();
        }
        if tail_frames.is_none() {
            let done = max_gens.is_some_and(|m| ServerStats::get(&server.stats().fronts) >= m);
            if done {
                tail_frames = Some(params.frames_per_generation());
            } else if last_activity.elapsed() >= *idle_timeout {
                break;
            }
        }
        if let Some(t) = tail_frames.as_mut() {
            if *t == 0 {
                break;
            }
            *t = t.saturating_sub(LIVE_BLOCK);
        }
        live.next_block(&mut block);
        if config.outputs.wav.is_some() && live.engine().current_generation().is_some() {
            audio.extend_from_slice(&block);
        }
        rendered += LIVE_BLOCK as u64;
        let due = start + Duration::from_secs_f64(rendered as f64 / sr);
        if let Some(wait) = due.checked_duration_since(Instant::now()) {
            std::thread::sleep(wait);
        }
    }
    let stats = server.stats();
    log::info!(
        "received {} fronts, {} params, rejected {}, late {}",
        ServerStats::get(&stats.fronts),
        ServerStats::get(&stats.params),
        ServerStats::get(&stats.rejected),
        ServerStats::get(&stats.late)
    );
    server.shutdown();
    if let Some(c) = control {
        c.shutdown();
    }
    if let Some(path) = &config.outputs.wav {
        write_wav(path, &audio, sr.round() as u32, config.outputs.wav_format)?;
    }
    if let Some(path) = &config.outputs.log {
        let log = recording
            .lock()
            .map(|l| l.clone())
            .unwrap_or_else(|e| e.into_inner().clone());
        log.save(path)?;
    }
    Ok(())
}
