//! Command-line frontend: `train`, `bench`, `decode` and `inspect-code`.
//!
//! Every subcommand reads an optional flat `key = value` config file; flags
//! override file values. Commands that write an output directory also write
//! the effective configuration there as `config.txt`, which reproduces the
//! run when passed back with `--config`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, count_flops, neg_ln_ber, BerConfig, BerRun, FlopsTarget, NegLnBer};
use crate::bp::{BpConfig, BpDecoder, BpVariant};
use crate::channel::LlrWord;
use crate::codebook::{GeneratorMatrix, ParityCheckMatrix};
use crate::decoder::{Decoder, HardDecisionDecoder};
use crate::diffusion::{DEFAULT_STEPS, DEFAULT_STEP_DB};
use crate::error::{Error, Result};
use crate::train::{train_with_progress, TrainConfig};
use crate::vcdc::{NeuralBlockWeights, VcdcDecoder};

/// Exit status of `decode` when the result still violates parity checks.
pub const EXIT_SYNDROME_NONZERO: i32 = 2;
/// Exit status for any error.
pub const EXIT_ERROR: i32 = 1;

/// Effective parameters of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub code: Option<PathBuf>,
    pub out: PathBuf,
    pub checkpoint: Option<PathBuf>,
    pub decoders: Vec<String>,
    pub csnr: Vec<f64>,
    pub timesteps: Vec<usize>,
    pub step_db: f64,
    pub bp_iters: usize,
    pub bp_variant: BpVariant,
    pub stop_errors: u64,
    /// `None` means the default budget of 10^8 bits.
    pub max_frames: Option<u64>,
    pub seed: u64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub iterations: usize,
    pub csnr_min: f64,
    pub csnr_max: f64,
    pub init_weight: f64,
    pub all_zero: bool,
    pub smoothing_window: usize,
    pub transcendental_cost: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            code: None,
            out: PathBuf::from("vcdc-out"),
            checkpoint: None,
            decoders: vec!["bp".into(), "vcdc".into()],
            csnr: vec![4.0, 5.0, 6.0],
            timesteps: vec![DEFAULT_STEPS],
            step_db: DEFAULT_STEP_DB,
            bp_iters: BpConfig::default().max_iters,
            bp_variant: BpVariant::SumProduct,
            stop_errors: 100,
            max_frames: None,
            seed: 0,
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            iterations: t.iterations,
            csnr_min: t.csnr_min_db,
            csnr_max: t.csnr_max_db,
            init_weight: t.init_weight,
            all_zero: false,
            smoothing_window: t.smoothing_window,
            transcendental_cost: 1.0,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("{key}: empty list")));
    }
    Ok(items)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Defaults overridden by the `key = value` lines of `text`. Blank lines
    /// and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "code" => self.code = (!value.is_empty()).then(|| PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            "checkpoint" => {
                self.checkpoint = (!value.is_empty()).then(|| PathBuf::from(value));
            }
            "decoders" => self.decoders = parse_list(key, value)?,
            "csnr" => self.csnr = parse_list(key, value)?,
            "timesteps" => self.timesteps = parse_list(key, value)?,
            "step_db" => self.step_db = parse_value(key, value)?,
            "bp_iters" => self.bp_iters = parse_value(key, value)?,
            "bp_variant" => self.bp_variant = value.parse()?,
            "stop_errors" => self.stop_errors = parse_value(key, value)?,
            "max_frames" => {
                self.max_frames = match value {
                    "" | "auto" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "seed" => self.seed = parse_value(key, value)?,
            "learning_rate" => self.learning_rate = parse_value(key, value)?,
            "batch_size" => self.batch_size = parse_value(key, value)?,
            "iterations" => self.iterations = parse_value(key, value)?,
            "csnr_min" => self.csnr_min = parse_value(key, value)?,
            "csnr_max" => self.csnr_max = parse_value(key, value)?,
            "init_weight" => self.init_weight = parse_value(key, value)?,
            "all_zero" => self.all_zero = parse_value(key, value)?,
            "smoothing_window" => self.smoothing_window = parse_value(key, value)?,
            "transcendental_cost" => self.transcendental_cost = parse_value(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Serializes every field so that [`RunConfig::parse`] restores it.
    pub fn to_text(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("code", path(&self.code));
        kv("out", self.out.display().to_string());
        kv("checkpoint", path(&self.checkpoint));
        kv("decoders", self.decoders.join(","));
        kv("csnr", join(&self.csnr));
        kv("timesteps", join(&self.timesteps));
        kv("step_db", self.step_db.to_string());
        kv("bp_iters", self.bp_iters.to_string());
        kv("bp_variant", self.bp_variant.to_string());
        kv("stop_errors", self.stop_errors.to_string());
        kv("max_frames", self.max_frames.map_or("auto".into(), |m| m.to_string()));
        kv("seed", self.seed.to_string());
        kv("learning_rate", self.learning_rate.to_string());
        kv("batch_size", self.batch_size.to_string());
        kv("iterations", self.iterations.to_string());
        kv("csnr_min", self.csnr_min.to_string());
        kv("csnr_max", self.csnr_max.to_string());
        kv("init_weight", self.init_weight.to_string());
        kv("all_zero", self.all_zero.to_string());
        kv("smoothing_window", self.smoothing_window.to_string());
        kv("transcendental_cost", self.transcendental_cost.to_string());
        out
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            iterations: self.iterations,
            csnr_min_db: self.csnr_min,
            csnr_max_db: self.csnr_max,
            seed: self.seed,
            init_weight: self.init_weight,
            all_zero: self.all_zero,
            smoothing_window: self.smoothing_window,
            ..TrainConfig::default()
        }
    }

    pub fn bp_config(&self) -> BpConfig {
        BpConfig {
            max_iters: self.bp_iters,
            variant: self.bp_variant,
            ..BpConfig::default()
        }
    }

    pub fn ber_config(&self, n: usize) -> BerConfig {
        let mut cfg = BerConfig::for_length(n);
        cfg.stop_errors = self.stop_errors;
        cfg.seed = self.seed;
        cfg.all_zero = self.all_zero;
        if let Some(m) = self.max_frames {
            cfg.max_frames = m;
        }
        cfg
    }

    fn code_path(&self) -> Result<&Path> {
        self.code
            .as_deref()
            .ok_or_else(|| Error::Config("no code given (use --code or `code = ...`)".into()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "vcdc", version, about = "Diffusion-based channel decoding and BP baselines")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "VCDC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train the neural block and write a checkpoint and loss curve.
    Train(TrainArgs),
    /// Monte-Carlo BER sweep over decoders and CSNR points.
    Bench(BenchArgs),
    /// Decode one LLR word; exits 0 iff the result satisfies every check.
    Decode(DecodeArgs),
    /// Print code parameters and per-decode operation counts.
    InspectCode(InspectArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Flat key = value config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parity-check matrix in alist format.
    #[arg(long)]
    code: Option<String>,
    /// Extra `key=value` override (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long)]
    batch_size: Option<String>,
    #[arg(long)]
    learning_rate: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    csnr_min: Option<String>,
    #[arg(long)]
    csnr_max: Option<String>,
    #[arg(long)]
    init_weight: Option<String>,
    /// Train on the all-zero codeword.
    #[arg(long)]
    all_zero: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Comma list of bp, vcdc, hard.
    #[arg(long)]
    decoders: Option<String>,
    /// Comma list of CSNR points in dB.
    #[arg(long)]
    csnr: Option<String>,
    /// Comma list of reverse-step counts for vcdc.
    #[arg(long)]
    timesteps: Option<String>,
    #[arg(long)]
    checkpoint: Option<String>,
    #[arg(long)]
    step_db: Option<String>,
    #[arg(long)]
    bp_iters: Option<String>,
    /// sum-product or min-sum.
    #[arg(long)]
    bp_variant: Option<String>,
    #[arg(long)]
    stop_errors: Option<String>,
    #[arg(long)]
    max_frames: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[command(flatten)]
    common: Common,
    /// Whitespace-separated LLRs (`-` for stdin).
    #[arg(long)]
    input: PathBuf,
    /// bp, vcdc or hard.
    #[arg(long, default_value = "bp")]
    decoder: String,
    #[arg(long)]
    checkpoint: Option<String>,
    /// CSNR of the observation; vcdc builds its schedule from it.
    #[arg(long)]
    csnr: Option<String>,
    #[arg(long)]
    timesteps: Option<String>,
    #[arg(long)]
    step_db: Option<String>,
    #[arg(long)]
    bp_iters: Option<String>,
    #[arg(long)]
    bp_variant: Option<String>,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    timesteps: Option<String>,
    #[arg(long)]
    bp_iters: Option<String>,
    /// Cost of one tanh/arctanh in the FLOPs total.
    #[arg(long)]
    transcendental_cost: Option<String>,
}

fn resolve(common: &Common, flags: &[(&str, Option<&String>)]) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(c) = &common.code {
        cfg.set("code", c)?;
    }
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

/// Loads an alist file; the code's name is the file stem.
pub fn load_code(path: &Path) -> Result<(String, ParityCheckMatrix)> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Alist(format!("{}: {e}", path.display())))?;
    let h = ParityCheckMatrix::parse_alist(&text)?;
    let name = path
        .file_stem()
        .map_or_else(|| "code".into(), |s| s.to_string_lossy().into_owned());
    Ok((name, h))
}

fn load_weights(cfg: &RunConfig, h: &ParityCheckMatrix) -> Result<NeuralBlockWeights> {
    let path = cfg
        .checkpoint
        .as_deref()
        .ok_or_else(|| Error::Config("the vcdc decoder needs a checkpoint".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
    let w = NeuralBlockWeights::from_checkpoint(&text)?;
    w.matches(h)?;
    Ok(w)
}

fn capture_config(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("config.txt"), cfg.to_text())?;
    Ok(())
}

fn cmd_train(cfg: &RunConfig) -> Result<i32> {
    let (name, h) = load_code(cfg.code_path()?)?;
    let tcfg = cfg.train_config();
    tcfg.validate()?;
    capture_config(cfg)?;
    let every = (tcfg.iterations / 20).max(1);
    let outcome = train_with_progress(&h, &tcfg, |i, loss| {
        if (i + 1) % every == 0 {
            eprintln!("iteration {:>6}/{}  loss {loss:.6}", i + 1, tcfg.iterations);
        }
    })?;
    let ckpt = cfg.out.join(format!("{name}.vcdc"));
    fs::write(&ckpt, outcome.weights.to_checkpoint())?;
    let mut csv = Vec::new();
    outcome.write_loss_csv(&mut csv, tcfg.smoothing_window)?;
    fs::write(cfg.out.join("loss.csv"), csv)?;
    let final_loss = outcome
        .smoothed(tcfg.smoothing_window)
        .last()
        .copied()
        .unwrap_or(f64::NAN);
    println!("checkpoint {} ({} weights)", ckpt.display(), outcome.weights.len());
    println!("final smoothed loss {final_loss:.6}");
    Ok(0)
}

fn decoders_for(cfg: &RunConfig, h: &ParityCheckMatrix) -> Result<Vec<Box<dyn Decoder>>> {
    let mut out: Vec<Box<dyn Decoder>> = Vec::new();
    for d in &cfg.decoders {
        match d.as_str() {
            "bp" => out.push(Box::new(BpDecoder::new(h.clone(), cfg.bp_config())?)),
            "hard" => out.push(Box::new(HardDecisionDecoder::new(h.clone()))),
            "vcdc" => {
                let w = load_weights(cfg, h)?;
                for &t in &cfg.timesteps {
                    out.push(Box::new(VcdcDecoder::new(h.clone(), w.clone(), t, cfg.step_db)?));
                }
            }
            other => return Err(Error::Config(format!("unknown decoder {other:?}"))),
        }
    }
    Ok(out)
}

fn cmd_bench(cfg: &RunConfig) -> Result<i32> {
    let (name, h) = load_code(cfg.code_path()?)?;
    let g = GeneratorMatrix::from_parity_check(&h)?;
    let decoders = decoders_for(cfg, &h)?;
    let ber_cfg = cfg.ber_config(h.n());
    capture_config(cfg)?;
    let mut runs: Vec<BerRun> = Vec::new();
    println!("{:<10} {:>6} {:>12} {:>10} {:>8} {:>10}", "decoder", "csnr", "ber", "-ln(ber)", "errors", "steps");
    for d in &decoders {
        for &s in &cfg.csnr {
            let run = bench::run_ber(&name, &h, &g, d.as_ref(), s, &ber_cfg)?;
            let nl = match neg_ln_ber(&run) {
                NegLnBer::Estimate(v) => format!("{v:.3}"),
                NegLnBer::LowerBound(v) => format!(">{v:.2}"),
            };
            println!(
                "{:<10} {:>6.2} {:>12.4e} {:>10} {:>8} {:>10.2}{}",
                run.decoder,
                s,
                run.ber(),
                nl,
                run.bit_errors,
                run.mean_steps,
                if run.censored { "  (censored)" } else { "" }
            );
            runs.push(run);
        }
    }
    bench::emit_results(&runs, &cfg.out)?;
    println!("results in {}", cfg.out.display());
    Ok(0)
}

fn read_llrs(path: &Path) -> Result<Vec<f64>> {
    let text = if path == Path::new("-") {
        std::io::read_to_string(std::io::stdin())?
    } else {
        fs::read_to_string(path)?
    };
    text.split_whitespace().map(|t| parse_value("LLR input", t)).collect()
}

fn cmd_decode(cfg: &RunConfig, input: &Path, decoder: &str) -> Result<i32> {
    let (_, h) = load_code(cfg.code_path()?)?;
    let llr = read_llrs(input)?;
    if llr.len() != h.n() {
        return Err(Error::Dimension {
            what: "LLR input",
            expected: h.n(),
            actual: llr.len(),
        });
    }
    let csnr = cfg.csnr[0];
    let dec: Box<dyn Decoder> = match decoder {
        "bp" => Box::new(BpDecoder::new(h.clone(), cfg.bp_config())?),
        "hard" => Box::new(HardDecisionDecoder::new(h.clone())),
        "vcdc" => Box::new(VcdcDecoder::new(
            h.clone(),
            load_weights(cfg, &h)?,
            cfg.timesteps[0],
            cfg.step_db,
        )?),
        other => return Err(Error::Config(format!("unknown decoder {other:?}"))),
    };
    let result = dec.decode(&LlrWord::new(llr, csnr))?;
    let bits: String = result.bits.iter().map(|b| char::from(b'0' + b)).collect();
    println!("{bits}");
    if result.syndrome_zero {
        println!("syndrome zero");
    } else {
        println!("syndrome nonzero ({} unsatisfied checks)", result.parity_errors);
    }
    println!("steps {}", result.steps_used);
    Ok(if result.syndrome_zero { 0 } else { EXIT_SYNDROME_NONZERO })
}

fn degree_summary(degrees: impl Iterator<Item = usize>) -> String {
    let mut counts = std::collections::BTreeMap::new();
    for d in degrees {
        *counts.entry(d).or_insert(0usize) += 1;
    }
    counts
        .iter()
        .map(|(d, c)| format!("{d}:{c}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_inspect(cfg: &RunConfig) -> Result<i32> {
    let (name, h) = load_code(cfg.code_path()?)?;
    let g = GeneratorMatrix::from_parity_check(&h)?;
    println!("code        {name}");
    println!("n k m       {} {} {}", h.n(), h.k(), h.m());
    println!("rate        {:.6}", h.rate());
    println!("edges       {}", h.num_edges());
    println!("rank        {} (generator {}x{})", h.m(), g.k(), g.n());
    println!(
        "var degree  {}",
        degree_summary((0..h.n()).map(|v| h.var_neighbors(v).len()))
    );
    println!(
        "chk degree  {}",
        degree_summary((0..h.m()).map(|c| h.check_neighbors(c).len()))
    );
    let bp = count_flops(
        &h,
        FlopsTarget::Bp {
            iterations: cfg.bp_iters,
            variant: cfg.bp_variant,
        },
        cfg.transcendental_cost,
    );
    println!("bp{:<8} {bp}", cfg.bp_iters);
    for &t in &cfg.timesteps {
        let v = count_flops(&h, FlopsTarget::Vcdc { steps: t }, cfg.transcendental_cost);
        println!("vcdc{t:<6} {v}  ratio {:.2}", v.total / bp.total);
    }
    Ok(0)
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Config("thread count must be positive".into()));
        }
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit status. Argument errors print usage and exit directly.
pub fn run<I, T>(args: I) -> Result<i32>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).unwrap_or_else(|e| e.exit());
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Train(a) => {
            let all_zero = a.all_zero.then(|| "true".to_string());
            let cfg = resolve(
                &a.common,
                &[
                    ("out", a.out.as_ref()),
                    ("iterations", a.iterations.as_ref()),
                    ("batch_size", a.batch_size.as_ref()),
                    ("learning_rate", a.learning_rate.as_ref()),
                    ("seed", a.seed.as_ref()),
                    ("csnr_min", a.csnr_min.as_ref()),
                    ("csnr_max", a.csnr_max.as_ref()),
                    ("init_weight", a.init_weight.as_ref()),
                    ("all_zero", all_zero.as_ref()),
                ],
            )?;
            cmd_train(&cfg)
        }
        Command::Bench(a) => {
            let cfg = resolve(
                &a.common,
                &[
                    ("out", a.out.as_ref()),
                    ("decoders", a.decoders.as_ref()),
                    ("csnr", a.csnr.as_ref()),
                    ("timesteps", a.timesteps.as_ref()),
                    ("checkpoint", a.checkpoint.as_ref()),
                    ("step_db", a.step_db.as_ref()),
                    ("bp_iters", a.bp_iters.as_ref()),
                    ("bp_variant", a.bp_variant.as_ref()),
                    ("stop_errors", a.stop_errors.as_ref()),
                    ("max_frames", a.max_frames.as_ref()),
                    ("seed", a.seed.as_ref()),
                ],
            )?;
            cmd_bench(&cfg)
        }
        Command::Decode(a) => {
            let cfg = resolve(
                &a.common,
                &[
                    ("checkpoint", a.checkpoint.as_ref()),
                    ("csnr", a.csnr.as_ref()),
                    ("timesteps", a.timesteps.as_ref()),
                    ("step_db", a.step_db.as_ref()),
                    ("bp_iters", a.bp_iters.as_ref()),
                    ("bp_variant", a.bp_variant.as_ref()),
                ],
            )?;
            cmd_decode(&cfg, &a.input, &a.decoder)
        }
        Command::InspectCode(a) => {
            let cfg = resolve(
                &a.common,
                &[
                    ("timesteps", a.timesteps.as_ref()),
                    ("bp_iters", a.bp_iters.as_ref()),
                    ("transcendental_cost", a.transcendental_cost.as_ref()),
                ],
            )?;
            cmd_inspect(&cfg)
        }
    }
}

/// Entry point of the `vcdc` binary.
pub fn main() {
    let status = match run(std::env::args_os()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    std::process::exit(status);
}
