//! Monte-Carlo BER evaluation, complexity accounting and result files.
//!
//! Frames are simulated in fixed-size chunks. Chunk `i` draws everything
//! from RNG stream `i` of the run seed, and chunks are processed in rounds of
//! 1, 2, 4, … up to 64 chunks. The stopping rule is evaluated between rounds,
//! so a run may overshoot `stop_errors` by up to one round, but the outcome
//! never depends on the number of worker threads.

use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::bp::BpVariant;
use crate::channel::{stream_rng, to_llr, transmit, ChannelParams};
use crate::codebook::{bipolar, GeneratorMatrix, ParityCheckMatrix};
use crate::decoder::Decoder;
use crate::error::{Error, Result};

/// Column order of the results CSV.
pub const RESULTS_HEADER: &str =
    "code,n,k,decoder,csnr_db,bits,bit_errors,ber,neg_ln_ber,frames,frame_errors,mean_steps,censored,seed";

const MAX_ROUND_CHUNKS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct BerConfig {
    /// Stop once at least this many bit errors were seen.
    pub stop_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
    pub chunk_frames: u64,
    /// Transmit the all-zero codeword instead of random messages.
    pub all_zero: bool,
}

impl BerConfig {
    /// Default configuration for a length-`n` code: 100 errors, at most
    /// 10^8 simulated bits.
    pub fn for_length(n: usize) -> Self {
        Self {
            stop_errors: 100,
            max_frames: 100_000_000u64.div_ceil(n as u64),
            seed: 0,
            chunk_frames: 32,
            all_zero: false,
        }
    }
}

/// Outcome of one Monte-Carlo point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRun {
    pub code: String,
    pub n: usize,
    pub k: usize,
    pub decoder: String,
    pub csnr_db: f64,
    pub bits: u64,
    pub bit_errors: u64,
    pub frames: u64,
    pub frame_errors: u64,
    pub mean_steps: f64,
    /// The frame budget ran out before `stop_errors` was reached.
    pub censored: bool,
    pub seed: u64,
}

impl BerRun {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }
}

/// `−ln(BER)`, or a bound when no error was observed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NegLnBer {
    Estimate(f64),
    /// No errors: BER is below `1/bits`, so `−ln(BER)` exceeds this value.
    LowerBound(f64),
}

impl NegLnBer {
    pub fn value(self) -> f64 {
        match self {
            Self::Estimate(v) | Self::LowerBound(v) => v,
        }
    }
}

pub fn neg_ln_ber(run: &BerRun) -> NegLnBer {
    if run.bit_errors == 0 {
        NegLnBer::LowerBound((run.bits.max(1) as f64).ln())
    } else {
        NegLnBer::Estimate(-run.ber().ln())
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    frames: u64,
    bit_errors: u64,
    frame_errors: u64,
    steps: u64,
}

impl Tally {
    fn merge(&mut self, o: &Tally) {
        self.frames += o.frames;
        self.bit_errors += o.bit_errors;
        self.frame_errors += o.frame_errors;
        self.steps += o.steps;
    }
}

fn simulate_chunk(
    g: &GeneratorMatrix,
    decoder: &dyn Decoder,
    params: &ChannelParams,
    cfg: &BerConfig,
    chunk: u64,
    frames: u64,
) -> Result<Tally> {
    let mut rng = stream_rng(cfg.seed, chunk);
    let mut tally = Tally::default();
    let mut msg = vec![0u8; g.k()];
    for _ in 0..frames {
        let x = if cfg.all_zero {
            vec![0u8; g.n()]
        } else {
            msg.iter_mut().for_each(|b| *b = rng.random_range(0..2u8));
            g.encode(&msg)?
        };
        let y = transmit(&bipolar(&x), params.w, &mut rng);
        let result = decoder.decode(&to_llr(&y, params))?;
        let errors = result.bits.iter().zip(&x).filter(|(a, b)| a != b).count() as u64;
        tally.frames += 1;
        tally.bit_errors += errors;
        tally.frame_errors += u64::from(errors > 0);
        tally.steps += result.steps_used as u64;
    }
    Ok(tally)
}

/// Simulates frames at `csnr_db` until `stop_errors` bit errors or
/// `max_frames` frames.
pub fn run_ber(
    code: &str,
    h: &ParityCheckMatrix,
    g: &GeneratorMatrix,
    decoder: &dyn Decoder,
    csnr_db: f64,
    cfg: &BerConfig,
) -> Result<BerRun> {
    if cfg.stop_errors == 0 || cfg.chunk_frames == 0 {
        return Err(Error::InvalidParameter(
            "stop_errors and chunk_frames must be at least 1".into(),
        ));
    }
    let params = ChannelParams::new(csnr_db, h.k(), h.n())?;
    let mut total = Tally::default();
    let mut next_chunk = 0u64;
    let mut round_size = 1usize;

    while total.bit_errors < cfg.stop_errors && total.frames < cfg.max_frames {
        let remaining = cfg.max_frames - total.frames;
        let mut jobs = Vec::with_capacity(round_size);
        let mut planned = 0;
        while jobs.len() < round_size && planned < remaining {
            let frames = cfg.chunk_frames.min(remaining - planned);
            jobs.push((next_chunk, frames));
            next_chunk += 1;
            planned += frames;
        }
        let tallies: Vec<Tally> = jobs
            .par_iter()
            .map(|&(chunk, frames)| simulate_chunk(g, decoder, &params, cfg, chunk, frames))
            .collect::<Result<_>>()?;
        for t in &tallies {
            total.merge(t);
        }
        round_size = (round_size * 2).min(MAX_ROUND_CHUNKS);
    }

    Ok(BerRun {
        code: code.to_string(),
        n: h.n(),
        k: h.k(),
        decoder: decoder.id(),
        csnr_db,
        bits: total.frames * h.n() as u64,
        bit_errors: total.bit_errors,
        frames: total.frames,
        frame_errors: total.frame_errors,
        mean_steps: if total.frames == 0 {
            0.0
        } else {
            total.steps as f64 / total.frames as f64
        },
        censored: total.bit_errors < cfg.stop_errors,
        seed: cfg.seed,
    })
}

/// Decoder whose operations are counted by [`count_flops`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlopsTarget {
    Bp { iterations: usize, variant: BpVariant },
    Vcdc { steps: usize },
}

/// Worst-case (no early stop) operation counts of one decode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlopsReport {
    pub add: u64,
    pub mul: u64,
    pub compare: u64,
    /// tanh / arctanh evaluations.
    pub transcendental: u64,
    pub transcendental_cost: f64,
    /// Weighted sum of all categories.
    pub total: f64,
    /// Parameter storage at 4 bytes per weight.
    pub model_bytes: u64,
}

impl fmt::Display for FlopsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "add={} mul={} compare={} transcendental={} total={:.0} model_bytes={}",
            self.add, self.mul, self.compare, self.transcendental, self.total, self.model_bytes
        )
    }
}

#[derive(Default)]
struct Counts {
    add: u64,
    mul: u64,
    compare: u64,
    transcendental: u64,
}

/// Static operation count from graph degrees and the iteration/step bound.
///
/// Every real add, multiply and comparison counts 1; each tanh/arctanh
/// counts `transcendental_cost`. Clamps count as two comparisons, hard
/// decisions as one comparison per bit and each syndrome XOR as one add.
pub fn count_flops(h: &ParityCheckMatrix, target: FlopsTarget, transcendental_cost: f64) -> FlopsReport {
    let (n, e) = (h.n() as u64, h.num_edges() as u64);
    let mut c = Counts::default();
    let decision = |c: &mut Counts| {
        c.compare += n;
        c.add += e;
    };
    let model_bytes;
    match target {
        FlopsTarget::Bp { iterations, variant } => {
            model_bytes = 0;
            for _ in 0..iterations {
                match variant {
                    BpVariant::SumProduct => {
                        // tanh(u/2), prefix/suffix products, 2·arctanh
                        c.transcendental += 2 * e;
                        c.mul += e + 3 * e + e;
                    }
                    BpVariant::MinSum => {
                        c.compare += 3 * e;
                        c.mul += 2 * e;
                    }
                }
                c.compare += 2 * e;
                // beliefs, extrinsic subtraction, clamps
                c.add += 2 * e;
                c.compare += 2 * e + 2 * n;
                decision(&mut c);
            }
        }
        FlopsTarget::Vcdc { steps } => {
            model_bytes = 4 * h.m() as u64;
            let block = |c: &mut Counts| {
                c.compare += 3 * e + 2 * e;
                c.mul += 2 * e + e;
                c.add += e;
            };
            if steps > 0 {
                decision(&mut c);
                for _ in 1..steps {
                    block(&mut c);
                    c.transcendental += n;
                    c.mul += n;
                    // reverse update
                    c.mul += n;
                    c.add += n + 1;
                    decision(&mut c);
                }
                block(&mut c);
                decision(&mut c);
            }
        }
    }
    let total = (c.add + c.mul + c.compare) as f64 + transcendental_cost * c.transcendental as f64;
    FlopsReport {
        add: c.add,
        mul: c.mul,
        compare: c.compare,
        transcendental: c.transcendental,
        transcendental_cost,
        total,
        model_bytes,
    }
}

pub fn results_csv(runs: &[BerRun]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in runs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:e},{},{},{},{},{},{}\n",
            r.code,
            r.n,
            r.k,
            r.decoder,
            r.csnr_db,
            r.bits,
            r.bit_errors,
            r.ber(),
            neg_ln_ber(r).value(),
            r.frames,
            r.frame_errors,
            r.mean_steps,
            r.censored,
            r.seed
        ));
    }
    out
}

pub fn parse_results_csv(text: &str) -> Result<Vec<BerRun>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == RESULTS_HEADER => {}
        other => return Err(Error::Config(format!("unexpected results header {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 14 {
                return Err(Error::Config(format!("expected 14 columns in {line:?}")));
            }
            fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
                s.parse().map_err(|_| Error::Config(format!("bad field {s:?}")))
            }
            Ok(BerRun {
                code: f[0].to_string(),
                n: num(f[1])?,
                k: num(f[2])?,
                decoder: f[3].to_string(),
                csnr_db: num(f[4])?,
                bits: num(f[5])?,
                bit_errors: num(f[6])?,
                frames: num(f[9])?,
                frame_errors: num(f[10])?,
                mean_steps: num(f[11])?,
                censored: num(f[12])?,
                seed: num(f[13])?,
            })
        })
        .collect()
}

/// Plot series (SNR in dB vs BER) for one code, one block per decoder.
pub fn plot_data(runs: &[BerRun]) -> String {
    let mut decoders: Vec<&str> = Vec::new();
    for r in runs {
        if !decoders.contains(&r.decoder.as_str()) {
            decoders.push(&r.decoder);
        }
    }
    let mut out = String::from("# csnr_db ber\n");
    for d in decoders {
        out.push_str(&format!("\n# decoder={d}\n"));
        let mut pts: Vec<&BerRun> = runs.iter().filter(|r| r.decoder == d).collect();
        pts.sort_by(|a, b| a.csnr_db.total_cmp(&b.csnr_db));
        for r in pts {
            out.push_str(&format!("{} {:e}\n", r.csnr_db, r.ber()));
        }
    }
    out
}

/// Writes `results.csv` and one `<code>.plot.dat` per code into `dir`.
pub fn emit_results(runs: &[BerRun], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::File::create(dir.join("results.csv"))?.write_all(results_csv(runs).as_bytes())?;
    let mut codes: Vec<&str> = Vec::new();
    for r in runs {
        if !codes.contains(&r.code.as_str()) {
            codes.push(&r.code);
        }
    }
    for code in codes {
        let subset: Vec<BerRun> = runs.iter().filter(|r| r.code == code).cloned().collect();
        std::fs::write(dir.join(format!("{code}.plot.dat")), plot_data(&subset))?;
    }
    Ok(())
}
