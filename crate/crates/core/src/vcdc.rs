//! The BP-structured neural denoiser and the reverse-diffusion decoder built
//! on it.
//!
//! One block has one layer per check node. The layer for check `c` applies a
//! min-sum check update to the current beliefs of `M(c)` and adds the result,
//! scaled by the check's scalar weight, back onto those beliefs:
//!
//! ```text
//! x_v <- x_v + w_c · u_{c→v}(x)      for v in M(c)
//! ```
//!
//! so a block is a residual stack of `n − k` layers with exactly `n − k`
//! trainable scalars. Layers run in ascending check degree, ties by index
//! (see [`layer_order`]): sparse checks produce reliable updates cheaply, and
//! dense checks then see improved inputs. The soft estimate fed to the reverse process is
//! `x̂ = tanh(x / 2)`.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::bp::minsum_extrinsic;
use crate::channel::{hard_decide, LlrWord, LLR_CLAMP};
use crate::codebook::{check_len, ParityCheckMatrix};
use crate::decoder::{DecodeResult, Decoder};
use crate::diffusion::DiffusionSchedule;
use crate::error::{Error, Result};

const CHECKPOINT_MAGIC: &str = "VCDC1";

/// Trainable weights of one block: one scalar per layer (check node).
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralBlockWeights {
    n: usize,
    k: usize,
    layers: Vec<f64>,
}

impl NeuralBlockWeights {
    pub fn new(n: usize, k: usize, layers: Vec<f64>) -> Result<Self> {
        if n <= k {
            return Err(Error::InvalidParameter(format!("need n > k, got ({n}, {k})")));
        }
        check_len("layer weights", n - k, layers.len())?;
        if let Some(bad) = layers.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite weight {bad}")));
        }
        Ok(Self { n, k, layers })
    }

    /// Every layer weight set to `value`.
    pub fn constant(h: &ParityCheckMatrix, value: f64) -> Self {
        Self {
            n: h.n(),
            k: h.k(),
            layers: vec![value; h.m()],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn layers(&self) -> &[f64] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [f64] {
        &mut self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn matches(&self, h: &ParityCheckMatrix) -> Result<()> {
        if self.n != h.n() || self.k != h.k() {
            return Err(Error::InvalidParameter(format!(
                "weights are for a ({}, {}) code, matrix is ({}, {})",
                self.n,
                self.k,
                h.n(),
                h.k()
            )));
        }
        Ok(())
    }

    /// Text checkpoint: `VCDC1 <n> <k> <L>` then one weight per line with
    /// 17 significant digits.
    pub fn to_checkpoint(&self) -> String {
        let mut out = format!(
            "{CHECKPOINT_MAGIC} {} {} {}\n",
            self.n,
            self.k,
            self.layers.len()
        );
        for w in &self.layers {
            let _ = writeln!(out, "{w:.16e}");
        }
        out
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Checkpoint("empty checkpoint".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [magic, n, k, count] = fields[..] else {
            return Err(Error::Checkpoint(format!("bad header {header:?}")));
        };
        if magic != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint(format!("unknown magic {magic:?}")));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Checkpoint(format!("bad header field {s:?}")))
        };
        let (n, k, count) = (parse(n)?, parse(k)?, parse(count)?);
        if n <= k || count != n - k {
            return Err(Error::Checkpoint(format!(
                "header declares {count} weights for a ({n}, {k}) code"
            )));
        }
        let layers = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let w: f64 = l
                    .trim()
                    .parse()
                    .map_err(|_| Error::Checkpoint(format!("bad weight {l:?}")))?;
                if w.is_finite() {
                    Ok(w)
                } else {
                    Err(Error::Checkpoint(format!("non-finite weight {l:?}")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if layers.len() != count {
            return Err(Error::Checkpoint(format!(
                "{} weights present, header declares {count}",
                layers.len()
            )));
        }
        Ok(Self { n, k, layers })
    }

    pub fn save<W: Write>(&self, mut sink: W) -> Result<()> {
        sink.write_all(self.to_checkpoint().as_bytes())?;
        Ok(())
    }

    pub fn load<R: Read>(mut source: R) -> Result<Self> {
        let mut text = String::new();
        source
            .read_to_string(&mut text)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        Self::from_checkpoint(&text)
    }
}

/// Beliefs and bipolar soft estimate produced by one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutput {
    pub beliefs: Vec<f64>,
    pub x_hat: Vec<f64>,
}

/// Runs one neural block on LLRs `l`.
pub fn neural_block(h: &ParityCheckMatrix, weights: &NeuralBlockWeights, l: &[f64]) -> Result<BlockOutput> {
    weights.matches(h)?;
    check_len("LLR word", h.n(), l.len())?;
    let mut beliefs = l.to_vec();
    let mut scratch = BlockScratch::default();
    block_in_place(h, &layer_order(h), weights.layers(), &mut beliefs, &mut scratch);
    let x_hat = beliefs.iter().map(|&b| (0.5 * b).tanh()).collect();
    Ok(BlockOutput { beliefs, x_hat })
}

#[derive(Default)]
struct BlockScratch {
    inputs: Vec<f64>,
    outputs: Vec<f64>,
}

/// Checks in the order a block visits them: ascending degree, then index.
pub fn layer_order(h: &ParityCheckMatrix) -> Vec<usize> {
    let mut order: Vec<usize> = (0..h.m()).collect();
    order.sort_by_key(|&c| h.check_neighbors(c).len());
    order
}

fn block_in_place(
    h: &ParityCheckMatrix,
    order: &[usize],
    layers: &[f64],
    x: &mut [f64],
    s: &mut BlockScratch,
) {
    for &c in order {
        let w = layers[c];
        let vars = h.check_neighbors(c);
        s.inputs.clear();
        s.inputs.extend(vars.iter().map(|&v| x[v]));
        s.outputs.resize(vars.len(), 0.0);
        minsum_extrinsic(&s.inputs, &mut s.outputs);
        for (&v, &u) in vars.iter().zip(&s.outputs) {
            x[v] = (x[v] + w * u).clamp(-LLR_CLAMP, LLR_CLAMP);
        }
    }
}

/// Reverse-diffusion decode of `l`, which must refer to the schedule's
/// noisiest level.
///
/// The syndrome of the current state is checked before the first reverse
/// step and after each one; a zero syndrome ends decoding. If the chain
/// reaches the cleanest level, one last block is applied and its beliefs are
/// hard-decided.
pub fn decode_vcdc(
    h: &ParityCheckMatrix,
    weights: &NeuralBlockWeights,
    sched: &DiffusionSchedule,
    l: &LlrWord,
) -> Result<DecodeResult> {
    weights.matches(h)?;
    check_len("LLR word", h.n(), l.len())?;
    if (l.csnr_db - sched.observed_db()).abs() > 1e-9 {
        return Err(Error::Schedule(format!(
            "observation at {} dB but schedule ends at {} dB",
            l.csnr_db,
            sched.observed_db()
        )));
    }

    let mut z = l.values.clone();
    let mut steps = 0;
    let bits = hard_decide(&z);
    if h.parity_errors(&bits) == 0 {
        return Ok(DecodeResult::from_beliefs(h, z, 0));
    }

    let order = layer_order(h);
    let mut scratch = BlockScratch::default();
    let mut beliefs = vec![0.0; h.n()];
    let mut x_hat = vec![0.0; h.n()];
    let mut bits = bits;
    for t in (1..sched.len()).rev() {
        beliefs.copy_from_slice(&z);
        block_in_place(h, &order, weights.layers(), &mut beliefs, &mut scratch);
        for (xh, &b) in x_hat.iter_mut().zip(&beliefs) {
            *xh = (0.5 * b).tanh();
        }
        sched.reverse_step_in_place(t, &mut z, &x_hat)?;
        steps += 1;
        crate::channel::hard_decide_into(&z, &mut bits);
        if h.parity_errors(&bits) == 0 {
            return Ok(DecodeResult::from_beliefs(h, z, steps));
        }
    }

    beliefs.copy_from_slice(&z);
    block_in_place(h, &order, weights.layers(), &mut beliefs, &mut scratch);
    Ok(DecodeResult::from_beliefs(h, beliefs, steps))
}

/// VCDC as a [`Decoder`]; the schedule is rebuilt for each observed CSNR.
#[derive(Debug, Clone)]
pub struct VcdcDecoder {
    h: ParityCheckMatrix,
    weights: NeuralBlockWeights,
    steps: usize,
    step_db: f64,
}

impl VcdcDecoder {
    pub fn new(h: ParityCheckMatrix, weights: NeuralBlockWeights, steps: usize, step_db: f64) -> Result<Self> {
        weights.matches(&h)?;
        // validates steps/step_db once up front
        DiffusionSchedule::build(0.0, steps, step_db, h.rate())?;
        Ok(Self {
            h,
            weights,
            steps,
            step_db,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn schedule_for(&self, observed_db: f64) -> Result<DiffusionSchedule> {
        DiffusionSchedule::build(observed_db, self.steps, self.step_db, self.h.rate())
    }
}

impl Decoder for VcdcDecoder {
    fn id(&self) -> String {
        format!("vcdc{}", self.steps)
    }

    fn decode(&self, llr: &LlrWord) -> Result<DecodeResult> {
        let sched = self.schedule_for(llr.csnr_db)?;
        decode_vcdc(&self.h, &self.weights, &sched, llr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::{decode_bp, BpConfig};
    use crate::channel::{stream_rng, transmit, to_llr, ChannelParams};
    use crate::codebook::{bipolar, GeneratorMatrix};
    use rand::Rng;

    fn hamming() -> ParityCheckMatrix {
        ParityCheckMatrix::from_dense(&[
            vec![1, 0, 1, 0, 1, 0, 1],
            vec![0, 1, 1, 0, 0, 1, 1],
            vec![0, 0, 0, 1, 1, 1, 1],
        ])
        .unwrap()
    }

    /// Cycle-free code: a path of degree-2 checks plus one degree-3 check.
    fn tree_code() -> ParityCheckMatrix {
        ParityCheckMatrix::from_check_lists(6, vec![vec![0, 1], vec![1, 2, 3], vec![3, 4]]).unwrap()
    }

    #[test]
    fn layers_run_sparse_checks_first() {
        assert_eq!(layer_order(&tree_code()), vec![0, 2, 1]);
        assert_eq!(layer_order(&hamming()), vec![0, 1, 2]);
    }

    #[test]
    fn layer_weight_follows_its_check() {
        // only check 1 ({1, 2, 3}) is active: x1 += w·sign(x2·x3)·min(|x2|, |x3|)
        let h = tree_code();
        let w = NeuralBlockWeights::new(6, 3, vec![0.0, 2.0, 0.0]).unwrap();
        let out = neural_block(&h, &w, &[1.0, 3.0, -0.5, 4.0, 1.0, 1.0]).unwrap();
        assert_eq!(out.beliefs[1], 3.0 + 2.0 * -0.5);
    }

    #[test]
    fn zero_weights_are_identity() {
        let h = hamming();
        let w = NeuralBlockWeights::constant(&h, 0.0);
        let l = [0.3, -1.2, 2.0, 0.0, -0.1, 4.0, -3.3];
        let out = neural_block(&h, &w, &l).unwrap();
        assert_eq!(out.beliefs, l.to_vec());
    }

    #[test]
    fn x_hat_is_strictly_inside_unit_interval() {
        let h = hamming();
        let w = NeuralBlockWeights::new(7, 4, vec![0.7, -0.2, 1.3]).unwrap();
        let mut rng = stream_rng(4, 0);
        for _ in 0..100 {
            let l: Vec<f64> = (0..7).map(|_| rng.random_range(-8.0..8.0)).collect();
            let out = neural_block(&h, &w, &l).unwrap();
            assert!(out.x_hat.iter().all(|x| x.abs() < 1.0));
        }
    }

    #[test]
    fn unit_weights_match_bp_on_noiseless_tree_input() {
        let h = tree_code();
        let g = GeneratorMatrix::from_parity_check(&h).unwrap();
        let w = NeuralBlockWeights::constant(&h, 1.0);
        let cfg = BpConfig {
            max_iters: 1,
            ..BpConfig::default()
        };
        for m in 0..(1u8 << h.k()) {
            let msg: Vec<u8> = (0..h.k()).map(|i| (m >> i) & 1).collect();
            let x = g.encode(&msg).unwrap();
            let l: Vec<f64> = bipolar(&x).iter().map(|s| 3.0 * s).collect();
            let out = neural_block(&h, &w, &l).unwrap();
            let bp = decode_bp(&h, &LlrWord::new(l, 0.0), &cfg).unwrap();
            assert_eq!(hard_decide(&out.beliefs), bp.bits);
        }
    }

    #[test]
    fn single_layer_hand_computation() {
        // check 0 of the tree code joins x0 and x1: u_{0→0} = x1, u_{0→1} = x0
        let h = tree_code();
        let w = NeuralBlockWeights::new(6, 3, vec![0.5, 0.0, 0.0]).unwrap();
        let l = [2.0, -1.0, 0.0, 0.0, 0.0, 0.0];
        let out = neural_block(&h, &w, &l).unwrap();
        assert_eq!(out.beliefs[0], 2.0 - 0.5 * 1.0);
        assert_eq!(out.beliefs[1], -1.0 + 0.5 * 2.0);
    }

    #[test]
    fn weight_count_is_checked() {
        let h = hamming();
        assert!(NeuralBlockWeights::new(7, 4, vec![0.0; 2]).is_err());
        let other = NeuralBlockWeights::new(8, 4, vec![0.0; 4]).unwrap();
        assert!(neural_block(&h, &other, &[0.0; 7]).is_err());
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let w = NeuralBlockWeights::new(7, 4, vec![0.1, -1.0 / 3.0, 1e-300]).unwrap();
        let text = w.to_checkpoint();
        assert!(text.starts_with("VCDC1 7 4 3\n"));
        assert_eq!(NeuralBlockWeights::from_checkpoint(&text).unwrap(), w);
        let mut buf = Vec::new();
        w.save(&mut buf).unwrap();
        assert_eq!(NeuralBlockWeights::load(buf.as_slice()).unwrap(), w);
    }

    #[test]
    fn checkpoint_rejects_tampering() {
        let w = NeuralBlockWeights::new(7, 4, vec![0.1, 0.2, 0.3]).unwrap();
        let text = w.to_checkpoint();
        let bad_count = text.replacen("VCDC1 7 4 3", "VCDC1 7 4 2", 1);
        assert!(NeuralBlockWeights::from_checkpoint(&bad_count).is_err());
        let missing = text.lines().take(3).collect::<Vec<_>>().join("\n");
        assert!(NeuralBlockWeights::from_checkpoint(&missing).is_err());
        let nan = text.replacen("1.0000000000000001e-1", "NaN", 1);
        assert!(NeuralBlockWeights::from_checkpoint(&nan).is_err());
        assert!(NeuralBlockWeights::from_checkpoint("VCDC9 7 4 3\n1\n2\n3\n").is_err());
        assert!(NeuralBlockWeights::from_checkpoint("").is_err());
    }

    #[test]
    fn noiseless_input_needs_no_reverse_steps() {
        let h = hamming();
        let g = GeneratorMatrix::from_parity_check(&h).unwrap();
        let x = g.encode(&[0, 1, 1, 0]).unwrap();
        let l: Vec<f64> = bipolar(&x).iter().map(|s| 5.0 * s).collect();
        let sched = DiffusionSchedule::build(4.0, 20, 0.5, h.rate()).unwrap();
        let w = NeuralBlockWeights::constant(&h, 0.3);
        let r = decode_vcdc(&h, &w, &sched, &LlrWord::new(l, 4.0)).unwrap();
        assert_eq!(r.steps_used, 0);
        assert_eq!(r.bits, x);
        assert!(r.syndrome_zero);
    }

    #[test]
    fn schedule_must_end_at_observed_csnr() {
        let h = hamming();
        let sched = DiffusionSchedule::build(4.0, 5, 0.5, h.rate()).unwrap();
        let w = NeuralBlockWeights::constant(&h, 0.3);
        assert!(decode_vcdc(&h, &w, &sched, &LlrWord::new(vec![1.0; 7], 5.0)).is_err());
    }

    #[test]
    fn zero_weights_keep_channel_decision() {
        let h = hamming();
        let g = GeneratorMatrix::from_parity_check(&h).unwrap();
        let w = NeuralBlockWeights::constant(&h, 0.0);
        let params = ChannelParams::new(2.0, 4, 7).unwrap();
        let mut rng = stream_rng(8, 0);
        for steps in [1, 3, 20] {
            let sched = DiffusionSchedule::build(2.0, steps, 0.5, h.rate()).unwrap();
            for _ in 0..100 {
                let msg: Vec<u8> = (0..4).map(|_| rng.random_range(0..2)).collect();
                let x = g.encode(&msg).unwrap();
                let y = transmit(&bipolar(&x), params.w, &mut rng);
                let l = to_llr(&y, &params);
                let r = decode_vcdc(&h, &w, &sched, &l).unwrap();
                assert_eq!(r.bits, hard_decide(&l.values));
                assert!(r.steps_used < steps);
                assert_eq!(r.syndrome_zero, h.syndrome(&r.bits).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn forced_zero_estimate_never_moves_state() {
        let sched = DiffusionSchedule::build(4.0, 20, 0.5, 0.5).unwrap();
        let mut z = vec![0.4, -0.9, 1.7];
        let before = z.clone();
        for t in (1..20).rev() {
            sched.reverse_step_in_place(t, &mut z, &[0.0; 3]).unwrap();
        }
        assert_eq!(z, before);
    }
}
