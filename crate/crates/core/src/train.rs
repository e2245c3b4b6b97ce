//! Training of the neural block: a scalar reverse-mode tape, the BCE loss,
//! Adam and the data-generation loop.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{noise_scale, stream_rng, to_llr, transmit, ChannelParams, LLR_CLAMP};
use crate::codebook::{bipolar, check_len, GeneratorMatrix, ParityCheckMatrix};
use crate::error::{Error, Result};
use crate::vcdc::{layer_order, NeuralBlockWeights};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Append-only record of scalar operations.
///
/// Each node stores its value and the local partial derivatives with respect
/// to its operands. Operands always precede the node, so walking the tape
/// backwards visits nodes in reverse topological order.
#[derive(Debug, Default, Clone)]
pub struct Tape {
    values: Vec<f64>,
    offsets: Vec<u32>,
    partials: Vec<(u32, f64)>,
}

/// Adjoints of every node after a backward pass.
#[derive(Debug, Clone)]
pub struct Gradients(Vec<f64>);

impl Gradients {
    pub fn get(&self, v: Var) -> f64 {
        self.0[v.index()]
    }
}

impl Tape {
    pub fn new() -> Self {
        Self {
            values: Vec::new(),
            offsets: vec![0],
            partials: Vec::new(),
        }
    }

    pub fn clear(&mut self) {
        self.values.clear();
        self.offsets.clear();
        self.offsets.push(0);
        self.partials.clear();
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, v: Var) -> f64 {
        self.values[v.index()]
    }

    fn push(&mut self, value: f64, deps: &[(Var, f64)]) -> Var {
        if self.offsets.is_empty() {
            self.offsets.push(0);
        }
        let id = self.values.len() as u32;
        self.values.push(value);
        self.partials.extend(deps.iter().map(|&(v, d)| (v.0, d)));
        self.offsets.push(self.partials.len() as u32);
        Var(id)
    }

    pub fn leaf(&mut self, value: f64) -> Var {
        self.push(value, &[])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.push(self.value(a) + self.value(b), &[(a, 1.0), (b, 1.0)])
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.push(self.value(a) - self.value(b), &[(a, 1.0), (b, -1.0)])
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        self.push(va * vb, &[(a, vb), (b, va)])
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        self.push(c * self.value(a), &[(a, c)])
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let t = self.value(a).tanh();
        self.push(t, &[(a, 1.0 - t * t)])
    }

    pub fn sum(&mut self, items: &[Var]) -> Var {
        let total = items.iter().map(|&v| self.value(v)).sum();
        let deps: Vec<(Var, f64)> = items.iter().map(|&v| (v, 1.0)).collect();
        self.push(total, &deps)
    }

    /// `clamp(x + w·u, ±bound)`; the partials vanish once the bound is hit.
    pub fn residual(&mut self, x: Var, w: Var, u: Var, bound: f64) -> Var {
        let (vx, vw, vu) = (self.value(x), self.value(w), self.value(u));
        let raw = vx + vw * vu;
        if raw.abs() > bound {
            self.push(raw.clamp(-bound, bound), &[])
        } else {
            self.push(raw, &[(x, 1.0), (w, vu), (u, vw)])
        }
    }

    /// Min-sum check outputs, `out[j] = (∏_{i≠j} sign x_i) · min_{i≠j} |x_i|`.
    ///
    /// The minimum's gradient flows to the attained minimizer only, with ties
    /// going to the lowest position; signs are treated as constants.
    pub fn min_sum_extrinsic(&mut self, inputs: &[Var]) -> Vec<Var> {
        let vals: Vec<f64> = inputs.iter().map(|&v| self.value(v)).collect();
        let mut sign = 1.0;
        let (mut min1, mut min2) = (f64::INFINITY, f64::INFINITY);
        let (mut arg1, mut arg2) = (0, 0);
        for (j, &u) in vals.iter().enumerate() {
            if u < 0.0 {
                sign = -sign;
            }
            let a = u.abs();
            if a < min1 {
                min2 = min1;
                arg2 = arg1;
                min1 = a;
                arg1 = j;
            } else if a < min2 {
                min2 = a;
                arg2 = j;
            }
        }
        let sgn = |u: f64| if u < 0.0 { -1.0 } else { 1.0 };
        (0..vals.len())
            .map(|j| {
                let s = sign * sgn(vals[j]);
                let (src, magnitude) = if j == arg1 { (arg2, min2) } else { (arg1, min1) };
                self.push(s * magnitude, &[(inputs[src], s * sgn(vals[src]))])
            })
            .collect()
    }

    /// Binary cross-entropy of `sigmoid(logit)` against `target ∈ [0, 1]`,
    /// in the overflow-free form `max(b, 0) − y·b + ln(1 + e^{−|b|})`.
    pub fn bce_with_logit(&mut self, logit: Var, target: f64) -> Var {
        let b = self.value(logit);
        let value = bce(b, target);
        self.push(value, &[(logit, sigmoid(b) - target)])
    }

    /// Reverse sweep from `root`.
    pub fn backward(&self, root: Var) -> Result<Gradients> {
        if self.values.is_empty() {
            return Err(Error::Tape("backward called on an empty tape".into()));
        }
        if root.index() >= self.values.len() {
            return Err(Error::Tape(format!("node {} is not on this tape", root.0)));
        }
        let mut adj = vec![0.0; self.values.len()];
        adj[root.index()] = 1.0;
        for node in (0..=root.index()).rev() {
            let a = adj[node];
            if a == 0.0 {
                continue;
            }
            let (lo, hi) = (self.offsets[node] as usize, self.offsets[node + 1] as usize);
            for &(parent, d) in &self.partials[lo..hi] {
                adj[parent as usize] += a * d;
            }
        }
        Ok(Gradients(adj))
    }
}

fn sigmoid(b: f64) -> f64 {
    if b >= 0.0 {
        1.0 / (1.0 + (-b).exp())
    } else {
        let e = b.exp();
        e / (1.0 + e)
    }
}

fn bce(b: f64, target: f64) -> f64 {
    b.max(0.0) - target * b + (-b.abs()).exp().ln_1p()
}

/// Mean BCE between `sigmoid(beliefs)` and the probability that each bit is 0.
pub fn loss(beliefs: &[f64], bits: &[u8]) -> Result<f64> {
    check_len("beliefs", bits.len(), beliefs.len())?;
    let total: f64 = beliefs
        .iter()
        .zip(bits)
        .map(|(&b, &x)| bce(b, 1.0 - f64::from(x)))
        .sum();
    Ok(total / bits.len() as f64)
}

/// Records the loss on `tape`; see [`loss`].
pub fn taped_loss(tape: &mut Tape, beliefs: &[Var], bits: &[u8]) -> Var {
    let terms: Vec<Var> = beliefs
        .iter()
        .zip(bits)
        .map(|(&b, &x)| tape.bce_with_logit(b, 1.0 - f64::from(x)))
        .collect();
    let total = tape.sum(&terms);
    tape.scale(total, 1.0 / bits.len() as f64)
}

/// Records one neural block on `tape`. Returns the final beliefs; their
/// values equal [`crate::vcdc::neural_block`] bit for bit.
pub fn taped_block(tape: &mut Tape, h: &ParityCheckMatrix, layers: &[Var], l: &[f64]) -> Vec<Var> {
    let mut x: Vec<Var> = l.iter().map(|&v| tape.leaf(v)).collect();
    let mut inputs = Vec::new();
    for c in layer_order(h) {
        let w = layers[c];
        let vars = h.check_neighbors(c);
        inputs.clear();
        inputs.extend(vars.iter().map(|&v| x[v]));
        let u = tape.min_sum_extrinsic(&inputs);
        for (&v, &uv) in vars.iter().zip(&u) {
            x[v] = tape.residual(x[v], w, uv, LLR_CLAMP);
        }
    }
    x
}

/// Loss and weight gradient of one example.
pub fn example_gradient(
    tape: &mut Tape,
    h: &ParityCheckMatrix,
    weights: &[f64],
    llr: &[f64],
    bits: &[u8],
) -> Result<(f64, Vec<f64>)> {
    tape.clear();
    let layers: Vec<Var> = weights.iter().map(|&w| tape.leaf(w)).collect();
    let beliefs = taped_block(tape, h, &layers, llr);
    let root = taped_loss(tape, &beliefs, bits);
    let grads = tape.backward(root)?;
    Ok((tape.value(root), layers.iter().map(|&w| grads.get(w)).collect()))
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(len: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub iterations: usize,
    pub csnr_min_db: f64,
    pub csnr_max_db: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Starting value of every layer weight.
    pub init_weight: f64,
    /// Train on the all-zero codeword instead of random messages.
    pub all_zero: bool,
    /// Fixed noise scale overriding the sampled CSNR.
    pub noise_override: Option<f64>,
    pub smoothing_window: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 256,
            iterations: 20_000,
            csnr_min_db: 4.0,
            csnr_max_db: 6.0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            init_weight: 0.5,
            all_zero: false,
            noise_override: None,
            smoothing_window: 100,
        }
    }
}

impl TrainConfig {
    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let positive = [self.learning_rate, self.epsilon]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !positive || self.batch_size == 0 || self.smoothing_window == 0 {
            return Err(Error::InvalidParameter(
                "learning rate, epsilon, batch size and smoothing window must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidParameter("Adam betas must lie in [0, 1)".into()));
        }
        if !(self.csnr_min_db <= self.csnr_max_db) {
            return Err(Error::InvalidParameter(format!(
                "empty CSNR range [{}, {}]",
                self.csnr_min_db, self.csnr_max_db
            )));
        }
        if let Some(w) = self.noise_override {
            if !(w > 0.0) {
                return Err(Error::InvalidParameter(format!("noise override {w} must be positive")));
            }
        }
        Ok(())
    }
}

/// Trained weights and the per-iteration mean batch loss.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub weights: NeuralBlockWeights,
    pub losses: Vec<f64>,
}

impl TrainOutcome {
    /// Trailing moving average of the loss over `window` iterations.
    pub fn smoothed(&self, window: usize) -> Vec<f64> {
        smooth(&self.losses, window)
    }

    /// Writes `iteration,raw_loss,smoothed_loss`.
    pub fn write_loss_csv<W: Write>(&self, mut out: W, window: usize) -> Result<()> {
        writeln!(out, "iteration,raw_loss,smoothed_loss")?;
        for (i, (raw, sm)) in self.losses.iter().zip(self.smoothed(window)).enumerate() {
            writeln!(out, "{i},{raw:.17e},{sm:.17e}")?;
        }
        Ok(())
    }
}

pub fn smooth(series: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut acc = 0.0;
    series
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            acc += x;
            if i >= window {
                acc -= series[i - window];
            }
            acc / (i + 1).min(window) as f64
        })
        .collect()
}

/// One training example: channel LLRs and the transmitted bits.
fn sample_example(
    g: &GeneratorMatrix,
    cfg: &TrainConfig,
    rate: f64,
    iteration: usize,
    index: usize,
) -> Result<(Vec<f64>, Vec<u8>)> {
    let stream = (iteration as u64) * (cfg.batch_size as u64) + index as u64;
    let mut rng = stream_rng(cfg.seed, stream);
    let csnr = if cfg.csnr_max_db > cfg.csnr_min_db {
        rng.random_range(cfg.csnr_min_db..cfg.csnr_max_db)
    } else {
        cfg.csnr_min_db
    };
    let w = match cfg.noise_override {
        Some(w) => w,
        None => noise_scale(csnr, g.k(), g.n())?,
    };
    let bits = if cfg.all_zero {
        vec![0u8; g.n()]
    } else {
        let msg: Vec<u8> = (0..g.k()).map(|_| rng.random_range(0..2u8)).collect();
        g.encode(&msg)?
    };
    let y = transmit(&bipolar(&bits), w, &mut rng);
    let params = ChannelParams::with_noise(csnr, rate, w)?;
    Ok((to_llr(&y, &params).values, bits))
}

/// Trains one block with Adam on single-step denoising predictions.
///
/// Each example draws its CSNR uniformly from the configured range, a random
/// message (or the all-zero word) and channel noise from its own RNG stream,
/// so results do not depend on the number of worker threads.
pub fn train(h: &ParityCheckMatrix, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with_progress(h, cfg, |_, _| {})
}

pub fn train_with_progress(
    h: &ParityCheckMatrix,
    cfg: &TrainConfig,
    mut progress: impl FnMut(usize, f64),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let g = GeneratorMatrix::from_parity_check(h)?;
    let mut weights = NeuralBlockWeights::constant(h, cfg.init_weight);
    let mut adam = Adam::new(weights.len(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
    let mut losses = Vec::with_capacity(cfg.iterations);
    let rate = h.rate();

    for iteration in 0..cfg.iterations {
        let current = weights.layers().to_vec();
        let per_example: Vec<(f64, Vec<f64>)> = (0..cfg.batch_size)
            .into_par_iter()
            .map_init(Tape::new, |tape, j| {
                let (llr, bits) = sample_example(&g, cfg, rate, iteration, j)?;
                example_gradient(tape, h, &current, &llr, &bits)
            })
            .collect::<Result<_>>()?;

        // Summed in example order so the result is independent of scheduling.
        let mut batch_loss = 0.0;
        let mut grad = vec![0.0; current.len()];
        for (l, gr) in &per_example {
            batch_loss += l;
            for (a, b) in grad.iter_mut().zip(gr) {
                *a += b;
            }
        }
        let scale = 1.0 / cfg.batch_size as f64;
        batch_loss *= scale;
        grad.iter_mut().for_each(|g| *g *= scale);
        if !batch_loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged {
                iteration,
                loss: batch_loss,
            });
        }
        adam.step(weights.layers_mut(), &grad);
        losses.push(batch_loss);
        progress(iteration, batch_loss);
    }

    Ok(TrainOutcome { weights, losses })
}
