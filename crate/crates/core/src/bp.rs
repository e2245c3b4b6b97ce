//! Flooding belief propagation in the LLR domain, sum-product or min-sum.

use crate::channel::{hard_decide_into, LlrWord};
use crate::codebook::{check_len, ParityCheckMatrix};
use crate::decoder::{DecodeResult, Decoder};
use crate::error::{Error, Result};

/// Bound on `|∏ tanh|` is `1 - PRODUCT_EPS`, keeping `arctanh` finite.
pub const PRODUCT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BpVariant {
    #[default]
    SumProduct,
    MinSum,
}

impl std::str::FromStr for BpVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum-product" | "sumproduct" | "spa" => Ok(Self::SumProduct),
            "min-sum" | "minsum" => Ok(Self::MinSum),
            other => Err(Error::InvalidParameter(format!("unknown BP variant {other:?}"))),
        }
    }
}

impl std::fmt::Display for BpVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::SumProduct => "sum-product",
            Self::MinSum => "min-sum",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpConfig {
    pub max_iters: usize,
    pub variant: BpVariant,
    /// Bound on channel LLR magnitudes entering the decoder.
    pub llr_clamp: f64,
    /// Bound on every message and belief.
    pub message_clamp: f64,
    /// Stop as soon as the hard decision satisfies every check.
    pub early_stop: bool,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            max_iters: 5,
            variant: BpVariant::SumProduct,
            llr_clamp: crate::channel::LLR_CLAMP,
            message_clamp: 30.0,
            early_stop: true,
        }
    }
}

impl BpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.llr_clamp > 0.0 && self.message_clamp > 0.0) {
            return Err(Error::InvalidParameter("clamps must be positive".into()));
        }
        Ok(())
    }
}

/// `2·arctanh(∏ tanh(u/2))` over an extrinsic message list.
pub fn check_update_sumproduct(incoming: &[f64]) -> f64 {
    let product: f64 = incoming.iter().map(|&u| (0.5 * u).tanh()).product();
    2.0 * clamp_product(product).atanh()
}

/// `(∏ sign u) · min |u|` with `sign(0) = +1`.
pub fn check_update_minsum(incoming: &[f64]) -> f64 {
    let mut sign = 1.0;
    let mut magnitude = f64::INFINITY;
    for &u in incoming {
        if u < 0.0 {
            sign = -sign;
        }
        magnitude = magnitude.min(u.abs());
    }
    sign * magnitude
}

/// `l_v + Σ incoming`, skipping position `exclude`.
pub fn variable_update(l_v: f64, incoming: &[f64], exclude: usize) -> f64 {
    l_v + incoming
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != exclude)
        .map(|(_, u)| u)
        .sum::<f64>()
}

/// Posterior LLR `s_v = l_v + Σ incoming`.
pub fn belief(l_v: f64, incoming: &[f64]) -> f64 {
    l_v + incoming.iter().sum::<f64>()
}

fn clamp_product(p: f64) -> f64 {
    p.clamp(-1.0 + PRODUCT_EPS, 1.0 - PRODUCT_EPS)
}

/// All extrinsic outputs of one check node, `out[j]` excluding `inputs[j]`.
fn sumproduct_extrinsic(inputs: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
    let d = inputs.len();
    scratch.clear();
    scratch.extend(inputs.iter().map(|&u| (0.5 * u).tanh()));
    // out[j] holds the prefix product, then multiply by the suffix.
    let mut acc = 1.0;
    for j in 0..d {
        out[j] = acc;
        acc *= scratch[j];
    }
    acc = 1.0;
    for j in (0..d).rev() {
        out[j] = 2.0 * clamp_product(out[j] * acc).atanh();
        acc *= scratch[j];
    }
}

pub(crate) fn minsum_extrinsic(inputs: &[f64], out: &mut [f64]) {
    let mut sign = 1.0;
    let (mut min1, mut min2, mut argmin) = (f64::INFINITY, f64::INFINITY, 0);
    for (j, &u) in inputs.iter().enumerate() {
        if u < 0.0 {
            sign = -sign;
        }
        let a = u.abs();
        if a < min1 {
            min2 = min1;
            min1 = a;
            argmin = j;
        } else if a < min2 {
            min2 = a;
        }
    }
    for (j, (&u, o)) in inputs.iter().zip(out.iter_mut()).enumerate() {
        let own = if u < 0.0 { -1.0 } else { 1.0 };
        let magnitude = if j == argmin { min2 } else { min1 };
        *o = sign * own * magnitude;
    }
}

/// Per-edge messages and posteriors of one decode.
///
/// Edge arrays follow the check-major edge order of [`ParityCheckMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState {
    pub v2c: Vec<f64>,
    pub c2v: Vec<f64>,
    pub beliefs: Vec<f64>,
}

impl MessageState {
    fn new(h: &ParityCheckMatrix, llr: &[f64]) -> Self {
        let v2c = (0..h.num_edges()).map(|e| llr[h.edge_var(e)]).collect();
        Self {
            v2c,
            c2v: vec![0.0; h.num_edges()],
            beliefs: llr.to_vec(),
        }
    }
}

/// Decodes `llr` and also returns the final message state.
pub fn decode_bp_with_state(
    h: &ParityCheckMatrix,
    llr: &[f64],
    cfg: &BpConfig,
) -> Result<(DecodeResult, MessageState)> {
    cfg.validate()?;
    check_len("LLR word", h.n(), llr.len())?;
    let llr: Vec<f64> = llr
        .iter()
        .map(|l| l.clamp(-cfg.llr_clamp, cfg.llr_clamp))
        .collect();
    let clamp = cfg.message_clamp;
    let mut state = MessageState::new(h, &llr);
    let mut bits = vec![0u8; h.n()];
    let mut scratch = Vec::new();
    let mut iterations = 0;
    let mut parity_errors = usize::MAX;

    while iterations < cfg.max_iters {
        iterations += 1;
        for c in 0..h.m() {
            let edges = h.check_edges(c);
            let (inputs, out) = (&state.v2c[edges.clone()], &mut state.c2v[edges]);
            match cfg.variant {
                BpVariant::SumProduct => sumproduct_extrinsic(inputs, out, &mut scratch),
                BpVariant::MinSum => minsum_extrinsic(inputs, out),
            }
            for u in out.iter_mut() {
                *u = u.clamp(-clamp, clamp);
            }
        }
        for v in 0..h.n() {
            let edges = h.var_edges(v);
            let total = llr[v] + edges.iter().map(|&e| state.c2v[e]).sum::<f64>();
            for &e in edges {
                state.v2c[e] = (total - state.c2v[e]).clamp(-clamp, clamp);
            }
            state.beliefs[v] = total.clamp(-clamp, clamp);
        }
        hard_decide_into(&state.beliefs, &mut bits);
        parity_errors = h.parity_errors(&bits);
        if parity_errors == 0 && cfg.early_stop {
            break;
        }
    }

    let result = DecodeResult {
        bits,
        beliefs: state.beliefs.clone(),
        steps_used: iterations,
        syndrome_zero: parity_errors == 0,
        parity_errors,
    };
    Ok((result, state))
}

pub fn decode_bp(h: &ParityCheckMatrix, llr: &LlrWord, cfg: &BpConfig) -> Result<DecodeResult> {
    decode_bp_with_state(h, &llr.values, cfg).map(|(r, _)| r)
}

/// Classical BP as a [`Decoder`].
#[derive(Debug, Clone)]
pub struct BpDecoder {
    h: ParityCheckMatrix,
    cfg: BpConfig,
}

impl BpDecoder {
    pub fn new(h: ParityCheckMatrix, cfg: BpConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { h, cfg })
    }
}

impl Decoder for BpDecoder {
    fn id(&self) -> String {
        match self.cfg.variant {
            BpVariant::SumProduct => format!("bp{}", self.cfg.max_iters),
            BpVariant::MinSum => format!("minsum{}", self.cfg.max_iters),
        }
    }

    fn decode(&self, llr: &LlrWord) -> Result<DecodeResult> {
        decode_bp(&self.h, llr, &self.cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
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

    #[test]
    fn sumproduct_check_values() {
        assert_eq!(check_update_sumproduct(&[0.0, 3.0, -2.0]), 0.0);
        // mpmath: 2·atanh(tanh(1)·tanh(-0.5)) = -0.73532566405...
        assert!((check_update_sumproduct(&[2.0, -1.0]) + 0.735_325_664_055).abs() < 1e-11);
        for a in [-7.5, -0.3, 0.01, 4.0] {
            assert!((check_update_sumproduct(&[a]) - a).abs() < 1e-9);
        }
        assert!(check_update_sumproduct(&[1e9, 1e9]).is_finite());
    }

    #[test]
    fn minsum_check_values() {
        assert_eq!(check_update_minsum(&[2.0, -1.0]), -1.0);
        assert_eq!(check_update_minsum(&[0.0, 5.0]), 0.0);
        assert_eq!(check_update_minsum(&[3.0]), 3.0);
        assert_eq!(check_update_minsum(&[-0.0, -2.0]), -0.0);
    }

    #[test]
    fn extrinsic_helpers_match_scalar_rules() {
        let mut rng = stream_rng(1, 0);
        let mut scratch = Vec::new();
        for d in 2..9 {
            let inputs: Vec<f64> = (0..d).map(|_| rng.random_range(-6.0..6.0)).collect();
            let mut sp = vec![0.0; d];
            let mut ms = vec![0.0; d];
            sumproduct_extrinsic(&inputs, &mut sp, &mut scratch);
            minsum_extrinsic(&inputs, &mut ms);
            for j in 0..d {
                let others: Vec<f64> = inputs
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, &u)| u)
                    .collect();
                assert!((sp[j] - check_update_sumproduct(&others)).abs() < 1e-9);
                assert_eq!(ms[j], check_update_minsum(&others));
            }
        }
    }

    #[test]
    fn variable_rules() {
        assert_eq!(variable_update(0.7, &[], 0), 0.7);
        assert_eq!(variable_update(1.0, &[2.0, -3.0], 0), -2.0);
        let incoming = [0.4, -1.1, 2.5];
        for j in 0..3 {
            let s = belief(0.3, &incoming);
            assert!((s - variable_update(0.3, &incoming, j) - incoming[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_input_exits_after_one_iteration() {
        let h = hamming();
        let g = GeneratorMatrix::from_parity_check(&h).unwrap();
        let x = g.encode(&[1, 0, 1, 1]).unwrap();
        let l: Vec<f64> = bipolar(&x).iter().map(|s| 20.0 * s).collect();
        let r = decode_bp(&h, &LlrWord::new(l, 0.0), &BpConfig::default()).unwrap();
        assert_eq!(r.steps_used, 1);
        assert!(r.syndrome_zero);
        assert_eq!(r.bits, x);
    }

    #[test]
    fn repetition_code_follows_stronger_belief() {
        // single degree-2 check x0 = x1; hand simulation:
        // it 1: c2v = [-3, +1], beliefs [1-3, -3+1] = [-2, -2] -> both bit 1
        let h = ParityCheckMatrix::from_check_lists(3, vec![vec![0, 1]]).unwrap();
        let l = LlrWord::new(vec![1.0, -3.0, 2.0], 0.0);
        let cfg = BpConfig {
            max_iters: 2,
            ..BpConfig::default()
        };
        let (r, st) = decode_bp_with_state(&h, &l.values, &cfg).unwrap();
        assert_eq!(r.bits, vec![1, 1, 0]);
        assert!((st.beliefs[0] + 2.0).abs() < 1e-9);
        assert!((st.beliefs[1] + 2.0).abs() < 1e-9);
        assert_eq!(r.steps_used, 1);
    }

    #[test]
    fn extrinsic_identity_holds_per_edge() {
        let h = hamming();
        let mut rng = stream_rng(3, 1);
        for iters in 1..4 {
            let l: Vec<f64> = (0..7).map(|_| rng.random_range(-2.0..2.0)).collect();
            let cfg = BpConfig {
                max_iters: iters,
                ..BpConfig::default()
            };
            let (_, st) = decode_bp_with_state(&h, &l, &cfg).unwrap();
            for e in 0..h.num_edges() {
                let v = h.edge_var(e);
                assert!((st.beliefs[v] - st.v2c[e] - st.c2v[e]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn early_exit_only_on_valid_codewords() {
        let h = hamming();
        let g = GeneratorMatrix::from_parity_check(&h).unwrap();
        let params = ChannelParams::new(1.0, 4, 7).unwrap();
        let mut rng = stream_rng(9, 0);
        for _ in 0..200 {
            let msg: Vec<u8> = (0..4).map(|_| rng.random_range(0..2)).collect();
            let x = g.encode(&msg).unwrap();
            let y = transmit(&bipolar(&x), params.w, &mut rng);
            let r = decode_bp(&h, &to_llr(&y, &params), &BpConfig::default()).unwrap();
            assert_eq!(r.syndrome_zero, h.syndrome(&r.bits).unwrap().is_zero());
            assert_eq!(r.syndrome_zero, r.parity_errors == 0);
        }
    }

    #[test]
    fn minsum_and_sumproduct_agree_at_high_snr() {
        let h = hamming();
        let g = GeneratorMatrix::from_parity_check(&h).unwrap();
        let mut rng = stream_rng(21, 0);
        let params = ChannelParams::new(8.0, 4, 7).unwrap();
        let trials = 500;
        let mut agree = 0;
        for _ in 0..trials {
            let msg: Vec<u8> = (0..4).map(|_| rng.random_range(0..2)).collect();
            let x = bipolar(&g.encode(&msg).unwrap());
            let y = transmit(&x, params.w, &mut rng);
            let l = to_llr(&y, &params).values;
            let sp = decode_bp_with_state(&h, &l, &BpConfig::default()).unwrap().0;
            let ms_cfg = BpConfig {
                variant: BpVariant::MinSum,
                ..BpConfig::default()
            };
            let ms = decode_bp_with_state(&h, &l, &ms_cfg).unwrap().0;
            agree += usize::from(sp.bits == ms.bits);
        }
        assert!(agree * 100 >= trials * 99, "agreement {agree}/{trials}");
    }

    #[test]
    fn rejects_bad_input() {
        let h = hamming();
        assert!(decode_bp_with_state(&h, &[0.0; 6], &BpConfig::default()).is_err());
        let cfg = BpConfig {
            max_iters: 0,
            ..BpConfig::default()
        };
        assert!(decode_bp_with_state(&h, &[0.0; 7], &cfg).is_err());
    }
}
