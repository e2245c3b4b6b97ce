//! BPSK over AWGN and the conversion of received samples to LLRs.
//!
//! Random draws come from [`ChaCha8Rng`] streams. Standard normal samples use
//! the `rand_distr` Ziggurat sampler, so a `(seed, stream)` pair reproduces
//! the same noise on every run of a given build.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Magnitude bound applied to every channel LLR.
pub const LLR_CLAMP: f64 = 1e9;

/// Noise standard deviation for a code of rate `k/n` at `csnr_db`:
/// `w = 1 / sqrt(2 · (k/n) · 10^(csnr/10))`.
pub fn noise_scale(csnr_db: f64, k: usize, n: usize) -> Result<f64> {
    if k == 0 || n <= k {
        return Err(Error::InvalidParameter(format!(
            "need n > k > 0, got n = {n}, k = {k}"
        )));
    }
    if !csnr_db.is_finite() {
        return Err(Error::InvalidParameter(format!("CSNR {csnr_db} dB is not finite")));
    }
    Ok(noise_scale_for_rate(csnr_db, k as f64 / n as f64))
}

pub(crate) fn noise_scale_for_rate(csnr_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(csnr_db / 10.0)).sqrt()
}

/// Channel operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub csnr_db: f64,
    pub rate: f64,
    /// Noise standard deviation.
    pub w: f64,
}

impl ChannelParams {
    pub fn new(csnr_db: f64, k: usize, n: usize) -> Result<Self> {
        let w = noise_scale(csnr_db, k, n)?;
        Ok(Self {
            csnr_db,
            rate: k as f64 / n as f64,
            w,
        })
    }

    /// Operating point with an explicit noise scale, bypassing the CSNR formula.
    pub fn with_noise(csnr_db: f64, rate: f64, w: f64) -> Result<Self> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise scale {w} must be positive")));
        }
        Ok(Self { csnr_db, rate, w })
    }
}

/// Channel LLRs of one received word, tagged with the CSNR they refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrWord {
    pub values: Vec<f64>,
    pub csnr_db: f64,
}

impl LlrWord {
    pub fn new(values: Vec<f64>, csnr_db: f64) -> Self {
        Self { values, csnr_db }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// RNG for worker/stream `stream` of a seeded run.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `y = x + w·ξ`, `ξ ~ N(0, I)`.
pub fn transmit<R: Rng + ?Sized>(x: &[f64], w: f64, rng: &mut R) -> Vec<f64> {
    x.iter()
        .map(|&xi| {
            let xi_noise: f64 = rng.sample(StandardNormal);
            xi + w * xi_noise
        })
        .collect()
}

/// `l = 2y / w²`, clamped to `±LLR_CLAMP`.
pub fn to_llr(y: &[f64], params: &ChannelParams) -> LlrWord {
    let scale = 2.0 / (params.w * params.w);
    let values = y
        .iter()
        .map(|&yi| (scale * yi).clamp(-LLR_CLAMP, LLR_CLAMP))
        .collect();
    LlrWord::new(values, params.csnr_db)
}

/// Sign decision: positive LLR means bit 0; zero also maps to bit 0.
pub fn hard_decide(llr: &[f64]) -> Vec<u8> {
    llr.iter().map(|&l| u8::from(l < 0.0)).collect()
}

pub(crate) fn hard_decide_into(llr: &[f64], out: &mut [u8]) {
    for (b, &l) in out.iter_mut().zip(llr) {
        *b = u8::from(l < 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::bipolar;
    use proptest::prelude::*;

    #[test]
    fn noise_scale_values() {
        assert!((noise_scale(0.0, 1, 2).unwrap() - 1.0).abs() < 1e-15);
        // extended-precision oracle (mpmath, 30 digits):
        // w(4 dB) = 0.633580879..., w(6 dB) = 0.503271181...
        assert!((noise_scale(4.0, 60, 121).unwrap() - 0.633_580_879).abs() < 1e-8);
        assert!((noise_scale(6.0, 60, 121).unwrap() - 0.503_271_181).abs() < 1e-8);
        assert!(noise_scale(4.0, 0, 10).is_err());
        assert!(noise_scale(4.0, 10, 10).is_err());
        assert!(noise_scale(4.0, 12, 10).is_err());
    }

    #[test]
    fn transmit_vanishing_noise_is_identity() {
        let x = bipolar(&[0, 1, 1, 0, 1]);
        let y = transmit(&x, 1e-12, &mut stream_rng(7, 0));
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn transmit_noise_moments() {
        let n = 1_000_000;
        let x = vec![1.0; n];
        let w = 0.5;
        let y = transmit(&x, w, &mut stream_rng(11, 3));
        let d: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let mean = d.iter().sum::<f64>() / n as f64;
        let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // mean of (y-x)/w within 5 standard errors
        assert!((mean / w).abs() < 5.0 / 1000.0);
        assert!((var - 0.25).abs() < 0.0025);
    }

    #[test]
    fn transmit_is_seeded() {
        let x = vec![1.0; 64];
        let a = transmit(&x, 0.7, &mut stream_rng(5, 2));
        let b = transmit(&x, 0.7, &mut stream_rng(5, 2));
        let c = transmit(&x, 0.7, &mut stream_rng(5, 3));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn llr_values() {
        let p = |w| ChannelParams::with_noise(0.0, 0.5, w).unwrap();
        assert_eq!(to_llr(&[0.0], &p(1.0)).values, vec![0.0]);
        assert!((to_llr(&[1.0], &p(2f64.sqrt())).values[0] - 1.0).abs() < 1e-15);
        // 2 * 0.5 / 0.6336^2 = 2.4909767...
        assert!((to_llr(&[0.5], &p(0.6336)).values[0] - 2.490_976_7).abs() < 1e-6);
        assert_eq!(to_llr(&[1e300], &p(1.0)).values[0], LLR_CLAMP);
    }

    #[test]
    fn hard_decisions() {
        assert_eq!(hard_decide(&[3.2, -0.1]), vec![0, 1]);
        assert_eq!(hard_decide(&[0.0]), vec![0]);
        let bits = [1u8, 0, 0, 1, 1];
        let l: Vec<f64> = bipolar(&bits).iter().map(|s| s * 1e6).collect();
        assert_eq!(hard_decide(&l), bits);
    }

    proptest! {
        #[test]
        fn noise_scale_decreases_with_csnr(
            s1 in -10.0f64..20.0,
            gap in 0.001f64..10.0,
            k in 1usize..200,
            extra in 1usize..200,
        ) {
            let n = k + extra;
            prop_assert!(noise_scale(s1, k, n).unwrap() > noise_scale(s1 + gap, k, n).unwrap());
        }

        #[test]
        fn bipolar_then_sign_round_trips(bits in proptest::collection::vec(0u8..2, 1..64)) {
            prop_assert_eq!(hard_decide(&bipolar(&bits)), bits);
        }
    }
}
