//! The AWGN channel seen as a variational diffusion process in LLR space.
//!
//! A channel at CSNR `s` turns a bipolar codeword `x` into LLRs distributed as
//! `N(α_s·x, σ_s²·I)` with `α_s = 2/w_s²` and `σ_s = 2/w_s`. A schedule is a
//! list of CSNR levels in forward (noising) order, so levels decrease with the
//! index. Index 0 is the cleanest level; the last index is the physical
//! channel the decoder observes.

use crate::channel::{noise_scale_for_rate, LlrWord};
use crate::error::{Error, Result};

/// Default number of reverse timesteps.
pub const DEFAULT_STEPS: usize = 20;
/// Default CSNR gap between adjacent levels, in dB.
pub const DEFAULT_STEP_DB: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSchedule {
    levels_db: Vec<f64>,
    noise: Vec<f64>,
    rate: f64,
}

/// Parameters of `q(z_t | z_s)` for a later (noisier) index `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionParams {
    /// `α_t / α_s = w_s² / w_t²`.
    pub alpha_ratio: f64,
    /// `σ_t² − (α_t/α_s)²·σ_s²`.
    pub variance: f64,
}

impl DiffusionSchedule {
    /// `steps` levels spaced `step_db` apart, ending at `observed_csnr_db`.
    pub fn build(observed_csnr_db: f64, steps: usize, step_db: f64, rate: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Schedule("at least one timestep is required".into()));
        }
        if !(step_db > 0.0 && step_db.is_finite()) {
            return Err(Error::Schedule(format!("step {step_db} dB must be positive")));
        }
        let levels = (0..steps)
            .map(|i| observed_csnr_db + (steps - 1 - i) as f64 * step_db)
            .collect();
        Self::from_levels(levels, rate)
    }

    /// Schedule from explicit levels, which must be strictly decreasing.
    pub fn from_levels(levels_db: Vec<f64>, rate: f64) -> Result<Self> {
        if levels_db.is_empty() {
            return Err(Error::Schedule("empty schedule".into()));
        }
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::Schedule(format!("rate {rate} outside (0, 1)")));
        }
        if levels_db.iter().any(|l| !l.is_finite()) {
            return Err(Error::Schedule("non-finite CSNR level".into()));
        }
        if levels_db.windows(2).any(|p| p[1] >= p[0]) {
            return Err(Error::Schedule(
                "CSNR levels must strictly decrease in forward order".into(),
            ));
        }
        let noise = levels_db
            .iter()
            .map(|&s| noise_scale_for_rate(s, rate))
            .collect();
        Ok(Self {
            levels_db,
            noise,
            rate,
        })
    }

    pub fn len(&self) -> usize {
        self.levels_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels_db.is_empty()
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn levels_db(&self) -> &[f64] {
        &self.levels_db
    }

    /// CSNR of the physical channel (last index).
    pub fn observed_db(&self) -> f64 {
        self.levels_db[self.len() - 1]
    }

    /// Noise standard deviation `w` at index `i`.
    pub fn noise(&self, i: usize) -> f64 {
        self.noise[i]
    }

    pub fn alpha(&self, i: usize) -> f64 {
        2.0 / (self.noise[i] * self.noise[i])
    }

    pub fn sigma(&self, i: usize) -> f64 {
        2.0 / self.noise[i]
    }

    /// `α_i² / σ_i² = 1 / w_i²`.
    pub fn vsnr(&self, i: usize) -> f64 {
        let ratio = self.alpha(i) / self.sigma(i);
        ratio * ratio
    }

    /// Forward transition from index `from` to the noisier index `to`.
    pub fn forward_transition(&self, from: usize, to: usize) -> Result<TransitionParams> {
        if from >= self.len() || to >= self.len() {
            return Err(Error::Schedule(format!(
                "index out of range for a {}-level schedule",
                self.len()
            )));
        }
        if to <= from {
            return Err(Error::Schedule(format!(
                "forward transition {from} -> {to} must move to a noisier level"
            )));
        }
        Ok(transition_between(self.noise[from], self.noise[to]))
    }

    /// Deterministic reverse update from index `t` to `t - 1`:
    /// `z_s = z_t + (α_s − α_t)·x̂`.
    pub fn reverse_step(&self, t: usize, z_t: &LlrWord, x_hat: &[f64]) -> Result<LlrWord> {
        let mut z = z_t.clone();
        self.reverse_step_in_place(t, &mut z.values, x_hat)?;
        z.csnr_db = self.levels_db[t - 1];
        Ok(z)
    }

    pub(crate) fn reverse_step_in_place(&self, t: usize, z: &mut [f64], x_hat: &[f64]) -> Result<()> {
        if t == 0 || t >= self.len() {
            return Err(Error::Schedule(format!(
                "reverse step from index {t} leaves a {}-level schedule",
                self.len()
            )));
        }
        crate::codebook::check_len("x_hat", z.len(), x_hat.len())?;
        let gain = self.alpha(t - 1) - self.alpha(t);
        for (zi, &xi) in z.iter_mut().zip(x_hat) {
            *zi += gain * xi;
        }
        Ok(())
    }
}

/// `q(z_t | z_s)` parameters from the two noise scales.
pub fn transition_between(w_s: f64, w_t: f64) -> TransitionParams {
    let alpha_ratio = (w_s * w_s) / (w_t * w_t);
    let sigma_s2 = 4.0 / (w_s * w_s);
    let sigma_t2 = 4.0 / (w_t * w_t);
    TransitionParams {
        alpha_ratio,
        variance: sigma_t2 - alpha_ratio * alpha_ratio * sigma_s2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::noise_scale;
    use proptest::prelude::*;

    #[test]
    fn single_step_schedule() {
        let s = DiffusionSchedule::build(4.0, 1, 0.5, 0.5).unwrap();
        assert_eq!(s.levels_db(), &[4.0]);
        assert_eq!(s.observed_db(), 4.0);
    }

    #[test]
    fn twenty_step_schedule() {
        let rate = 60.0 / 121.0;
        let s = DiffusionSchedule::build(4.0, 20, 0.5, rate).unwrap();
        assert_eq!(s.len(), 20);
        assert_eq!(s.levels_db()[0], 13.5);
        assert_eq!(s.levels_db()[19], 4.0);
        for i in 0..20 {
            let w = noise_scale(s.levels_db()[i], 60, 121).unwrap();
            assert!((s.vsnr(i) - 1.0 / (w * w)).abs() < 1e-9 * s.vsnr(i));
        }
        for i in 1..20 {
            assert!(s.vsnr(i) < s.vsnr(i - 1));
            assert!(s.forward_transition(i - 1, i).unwrap().variance > 0.0);
        }
    }

    #[test]
    fn schedule_errors() {
        assert!(DiffusionSchedule::build(4.0, 0, 0.5, 0.5).is_err());
        assert!(DiffusionSchedule::build(4.0, 3, 0.0, 0.5).is_err());
        assert!(DiffusionSchedule::from_levels(vec![4.0, 4.0], 0.5).is_err());
        assert!(DiffusionSchedule::from_levels(vec![3.0, 4.0], 0.5).is_err());
    }

    #[test]
    fn transition_6_to_4_db() {
        let s = DiffusionSchedule::from_levels(vec![6.0, 4.0], 60.0 / 121.0).unwrap();
        let tp = s.forward_transition(0, 1).unwrap();
        // mpmath: w6²/w4² = 0.630957344480..., variance = 3.677328551597...
        assert!((tp.alpha_ratio - 0.630_957_344_480).abs() < 1e-11);
        assert!((tp.variance - 3.677_328_551_597).abs() < 1e-10);
        assert!(s.forward_transition(1, 1).is_err());
        assert!(s.forward_transition(1, 0).is_err());
    }

    #[test]
    fn reverse_step_values() {
        // N = 1: z_t = 1, w_t = 1, w_s = 0.5, x̂ = 1  ->  1 + (8 − 2)·1 = 7
        let rate = 0.5;
        let s_db = -10.0 * (2.0 * rate * 0.25f64).log10();
        let levels = vec![s_db, 0.0];
        let sched = DiffusionSchedule::from_levels(levels, rate).unwrap();
        assert!((sched.noise(0) - 0.5).abs() < 1e-12);
        assert!((sched.noise(1) - 1.0).abs() < 1e-12);
        let z = sched
            .reverse_step(1, &LlrWord::new(vec![1.0], 0.0), &[1.0])
            .unwrap();
        assert!((z.values[0] - 7.0).abs() < 1e-9);
        assert_eq!(z.csnr_db, s_db);

        let unchanged = sched
            .reverse_step(1, &LlrWord::new(vec![0.3, -2.0], 0.0), &[0.0, 0.0])
            .unwrap();
        assert_eq!(unchanged.values, vec![0.3, -2.0]);
        assert!(sched
            .reverse_step(0, &LlrWord::new(vec![1.0], 0.0), &[1.0])
            .is_err());
    }

    #[test]
    fn reverse_chain_telescopes() {
        let sched = DiffusionSchedule::build(4.0, 20, 0.5, 0.5).unwrap();
        let x_hat = [0.8, -1.0, 0.25];
        let z0 = LlrWord::new(vec![0.1, 0.2, -0.7], 4.0);
        let mut z = z0.clone();
        for t in (1..20).rev() {
            z = sched.reverse_step(t, &z, &x_hat).unwrap();
        }
        let gain = sched.alpha(0) - sched.alpha(19);
        for i in 0..3 {
            assert!((z.values[i] - (z0.values[i] + gain * x_hat[i])).abs() < 1e-9);
        }
        assert_eq!(z.csnr_db, 13.5);
    }

    proptest! {
        #[test]
        fn variance_positive_iff_lower_csnr(
            s in -5.0f64..15.0,
            t in -5.0f64..15.0,
            rate in 0.05f64..0.95,
        ) {
            prop_assume!((s - t).abs() > 1e-6);
            let (ws, wt) = (noise_scale_for_rate(s, rate), noise_scale_for_rate(t, rate));
            let tp = transition_between(ws, wt);
            prop_assert_eq!(tp.variance > 0.0, wt > ws);
            prop_assert_eq!(wt > ws, t < s);
        }
    }
}
