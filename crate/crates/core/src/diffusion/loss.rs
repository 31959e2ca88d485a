use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::corrupt::{check_tokens, corrupt_sequence};
use super::{Kernel, NoiseContext, Predictor, Schedule};
use crate::rng::stream;
use crate::{Error, Result};

/// Lower end of the sampled noise levels; the ELBO weight diverges at 0.
pub const T_EPSILON: f64 = 1e-3;
/// Probabilities below this are clamped before taking logs.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeSampling {
    /// `t ~ U(eps, 1)` per replicate.
    Uniform { eps: f64 },
    Fixed(f64),
}

impl Default for TimeSampling {
    fn default() -> Self {
        TimeSampling::Uniform { eps: T_EPSILON }
    }
}

/// How clean-position losses are pooled under the uniform kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CleanAveraging {
    /// Total clean NLL over total clean positions.
    #[default]
    PerPosition,
    /// Mean over replicates of each replicate's clean-position mean.
    PerSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub samples: usize,
    pub seed: u64,
    pub time: TimeSampling,
    /// Defaults to the predictor's vocabulary size.
    pub mask_id: Option<u32>,
    pub clean_averaging: CleanAveraging,
}

impl McOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        McOptions { samples, seed, time: TimeSampling::default(), mask_id: None, clean_averaging: CleanAveraging::default() }
    }

    pub fn at(mut self, t: f64) -> Self {
        self.time = TimeSampling::Fixed(t);
        self
    }
}

/// Monte Carlo estimate in nats per token.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Predicted probabilities of the true token that hit [`LOG_FLOOR`].
    pub floor_hits: usize,
}

fn estimate(values: &[f64], floor_hits: usize) -> LossEstimate {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    LossEstimate { mean, std_error: (var / n as f64).sqrt(), samples: n, floor_hits }
}

struct Setup<'a, P: ?Sized> {
    data: &'a [Vec<u32>],
    predictor: &'a P,
    schedule: &'a Schedule,
    opts: &'a McOptions,
    kernel: Kernel,
    vocab: u32,
    mask_id: u32,
}

impl<'a, P: Predictor + ?Sized> Setup<'a, P> {
    fn new(
        data: &'a [Vec<u32>],
        predictor: &'a P,
        schedule: &'a Schedule,
        opts: &'a McOptions,
        kernel: Kernel,
    ) -> Result<Self> {
        if opts.samples == 0 {
            return Err(Error::arg("mc_samples", "need at least one sample"));
        }
        if data.is_empty() || data.iter().any(Vec::is_empty) {
            return Err(Error::arg("data", "need nonempty sequences"));
        }
        match opts.time {
            TimeSampling::Uniform { eps } if !(eps > 0.0 && eps < 1.0) => {
                return Err(Error::arg("eps", "must lie in (0, 1)"));
            }
            TimeSampling::Fixed(t) if !(0.0..=1.0).contains(&t) => {
                return Err(Error::arg("t", "must lie in [0, 1]"));
            }
            _ => {}
        }
        let vocab = predictor.vocab_size() as u32;
        let mask_id = opts.mask_id.unwrap_or(vocab);
        for seq in data {
            check_tokens(seq, kernel, vocab, mask_id)?;
        }
        Ok(Setup { data, predictor, schedule, opts, kernel, vocab, mask_id })
    }

    fn draw_t(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.opts.time {
            TimeSampling::Uniform { eps } => rng.random_range(eps..1.0),
            TimeSampling::Fixed(t) => t,
        }
    }

    /// Sequence, noise level, corrupted copy and noised flags for one replicate.
    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Draw<'a>> {
        let seq = &self.data[rng.random_range(0..self.data.len())];
        let t = self.draw_t(rng);
        let alpha_t = self.schedule.alpha(t)?;
        let (corrupted, noised) = corrupt_sequence(seq, alpha_t, self.kernel, self.vocab, self.mask_id, rng);
        Ok(Draw { seq, t, alpha_t, corrupted, noised })
    }

    fn nll(&self, d: &Draw<'_>, position: usize, floor_hits: &mut usize) -> f64 {
        let ctx = NoiseContext { alpha_t: d.alpha_t, kernel: self.kernel, mask_id: self.mask_id };
        let p = self.predictor.predict(&d.corrupted, position, &ctx)[d.seq[position] as usize];
        if p < LOG_FLOOR {
            *floor_hits += 1;
        }
        -p.max(LOG_FLOOR).ln()
    }
}

struct Draw<'a> {
    seq: &'a [u32],
    t: f64,
    alpha_t: f64,
    corrupted: Vec<u32>,
    noised: Vec<bool>,
}

/// Weighted masked cross-entropy: `w(t) * sum over masked positions of -log p`,
/// divided by sequence length and averaged over replicates.
pub fn elbo_loss<P: Predictor + ?Sized>(
    data: &[Vec<u32>],
    predictor: &P,
    schedule: &Schedule,
    opts: &McOptions,
) -> Result<LossEstimate> {
    let s = Setup::new(data, predictor, schedule, opts, Kernel::Masked)?;
    let mut floor_hits = 0;
    let mut values = Vec::with_capacity(opts.samples);
    for r in 0..opts.samples {
        let mut rng = stream(opts.seed, r as u64);
        let d = s.draw(&mut rng)?;
        let mut sum = 0.0;
        for j in (0..d.seq.len()).filter(|&j| d.noised[j]) {
            sum += s.nll(&d, j, &mut floor_hits);
        }
        let v = if sum > 0.0 { schedule.weight(d.t)? * sum } else { 0.0 };
        values.push(v / d.seq.len() as f64);
    }
    Ok(estimate(&values, floor_hits))
}

/// Unweighted mean of `-log p` over masked positions. Replicates that mask
/// nothing are redrawn.
pub fn maskgit_loss<P: Predictor + ?Sized>(
    data: &[Vec<u32>],
    predictor: &P,
    schedule: &Schedule,
    opts: &McOptions,
) -> Result<LossEstimate> {
    const MAX_REDRAWS: usize = 10_000;
    let s = Setup::new(data, predictor, schedule, opts, Kernel::Masked)?;
    let mut floor_hits = 0;
    let mut values = Vec::with_capacity(opts.samples);
    for r in 0..opts.samples {
        let mut rng = stream(opts.seed, r as u64);
        let mut drawn = None;
        for _ in 0..MAX_REDRAWS {
            let d = s.draw(&mut rng)?;
            if d.noised.iter().any(|b| *b) {
                drawn = Some(d);
                break;
            }
        }
        let d = drawn.ok_or_else(|| Error::Numerical("no masked positions after repeated redraws".into()))?;
        let masked: Vec<usize> = (0..d.seq.len()).filter(|&j| d.noised[j]).collect();
        let sum: f64 = masked.iter().map(|&j| s.nll(&d, j, &mut floor_hits)).sum();
        values.push(sum / masked.len() as f64);
    }
    Ok(estimate(&values, floor_hits))
}

/// Noisy and clean position losses under the uniform kernel, reported apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformKernelLoss {
    /// ELBO-weighted loss over redrawn positions.
    pub noisy: LossEstimate,
    /// Plain NLL over untouched positions.
    pub clean: LossEstimate,
}

/// Uniform-kernel training loss: noisy positions weighted as in [`elbo_loss`],
/// clean positions averaged without weights.
pub fn uniform_kernel_loss<P: Predictor + ?Sized>(
    data: &[Vec<u32>],
    predictor: &P,
    schedule: &Schedule,
    opts: &McOptions,
) -> Result<UniformKernelLoss> {
    let s = Setup::new(data, predictor, schedule, opts, Kernel::Uniform)?;
    if s.vocab < 2 {
        return Err(Error::arg("vocab_size", "uniform kernel needs at least 2 tokens"));
    }
    let mut floor_noisy = 0;
    let mut floor_clean = 0;
    let mut noisy = Vec::with_capacity(opts.samples);
    let mut clean_sums = Vec::with_capacity(opts.samples);
    let mut clean_counts = Vec::with_capacity(opts.samples);
    for r in 0..opts.samples {
        let mut rng = stream(opts.seed, r as u64);
        let d = s.draw(&mut rng)?;
        let (mut ns, mut cs, mut cc) = (0.0, 0.0, 0usize);
        let mut any_noisy = false;
        for j in 0..d.seq.len() {
            if d.noised[j] {
                any_noisy = true;
                ns += s.nll(&d, j, &mut floor_noisy);
            } else {
                cs += s.nll(&d, j, &mut floor_clean);
                cc += 1;
            }
        }
        let w = if any_noisy { schedule.weight(d.t)? } else { 0.0 };
        noisy.push(w * ns / d.seq.len() as f64);
        clean_sums.push(cs);
        clean_counts.push(cc);
    }
    let clean = match opts.clean_averaging {
        CleanAveraging::PerSequence => {
            let per: Vec<f64> =
                clean_sums.iter().zip(&clean_counts).filter(|(_, c)| **c > 0).map(|(s, c)| s / *c as f64).collect();
            if per.is_empty() {
                LossEstimate { mean: f64::NAN, std_error: f64::NAN, samples: 0, floor_hits: floor_clean }
            } else {
                estimate(&per, floor_clean)
            }
        }
        CleanAveraging::PerPosition => ratio_estimate(&clean_sums, &clean_counts, floor_clean),
    };
    Ok(UniformKernelLoss { noisy: estimate(&noisy, floor_noisy), clean })
}

/// `sum(x) / sum(n)` with a delta-method standard error.
fn ratio_estimate(sums: &[f64], counts: &[usize], floor_hits: usize) -> LossEstimate {
    let k = sums.len() as f64;
    let total: usize = counts.iter().sum();
    if total == 0 {
        return LossEstimate { mean: f64::NAN, std_error: f64::NAN, samples: 0, floor_hits };
    }
    let mean = sums.iter().sum::<f64>() / total as f64;
    let nbar = total as f64 / k;
    let var = if k > 1.0 {
        sums.iter().zip(counts).map(|(s, c)| (s - mean * *c as f64).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    LossEstimate { mean, std_error: (var / k).sqrt() / nbar, samples: total, floor_hits }
}
