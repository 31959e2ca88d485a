use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Kernel, Schedule};
use crate::rng::stream;
use crate::{Error, Result};

/// Noise level for a batch: one `t` for all sequences or one per sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseLevel {
    Shared(f64),
    PerSequence(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptedBatch {
    pub original: Vec<Vec<u32>>,
    pub corrupted: Vec<Vec<u32>>,
    /// Which positions the forward process touched. Under the uniform kernel
    /// a touched position may have been redrawn to its own value.
    pub noised: Vec<Vec<bool>>,
    pub t_values: Vec<f64>,
    pub mask_id: u32,
    pub kernel: Kernel,
    pub vocab_size: u32,
}

impl CorruptedBatch {
    pub fn noised_fraction(&self) -> f64 {
        let total: usize = self.noised.iter().map(Vec::len).sum();
        let hit: usize = self.noised.iter().map(|r| r.iter().filter(|b| **b).count()).sum();
        if total == 0 {
            0.0
        } else {
            hit as f64 / total as f64
        }
    }
}

pub(crate) fn check_tokens(seq: &[u32], kernel: Kernel, vocab_size: u32, mask_id: u32) -> Result<()> {
    for &tok in seq {
        if kernel == Kernel::Masked && tok == mask_id {
            return Err(Error::MaskCollision { mask_id });
        }
        if tok >= vocab_size {
            return Err(Error::arg("batch", alloc::format!("token {tok} outside vocabulary of {vocab_size}")));
        }
    }
    Ok(())
}

/// Keeps each token with probability `alpha`, otherwise masks or redraws it.
pub(crate) fn corrupt_sequence<R: Rng>(
    seq: &[u32],
    alpha: f64,
    kernel: Kernel,
    vocab_size: u32,
    mask_id: u32,
    rng: &mut R,
) -> (Vec<u32>, Vec<bool>) {
    let mut out = Vec::with_capacity(seq.len());
    let mut noised = Vec::with_capacity(seq.len());
    for &tok in seq {
        let keep = rng.random::<f64>() < alpha;
        noised.push(!keep);
        out.push(match (keep, kernel) {
            (true, _) => tok,
            (false, Kernel::Masked) => mask_id,
            (false, Kernel::Uniform) => rng.random_range(0..vocab_size),
        });
    }
    (out, noised)
}

/// Corrupts every sequence independently at its noise level. Sequence `i`
/// draws from its own stream derived from `(seed, i)`.
pub fn forward_corrupt(
    batch: &[Vec<u32>],
    t: &NoiseLevel,
    schedule: &Schedule,
    kernel: Kernel,
    vocab_size: u32,
    mask_id: u32,
    seed: u64,
) -> Result<CorruptedBatch> {
    if kernel == Kernel::Uniform && vocab_size < 2 {
        return Err(Error::arg("vocab_size", "uniform kernel needs at least 2 tokens"));
    }
    let t_values = match t {
        NoiseLevel::Shared(t) => alloc::vec![*t; batch.len()],
        NoiseLevel::PerSequence(ts) if ts.len() == batch.len() => ts.clone(),
        NoiseLevel::PerSequence(ts) => {
            return Err(Error::arg("t", alloc::format!("{} noise levels for {} sequences", ts.len(), batch.len())));
        }
    };
    let mut corrupted = Vec::with_capacity(batch.len());
    let mut noised = Vec::with_capacity(batch.len());
    for (i, (seq, &ti)) in batch.iter().zip(&t_values).enumerate() {
        check_tokens(seq, kernel, vocab_size, mask_id)?;
        let alpha = schedule.alpha(ti)?;
        let (c, n) = corrupt_sequence(seq, alpha, kernel, vocab_size, mask_id, &mut stream(seed, i as u64));
        corrupted.push(c);
        noised.push(n);
    }
    Ok(CorruptedBatch { original: batch.to_vec(), corrupted, noised, t_values, mask_id, kernel, vocab_size })
}
