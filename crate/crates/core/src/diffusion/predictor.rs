use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use super::Kernel;
use crate::{Error, Result};

/// What a predictor knows about the corruption besides the sequence itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseContext {
    pub alpha_t: f64,
    pub kernel: Kernel,
    pub mask_id: u32,
}

/// Distribution over the clean token at one position given a corrupted sequence.
pub trait Predictor {
    fn vocab_size(&self) -> usize;

    /// Must return `vocab_size()` nonnegative entries summing to 1.
    fn predict(&self, corrupted: &[u32], position: usize, ctx: &NoiseContext) -> Vec<f64>;
}

/// Ignores its input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformPredictor {
    pub vocab_size: usize,
}

impl Predictor for UniformPredictor {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn predict(&self, _: &[u32], _: usize, _: &NoiseContext) -> Vec<f64> {
        vec![1.0 / self.vocab_size as f64; self.vocab_size]
    }
}

/// Point mass on the token currently at the position; uniform over a mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopyPredictor {
    pub vocab_size: usize,
}

impl Predictor for CopyPredictor {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn predict(&self, corrupted: &[u32], position: usize, _: &NoiseContext) -> Vec<f64> {
        let tok = corrupted[position] as usize;
        if tok < self.vocab_size {
            let mut p = vec![0.0; self.vocab_size];
            p[tok] = 1.0;
            p
        } else {
            vec![1.0 / self.vocab_size as f64; self.vocab_size]
        }
    }
}

/// A distribution over equal-length token sequences, small enough to enumerate.
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    sequences: Vec<Vec<u32>>,
    probs: Vec<f64>,
    vocab_size: usize,
}

impl Source {
    pub fn new(sequences: Vec<Vec<u32>>, probs: Vec<f64>, vocab_size: usize) -> Result<Self> {
        if sequences.is_empty() || sequences.len() != probs.len() {
            return Err(Error::arg("source", "need one probability per sequence"));
        }
        let len = sequences[0].len();
        if sequences.iter().any(|s| s.len() != len || s.iter().any(|&t| t as usize >= vocab_size)) {
            return Err(Error::arg("source", "sequences must share a length and stay in the vocabulary"));
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::arg("source", "probabilities must be nonnegative and sum to 1"));
        }
        Ok(Source { sequences, probs, vocab_size })
    }

    /// Length-`len` sequences of i.i.d. tokens drawn from `token_probs`.
    pub fn iid(token_probs: &[f64], len: usize) -> Result<Self> {
        let v = token_probs.len();
        let count = v.checked_pow(len as u32).filter(|c| *c <= 1 << 20);
        let Some(count) = count else {
            return Err(Error::arg("source", "too many sequences to enumerate"));
        };
        let mut sequences = Vec::with_capacity(count);
        let mut probs = Vec::with_capacity(count);
        for mut idx in 0..count {
            let mut seq = vec![0u32; len];
            let mut p = 1.0;
            for slot in seq.iter_mut().rev() {
                *slot = (idx % v) as u32;
                p *= token_probs[idx % v];
                idx /= v;
            }
            sequences.push(seq);
            probs.push(p);
        }
        Source::new(sequences, probs, v)
    }

    pub fn sequences(&self) -> &[Vec<u32>] {
        &self.sequences
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn seq_len(&self) -> usize {
        self.sequences[0].len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Entropy in nats per token.
    pub fn entropy_per_token(&self) -> f64 {
        let h: f64 = self.probs.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum();
        h / self.seq_len() as f64
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<u32> {
        let mut u: f64 = rng.random();
        for (s, p) in self.sequences.iter().zip(&self.probs) {
            if u < *p {
                return s.clone();
            }
            u -= p;
        }
        self.sequences[self.sequences.len() - 1].clone()
    }
}

/// Exact posterior of the clean token given the corrupted sequence under a
/// known [`Source`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPosterior {
    pub source: Source,
}

impl Predictor for ExactPosterior {
    fn vocab_size(&self) -> usize {
        self.source.vocab_size
    }

    fn predict(&self, corrupted: &[u32], position: usize, ctx: &NoiseContext) -> Vec<f64> {
        let v = self.source.vocab_size;
        let mut post = vec![0.0; v];
        for (seq, &p) in self.source.sequences.iter().zip(&self.source.probs) {
            let mut lik = p;
            for (&x0, &xt) in seq.iter().zip(corrupted) {
                lik *= match ctx.kernel {
                    // Every consistent sequence shares the same alpha factors.
                    Kernel::Masked => f64::from(u8::from(xt == ctx.mask_id || xt == x0)),
                    Kernel::Uniform => {
                        let redraw = (1.0 - ctx.alpha_t) / v as f64;
                        if xt == x0 {
                            ctx.alpha_t + redraw
                        } else {
                            redraw
                        }
                    }
                };
            }
            post[seq[position] as usize] += lik;
        }
        let z: f64 = post.iter().sum();
        if z > 0.0 {
            post.iter_mut().for_each(|p| *p /= z);
            post
        } else {
            vec![1.0 / v as f64; v]
        }
    }
}

/// Bigram counts with add-`k` smoothing, trained on a corpus. Falls back to
/// smoothed unigram counts when the left neighbour is missing or masked.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramPredictor {
    vocab_size: usize,
    unigram: Vec<f64>,
    bigram: Vec<Vec<f64>>,
    add_k: f64,
}

impl NgramPredictor {
    pub fn train(corpus: &[Vec<u32>], vocab_size: usize, add_k: f64) -> Result<Self> {
        if vocab_size == 0 || !(add_k > 0.0) {
            return Err(Error::arg("ngram", "need vocab_size > 0 and add_k > 0"));
        }
        let mut unigram = vec![0.0; vocab_size];
        let mut bigram = vec![vec![0.0; vocab_size]; vocab_size];
        for seq in corpus {
            for (i, &tok) in seq.iter().enumerate() {
                let t = tok as usize;
                if t >= vocab_size {
                    return Err(Error::arg("corpus", alloc::format!("token {tok} outside vocabulary")));
                }
                unigram[t] += 1.0;
                if i > 0 {
                    bigram[seq[i - 1] as usize][t] += 1.0;
                }
            }
        }
        Ok(NgramPredictor { vocab_size, unigram, bigram, add_k })
    }

    fn smoothed(&self, counts: &[f64]) -> Vec<f64> {
        let z: f64 = counts.iter().sum::<f64>() + self.add_k * self.vocab_size as f64;
        counts.iter().map(|c| (c + self.add_k) / z).collect()
    }
}

impl Predictor for NgramPredictor {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn predict(&self, corrupted: &[u32], position: usize, _: &NoiseContext) -> Vec<f64> {
        match position.checked_sub(1).map(|i| corrupted[i] as usize) {
            Some(prev) if prev < self.vocab_size => self.smoothed(&self.bigram[prev]),
            _ => self.smoothed(&self.unigram),
        }
    }
}
