use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::rng::stream;
use crate::{Error, Result};

/// Gaussian window over `t` whose centre moves linearly from 0 to 1 over training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurriculumSampler {
    pub total_steps: u64,
    pub sigma: f64,
    pub floor_t: f64,
}

impl CurriculumSampler {
    pub fn new(total_steps: u64) -> Self {
        CurriculumSampler { total_steps, sigma: 0.15, floor_t: 1e-3 }
    }

    fn check(&self, step: u64) -> Result<Normal<f64>> {
        if self.total_steps == 0 || step > self.total_steps {
            return Err(Error::arg("step", "need 0 <= step <= total_steps with total_steps > 0"));
        }
        if !(self.floor_t > 0.0 && self.floor_t < 1.0) {
            return Err(Error::arg("floor_t", "must lie in (0, 1)"));
        }
        let mean = step as f64 / self.total_steps as f64;
        Normal::new(mean, self.sigma).map_err(|_| Error::arg("sigma", "must be positive and finite"))
    }

    /// Draws `t ~ N(step/total, sigma)` rejected until it lands in `[floor_t, 1]`.
    pub fn sample_with<R: Rng>(&self, step: u64, rng: &mut R) -> Result<f64> {
        let normal = self.check(step)?;
        if !(self.sigma > 0.0) {
            return Err(Error::arg("sigma", "must be positive"));
        }
        for _ in 0..1_000_000 {
            let t = normal.sample(rng);
            if (self.floor_t..=1.0).contains(&t) {
                return Ok(t);
            }
        }
        Err(Error::Numerical("window misses [floor_t, 1]; increase sigma".into()))
    }

    pub fn sample_t(&self, step: u64, seed: u64) -> Result<f64> {
        self.sample_with(step, &mut stream(seed, step))
    }

    /// `n` draws at one step from a single seeded stream.
    pub fn sample_batch(&self, step: u64, n: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = stream(seed, step);
        (0..n).map(|_| self.sample_with(step, &mut rng)).collect()
    }
}
