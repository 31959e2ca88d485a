use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Schedule;
use crate::{Error, Result};

/// A position's current state during reverse sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionState {
    Revealed(u32),
    Masked,
}

/// Distribution over the vocabulary plus the mask state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseDistribution {
    pub mask_prob: f64,
    pub token_probs: Vec<f64>,
}

impl ReverseDistribution {
    pub fn total(&self) -> f64 {
        self.mask_prob + self.token_probs.iter().sum::<f64>()
    }
}

/// One reverse step from noise level `t` to `s_next < t` under the masked kernel.
///
/// Revealed tokens stay fixed. A masked token stays masked with probability
/// `(1 - alpha_s) / (1 - alpha_t)` and is otherwise revealed according to
/// `predictor_dist`.
pub fn reverse_transition(
    schedule: &Schedule,
    t: f64,
    s_next: f64,
    state: PositionState,
    predictor_dist: &[f64],
) -> Result<ReverseDistribution> {
    if !(s_next >= 0.0 && s_next < t && t <= 1.0) {
        return Err(Error::arg("s_next", "need 0 <= s_next < t <= 1"));
    }
    let total: f64 = predictor_dist.iter().sum();
    if predictor_dist.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::arg("predictor_dist", "not a probability distribution"));
    }
    match state {
        PositionState::Revealed(k) => {
            let k = k as usize;
            if k >= predictor_dist.len() {
                return Err(Error::arg("state", "revealed token outside vocabulary"));
            }
            let mut token_probs = vec![0.0; predictor_dist.len()];
            token_probs[k] = 1.0;
            Ok(ReverseDistribution { mask_prob: 0.0, token_probs })
        }
        PositionState::Masked => {
            let a_t = schedule.alpha(t)?;
            let a_s = schedule.alpha(s_next)?;
            let stay = (1.0 - a_s) / (1.0 - a_t);
            let reveal = (a_s - a_t) / (1.0 - a_t);
            Ok(ReverseDistribution { mask_prob: stay, token_probs: predictor_dist.iter().map(|p| reveal * p).collect() })
        }
    }
}
