use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::fmt;
use core::str::FromStr;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result};

/// Probability `alpha(t)` that a token is still clean at noise level `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// `1 - t`
    Linear,
    /// `1 - t^2`
    Poly2,
    /// `1 - cos(pi/2 (1 - t))`
    Cosine,
    Tabulated(Tabulated),
}

/// Piecewise-linear schedule through `(t, alpha)` knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    ts: Vec<f64>,
    alphas: Vec<f64>,
}

impl Tabulated {
    /// Knots must start at `(0, 1)`, end at `(1, 0)`, with `t` strictly
    /// increasing and `alpha` strictly decreasing.
    pub fn new(ts: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if ts.len() != alphas.len() || ts.len() < 2 {
            return Err(Error::arg("schedule", "need at least two (t, alpha) knots"));
        }
        let n = ts.len();
        if ts[0] != 0.0 || ts[n - 1] != 1.0 || alphas[0] != 1.0 || alphas[n - 1] != 0.0 {
            return Err(Error::arg("schedule", "knots must run from (0, 1) to (1, 0)"));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) || alphas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::arg("schedule", "t must increase and alpha decrease strictly"));
        }
        Ok(Tabulated { ts, alphas })
    }

    fn segment(&self, t: f64) -> usize {
        // Index of the segment [ts[i], ts[i+1]] holding t; the last one includes t = 1.
        let i = self.ts.partition_point(|&x| x <= t);
        i.saturating_sub(1).min(self.ts.len() - 2)
    }

    fn slope(&self, i: usize) -> f64 {
        (self.alphas[i + 1] - self.alphas[i]) / (self.ts[i + 1] - self.ts[i])
    }
}

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::arg("t", alloc::format!("{t} outside [0, 1]")))
    }
}

impl Schedule {
    pub fn alpha(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(match self {
            Schedule::Linear => 1.0 - t,
            Schedule::Poly2 => 1.0 - t * t,
            Schedule::Cosine => 1.0 - (FRAC_PI_2 * (1.0 - t)).cos(),
            Schedule::Tabulated(tab) => {
                let i = tab.segment(t);
                tab.alphas[i] + tab.slope(i) * (t - tab.ts[i])
            }
        })
    }

    pub fn alpha_prime(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(match self {
            Schedule::Linear => -1.0,
            Schedule::Poly2 => -2.0 * t,
            Schedule::Cosine => -FRAC_PI_2 * (FRAC_PI_2 * (1.0 - t)).sin(),
            Schedule::Tabulated(tab) => tab.slope(tab.segment(t)),
        })
    }

    /// ELBO weight `alpha'(t) / (alpha(t) - 1)`; diverges at `t = 0`.
    pub fn weight(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if t == 0.0 {
            return Err(Error::arg("t", "weight diverges at t = 0"));
        }
        Ok(match self {
            Schedule::Linear => 1.0 / t,
            Schedule::Poly2 => 2.0 / t,
            Schedule::Cosine => FRAC_PI_2 * (FRAC_PI_2 * (1.0 - t)).tan(),
            Schedule::Tabulated(_) => self.alpha_prime(t)? / (self.alpha(t)? - 1.0),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Schedule::Linear => "linear",
            Schedule::Poly2 => "poly2",
            Schedule::Cosine => "cosine",
            Schedule::Tabulated(_) => "tabulated",
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Schedule::Linear),
            "poly2" => Ok(Schedule::Poly2),
            "cosine" => Ok(Schedule::Cosine),
            _ => Err(Error::arg("schedule", alloc::format!("unknown kind {s:?} (linear, poly2, cosine)"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn kinds() -> [Schedule; 4] {
        let tab = Tabulated::new(vec![0.0, 0.5, 1.0], vec![1.0, 0.3, 0.0]).unwrap();
        [Schedule::Linear, Schedule::Poly2, Schedule::Cosine, Schedule::Tabulated(tab)]
    }

    #[test]
    fn spot_values() {
        assert!((Schedule::Linear.alpha(0.3).unwrap() - 0.7).abs() < 1e-15);
        assert!((Schedule::Cosine.alpha(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((Schedule::Poly2.alpha(0.5).unwrap() - 0.75).abs() < 1e-15);
        assert!((Schedule::Linear.weight(0.5).unwrap() - 2.0).abs() < 1e-12);
        assert!((Schedule::Linear.weight(0.01).unwrap() - 100.0).abs() < 1e-9);
        assert!((Schedule::Poly2.weight(0.5).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn endpoints_and_errors() {
        for s in kinds() {
            assert!((s.alpha(0.0).unwrap() - 1.0).abs() < 1e-9, "{s}");
            assert!(s.alpha(1.0).unwrap().abs() < 1e-9, "{s}");
            assert!(s.alpha(-0.1).is_err() && s.alpha(1.1).is_err());
            assert!(s.weight(0.0).is_err());
        }
    }

    #[test]
    fn closed_form_weights_match_definition() {
        for s in [Schedule::Linear, Schedule::Poly2, Schedule::Cosine] {
            for i in 1..100 {
                let t = i as f64 / 100.0;
                let def = s.alpha_prime(t).unwrap() / (s.alpha(t).unwrap() - 1.0);
                assert!((s.weight(t).unwrap() / def - 1.0).abs() < 1e-9, "{s} {t}");
            }
        }
    }

    #[test]
    fn tabulated_validation() {
        assert!(Tabulated::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_ok());
        assert!(Tabulated::new(vec![0.0, 0.5, 1.0], vec![1.0, 1.0, 0.0]).is_err());
        assert!(Tabulated::new(vec![0.1, 1.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("cosine".parse::<Schedule>().unwrap(), Schedule::Cosine);
        assert!("sigmoid".parse::<Schedule>().is_err());
    }
}
