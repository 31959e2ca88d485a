//! Reference data and brute-force solvers that the fitted and optimized paths
//! are checked against.

use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::allocate::EpochCriterion;
use crate::ingest::RunRecord;
use crate::laws::{effective_data, eval_data_law, Coefficients, DataLawCoefficients, LawInput};
use crate::optim::geomspace;
use crate::rng::stream;
use crate::{Error, Result};

/// `count` log-spaced values from `lo` to `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl LogGrid {
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        LogGrid { lo, hi, count }
    }

    pub fn values(&self) -> Vec<f64> {
        geomspace(self.lo, self.hi, self.count)
    }

    fn check(&self, name: &'static str) -> Result<()> {
        if self.count == 0 || !(self.lo > 0.0 && self.hi >= self.lo && self.hi.is_finite()) {
            return Err(Error::arg(name, "grid needs 0 < lo <= hi and count >= 1"));
        }
        Ok(())
    }
}

/// Data axes of a synthetic sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataGrid {
    /// Single-epoch runs on `D` tokens.
    Tokens(LogGrid),
    /// Runs on `U_D` unique tokens repeated `e` times.
    Repeated { unique: LogGrid, epochs: LogGrid },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub coefficients: Coefficients,
    pub n_grid: LogGrid,
    pub data: DataGrid,
    /// Standard deviation of the multiplicative log-normal noise.
    pub sigma: f64,
    pub seed: u64,
}

/// Cartesian sweep with `loss = law * exp(sigma z)`. Record `i` draws `z` from
/// its own stream, so subsets of a grid reproduce the same noise.
pub fn synth_runs(spec: &SynthSpec) -> Result<Vec<RunRecord>> {
    spec.n_grid.check("n_grid")?;
    if !(spec.sigma >= 0.0 && spec.sigma.is_finite()) {
        return Err(Error::arg("sigma", "must be finite and nonnegative"));
    }
    let points: Vec<(f64, f64)> = match spec.data {
        DataGrid::Tokens(d) => {
            d.check("tokens")?;
            d.values().into_iter().map(|d| (d, 1.0)).collect()
        }
        DataGrid::Repeated { unique, epochs } => {
            unique.check("unique")?;
            epochs.check("epochs")?;
            if epochs.lo < 1.0 {
                return Err(Error::arg("epochs", "must be at least 1"));
            }
            let es = epochs.values();
            unique.values().into_iter().flat_map(|u| es.iter().map(move |&e| (u, e))).collect()
        }
    };
    let mut out = Vec::with_capacity(spec.n_grid.count * points.len());
    for n in spec.n_grid.values() {
        for &(u, e) in &points {
            let i = out.len();
            let x = LawInput { n_params: n, tokens: u * e, unique_tokens: u, epochs: e };
            let law = spec.coefficients.predict(&x);
            let loss = if spec.sigma > 0.0 {
                let z: f64 = StandardNormal.sample(&mut stream(spec.seed, i as u64));
                law * (spec.sigma * z).exp()
            } else {
                law
            };
            let mut r = RunRecord::new(format!("synth-{i:05}"), n, u, u * e, loss)?;
            // Keep the exact epoch count rather than the rounded ratio.
            r.epochs = e;
            out.push(r);
        }
    }
    Ok(out)
}

/// Grid point picked by a brute-force scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteEpoch {
    pub e: f64,
    pub loss: f64,
    pub index: usize,
    /// The pick is a grid end rather than an interior valley.
    pub boundary: bool,
}

/// Dense geometric scan of `e` over `[1, 1e6]`.
///
/// Only the `B / D'^beta` term varies with `e`, so the scan orders points by
/// that term alone; the reported loss is the full law.
pub fn brute_force_epoch_opt(
    c: &DataLawCoefficients,
    n_params: f64,
    unique_tokens: f64,
    grid_points: usize,
    criterion: EpochCriterion,
) -> Result<BruteEpoch> {
    if grid_points < 3 {
        return Err(Error::arg("grid_points", "need at least 3 points"));
    }
    let es = geomspace(1.0, 1e6, grid_points);
    let v: Vec<f64> = es.iter().map(|&e| c.b * effective_data(c, n_params, unique_tokens, e).powf(-c.beta)).collect();
    let argmin = |it: &mut dyn Iterator<Item = usize>| it.min_by(|&i, &j| v[i].total_cmp(&v[j]).then(i.cmp(&j)));
    let last = grid_points - 1;
    let (index, boundary) = match criterion {
        EpochCriterion::GlobalMinimum => {
            let i = argmin(&mut (0..grid_points)).unwrap_or(0);
            (i, i == 0 || i == last)
        }
        EpochCriterion::InteriorPeak => {
            match argmin(&mut (1..last).filter(|&i| v[i] < v[i - 1] && v[i] <= v[i + 1])) {
                Some(i) => (i, false),
                None if v[last] < v[last - 1] => (last, true),
                None => (0, true),
            }
        }
    };
    let e = es[index];
    Ok(BruteEpoch { e, loss: eval_data_law(c, n_params, unique_tokens, e), index, boundary })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteJoint {
    pub n: f64,
    pub e: f64,
    pub loss: f64,
}

/// Full-grid argmin of the data-constrained loss over log-spaced `(N, e)`.
pub fn brute_force_joint_opt(
    c: &DataLawCoefficients,
    unique_tokens: f64,
    grid: (usize, usize),
    n_bounds: (f64, f64),
    e_bounds: (f64, f64),
) -> Result<BruteJoint> {
    if grid.0 == 0 || grid.1 == 0 {
        return Err(Error::arg("grid", "need at least one point per axis"));
    }
    let es = geomspace(e_bounds.0, e_bounds.1, grid.1);
    let mut best = BruteJoint { n: f64::NAN, e: f64::NAN, loss: f64::INFINITY };
    for n in geomspace(n_bounds.0, n_bounds.1, grid.0) {
        for &e in &es {
            let l = eval_data_law(c, n, unique_tokens, e);
            if l < best.loss {
                best = BruteJoint { n, e, loss: l };
            }
        }
    }
    if !best.loss.is_finite() {
        return Err(Error::Numerical("loss not finite on the grid".into()));
    }
    Ok(best)
}
