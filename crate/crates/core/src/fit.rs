//! Robust fitting of the parametric laws.
//!
//! The objective is the summed Huber loss between predicted and observed
//! log-losses. Coefficients are optimized as logarithms so that positivity is
//! free; `E` below `1e-12` is read as exactly zero.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::ingest::{LossTarget, RunRecord};
use crate::laws::{huber, Coefficients, LawInput, LawKind};
use crate::optim::{minimize, LbfgsOptions};
use crate::{Error, Result};

/// Below this, `E` is treated as zero.
pub const E_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub delta: f64,
    /// Cap on the size of the start grid; larger grids are subsampled.
    pub max_starts: usize,
    /// Descents run from the lowest-objective starts; `None` descends from all.
    pub descents: Option<usize>,
    pub lbfgs: LbfgsOptions,
    pub target: LossTarget,
    /// Overrides the default start grid when set.
    pub grid: Option<InitGrid>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            delta: 1e-3,
            max_starts: 10_000,
            descents: Some(32),
            lbfgs: LbfgsOptions::default(),
            target: LossTarget::Train,
            grid: None,
        }
    }
}

/// Candidate values per coefficient, in [`LawKind::names`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitGrid {
    pub axes: Vec<Vec<f64>>,
}

impl InitGrid {
    pub fn default_for(kind: LawKind) -> Self {
        let mut axes = vec![
            vec![0.5, 1.5, 2.5],
            vec![1e1, 1e3, 1e5],
            vec![1e1, 1e3, 1e5],
            vec![0.2, 0.4, 0.7],
            vec![0.2, 0.4, 0.7],
        ];
        match kind {
            LawKind::Compute => {}
            LawKind::Data => axes.extend([
                vec![10.0, 100.0, 1000.0],
                vec![0.3, 0.6],
                vec![0.3, 0.6],
                vec![1.0, 1.5],
                vec![0.3, 0.6],
            ]),
            LawKind::Alt1 => axes.extend([vec![1e-3, 1e-2], vec![0.3, 0.6], vec![1.0, 4.0], vec![5.0, 50.0]]),
            LawKind::Alt2 => axes.extend([
                vec![0.01, 0.1],
                vec![0.3],
                vec![0.8],
                vec![5.0, 50.0],
                vec![1e2, 1e4],
                vec![1.5],
                vec![10.0],
            ]),
        }
        InitGrid { axes }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point `index` of the full Cartesian product (last axis fastest).
    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            v[k] = axis[index % axis.len()];
            index /= axis.len();
        }
        v
    }

    /// At most `cap` points, taking every `len/cap`-th point of the product so
    /// that each axis value stays represented.
    pub fn starts(&self, cap: usize) -> Vec<Vec<f64>> {
        let total = self.len();
        if total <= cap {
            return (0..total).map(|i| self.point(i)).collect();
        }
        (0..cap).map(|i| self.point(((i as u128 * total as u128) / cap as u128) as usize)).collect()
    }
}

/// Outcome of [`fit_law`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub law: LawKind,
    pub coefficients: Coefficients,
    /// Summed Huber loss at `coefficients`.
    pub objective_value: f64,
    pub n_points: usize,
    pub init_used: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub starts: usize,
    pub descents: usize,
}

/// Records prepared for repeated objective evaluation.
pub struct Objective {
    kind: LawKind,
    inputs: Vec<LawInput>,
    ln_obs: Vec<f64>,
    delta: f64,
}

impl Objective {
    pub fn new(kind: LawKind, records: &[RunRecord], target: LossTarget, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::arg("delta", "must be positive"));
        }
        let mut inputs = Vec::with_capacity(records.len());
        let mut ln_obs = Vec::with_capacity(records.len());
        for r in records {
            let loss = r.loss(target).ok_or_else(|| Error::InvalidRecord {
                run_id: r.run_id.clone(),
                reason: "missing target loss".into(),
            })?;
            if !(loss > 0.0 && loss.is_finite()) {
                return Err(Error::InvalidRecord { run_id: r.run_id.clone(), reason: "loss must be positive".into() });
            }
            inputs.push(LawInput::from(r));
            ln_obs.push(loss.ln());
        }
        Ok(Objective { kind, inputs, ln_obs, delta })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Summed Huber loss of log residuals; `+inf` when any prediction is not positive.
    pub fn value(&self, c: &Coefficients) -> f64 {
        let mut total = 0.0;
        for (x, lo) in self.inputs.iter().zip(&self.ln_obs) {
            let p = c.predict(x);
            if !(p > 0.0 && p.is_finite()) {
                return f64::INFINITY;
            }
            total += huber(p.ln() - lo, self.delta);
        }
        total
    }

    fn value_z(&self, z: &[f64]) -> f64 {
        match Coefficients::from_slice(self.kind, &from_log(z)) {
            Ok(c) => self.value(&c),
            Err(_) => f64::INFINITY,
        }
    }
}

fn to_log(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.max(E_FLOOR).ln()).collect()
}

fn from_log(z: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = z.iter().map(|x| x.exp()).collect();
    if v[0] < E_FLOOR {
        v[0] = 0.0;
    }
    v
}

/// Fits `kind` to `records` by Huber minimization from a grid of starts.
///
/// Every start is scored, the best `opts.descents` are each refined by L-BFGS,
/// and the lowest final objective wins (ties broken by lexicographic
/// coefficient order).
pub fn fit_law(records: &[RunRecord], kind: LawKind, opts: &FitOptions) -> Result<FitReport> {
    let k = kind.n_coefficients();
    if records.len() < k {
        return Err(Error::TooFewPoints { needed: k, got: records.len() });
    }
    let obj = Objective::new(kind, records, opts.target, opts.delta)?;
    let grid = opts.grid.clone().unwrap_or_else(|| InitGrid::default_for(kind));
    if grid.axes.len() != k || grid.is_empty() {
        return Err(Error::arg("grid", "one nonempty axis per coefficient required"));
    }
    let starts = grid.starts(opts.max_starts.max(1));

    let mut scored: Vec<(f64, usize)> =
        starts.iter().enumerate().map(|(i, s)| (obj.value_z(&to_log(s)), i)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n_desc = opts.descents.unwrap_or(scored.len()).clamp(1, scored.len());

    let mut best: Option<(f64, Vec<f64>, usize, bool, usize)> = None;
    let mut best_seen = f64::INFINITY;
    for &(f0, i) in scored.iter().take(n_desc) {
        if !f0.is_finite() {
            continue;
        }
        let r = minimize(|z: &[f64]| obj.value_z(z), &to_log(&starts[i]), &opts.lbfgs);
        if !r.fx.is_finite() {
            continue;
        }
        best_seen = best_seen.min(r.fx);
        let v = from_log(&r.x);
        let better = match &best {
            None => true,
            Some((fb, vb, ..)) => r.fx < *fb || (r.fx == *fb && lex_less(&v, vb)),
        };
        if better {
            best = Some((r.fx, v, i, r.reason.converged(), r.iterations));
        }
    }
    let Some((_, v, i, converged, iterations)) = best else {
        return Err(Error::FitDiverged { starts: n_desc, best_objective: best_seen });
    };
    let coefficients = Coefficients::from_slice(kind, &v)?;
    Ok(FitReport {
        law: kind,
        objective_value: obj.value(&coefficients),
        coefficients,
        n_points: obj.len(),
        init_used: starts[i].clone(),
        converged: converged && coefficients.is_sane(),
        iterations,
        starts: starts.len(),
        descents: n_desc,
    })
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Less => return true,
            core::cmp::Ordering::Greater => return false,
            core::cmp::Ordering::Equal => {}
        }
    }
    false
}
