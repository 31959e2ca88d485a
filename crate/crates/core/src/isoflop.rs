//! IsoFLOP analysis: group runs by compute budget, locate each budget's loss
//! valley with a parabola in `log10 N`, then fit power laws `N_opt(C)` and
//! `D_opt(C)` through the valley minima.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::ingest::{flops_of, LossTarget, RunRecord};
use crate::optim::{fit_line, fit_quadratic};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoPoint {
    pub n_params: f64,
    pub loss: f64,
}

/// Runs sharing one compute budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoflopGroup {
    pub budget_flops: f64,
    pub points: Vec<IsoPoint>,
}

impl IsoflopGroup {
    pub fn distinct_sizes(&self) -> usize {
        let mut ns: Vec<f64> = self.points.iter().map(|p| p.n_params).collect();
        ns.sort_by(f64::total_cmp);
        ns.dedup();
        ns.len()
    }
}

/// Budget that was seen but could not form a usable group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedGroup {
    pub budget_flops: f64,
    pub distinct_sizes: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Grouping {
    pub groups: Vec<IsoflopGroup>,
    pub dropped: Vec<DroppedGroup>,
    /// Records whose compute matched no budget within tolerance.
    pub unassigned: Vec<String>,
}

/// Assigns each record to the nearest budget within relative tolerance `tol`.
///
/// Groups with fewer than three distinct model sizes are dropped and listed in
/// [`Grouping::dropped`].
pub fn group_runs(records: &[RunRecord], budgets: &[f64], tol: f64, target: LossTarget) -> Result<Grouping> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::arg("tol", format!("must lie in (0, 0.5), got {tol}")));
    }
    if budgets.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(Error::arg("budgets", "must be positive"));
    }
    let mut buckets: Vec<Vec<IsoPoint>> = budgets.iter().map(|_| Vec::new()).collect();
    let mut out = Grouping::default();
    for r in records {
        let c = flops_of(r.n_params, r.total_tokens);
        let nearest = budgets
            .iter()
            .enumerate()
            .map(|(i, b)| (i, (c / b - 1.0).abs()))
            .filter(|&(_, dev)| dev <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match (nearest, r.loss(target)) {
            (Some((i, _)), Some(loss)) => buckets[i].push(IsoPoint { n_params: r.n_params, loss }),
            _ => out.unassigned.push(r.run_id.clone()),
        }
    }
    for (b, points) in budgets.iter().zip(buckets) {
        let group = IsoflopGroup { budget_flops: *b, points };
        let distinct = group.distinct_sizes();
        if distinct < 3 {
            out.dropped.push(DroppedGroup {
                budget_flops: *b,
                distinct_sizes: distinct,
                reason: format!("only {distinct} distinct model sizes"),
            });
        } else {
            out.groups.push(group);
        }
    }
    if out.groups.is_empty() {
        return Err(Error::NoGroups);
    }
    Ok(out)
}

/// `loss ~ a2 x^2 + a1 x + a0` with `x = log10 N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolaFit {
    pub budget_flops: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    pub vertex_n_params: f64,
    pub vertex_loss: f64,
    /// Vertex lies outside the sampled `log10 N` range.
    pub extrapolated: bool,
}

pub fn fit_parabola(group: &IsoflopGroup) -> Result<ParabolaFit> {
    if group.distinct_sizes() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: group.distinct_sizes() });
    }
    let xs: Vec<f64> = group.points.iter().map(|p| p.n_params.log10()).collect();
    let ys: Vec<f64> = group.points.iter().map(|p| p.loss).collect();
    let [a2, a1, a0] =
        fit_quadratic(&xs, &ys).ok_or_else(|| Error::Numerical("singular parabola design".into()))?;

    // Curvature is judged relative to the loss scale over the sampled range.
    let (xmin, xmax) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let span = xmax - xmin;
    let yscale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(1e-300);
    if !(a2 * span * span > 1e-10 * yscale) {
        return Err(Error::NoValley { curvature: a2 });
    }
    let xv = -a1 / (2.0 * a2);
    Ok(ParabolaFit {
        budget_flops: group.budget_flops,
        a2,
        a1,
        a0,
        vertex_n_params: 10f64.powf(xv),
        vertex_loss: a2 * xv * xv + a1 * xv + a0,
        extrapolated: xv < xmin || xv > xmax,
    })
}

/// `y = multiplier * x^exponent`, fitted in log-log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub multiplier: f64,
    pub exponent: f64,
    /// Mean squared `log10` error.
    pub residual: f64,
}

impl PowerLawFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.multiplier * x.powf(self.exponent)
    }

    /// `x` such that `eval(x) = y`.
    pub fn invert(&self, y: f64) -> f64 {
        (y / self.multiplier).powf(1.0 / self.exponent)
    }
}

/// Least-squares power law through `(x, y)` pairs.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let line = fit_line(&xs, &ys).ok_or(Error::TooFewPoints { needed: 2, got: points.len() })?;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (line.slope * x + line.intercept);
            r * r
        })
        .sum::<f64>()
        / xs.len() as f64;
    Ok(PowerLawFit { multiplier: 10f64.powf(line.intercept), exponent: line.slope, residual })
}

/// Model-size and data-size frontiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    pub n: PowerLawFit,
    pub d: PowerLawFit,
}

/// Fits `N_opt(C)` on `(budget, vertex N)` pairs and `D_opt(C)` on the derived
/// `D_opt = C / (6 N_opt)`.
pub fn fit_frontier(minima: &[(f64, f64)]) -> Result<Frontier> {
    let mut budgets: Vec<f64> = minima.iter().map(|m| m.0).collect();
    budgets.sort_by(f64::total_cmp);
    budgets.dedup();
    if budgets.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: budgets.len() });
    }
    let n = fit_power_law(minima)?;
    let d_points: Vec<(f64, f64)> = minima.iter().map(|&(c, n)| (c, c / (6.0 * n))).collect();
    let d = fit_power_law(&d_points)?;
    Ok(Frontier { n, d })
}

/// Everything produced by an IsoFLOP pass.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoflopAnalysis {
    pub grouping: Grouping,
    pub parabolas: Vec<ParabolaFit>,
    /// Budgets whose parabola had no valley.
    pub failed: Vec<(f64, Error)>,
    pub frontier: Frontier,
}

/// Groups, fits every budget's parabola, then the frontier.
///
/// Extrapolated vertices are left out of the frontier unless
/// `include_extrapolated` is set.
pub fn analyze(
    records: &[RunRecord],
    budgets: &[f64],
    tol: f64,
    target: LossTarget,
    include_extrapolated: bool,
) -> Result<IsoflopAnalysis> {
    let grouping = group_runs(records, budgets, tol, target)?;
    let mut parabolas = Vec::new();
    let mut failed = Vec::new();
    for g in &grouping.groups {
        match fit_parabola(g) {
            Ok(p) => parabolas.push(p),
            Err(e) => failed.push((g.budget_flops, e)),
        }
    }
    let minima: Vec<(f64, f64)> = parabolas
        .iter()
        .filter(|p| include_extrapolated || !p.extrapolated)
        .map(|p| (p.budget_flops, p.vertex_n_params))
        .collect();
    let frontier = fit_frontier(&minima)?;
    Ok(IsoflopAnalysis { grouping, parabolas, failed, frontier })
}
