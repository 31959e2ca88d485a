//! Allocation solvers: compute-optimal `(N, D)` for a FLOP budget, the epoch
//! count that maximizes the effective data for fixed `(N, U_D)`, and the joint
//! `(N, e)` optimum for fixed unique data.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::isoflop::Frontier;
use crate::laws::{eval_data_law, DataLawCoefficients, LawCoefficients};
use crate::optim::{geomspace, golden_section};
use crate::{Error, Result};

/// Budget split between parameters and tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComputeAllocation {
    pub budget_flops: f64,
    pub n_opt: f64,
    pub d_opt: f64,
    /// Absent for frontier-based allocations, which carry no loss model.
    pub predicted_loss: Option<f64>,
    /// `N_opt = g_const * (C/6)^a_exp`.
    pub g_const: f64,
    pub a_exp: f64,
    pub b_exp: f64,
}

fn exponents(c: &LawCoefficients) -> (f64, f64, f64) {
    let s = c.alpha + c.beta;
    let g = ((c.alpha * c.a) / (c.beta * c.b)).powf(1.0 / s);
    (g, c.beta / s, c.alpha / s)
}

fn check_law(c: &LawCoefficients) -> Result<()> {
    if !(c.alpha > 0.0 && c.beta > 0.0 && c.a > 0.0 && c.b > 0.0) {
        return Err(Error::arg("coefficients", "closed form needs A, B, alpha, beta > 0"));
    }
    Ok(())
}

/// `N_opt = G (C/6)^a`, `D_opt = G^-1 (C/6)^b` with
/// `G = (alpha A / beta B)^(1/(alpha+beta))`, `a = beta/(alpha+beta)`, `b = alpha/(alpha+beta)`.
pub fn closed_form_allocation(c: &LawCoefficients, budget_flops: f64) -> Result<ComputeAllocation> {
    check_law(c)?;
    if !(budget_flops > 0.0 && budget_flops.is_finite()) {
        return Err(Error::arg("budget_flops", "must be positive"));
    }
    let (g, a, b) = exponents(c);
    let x = budget_flops / 6.0;
    let n_opt = g * x.powf(a);
    let d_opt = x.powf(b) / g;
    Ok(ComputeAllocation {
        budget_flops,
        n_opt,
        d_opt,
        predicted_loss: Some(c.eval(n_opt, d_opt)),
        g_const: g,
        a_exp: a,
        b_exp: b,
    })
}

/// Model size that is compute-optimal when the optimal data size equals `tokens`.
pub fn compute_optimal_params_for_tokens(c: &LawCoefficients, tokens: f64) -> f64 {
    let (g, a, b) = exponents(c);
    let x = (tokens * g).powf(1.0 / b);
    g * x.powf(a)
}

/// Budget at which the closed form picks `n_params`: inverts `N = G (C/6)^a`.
pub fn compute_for_params(c: &LawCoefficients, n_params: f64) -> f64 {
    let (g, a, _) = exponents(c);
    6.0 * (n_params / g).powf(1.0 / a)
}

/// `N_opt = k_N C^p_N`, `D_opt = k_D C^p_D` straight from the fitted frontiers.
pub fn allocation_from_frontier(f: &Frontier, budget_flops: f64) -> Result<ComputeAllocation> {
    if !(budget_flops > 0.0 && budget_flops.is_finite()) {
        return Err(Error::arg("budget_flops", "must be positive"));
    }
    Ok(ComputeAllocation {
        budget_flops,
        n_opt: f.n.eval(budget_flops),
        d_opt: f.d.eval(budget_flops),
        predicted_loss: None,
        g_const: f.n.multiplier * 6f64.powf(f.n.exponent),
        a_exp: f.n.exponent,
        b_exp: f.d.exponent,
    })
}

/// What an allocation table is computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AllocationSource {
    Law(LawCoefficients),
    Frontier(Frontier),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub parameters: f64,
    pub flops: f64,
    pub tokens: f64,
}

/// For each model size, the budget at which it is compute-optimal and the
/// tokens it should see.
pub fn emit_allocation_table(source: &AllocationSource, params: &[f64]) -> Result<Vec<TableRow>> {
    if params.is_empty() {
        return Err(Error::arg("params", "empty parameter list"));
    }
    if let Some(bad) = params.iter().find(|n| !(**n > 0.0 && n.is_finite())) {
        return Err(Error::arg("params", alloc::format!("non-positive size {bad}")));
    }
    if let AllocationSource::Law(c) = source {
        check_law(c)?;
    }
    Ok(params
        .iter()
        .map(|&n| match source {
            AllocationSource::Law(c) => {
                let flops = compute_for_params(c, n);
                TableRow { parameters: n, flops, tokens: flops / (6.0 * n) }
            }
            AllocationSource::Frontier(f) => {
                let flops = f.n.invert(n);
                TableRow { parameters: n, flops, tokens: f.d.eval(flops) }
            }
        })
        .collect())
}

/// How [`max_epochs`] picks among local optima of the loss in `e`.
///
/// For `gamma < 1` the overfitting term has unbounded slope at `e = 1`, so the
/// loss first rises, then falls to an interior valley, then rises again.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpochCriterion {
    /// The interior valley, even if its loss is above the one-epoch loss;
    /// clamps to `e_lo` only when no valley exists.
    #[default]
    InteriorPeak,
    /// Lowest loss over `[e_lo, e_hi]`, valley or boundary.
    GlobalMinimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochAllocation {
    pub n_params: f64,
    pub unique_tokens: f64,
    pub e_opt: f64,
    pub predicted_loss: f64,
    pub flops_at_opt: f64,
    /// `e_opt` sits on `e_lo` rather than in a valley.
    pub boundary: bool,
}

impl EpochAllocation {
    /// Whole epochs that can be run before the loss turns upward.
    pub fn whole_epochs(&self) -> u64 {
        (self.e_opt.floor() as u64).max(1)
    }
}

const GRID: usize = 64;

/// Locates the loss-minimizing epoch count for fixed `(N, U_D)`.
///
/// Only `D'` depends on `e`, so the search maximizes `ln D'` on a 64-point
/// geometric grid, then refines the best interior valley by golden-section
/// search in `ln e`.
pub fn max_epochs(
    c: &DataLawCoefficients,
    n_params: f64,
    unique_tokens: f64,
    bounds: (f64, f64),
    criterion: EpochCriterion,
) -> Result<EpochAllocation> {
    let (e_lo, e_hi) = bounds;
    if !(e_lo >= 1.0 && e_hi > e_lo && e_hi.is_finite()) {
        return Err(Error::arg("bounds", "need 1 <= e_lo < e_hi"));
    }
    if !(n_params > 0.0 && unique_tokens > 0.0) {
        return Err(Error::arg("n_params/unique_tokens", "must be positive"));
    }
    let g = |ln_e: f64| -c.ln_effective_data(n_params, unique_tokens, ln_e.exp());
    let xs: Vec<f64> = geomspace(e_lo, e_hi, GRID).iter().map(|e| e.ln()).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();

    let valley = (1..GRID - 1)
        .filter(|&i| fs[i] < fs[i - 1] && fs[i] <= fs[i + 1])
        .min_by(|&i, &j| fs[i].total_cmp(&fs[j]));

    let finish = |e: f64, boundary: bool| EpochAllocation {
        n_params,
        unique_tokens,
        e_opt: e,
        predicted_loss: eval_data_law(c, n_params, unique_tokens, e),
        flops_at_opt: 6.0 * n_params * unique_tokens * e,
        boundary,
    };

    let Some(i) = valley else {
        if fs[GRID - 1] < fs[GRID - 2] {
            return Err(Error::RaiseUpperBound { e_hi });
        }
        return Ok(finish(e_lo, true));
    };
    let r = golden_section(g, xs[i - 1], xs[i + 1], 1e-12, 200);
    let interior = finish(r.x.exp(), false);
    if criterion == EpochCriterion::GlobalMinimum && fs[0] <= r.fx {
        return Ok(finish(e_lo, true));
    }
    Ok(interior)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointAllocation {
    pub unique_tokens: f64,
    pub n_opt: f64,
    pub e_opt: f64,
    pub predicted_loss: f64,
    pub flops_at_opt: f64,
    /// The optimum lies on the search box; widen the bounds.
    pub boundary: bool,
    pub sweeps: usize,
}

/// Default search box for [`joint_optimum`].
pub const DEFAULT_N_BOUNDS: (f64, f64) = (1e6, 1e13);
pub const DEFAULT_E_BOUNDS: (f64, f64) = (1.0, 1e6);

/// Minimizes the data-constrained loss over `(N, e)` at fixed `U_D`.
///
/// A 64x64 log-log grid seeds coordinate descent that alternates golden-section
/// solves in `ln N` and `ln e` until neither coordinate moves by more than
/// `1e-9` relative.
pub fn joint_optimum(
    c: &DataLawCoefficients,
    unique_tokens: f64,
    n_bounds: (f64, f64),
    e_bounds: (f64, f64),
) -> Result<JointAllocation> {
    let ok = |b: (f64, f64)| b.0 > 0.0 && b.1 > b.0 && b.1.is_finite();
    if !ok(n_bounds) || !ok(e_bounds) || e_bounds.0 < 1.0 {
        return Err(Error::arg("bounds", "need 0 < lo < hi (epochs lo >= 1)"));
    }
    if !(unique_tokens > 0.0) {
        return Err(Error::arg("unique_tokens", "must be positive"));
    }
    let f = |x: f64, y: f64| eval_data_law(c, x.exp(), unique_tokens, y.exp());
    let xs: Vec<f64> = geomspace(n_bounds.0, n_bounds.1, GRID).iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = geomspace(e_bounds.0, e_bounds.1, GRID).iter().map(|v| v.ln()).collect();

    let mut best = (f64::INFINITY, 0, 0);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let v = f(x, y);
            if v < best.0 {
                best = (v, i, j);
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::Numerical("loss not finite anywhere on the grid".into()));
    }
    let (mut fx, mut x, mut y) = (best.0, xs[best.1], ys[best.2]);
    let hx = xs[1] - xs[0];
    let hy = ys[1] - ys[0];
    let (xlo, xhi) = (xs[0], xs[GRID - 1]);
    let (ylo, yhi) = (ys[0], ys[GRID - 1]);

    let mut sweeps = 0;
    while sweeps < 2000 {
        sweeps += 1;
        let (x0, y0) = (x, y);
        let rx = golden_section(|t| f(t, y), (x - hx).max(xlo), (x + hx).min(xhi), 1e-13, 200);
        if rx.fx < fx {
            x = rx.x;
            fx = rx.fx;
        }
        let ry = golden_section(|t| f(x, t), (y - hy).max(ylo), (y + hy).min(yhi), 1e-13, 200);
        if ry.fx < fx {
            y = ry.x;
            fx = ry.fx;
        }
        if (x - x0).abs() < 1e-9 && (y - y0).abs() < 1e-9 {
            break;
        }
    }
    let edge = |v: f64, lo: f64, hi: f64, h: f64| v - lo < 1e-6 * h || hi - v < 1e-6 * h;
    let (n_opt, e_opt) = (x.exp(), y.exp());
    Ok(JointAllocation {
        unique_tokens,
        n_opt,
        e_opt,
        predicted_loss: fx,
        flops_at_opt: 6.0 * n_opt * unique_tokens * e_opt,
        boundary: edge(x, xlo, xhi, hx) || edge(y, ylo, yhi, hy),
        sweeps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    pub n_params: f64,
    pub epochs: f64,
    pub predicted_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourGrid {
    pub unique_tokens: f64,
    /// Row-major: `N` is the outer axis.
    pub points: Vec<ContourPoint>,
    pub n_axis: Vec<f64>,
    pub e_axis: Vec<f64>,
    pub optimum: Option<JointAllocation>,
}

/// Loss on a log-spaced `(N, e)` grid plus the located joint optimum.
pub fn contour_grid(
    c: &DataLawCoefficients,
    unique_tokens: f64,
    n_range: (f64, f64),
    e_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<ContourGrid> {
    if resolution.0 < 2 || resolution.1 < 2 {
        return Err(Error::arg("resolution", "need at least 2 points per axis"));
    }
    let n_axis = geomspace(n_range.0, n_range.1, resolution.0);
    let e_axis = geomspace(e_range.0, e_range.1, resolution.1);
    let mut points = Vec::with_capacity(resolution.0 * resolution.1);
    for &n in &n_axis {
        for &e in &e_axis {
            points.push(ContourPoint { n_params: n, epochs: e, predicted_loss: eval_data_law(c, n, unique_tokens, e) });
        }
    }
    let optimum = joint_optimum(c, unique_tokens, n_range, e_range).ok();
    Ok(ContourGrid { unique_tokens, points, n_axis, e_axis, optimum })
}
