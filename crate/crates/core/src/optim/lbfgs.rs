use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Settings for [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    /// Number of correction pairs kept.
    pub memory: usize,
    pub max_iter: usize,
    /// Stop when the objective drops by less than `rel_tol * |f|` over `window` iterations.
    pub rel_tol: f64,
    pub window: usize,
    /// Stop when the gradient's infinity norm falls below this.
    pub grad_tol: f64,
    /// Relative step for central-difference gradients.
    pub fd_step: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            memory: 10,
            max_iter: 2000,
            rel_tol: 1e-10,
            window: 5,
            grad_tol: 1e-14,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    RelativeDecrease,
    SmallGradient,
    /// No descent step could be found even along the negative gradient.
    Stalled,
    MaxIterations,
    NonFinite,
}

impl StopReason {
    pub fn converged(self) -> bool {
        matches!(self, StopReason::RelativeDecrease | StopReason::SmallGradient | StopReason::Stalled)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub reason: StopReason,
}

/// Central-difference gradient with step `h * max(1, |x_i|)`.
pub fn fd_gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], h: f64, out: &mut [f64]) {
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let step = h * x[i].abs().max(1.0);
        probe[i] = x[i] + step;
        let fp = f(&probe);
        probe[i] = x[i] - step;
        let fm = f(&probe);
        probe[i] = x[i];
        let g = (fp - fm) / (2.0 * step);
        out[i] = if g.is_finite() { g } else { 0.0 };
    }
}

/// Limited-memory BFGS with finite-difference gradients and a backtracking
/// Armijo line search.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &LbfgsOptions) -> LbfgsResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return LbfgsResult { x, fx, iterations: 0, reason: StopReason::NonFinite };
    }
    let mut g = vec![0.0; n];
    fd_gradient(&mut f, &x, opts.fd_step, &mut g);

    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut history: VecDeque<f64> = VecDeque::with_capacity(opts.window + 1);
    history.push_back(fx);

    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut alpha_buf = vec![0.0; opts.memory.max(1)];

    for iter in 1..=opts.max_iter {
        if inf_norm(&g) < opts.grad_tol {
            return LbfgsResult { x, fx, iterations: iter - 1, reason: StopReason::SmallGradient };
        }

        let mut dir = two_loop(&g, &pairs, &mut alpha_buf);
        let mut slope = dot(&dir, &g);
        if !(slope < 0.0) {
            pairs.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }

        let accepted = line_search(&mut f, &x, fx, &dir, slope, pairs.is_empty(), &mut x_new)
            .or_else(|| {
                // Retry along steepest descent with fresh memory.
                if pairs.is_empty() {
                    return None;
                }
                pairs.clear();
                dir = g.iter().map(|v| -v).collect();
                slope = dot(&dir, &g);
                line_search(&mut f, &x, fx, &dir, slope, true, &mut x_new)
            });
        let Some(f_new) = accepted else {
            return LbfgsResult { x, fx, iterations: iter, reason: StopReason::Stalled };
        };

        fd_gradient(&mut f, &x_new, opts.fd_step, &mut g_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        fx = f_new;

        history.push_back(fx);
        if history.len() > opts.window + 1 {
            history.pop_front();
        }
        if history.len() == opts.window + 1 {
            let old = history[0];
            if old - fx <= opts.rel_tol * fx.abs() {
                return LbfgsResult { x, fx, iterations: iter, reason: StopReason::RelativeDecrease };
            }
        }
    }
    LbfgsResult { x, fx, iterations: opts.max_iter, reason: StopReason::MaxIterations }
}

fn two_loop(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, alpha: &mut [f64]) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    for (k, (s, y, rho)) in pairs.iter().enumerate().rev() {
        let a = rho * dot(s, &q);
        alpha[k] = a;
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for (k, (s, y, rho)) in pairs.iter().enumerate() {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (alpha[k] - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

fn line_search<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x: &[f64],
    fx: f64,
    dir: &[f64],
    slope: f64,
    fresh: bool,
    x_new: &mut [f64],
) -> Option<f64> {
    const C1: f64 = 1e-4;
    // Without curvature information, start with a unit-length step.
    let mut step = if fresh { 1.0 / norm(dir).max(1e-300) } else { 1.0 };
    step = step.min(1.0);
    for _ in 0..60 {
        for i in 0..x.len() {
            x_new[i] = x[i] + step * dir[i];
        }
        let fv = f(x_new);
        if fv.is_finite() && fv <= fx + C1 * step * slope {
            if fv < fx {
                return Some(fv);
            }
            return None;
        }
        step *= 0.5;
    }
    None
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(f, &[-1.2, 1.0], &LbfgsOptions::default());
        assert!(r.reason.converged(), "{:?}", r.reason);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{:?}", r.x);
    }

    #[test]
    fn ill_scaled_quadratic() {
        let f = |x: &[f64]| 1e4 * (x[0] - 3.0).powi(2) + (x[1] + 2.0).powi(2) + 0.01 * x[2] * x[2];
        let r = minimize(f, &[0.0, 0.0, 5.0], &LbfgsOptions::default());
        assert!(r.fx < 1e-10, "{}", r.fx);
    }

    #[test]
    fn non_finite_start_reports() {
        let r = minimize(|_: &[f64]| f64::NAN, &[0.0], &LbfgsOptions::default());
        assert_eq!(r.reason, StopReason::NonFinite);
    }
}
