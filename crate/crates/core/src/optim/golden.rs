
/// Outcome of a golden-section search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub fx: f64,
    pub evals: usize,
}

/// Minimizes a unimodal `f` on `[lo, hi]` by golden-section search.
///
/// Stops once the bracket is narrower than `tol * (|x| + tiny)` or after
/// `max_iter` iterations. The best point seen (including the bracket ends'
/// interior probes) is returned.
pub fn golden_section<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> GoldenResult
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    if hi < lo {
        core::mem::swap(&mut lo, &mut hi);
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    for _ in 0..max_iter {
        let scale = x1.abs().max(x2.abs()).max(1e-300);
        if (hi - lo) <= tol * scale {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        evals += 1;
    }
    if f1 <= f2 {
        GoldenResult { x: x1, fx: f1, evals }
    } else {
        GoldenResult { x: x2, fx: f2, evals }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_minimum() {
        let r = golden_section(|x| (x - 1.234).powi(2) + 7.0, -10.0, 10.0, 1e-12, 500);
        assert!((r.x - 1.234).abs() < 1e-6);
        assert!((r.fx - 7.0).abs() < 1e-12);
    }

    #[test]
    fn handles_reversed_bracket_and_kinks() {
        let r = golden_section(|x: f64| (x - 3.0).abs(), 5.0, 0.0, 1e-10, 500);
        assert!((r.x - 3.0).abs() < 1e-8);
    }

    #[test]
    fn boundary_minimum_converges_to_edge() {
        let r = golden_section(|x| x, 2.0, 4.0, 1e-10, 500);
        assert!((r.x - 2.0).abs() < 1e-8);
    }
}
