//! Small numerical kernels shared by the fitting and allocation code.

mod golden;
mod lbfgs;
mod lstsq;

pub use golden::{golden_section, GoldenResult};
pub use lbfgs::{minimize, LbfgsOptions, LbfgsResult, StopReason};
pub use lstsq::{fit_line, fit_quadratic, Line};

/// `n` log-spaced points from `lo` to `hi` inclusive; endpoints are exact.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> alloc::vec::Vec<f64> {
    #[cfg(not(feature = "std"))]
    use num_traits::Float;
    match n {
        0 => alloc::vec::Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut v: alloc::vec::Vec<f64> =
                (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
            v[0] = lo;
            v[n - 1] = hi;
            v
        }
    }
}
