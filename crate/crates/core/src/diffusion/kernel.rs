use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Forward corruption kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// Corrupted tokens jump to a reserved absorbing mask token.
    Masked,
    /// Corrupted tokens are redrawn uniformly from the vocabulary.
    Uniform,
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Masked => "masked",
            Kernel::Uniform => "uniform",
        })
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "masked" | "absorb" | "absorbing" => Ok(Kernel::Masked),
            "uniform" => Ok(Kernel::Uniform),
            _ => Err(Error::arg("kernel", alloc::format!("unknown kernel {s:?} (masked, uniform)"))),
        }
    }
}

/// Entry `(i, j)` of the `K x K` rate matrix.
///
/// Uniform: `1` off the diagonal, `1 - K` on it. Absorbing (index `K - 1` is
/// the mask): `-1` on non-mask diagonal entries, `1` in the mask row for
/// non-mask columns, `0` elsewhere, so that non-mask columns sum to zero.
pub fn rate_matrix_entry(kernel: Kernel, i: usize, j: usize, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::arg("vocab_size", "need at least 2 states"));
    }
    if i >= k || j >= k {
        return Err(Error::arg("index", alloc::format!("({i}, {j}) out of range for K = {k}")));
    }
    let mask = k - 1;
    Ok(match kernel {
        Kernel::Uniform if i == j => 1.0 - k as f64,
        Kernel::Uniform => 1.0,
        Kernel::Masked if i == j && i != mask => -1.0,
        Kernel::Masked if i == mask && j != mask => 1.0,
        Kernel::Masked => 0.0,
    })
}

/// Dense rate matrix, row-major.
pub fn rate_matrix(kernel: Kernel, k: usize) -> Result<Vec<Vec<f64>>> {
    (0..k).map(|i| (0..k).map(|j| rate_matrix_entry(kernel, i, j, k)).collect()).collect()
}
