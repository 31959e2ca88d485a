//! Published coefficient sets, shipped as data so allocation works without fitting.

use crate::isoflop::{Frontier, PowerLawFit};
use crate::laws::{AltLawV1Coefficients, AltLawV2Coefficients, Coefficients, DataLawCoefficients, LawCoefficients};
use crate::{Error, Result};

/// Names accepted by [`builtin_coefficients`].
pub const NAMES: &str = "paper-compute, paper-data, paper-alt1, paper-alt2, paper-frontier, chinchilla";

/// Compute-constrained parametric fit: `2.413 + 798.6/N^0.379 + 4604.9/D^0.378`.
pub fn paper_compute() -> LawCoefficients {
    LawCoefficients { e: 2.413, a: 798.6, b: 4604.9, alpha: 0.379, beta: 0.378 }
}

/// Data-constrained fit (irreducible term fitted to a negligible value, stored as 0).
pub fn paper_data() -> DataLawCoefficients {
    DataLawCoefficients {
        e: 0.0,
        a: 1535.23,
        b: 54.21,
        alpha: 0.42,
        beta: 0.13,
        c_p: 254.35,
        m_p: 0.39,
        k_p: 0.55,
        p_e: 1.49,
        gamma: 0.40,
    }
}

/// Additive-penalty variant 1. The published fit drives `R_D*` large enough
/// that `D' ~ U_D e`; it is stored as infinite.
pub fn paper_alt1() -> AltLawV1Coefficients {
    AltLawV1Coefficients {
        e: 0.0,
        a: 145962.2,
        b: 61.1,
        alpha: 0.73,
        beta: 0.13,
        mu: 58e-4,
        delta: 0.43,
        gamma_pen: 4.49,
        r_d_star: f64::INFINITY,
    }
}

/// Additive-penalty variant 2 with a softplus-gated penalty.
pub fn paper_alt2() -> AltLawV2Coefficients {
    AltLawV2Coefficients {
        e: 9.505e-66,
        a: 2.738,
        b: 53.58,
        alpha: 1.240,
        beta: 0.1207,
        mu: 0.1610,
        delta: 0.3073,
        gamma_pen: 0.8106,
        r_d_star: 33.62,
        kappa: 12642.0,
        eta: 1.486,
        tau: 26.56,
    }
}

/// IsoFLOP frontier: `N = 0.0216 C^0.514`, `D = 7.7 C^0.486`.
pub fn paper_frontier() -> Frontier {
    Frontier {
        n: PowerLawFit { multiplier: 0.0216, exponent: 0.514, residual: 0.0 },
        d: PowerLawFit { multiplier: 7.7, exponent: 0.486, residual: 0.0 },
    }
}

/// Chinchilla (approach 1) frontier multipliers with `a = b = 0.5`.
pub fn chinchilla_frontier() -> Frontier {
    Frontier {
        n: PowerLawFit { multiplier: 0.09, exponent: 0.50, residual: 0.0 },
        d: PowerLawFit { multiplier: 1.88, exponent: 0.50, residual: 0.0 },
    }
}

/// A named built-in set: either a loss law or a frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    Law(Coefficients),
    Frontier(Frontier),
}

pub fn builtin_coefficients(name: &str) -> Result<Builtin> {
    Ok(match name {
        "paper-compute" => Builtin::Law(Coefficients::Compute(paper_compute())),
        "paper-data" => Builtin::Law(Coefficients::Data(paper_data())),
        "paper-alt1" => Builtin::Law(Coefficients::Alt1(paper_alt1())),
        "paper-alt2" => Builtin::Law(Coefficients::Alt2(paper_alt2())),
        "paper-frontier" => Builtin::Frontier(paper_frontier()),
        "chinchilla" => Builtin::Frontier(chinchilla_frontier()),
        _ => {
            return Err(Error::UnknownCoefficients { name: name.into(), available: NAMES });
        }
    })
}
