//! Parametric loss laws.
//!
//! All laws share the Chinchilla learning term `E + A / N^alpha + B / D^beta`
//! and differ in what they substitute for `D` and whether they add an explicit
//! overfitting penalty.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::ingest::RunRecord;
use crate::{Error, Result};

/// Robust penalty on a residual: quadratic inside `delta`, linear outside.
#[inline]
pub fn huber(residual: f64, delta: f64) -> f64 {
    let a = residual.abs();
    if a <= delta {
        0.5 * residual * residual
    } else {
        delta * (a - 0.5 * delta)
    }
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `E + A / N^alpha + B / D^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawCoefficients {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl LawCoefficients {
    pub fn eval(&self, n_params: f64, tokens: f64) -> f64 {
        self.e + self.a * n_params.powf(-self.alpha) + self.b * tokens.powf(-self.beta)
    }

    fn eval_ln_d(&self, n_params: f64, ln_tokens: f64) -> f64 {
        self.e + self.a * n_params.powf(-self.alpha) + self.b * (-self.beta * ln_tokens).exp()
    }

    /// Finite, nonnegative, exponents in `(0, 2]`.
    pub fn is_sane(&self) -> bool {
        [self.e, self.a, self.b, self.alpha, self.beta].iter().all(|v| v.is_finite())
            && self.e >= 0.0
            && self.a >= 0.0
            && self.b >= 0.0
            && self.alpha > 0.0
            && self.alpha <= 2.0
            && self.beta > 0.0
            && self.beta <= 2.0
    }
}

/// Compute-constrained law `L(N, D)`.
pub fn eval_compute_law(c: &LawCoefficients, n_params: f64, tokens: f64) -> f64 {
    c.eval(n_params, tokens)
}

/// Data-constrained law with a learning/overfitting effective dataset size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataLawCoefficients {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c_p: f64,
    pub m_p: f64,
    pub k_p: f64,
    pub p_e: f64,
    pub gamma: f64,
}

impl DataLawCoefficients {
    pub fn learning(&self) -> LawCoefficients {
        LawCoefficients { e: self.e, a: self.a, b: self.b, alpha: self.alpha, beta: self.beta }
    }

    /// Epoch scale of the overfitting penalty, `c_p * U_D^m_p / N^k_p`.
    pub fn peak_epoch_scale(&self, n_params: f64, unique_tokens: f64) -> f64 {
        self.c_p * unique_tokens.powf(self.m_p) * n_params.powf(-self.k_p)
    }

    /// `ln D'`.
    pub fn ln_effective_data(&self, n_params: f64, unique_tokens: f64, epochs: f64) -> f64 {
        let excess = (epochs - 1.0).max(0.0);
        let penalty = if excess > 0.0 {
            (excess / self.peak_epoch_scale(n_params, unique_tokens)).powf(self.gamma)
        } else {
            0.0
        };
        unique_tokens.ln() + self.p_e * epochs.ln() - penalty
    }

    pub fn is_sane(&self) -> bool {
        self.learning().is_sane()
            && [self.c_p, self.m_p, self.k_p, self.p_e, self.gamma].iter().all(|v| v.is_finite())
            && self.c_p > 0.0
            && self.m_p > 0.0
            && self.k_p > 0.0
            && self.p_e > 0.0
            && self.p_e <= 4.0
            && self.gamma > 0.0
            && self.gamma <= 4.0
    }
}

/// Effective dataset size `D' = U_D e^p_e exp(-(max(0, e - 1) / e_p)^gamma)`.
pub fn effective_data(c: &DataLawCoefficients, n_params: f64, unique_tokens: f64, epochs: f64) -> f64 {
    let grown = unique_tokens * epochs.powf(c.p_e);
    if epochs <= 1.0 {
        return grown;
    }
    let x = (epochs - 1.0) / c.peak_epoch_scale(n_params, unique_tokens);
    grown * (-x.powf(c.gamma)).exp()
}

/// `E + A / N^alpha + B / D'^beta` with `D'` from [`effective_data`].
pub fn eval_data_law(c: &DataLawCoefficients, n_params: f64, unique_tokens: f64, epochs: f64) -> f64 {
    c.learning().eval_ln_d(n_params, c.ln_effective_data(n_params, unique_tokens, epochs))
}

/// Repetition-discounted data size `U_D (1 + R* (1 - exp(-x / R*)))`.
///
/// An infinite `R*` gives the undiscounted `U_D (1 + x)`.
fn half_life_data(unique_tokens: f64, excess_epochs: f64, r_star: f64) -> f64 {
    if r_star.is_infinite() {
        unique_tokens * (1.0 + excess_epochs)
    } else {
        unique_tokens * (1.0 - r_star * (-excess_epochs / r_star).exp_m1())
    }
}

/// Learning loss plus additive penalty `mu (N/U_D)^delta (ln max(1, e))^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltLawV1Coefficients {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    #[serde(rename = "delta_pen")]
    pub delta: f64,
    #[serde(rename = "gamma")]
    pub gamma_pen: f64,
    #[serde(with = "unbounded")]
    pub r_d_star: f64,
}

impl AltLawV1Coefficients {
    pub fn learning(&self) -> LawCoefficients {
        LawCoefficients { e: self.e, a: self.a, b: self.b, alpha: self.alpha, beta: self.beta }
    }

    pub fn effective_data(&self, unique_tokens: f64, epochs: f64) -> f64 {
        half_life_data(unique_tokens, (epochs - 1.0).max(0.0), self.r_d_star)
    }

    pub fn penalty(&self, n_params: f64, unique_tokens: f64, epochs: f64) -> f64 {
        let log_e = epochs.max(1.0).ln();
        if log_e == 0.0 {
            return 0.0;
        }
        self.mu * (n_params / unique_tokens).powf(self.delta) * log_e.powf(self.gamma_pen)
    }

    pub fn is_sane(&self) -> bool {
        self.learning().is_sane()
            && [self.mu, self.delta, self.gamma_pen, self.r_d_star].iter().all(|v| !v.is_nan())
            && self.mu >= 0.0
            && self.r_d_star > 0.0
    }
}

pub fn eval_alt_v1(c: &AltLawV1Coefficients, n_params: f64, unique_tokens: f64, epochs: f64) -> f64 {
    c.learning().eval(n_params, c.effective_data(unique_tokens, epochs))
        + c.penalty(n_params, unique_tokens, epochs)
}

/// Learning loss plus a softplus-gated penalty
/// `mu (N/D')^delta softplus((e - kappa (U_D/N)^eta) / tau)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltLawV2Coefficients {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    #[serde(rename = "delta_pen")]
    pub delta: f64,
    #[serde(rename = "gamma")]
    pub gamma_pen: f64,
    pub r_d_star: f64,
    pub kappa: f64,
    pub eta: f64,
    pub tau: f64,
}

impl AltLawV2Coefficients {
    pub fn learning(&self) -> LawCoefficients {
        LawCoefficients { e: self.e, a: self.a, b: self.b, alpha: self.alpha, beta: self.beta }
    }

    /// Note: no `max(0, .)` here, so `e < 1` shrinks `D'` below `U_D`.
    pub fn effective_data(&self, unique_tokens: f64, epochs: f64) -> f64 {
        half_life_data(unique_tokens, epochs - 1.0, self.r_d_star)
    }

    /// Epoch count at which the softplus gate is centred.
    pub fn threshold(&self, n_params: f64, unique_tokens: f64) -> f64 {
        self.kappa * (unique_tokens / n_params).powf(self.eta)
    }

    pub fn penalty(&self, n_params: f64, unique_tokens: f64, epochs: f64) -> f64 {
        let d_eff = self.effective_data(unique_tokens, epochs);
        let gate = softplus((epochs - self.threshold(n_params, unique_tokens)) / self.tau);
        self.mu * (n_params / d_eff).powf(self.delta) * gate.powf(self.gamma_pen)
    }

    pub fn is_sane(&self) -> bool {
        self.learning().is_sane()
            && [self.mu, self.delta, self.gamma_pen, self.r_d_star, self.kappa, self.eta, self.tau]
                .iter()
                .all(|v| v.is_finite())
            && self.tau > 0.0
            && self.r_d_star > 0.0
    }
}

pub fn eval_alt_v2(c: &AltLawV2Coefficients, n_params: f64, unique_tokens: f64, epochs: f64) -> f64 {
    c.learning().eval(n_params, c.effective_data(unique_tokens, epochs))
        + c.penalty(n_params, unique_tokens, epochs)
}

/// Exponential half-life discounting of repeated data and excess parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuennighoffCoefficients {
    pub r_d_star: f64,
    pub r_n_star: f64,
    pub base: LawCoefficients,
}

/// Effective data and parameter counts under half-life discounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveSizes {
    pub d_eff: f64,
    pub n_eff: f64,
    /// Parameter count that is compute-optimal for the unique data, capped at `N`.
    pub u_n: f64,
}

/// `D' = U_D + U_D R_D* (1 - e^{-R_D/R_D*})` and the analogous `N'`.
///
/// `R_D = D / U_D - 1`. `U_N` defaults to the compute-optimal model size for
/// `U_D` tokens under `c.base` (closed-form allocation), and is capped at `N`
/// so that `R_N >= 0`.
pub fn muennighoff_effective(
    c: &MuennighoffCoefficients,
    n_params: f64,
    tokens: f64,
    unique_tokens: f64,
    u_n: Option<f64>,
) -> Result<EffectiveSizes> {
    if tokens < unique_tokens {
        return Err(Error::arg("tokens", "total tokens below unique tokens"));
    }
    if !(n_params > 0.0 && unique_tokens > 0.0) {
        return Err(Error::arg("n_params/unique_tokens", "must be positive"));
    }
    let r_d = tokens / unique_tokens - 1.0;
    let d_eff = half_life_data(unique_tokens, r_d, c.r_d_star);
    let u_n = u_n
        .unwrap_or_else(|| crate::allocate::compute_optimal_params_for_tokens(&c.base, unique_tokens))
        .min(n_params);
    let r_n = n_params / u_n - 1.0;
    let n_eff = half_life_data(u_n, r_n, c.r_n_star);
    Ok(EffectiveSizes { d_eff, n_eff, u_n })
}

/// Loss with both effective counts substituted into the base law.
pub fn eval_muennighoff_law(
    c: &MuennighoffCoefficients,
    n_params: f64,
    tokens: f64,
    unique_tokens: f64,
) -> Result<f64> {
    let eff = muennighoff_effective(c, n_params, tokens, unique_tokens, None)?;
    Ok(c.base.eval(eff.n_eff, eff.d_eff))
}

/// Serializes `f64::INFINITY` as the string `"inf"` (JSON has no infinity).
mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr<'a> {
        Num(f64),
        Str(&'a str),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str("inf") => Ok(f64::INFINITY),
            Repr::Str(other) => Err(serde::de::Error::custom(alloc::format!("expected number or \"inf\", got {other}"))),
        }
    }
}

/// Which law a fit targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    Compute,
    Data,
    Alt1,
    Alt2,
}

impl LawKind {
    pub const ALL: [LawKind; 4] = [LawKind::Compute, LawKind::Data, LawKind::Alt1, LawKind::Alt2];

    pub fn as_str(self) -> &'static str {
        match self {
            LawKind::Compute => "compute",
            LawKind::Data => "data",
            LawKind::Alt1 => "alt1",
            LawKind::Alt2 => "alt2",
        }
    }

    /// Coefficient names in parameter-vector order.
    pub fn names(self) -> &'static [&'static str] {
        match self {
            LawKind::Compute => &["E", "A", "B", "alpha", "beta"],
            LawKind::Data => &["E", "A", "B", "alpha", "beta", "c_p", "m_p", "k_p", "p_e", "gamma"],
            LawKind::Alt1 => &["E", "A", "B", "alpha", "beta", "mu", "delta_pen", "gamma", "r_d_star"],
            LawKind::Alt2 => &[
                "E", "A", "B", "alpha", "beta", "mu", "delta_pen", "gamma", "r_d_star", "kappa", "eta",
                "tau",
            ],
        }
    }

    pub fn n_coefficients(self) -> usize {
        self.names().len()
    }
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LawKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LawKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::arg("law", alloc::format!("unknown law `{s}` (compute|data|alt1|alt2)")))
    }
}

/// Coordinates of one observation as the laws see it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawInput {
    pub n_params: f64,
    pub tokens: f64,
    pub unique_tokens: f64,
    pub epochs: f64,
}

impl From<&RunRecord> for LawInput {
    fn from(r: &RunRecord) -> Self {
        LawInput {
            n_params: r.n_params,
            tokens: r.total_tokens,
            unique_tokens: r.unique_tokens,
            epochs: r.epochs,
        }
    }
}

/// Coefficients of any fittable law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficients {
    // Variant order matters for untagged deserialization: most fields first.
    Alt2(AltLawV2Coefficients),
    Alt1(AltLawV1Coefficients),
    Data(DataLawCoefficients),
    Compute(LawCoefficients),
}

impl Coefficients {
    pub fn kind(&self) -> LawKind {
        match self {
            Coefficients::Compute(_) => LawKind::Compute,
            Coefficients::Data(_) => LawKind::Data,
            Coefficients::Alt1(_) => LawKind::Alt1,
            Coefficients::Alt2(_) => LawKind::Alt2,
        }
    }

    /// Predicted loss. The compute law reads total tokens; the others read `(U_D, e)`.
    pub fn predict(&self, x: &LawInput) -> f64 {
        match self {
            Coefficients::Compute(c) => c.eval(x.n_params, x.tokens),
            Coefficients::Data(c) => eval_data_law(c, x.n_params, x.unique_tokens, x.epochs),
            Coefficients::Alt1(c) => eval_alt_v1(c, x.n_params, x.unique_tokens, x.epochs),
            Coefficients::Alt2(c) => eval_alt_v2(c, x.n_params, x.unique_tokens, x.epochs),
        }
    }

    pub fn is_sane(&self) -> bool {
        match self {
            Coefficients::Compute(c) => c.is_sane(),
            Coefficients::Data(c) => c.is_sane(),
            Coefficients::Alt1(c) => c.is_sane(),
            Coefficients::Alt2(c) => c.is_sane(),
        }
    }

    /// Values in [`LawKind::names`] order.
    pub fn to_vec(&self) -> Vec<f64> {
        match *self {
            Coefficients::Compute(c) => vec![c.e, c.a, c.b, c.alpha, c.beta],
            Coefficients::Data(c) => {
                vec![c.e, c.a, c.b, c.alpha, c.beta, c.c_p, c.m_p, c.k_p, c.p_e, c.gamma]
            }
            Coefficients::Alt1(c) => {
                vec![c.e, c.a, c.b, c.alpha, c.beta, c.mu, c.delta, c.gamma_pen, c.r_d_star]
            }
            Coefficients::Alt2(c) => vec![
                c.e, c.a, c.b, c.alpha, c.beta, c.mu, c.delta, c.gamma_pen, c.r_d_star, c.kappa,
                c.eta, c.tau,
            ],
        }
    }

    /// Inverse of [`Coefficients::to_vec`]; `v.len()` must match the kind.
    pub fn from_slice(kind: LawKind, v: &[f64]) -> Result<Self> {
        if v.len() != kind.n_coefficients() {
            return Err(Error::arg("coefficients", "wrong number of values for law"));
        }
        Ok(match kind {
            LawKind::Compute => Coefficients::Compute(LawCoefficients {
                e: v[0],
                a: v[1],
                b: v[2],
                alpha: v[3],
                beta: v[4],
            }),
            LawKind::Data => Coefficients::Data(DataLawCoefficients {
                e: v[0],
                a: v[1],
                b: v[2],
                alpha: v[3],
                beta: v[4],
                c_p: v[5],
                m_p: v[6],
                k_p: v[7],
                p_e: v[8],
                gamma: v[9],
            }),
            LawKind::Alt1 => Coefficients::Alt1(AltLawV1Coefficients {
                e: v[0],
                a: v[1],
                b: v[2],
                alpha: v[3],
                beta: v[4],
                mu: v[5],
                delta: v[6],
                gamma_pen: v[7],
                r_d_star: v[8],
            }),
            LawKind::Alt2 => Coefficients::Alt2(AltLawV2Coefficients {
                e: v[0],
                a: v[1],
                b: v[2],
                alpha: v[3],
                beta: v[4],
                mu: v[5],
                delta: v[6],
                gamma_pen: v[7],
                r_d_star: v[8],
                kappa: v[9],
                eta: v[10],
                tau: v[11],
            }),
        })
    }
}
