//! Training-run records, loss-curve smoothing and compute/parameter accounting.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative tolerance used for the `e * U_D = D` and `C = 6ND` consistency checks.
pub const CONSISTENCY_TOL: f64 = 1e-3;

/// Training compute under the `6ND` rule.
#[inline]
pub fn flops_of(n_params: f64, total_tokens: f64) -> f64 {
    6.0 * n_params * total_tokens
}

/// One training run: model size, data budget, compute and final losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub n_params: f64,
    pub unique_tokens: f64,
    pub total_tokens: f64,
    pub epochs: f64,
    pub flops: f64,
    pub final_train_loss: f64,
    pub final_val_loss: Option<f64>,
}

/// Raw field values before missing `epochs`/`flops` are derived.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunFields {
    pub run_id: String,
    pub n_params: f64,
    pub unique_tokens: f64,
    pub total_tokens: f64,
    pub epochs: Option<f64>,
    pub flops: Option<f64>,
    pub final_train_loss: f64,
    pub final_val_loss: Option<f64>,
}

impl RunRecord {
    /// Builds a record, filling `epochs = D / U_D` and `flops = 6ND` when absent,
    /// and checks every record invariant.
    pub fn from_fields(f: RunFields) -> Result<Self> {
        let bad = |reason: String| Error::InvalidRecord { run_id: f.run_id.clone(), reason };
        for (name, v) in [
            ("n_params", f.n_params),
            ("unique_tokens", f.unique_tokens),
            ("total_tokens", f.total_tokens),
            ("final_train_loss", f.final_train_loss),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if f.total_tokens < f.unique_tokens {
            return Err(bad(format!(
                "total<unique ({} < {})",
                f.total_tokens, f.unique_tokens
            )));
        }
        let epochs = f.epochs.unwrap_or(f.total_tokens / f.unique_tokens);
        let flops = f.flops.unwrap_or_else(|| flops_of(f.n_params, f.total_tokens));
        let rec = RunRecord {
            run_id: f.run_id.clone(),
            n_params: f.n_params,
            unique_tokens: f.unique_tokens,
            total_tokens: f.total_tokens,
            epochs,
            flops,
            final_train_loss: f.final_train_loss,
            final_val_loss: f.final_val_loss,
        };
        rec.validate()?;
        Ok(rec)
    }

    /// Convenience constructor for a run whose epochs and FLOPs are derived.
    pub fn new(
        run_id: impl Into<String>,
        n_params: f64,
        unique_tokens: f64,
        total_tokens: f64,
        final_train_loss: f64,
    ) -> Result<Self> {
        Self::from_fields(RunFields {
            run_id: run_id.into(),
            n_params,
            unique_tokens,
            total_tokens,
            final_train_loss,
            ..RunFields::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidRecord { run_id: self.run_id.clone(), reason };
        for (name, v) in [
            ("n_params", self.n_params),
            ("unique_tokens", self.unique_tokens),
            ("total_tokens", self.total_tokens),
            ("epochs", self.epochs),
            ("flops", self.flops),
            ("final_train_loss", self.final_train_loss),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if let Some(v) = self.final_val_loss {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(format!("final_val_loss must be positive, got {v}")));
            }
        }
        if self.total_tokens < self.unique_tokens {
            return Err(bad(format!(
                "total<unique ({} < {})",
                self.total_tokens, self.unique_tokens
            )));
        }
        let implied = self.epochs * self.unique_tokens;
        if ((implied - self.total_tokens) / self.total_tokens).abs() > CONSISTENCY_TOL {
            return Err(bad(format!(
                "epochs * unique_tokens = {implied} disagrees with total_tokens = {}",
                self.total_tokens
            )));
        }
        let c = flops_of(self.n_params, self.total_tokens);
        if ((self.flops - c) / c).abs() > CONSISTENCY_TOL {
            return Err(bad(format!("flops = {} disagrees with 6ND = {c}", self.flops)));
        }
        Ok(())
    }

    /// Selected target loss, if the record carries it.
    pub fn loss(&self, target: LossTarget) -> Option<f64> {
        match target {
            LossTarget::Train => Some(self.final_train_loss),
            LossTarget::Validation => self.final_val_loss,
        }
    }
}

/// Which final loss a fit or an IsoFLOP analysis reads from each record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossTarget {
    #[default]
    Train,
    #[serde(alias = "val")]
    Validation,
}

/// A loss curve for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSeries {
    pub run_id: String,
    points: Vec<(u64, f64)>,
}

impl LossSeries {
    /// Steps must be strictly increasing.
    pub fn new(run_id: impl Into<String>, points: Vec<(u64, f64)>) -> Result<Self> {
        let run_id = run_id.into();
        if let Some(w) = points.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidRecord {
                run_id,
                reason: format!("steps not strictly increasing ({} then {})", w[0].0, w[1].0),
            });
        }
        Ok(Self { run_id, points })
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }

    pub fn losses(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last_loss(&self) -> Option<f64> {
        self.points.last().map(|p| p.1)
    }
}

/// Smooths a loss curve with a truncated Gaussian kernel of `window` taps.
///
/// The kernel has `sigma = window / 6`. Near the ends of the series the kernel
/// is cut off and renormalized over the taps that remain, so no padding values
/// are invented. `window == 1` is the identity.
pub fn gaussian_smooth(series: &LossSeries, window: usize) -> Result<LossSeries> {
    let values: Vec<f64> = series.losses().collect();
    let smoothed = smooth_values(&values, window)?;
    let points = series.points.iter().zip(smoothed).map(|(&(s, _), v)| (s, v)).collect();
    Ok(LossSeries { run_id: series.run_id.clone(), points })
}

/// Slice version of [`gaussian_smooth`].
pub fn smooth_values(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::arg("window", format!("must be odd and >= 1, got {window}")));
    }
    if values.is_empty() {
        return Err(Error::arg("series", "must contain at least one point"));
    }
    let half = window / 2;
    let kernel = gaussian_kernel(window);
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        let mut acc = 0.0;
        let mut norm = 0.0;
        for j in lo..=hi {
            let w = kernel[j + half - i];
            acc += w * values[j];
            norm += w;
        }
        out.push(acc / norm);
    }
    Ok(out)
}

/// Unnormalized Gaussian taps for an odd window, centre at index `window / 2`.
pub fn gaussian_kernel(window: usize) -> Vec<f64> {
    let half = (window / 2) as f64;
    let sigma = window as f64 / 6.0;
    (0..window)
        .map(|k| {
            let x = k as f64 - half;
            (-0.5 * (x / sigma) * (x / sigma)).exp()
        })
        .collect()
}

/// Cuts a curve that shows a second descent after overfitting.
///
/// Looks for the first running minimum after which the loss stays above that
/// minimum for at least `min_rise_epochs` epochs (`steps_per_epoch` converts
/// steps to epochs). The series is kept through the first peak of that rise;
/// whatever follows (the second descent) is dropped. Curves without such a rise
/// are returned unchanged.
pub fn truncate_second_descent(
    series: &LossSeries,
    steps_per_epoch: f64,
    min_rise_epochs: f64,
) -> Result<LossSeries> {
    if !(steps_per_epoch > 0.0) || !(min_rise_epochs > 0.0) {
        return Err(Error::arg("steps_per_epoch/min_rise_epochs", "must be positive"));
    }
    let pts = &series.points;
    let mut best = f64::INFINITY;
    for m in 0..pts.len() {
        if pts[m].1 >= best {
            continue;
        }
        best = pts[m].1;
        // Does the loss stay above this minimum for the required width?
        let mut j = m + 1;
        while j < pts.len() && pts[j].1 > best {
            j += 1;
        }
        let last_above = j - 1;
        if last_above == m {
            continue;
        }
        let width = (pts[last_above].0 - pts[m].0) as f64 / steps_per_epoch;
        if width < min_rise_epochs {
            continue;
        }
        // Keep through the first peak of the rise.
        let mut p = m + 1;
        while p < last_above && pts[p + 1].1 >= pts[p].1 {
            p += 1;
        }
        if p + 1 >= pts.len() {
            break;
        }
        return Ok(LossSeries { run_id: series.run_id.clone(), points: pts[..=p].to_vec() });
    }
    Ok(series.clone())
}

/// MLP block layout used by [`estimate_params`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MlpKind {
    /// Up and down projections: `2 * d_model * ffw_size`.
    #[default]
    Dense,
    /// Gated (SwiGLU) block with gate, up and down projections: `3 * d_model * ffw_size`.
    Gated,
}

/// Transformer shape as listed in an architecture table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub d_model: u64,
    pub ffw_size: u64,
    pub kv_size: u64,
    pub n_heads: u64,
    pub n_layers: u64,
    pub vocab_size: u64,
    #[serde(default)]
    pub mlp: MlpKind,
}

impl ArchSpec {
    /// GPT-2 tokenizer vocabulary.
    pub const DEFAULT_VOCAB: u64 = 50257;

    pub fn new(d_model: u64, ffw_size: u64, kv_size: u64, n_heads: u64, n_layers: u64) -> Self {
        ArchSpec {
            d_model,
            ffw_size,
            kv_size,
            n_heads,
            n_layers,
            vocab_size: Self::DEFAULT_VOCAB,
            mlp: MlpKind::Dense,
        }
    }

    pub fn with_mlp(mut self, mlp: MlpKind) -> Self {
        self.mlp = mlp;
        self
    }

    /// `n_layers` may be zero (embedding-only model); every other dimension must be positive.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d_model", self.d_model),
            ("ffw_size", self.ffw_size),
            ("kv_size", self.kv_size),
            ("n_heads", self.n_heads),
            ("vocab_size", self.vocab_size),
        ] {
            if v == 0 {
                return Err(Error::arg(name, "must be >= 1"));
            }
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return Err(Error::arg(
                "n_heads",
                format!("d_model {} not divisible by {} heads", self.d_model, self.n_heads),
            ));
        }
        Ok(())
    }
}

/// Parameter count of a bias-free pre-norm transformer.
///
/// Per layer: Q and O projections (`2 d^2`), K and V projections of width
/// `n_heads * kv_size` (`2 d h kv`), the MLP block (see [`MlpKind`]) and two
/// norm gains (`2 d`). Untied input embeddings add `vocab_size * d_model`.
pub fn estimate_params(arch: &ArchSpec, include_embeddings: bool) -> u64 {
    let d = arch.d_model;
    let attention = 2 * d * d + 2 * d * arch.n_heads * arch.kv_size;
    let mlp = match arch.mlp {
        MlpKind::Dense => 2 * d * arch.ffw_size,
        MlpKind::Gated => 3 * d * arch.ffw_size,
    };
    let per_layer = attention + mlp + 2 * d;
    let embeddings = if include_embeddings { arch.vocab_size * d } else { 0 };
    arch.n_layers * per_layer + embeddings
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn series(values: &[f64]) -> LossSeries {
        LossSeries::new("s", values.iter().enumerate().map(|(i, &v)| (i as u64, v)).collect())
            .unwrap()
    }

    #[test]
    fn record_fills_epochs_and_flops() {
        let r = RunRecord::new("a", 1e9, 96e9, 96e9, 2.9).unwrap();
        assert_eq!(r.epochs, 1.0);
        assert_eq!(r.flops, 5.76e20);
    }

    #[test]
    fn record_rejects_total_below_unique() {
        let err = RunRecord::new("short", 1e9, 96e9, 10e9, 2.9).unwrap_err();
        match err {
            Error::InvalidRecord { run_id, reason } => {
                assert_eq!(run_id, "short");
                assert!(reason.contains("total<unique"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn record_rejects_inconsistent_flops() {
        let f = RunFields {
            run_id: "x".into(),
            n_params: 1e9,
            unique_tokens: 1e10,
            total_tokens: 1e10,
            flops: Some(7e19),
            final_train_loss: 3.0,
            ..Default::default()
        };
        assert!(RunRecord::from_fields(f).is_err());
    }

    #[test]
    fn flops_examples() {
        assert_eq!(flops_of(1.0, 1.0), 6.0);
        let c = flops_of(1e9, 93.5e9);
        assert!((c - 5.61e20).abs() / 5.61e20 < 1e-12);
        assert!((c / 5.62e20 - 1.0).abs() < 3e-3);
        assert!((flops_of(15e9, 1.2e12) / 1.1e23 - 1.0).abs() < 0.02);
    }

    #[test]
    fn smoothing_constant_is_fixed_point() {
        let s = gaussian_smooth(&series(&[3.0, 3.0, 3.0]), 3).unwrap();
        assert!(s.losses().all(|v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn smoothing_impulse_is_symmetric_and_sums_to_one() {
        let out = smooth_values(&[0.0, 0.0, 1.0, 0.0, 0.0], 3).unwrap();
        // Interior points see the full kernel, so the impulse mass is preserved.
        let k = gaussian_kernel(3);
        let norm: f64 = k.iter().sum();
        let expected = [0.0, k[0] / norm, k[1] / norm, k[2] / norm, 0.0];
        for (a, b) in out.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((out[1] - out[3]).abs() < 1e-15);
    }

    #[test]
    fn smoothing_window_one_is_identity() {
        let v = [1.0, 5.0, 2.0, 8.0];
        assert_eq!(smooth_values(&v, 1).unwrap(), v.to_vec());
    }

    #[test]
    fn smoothing_rejects_even_window() {
        assert!(smooth_values(&[1.0, 2.0], 4).is_err());
        assert!(smooth_values(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn series_requires_increasing_steps() {
        assert!(LossSeries::new("s", vec![(1, 1.0), (1, 2.0)]).is_err());
        assert!(LossSeries::new("s", vec![(2, 1.0), (1, 2.0)]).is_err());
    }

    #[test]
    fn truncation_drops_second_descent() {
        // descent, rise over 4 epochs, second descent
        let v = [5.0, 4.0, 3.0, 3.2, 3.4, 3.6, 3.8, 3.5, 3.0, 2.5];
        let s = series(&v);
        let t = truncate_second_descent(&s, 1.0, 3.0).unwrap();
        assert_eq!(t.len(), 7);
        assert_eq!(t.last_loss(), Some(3.8));
        // a short blip is not a rise
        let t = truncate_second_descent(&s, 1.0, 10.0).unwrap();
        assert_eq!(t.len(), v.len());
        // monotone curve untouched
        let m = series(&[5.0, 4.0, 3.0]);
        assert_eq!(truncate_second_descent(&m, 1.0, 1.0).unwrap(), m);
    }

    #[test]
    fn params_match_architecture_rows() {
        let a = ArchSpec::new(2048, 8192, 128, 16, 25);
        let n = estimate_params(&a, false) as f64;
        assert!((n / 1258e6 - 1.0).abs() < 0.10);
        let b = ArchSpec::new(4096, 16384, 128, 32, 42);
        let n = estimate_params(&b, false) as f64;
        assert!((n / 8456e6 - 1.0).abs() < 0.10);
    }

    #[test]
    fn gated_mlp_adds_half_the_mlp() {
        let a = ArchSpec::new(2048, 8192, 128, 16, 1);
        let dense = estimate_params(&a, false);
        let gated = estimate_params(&a.with_mlp(MlpKind::Gated), false);
        assert_eq!(gated - dense, 2048 * 8192);
    }

    #[test]
    fn zero_layers_is_embedding_only() {
        let a = ArchSpec::new(128, 512, 32, 4, 0);
        assert_eq!(estimate_params(&a, true), 50257 * 128);
        assert_eq!(estimate_params(&a, false), 0);
    }

    #[test]
    fn arch_validation() {
        assert!(ArchSpec::new(128, 512, 32, 3, 2).validate().is_err());
        assert!(ArchSpec::new(128, 512, 32, 4, 0).validate().is_ok());
    }
}
