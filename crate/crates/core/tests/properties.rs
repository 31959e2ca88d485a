use approx::assert_relative_eq;
use proptest::prelude::*;

use dlmscale::allocate::{closed_form_allocation, joint_optimum, max_epochs, EpochCriterion, DEFAULT_E_BOUNDS, DEFAULT_N_BOUNDS};
use dlmscale::builtin::{paper_compute, paper_data};
use dlmscale::fit::Objective;
use dlmscale::ingest::{flops_of, smooth_values, LossTarget, RunRecord};
use dlmscale::isoflop::fit_frontier;
use dlmscale::laws::{effective_data, eval_data_law, huber, Coefficients, LawCoefficients, LawKind};
use dlmscale::optim::geomspace;
use dlmscale::oracle::{brute_force_epoch_opt, brute_force_joint_opt};

fn law() -> impl Strategy<Value = LawCoefficients> {
    (0.0f64..3.0, 10.0f64..5000.0, 10.0f64..5000.0, 0.1f64..0.8, 0.1f64..0.8)
        .prop_map(|(e, a, b, alpha, beta)| LawCoefficients { e, a, b, alpha, beta })
}

proptest! {
    #[test]
    fn huber_is_even_and_continuous(r in -1.0f64..1.0, delta in 1e-4f64..0.5) {
        prop_assert_eq!(huber(r, delta), huber(-r, delta));
        prop_assert!(huber(r, delta) >= 0.0);
        prop_assert!(huber(r, delta) <= 0.5 * r * r + 1e-15);
        let at = 0.5 * delta * delta;
        assert_relative_eq!(huber(delta * (1.0 + 1e-12), delta), at, max_relative = 1e-9);
    }

    #[test]
    fn flops_scale_linearly(n in 1e6f64..1e12, d in 1e6f64..1e13, k in 0.01f64..100.0) {
        assert_relative_eq!(flops_of(k * n, d), k * flops_of(n, d), max_relative = 1e-15);
    }

    #[test]
    fn smoothing_commutes_with_affine_maps(
        xs in proptest::collection::vec(-5.0f64..5.0, 1..200),
        half in 0usize..20,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let w = 2 * half + 1;
        let s = smooth_values(&xs, w).unwrap();
        let mapped: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let sm = smooth_values(&mapped, w).unwrap();
        prop_assert_eq!(s.len(), xs.len());
        for (u, v) in s.iter().zip(&sm) {
            prop_assert!((a * u + b - v).abs() <= 1e-9);
        }
    }

    #[test]
    fn peak_epoch_scale_monotone(n in 1e7f64..1e12, u in 1e7f64..1e14, k in 1.01f64..10.0) {
        let c = paper_data();
        prop_assert!(c.peak_epoch_scale(n, k * u) > c.peak_epoch_scale(n, u));
        prop_assert!(c.peak_epoch_scale(k * n, u) < c.peak_epoch_scale(n, u));
    }

    #[test]
    fn one_epoch_reduces_to_compute_law(n in 1e7f64..1e12, u in 1e7f64..1e14) {
        let c = paper_data();
        prop_assert_eq!(effective_data(&c, n, u, 1.0), u);
        assert_relative_eq!(eval_data_law(&c, n, u, 1.0), c.learning().eval(n, u), max_relative = 1e-12);
    }

    #[test]
    fn closed_form_spends_the_budget(c in law(), budget in 1e18f64..1e28) {
        let r = closed_form_allocation(&c, budget).unwrap();
        assert_relative_eq!(r.a_exp + r.b_exp, 1.0, epsilon = 1e-12);
        assert_relative_eq!(flops_of(r.n_opt, r.d_opt), budget, max_relative = 1e-10);
        // Moving along the iso-FLOP curve never lowers the loss.
        let l0 = c.eval(r.n_opt, r.d_opt);
        for f in [0.9, 1.1] {
            prop_assert!(c.eval(r.n_opt * f, r.d_opt / f) >= l0 - 1e-12 * l0);
        }
    }

    #[test]
    fn derived_frontier_multipliers_multiply_to_a_sixth(c in law()) {
        let minima: Vec<(f64, f64)> = [1e19, 1e20, 1e21, 1e22, 1e23]
            .iter()
            .map(|&b| (b, closed_form_allocation(&c, b).unwrap().n_opt))
            .collect();
        let f = fit_frontier(&minima).unwrap();
        assert_relative_eq!(f.n.multiplier * f.d.multiplier, 1.0 / 6.0, max_relative = 1e-8);
        assert_relative_eq!(f.n.exponent + f.d.exponent, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn objective_ignores_record_order(c in law(), seed in 0u64..1000) {
        let mut runs: Vec<RunRecord> = (0..12)
            .map(|i| {
                let n = 1e7 * 3f64.powi(i % 4);
                let d = 1e9 * 5f64.powi(i / 4);
                RunRecord::new(format!("r{i}"), n, d, d, 3.0 + (i as f64) * 0.01).unwrap()
            })
            .collect();
        let v0 = Objective::new(LawKind::Compute, &runs, LossTarget::Train, 1e-3).unwrap().value(&Coefficients::Compute(c));
        // A deterministic shuffle.
        let k = runs.len();
        for i in 0..k {
            runs.swap(i, (seed as usize * 7 + i * 5) % k);
        }
        let v1 = Objective::new(LawKind::Compute, &runs, LossTarget::Train, 1e-3).unwrap().value(&Coefficients::Compute(c));
        assert_relative_eq!(v0, v1, max_relative = 1e-12);
    }

    #[test]
    fn geomspace_hits_both_ends(lo in 1e-3f64..1e3, span in 1.0f64..1e6, n in 2usize..200) {
        let g = geomspace(lo, lo * span, n);
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!(g[0], lo);
        prop_assert_eq!(g[n - 1], lo * span);
        prop_assert!(g.windows(2).all(|w| w[1] >= w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn epoch_solver_matches_dense_scan(ln in 8.0f64..12.5, lu in 7.0f64..15.0) {
        let (n, u) = (10f64.powf(ln), 10f64.powf(lu));
        let c = paper_data();
        let m = max_epochs(&c, n, u, DEFAULT_E_BOUNDS, EpochCriterion::InteriorPeak).unwrap();
        let b = brute_force_epoch_opt(&c, n, u, 10_000, EpochCriterion::InteriorPeak).unwrap();
        let cell = (1e6f64).ln() / 9_999.0;
        prop_assert!((m.e_opt.ln() - b.e.ln()).abs() <= cell * (1.0 + 1e-9), "{} vs {}", m.e_opt, b.e);
        prop_assert_eq!(m.boundary, b.boundary);
    }

    #[test]
    fn joint_solver_beats_grid(lu in 7.0f64..15.0) {
        let u = 10f64.powf(lu);
        let c = paper_data();
        let j = joint_optimum(&c, u, DEFAULT_N_BOUNDS, DEFAULT_E_BOUNDS).unwrap();
        let b = brute_force_joint_opt(&c, u, (64, 64), DEFAULT_N_BOUNDS, DEFAULT_E_BOUNDS).unwrap();
        prop_assert!(j.predicted_loss <= b.loss + 1e-9);
    }

    #[test]
    fn global_minimum_never_above_interior_pick(ln in 8.0f64..12.5, lu in 7.0f64..15.0) {
        let (n, u) = (10f64.powf(ln), 10f64.powf(lu));
        let c = paper_data();
        let g = max_epochs(&c, n, u, DEFAULT_E_BOUNDS, EpochCriterion::GlobalMinimum).unwrap();
        let i = max_epochs(&c, n, u, DEFAULT_E_BOUNDS, EpochCriterion::InteriorPeak).unwrap();
        prop_assert!(g.predicted_loss <= i.predicted_loss + 1e-12);
    }
}

#[test]
fn paper_compute_exponents_near_half() {
    let r = closed_form_allocation(&paper_compute(), 1e21).unwrap();
    assert!((r.a_exp - 0.5).abs() < 0.005);
}
