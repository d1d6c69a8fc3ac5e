use aluthge_core::corpus::MatrixSampler;
use aluthge_core::dynamics::{
    arithmetic_iterate_closed_form, iterate, min_distinct_phase_gap, nth_iterate,
    predict_arithmetic_limit, unitary_phases, PHASE_MATCH_TOL,
};
use aluthge_core::linalg::{polar_decompose, ComplexMatrix};
use aluthge_core::means::{catalog, OperatorMean};
use aluthge_core::verify::phase_filtered_invertible;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn iterates_preserve_trace_and_shrink_norm(seed in any::<u64>(), m in 2usize..6, singular in any::<bool>()) {
        let mut s = MatrixSampler::new(seed);
        let t = if singular { s.singular(m) } else { s.ginibre(m) };
        let norm = t.spectral_norm();
        for mean in catalog() {
            let trace = iterate(&t, &mean, 25, 1e-300).unwrap();
            let mut prev = norm;
            for (k, x) in trace.iterates.iter().enumerate() {
                prop_assert!((x.trace() - t.trace()).norm() <= 1e-9 * norm, "{} step {k}", mean.name());
                let here = x.spectral_norm();
                prop_assert!(here <= prev + 1e-9 * norm, "{} step {k}: {here} > {prev}", mean.name());
                prev = here;
            }
            prop_assert_eq!(trace.defects.len(), trace.step_deltas.len());
            prop_assert_eq!(trace.defects.len(), trace.steps());
        }
    }

    #[test]
    fn closed_form_equals_iteration(seed in any::<u64>(), m in 2usize..6) {
        let t = MatrixSampler::new(seed).invertible(m);
        let mean = OperatorMean::arithmetic(0.5);
        let mut x = t.clone();
        for n in 0..=10 {
            if n > 0 {
                x = nth_iterate(&x, &mean, 1).unwrap();
            }
            let c = arithmetic_iterate_closed_form(&t, n).unwrap();
            prop_assert!(c.distance(&x) <= 1e-8 * t.spectral_norm(), "n = {n}");
        }
    }

    #[test]
    fn predicted_limit_is_normal_with_same_trace(seed in any::<u64>(), m in 2usize..7) {
        let t = MatrixSampler::new(seed).invertible(m);
        let n = predict_arithmetic_limit(&t).unwrap();
        let norm = t.spectral_norm();
        prop_assert!(n.normality_defect() <= 1e-8 * norm * norm);
        prop_assert!((n.trace() - t.trace()).norm() <= 1e-10 * norm * m as f64);
    }
}

#[test]
fn well_separated_phases_converge_to_predicted_limit() {
    let mut s = MatrixSampler::new(2024);
    let (matrices, _) = phase_filtered_invertible(&mut s, 5, 6, 0.5).unwrap();
    let mean = OperatorMean::arithmetic(0.5);
    for t in &matrices {
        let norm = t.spectral_norm();
        let trace = iterate(t, &mean, 2000, 1e-10).unwrap();
        assert!(trace.converged);
        let limit = trace.limit.as_ref().unwrap();
        assert!(limit.normality_defect() <= 1e-6 * norm * norm);
        assert!((limit.trace() - t.trace()).norm() <= 1e-8 * norm * 5.0);
        assert!(limit.distance(&predict_arithmetic_limit(t).unwrap()) <= 1e-5 * norm);
        let rate = trace.rate_estimate.unwrap();
        let (phases, _) = unitary_phases(&polar_decompose(t).unwrap().isometry_part).unwrap();
        let gap = min_distinct_phase_gap(&phases, PHASE_MATCH_TOL);
        // The slowest mode decays like cos(gap/2) per step.
        assert!(rate <= (gap / 2.0).cos() + 1e-2, "rate {rate} vs gap {gap}");
    }
}

#[test]
fn singular_iteration_runs_without_claims() {
    let t = MatrixSampler::new(3).singular(4);
    let trace = iterate(&t, &OperatorMean::arithmetic(0.5), 50, 1e-10).unwrap();
    assert!(trace.steps() >= 1);
    assert!(predict_arithmetic_limit(&t).is_err());
}

#[test]
fn closed_form_handles_large_orders() {
    let t = MatrixSampler::new(4).invertible(3);
    let direct = nth_iterate(&t, &OperatorMean::arithmetic(0.5), 80).unwrap();
    let closed = arithmetic_iterate_closed_form(&t, 80).unwrap();
    assert!(closed.distance(&direct) <= 1e-8 * t.spectral_norm());
    let kernel_ok =
        ComplexMatrix::from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(arithmetic_iterate_closed_form(&kernel_ok, 4).is_ok());
}
