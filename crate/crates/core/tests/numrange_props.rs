use aluthge_core::corpus::{CorpusKind, MatrixSampler};
use aluthge_core::linalg::{ComplexMatrix, C64};
use aluthge_core::means::{catalog, dominance_chain, OperatorMean};
use aluthge_core::numrange::{
    norm_probe, numerical_range, range_included, range_of_transform_report, DEFAULT_ANGLES,
};
use aluthge_core::Error;
use proptest::prelude::*;

fn kind_of(k: u8) -> CorpusKind {
    CorpusKind::ALL[k as usize % CorpusKind::ALL.len()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn boundary_is_convex(seed in any::<u64>(), m in 2usize..8, k in any::<u8>()) {
        let t = MatrixSampler::new(seed).sample(kind_of(k), m);
        let r = numerical_range(&t, 360).unwrap();
        prop_assert!(r.half_plane_violation() <= 1e-9 * t.spectral_norm());
    }

    #[test]
    fn translation_moves_the_range(seed in any::<u64>(), m in 2usize..7, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let t = MatrixSampler::new(seed).ginibre(m);
        let c = C64::new(re, im);
        let shifted = &t + &ComplexMatrix::identity(m).scale(c);
        let (a, b) = (numerical_range(&t, 240).unwrap(), numerical_range(&shifted, 240).unwrap());
        let tol = 1e-10 * (t.spectral_norm() + c.norm());
        for k in 0..a.angles.len() {
            let rot = C64::from_polar(1.0, -a.angles[k]);
            prop_assert!((b.support_values[k] - a.support_values[k] - (rot * c).re).abs() <= tol);
            prop_assert!((b.points[k] - a.points[k] - c).norm() <= 1e-8 * (t.spectral_norm() + c.norm()));
        }
    }

    #[test]
    fn every_transform_range_sits_inside_the_original(seed in any::<u64>(), m in 2usize..7, k in any::<u8>()) {
        let t = MatrixSampler::new(seed).sample(kind_of(k), m);
        let report = range_of_transform_report(&t, &catalog(), 180, 1e-9).unwrap();
        for i in 1..report.entries.len() {
            let inc = report.inclusion_between(i, 0);
            prop_assert!(inc.included, "{}: {}", report.entries[i].label, inc.max_violation);
        }
    }

    #[test]
    fn inclusion_is_transitive(seed in any::<u64>(), m in 2usize..6) {
        let t = MatrixSampler::new(seed).invertible(m);
        let report = range_of_transform_report(&t, &dominance_chain(), 180, 1e-9).unwrap();
        let n = report.entries.len();
        for i in 0..n {
            prop_assert!(report.inclusion[i][i]);
            for j in 0..n {
                for l in 0..n {
                    if report.inclusion[i][j] && report.inclusion[j][l] {
                        // Each inclusion can absorb one tolerance, so chained inclusions use twice as much.
                        prop_assert!(report.violations[i][l] <= 2.0 * report.tolerance);
                    }
                }
            }
        }
    }
}

#[test]
fn geometric_range_inside_original_on_jordan_block() {
    let t = ComplexMatrix::from_real(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0]).unwrap();
    let report =
        range_of_transform_report(&t, &[OperatorMean::geometric(0.5)], DEFAULT_ANGLES, 1e-9)
            .unwrap();
    assert!(report.inclusion[1][0]);
    assert!(report.entries[0].label == "T");
}

#[test]
fn norm_probe_on_normal_matrix_is_flat() {
    let t = MatrixSampler::new(4).normal(4);
    let probes: Vec<C64> = (0..16).map(|k| C64::from_polar(2.0, k as f64)).collect();
    let excess = norm_probe(
        &t,
        &OperatorMean::harmonic(0.5),
        &OperatorMean::arithmetic(0.5),
        &probes,
    )
    .unwrap();
    assert!(excess.abs() <= 1e-10);
}

#[test]
fn grids_must_match() {
    let t = MatrixSampler::new(2).ginibre(3);
    let a = numerical_range(&t, 64).unwrap();
    let b = numerical_range(&t, 65).unwrap();
    assert!(matches!(
        range_included(&a, &b, 1e-9),
        Err(Error::GridMismatch)
    ));
    assert!(numerical_range(&t, 4).is_err());
    assert!(range_of_transform_report(&t, &[], 64, 1e-9).is_err());
}
