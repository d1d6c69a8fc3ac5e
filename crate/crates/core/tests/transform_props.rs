use aluthge_core::corpus::{CorpusKind, MatrixSampler};
use aluthge_core::linalg::{polar_decompose, ComplexMatrix, C64};
use aluthge_core::means::{catalog, OperatorMean};
use aluthge_core::transform::{
    aluthge_closed_form, aluthge_quadrature_oracle, aluthge_transform, property_residuals,
    ClosedFormKind, QuadratureOptions,
};
use aluthge_core::Error;
use proptest::prelude::*;

fn kind_of(k: u8) -> CorpusKind {
    CorpusKind::ALL[k as usize % CorpusKind::ALL.len()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn structural_identities(seed in any::<u64>(), m in 2usize..7, k in any::<u8>()) {
        let mut s = MatrixSampler::new(seed);
        let t = s.sample(kind_of(k), m);
        let alpha = s.gaussian() + C64::new(0.05, 0.0);
        let v = s.haar_unitary(m);
        for mean in catalog() {
            let r = property_residuals(&t, &mean, alpha, &v).unwrap();
            prop_assert!(r.max() <= 1e-9, "{} on {:?}: {:?}", mean.name(), kind_of(k), r);
        }
    }

    #[test]
    fn closed_forms_agree(seed in any::<u64>(), m in 2usize..7, singular in any::<bool>(), l in 0.0f64..=1.0) {
        let mut s = MatrixSampler::new(seed);
        let t = if singular { s.singular(m) } else { s.invertible(m) };
        let scale = t.frobenius_norm();
        let g = aluthge_transform(&t, &OperatorMean::geometric(l)).unwrap().delta;
        prop_assert!(g.distance(&aluthge_closed_form(&t, ClosedFormKind::Geometric(l)).unwrap()) <= 1e-9 * scale);
        let a = aluthge_transform(&t, &OperatorMean::arithmetic(l)).unwrap().delta;
        prop_assert!(a.distance(&aluthge_closed_form(&t, ClosedFormKind::Arithmetic(l)).unwrap()) <= 1e-9 * scale);
    }

    #[test]
    fn transform_of_normal_is_itself(seed in any::<u64>(), m in 2usize..7) {
        let t = MatrixSampler::new(seed).normal(m);
        for mean in catalog() {
            let d = aluthge_transform(&t, &mean).unwrap().delta;
            prop_assert!(d.distance(&t) <= 1e-8 * t.spectral_norm(), "{}", mean.name());
        }
    }
}

#[test]
fn arithmetic_half_on_invertible_is_mean_transform() {
    let t = MatrixSampler::new(5).invertible(4);
    let p = polar_decompose(&t).unwrap();
    let mean_transform = (&(&p.isometry_part * &p.positive_part)
        + &(&p.positive_part * &p.isometry_part))
        .scale(C64::new(0.5, 0.0));
    let d = aluthge_transform(&t, &OperatorMean::arithmetic(0.5))
        .unwrap()
        .delta;
    assert!(d.distance(&mean_transform) < 1e-13);
}

#[test]
fn quadrature_matches_hadamard_on_measure_means() {
    let t = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 2.0, 0.0]).unwrap();
    let mut sampler = MatrixSampler::new(8);
    let means = [
        OperatorMean::harmonic(0.5),
        OperatorMean::arithmetic(0.3),
        OperatorMean::geometric(0.5),
        OperatorMean::logarithmic(),
    ];
    for x in [t, sampler.invertible(3), sampler.invertible(5)] {
        for mean in &means {
            let q = aluthge_quadrature_oracle(&x, mean, QuadratureOptions::default()).unwrap();
            let h = aluthge_transform(&x, mean).unwrap().delta;
            assert!(
                q.distance(&h) <= 1e-6 * x.spectral_norm(),
                "{}",
                mean.name()
            );
        }
    }
}

#[test]
fn quadrature_error_paths() {
    let singular = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
    let err = aluthge_quadrature_oracle(
        &singular,
        &OperatorMean::harmonic(0.5),
        QuadratureOptions::default(),
    );
    assert!(matches!(err, Err(Error::SingularInput { .. })));
    let t = MatrixSampler::new(1).invertible(3);
    let no_measure = OperatorMean::power(0.5, 0.5).unwrap();
    let err = aluthge_quadrature_oracle(&t, &no_measure, QuadratureOptions::default());
    assert!(matches!(err, Err(Error::MeasureMissing(_))));
}
