use aluthge_core::corpus::MatrixSampler;
use aluthge_core::linalg::{hermitian_eig, polar_decompose, svd, ComplexMatrix, C64};
use proptest::prelude::*;

fn random_hermitian(seed: u64, m: usize) -> ComplexMatrix {
    let g = MatrixSampler::new(seed).ginibre(m);
    &g + &g.adjoint()
}

fn random_matrix(seed: u64, m: usize, kind: u8) -> ComplexMatrix {
    let mut s = MatrixSampler::new(seed);
    match kind % 4 {
        0 => s.ginibre(m),
        1 => s.singular(m),
        2 => s.normal(m),
        _ => s.shift_truncation(m),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermitian_reconstruction(seed in any::<u64>(), m in 1usize..9) {
        let a = random_hermitian(seed, m);
        let eig = hermitian_eig(&a).unwrap();
        let w = &eig.eigenvectors;
        prop_assert!((&w.adjoint() * w).distance(&ComplexMatrix::identity(m)) <= 1e-12 * m as f64);
        prop_assert!(eig.reconstruct().distance(&a) <= 1e-10 * a.frobenius_norm());
        prop_assert!(eig.eigenvalues.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn polar_invariants(seed in any::<u64>(), m in 2usize..8, kind in any::<u8>()) {
        let t = random_matrix(seed, m, kind);
        let p = polar_decompose(&t).unwrap();
        let scale = t.frobenius_norm();
        let (u, abs) = (&p.isometry_part, &p.positive_part);
        prop_assert!((u * abs).distance(&t) <= 1e-10 * scale);
        prop_assert!(abs.hermitian_asymmetry() <= 1e-12);
        prop_assert!(p.spectral.eigenvalues[0] >= -1e-12 * p.norm);
        // U†U is the projection onto range(|T|).
        let proj = &u.adjoint() * u;
        prop_assert!((&proj * abs).distance(abs) <= 1e-10 * scale);
        prop_assert!((&proj * &proj).distance(&proj) <= 1e-10 * m as f64);
        prop_assert!(proj.distance(&p.support_projection()) <= 1e-10 * m as f64);
        prop_assert_eq!(p.rank, svd(&t).unwrap().numerical_rank());
    }

    #[test]
    fn spectral_norm_bounded_by_frobenius(seed in any::<u64>(), m in 1usize..8, kind in any::<u8>()) {
        let t = random_matrix(seed, m.max(2), kind);
        prop_assert!(t.spectral_norm() <= t.frobenius_norm() * (1.0 + 1e-14));
        let s = svd(&t).unwrap();
        prop_assert!((t.spectral_norm() - s.max_singular_value()).abs() <= 1e-12 * t.frobenius_norm());
    }
}

#[test]
fn norm_examples() {
    let d = ComplexMatrix::from_diagonal(&[C64::new(3.0, 0.0), C64::new(0.0, -4.0)]);
    assert!((d.spectral_norm() - 4.0).abs() < 1e-14);
    let jordan = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
    assert!((jordan.normality_defect() - 2f64.sqrt()).abs() < 1e-14);
    let u = MatrixSampler::new(9).haar_unitary(5);
    assert!(u.normality_defect() < 1e-13);
}

#[test]
fn svd_of_rank_deficient_matrices_reconstructs() {
    let mut s = MatrixSampler::new(11);
    for i in 0..200 {
        let t = s.singular(3 + i % 5);
        let d = svd(&t).unwrap();
        let sigma = ComplexMatrix::from_real_diagonal(&d.singular_values);
        let rec = &(&d.left * &sigma) * &d.right.adjoint();
        assert!(rec.distance(&t) <= 1e-12 * t.frobenius_norm());
        assert!(d.numerical_rank() < t.rows());
    }
}
