//! The generalized Aluthge transformation `Δ_f(T) = Σ_{i,j} P_f(s_i, s_j) P_i U P_j`.
//!
//! The double sum is evaluated in the eigenbasis `W` of `|T|` as a Hadamard
//! product, `Δ = W·(M ∘ W†UW)·W†` with `M = [P_f(s_i, s_j)]`, which costs
//! O(m³) and never forms the projections.
//!
//! Kernel convention for singular `T`: the spectral projections in the sum
//! cover the support of `|T|` only (`Σ P_i = U†U`), so rows of the Hadamard
//! product belonging to zero eigenvalues of `|T|` are dropped. Columns
//! belonging to zero eigenvalues multiply zero entries of `W†UW` because `U`
//! vanishes on `ker |T|`. This reproduces `(1−λ)|T|U + λU†UU|T|` for the
//! arithmetic mean and `|T|^{1−λ}U|T|^λ` for the geometric mean.
//!
//! Two independent routes serve as oracles: the closed forms above
//! ([`aluthge_closed_form`]) and numerical integration of
//! `∫∫ e^{−x(1−λ)|T|⁻¹} U e^{−xλ|T|⁻¹} dx dμ(λ)` ([`aluthge_quadrature_oracle`]).

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{polar_decompose, ComplexMatrix, PolarParts, SpectralData, C64};
use crate::means::OperatorMean;
use crate::quadrature::composite_gauss_legendre;

/// Smallest singular value, relative to the largest, accepted as invertible.
pub const INVERTIBILITY_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct TransformResult {
    pub delta: ComplexMatrix,
    pub mean_name: String,
    pub weight: f64,
    /// Smallest gap between consecutive eigenvalues of `|T|`, relative to `‖T‖`.
    /// Small values mean the eigenbasis is ill-determined (the result is not).
    pub basis_conditioning: f64,
}

/// `Δ_f(T)` for a square matrix `T`.
pub fn aluthge_transform(t: &ComplexMatrix, mean: &OperatorMean) -> Result<TransformResult> {
    let polar = polar_decompose(t)?;
    Ok(transform_from_polar(&polar, mean))
}

/// `Δ_f(T)` from an already computed polar decomposition.
pub fn transform_from_polar(polar: &PolarParts, mean: &OperatorMean) -> TransformResult {
    let delta = perspective_multiplier(&polar.spectral, mean, &polar.isometry_part, true);
    TransformResult {
        delta,
        mean_name: mean.name(),
        weight: mean.weight(),
        basis_conditioning: basis_conditioning(&polar.spectral.eigenvalues, polar.norm),
    }
}

fn basis_conditioning(s: &[f64], norm: f64) -> f64 {
    if s.len() < 2 || norm == 0.0 {
        return 1.0;
    }
    s.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
        / norm
}

/// `Φ(X) = Σ_{i,j} P_f(s_i, s_j) P_i X P_j` over the eigenpairs of a positive matrix.
///
/// With `support_only`, rows belonging to zero eigenvalues are dropped.
pub fn perspective_multiplier(
    spectral: &SpectralData,
    mean: &OperatorMean,
    x: &ComplexMatrix,
    support_only: bool,
) -> ComplexMatrix {
    let s = &spectral.eigenvalues;
    let mut y = spectral.to_eigenbasis(x);
    for i in 0..s.len() {
        for j in 0..s.len() {
            let weight = if support_only && s[i] == 0.0 {
                0.0
            } else {
                mean.perspective(s[i], s[j])
            };
            y[(i, j)] *= weight;
        }
    }
    spectral.from_eigenbasis(&y)
}

/// Families with a closed-form transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedFormKind {
    /// `|T|^{1−λ} U |T|^λ`.
    Geometric(f64),
    /// `(1−λ)|T|U + λU†UU|T|`.
    Arithmetic(f64),
}

impl ClosedFormKind {
    /// The closed form matching `mean`, if any.
    pub fn for_mean(mean: &OperatorMean) -> Option<Self> {
        use crate::means::MeanKind;
        match mean.kind() {
            MeanKind::Geometric => Some(Self::Geometric(mean.weight())),
            MeanKind::Arithmetic => Some(Self::Arithmetic(mean.weight())),
            MeanKind::Power(t) if *t == 1.0 => Some(Self::Arithmetic(mean.weight())),
            _ => None,
        }
    }
}

/// Powers of `|T|` restricted to its support, so `|T|^0 = U†U`.
fn support_power(s: f64, p: f64) -> f64 {
    if s > 0.0 {
        s.powf(p)
    } else {
        0.0
    }
}

/// Closed-form transform for the geometric and arithmetic families.
pub fn aluthge_closed_form(t: &ComplexMatrix, kind: ClosedFormKind) -> Result<ComplexMatrix> {
    let polar = polar_decompose(t)?;
    let u = &polar.isometry_part;
    let abs = &polar.positive_part;
    match kind {
        ClosedFormKind::Geometric(l) => {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::InvalidWeight(l));
            }
            let left = polar.spectral.map(|s| support_power(s, 1.0 - l));
            let right = polar.spectral.map(|s| support_power(s, l));
            Ok(&(&left * u) * &right)
        }
        ClosedFormKind::Arithmetic(l) => {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::InvalidWeight(l));
            }
            let first = (abs * u).scale(C64::new(1.0 - l, 0.0));
            let second = (&(&(&u.adjoint() * u) * u) * abs).scale(C64::new(l, 0.0));
            Ok(&first + &second)
        }
    }
}

/// Discretization of the double integral.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    /// Upper limit of the `x` integral; defaults to `40·‖T‖`.
    pub x_max: Option<f64>,
    /// Total `x` nodes, split into 16-point Gauss–Legendre panels.
    pub x_nodes: usize,
    /// Nodes for a continuous part of the measure.
    pub lambda_nodes: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            x_max: None,
            x_nodes: 400,
            lambda_nodes: 64,
        }
    }
}

fn require_invertible(polar: &PolarParts) -> Result<()> {
    let min_sv = polar.min_singular_value();
    if polar.norm == 0.0 || min_sv < INVERTIBILITY_THRESHOLD * polar.norm {
        return Err(Error::SingularInput {
            min_sv,
            max_sv: polar.norm,
        });
    }
    Ok(())
}

/// `∫_0^1 ∫_0^∞ e^{−x(1−λ)|T|⁻¹} U e^{−xλ|T|⁻¹} dx dμ(λ)` by quadrature.
///
/// The `x` integral is truncated at `x_max`; with the default `40·‖T‖` the
/// neglected tail is below `e⁻⁴⁰` relative. The matrix exponentials are formed
/// through the eigenbasis of `|T|` and multiplied out in the standard basis.
pub fn aluthge_quadrature_oracle(
    t: &ComplexMatrix,
    mean: &OperatorMean,
    opts: QuadratureOptions,
) -> Result<ComplexMatrix> {
    let polar = polar_decompose(t)?;
    require_invertible(&polar)?;
    let measure = mean
        .measure()
        .ok_or_else(|| Error::MeasureMissing(mean.name()))?;

    let x_max = opts.x_max.unwrap_or(40.0 * polar.norm);
    let (panels, per_panel) = if opts.x_nodes >= 16 {
        (opts.x_nodes / 16, 16)
    } else {
        (1, opts.x_nodes.max(1))
    };
    let x_rule = composite_gauss_legendre(panels, per_panel, 0.0, x_max);
    let u = polar.isometry_part.as_matrix();
    let m = u.nrows();
    let inv: Vec<f64> = polar.spectral.eigenvalues.iter().map(|s| 1.0 / s).collect();

    let mut acc = DMatrix::<C64>::zeros(m, m);
    for (lambda, mass) in measure.nodes(opts.lambda_nodes) {
        for &(x, wx) in &x_rule {
            let left = exp_scaled(&polar.spectral, &inv, -x * (1.0 - lambda));
            let right = exp_scaled(&polar.spectral, &inv, -x * lambda);
            acc += (left * u * right) * C64::new(mass * wx, 0.0);
        }
    }
    Ok(ComplexMatrix::wrap(acc))
}

/// `e^{c·|T|⁻¹}` through the eigenbasis.
fn exp_scaled(spectral: &SpectralData, inv: &[f64], c: f64) -> DMatrix<C64> {
    let w = spectral.eigenvectors.as_matrix();
    let mut scaled = w.clone();
    for (j, &r) in inv.iter().enumerate() {
        let e = (c * r).exp();
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= e);
    }
    scaled * w.adjoint()
}

/// `‖Φ(U − α|T|⁻¹) − (Δ(T) − αI)‖_F` for invertible `T`.
pub fn shift_identity_check(t: &ComplexMatrix, mean: &OperatorMean, alpha: C64) -> Result<f64> {
    let polar = polar_decompose(t)?;
    require_invertible(&polar)?;
    let m = t.rows();
    let inv_abs = polar.spectral.map(|s| 1.0 / s);
    let argument = &polar.isometry_part - &inv_abs.scale(alpha);
    let lhs = perspective_multiplier(&polar.spectral, mean, &argument, false);
    let delta = transform_from_polar(&polar, mean).delta;
    let rhs = &delta - &ComplexMatrix::identity(m).scale(alpha);
    Ok(lhs.distance(&rhs))
}

/// Residuals of the structural identities for one matrix and one mean.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyResiduals {
    /// `‖Δ(αT) − αΔ(T)‖_F / (|α|·‖T‖)`.
    pub homogeneity: f64,
    /// `‖Δ(V†TV) − V†Δ(T)V‖_F / ‖T‖`.
    pub unitary_covariance: f64,
    /// `max(0, ‖Δ(T)‖ − ‖T‖) / ‖T‖` in the spectral norm.
    pub norm_excess: f64,
    /// `|tr Δ(T) − tr T| / ‖T‖`.
    pub trace: f64,
    /// Shift identity residual divided by `‖T‖ + |α|`; `None` for singular `T`.
    pub shift_identity: Option<f64>,
}

impl PropertyResiduals {
    pub fn max(&self) -> f64 {
        [
            self.homogeneity,
            self.unitary_covariance,
            self.norm_excess,
            self.trace,
            self.shift_identity.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Evaluates homogeneity, unitary covariance, norm contraction, trace
/// preservation and (for invertible `T`) the shift identity.
///
/// `alpha` scales `T` and shifts the identity; `v` must be unitary.
pub fn property_residuals(
    t: &ComplexMatrix,
    mean: &OperatorMean,
    alpha: C64,
    v: &ComplexMatrix,
) -> Result<PropertyResiduals> {
    let polar = polar_decompose(t)?;
    let norm = polar.norm.max(crate::linalg::ABS_FLOOR);
    let delta = transform_from_polar(&polar, mean).delta;

    let scaled = aluthge_transform(&t.scale(alpha), mean)?.delta;
    let homogeneity = scaled.distance(&delta.scale(alpha)) / (alpha.norm() * norm);

    let vh = v.adjoint();
    let rotated = aluthge_transform(&(&(&vh * t) * v), mean)?.delta;
    let unitary_covariance = rotated.distance(&(&(&vh * &delta) * v)) / norm;

    let norm_excess = (delta.spectral_norm() - polar.norm).max(0.0) / norm;
    let trace = (delta.trace() - t.trace()).norm() / norm;

    let shift_identity = if require_invertible(&polar).is_ok() {
        Some(shift_identity_check(t, mean, alpha)? / (norm + alpha.norm()))
    } else {
        None
    };
    Ok(PropertyResiduals {
        homogeneity,
        unitary_covariance,
        norm_excess,
        trace,
        shift_identity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    fn swap_scaled() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 2.0, 0.0]).unwrap()
    }

    #[test]
    fn geometric_and_arithmetic_examples() {
        let t = swap_scaled();
        let g = aluthge_transform(&t, &OperatorMean::geometric(0.5))
            .unwrap()
            .delta;
        let r2 = 2f64.sqrt();
        let expected = ComplexMatrix::from_real(2, 2, &[0.0, r2, r2, 0.0]).unwrap();
        assert!(g.distance(&expected) < 1e-14, "{g:?}");

        let a = aluthge_transform(&t, &OperatorMean::arithmetic(0.5))
            .unwrap()
            .delta;
        let expected = ComplexMatrix::from_real(2, 2, &[0.0, 1.5, 1.5, 0.0]).unwrap();
        assert!(a.distance(&expected) < 1e-14, "{a:?}");
    }

    #[test]
    fn unitary_is_a_fixed_point() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = ComplexMatrix::from_row_major(
            2,
            2,
            vec![
                C64::new(s, 0.0),
                C64::new(0.0, s),
                C64::new(0.0, s),
                C64::new(s, 0.0),
            ],
        )
        .unwrap();
        for mean in [
            OperatorMean::geometric(0.3),
            OperatorMean::arithmetic(0.7),
            OperatorMean::logarithmic(),
        ] {
            let d = aluthge_transform(&v, &mean).unwrap().delta;
            assert!(d.distance(&v) < 1e-14);
        }
    }

    #[test]
    fn closed_form_endpoints() {
        let t = swap_scaled();
        let polar = polar_decompose(&t).unwrap();
        let g0 = aluthge_closed_form(&t, ClosedFormKind::Geometric(0.0)).unwrap();
        assert!(g0.distance(&(&polar.positive_part * &polar.isometry_part)) < 1e-14);
        let g1 = aluthge_closed_form(&t, ClosedFormKind::Geometric(1.0)).unwrap();
        assert!(g1.distance(&t) < 1e-14);
        // Invertible T: arithmetic closed form is the mean transform (U|T| + |T|U)/2.
        let a = aluthge_closed_form(&t, ClosedFormKind::Arithmetic(0.5)).unwrap();
        let mean_transform =
            (&t + &(&polar.positive_part * &polar.isometry_part)).scale(C64::new(0.5, 0.0));
        assert!(a.distance(&mean_transform) < 1e-14);
        assert!(aluthge_closed_form(&t, ClosedFormKind::Arithmetic(1.2)).is_err());
    }

    #[test]
    fn singular_arithmetic_uses_support_projection() {
        // T = [[0,0],[1,0]]: |T| = diag(1,0), U = T, U†U = diag(1,0), U†UU = 0.
        let t = ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]).unwrap();
        let a = aluthge_transform(&t, &OperatorMean::arithmetic(0.5))
            .unwrap()
            .delta;
        let closed = aluthge_closed_form(&t, ClosedFormKind::Arithmetic(0.5)).unwrap();
        assert!(a.distance(&closed) < 1e-15);
        // (1−λ)|T|U = 0 and λU†UU|T| = 0.
        assert!(a.frobenius_norm() < 1e-15);
    }

    #[test]
    fn quadrature_matches_hadamard_on_small_example() {
        let t = swap_scaled();
        for mean in [
            OperatorMean::harmonic(0.5),
            OperatorMean::arithmetic(0.5),
            OperatorMean::geometric(0.5),
        ] {
            let q = aluthge_quadrature_oracle(&t, &mean, QuadratureOptions::default()).unwrap();
            let h = aluthge_transform(&t, &mean).unwrap().delta;
            assert!(q.distance(&h) < 1e-6, "{mean}: {}", q.distance(&h));
        }
    }

    #[test]
    fn quadrature_of_scalar_matrix() {
        let c = C64::new(1.5, -0.5);
        let t = ComplexMatrix::identity(3).scale(c);
        let q = aluthge_quadrature_oracle(
            &t,
            &OperatorMean::logarithmic(),
            QuadratureOptions::default(),
        )
        .unwrap();
        assert!(q.distance(&t) < 1e-10);
    }

    #[test]
    fn quadrature_error_paths() {
        let singular = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let mean = OperatorMean::harmonic(0.5);
        assert!(matches!(
            aluthge_quadrature_oracle(&singular, &mean, QuadratureOptions::default()),
            Err(Error::SingularInput { .. })
        ));
        let no_measure = OperatorMean::geometric(0.3);
        assert!(matches!(
            aluthge_quadrature_oracle(&swap_scaled(), &no_measure, QuadratureOptions::default()),
            Err(Error::MeasureMissing(_))
        ));
    }

    #[test]
    fn shift_identity_examples() {
        let t = swap_scaled();
        let mean = OperatorMean::logarithmic();
        assert!(shift_identity_check(&t, &mean, C64::new(0.0, 0.0)).unwrap() < 1e-14);
        let pos = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.5]);
        assert!(shift_identity_check(&pos, &mean, C64::new(1.0, 1.0)).unwrap() < 1e-13);
        let singular = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(shift_identity_check(&singular, &mean, C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn arithmetic_changes_the_spectrum() {
        // Witness: eigenvalues of T = [[0,1],[2,0]] are ±√2, those of its
        // arithmetic transform [[0,1.5],[1.5,0]] are ±1.5.
        let t = swap_scaled();
        let a = aluthge_transform(&t, &OperatorMean::arithmetic(0.5))
            .unwrap()
            .delta;
        let mut spec_t = crate::linalg::eigenvalues(&t).unwrap();
        let mut spec_a = crate::linalg::eigenvalues(&a).unwrap();
        spec_t.sort_by(|x, y| x.re.total_cmp(&y.re));
        spec_a.sort_by(|x, y| x.re.total_cmp(&y.re));
        let gap = spec_t
            .iter()
            .zip(&spec_a)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(
            gap > 0.05,
            "spectra unexpectedly agree: {spec_t:?} vs {spec_a:?}"
        );

        // The geometric transform keeps it.
        let g = aluthge_transform(&t, &OperatorMean::geometric(0.5))
            .unwrap()
            .delta;
        let mut spec_g = crate::linalg::eigenvalues(&g).unwrap();
        spec_g.sort_by(|x, y| x.re.total_cmp(&y.re));
        let gap = spec_t
            .iter()
            .zip(&spec_g)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(gap < 1e-12);
    }

    #[test]
    fn repeated_eigenvalues_need_no_special_case() {
        // |T| = 2I for T = 2V with V unitary: every basis of C^m is an eigenbasis.
        let v =
            ComplexMatrix::from_real(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        let t = v.scale(C64::new(2.0, 0.0));
        let d = aluthge_transform(&t, &OperatorMean::harmonic(0.3)).unwrap();
        assert!(d.delta.distance(&t) < 1e-13);
        assert!(d.basis_conditioning < 1e-12);
    }
}
