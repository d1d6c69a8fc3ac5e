//! Numerical range `W(T) = {⟨Tx, x⟩ : ‖x‖ = 1}` by the rotation method.
//!
//! For each angle `θ` the largest eigenvalue of
//! `H_θ = (e^{−iθ}T + e^{iθ}T†)/2` is the support function
//! `max_{z ∈ W(T)} Re(e^{−iθ}z)` and its eigenvector `x_θ` gives the boundary
//! point `⟨Tx_θ, x_θ⟩`. Matrices have compact numerical ranges, so the range
//! and its closure coincide.
//!
//! Inclusion of convex sets is decided by comparing support functions on a
//! shared angle grid, which also handles segments and points.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, C64};
use crate::means::OperatorMean;
use crate::transform::aluthge_transform;

pub const DEFAULT_ANGLES: usize = 720;
pub const MIN_ANGLES: usize = 16;

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RangeBoundary {
    pub points: Vec<C64>,
    pub angles: Vec<f64>,
    pub support_values: Vec<f64>,
}

fn rotated_hermitian_part(t: &ComplexMatrix, theta: f64) -> ComplexMatrix {
    let rot = C64::from_polar(1.0, -theta);
    let a = t.as_matrix() * rot;
    ComplexMatrix::wrap((&a + a.adjoint()) * C64::new(0.5, 0.0))
}

/// Boundary of `W(T)` at `n_angles` equally spaced angles in `[0, 2π)`.
pub fn numerical_range(t: &ComplexMatrix, n_angles: usize) -> Result<RangeBoundary> {
    t.ensure_square()?;
    if n_angles < MIN_ANGLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_ANGLES} angles, got {n_angles}"
        )));
    }
    let angles: Vec<f64> = (0..n_angles)
        .map(|k| std::f64::consts::TAU * k as f64 / n_angles as f64)
        .collect();
    let samples = angles
        .par_iter()
        .map(|&theta| {
            let eig = hermitian_eig(&rotated_hermitian_part(t, theta))?;
            let top = eig.eigenvalues.len() - 1;
            let x = eig.eigenvectors.as_matrix().column(top);
            let point = x.dotc(&(t.as_matrix() * x));
            Ok((point, eig.eigenvalues[top]))
        })
        .collect::<Result<Vec<_>>>()?;
    let (points, support_values) = samples.into_iter().unzip();
    Ok(RangeBoundary {
        points,
        angles,
        support_values,
    })
}

impl RangeBoundary {
    /// Largest excess of a boundary point over any supporting half-plane
    /// `Re(e^{−iθ_k} z) ≤ h_k`; non-positive up to rounding for a convex set.
    pub fn half_plane_violation(&self) -> f64 {
        let rotations: Vec<C64> = self
            .angles
            .iter()
            .map(|&th| C64::from_polar(1.0, -th))
            .collect();
        self.points
            .par_iter()
            .map(|p| {
                rotations
                    .iter()
                    .zip(&self.support_values)
                    .map(|(r, h)| (r * p).re - h)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Inclusion {
    pub included: bool,
    pub max_violation: f64,
}

/// `inner ⊆ outer` iff `h_inner(θ_k) ≤ h_outer(θ_k) + tol` at every grid angle.
pub fn range_included(inner: &RangeBoundary, outer: &RangeBoundary, tol: f64) -> Result<Inclusion> {
    if inner.angles.len() != outer.angles.len()
        || inner
            .angles
            .iter()
            .zip(&outer.angles)
            .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::GridMismatch);
    }
    let max_violation = inner
        .support_values
        .iter()
        .zip(&outer.support_values)
        .map(|(i, o)| i - o)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Inclusion {
        included: max_violation <= tol,
        max_violation,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RangeEntry {
    pub label: String,
    pub boundary: RangeBoundary,
}

/// Ranges of `T` and of `Δ(T)` for each mean, with pairwise inclusions.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RangeReport {
    /// Entry 0 is `T` itself; entry `i ≥ 1` is the transform for `means[i−1]`.
    pub entries: Vec<RangeEntry>,
    pub tolerance: f64,
    /// `inclusion[i][j]` says whether entry `i` lies inside entry `j`.
    pub inclusion: Vec<Vec<bool>>,
    pub violations: Vec<Vec<f64>>,
}

impl RangeReport {
    pub fn inclusion_between(&self, inner: usize, outer: usize) -> Inclusion {
        Inclusion {
            included: self.inclusion[inner][outer],
            max_violation: self.violations[inner][outer],
        }
    }
}

/// `tol` is relative to the spectral norm of `T`.
pub fn range_of_transform_report(
    t: &ComplexMatrix,
    means: &[OperatorMean],
    n_angles: usize,
    tol: f64,
) -> Result<RangeReport> {
    if means.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one mean is required".into(),
        ));
    }
    let mut entries = vec![RangeEntry {
        label: "T".into(),
        boundary: numerical_range(t, n_angles)?,
    }];
    for mean in means {
        let delta = aluthge_transform(t, mean)?.delta;
        entries.push(RangeEntry {
            label: mean.name(),
            boundary: numerical_range(&delta, n_angles)?,
        });
    }
    let abs_tol = tol * t.spectral_norm();
    let n = entries.len();
    let mut inclusion = vec![vec![false; n]; n];
    let mut violations = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let inc = range_included(&entries[i].boundary, &entries[j].boundary, abs_tol)?;
            inclusion[i][j] = inc.included;
            violations[i][j] = inc.max_violation;
        }
    }
    Ok(RangeReport {
        entries,
        tolerance: abs_tol,
        inclusion,
        violations,
    })
}

/// Largest `‖Δ_f(T) − zI‖ − ‖Δ_g(T) − zI‖` over the probe points `z`
/// (spectral norms); non-positive when the norm inequality behind range
/// nesting holds at every probe.
pub fn norm_probe(
    t: &ComplexMatrix,
    f: &OperatorMean,
    g: &OperatorMean,
    probes: &[C64],
) -> Result<f64> {
    let df = aluthge_transform(t, f)?.delta;
    let dg = aluthge_transform(t, g)?.delta;
    let m = t.rows();
    let excess = probes
        .iter()
        .map(|&z| {
            let shift = ComplexMatrix::identity(m).scale(z);
            (&df - &shift).spectral_norm() - (&dg - &shift).spectral_norm()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(excess)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_segment() {
        let r = numerical_range(&ComplexMatrix::from_real_diagonal(&[0.0, 1.0]), 64).unwrap();
        assert!((r.support_values[0] - 1.0).abs() < 1e-14);
        assert!(r
            .points
            .iter()
            .all(|p| p.im.abs() < 1e-14 && p.re > -1e-14 && p.re < 1.0 + 1e-14));
        // Support at θ = π is max(−x) = 0.
        assert!(r.support_values[32].abs() < 1e-14);
    }

    #[test]
    fn jordan_block_disk() {
        let t = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let r = numerical_range(&t, 90).unwrap();
        assert!(r.support_values.iter().all(|h| (h - 0.5).abs() < 1e-14));
        assert!(r.points.iter().all(|p| (p.norm() - 0.5).abs() < 1e-12));
        assert!(r.half_plane_violation() < 1e-12);
    }

    #[test]
    fn identity_is_a_point() {
        let r = numerical_range(&ComplexMatrix::identity(3), 16).unwrap();
        assert!(r
            .points
            .iter()
            .all(|p| (p - C64::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn too_few_angles() {
        assert!(numerical_range(&ComplexMatrix::identity(2), 8).is_err());
    }

    #[test]
    fn inclusion_examples() {
        let jordan = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let small = numerical_range(&jordan, 64).unwrap();
        let big = numerical_range(&jordan.scale(C64::new(2.0, 0.0)), 64).unwrap();
        let refl = range_included(&small, &small, 0.0).unwrap();
        assert!(refl.included && refl.max_violation <= 0.0);
        assert!(range_included(&small, &big, 0.0).unwrap().included);
        assert!(!range_included(&big, &small, 1e-9).unwrap().included);
        let other = numerical_range(&jordan, 65).unwrap();
        assert!(matches!(
            range_included(&small, &other, 0.0),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn report_for_normal_matrix_is_flat() {
        let t = ComplexMatrix::from_diagonal(&[
            C64::new(1.0, 1.0),
            C64::new(-2.0, 0.5),
            C64::new(0.3, -1.0),
        ]);
        let means = [
            OperatorMean::geometric(0.5),
            OperatorMean::arithmetic(0.5),
            OperatorMean::logarithmic(),
        ];
        let report = range_of_transform_report(&t, &means, 64, 1e-9).unwrap();
        assert_eq!(report.entries.len(), 4);
        for row in &report.violations {
            assert!(row.iter().all(|v| v.abs() < 1e-12));
        }
        assert!(range_of_transform_report(&t, &[], 64, 1e-9).is_err());
    }

    #[test]
    fn norm_probe_same_mean_is_zero() {
        let t = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 2.0, 0.0]).unwrap();
        let g = OperatorMean::geometric(0.5);
        let e = norm_probe(&t, &g, &g, &[C64::new(0.0, 0.0), C64::new(1.0, -1.0)]).unwrap();
        assert_eq!(e, 0.0);
    }
}
