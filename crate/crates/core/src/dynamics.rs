//! Iterated transforms `Δⁿ(T)` and the arithmetic-mean limit.
//!
//! For invertible `T = U|T|` and the non-weighted arithmetic mean,
//! `Δⁿ(T) = U·2⁻ⁿ Σ_k C(n,k) (U†)^k |T| U^k`. Writing `U = Q·diag(e^{iθ})·Q†`
//! and `P = Q†|T|Q`, the entries of `Q†|Δⁿ(T)|Q` are
//! `((1 + e^{i(θ_j − θ_i)})/2)ⁿ·P_ij`, which tend to `P_ij` when the phases
//! agree and to zero otherwise. The limit is therefore `N = U·Q(E ∘ P)Q†`
//! with `E` the phase-match pattern, a normal matrix with the trace of `T`.
//!
//! Convergence is geometric with ratio `cos(δ/2)` for the smallest phase gap
//! `δ` between distinct phases, so nearly equal phases converge very slowly.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{polar_decompose, schur, ComplexMatrix, C64};
use crate::means::OperatorMean;
use crate::quadrature::binomial_weights;
use crate::transform::{transform_from_polar, INVERTIBILITY_THRESHOLD};

/// Default step cap for [`iterate`].
pub const DEFAULT_MAX_STEPS: usize = 2000;

/// Phases closer than this (radians, cyclically) are treated as equal.
pub const PHASE_MATCH_TOL: f64 = 1e-8;

/// Record of `Δ¹(T), Δ²(T), …` up to convergence or the step cap.
#[derive(Clone, Debug)]
pub struct IterationTrace {
    /// `iterates[k] = Δ^{k+1}(T)`.
    pub iterates: Vec<ComplexMatrix>,
    /// Normality defect of each iterate.
    pub defects: Vec<f64>,
    /// `‖Δ^{k+1} − Δ^k‖_F`.
    pub step_deltas: Vec<f64>,
    /// Trace of each iterate.
    pub traces: Vec<C64>,
    pub converged: bool,
    pub limit: Option<ComplexMatrix>,
    /// Geometric decay rate of the step deltas over the last ten steps.
    pub rate_estimate: Option<f64>,
}

impl IterationTrace {
    pub fn steps(&self) -> usize {
        self.iterates.len()
    }

    pub fn last(&self) -> &ComplexMatrix {
        self.iterates
            .last()
            .expect("trace holds at least one iterate")
    }
}

/// Applies the transform until `‖Δⁿ⁺¹ − Δⁿ‖_F ≤ tol·‖T‖` or `max_steps` is reached.
pub fn iterate(
    t: &ComplexMatrix,
    mean: &OperatorMean,
    max_steps: usize,
    tol: f64,
) -> Result<IterationTrace> {
    t.ensure_square()?;
    if max_steps == 0 {
        return Err(Error::InvalidArgument(
            "max_steps must be at least 1".into(),
        ));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let threshold = tol * t.spectral_norm();

    let mut trace = IterationTrace {
        iterates: Vec::new(),
        defects: Vec::new(),
        step_deltas: Vec::new(),
        traces: Vec::new(),
        converged: false,
        limit: None,
        rate_estimate: None,
    };
    let mut current = t.clone();
    for _ in 0..max_steps {
        let polar = polar_decompose(&current)?;
        let next = transform_from_polar(&polar, mean).delta;
        let step = next.distance(&current);
        trace.defects.push(next.normality_defect());
        trace.step_deltas.push(step);
        trace.traces.push(next.trace());
        trace.iterates.push(next.clone());
        current = next;
        if step <= threshold {
            trace.converged = true;
            break;
        }
    }
    trace.rate_estimate = rate_estimate(&trace.step_deltas);
    if trace.converged {
        trace.limit = Some(current);
    }
    Ok(trace)
}

fn rate_estimate(deltas: &[f64]) -> Option<f64> {
    let n = deltas.len();
    if n < 3 {
        return None;
    }
    let k = (n - 1).min(10);
    let (late, early) = (deltas[n - 1], deltas[n - 1 - k]);
    (late > 0.0 && early > 0.0).then(|| (late / early).powf(1.0 / k as f64))
}

/// `Δⁿ(T)` for a fixed `n` without a convergence test.
pub fn nth_iterate(t: &ComplexMatrix, mean: &OperatorMean, n: usize) -> Result<ComplexMatrix> {
    let mut current = t.clone();
    for _ in 0..n {
        let polar = polar_decompose(&current)?;
        current = transform_from_polar(&polar, mean).delta;
    }
    Ok(current)
}

/// `U·2⁻ⁿ Σ_{k=0}^{n} C(n,k) (U†)^k |T| U^k`, valid when `null(T†) ⊆ null(T)`.
pub fn arithmetic_iterate_closed_form(t: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    let m = t.ensure_square()?;
    let polar = polar_decompose(t)?;
    let u = polar.isometry_part.as_matrix();
    let uh = u.adjoint();

    // (I − P_ker T)·P_ker T† = U†U·(I − UU†) vanishes iff null(T†) ⊆ null(T).
    let residual = (&uh * u * (DMatrix::<C64>::identity(m, m) - u * &uh)).norm();
    if residual > 1e-8 {
        return Err(Error::KernelConditionViolated(residual));
    }

    let weights = binomial_weights(n, 0.5);
    let mut term = polar.positive_part.as_matrix().clone();
    let mut sum = &term * C64::new(weights[0], 0.0);
    for &w in &weights[1..] {
        term = &uh * term * u;
        sum += &term * C64::new(w, 0.0);
    }
    Ok(ComplexMatrix::wrap(u * sum))
}

/// Phases in `[0, 2π)` of the eigenvalues of a unitary matrix, with its eigenvectors.
pub fn unitary_phases(u: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let (q, r) = schur(u)?;
    let tau = std::f64::consts::TAU;
    let phases = r
        .as_matrix()
        .diagonal()
        .iter()
        .map(|z| z.arg().rem_euclid(tau))
        .map(|p| if p >= tau { 0.0 } else { p })
        .collect();
    Ok((phases, q))
}

fn cyclic_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Cluster labels for phases, joining any pair within `tol` (union-find).
pub fn phase_clusters(phases: &[f64], tol: f64) -> Vec<usize> {
    let n = phases.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if cyclic_distance(phases[i], phases[j]) <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

/// Smallest cyclic distance between phases in different clusters
/// (`f64::INFINITY` if all phases match).
pub fn min_distinct_phase_gap(phases: &[f64], match_tol: f64) -> f64 {
    let labels = phase_clusters(phases, match_tol);
    let mut gap = f64::INFINITY;
    for i in 0..phases.len() {
        for j in i + 1..phases.len() {
            if labels[i] != labels[j] {
                gap = gap.min(cyclic_distance(phases[i], phases[j]));
            }
        }
    }
    gap
}

/// Limit of the arithmetic-mean iteration for invertible `T`, from the
/// eigendecomposition of its unitary polar factor.
pub fn predict_arithmetic_limit(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    t.ensure_square()?;
    let polar = polar_decompose(t)?;
    let min_sv = polar.min_singular_value();
    if polar.norm == 0.0 || min_sv < INVERTIBILITY_THRESHOLD * polar.norm {
        return Err(Error::SingularInput {
            min_sv,
            max_sv: polar.norm,
        });
    }
    let (phases, q) = unitary_phases(&polar.isometry_part)?;
    let labels = phase_clusters(&phases, PHASE_MATCH_TOL);
    let q = q.as_matrix();
    let mut p = q.adjoint() * polar.positive_part.as_matrix() * q;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            if labels[i] != labels[j] {
                p[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    let p0 = q * p * q.adjoint();
    Ok(ComplexMatrix::wrap(polar.isometry_part.as_matrix() * p0))
}

/// Summary row for CSV output.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub step: usize,
    #[serde(rename = "stepDelta")]
    pub step_delta: f64,
    pub defect: f64,
    #[serde(rename = "traceRe")]
    pub trace_re: f64,
    #[serde(rename = "traceIm")]
    pub trace_im: f64,
}

impl IterationTrace {
    pub fn rows(&self) -> Vec<TraceRow> {
        (0..self.steps())
            .map(|k| TraceRow {
                step: k + 1,
                step_delta: self.step_deltas[k],
                defect: self.defects[k],
                trace_re: self.traces[k].re,
                trace_im: self.traces[k].im,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap_scaled() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 2.0, 0.0]).unwrap()
    }

    #[test]
    fn normal_input_converges_immediately() {
        let t = ComplexMatrix::from_diagonal(&[C64::new(1.0, 2.0), C64::new(-3.0, 0.5)]);
        let trace = iterate(&t, &OperatorMean::geometric(0.5), 100, 1e-12).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.steps(), 1);
        assert!(trace.limit.unwrap().distance(&t) < 1e-14);
    }

    #[test]
    fn iterate_validates_arguments() {
        let t = swap_scaled();
        let mean = OperatorMean::arithmetic(0.5);
        assert!(iterate(&t, &mean, 0, 1e-8).is_err());
        assert!(iterate(&t, &mean, 10, 0.0).is_err());
    }

    #[test]
    fn closed_form_low_orders() {
        let t = swap_scaled();
        assert!(arithmetic_iterate_closed_form(&t, 0).unwrap().distance(&t) < 1e-14);
        let polar = polar_decompose(&t).unwrap();
        let mean_transform =
            (&t + &(&polar.positive_part * &polar.isometry_part)).scale(C64::new(0.5, 0.0));
        assert!(
            arithmetic_iterate_closed_form(&t, 1)
                .unwrap()
                .distance(&mean_transform)
                < 1e-14
        );
    }

    #[test]
    fn closed_form_rejects_kernel_mismatch() {
        // T = e_0 e_1^T: null(T) = span(e_0), null(T†) = span(e_1).
        let t = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            arithmetic_iterate_closed_form(&t, 3),
            Err(Error::KernelConditionViolated(_))
        ));
    }

    #[test]
    fn limit_of_swap_example() {
        // U = swap has phases {0, π}; P = Q†diag(2,1)Q in U's eigenbasis
        // (e_0 ± e_1)/√2 is [[1.5, ±0.5], [±0.5, 1.5]], so E∘P = 1.5·I and N = 1.5·U.
        let t = swap_scaled();
        let n = predict_arithmetic_limit(&t).unwrap();
        let expected = ComplexMatrix::from_real(2, 2, &[0.0, 1.5, 1.5, 0.0]).unwrap();
        assert!(n.distance(&expected) < 1e-13, "{n:?}");
        // Δ_A(T) is already this matrix, so the iteration agrees after one step.
        let trace = iterate(&t, &OperatorMean::arithmetic(0.5), 50, 1e-12).unwrap();
        assert!(trace.converged);
        assert!(trace.limit.unwrap().distance(&n) < 1e-13);
    }

    #[test]
    fn positive_definite_limit_is_itself() {
        let t = ComplexMatrix::from_real(2, 2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        assert!(predict_arithmetic_limit(&t).unwrap().distance(&t) < 1e-13);
    }

    #[test]
    fn phase_clustering_is_transitive_and_cyclic() {
        let tau = std::f64::consts::TAU;
        let phases = [0.0, 0.6e-8, 1.2e-8, tau - 0.5e-8, 1.0];
        let labels = phase_clusters(&phases, 1e-8);
        assert_eq!(labels[0], labels[1]);
        assert_eq!(labels[1], labels[2]);
        assert_eq!(labels[0], labels[3]);
        assert_ne!(labels[0], labels[4]);
        assert!((min_distinct_phase_gap(&phases, 1e-8) - (1.0 - 1.2e-8)).abs() < 1e-12);
        assert_eq!(min_distinct_phase_gap(&[0.3, 0.3], 1e-8), f64::INFINITY);
    }
}
