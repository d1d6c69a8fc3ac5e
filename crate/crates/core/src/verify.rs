//! Batch checks of the structural properties on seeded random data.
//!
//! Each check draws its own matrices from a [`MatrixSampler`] seeded with the
//! given seed, evaluates one family of identities or inequalities, and
//! returns a [`CheckReport`] with the worst residual found. Residuals are
//! already divided by the relevant scale (usually the spectral norm of `T`),
//! so they compare directly against the tolerance.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{CorpusKind, MatrixSampler};
use crate::dynamics::{
    arithmetic_iterate_closed_form, iterate, min_distinct_phase_gap, nth_iterate,
    predict_arithmetic_limit, unitary_phases, PHASE_MATCH_TOL,
};
use crate::error::Result;
use crate::linalg::{polar_decompose, ComplexMatrix, C64};
use crate::means::{catalog, dominance_chain, dominance_check, OperatorMean};
use crate::numrange::{numerical_range, range_included};
use crate::shiftlab::{
    build_oscillating_weights, first_weight_closed_form, first_weights_by_recursion,
    sandwich_trace, ExtremeMean,
};
use crate::transform::{
    aluthge_closed_form, aluthge_quadrature_oracle, aluthge_transform, property_residuals,
    ClosedFormKind, QuadratureOptions,
};

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckReport {
    /// Stable identifier of the property checked.
    pub tag: String,
    /// The statement being checked, in words.
    pub statement: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    /// Largest normalized residual (or smallest margin, see `detail`).
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
    #[serde(skip)]
    pub seconds: f64,
}

struct Tally {
    cases: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Self {
            cases: 0,
            failures: 0,
            worst: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, residual: f64, ok: bool) {
        self.cases += 1;
        self.failures += usize::from(!ok);
        if residual.is_nan() || residual > self.worst {
            self.worst = residual;
        }
    }

    fn below(&mut self, residual: f64, tol: f64) {
        self.record(residual, residual <= tol);
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.cases += other.cases;
        self.failures += other.failures;
        if other.worst.is_nan() || other.worst > self.worst {
            self.worst = other.worst;
        }
        self
    }

    fn report(
        self,
        tag: &str,
        statement: &str,
        tolerance: f64,
        detail: String,
        start: Instant,
    ) -> CheckReport {
        CheckReport {
            tag: tag.into(),
            statement: statement.into(),
            passed: self.failures == 0 && self.cases > 0,
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
            tolerance,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

fn spectral_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).spectral_norm()
}

/// Hadamard form against `|T|^{1−λ}U|T|^λ` and `(1−λ)|T|U + λU†UU|T|`,
/// residuals relative to `‖T‖_F`. Matrices alternate invertible and singular.
pub fn closed_form_agreement(seed: u64, count: usize, m: usize, tol: f64) -> Result<CheckReport> {
    let start = Instant::now();
    let mut sampler = MatrixSampler::new(seed);
    let matrices: Vec<ComplexMatrix> = (0..count)
        .map(|i| {
            if i % 2 == 0 {
                sampler.invertible(m)
            } else {
                sampler.singular(m)
            }
        })
        .collect();
    let tally = matrices
        .par_iter()
        .map(|t| -> Result<Tally> {
            let mut tally = Tally::new();
            let scale = t.frobenius_norm();
            for l in [0.3, 0.5, 0.7] {
                for (mean, kind) in [
                    (OperatorMean::geometric(l), ClosedFormKind::Geometric(l)),
                    (OperatorMean::arithmetic(l), ClosedFormKind::Arithmetic(l)),
                ] {
                    let hadamard = aluthge_transform(t, &mean)?.delta;
                    let closed = aluthge_closed_form(t, kind)?;
                    tally.below(hadamard.distance(&closed) / scale, tol);
                }
            }
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(Tally::new(), Tally::merge);
    let detail =
        format!("{count} matrices {m}x{m}, geometric and arithmetic at weights 0.3/0.5/0.7");
    Ok(tally.report(
        "closed-form-agreement",
        "perspective form equals the geometric and arithmetic closed forms",
        tol,
        detail,
        start,
    ))
}

/// Double-integral quadrature against the Hadamard form for means with known measures.
pub fn quadrature_agreement(seed: u64, count: usize, m: usize, tol: f64) -> Result<CheckReport> {
    let start = Instant::now();
    let mut sampler = MatrixSampler::new(seed);
    let matrices: Vec<ComplexMatrix> = (0..count).map(|_| sampler.invertible(m)).collect();
    let means = [
        OperatorMean::harmonic(0.3),
        OperatorMean::harmonic(0.5),
        OperatorMean::arithmetic(0.5),
        OperatorMean::arithmetic(0.7),
        OperatorMean::geometric(0.5),
    ];
    let tally = matrices
        .par_iter()
        .map(|t| -> Result<Tally> {
            let mut tally = Tally::new();
            let scale = t.spectral_norm();
            for mean in &means {
                let hadamard = aluthge_transform(t, mean)?.delta;
                let oracle = aluthge_quadrature_oracle(t, mean, QuadratureOptions::default())?;
                tally.below(spectral_distance(&hadamard, &oracle) / scale, tol);
            }
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(Tally::new(), Tally::merge);
    let detail =
        format!("{count} invertible {m}x{m}; harmonic 0.3/0.5, arithmetic 0.5/0.7, geometric 0.5");
    Ok(tally.report(
        "integral-representation",
        "double-integral representation agrees with the perspective form",
        tol,
        detail,
        start,
    ))
}

/// The mixed corpus used by the property checks: `per_kind` matrices of every kind at each size.
pub fn mixed_corpus(seed: u64, per_kind: usize, sizes: &[usize]) -> Vec<ComplexMatrix> {
    let mut sampler = MatrixSampler::new(seed);
    let mut out = Vec::new();
    for kind in CorpusKind::ALL {
        for &m in sizes {
            for _ in 0..per_kind {
                out.push(sampler.sample(kind, m));
            }
        }
    }
    out
}

/// Residual families reported by [`structural_properties`].
pub const PROPERTY_TAGS: [&str; 5] = [
    "homogeneity",
    "unitary-covariance",
    "shift-identity",
    "norm-contraction",
    "trace-preservation",
];

/// Homogeneity, unitary covariance, shift identity, norm contraction and trace
/// preservation over the mixed corpus and every catalog mean, one report per property.
pub fn structural_properties(
    seed: u64,
    per_kind: usize,
    sizes: &[usize],
    tol: f64,
) -> Result<Vec<CheckReport>> {
    let start = Instant::now();
    let matrices = mixed_corpus(seed, per_kind, sizes);
    let mut sampler = MatrixSampler::new(seed ^ 0x5eed);
    let probes: Vec<(C64, ComplexMatrix)> = matrices
        .iter()
        .map(|t| {
            let alpha = sampler.gaussian() + C64::new(0.1, 0.0);
            (alpha, sampler.haar_unitary(t.rows()))
        })
        .collect();
    let means = catalog();
    let tallies = matrices
        .par_iter()
        .zip(&probes)
        .map(|(t, (alpha, v))| -> Result<[Tally; 5]> {
            let mut tallies = [
                Tally::new(),
                Tally::new(),
                Tally::new(),
                Tally::new(),
                Tally::new(),
            ];
            for mean in &means {
                let r = property_residuals(t, mean, *alpha, v)?;
                tallies[0].below(r.homogeneity, tol);
                tallies[1].below(r.unitary_covariance, tol);
                if let Some(s) = r.shift_identity {
                    tallies[2].below(s, tol);
                }
                tallies[3].below(r.norm_excess, tol);
                tallies[4].below(r.trace, tol);
            }
            Ok(tallies)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut merged = [
        Tally::new(),
        Tally::new(),
        Tally::new(),
        Tally::new(),
        Tally::new(),
    ];
    for t in tallies {
        for (acc, x) in merged.iter_mut().zip(t) {
            *acc = std::mem::replace(acc, Tally::new()).merge(x);
        }
    }
    let statements = [
        "transform of a scalar multiple is the scalar multiple of the transform",
        "transform commutes with unitary similarity",
        "perspective multiplier of U - alpha|T|^-1 equals transform minus alpha I (invertible T)",
        "spectral norm of the transform does not exceed that of T",
        "transform preserves the trace",
    ];
    let detail = format!(
        "{} matrices of all corpus kinds, {} means",
        matrices.len(),
        means.len()
    );
    Ok(merged
        .into_iter()
        .zip(PROPERTY_TAGS.iter().zip(statements))
        .map(|(tally, (tag, statement))| tally.report(tag, statement, tol, detail.clone(), start))
        .collect())
}

/// `Δ(T) = T` on normal matrices and `Δ(T) ≠ T` on non-normal invertible ones,
/// for every catalog mean.
pub fn fixed_points(
    seed: u64,
    count: usize,
    m: usize,
    fixed_tol: f64,
    moved_tol: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    let mut sampler = MatrixSampler::new(seed);
    let normal: Vec<ComplexMatrix> = (0..count).map(|_| sampler.normal(m)).collect();
    let general: Vec<ComplexMatrix> = (0..count).map(|_| sampler.invertible(m)).collect();
    let means = catalog();
    let mut fixed = Tally::new();
    let mut smallest_move = f64::INFINITY;
    let mut moved_failures = 0;
    for t in &normal {
        for mean in &means {
            let d = aluthge_transform(t, mean)?.delta;
            fixed.below(d.distance(t) / t.spectral_norm(), fixed_tol);
        }
    }
    for t in &general {
        for mean in &means {
            let d = aluthge_transform(t, mean)?.delta;
            let moved = spectral_distance(&d, t) / t.spectral_norm();
            smallest_move = smallest_move.min(moved);
            if moved <= moved_tol {
                moved_failures += 1;
            }
        }
    }
    let total_moved = general.len() * means.len();
    fixed.cases += total_moved;
    fixed.failures += moved_failures;
    let detail = format!(
        "{count} normal and {count} non-normal invertible {m}x{m}; largest normal residual {:.2e} (tol {fixed_tol:.0e}), smallest non-normal displacement {smallest_move:.2e} (must exceed {moved_tol:.0e})",
        fixed.worst
    );
    Ok(fixed.report(
        "fixed-point-iff-normal",
        "transform fixes T exactly when T is normal",
        fixed_tol,
        detail,
        start,
    ))
}

/// Draws invertible matrices until `count` of them have unitary-factor phases
/// that either coincide (within the match tolerance) or differ by at least `min_gap`.
pub fn phase_filtered_invertible(
    sampler: &mut MatrixSampler,
    m: usize,
    count: usize,
    min_gap: f64,
) -> Result<(Vec<ComplexMatrix>, usize)> {
    let mut out = Vec::with_capacity(count);
    let mut drawn = 0;
    while out.len() < count {
        let t = sampler.invertible(m);
        drawn += 1;
        let (phases, _) = unitary_phases(&polar_decompose(&t)?.isometry_part)?;
        if min_distinct_phase_gap(&phases, PHASE_MATCH_TOL) >= min_gap {
            out.push(t);
        }
    }
    Ok((out, drawn))
}

/// Parameters of [`arithmetic_convergence`].
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceSettings {
    pub count: usize,
    pub m: usize,
    pub min_gap: f64,
    pub max_steps: usize,
    pub step_tol: f64,
    pub defect_tol: f64,
    pub trace_tol: f64,
    pub limit_tol: f64,
}

/// Arithmetic-mean iteration on phase-filtered invertible matrices: convergence,
/// normal limit, preserved trace, and agreement with the predicted limit.
/// The non-converged cases are still scored on their last iterate.
pub fn arithmetic_convergence(seed: u64, s: ConvergenceSettings) -> Result<CheckReport> {
    let start = Instant::now();
    let mut sampler = MatrixSampler::new(seed);
    let (matrices, drawn) = phase_filtered_invertible(&mut sampler, s.m, s.count, s.min_gap)?;
    let mean = OperatorMean::arithmetic(0.5);
    struct Case {
        converged: bool,
        steps: usize,
        defect: f64,
        trace: f64,
        limit: f64,
        gap: f64,
    }
    let cases = matrices
        .par_iter()
        .map(|t| -> Result<Case> {
            let norm = t.spectral_norm();
            let trace = iterate(t, &mean, s.max_steps, s.step_tol)?;
            let last = trace.last();
            let predicted = predict_arithmetic_limit(t)?;
            let (phases, _) = unitary_phases(&polar_decompose(t)?.isometry_part)?;
            Ok(Case {
                converged: trace.converged,
                steps: trace.steps(),
                defect: last.normality_defect() / (norm * norm),
                trace: (last.trace() - t.trace()).norm() / (norm * s.m as f64),
                limit: last.distance(&predicted) / norm,
                gap: min_distinct_phase_gap(&phases, PHASE_MATCH_TOL),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut tally = Tally::new();
    let mut not_converged = 0;
    let mut worst = [0.0f64; 3];
    let mut slowest_gap = f64::INFINITY;
    let mut max_steps_used = 0;
    for c in &cases {
        let ok = c.converged
            && c.defect <= s.defect_tol
            && c.trace <= s.trace_tol
            && c.limit <= s.limit_tol;
        let margin = (c.defect / s.defect_tol)
            .max(c.trace / s.trace_tol)
            .max(c.limit / s.limit_tol);
        tally.record(margin, ok);
        not_converged += usize::from(!c.converged);
        worst = [
            worst[0].max(c.defect),
            worst[1].max(c.trace),
            worst[2].max(c.limit),
        ];
        max_steps_used = max_steps_used.max(c.steps);
        if !c.converged {
            slowest_gap = slowest_gap.min(c.gap);
        }
    }
    let mut detail = format!(
        "{} of {} drawn matrices passed the phase filter; {} of {} converged within {} steps (max steps used {}); worst defect/|T|^2 {:.2e}, trace/(|T| m) {:.2e}, limit distance/|T| {:.2e}",
        s.count,
        drawn,
        s.count - not_converged,
        s.count,
        s.max_steps,
        max_steps_used,
        worst[0],
        worst[1],
        worst[2]
    );
    if not_converged > 0 {
        detail.push_str(&format!(
            "; smallest phase gap among non-converged {slowest_gap:.3} rad (contraction factor cos(gap/2) = {:.5})",
            (slowest_gap / 2.0).cos()
        ));
    }
    Ok(tally.report(
        "arithmetic-iteration-converges",
        "arithmetic-mean iterates of an invertible matrix converge to a normal matrix with the same trace",
        1.0,
        detail,
        start,
    ))
}

/// Binomial closed form against `n` applications of the transform.
pub fn binomial_closed_form(
    seed: u64,
    count: usize,
    m: usize,
    max_n: usize,
    tol: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    let mut sampler = MatrixSampler::new(seed);
    let matrices: Vec<ComplexMatrix> = (0..count).map(|_| sampler.invertible(m)).collect();
    let mean = OperatorMean::arithmetic(0.5);
    let tally = matrices
        .par_iter()
        .map(|t| -> Result<Tally> {
            let mut tally = Tally::new();
            let norm = t.spectral_norm();
            let mut current = t.clone();
            for n in 0..=max_n {
                if n > 0 {
                    current = nth_iterate(&current, &mean, 1)?;
                }
                let closed = arithmetic_iterate_closed_form(t, n)?;
                tally.below(closed.distance(&current) / norm, tol);
            }
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(Tally::new(), Tally::merge);
    let detail = format!("{count} invertible {m}x{m}, n = 0..={max_n}");
    Ok(tally.report(
        "binomial-closed-form",
        "arithmetic iterates equal U 2^-n sum C(n,k) (U*)^k |T| U^k",
        tol,
        detail,
        start,
    ))
}

/// Oscillating weighted shift: switch-point witnesses, sandwich of the
/// geometric mean, and closed form against recursion.
pub fn shift_nonconvergence(
    a: f64,
    b: f64,
    lambda: f64,
    levels: usize,
    rel_tol: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    let osc = build_oscillating_weights(a, b, levels, lambda)?;
    let n_last = *osc.switch_points.last().expect("at least two levels");
    let mut witness = Tally::new();
    for (k, &n) in osc.switch_points.iter().enumerate() {
        let radius = 0.5f64.powi(k as i32 + 1);
        for kind in [ExtremeMean::Arithmetic, ExtremeMean::Harmonic] {
            let v = first_weight_closed_form(&osc.weights, n, lambda, kind)?;
            let err = (v - osc.targets[k]).abs();
            witness.record(err / radius, err < radius);
        }
    }

    let mut agreement = Tally::new();
    for (kind, mean) in [
        (ExtremeMean::Arithmetic, OperatorMean::arithmetic(lambda)),
        (ExtremeMean::Harmonic, OperatorMean::harmonic(lambda)),
    ] {
        let rec = first_weights_by_recursion(&osc.weights, &mean, n_last)?;
        for (n, r) in rec.iter().enumerate() {
            let c = first_weight_closed_form(&osc.weights, n, lambda, kind)?;
            agreement.below((r - c).abs() / c.abs(), rel_tol);
        }
    }

    let sandwich = sandwich_trace(&osc.weights, &OperatorMean::geometric(lambda), n_last)?;
    let violation = sandwich.max_violation();
    let sandwich_ok = violation <= 1e-12;

    let detail = format!(
        "switch points {:?}; witness errors within 2^-k: {}/{}; worst closed-form/recursion relative gap {:.2e}; geometric sandwich max violation {:.2e} over n = 0..={}",
        osc.switch_points,
        witness.cases - witness.failures,
        witness.cases,
        agreement.worst,
        violation,
        n_last
    );
    let agreement_worst = agreement.worst;
    let mut tally = witness.merge(agreement);
    tally.cases += 1;
    tally.failures += usize::from(!sandwich_ok);
    tally.worst = agreement_worst;
    Ok(tally.report(
        "shift-iteration-diverges",
        "first weights of the iterated shift oscillate between the two block values, and any mean stays between harmonic and arithmetic",
        rel_tol,
        detail,
        start,
    ))
}

/// Support-function nesting along the dominance chain, plus `W(Δ_G(T)) ⊆ W(T)`.
pub fn range_nesting(
    seed: u64,
    count: usize,
    sizes: (usize, usize),
    angles: usize,
    tol: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    let mut sampler = MatrixSampler::new(seed);
    let span = sizes.1 - sizes.0 + 1;
    let matrices: Vec<ComplexMatrix> = (0..count)
        .map(|i| sampler.ginibre(sizes.0 + i % span))
        .collect();
    let chain = dominance_chain();
    let tally = matrices
        .par_iter()
        .map(|t| -> Result<Tally> {
            let mut tally = Tally::new();
            let norm = t.spectral_norm();
            let ranges = chain
                .iter()
                .map(|mean| numerical_range(&aluthge_transform(t, mean)?.delta, angles))
                .collect::<Result<Vec<_>>>()?;
            for pair in ranges.windows(2) {
                let inc = range_included(&pair[0], &pair[1], tol * norm)?;
                tally.record(inc.max_violation / norm, inc.included);
            }
            let outer = numerical_range(t, angles)?;
            let inc = range_included(&ranges[1], &outer, tol * norm)?;
            tally.record(inc.max_violation / norm, inc.included);
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(Tally::new(), Tally::merge);
    let detail = format!(
        "{count} Gaussian matrices of sizes {}..={}, {angles} angles; worst support excess/|T| {:.2e} (negative means strict inclusion)",
        sizes.0, sizes.1, tally.worst
    );
    Ok(tally.report(
        "numerical-range-nesting",
        "numerical ranges of the transforms nest along harmonic <= geometric <= logarithmic <= arithmetic and inside W(T)",
        tol,
        detail,
        start,
    ))
}

/// Ratio-matrix positivity along the chain, and refutation of the reversed extreme pair.
pub fn dominance_chain_check(
    seed: u64,
    count: usize,
    max_len: usize,
    rel_tol: f64,
    refute_below: f64,
) -> Result<CheckReport> {
    let start = Instant::now();
    let mut sampler = MatrixSampler::new(seed);
    let chain = dominance_chain();
    let mut tally = Tally::new();
    let mut most_negative_reversed = f64::INFINITY;
    for _ in 0..count {
        let len = 2 + (sampler.uniform(0.0, (max_len - 1) as f64) as usize).min(max_len - 2);
        let s = sampler.positive_tuple(len);
        for pair in chain.windows(2) {
            let d = dominance_check(&pair[0], &pair[1], &s, 0.0)?;
            let relative = -d.min_eigenvalue / d.ratio_norm;
            tally.record(relative, d.min_eigenvalue >= -rel_tol * d.ratio_norm);
        }
        let reversed = dominance_check(&chain[3], &chain[0], &s, 0.0)?;
        most_negative_reversed = most_negative_reversed.min(reversed.min_eigenvalue);
    }
    let refuted = most_negative_reversed < refute_below;
    tally.cases += 1;
    tally.failures += usize::from(!refuted);
    let detail = format!(
        "{count} positive tuples of length 2..={max_len}; worst relative negative eigenvalue along chain {:.2e}; most negative eigenvalue for arithmetic over harmonic {most_negative_reversed:.3e} (must be below {refute_below:.0e})",
        tally.worst
    );
    Ok(tally.report(
        "dominance-chain",
        "perspective ratio matrices are positive semidefinite along harmonic <= geometric <= logarithmic <= arithmetic",
        rel_tol,
        detail,
        start,
    ))
}

/// Transform checks: oracles, structural identities and fixed points.
pub fn transform_checks(seed: u64) -> Result<Vec<CheckReport>> {
    let mut out = vec![
        closed_form_agreement(seed, 100, 6, 1e-9)?,
        quadrature_agreement(seed, 20, 4, 1e-5)?,
    ];
    out.extend(structural_properties(seed, 4, &[3, 4, 5, 6], 1e-9)?);
    out.push(fixed_points(seed, 50, 5, 1e-8, 1e-6)?);
    Ok(out)
}

/// Iteration checks for the arithmetic mean.
pub fn dynamics_checks(seed: u64) -> Result<Vec<CheckReport>> {
    Ok(vec![
        arithmetic_convergence(seed, ACCEPTANCE_CONVERGENCE)?,
        binomial_closed_form(seed, 20, 4, 10, 1e-8)?,
    ])
}

/// The weighted-shift construction is deterministic, so it takes no seed.
pub fn shift_checks() -> Result<Vec<CheckReport>> {
    Ok(vec![shift_nonconvergence(1.0, 2.0, 0.5, 6, 1e-12)?])
}

/// Numerical-range nesting and the dominance chain.
pub fn range_checks(seed: u64) -> Result<Vec<CheckReport>> {
    Ok(vec![
        range_nesting(seed, 50, (3, 8), 720, 1e-7)?,
        dominance_chain_check(seed, 100, 6, 1e-10, -1e-6)?,
    ])
}

/// Every check at the sizes used by the acceptance suite.
pub fn full_suite(seed: u64) -> Result<Vec<CheckReport>> {
    let mut out = transform_checks(seed)?;
    out.extend(dynamics_checks(seed)?);
    out.extend(shift_checks()?);
    out.extend(range_checks(seed)?);
    Ok(out)
}

pub const ACCEPTANCE_CONVERGENCE: ConvergenceSettings = ConvergenceSettings {
    count: 50,
    m: 5,
    min_gap: 0.1,
    max_steps: 2000,
    step_tol: 1e-10,
    defect_tol: 1e-6,
    trace_tol: 1e-8,
    limit_tol: 1e-5,
};
