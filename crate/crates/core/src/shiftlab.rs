//! Weighted unilateral shifts through their weight sequences.
//!
//! `W_α e_k = α_k e_{k+1}` has `|W_α| = diag(α)` and a shift as its polar
//! isometry, so `Δ(W_α)` is again a weighted shift with weights
//! `P_f(α_{k+1}, α_k)`. Every computation here works on a finite prefix; one
//! recursion step consumes one trailing weight.
//!
//! For the weighted arithmetic and harmonic means of weight `λ` the first
//! weight after `n` steps has the closed forms
//! `α_0^(n) = Σ_j C(n,j) λ^(n−j) (1−λ)^j α_j` and
//! `1/β_0^(n) = Σ_j C(n,j) λ^(n−j) (1−λ)^j / α_j`. Any mean whose
//! representing function lies between the two gives a first weight between
//! `β_0^(n)` and `α_0^(n)`, which is what [`sandwich_trace`] records.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::means::OperatorMean;
use crate::quadrature::binomial_weights;

/// Upper limit on the iteration count tried for a single switch point.
pub const SEARCH_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    pub weights: Vec<f64>,
    pub level: usize,
    pub mean_name: String,
}

impl WeightSequence {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(&w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "shift weights must be positive and finite, got {w}"
            )));
        }
        Ok(Self {
            weights,
            level: 0,
            mean_name: String::new(),
        })
    }

    pub fn first(&self) -> f64 {
        self.weights[0]
    }
}

/// One transform step: `w′[k] = P_f(w[k+1], w[k])`.
pub fn step_weights(w: &WeightSequence, mean: &OperatorMean) -> Result<WeightSequence> {
    if w.weights.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            have: w.weights.len(),
        });
    }
    let weights = w
        .weights
        .windows(2)
        .map(|p| mean.perspective(p[1], p[0]))
        .collect();
    Ok(WeightSequence {
        weights,
        level: w.level + 1,
        mean_name: mean.name(),
    })
}

/// First weights `γ_0^(0), …, γ_0^(n)` of repeated [`step_weights`].
pub fn first_weights_by_recursion(
    alpha: &[f64],
    mean: &OperatorMean,
    n: usize,
) -> Result<Vec<f64>> {
    if alpha.len() < n + 1 {
        return Err(Error::TooShort {
            needed: n + 1,
            have: alpha.len(),
        });
    }
    let mut seq = WeightSequence::new(alpha[..n + 1].to_vec())?;
    let mut out = vec![seq.first()];
    for _ in 0..n {
        seq = step_weights(&seq, mean)?;
        out.push(seq.first());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremeMean {
    Arithmetic,
    Harmonic,
}

/// `α_0^(n)` (arithmetic) or `β_0^(n)` (harmonic) from the binomial closed form.
pub fn first_weight_closed_form(
    alpha: &[f64],
    n: usize,
    lambda: f64,
    kind: ExtremeMean,
) -> Result<f64> {
    if alpha.len() < n + 1 {
        return Err(Error::TooShort {
            needed: n + 1,
            have: alpha.len(),
        });
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidWeight(lambda));
    }
    let b = binomial_weights(n, lambda);
    Ok(match kind {
        ExtremeMean::Arithmetic => b.iter().zip(alpha).map(|(c, a)| c * a).sum(),
        ExtremeMean::Harmonic => 1.0 / b.iter().zip(alpha).map(|(c, a)| c / a).sum::<f64>(),
    })
}

/// A weight prefix whose arithmetic and harmonic first weights oscillate.
#[derive(Clone, Debug, Serialize)]
pub struct OscillatingWeights {
    pub weights: Vec<f64>,
    /// `n_1 < n_2 < … < n_K`.
    pub switch_points: Vec<usize>,
    /// Target of level `k`: `b` for odd `k`, `a` for even `k`.
    pub targets: Vec<f64>,
    pub arithmetic_at_switch: Vec<f64>,
    pub harmonic_at_switch: Vec<f64>,
}

impl OscillatingWeights {
    /// Target of the block containing iteration `n`, i.e. of the first level with `n ≤ n_k`.
    pub fn block_target(&self, n: usize) -> Option<f64> {
        self.switch_points
            .iter()
            .position(|&s| n <= s)
            .map(|k| self.targets[k])
    }
}

/// Greedy construction of a sequence `(a, b…b, a…a, b…b, …)` with `K` blocks.
///
/// Level `k` appends copies of its target and looks for the smallest
/// `n_k > n_{k−1}` at which both first weights are within `2^−k` of that
/// target. The first `n_k + 1` weights are then frozen, because `α_0^(n)`
/// depends on exactly `α_0, …, α_n`, so later blocks leave earlier switch
/// values untouched.
pub fn build_oscillating_weights(
    a: f64,
    b: f64,
    levels: usize,
    lambda: f64,
) -> Result<OscillatingWeights> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "block values must be positive, got a={a}, b={b}"
        )));
    }
    if a == b {
        return Err(Error::InvalidArgument(
            "block values a and b must differ".into(),
        ));
    }
    if levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 levels, got {levels}"
        )));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidWeight(lambda));
    }

    let mut weights = vec![a];
    let mut out = OscillatingWeights {
        weights: Vec::new(),
        switch_points: Vec::new(),
        targets: Vec::new(),
        arithmetic_at_switch: Vec::new(),
        harmonic_at_switch: Vec::new(),
    };
    let mut prev = 0;
    for k in 1..=levels {
        let target = if k % 2 == 1 { b } else { a };
        let radius = 0.5f64.powi(k as i32);
        let mut n = prev + 1;
        loop {
            if n > SEARCH_CAP {
                return Err(Error::SearchBudgetExceeded(SEARCH_CAP));
            }
            weights.resize(n + 1, target);
            let up = first_weight_closed_form(&weights, n, lambda, ExtremeMean::Arithmetic)?;
            let low = first_weight_closed_form(&weights, n, lambda, ExtremeMean::Harmonic)?;
            if (up - target).abs() < radius && (low - target).abs() < radius {
                out.switch_points.push(n);
                out.targets.push(target);
                out.arithmetic_at_switch.push(up);
                out.harmonic_at_switch.push(low);
                break;
            }
            n += 1;
        }
        prev = n;
    }
    out.weights = weights;
    Ok(out)
}

/// First weights of the given mean together with the harmonic/arithmetic bounds.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichTrace {
    pub gamma0: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SandwichTrace {
    /// Largest amount by which `lower ≤ gamma0 ≤ upper` fails (non-positive if it holds).
    pub fn max_violation(&self) -> f64 {
        self.gamma0
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(g, (lo, up))| (lo - g).max(g - up))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn sandwich_trace(alpha: &[f64], mean: &OperatorMean, n: usize) -> Result<SandwichTrace> {
    let lambda = mean.weight();
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidWeight(lambda));
    }
    let gamma0 = first_weights_by_recursion(alpha, mean, n)?;
    let mut lower = Vec::with_capacity(n + 1);
    let mut upper = Vec::with_capacity(n + 1);
    for k in 0..=n {
        lower.push(first_weight_closed_form(
            alpha,
            k,
            lambda,
            ExtremeMean::Harmonic,
        )?);
        upper.push(first_weight_closed_form(
            alpha,
            k,
            lambda,
            ExtremeMean::Arithmetic,
        )?);
    }
    Ok(SandwichTrace {
        gamma0,
        lower,
        upper,
    })
}

/// The `L×L` truncation of `W_α`, with `α_k` at position `(k+1, k)`.
pub fn shift_matrix(weights: &[f64]) -> ComplexMatrix {
    let l = weights.len();
    let mut m = ComplexMatrix::zeros(l, l).into_matrix();
    for k in 0..l.saturating_sub(1) {
        m[(k + 1, k)] = C64::new(weights[k], 0.0);
    }
    ComplexMatrix::wrap(m)
}

/// Subdiagonal `(k+1, k)` entries of a square matrix.
pub fn subdiagonal(t: &ComplexMatrix) -> Vec<C64> {
    (0..t.rows().saturating_sub(1))
        .map(|k| t.get(k + 1, k))
        .collect()
}
