//! Gauss–Legendre rules and binomial weights.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Roots of `P_n` are found by Newton iteration from the Chebyshev-like
/// initial guess `cos(π(i − 1/4)/(n + 1/2))`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
    let mut rule = vec![(0.0, 0.0); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[i] = (-x, w);
        rule[n - 1 - i] = (x, w);
    }
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Composite rule: `panels` equal panels on `[a, b]`, `per_panel` nodes each.
pub fn composite_gauss_legendre(
    panels: usize,
    per_panel: usize,
    a: f64,
    b: f64,
) -> Vec<(f64, f64)> {
    let base = gauss_legendre(per_panel);
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + 0.5 * width;
        out.extend(
            base.iter()
                .map(|&(x, w)| (mid + 0.5 * width * x, 0.5 * width * w)),
        );
    }
    out
}

/// Largest order for which binomial coefficients are formed exactly in `u64`.
pub const EXACT_BINOMIAL_MAX: usize = 60;

/// Binomial probabilities `C(n, j)·q^(n−j)·(1−q)^j` for `j = 0..=n`.
///
/// Coefficients are exact integers up to `n = 60`; beyond that every term is
/// accumulated in the logarithmic domain.
pub fn binomial_weights(n: usize, q: f64) -> Vec<f64> {
    assert!(
        (0.0..=1.0).contains(&q),
        "binomial parameter must lie in [0, 1]"
    );
    let p = 1.0 - q;
    if n <= EXACT_BINOMIAL_MAX {
        let mut coeff: u64 = 1;
        let mut out = Vec::with_capacity(n + 1);
        for j in 0..=n {
            out.push(coeff as f64 * q.powi((n - j) as i32) * p.powi(j as i32));
            if j < n {
                // C(n, j)·(n−j) = C(n, j+1)·(j+1), so the division is exact.
                coeff = (coeff as u128 * (n - j) as u128 / (j + 1) as u128) as u64;
            }
        }
        return out;
    }
    if q == 0.0 || p == 0.0 {
        let mut out = vec![0.0; n + 1];
        out[if q == 0.0 { n } else { 0 }] = 1.0;
        return out;
    }
    let (lq, lp) = (q.ln(), p.ln());
    let mut log_coeff = 0.0;
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        out.push((log_coeff + (n - j) as f64 * lq + j as f64 * lp).exp());
        if j < n {
            log_coeff += ((n - j) as f64).ln() - ((j + 1) as f64).ln();
        }
    }
    out
}
