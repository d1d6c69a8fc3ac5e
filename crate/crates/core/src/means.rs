//! Operator means as representing functions and their perspectives.
//!
//! An operator mean is encoded by its representing function `f` on `(0, ∞)`
//! with `f(1) = 1`, its weight `λ = f′(1)`, and the perspective
//! `P_f(s, t) = s·f(t/s)`. Perspectives are extended to the boundary of the
//! quadrant by continuity, so `P_f(s, 0) = s·f(0⁺)` and
//! `P_f(0, t) = t·lim f(x)/x`.
//!
//! Every mean also has a representing probability measure `μ` on `[0, 1]`
//! with `f(x) = ∫ [1 − λ + λ/x]⁻¹ dμ(λ)`. The built-in means carry it when it
//! has a convenient form; it drives the quadrature oracle in
//! [`crate::transform`].

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

/// Default number of quadrature nodes used to discretize a continuous density.
pub const DENSITY_NODES: usize = 64;

const MASS_TOLERANCE: f64 = 1e-10;

/// Continuous part of a representing measure.
#[derive(Clone, Debug, PartialEq)]
pub enum Density {
    /// `1/(π√(λ(1−λ)))`, the measure of the geometric mean of weight 1/2.
    /// Integrated after the substitution `λ = sin²(πu/2)`, which makes it uniform in `u`.
    Arcsine,
    /// `1/(λ(1−λ)(π² + ln²(λ/(1−λ))))`, the measure of the logarithmic mean.
    /// The substitution `λ = 1/(1 + e^{−π·tan φ})` makes it uniform in `φ ∈ (−π/2, π/2)`.
    Logarithmic,
    /// User-supplied density already reduced to weighted nodes in `(0, 1)`.
    Nodes(Vec<(f64, f64)>),
}

impl Density {
    /// Weighted nodes `(λ_k, w_k)`; `n` is ignored for [`Density::Nodes`].
    pub fn nodes(&self, n: usize) -> Vec<(f64, f64)> {
        match self {
            Density::Arcsine => gauss_legendre_on(n, 0.0, 1.0)
                .into_iter()
                .map(|(u, w)| ((0.5 * PI * u).sin().powi(2), w))
                .collect(),
            Density::Logarithmic => gauss_legendre_on(n, -0.5 * PI, 0.5 * PI)
                .into_iter()
                .map(|(phi, w)| (1.0 / (1.0 + (-PI * phi.tan()).exp()), w / PI))
                .collect(),
            Density::Nodes(nodes) => nodes.clone(),
        }
    }
}

/// Positive probability measure on `[0, 1]`: point masses plus an optional density.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentingMeasure {
    atoms: Vec<(f64, f64)>,
    density: Option<Density>,
}

impl RepresentingMeasure {
    /// Validates locations in `[0, 1]`, positive masses, and unit total mass.
    pub fn new(atoms: Vec<(f64, f64)>, density: Option<Density>) -> Result<Self> {
        for &(loc, mass) in &atoms {
            if !(0.0..=1.0).contains(&loc) {
                return Err(Error::InvalidMeasure(format!(
                    "atom location {loc} outside [0, 1]"
                )));
            }
            if !(mass > 0.0 && mass.is_finite()) {
                return Err(Error::InvalidMeasure(format!(
                    "atom mass {mass} is not positive"
                )));
            }
        }
        if let Some(Density::Nodes(nodes)) = &density {
            for &(loc, w) in nodes {
                if !(0.0..=1.0).contains(&loc) || !(w >= 0.0 && w.is_finite()) {
                    return Err(Error::InvalidMeasure(format!(
                        "density node ({loc}, {w}) is not a nonnegative weight in [0, 1]"
                    )));
                }
            }
        }
        let measure = Self { atoms, density };
        if measure.atoms.is_empty() && measure.density.is_none() {
            return Err(Error::InvalidMeasure(
                "measure has no atoms and no density".into(),
            ));
        }
        let mass = measure.total_mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMeasure(format!(
                "total mass {mass} differs from 1"
            )));
        }
        Ok(measure)
    }

    /// Measure from atoms and density samples `(λ_k, ρ(λ_k))` on an increasing grid,
    /// integrated with the trapezoidal rule.
    pub fn from_samples(atoms: Vec<(f64, f64)>, samples: &[(f64, f64)]) -> Result<Self> {
        if samples.is_empty() {
            return Self::new(atoms, None);
        }
        if samples.len() < 2 {
            return Err(Error::InvalidMeasure(
                "density needs at least two samples".into(),
            ));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidMeasure(
                "density samples must be strictly increasing".into(),
            ));
        }
        let mut nodes: Vec<(f64, f64)> = samples.iter().map(|&(x, _)| (x, 0.0)).collect();
        for k in 0..samples.len() - 1 {
            let h = samples[k + 1].0 - samples[k].0;
            nodes[k].1 += 0.5 * h * samples[k].1;
            nodes[k + 1].1 += 0.5 * h * samples[k + 1].1;
        }
        Self::new(atoms, Some(Density::Nodes(nodes)))
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    /// Atoms followed by the density discretized with `density_nodes` points.
    pub fn nodes(&self, density_nodes: usize) -> Vec<(f64, f64)> {
        let mut out = self.atoms.clone();
        if let Some(d) = &self.density {
            out.extend(d.nodes(density_nodes));
        }
        out
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes(DENSITY_NODES)
            .iter()
            .map(|&(l, w)| w * g(l))
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    /// Mass of the atom at `loc`, zero if absent.
    pub fn atom_mass(&self, loc: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 == loc).map(|a| a.1).sum()
    }

    /// `f′(1) = ∫ λ dμ(λ)`.
    pub fn first_moment(&self) -> f64 {
        self.integrate(|l| l)
    }
}

/// Harmonic kernel `[(1−λ)/s + λ/t]⁻¹` for `s, t > 0`.
fn harmonic_kernel(lambda: f64, s: f64, t: f64) -> f64 {
    s * t / ((1.0 - lambda) * t + lambda * s)
}

/// Which family a mean belongs to.
#[derive(Clone, Debug, PartialEq)]
pub enum MeanKind {
    Arithmetic,
    Geometric,
    Harmonic,
    /// `f(x) = [1 − λ + λx^t]^{1/t}` with `t ∈ [−1, 1] \ {0}`.
    Power(f64),
    Logarithmic,
    Measure,
}

/// Constructor argument for [`make_mean`].
#[derive(Clone, Debug)]
pub enum MeanSpec {
    Arithmetic,
    Geometric,
    Harmonic,
    Power(f64),
    Logarithmic,
    FromMeasure(RepresentingMeasure),
}

/// A Kubo–Ando operator mean.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMean {
    kind: MeanKind,
    weight: f64,
    measure: Option<RepresentingMeasure>,
}

/// Builds a mean of the given family and weight.
///
/// The logarithmic mean is non-weighted and requires `weight = 1/2`; a mean
/// built from a measure takes its weight `∫λ dμ` from the measure and only
/// checks that `weight` is in range. A power mean with exponent 0 is the
/// geometric mean.
pub fn make_mean(spec: MeanSpec, weight: f64) -> Result<OperatorMean> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::InvalidWeight(weight));
    }
    match spec {
        MeanSpec::Arithmetic => Ok(OperatorMean::arithmetic(weight)),
        MeanSpec::Geometric => Ok(OperatorMean::geometric(weight)),
        MeanSpec::Harmonic => Ok(OperatorMean::harmonic(weight)),
        MeanSpec::Power(t) => OperatorMean::power(weight, t),
        MeanSpec::Logarithmic => {
            if (weight - 0.5).abs() > 1e-12 {
                return Err(Error::InvalidWeight(weight));
            }
            Ok(OperatorMean::logarithmic())
        }
        MeanSpec::FromMeasure(mu) => Ok(OperatorMean::from_measure(mu)),
    }
}

/// The built-in families at representative interior weights.
pub fn catalog() -> Vec<OperatorMean> {
    let mut means = Vec::new();
    for weight in [0.3, 0.5, 0.7] {
        means.push(OperatorMean::arithmetic(weight));
        means.push(OperatorMean::geometric(weight));
        means.push(OperatorMean::harmonic(weight));
    }
    for t in [-0.5, 0.5] {
        means.push(OperatorMean::power(0.5, t).expect("valid power mean"));
    }
    means.push(OperatorMean::power(0.3, 0.5).expect("valid power mean"));
    means.push(OperatorMean::logarithmic());
    means
}

/// Non-weighted harmonic, geometric, logarithmic and arithmetic means,
/// increasing in the dominance order.
pub fn dominance_chain() -> [OperatorMean; 4] {
    [
        OperatorMean::harmonic(0.5),
        OperatorMean::geometric(0.5),
        OperatorMean::logarithmic(),
        OperatorMean::arithmetic(0.5),
    ]
}

impl OperatorMean {
    fn checked_weight(weight: f64) -> f64 {
        assert!(
            (0.0..=1.0).contains(&weight),
            "mean weight {weight} outside [0, 1]"
        );
        weight
    }

    fn arithmetic_measure(weight: f64) -> RepresentingMeasure {
        let atoms = [(0.0, 1.0 - weight), (1.0, weight)]
            .into_iter()
            .filter(|a| a.1 > 0.0)
            .collect();
        RepresentingMeasure {
            atoms,
            density: None,
        }
    }

    fn harmonic_measure(weight: f64) -> RepresentingMeasure {
        RepresentingMeasure {
            atoms: vec![(weight, 1.0)],
            density: None,
        }
    }

    /// Weighted arithmetic mean `f(x) = 1 − λ + λx`. Panics if `weight ∉ [0, 1]`.
    pub fn arithmetic(weight: f64) -> Self {
        let weight = Self::checked_weight(weight);
        Self {
            kind: MeanKind::Arithmetic,
            weight,
            measure: Some(Self::arithmetic_measure(weight)),
        }
    }

    /// Weighted geometric mean `f(x) = x^λ`. Panics if `weight ∉ [0, 1]`.
    pub fn geometric(weight: f64) -> Self {
        let weight = Self::checked_weight(weight);
        let measure = if weight == 0.0 || weight == 1.0 {
            Some(RepresentingMeasure {
                atoms: vec![(weight, 1.0)],
                density: None,
            })
        } else if weight == 0.5 {
            Some(RepresentingMeasure {
                atoms: vec![],
                density: Some(Density::Arcsine),
            })
        } else {
            None
        };
        Self {
            kind: MeanKind::Geometric,
            weight,
            measure,
        }
    }

    /// Weighted harmonic mean `f(x) = [1 − λ + λ/x]⁻¹`. Panics if `weight ∉ [0, 1]`.
    pub fn harmonic(weight: f64) -> Self {
        let weight = Self::checked_weight(weight);
        Self {
            kind: MeanKind::Harmonic,
            weight,
            measure: Some(Self::harmonic_measure(weight)),
        }
    }

    /// Weighted power mean of exponent `t ∈ [−1, 1]`.
    pub fn power(weight: f64, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidWeight(weight));
        }
        if !(-1.0..=1.0).contains(&t) {
            return Err(Error::InvalidExponent(t));
        }
        if t == 0.0 {
            return Ok(Self::geometric(weight));
        }
        let measure = if t == 1.0 {
            Some(Self::arithmetic_measure(weight))
        } else if t == -1.0 {
            Some(Self::harmonic_measure(weight))
        } else {
            None
        };
        Ok(Self {
            kind: MeanKind::Power(t),
            weight,
            measure,
        })
    }

    /// Logarithmic mean `f(x) = (x − 1)/ln x`, weight 1/2.
    pub fn logarithmic() -> Self {
        Self {
            kind: MeanKind::Logarithmic,
            weight: 0.5,
            measure: Some(RepresentingMeasure {
                atoms: vec![],
                density: Some(Density::Logarithmic),
            }),
        }
    }

    /// Mean with representing function `f(x) = ∫ [1 − λ + λ/x]⁻¹ dμ(λ)`.
    pub fn from_measure(measure: RepresentingMeasure) -> Self {
        let weight = measure.first_moment().clamp(0.0, 1.0);
        Self {
            kind: MeanKind::Measure,
            weight,
            measure: Some(measure),
        }
    }

    pub fn kind(&self) -> &MeanKind {
        &self.kind
    }

    /// `λ = f′(1)`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn measure(&self) -> Option<&RepresentingMeasure> {
        self.measure.as_ref()
    }

    pub fn name(&self) -> String {
        match self.kind {
            MeanKind::Arithmetic => format!("arithmetic:{}", self.weight),
            MeanKind::Geometric => format!("geometric:{}", self.weight),
            MeanKind::Harmonic => format!("harmonic:{}", self.weight),
            MeanKind::Power(t) => format!("power:{}:t={}", self.weight, t),
            MeanKind::Logarithmic => "logarithmic".to_string(),
            MeanKind::Measure => format!("measure:{}", self.weight),
        }
    }

    /// Representing function `f(x)` for `x > 0`.
    pub fn f(&self, x: f64) -> f64 {
        self.perspective(1.0, x)
    }

    /// `(f(0⁺), lim_{x→∞} f(x)/x)`.
    pub fn boundary_limits(&self) -> (f64, f64) {
        let l = self.weight;
        let indicator = |b: bool| if b { 1.0 } else { 0.0 };
        match self.kind {
            MeanKind::Arithmetic => (1.0 - l, l),
            MeanKind::Geometric | MeanKind::Harmonic => (indicator(l == 0.0), indicator(l == 1.0)),
            MeanKind::Power(t) if t > 0.0 => ((1.0 - l).powf(1.0 / t), l.powf(1.0 / t)),
            MeanKind::Power(_) => (indicator(l == 0.0), indicator(l == 1.0)),
            MeanKind::Logarithmic => (0.0, 0.0),
            MeanKind::Measure => {
                let mu = self.measure.as_ref().expect("measure mean without measure");
                (mu.atom_mass(0.0), mu.atom_mass(1.0))
            }
        }
    }

    /// Perspective `P_f(s, t)` for `s, t ≥ 0`, continuous up to the boundary.
    pub fn perspective(&self, s: f64, t: f64) -> f64 {
        debug_assert!(
            s >= 0.0 && t >= 0.0,
            "perspective needs nonnegative arguments"
        );
        if s == 0.0 || t == 0.0 {
            let (f0, slope) = self.boundary_limits();
            return if s == 0.0 && t == 0.0 {
                0.0
            } else if t == 0.0 {
                s * f0
            } else {
                t * slope
            };
        }
        let l = self.weight;
        match self.kind {
            MeanKind::Arithmetic => (1.0 - l) * s + l * t,
            MeanKind::Geometric => {
                if l == 0.0 {
                    s
                } else if l == 1.0 {
                    t
                } else {
                    s.powf(1.0 - l) * t.powf(l)
                }
            }
            MeanKind::Harmonic => harmonic_kernel(l, s, t),
            MeanKind::Power(p) => {
                // Factor out max(s, t) so that x^p cannot overflow for p < 0.
                let scale = s.max(t);
                let (a, b) = (s / scale, t / scale);
                scale * ((1.0 - l) * a.powf(p) + l * b.powf(p)).powf(1.0 / p)
            }
            MeanKind::Logarithmic => logarithmic_mean(s, t),
            MeanKind::Measure => self
                .measure
                .as_ref()
                .expect("measure mean without measure")
                .integrate(|lam| harmonic_kernel(lam, s, t)),
        }
    }

    /// Grid spot-checks of the mean axioms; returns one message per violation.
    ///
    /// Covers `f(1) = 1`, monotonicity of `f`, the harmonic/arithmetic sandwich
    /// for weights in `(0, 1)`, and `P_f(s, s) = s`.
    pub fn axiom_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let grid: Vec<f64> = (-40..=40).map(|k| 10f64.powf(k as f64 / 10.0)).collect();
        let rel = 1e-10;
        if (self.f(1.0) - 1.0).abs() > rel {
            out.push(format!("f(1) = {} differs from 1", self.f(1.0)));
        }
        for w in grid.windows(2) {
            let (a, b) = (self.f(w[0]), self.f(w[1]));
            if b < a - rel * a.abs() {
                out.push(format!("f decreases between {} and {}", w[0], w[1]));
            }
        }
        let l = self.weight;
        if l > 0.0 && l < 1.0 {
            for &x in &grid {
                let lower = 1.0 / (1.0 - l + l / x);
                let upper = 1.0 - l + l * x;
                let fx = self.f(x);
                if fx < lower * (1.0 - rel) || fx > upper * (1.0 + rel) {
                    out.push(format!("f({x}) = {fx} escapes [{lower}, {upper}]"));
                }
            }
        }
        for &s in &grid {
            let p = self.perspective(s, s);
            if (p - s).abs() > rel * s {
                out.push(format!("P_f({s}, {s}) = {p}"));
            }
        }
        out
    }

    /// Parses a mean descriptor such as `arithmetic:0.5`, `geometric`,
    /// `power:0.5:t=-1`, `logarithmic`, or `measure:FILE.json`.
    ///
    /// The weight defaults to 1/2 when omitted.
    pub fn parse_descriptor(desc: &str) -> Result<Self> {
        let desc = desc.trim();
        let mut parts = desc.split(':');
        let family = parts.next().unwrap_or_default().to_ascii_lowercase();
        let rest: Vec<&str> = parts.collect();
        let weight = |idx: usize| -> Result<f64> {
            match rest.get(idx) {
                None => Ok(0.5),
                Some(w) => w.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!("bad weight `{w}` in mean descriptor `{desc}`"))
                }),
            }
        };
        let too_many = |n: usize| -> Result<()> {
            if rest.len() > n {
                Err(Error::Parse(format!(
                    "unexpected fields in mean descriptor `{desc}`"
                )))
            } else {
                Ok(())
            }
        };
        match family.as_str() {
            "arithmetic" | "geometric" | "harmonic" => {
                too_many(1)?;
                let spec = match family.as_str() {
                    "arithmetic" => MeanSpec::Arithmetic,
                    "geometric" => MeanSpec::Geometric,
                    _ => MeanSpec::Harmonic,
                };
                make_mean(spec, weight(0)?)
            }
            "power" => {
                too_many(2)?;
                let exponent = match rest.get(1) {
                    Some(field) => {
                        let value = field.trim().strip_prefix("t=").ok_or_else(|| {
                            Error::Parse(format!("expected `t=<exponent>` in `{desc}`"))
                        })?;
                        value.parse::<f64>().map_err(|_| {
                            Error::Parse(format!("bad exponent `{value}` in `{desc}`"))
                        })?
                    }
                    None => {
                        return Err(Error::Parse(format!(
                            "power mean `{desc}` needs `t=<exponent>`"
                        )))
                    }
                };
                make_mean(MeanSpec::Power(exponent), weight(0)?)
            }
            "logarithmic" => {
                too_many(0)?;
                Ok(Self::logarithmic())
            }
            "measure" => {
                if rest.is_empty() {
                    return Err(Error::Parse("measure descriptor needs a file path".into()));
                }
                // Paths may themselves contain ':'.
                let path = rest.join(":");
                Ok(Self::from_measure(read_measure_file(Path::new(&path))?))
            }
            other => Err(Error::Parse(format!("unknown mean family `{other}`"))),
        }
    }
}

impl fmt::Display for OperatorMean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// `(s − t)/(ln s − ln t)`, with `P(s, s) = s`.
fn logarithmic_mean(s: f64, t: f64) -> f64 {
    let big = s.max(t);
    if (s - t).abs() < 1e-8 * big {
        // With m the midpoint and e = (s−t)/(s+t): L = m·e/artanh(e).
        let m = 0.5 * (s + t);
        let e = (s - t) / (s + t);
        let e2 = e * e;
        return m * (1.0 - e2 / 3.0 - 4.0 * e2 * e2 / 45.0);
    }
    (s - t) / (s.ln() - t.ln())
}

/// JSON schema for a representing measure file.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    /// `[location, mass]` pairs.
    #[serde(default)]
    pub atoms: Vec<[f64; 2]>,
    /// `[λ, density(λ)]` samples on an increasing grid in `[0, 1]`.
    #[serde(default)]
    pub density: Vec<[f64; 2]>,
}

pub fn read_measure_file(path: &Path) -> Result<RepresentingMeasure> {
    let text = std::fs::read_to_string(path)?;
    let file: MeasureFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let atoms = file.atoms.iter().map(|a| (a[0], a[1])).collect();
    let samples: Vec<(f64, f64)> = file.density.iter().map(|d| (d[0], d[1])).collect();
    RepresentingMeasure::from_samples(atoms, &samples)
}

/// `[P_f(s_i, s_j)]` with the boundary extension for zero entries.
pub fn perspective_matrix(mean: &OperatorMean, s: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(s.len(), s.len(), |i, j| mean.perspective(s[i], s[j]))
}

/// Outcome of a single-tuple dominance test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Dominance {
    pub dominated: bool,
    pub min_eigenvalue: f64,
    /// Spectral norm of the (symmetrized) ratio matrix.
    pub ratio_norm: f64,
}

/// Tests `f ⪯ g` on one tuple: is `[P_f(s_i,s_j)/P_g(s_i,s_j)]` positive semidefinite?
///
/// The ratio matrix is symmetrized before its smallest eigenvalue is taken
/// (it is already symmetric for non-weighted means). A negative verdict refutes
/// `f ⪯ g`; a positive one certifies only this tuple.
pub fn dominance_check(
    f: &OperatorMean,
    g: &OperatorMean,
    s: &[f64],
    tol: f64,
) -> Result<Dominance> {
    if s.is_empty() {
        return Err(Error::InvalidArgument(
            "dominance check needs a nonempty tuple".into(),
        ));
    }
    if let Some(bad) = s.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "tuple entry {bad} is not strictly positive"
        )));
    }
    let m = s.len();
    let mut ratio = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let den = g.perspective(s[i], s[j]);
            if den == 0.0 {
                return Err(Error::ZeroDenominator(s[i], s[j]));
            }
            ratio[(i, j)] = f.perspective(s[i], s[j]) / den;
        }
    }
    let sym = (&ratio + ratio.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, 10_000)
        .ok_or(Error::ConvergenceFailure("symmetric eigensolver"))?;
    let min_eigenvalue = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let ratio_norm = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(Dominance {
        dominated: min_eigenvalue >= -tol,
        min_eigenvalue,
        ratio_norm,
    })
}
