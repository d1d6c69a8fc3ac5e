use std::fs;
use std::path::{Path, PathBuf};

use aluthge_core::corpus::{write_corpus, CorpusKind, MatrixSampler};
use aluthge_core::dynamics::{iterate, predict_arithmetic_limit, DEFAULT_MAX_STEPS};
use aluthge_core::io::{read_matrix, MatrixFile};
use aluthge_core::linalg::{svd, ComplexMatrix};
use aluthge_core::means::{dominance_check, MeanKind, OperatorMean};
use aluthge_core::numrange::{range_of_transform_report, RangeReport, DEFAULT_ANGLES};
use aluthge_core::shiftlab::{build_oscillating_weights, sandwich_trace};
use aluthge_core::transform::{
    aluthge_closed_form, aluthge_quadrature_oracle, aluthge_transform, property_residuals,
    ClosedFormKind, PropertyResiduals, QuadratureOptions, INVERTIBILITY_THRESHOLD,
};
use aluthge_core::verify::{self, CheckReport};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{config, CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// What a successful command found. Any entry in `violations` turns into exit code 2.
#[derive(Debug, Default)]
pub struct Outcome {
    pub violations: Vec<String>,
}

impl Outcome {
    fn from_violations(violations: Vec<String>) -> Self {
        Self { violations }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Closed,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    Transform,
    Dynamics,
    Shift,
    Ranges,
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_csv<T: Serialize>(rows: &[T], out: Option<&Path>) -> CliResult<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| config(format!("CSV buffer: {e}")))?;
    let text = String::from_utf8(bytes).map_err(|e| config(e.to_string()))?;
    match out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_matrix(path: &Path) -> CliResult<ComplexMatrix> {
    read_matrix(path).map_err(|e| match e {
        aluthge_core::Error::Io(source) => CliError::Io {
            path: path.display().to_string(),
            source,
        },
        other => other.into(),
    })
}

fn parse_mean(desc: &str) -> CliResult<OperatorMean> {
    OperatorMean::parse_descriptor(desc).map_err(|e| config(format!("mean `{desc}`: {e}")))
}

// ---------------------------------------------------------------- transform

#[derive(Args, Clone, Debug)]
pub struct TransformArgs {
    /// Matrix file (.json or .csv).
    #[arg(long)]
    pub matrix: PathBuf,
    /// Mean descriptor, e.g. `geometric:0.5` or `power:0.5:t=-1`.
    #[arg(long)]
    pub mean: String,
    /// Independent oracle to compare against; picked automatically when omitted.
    #[arg(long, value_enum)]
    pub oracle: Option<OracleKind>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the sampled scalar and unitary used by the property checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Oracle tolerance relative to the spectral norm of T
    /// (default 1e-9 for the closed form, 1e-5 for quadrature).
    #[arg(long)]
    pub residual_tol: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub property_tol: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct OracleReport {
    kind: OracleKind,
    tag: &'static str,
    residual: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TransformReport {
    schema_version: u32,
    mean: String,
    weight: f64,
    spectral_norm: f64,
    delta: MatrixFile,
    oracle: Option<OracleReport>,
    alpha: [f64; 2],
    properties: PropertyResiduals,
    property_tolerance: f64,
    property_violations: Vec<String>,
}

pub fn transform(args: &TransformArgs) -> CliResult<Outcome> {
    let t = load_matrix(&args.matrix)?;
    let mean = parse_mean(&args.mean)?;
    let norm = t.spectral_norm();
    let delta = aluthge_transform(&t, &mean)?.delta;

    let closed = ClosedFormKind::for_mean(&mean);
    let oracle_kind = match args.oracle {
        Some(OracleKind::Closed) if closed.is_none() => {
            return Err(config(format!("no closed form for {}", mean.name())))
        }
        Some(kind) => Some(kind),
        None if closed.is_some() => Some(OracleKind::Closed),
        None if mean.measure().is_some() && quadrature_applies(&t) => Some(OracleKind::Quadrature),
        None => None,
    };
    let oracle = match oracle_kind {
        Some(OracleKind::Closed) => {
            let c = aluthge_closed_form(&t, closed.expect("checked above"))?;
            let tolerance = args.residual_tol.unwrap_or(1e-9);
            let residual = delta.distance(&c) / norm.max(f64::MIN_POSITIVE);
            Some(OracleReport {
                kind: OracleKind::Closed,
                tag: "closed-form-agreement",
                residual,
                tolerance,
                passed: residual <= tolerance,
            })
        }
        Some(OracleKind::Quadrature) => {
            let q = aluthge_quadrature_oracle(&t, &mean, QuadratureOptions::default())?;
            let tolerance = args.residual_tol.unwrap_or(1e-5);
            let residual = delta.distance(&q) / norm.max(f64::MIN_POSITIVE);
            Some(OracleReport {
                kind: OracleKind::Quadrature,
                tag: "integral-representation",
                residual,
                tolerance,
                passed: residual <= tolerance,
            })
        }
        None => None,
    };

    let mut sampler = MatrixSampler::new(args.seed);
    let alpha = sampler.gaussian();
    let v = sampler.haar_unitary(t.rows());
    let properties = property_residuals(&t, &mean, alpha, &v)?;

    let mut violations = Vec::new();
    if let Some(o) = oracle.as_ref().filter(|o| !o.passed) {
        violations.push(format!(
            "{}: residual {:.3e} > {:.1e}",
            o.tag, o.residual, o.tolerance
        ));
    }
    let tol = args.property_tol;
    let checks = [
        ("homogeneity", Some(properties.homogeneity)),
        ("unitary-covariance", Some(properties.unitary_covariance)),
        ("shift-identity", properties.shift_identity),
        ("norm-contraction", Some(properties.norm_excess)),
        ("trace-preservation", Some(properties.trace)),
    ];
    for (tag, value) in checks {
        if let Some(r) = value.filter(|r| r.is_nan() || *r > tol) {
            violations.push(format!("{tag}: residual {r:.3e} > {tol:.1e}"));
        }
    }

    let report = TransformReport {
        schema_version: SCHEMA_VERSION,
        mean: mean.name(),
        weight: mean.weight(),
        spectral_norm: norm,
        delta: MatrixFile::from_matrix(&delta),
        oracle,
        alpha: [alpha.re, alpha.im],
        properties,
        property_tolerance: tol,
        property_violations: violations.clone(),
    };
    emit_json(&report, args.out.as_deref())?;
    Ok(Outcome::from_violations(violations))
}

fn quadrature_applies(t: &ComplexMatrix) -> bool {
    svd(t)
        .map(|s| {
            let max = s.max_singular_value();
            let min = s
                .singular_values
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            max > 0.0 && min >= INVERTIBILITY_THRESHOLD * max
        })
        .unwrap_or(false)
}

// ---------------------------------------------------------------- iterate

#[derive(Args, Clone, Debug)]
pub struct IterateArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub mean: String,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    /// Stop when one step moves less than this times the spectral norm of T.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// CSV file for the per-step trace.
    #[arg(long)]
    pub emit_trace: Option<PathBuf>,
    /// JSON summary; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    pub property_tol: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct IterateReport {
    schema_version: u32,
    mean: String,
    steps: usize,
    converged: bool,
    final_step_delta: f64,
    final_defect: f64,
    rate_estimate: Option<f64>,
    /// Largest `|tr Δⁿ(T) − tr T| / ‖T‖`.
    trace_drift: f64,
    /// Largest `(‖Δⁿ⁺¹(T)‖ − ‖Δⁿ(T)‖) / ‖T‖`.
    norm_growth: f64,
    limit: Option<MatrixFile>,
    /// Distance to the predicted normal limit, relative to `‖T‖`, when one is available.
    predicted_limit_distance: Option<f64>,
    property_violations: Vec<String>,
}

pub fn iterate_cmd(args: &IterateArgs) -> CliResult<Outcome> {
    let t = load_matrix(&args.matrix)?;
    let mean = parse_mean(&args.mean)?;
    let trace = iterate(&t, &mean, args.max_steps, args.tol)?;
    let norm = t.spectral_norm().max(f64::MIN_POSITIVE);

    let trace_drift = trace
        .traces
        .iter()
        .map(|tr| (tr - t.trace()).norm() / norm)
        .fold(0.0, f64::max);
    let mut prev = t.spectral_norm();
    let mut norm_growth = f64::NEG_INFINITY;
    for x in &trace.iterates {
        let here = x.spectral_norm();
        norm_growth = norm_growth.max((here - prev) / norm);
        prev = here;
    }

    let predicted_limit_distance = match (&trace.limit, mean.kind()) {
        (Some(limit), MeanKind::Arithmetic) if mean.weight() == 0.5 => predict_arithmetic_limit(&t)
            .ok()
            .map(|p| limit.distance(&p) / norm),
        _ => None,
    };

    let mut violations = Vec::new();
    if trace_drift > args.property_tol {
        violations.push(format!(
            "trace-preservation: drift {trace_drift:.3e} > {:.1e}",
            args.property_tol
        ));
    }
    if norm_growth > args.property_tol {
        violations.push(format!(
            "norm-contraction: growth {norm_growth:.3e} > {:.1e}",
            args.property_tol
        ));
    }

    if let Some(path) = &args.emit_trace {
        emit_csv(&trace.rows(), Some(path))?;
    }
    let report = IterateReport {
        schema_version: SCHEMA_VERSION,
        mean: mean.name(),
        steps: trace.steps(),
        converged: trace.converged,
        final_step_delta: *trace.step_deltas.last().expect("at least one step"),
        final_defect: *trace.defects.last().expect("at least one step"),
        rate_estimate: trace.rate_estimate,
        trace_drift,
        norm_growth,
        limit: trace.limit.as_ref().map(MatrixFile::from_matrix),
        predicted_limit_distance,
        property_violations: violations.clone(),
    };
    emit_json(&report, args.out.as_deref())?;
    Ok(Outcome::from_violations(violations))
}

// ---------------------------------------------------------------- shift-sim

#[derive(Args, Clone, Debug)]
pub struct ShiftSimArgs {
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 2.0)]
    pub b: f64,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// Mean to iterate; its weight must equal `--lambda`. Defaults to the geometric mean.
    #[arg(long)]
    pub mean: Option<String>,
    /// CSV output; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Allowed relative excess over the harmonic/arithmetic bounds.
    #[arg(long, default_value_t = 1e-12)]
    pub sandwich_tol: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ShiftRow {
    n: usize,
    gamma0: f64,
    lower: f64,
    upper: f64,
    block_target: Option<f64>,
}

pub fn shift_sim(args: &ShiftSimArgs) -> CliResult<Outcome> {
    let mean = match &args.mean {
        Some(desc) => parse_mean(desc)?,
        None => OperatorMean::geometric(args.lambda),
    };
    if (mean.weight() - args.lambda).abs() > 1e-15 {
        return Err(config(format!(
            "mean {} has weight {}, but --lambda is {}",
            mean.name(),
            mean.weight(),
            args.lambda
        )));
    }
    let osc = build_oscillating_weights(args.a, args.b, args.levels, args.lambda)?;
    let last = *osc.switch_points.last().expect("at least two levels");
    let sandwich = sandwich_trace(&osc.weights, &mean, last)?;

    let rows: Vec<ShiftRow> = (0..=last)
        .map(|n| ShiftRow {
            n,
            gamma0: sandwich.gamma0[n],
            lower: sandwich.lower[n],
            upper: sandwich.upper[n],
            block_target: osc.block_target(n),
        })
        .collect();

    let mut violations = Vec::new();
    let scale = args.a.max(args.b);
    let excess = sandwich.max_violation() / scale;
    if excess > args.sandwich_tol {
        violations.push(format!(
            "harmonic-arithmetic-sandwich: excess {excess:.3e} > {:.1e}",
            args.sandwich_tol
        ));
    }
    for (k, (&n, &target)) in osc.switch_points.iter().zip(&osc.targets).enumerate() {
        let radius = 0.5f64.powi(k as i32 + 1);
        let gamma = sandwich.gamma0[n];
        if gamma.is_nan() || (gamma - target).abs() >= radius {
            violations.push(format!(
                "shift-iteration-diverges: first weight {gamma} at n={n} is not within {radius} of {target}"
            ));
        }
    }

    emit_csv(&rows, args.out.as_deref())?;
    eprintln!(
        "switch points {:?}, first weights at switches {:?}",
        osc.switch_points,
        osc.switch_points
            .iter()
            .map(|&n| sandwich.gamma0[n])
            .collect::<Vec<_>>()
    );
    Ok(Outcome::from_violations(violations))
}

// ---------------------------------------------------------------- numrange

#[derive(Args, Clone, Debug)]
pub struct NumrangeArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Comma-separated mean descriptors.
    #[arg(long, value_delimiter = ',', required = true)]
    pub means: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_ANGLES)]
    pub angles: usize,
    /// Inclusion tolerance relative to the spectral norm of T.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct NumrangeOutput {
    schema_version: u32,
    #[serde(flatten)]
    report: RangeReport,
    property_violations: Vec<String>,
}

pub fn numrange(args: &NumrangeArgs) -> CliResult<Outcome> {
    let t = load_matrix(&args.matrix)?;
    let means = args
        .means
        .iter()
        .map(|d| parse_mean(d))
        .collect::<CliResult<Vec<_>>>()?;
    let report = range_of_transform_report(&t, &means, args.angles, args.tol)?;
    let violations: Vec<String> = (1..report.entries.len())
        .filter(|&i| !report.inclusion[i][0])
        .map(|i| {
            format!(
                "numerical-range-nesting: range of the {} transform leaves the range of T by {:.3e}",
                report.entries[i].label, report.violations[i][0]
            )
        })
        .collect();
    let output = NumrangeOutput {
        schema_version: SCHEMA_VERSION,
        report,
        property_violations: violations.clone(),
    };
    emit_json(&output, args.out.as_deref())?;
    Ok(Outcome::from_violations(violations))
}

// ---------------------------------------------------------------- dominance

#[derive(Args, Clone, Debug)]
pub struct DominanceArgs {
    /// The mean claimed to be dominated.
    #[arg(long)]
    pub lower: String,
    #[arg(long)]
    pub upper: String,
    /// A single comma-separated positive tuple; random tuples are drawn when omitted.
    #[arg(long, value_delimiter = ',')]
    pub tuple: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 6)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Accepted negative eigenvalue, relative to the norm of the ratio matrix.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct DominanceReport {
    schema_version: u32,
    lower: String,
    upper: String,
    tuples: usize,
    dominated: bool,
    /// Smallest eigenvalue of a ratio matrix divided by its norm.
    worst_relative_eigenvalue: f64,
    refuting_tuple: Option<Vec<f64>>,
}

pub fn dominance(args: &DominanceArgs) -> CliResult<Outcome> {
    let f = parse_mean(&args.lower)?;
    let g = parse_mean(&args.upper)?;
    let tuples: Vec<Vec<f64>> = if args.tuple.is_empty() {
        if args.count == 0 || args.max_len == 0 {
            return Err(config("--count and --max-len must be positive"));
        }
        let mut sampler = MatrixSampler::new(args.seed);
        (0..args.count)
            .map(|i| sampler.positive_tuple(1 + i % args.max_len))
            .collect()
    } else {
        vec![args.tuple.clone()]
    };

    let mut worst = f64::INFINITY;
    let mut refuting = None;
    for s in &tuples {
        let d = dominance_check(&f, &g, s, 0.0)?;
        let rel = d.min_eigenvalue / d.ratio_norm.max(f64::MIN_POSITIVE);
        if rel < worst {
            worst = rel;
            if rel < -args.tol {
                refuting = Some(s.clone());
            }
        }
    }
    let report = DominanceReport {
        schema_version: SCHEMA_VERSION,
        lower: f.name(),
        upper: g.name(),
        tuples: tuples.len(),
        dominated: refuting.is_none(),
        worst_relative_eigenvalue: worst,
        refuting_tuple: refuting,
    };
    emit_json(&report, args.out.as_deref())?;
    // A refuted pair is an answer, not a broken invariant.
    Ok(Outcome::default())
}

// ---------------------------------------------------------------- verify

#[derive(Args, Clone, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct VerifyReport {
    schema_version: u32,
    suite: Suite,
    seed: u64,
    passed: bool,
    checks: Vec<CheckReport>,
}

pub fn verify_cmd(args: &VerifyArgs) -> CliResult<Outcome> {
    let seed = args.seed;
    let checks = match args.suite {
        Suite::All => verify::full_suite(seed)?,
        Suite::Transform => verify::transform_checks(seed)?,
        Suite::Dynamics => verify::dynamics_checks(seed)?,
        Suite::Shift => verify::shift_checks()?,
        Suite::Ranges => verify::range_checks(seed)?,
    };
    let violations: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.tag, c.detail))
        .collect();
    for c in &checks {
        eprintln!(
            "{:<32} {} ({}/{} cases, worst {:.3e}, tol {:.1e})",
            c.tag,
            if c.passed { "ok  " } else { "FAIL" },
            c.cases - c.failures,
            c.cases,
            c.worst,
            c.tolerance
        );
    }
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        suite: args.suite,
        seed,
        passed: violations.is_empty(),
        checks,
    };
    emit_json(&report, args.out.as_deref())?;
    Ok(Outcome::from_violations(violations))
}

// ---------------------------------------------------------------- corpus

#[derive(Args, Clone, Debug)]
pub struct CorpusArgs {
    /// invertible, singular, normal, nearly-normal or shift-truncation.
    #[arg(long)]
    pub kind: CorpusKind,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub dir: PathBuf,
}

pub fn corpus(args: &CorpusArgs) -> CliResult<Outcome> {
    let paths =
        write_corpus(&args.dir, args.kind, args.m, args.count, args.seed).map_err(|e| match e {
            aluthge_core::Error::Io(source) => CliError::Io {
                path: args.dir.display().to_string(),
                source,
            },
            aluthge_core::Error::InvalidArgument(msg) => config(msg),
            other => other.into(),
        })?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(Outcome::default())
}
