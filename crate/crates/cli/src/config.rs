//! JSON experiment configs for `aluthge-lab run`.
//!
//! ```json
//! {
//!   "command": "iterate",
//!   "seed": 7,
//!   "means": ["arithmetic:0.5"],
//!   "tolerances": {"step": 1e-10},
//!   "paths": {"matrix": "t.json", "out": "summary.json", "trace": "trace.csv"},
//!   "params": {"maxSteps": 500}
//! }
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use aluthge_core::corpus::CorpusKind;
use aluthge_core::dynamics::DEFAULT_MAX_STEPS;
use aluthge_core::numrange::DEFAULT_ANGLES;
use serde::Deserialize;

use crate::commands::{
    self, CorpusArgs, DominanceArgs, IterateArgs, NumrangeArgs, OracleKind, Outcome, ShiftSimArgs,
    Suite, TransformArgs, VerifyArgs,
};
use crate::error::{config, CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfigCommand {
    Transform,
    Iterate,
    ShiftSim,
    Numrange,
    Dominance,
    Verify,
    Corpus,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub command: ConfigCommand,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub paths: ConfigPaths,
    /// Mean descriptors; `dominance` reads them as `[lower, upper]`.
    #[serde(default)]
    pub means: Vec<String>,
    #[serde(default)]
    pub params: ConfigParams,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ConfigPaths {
    pub matrix: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ConfigParams {
    pub oracle: Option<OracleKind>,
    pub max_steps: Option<usize>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub lambda: Option<f64>,
    pub levels: Option<usize>,
    pub angles: Option<usize>,
    pub tuple: Option<Vec<f64>>,
    pub count: Option<usize>,
    pub max_len: Option<usize>,
    pub suite: Option<Suite>,
    pub kind: Option<String>,
    pub m: Option<usize>,
}

impl ConfigCommand {
    fn tolerance_names(self) -> &'static [&'static str] {
        match self {
            Self::Transform => &["residual", "property"],
            Self::Iterate => &["step", "property"],
            Self::ShiftSim => &["sandwich"],
            Self::Numrange => &["inclusion"],
            Self::Dominance => &["eigenvalue"],
            Self::Verify | Self::Corpus => &[],
        }
    }
}

pub fn load(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))
}

struct Resolver<'a> {
    cfg: &'a ExperimentConfig,
    base: PathBuf,
}

impl Resolver<'_> {
    fn path(&self, p: &Option<PathBuf>) -> Option<PathBuf> {
        p.as_ref().map(|p| self.base.join(p))
    }

    fn required_path(&self, p: &Option<PathBuf>, name: &str) -> CliResult<PathBuf> {
        self.path(p)
            .ok_or_else(|| config(format!("paths.{name} is required for this command")))
    }

    fn tol(&self, name: &str, default: f64) -> f64 {
        self.cfg.tolerances.get(name).copied().unwrap_or(default)
    }

    fn one_mean(&self) -> CliResult<String> {
        match self.cfg.means.as_slice() {
            [m] => Ok(m.clone()),
            other => Err(config(format!(
                "this command takes exactly one mean, got {}",
                other.len()
            ))),
        }
    }
}

pub fn run(cfg: &ExperimentConfig, config_path: &Path) -> CliResult<Outcome> {
    let allowed = cfg.command.tolerance_names();
    if let Some(bad) = cfg
        .tolerances
        .keys()
        .find(|k| !allowed.contains(&k.as_str()))
    {
        return Err(config(format!(
            "unknown tolerance `{bad}` for {:?}; expected one of {allowed:?}",
            cfg.command
        )));
    }
    let r = Resolver {
        cfg,
        base: config_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default(),
    };
    let p = &cfg.params;
    let paths = &cfg.paths;
    match cfg.command {
        ConfigCommand::Transform => commands::transform(&TransformArgs {
            matrix: r.required_path(&paths.matrix, "matrix")?,
            mean: r.one_mean()?,
            oracle: p.oracle,
            out: r.path(&paths.out),
            seed: cfg.seed,
            residual_tol: cfg.tolerances.get("residual").copied(),
            property_tol: r.tol("property", 1e-9),
        }),
        ConfigCommand::Iterate => commands::iterate_cmd(&IterateArgs {
            matrix: r.required_path(&paths.matrix, "matrix")?,
            mean: r.one_mean()?,
            max_steps: p.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
            tol: r.tol("step", 1e-10),
            emit_trace: r.path(&paths.trace),
            out: r.path(&paths.out),
            property_tol: r.tol("property", 1e-9),
        }),
        ConfigCommand::ShiftSim => commands::shift_sim(&ShiftSimArgs {
            a: p.a.unwrap_or(1.0),
            b: p.b.unwrap_or(2.0),
            lambda: p.lambda.unwrap_or(0.5),
            levels: p.levels.unwrap_or(6),
            mean: match cfg.means.len() {
                0 => None,
                _ => Some(r.one_mean()?),
            },
            out: r.path(&paths.out),
            sandwich_tol: r.tol("sandwich", 1e-12),
        }),
        ConfigCommand::Numrange => {
            if cfg.means.is_empty() {
                return Err(config("numrange needs at least one mean"));
            }
            commands::numrange(&NumrangeArgs {
                matrix: r.required_path(&paths.matrix, "matrix")?,
                means: cfg.means.clone(),
                angles: p.angles.unwrap_or(DEFAULT_ANGLES),
                tol: r.tol("inclusion", 1e-9),
                out: r.path(&paths.out),
            })
        }
        ConfigCommand::Dominance => {
            let [lower, upper] = cfg.means.as_slice() else {
                return Err(config("dominance needs means = [lower, upper]"));
            };
            commands::dominance(&DominanceArgs {
                lower: lower.clone(),
                upper: upper.clone(),
                tuple: p.tuple.clone().unwrap_or_default(),
                count: p.count.unwrap_or(100),
                max_len: p.max_len.unwrap_or(6),
                seed: cfg.seed,
                tol: r.tol("eigenvalue", 1e-10),
                out: r.path(&paths.out),
            })
        }
        ConfigCommand::Verify => commands::verify_cmd(&VerifyArgs {
            suite: p.suite.unwrap_or(Suite::All),
            seed: cfg.seed,
            out: r.path(&paths.out),
        }),
        ConfigCommand::Corpus => {
            let kind: CorpusKind = p
                .kind
                .as_deref()
                .ok_or_else(|| config("params.kind is required for corpus"))?
                .parse()
                .map_err(|e: aluthge_core::Error| config(e.to_string()))?;
            commands::corpus(&CorpusArgs {
                kind,
                m: p.m
                    .ok_or_else(|| config("params.m is required for corpus"))?,
                count: p
                    .count
                    .ok_or_else(|| config("params.count is required for corpus"))?,
                seed: cfg.seed,
                dir: r.required_path(&paths.dir, "dir")?,
            })
        }
    }
}
