//! Experiment file schema: strict TOML with `schema_version`, an experiment
//! kind, and nested `problem` / `params` tables. Unknown fields are
//! rejected; the only defaulted fields are the elimination cutoff `c`
//! (recommended maximum), the batch vector (all ones), and the pacing rule
//! (max-variance).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use biz::harness::validate_grid;
use biz::procedure::{recommended_c, BizParams, VarianceMode, ZRule};
use biz::{BrownianOracleConfig, DistributionSpec, Family, ProblemConfig, SlippageTemplate};

use crate::error::{AppError, AppResult};
use crate::figures::Figure;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub reps: u64,
    pub seed: u64,
    /// CSV destination path.
    pub output: PathBuf,
    /// δ grid for `sweep`; forbidden elsewhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Single,
    Sweep,
    FigureA,
    FigureB,
    FigureC,
    Continuous,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Single => "single",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::FigureA => "figure_a",
            ExperimentKind::FigureB => "figure_b",
            ExperimentKind::FigureC => "figure_c",
            ExperimentKind::Continuous => "continuous",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    /// Number of alternatives; required with `slippage`, otherwise checked
    /// against the vector lengths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Standard slippage profile a = (0, …, 0, 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slippage: Option<bool>,
    /// Explicit mean profile; alternative means are δ·a.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    /// Explicit means in observation units (single runs only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    /// Sampling family; not used by continuous experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyName>,
    /// Common variance for all alternatives…
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    /// …or one variance per alternative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variances: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Normal,
    Uniform,
    ShiftedExponential,
    ScaledBernoulli,
}

impl From<FamilyName> for Family {
    fn from(name: FamilyName) -> Family {
        match name {
            FamilyName::Normal => Family::Normal,
            FamilyName::Uniform => Family::Uniform,
            FamilyName::ShiftedExponential => Family::ShiftedExponential,
            FamilyName::ScaledBernoulli => Family::ScaledBernoulli,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub p_star: f64,
    /// Defaults to 1 − p_star^{1/(k−1)}.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Indifference-zone parameter; required for `single`, forbidden for
    /// `sweep` (the grid supplies it) and `continuous`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<u64>,
    /// Defaults to all ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_mode: Option<VarianceModeName>,
    /// Defaults to `max_variance`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_rule: Option<ZRuleName>,
    /// Opt-in floor for zero sample-variance estimates (unknown mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_floor: Option<f64>,
    /// Euler time step; continuous experiments only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceModeName {
    Known,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZRuleName {
    MaxVariance,
    MinCountOverVariance,
}

impl From<ZRuleName> for ZRule {
    fn from(name: ZRuleName) -> ZRule {
        match name {
            ZRuleName::MaxVariance => ZRule::MaxVariance,
            ZRuleName::MinCountOverVariance => ZRule::MinCountOverVariance,
        }
    }
}

/// Strict parse with line/field diagnostics from the TOML deserializer.
pub fn parse_experiment(text: &str) -> AppResult<ExperimentFile> {
    let file: ExperimentFile =
        toml::from_str(text).map_err(|e| AppError::Parse(e.to_string().trim().replace('\n', " ")))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(AppError::Validation(format!(
            "schema_version: expected {SCHEMA_VERSION}, got {}",
            file.schema_version
        )));
    }
    Ok(file)
}

/// Inverse of [`parse_experiment`] for valid files.
pub fn serialize_experiment(file: &ExperimentFile) -> AppResult<String> {
    toml::to_string(file).map_err(|e| AppError::Runtime(format!("serialize: {e}")))
}

/// A fully validated experiment, ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub action: Action,
    pub reps: u64,
    pub seed: u64,
    pub output: PathBuf,
}

#[derive(Debug, Clone)]
pub enum Action {
    Single {
        config: ProblemConfig,
        params: BizParams,
    },
    Sweep {
        template: SlippageTemplate,
        grid: Vec<f64>,
        params: BizParams,
    },
    Figure {
        which: Figure,
        k: Option<usize>,
    },
    Continuous {
        cfg: BrownianOracleConfig,
    },
}

fn fail(path: &str, msg: impl std::fmt::Display) -> AppError {
    AppError::Validation(format!("{path}: {msg}"))
}

/// Check invariants and materialize the domain objects. Every violation
/// names the offending field path.
pub fn resolve(file: &ExperimentFile) -> AppResult<Resolved> {
    if file.reps == 0 {
        return Err(fail("reps", "must be >= 1"));
    }
    if file.output.as_os_str().is_empty() {
        return Err(fail("output", "must be a non-empty path"));
    }

    let action = match file.experiment {
        ExperimentKind::Single => resolve_single(file)?,
        ExperimentKind::Sweep => resolve_sweep(file)?,
        ExperimentKind::Continuous => resolve_continuous(file)?,
        ExperimentKind::FigureA | ExperimentKind::FigureB | ExperimentKind::FigureC => {
            resolve_figure(file)?
        }
    };

    Ok(Resolved {
        action,
        reps: file.reps,
        seed: file.seed,
        output: file.output.clone(),
    })
}

struct ProblemShape {
    k: usize,
    a: Option<Vec<f64>>,
    means: Option<Vec<f64>>,
    variances: Vec<f64>,
    family: Family,
    label: String,
}

/// Common validation of the problem table. `allow_means` is true only for
/// single runs (a sweep's means are functions of δ).
fn resolve_problem(section: &ProblemSection, allow_means: bool) -> AppResult<ProblemShape> {
    let mut profile_count = 0;
    profile_count += section.slippage.unwrap_or(false) as usize;
    profile_count += section.a.is_some() as usize;
    profile_count += section.means.is_some() as usize;
    if profile_count != 1 {
        return Err(fail(
            "problem",
            "exactly one of `slippage`, `a`, `means` must be given",
        ));
    }
    if section.means.is_some() && !allow_means {
        return Err(fail(
            "problem.means",
            "explicit means are only valid for single runs; use `a` or `slippage` so means can scale with δ",
        ));
    }
    if section.slippage == Some(false) {
        return Err(fail(
            "problem.slippage",
            "must be true when present (omit it otherwise)",
        ));
    }

    let vector_len = section
        .a
        .as_ref()
        .map(Vec::len)
        .or_else(|| section.means.as_ref().map(Vec::len))
        .or_else(|| section.variances.as_ref().map(Vec::len));
    let k = match (section.k, vector_len) {
        (Some(k), Some(len)) if k != len => {
            return Err(fail(
                "problem.k",
                format!("k = {k} conflicts with a vector of length {len}"),
            ));
        }
        (Some(k), _) => k,
        (None, Some(len)) => len,
        (None, None) => {
            return Err(fail("problem.k", "required when no vector fixes the size"));
        }
    };
    if k < 1 {
        return Err(fail("problem.k", "must be >= 1"));
    }

    if let Some(a) = &section.a {
        if a.len() != k {
            return Err(fail(
                "problem.a",
                format!("length {} does not match k = {k}", a.len()),
            ));
        }
    }
    if let Some(means) = &section.means {
        if means.len() != k {
            return Err(fail(
                "problem.means",
                format!("length {} does not match k = {k}", means.len()),
            ));
        }
    }

    let variances = match (&section.variance, &section.variances) {
        (Some(_), Some(_)) => {
            return Err(fail(
                "problem.variance",
                "give either `variance` or `variances`, not both",
            ));
        }
        (Some(v), None) => vec![*v; k],
        (None, Some(vs)) => {
            if vs.len() != k {
                return Err(fail(
                    "problem.variances",
                    format!("length {} does not match k = {k}", vs.len()),
                ));
            }
            vs.clone()
        }
        (None, None) => {
            return Err(fail(
                "problem",
                "a variance model is required: `variance` or `variances`",
            ));
        }
    };
    if variances.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(fail(
            "problem.variances",
            "entries must be finite and strictly positive",
        ));
    }

    let a = if section.slippage.unwrap_or(false) {
        let mut a = vec![0.0; k];
        a[k - 1] = 1.0;
        Some(a)
    } else {
        section.a.clone()
    };

    Ok(ProblemShape {
        k,
        a,
        means: section.means.clone(),
        variances,
        family: section
            .family
            .ok_or_else(|| fail("problem.family", "required"))?
            .into(),
        label: section.label.clone().unwrap_or_default(),
    })
}

/// Build BizParams from the params table; `delta` must already be decided
/// by the caller (explicit for single, per-grid-point for sweeps).
fn resolve_params(
    section: &ParamsSection,
    k: usize,
    delta: f64,
    variances: &[f64],
) -> AppResult<BizParams> {
    let variance_mode = match section
        .variance_mode
        .ok_or_else(|| fail("params.variance_mode", "required: `known` or `unknown`"))?
    {
        VarianceModeName::Known => VarianceMode::Known(variances.to_vec()),
        VarianceModeName::Unknown => VarianceMode::Unknown,
    };
    if section.variance_floor.is_some() && variance_mode != VarianceMode::Unknown {
        return Err(fail(
            "params.variance_floor",
            "only meaningful in unknown-variance mode",
        ));
    }
    let params = BizParams {
        p_star: section.p_star,
        c: section.c.unwrap_or_else(|| recommended_c(section.p_star, k)),
        delta,
        n0: section
            .n0
            .ok_or_else(|| fail("params.n0", "required (0 is valid in known mode)"))?,
        batch: section.batch.clone().unwrap_or_else(|| vec![1; k]),
        variance_mode,
        z_rule: section.z_rule.map(Into::into).unwrap_or_default(),
        variance_floor: section.variance_floor,
        sample_cap: biz::procedure::DEFAULT_SAMPLE_CAP,
    };
    params
        .validate(k)
        .map_err(|e| AppError::Validation(format!("params: {e}")))?;
    Ok(params)
}

fn require_params(file: &ExperimentFile) -> AppResult<&ParamsSection> {
    file.params
        .as_ref()
        .ok_or_else(|| fail("params", "required for this experiment"))
}

fn require_problem(file: &ExperimentFile) -> AppResult<&ProblemSection> {
    file.problem
        .as_ref()
        .ok_or_else(|| fail("problem", "required for this experiment"))
}

fn forbid_grid(file: &ExperimentFile) -> AppResult<()> {
    if file.grid.is_some() {
        return Err(fail(
            "grid",
            format!("not valid for `{}` experiments", file.experiment.name()),
        ));
    }
    Ok(())
}

fn forbid_dt(section: &ParamsSection) -> AppResult<()> {
    if section.dt.is_some() {
        return Err(fail(
            "params.dt",
            "only valid for `continuous` experiments",
        ));
    }
    Ok(())
}

fn resolve_single(file: &ExperimentFile) -> AppResult<Action> {
    forbid_grid(file)?;
    let params_section = require_params(file)?;
    forbid_dt(params_section)?;
    let shape = resolve_problem(require_problem(file)?, true)?;
    let delta = params_section
        .delta
        .ok_or_else(|| fail("params.delta", "required for single runs"))?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(fail("params.delta", "must be finite and positive"));
    }
    let params = resolve_params(params_section, shape.k, delta, &shape.variances)?;

    let config = if let Some(means) = &shape.means {
        let specs = means
            .iter()
            .zip(&shape.variances)
            .map(|(&m, &v)| DistributionSpec::new(shape.family, m, v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| AppError::Validation(format!("problem: {e}")))?;
        let best = argmax_last(means);
        ProblemConfig::new(specs, best, shape.label.clone())
            .map_err(|e| AppError::Validation(format!("problem: {e}")))?
    } else {
        let template = SlippageTemplate::new(
            shape.a.clone().expect("profile shape guaranteed above"),
            shape.variances.clone(),
            shape.family,
            shape.label.clone(),
        );
        template
            .config_for(delta)
            .map_err(|e| AppError::Validation(format!("problem: {e}")))?
    };
    Ok(Action::Single { config, params })
}

fn resolve_sweep(file: &ExperimentFile) -> AppResult<Action> {
    let grid = file
        .grid
        .clone()
        .ok_or_else(|| fail("grid", "required for sweep experiments"))?;
    validate_grid(&grid).map_err(|e| AppError::Validation(format!("grid: {e}")))?;
    let params_section = require_params(file)?;
    forbid_dt(params_section)?;
    if params_section.delta.is_some() {
        return Err(fail(
            "params.delta",
            "not valid for sweeps; the grid supplies δ",
        ));
    }
    let shape = resolve_problem(require_problem(file)?, false)?;
    // the per-point δ replaces this placeholder inside sweep_delta
    let params = resolve_params(params_section, shape.k, grid[0], &shape.variances)?;
    let template = SlippageTemplate::new(
        shape.a.expect("sweep profiles always carry a"),
        shape.variances,
        shape.family,
        shape.label,
    );
    Ok(Action::Sweep {
        template,
        grid,
        params,
    })
}

fn resolve_continuous(file: &ExperimentFile) -> AppResult<Action> {
    forbid_grid(file)?;
    let params_section = require_params(file)?;
    for (present, path) in [
        (params_section.delta.is_some(), "params.delta"),
        (params_section.n0.is_some(), "params.n0"),
        (params_section.batch.is_some(), "params.batch"),
        (params_section.variance_mode.is_some(), "params.variance_mode"),
        (params_section.z_rule.is_some(), "params.z_rule"),
        (params_section.variance_floor.is_some(), "params.variance_floor"),
    ] {
        if present {
            return Err(fail(path, "not valid for continuous experiments"));
        }
    }
    let dt = params_section
        .dt
        .ok_or_else(|| fail("params.dt", "required for continuous experiments"))?;

    let section = require_problem(file)?;
    if section.family.is_some() {
        return Err(fail(
            "problem.family",
            "not valid for continuous experiments (paths are Brownian)",
        ));
    }
    if section.means.is_some() {
        return Err(fail(
            "problem.means",
            "continuous experiments take a drift profile `a` or `slippage`",
        ));
    }
    // family is irrelevant to the oracle; reuse the shape validation with a
    // placeholder family
    let mut patched = section.clone();
    patched.family = Some(FamilyName::Normal);
    let shape = resolve_problem(&patched, false)?;

    let volatility = shape
        .variances
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .sqrt();
    let mut cfg = BrownianOracleConfig::new(
        shape.a.expect("continuous profiles always carry a"),
        volatility,
        dt,
        params_section.p_star,
    );
    if let Some(c) = params_section.c {
        cfg.c = c;
    }
    cfg.validate()
        .map_err(|e| AppError::Validation(format!("params: {e}")))?;
    Ok(Action::Continuous { cfg })
}

fn resolve_figure(file: &ExperimentFile) -> AppResult<Action> {
    forbid_grid(file)?;
    if file.params.is_some() {
        return Err(fail(
            "params",
            "figure experiments define their own parameters",
        ));
    }
    let k = match &file.problem {
        None => None,
        Some(section) => {
            let only_k = section.slippage.is_none()
                && section.a.is_none()
                && section.means.is_none()
                && section.family.is_none()
                && section.variance.is_none()
                && section.variances.is_none()
                && section.label.is_none();
            if !only_k {
                return Err(fail(
                    "problem",
                    "figure experiments define their own problem; only `k` may be overridden",
                ));
            }
            let k = section
                .k
                .ok_or_else(|| fail("problem.k", "the only valid field here"))?;
            if k < 2 {
                return Err(fail("problem.k", "must be >= 2"));
            }
            Some(k)
        }
    };
    let which = match file.experiment {
        ExperimentKind::FigureA => Figure::A,
        ExperimentKind::FigureB => Figure::B,
        ExperimentKind::FigureC => Figure::C,
        _ => unreachable!("caller matched figure kinds"),
    };
    Ok(Action::Figure { which, k })
}

/// argmax with ties toward the highest index (the nominal best is the last
/// alternative by convention).
fn argmax_last(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v >= values[best] {
            best = i;
        }
    }
    best
}
