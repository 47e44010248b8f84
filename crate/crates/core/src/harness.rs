//! Monte Carlo replication engine for PCS estimation and δ-sweep curves.
//!
//! Replication `i` of a run always draws from stream `(seed, i)`, and the
//! aggregation is pure integer arithmetic, so results are bit-identical for
//! any execution order and any number of worker threads.

use rayon::prelude::*;

use crate::distributions::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::numeric::normal_quantile;
use crate::procedure::{run_biz, BizParams, RunOutcome, SampleSource};
use crate::rng::{derive_seed, stream, RandomStream};

/// A fully specified sampling problem: one distribution per alternative and
/// the identity of the true best.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    specs: Vec<DistributionSpec>,
    best: usize,
    label: String,
}

impl ProblemConfig {
    /// Validates that `best` indexes a maximal mean.
    pub fn new(
        specs: Vec<DistributionSpec>,
        best: usize,
        label: impl Into<String>,
    ) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::InvalidParameter(
                "problem needs at least one alternative".into(),
            ));
        }
        if best >= specs.len() {
            return Err(Error::InvalidParameter(format!(
                "best index {best} out of range for k = {}",
                specs.len()
            )));
        }
        let best_mean = specs[best].mean();
        if specs.iter().any(|s| s.mean() > best_mean) {
            return Err(Error::InvalidParameter(
                "best must have a maximal mean".into(),
            ));
        }
        Ok(Self {
            specs,
            best,
            label: label.into(),
        })
    }

    pub fn k(&self) -> usize {
        self.specs.len()
    }

    pub fn specs(&self) -> &[DistributionSpec] {
        &self.specs
    }

    pub fn best(&self) -> usize {
        self.best
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl SampleSource for ProblemConfig {
    fn alternatives(&self) -> usize {
        self.k()
    }
    fn best(&self) -> usize {
        self.best
    }
    fn draw(&self, alternative: usize, rng: &mut RandomStream) -> f64 {
        self.specs[alternative].sample(rng)
    }
}

/// Aggregate of a replication batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub reps: u64,
    pub correct: u64,
    /// Point estimate `correct / reps`.
    pub pcs: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_total_samples: f64,
    pub mean_stages: f64,
}

impl McResult {
    pub fn ci_half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }
}

/// Confidence-interval construction for the binomial PCS estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CiMethod {
    /// Wald interval `p̂ ± z·√(p̂(1−p̂)/n)`, clipped to [0, 1].
    #[default]
    NormalApprox,
    /// Wilson score interval; better behaved near 0 and 1.
    Wilson,
}

/// Two-sided binomial confidence interval with the default
/// normal-approximation method.
pub fn binomial_ci(correct: u64, reps: u64, level: f64) -> Result<(f64, f64)> {
    binomial_ci_with(correct, reps, level, CiMethod::NormalApprox)
}

pub fn binomial_ci_with(
    correct: u64,
    reps: u64,
    level: f64,
    method: CiMethod,
) -> Result<(f64, f64)> {
    if reps == 0 {
        return Err(Error::EmptyReplications);
    }
    if correct > reps {
        return Err(Error::InvalidParameter(format!(
            "correct = {correct} exceeds reps = {reps}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level must lie in (0,1), got {level}"
        )));
    }
    let n = reps as f64;
    let p = correct as f64 / n;
    let z = normal_quantile(0.5 + level / 2.0);
    match method {
        CiMethod::NormalApprox => {
            let half = z * (p * (1.0 - p) / n).sqrt();
            Ok(((p - half).max(0.0), (p + half).min(1.0)))
        }
        CiMethod::Wilson => {
            let z2 = z * z;
            let denom = 1.0 + z2 / n;
            let center = (p + z2 / (2.0 * n)) / denom;
            let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
            // pin the degenerate edges exactly
            let low = if correct == 0 {
                0.0
            } else {
                (center - half).max(0.0)
            };
            let high = if correct == reps {
                1.0
            } else {
                (center + half).min(1.0)
            };
            Ok((low, high))
        }
    }
}

enum Acc {
    Counts {
        reps: u64,
        correct: u64,
        samples: u64,
        stages: u64,
    },
    Failed {
        index: u64,
        error: Error,
    },
}

impl Acc {
    fn empty() -> Self {
        Acc::Counts {
            reps: 0,
            correct: 0,
            samples: 0,
            stages: 0,
        }
    }

    fn one(outcome: &RunOutcome) -> Self {
        Acc::Counts {
            reps: 1,
            correct: outcome.correct as u64,
            samples: outcome.total_samples,
            stages: outcome.stages,
        }
    }

    /// Order-independent combine; on multiple failures the smallest
    /// replication index wins so error reports are deterministic too.
    fn combine(self, other: Self) -> Self {
        match (self, other) {
            (
                Acc::Counts {
                    reps: r1,
                    correct: c1,
                    samples: s1,
                    stages: t1,
                },
                Acc::Counts {
                    reps: r2,
                    correct: c2,
                    samples: s2,
                    stages: t2,
                },
            ) => Acc::Counts {
                reps: r1 + r2,
                correct: c1 + c2,
                samples: s1 + s2,
                stages: t1 + t2,
            },
            (Acc::Failed { index: a, error: e }, Acc::Failed { index: b, error: f }) => {
                if a <= b {
                    Acc::Failed { index: a, error: e }
                } else {
                    Acc::Failed { index: b, error: f }
                }
            }
            (f @ Acc::Failed { .. }, _) | (_, f @ Acc::Failed { .. }) => f,
        }
    }
}

/// Run `reps` independent replications of an arbitrary procedure, with
/// replication `i` on stream `(seed, i)`, and aggregate correctness counts
/// into an [`McResult`] with a 95% confidence interval.
///
/// The result is bit-identical regardless of execution order or degree of
/// parallelism; procedure errors are reported with the smallest failing
/// replication index.
pub fn run_replications<F>(run: F, reps: u64, seed: u64) -> Result<McResult>
where
    F: Fn(&mut RandomStream) -> Result<RunOutcome> + Sync,
{
    run_replications_with(run, reps, seed, CiMethod::NormalApprox)
}

pub fn run_replications_with<F>(
    run: F,
    reps: u64,
    seed: u64,
    ci_method: CiMethod,
) -> Result<McResult>
where
    F: Fn(&mut RandomStream) -> Result<RunOutcome> + Sync,
{
    if reps == 0 {
        return Err(Error::EmptyReplications);
    }
    let acc = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            match run(&mut rng) {
                Ok(outcome) => Acc::one(&outcome),
                Err(error) => Acc::Failed { index: i, error },
            }
        })
        .reduce(Acc::empty, Acc::combine);

    match acc {
        Acc::Failed { index, error } => Err(Error::Replication {
            index,
            source: Box::new(error),
        }),
        Acc::Counts {
            reps: r,
            correct,
            samples,
            stages,
        } => {
            debug_assert_eq!(r, reps);
            let (ci_low, ci_high) = binomial_ci_with(correct, reps, 0.95, ci_method)?;
            Ok(McResult {
                reps,
                correct,
                pcs: correct as f64 / reps as f64,
                ci_low,
                ci_high,
                mean_total_samples: samples as f64 / reps as f64,
                mean_stages: stages as f64 / reps as f64,
            })
        }
    }
}

/// PCS of the discrete procedure on `config` over `reps` replications.
pub fn estimate_pcs(
    config: &ProblemConfig,
    params: &BizParams,
    reps: u64,
    seed: u64,
) -> Result<McResult> {
    estimate_pcs_with(config, params, reps, seed, CiMethod::NormalApprox)
}

pub fn estimate_pcs_with(
    config: &ProblemConfig,
    params: &BizParams,
    reps: u64,
    seed: u64,
    ci_method: CiMethod,
) -> Result<McResult> {
    run_replications_with(
        |rng| run_biz(config, params, rng),
        reps,
        seed,
        ci_method,
    )
}

/// A mean profile `μ_x = δ·a_x` with fixed variances: the configuration
/// family behind PCS-versus-δ curves. The slippage profile
/// `a = (0, …, 0, 1)` puts the top gap exactly at δ.
#[derive(Debug, Clone, PartialEq)]
pub struct SlippageTemplate {
    pub a: Vec<f64>,
    pub variances: Vec<f64>,
    pub family: Family,
    pub label: String,
}

impl SlippageTemplate {
    pub fn new(a: Vec<f64>, variances: Vec<f64>, family: Family, label: impl Into<String>) -> Self {
        Self {
            a,
            variances,
            family,
            label: label.into(),
        }
    }

    /// The standard slippage profile over `k` alternatives with unit
    /// variances: `a = (0, …, 0, 1)`.
    pub fn standard(k: usize, family: Family) -> Self {
        let mut a = vec![0.0; k];
        a[k - 1] = 1.0;
        Self::new(a, vec![1.0; k], family, "slippage")
    }

    /// Index of the best alternative (argmax of `a`, ties toward the
    /// highest index, matching the convention that the last alternative is
    /// the nominal best).
    pub fn best(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.a.iter().enumerate() {
            if *v >= self.a[best] {
                best = i;
            }
        }
        best
    }

    /// Materialize the problem at a given δ.
    pub fn config_for(&self, delta: f64) -> Result<ProblemConfig> {
        if self.a.len() != self.variances.len() {
            return Err(Error::InvalidParameter(format!(
                "profile has {} drifts but {} variances",
                self.a.len(),
                self.variances.len()
            )));
        }
        let specs = self
            .a
            .iter()
            .zip(&self.variances)
            .map(|(&ax, &var)| DistributionSpec::new(self.family, delta * ax, var))
            .collect::<Result<Vec<_>>>()?;
        ProblemConfig::new(specs, self.best(), self.label.clone())
    }
}

/// Estimate PCS across a δ grid. `make_config` materializes the problem at
/// each δ (means scale with δ, variances stay fixed); the procedure's own
/// δ parameter is set to the grid value. Grid point `j` uses the child
/// seed `derive_seed(seed, j)` for its replication streams, so each point
/// is independently reproducible.
pub fn sweep_delta<F>(
    make_config: F,
    grid: &[f64],
    params: &BizParams,
    reps: u64,
    seed: u64,
) -> Result<Vec<(f64, McResult)>>
where
    F: Fn(f64) -> Result<ProblemConfig>,
{
    sweep_delta_with(make_config, grid, params, reps, seed, CiMethod::NormalApprox)
}

pub fn sweep_delta_with<F>(
    make_config: F,
    grid: &[f64],
    params: &BizParams,
    reps: u64,
    seed: u64,
    ci_method: CiMethod,
) -> Result<Vec<(f64, McResult)>>
where
    F: Fn(f64) -> Result<ProblemConfig>,
{
    validate_grid(grid)?;
    let mut results = Vec::with_capacity(grid.len());
    for (j, &delta) in grid.iter().enumerate() {
        let config = make_config(delta)?;
        let mut point_params = params.clone();
        point_params.delta = delta;
        let point_seed = derive_seed(seed, j as u64);
        let result = estimate_pcs_with(&config, &point_params, reps, point_seed, ci_method)?;
        results.push((delta, result));
    }
    Ok(results)
}

/// Check a δ grid: nonempty, finite, positive, strictly monotone (either
/// direction).
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty δ grid".into()));
    }
    if grid.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::InvalidParameter(
            "δ grid entries must be finite and positive".into(),
        ));
    }
    if grid.len() > 1 {
        let increasing = grid.windows(2).all(|w| w[1] > w[0]);
        let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
        if !increasing && !decreasing {
            return Err(Error::InvalidParameter(
                "δ grid must be strictly monotone".into(),
            ));
        }
    }
    Ok(())
}
