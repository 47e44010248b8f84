//! The discrete-time BIZ sequential selection procedure.
//!
//! The procedure maintains an active set of candidate alternatives and a
//! per-alternative statistic
//!
//! ```text
//! q_x(A) = exp(δ β Z_x/n_x) / Σ_{x'∈A} exp(δ β Z_x'/n_x'),
//! β = (Σ_{x'∈A} n_x') / (Σ_{x'∈A} λ²_x')
//! ```
//!
//! where `Z_x` is the running sum of observations from alternative `x`,
//! `n_x` its sample count, and `λ²` the known variances or their running
//! sample estimates. Alternatives are eliminated when their q drops to the
//! cutoff `c`; the survivor set is sampled in proportion to variance, paced
//! by the highest-variance alternative `z`; the run terminates when some q
//! reaches the running threshold that starts at `p_star`. The elimination /
//! termination logic itself lives in [`crate::selection`] and is shared
//! with the continuous-time oracle.

use crate::error::{Error, Result};
use crate::numeric::softmax_in_place;
use crate::rng::RandomStream;
use crate::selection::{Elimination, SelectionMachine, StepOutcome};

/// How the procedure obtains the sampling variances λ²_x.
#[derive(Debug, Clone, PartialEq)]
pub enum VarianceMode {
    /// Variances are known inputs; `n0 = 0` is permitted.
    Known(Vec<f64>),
    /// Variances are estimated from the data; requires `n0 ≥ 2` so the
    /// first-stage sample variances exist.
    Unknown,
}

/// Rule for choosing the pacing alternative `z` in the sampling rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZRule {
    /// argmax λ²: chosen once after the first stage and held fixed unless
    /// `z` itself is eliminated. This is the analyzed variant; with known
    /// variances it makes `n_x(t)` and `β_t` deterministic.
    #[default]
    MaxVariance,
    /// argmin n_x/λ²_x, re-evaluated every stage. Provided for
    /// experimentation; no validity claim is attached to it.
    MinCountOverVariance,
}

/// Tuning parameters of a BIZ run.
#[derive(Debug, Clone, PartialEq)]
pub struct BizParams {
    /// Target probability of correct selection, in (1/k, 1).
    pub p_star: f64,
    /// Elimination cutoff, in [0, 1 − p_star^{1/(k−1)}]. The upper end is
    /// "maximum elimination" and is the recommended choice.
    pub c: f64,
    /// Indifference-zone parameter δ > 0, in observation units.
    pub delta: f64,
    /// First-stage sample size per alternative.
    pub n0: u64,
    /// Per-alternative batch sizes B_x ≥ 1; `z` receives `B_z` new samples
    /// each stage.
    pub batch: Vec<u64>,
    pub variance_mode: VarianceMode,
    pub z_rule: ZRule,
    /// Opt-in replacement value for a zero sample-variance estimate in
    /// unknown-variance mode. `None` (the default) makes it a hard error,
    /// since silently flooring would hide degenerate inputs.
    pub variance_floor: Option<f64>,
    /// Safety cap on total samples drawn; exceeding it aborts the run with
    /// [`Error::StageCapExceeded`].
    pub sample_cap: u64,
}

/// Recommended elimination cutoff `1 − p_star^{1/(k−1)}` (maximum
/// elimination).
pub fn recommended_c(p_star: f64, k: usize) -> f64 {
    1.0 - p_star.powf(1.0 / (k as f64 - 1.0))
}

pub const DEFAULT_SAMPLE_CAP: u64 = 100_000_000;

impl BizParams {
    /// Params with the recommended cutoff, unit batches, and defaults for
    /// the remaining knobs.
    pub fn new(p_star: f64, delta: f64, n0: u64, k: usize, variance_mode: VarianceMode) -> Self {
        Self {
            p_star,
            c: recommended_c(p_star, k),
            delta,
            n0,
            batch: vec![1; k],
            variance_mode,
            z_rule: ZRule::default(),
            variance_floor: None,
            sample_cap: DEFAULT_SAMPLE_CAP,
        }
    }

    /// Check every invariant against the problem size `k`.
    pub fn validate(&self, k: usize) -> Result<()> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "procedure requires k >= 2 alternatives, got {k}"
            )));
        }
        if !(self.p_star.is_finite() && self.p_star > 1.0 / k as f64 && self.p_star < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p_star must lie in (1/k, 1) = ({:.6}, 1), got {}",
                1.0 / k as f64,
                self.p_star
            )));
        }
        let c_max = recommended_c(self.p_star, k);
        if !(self.c.is_finite() && self.c >= 0.0 && self.c <= c_max) {
            return Err(Error::InvalidParameter(format!(
                "c must lie in [0, 1 - p_star^(1/(k-1))] = [0, {c_max:.6}], got {}",
                self.c
            )));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must be finite and positive, got {}",
                self.delta
            )));
        }
        if self.batch.len() != k {
            return Err(Error::InvalidParameter(format!(
                "batch has {} entries for k = {k}",
                self.batch.len()
            )));
        }
        if self.batch.contains(&0) {
            return Err(Error::InvalidParameter(
                "batch entries must be >= 1".into(),
            ));
        }
        match &self.variance_mode {
            VarianceMode::Known(vars) => {
                if vars.len() != k {
                    return Err(Error::InvalidParameter(format!(
                        "known variances has {} entries for k = {k}",
                        vars.len()
                    )));
                }
                if vars.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::InvalidParameter(
                        "known variances must be finite and strictly positive".into(),
                    ));
                }
            }
            VarianceMode::Unknown => {
                if self.n0 < 2 {
                    return Err(Error::InvalidParameter(format!(
                        "unknown-variance mode requires n0 >= 2, got {}",
                        self.n0
                    )));
                }
            }
        }
        if let Some(floor) = self.variance_floor {
            if !(floor.is_finite() && floor > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "variance_floor must be finite and positive, got {floor}"
                )));
            }
        }
        if self.sample_cap == 0 {
            return Err(Error::InvalidParameter("sample_cap must be >= 1".into()));
        }
        Ok(())
    }
}

/// Streaming count / sum / M2 accumulator. The mean is `sum/count` (the sum
/// is the store, so it agrees exactly with any other running sum over the
/// same draws), and M2 follows the Welford recurrence driven by that mean.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StreamingStats {
    count: u64,
    sum: f64,
    m2: f64,
}

impl StreamingStats {
    pub fn push(&mut self, x: f64) {
        let delta = if self.count == 0 {
            0.0
        } else {
            x - self.sum / self.count as f64
        };
        self.count += 1;
        self.sum += x;
        let delta2 = x - self.sum / self.count as f64;
        self.m2 += delta * delta2;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance; `None` below two observations.
    pub fn sample_variance(&self) -> Option<f64> {
        if self.count < 2 {
            None
        } else {
            // rounding can push m2 a hair negative for constant data
            Some((self.m2 / (self.count - 1) as f64).max(0.0))
        }
    }
}

/// Full mutable state of one BIZ run.
#[derive(Debug, Clone)]
pub struct ProcedureState {
    machine: SelectionMachine,
    stage: u64,
    counts: Vec<u64>,
    sums: Vec<f64>,
    stats: Vec<StreamingStats>,
    z: usize,
    total_samples: u64,
}

impl ProcedureState {
    pub fn new(k: usize, p_star: f64, c: f64) -> Self {
        Self {
            machine: SelectionMachine::new(k, p_star, c),
            stage: 0,
            counts: vec![0; k],
            sums: vec![0.0; k],
            stats: vec![StreamingStats::default(); k],
            z: 0,
            total_samples: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn active(&self) -> &[usize] {
        self.machine.active()
    }

    pub fn is_active(&self, x: usize) -> bool {
        self.machine.is_active(x)
    }

    pub fn threshold(&self) -> f64 {
        self.machine.threshold()
    }

    pub fn stage(&self) -> u64 {
        self.stage
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn stats(&self) -> &[StreamingStats] {
        &self.stats
    }

    pub fn z_index(&self) -> usize {
        self.z
    }

    pub fn total_samples(&self) -> u64 {
        self.total_samples
    }

    pub fn eliminations(&self) -> &[Elimination] {
        self.machine.eliminations()
    }

    /// Record one observation from `alternative`. Keeps the two bookkeeping
    /// paths (plain sums and streaming stats) in lockstep.
    pub fn record(&mut self, alternative: usize, value: f64) {
        self.counts[alternative] += 1;
        self.sums[alternative] += value;
        self.stats[alternative].push(value);
        self.total_samples += 1;
    }

    /// λ² used in β and the sampling rule: the known value or the current
    /// sample estimate, with the optional floor applied to a zero estimate.
    pub fn effective_variance(&self, params: &BizParams, x: usize) -> Result<f64> {
        match &params.variance_mode {
            VarianceMode::Known(vars) => Ok(vars[x]),
            VarianceMode::Unknown => {
                let est = self.stats[x].sample_variance().unwrap_or(0.0);
                if est > 0.0 {
                    Ok(est)
                } else if let Some(floor) = params.variance_floor {
                    Ok(floor)
                } else {
                    Err(Error::ZeroVarianceEstimate {
                        alternative: x,
                        stage: self.stage,
                    })
                }
            }
        }
    }

    /// Per-alternative λ² values for the current stage, valid at active
    /// indices. Known mode borrows the parameter vector; unknown mode
    /// fills `scratch` with the current estimates (flooring or failing on
    /// zeros per the params).
    fn effective_variances<'a>(
        &self,
        params: &'a BizParams,
        scratch: &'a mut Vec<f64>,
    ) -> Result<&'a [f64]> {
        match &params.variance_mode {
            VarianceMode::Known(vars) => Ok(vars),
            VarianceMode::Unknown => {
                scratch.clear();
                scratch.resize(self.k(), 0.0);
                for &x in self.active() {
                    scratch[x] = self.effective_variance(params, x)?;
                }
                Ok(scratch)
            }
        }
    }

    fn min_active_count(&self) -> u64 {
        self.active()
            .iter()
            .map(|&x| self.counts[x])
            .min()
            .expect("active set is never empty")
    }

    /// argmax of Z/n over the active set, ties to the lowest index.
    pub fn leader(&self) -> usize {
        let mut best = self.active()[0];
        let mut best_ratio = self.sums[best] / self.counts[best] as f64;
        for &x in &self.active()[1..] {
            let ratio = self.sums[x] / self.counts[x] as f64;
            if ratio > best_ratio {
                best = x;
                best_ratio = ratio;
            }
        }
        best
    }

    /// One time point of the shared selection machine, with q computed from
    /// the current sums, counts, and effective variances. β and q are
    /// recomputed from scratch on the reduced active set after every
    /// elimination inside the sweep.
    pub fn step_machine(&mut self, params: &BizParams) -> Result<StepOutcome> {
        let mut scratch = Vec::new();
        self.step_machine_reusing(params, &mut scratch)
    }

    fn step_machine_reusing(
        &mut self,
        params: &BizParams,
        var_scratch: &mut Vec<f64>,
    ) -> Result<StepOutcome> {
        let vars = self.effective_variances(params, var_scratch)?;
        let counts = &self.counts;
        let sums = &self.sums;
        let delta = params.delta;
        Ok(self.machine.step(self.stage, |active, out| {
            let beta = beta_over(active, counts, vars);
            out.clear();
            out.extend(
                active
                    .iter()
                    .map(|&x| delta * beta * (sums[x] / counts[x] as f64)),
            );
            softmax_in_place(out);
        }))
    }
}

fn beta_over(active: &[usize], counts: &[u64], variances: &[f64]) -> f64 {
    let n: u64 = active.iter().map(|&x| counts[x]).sum();
    let v: f64 = active.iter().map(|&x| variances[x]).sum();
    debug_assert!(v > 0.0);
    n as f64 / v
}

/// β over the current active set: total active samples divided by total
/// active variance. Requires every active alternative to have been sampled
/// at least once (so the ratios Z/n exist downstream).
pub fn compute_beta(state: &ProcedureState, params: &BizParams) -> Result<f64> {
    debug_assert!(
        state.active().iter().all(|&x| state.counts[x] >= 1),
        "beta requires at least one sample per active alternative"
    );
    let mut scratch = Vec::new();
    let vars = state.effective_variances(params, &mut scratch)?;
    Ok(beta_over(state.active(), &state.counts, vars))
}

/// q-vector for the given Z/n ratios: a stabilized softmax of
/// `delta * beta * ratio`. Entries are positive, sum to one, and the
/// computation is shift-invariant in the ratios. Non-finite inputs are a
/// programming error.
pub fn compute_q(zn_ratios: &[f64], beta: f64, delta: f64) -> Vec<f64> {
    assert!(beta > 0.0 && delta > 0.0, "beta and delta must be positive");
    let mut out: Vec<f64> = zn_ratios.iter().map(|r| delta * beta * r).collect();
    softmax_in_place(&mut out);
    out
}

/// Pacing alternative for the sampling rule, per `params.z_rule`.
/// Ties break to the lowest index.
pub fn select_z(state: &ProcedureState, params: &BizParams) -> usize {
    let score = |x: usize| -> f64 {
        let var = match &params.variance_mode {
            VarianceMode::Known(vars) => vars[x],
            VarianceMode::Unknown => state.stats[x].sample_variance().unwrap_or(0.0),
        };
        match params.z_rule {
            // argmax variance, expressed as a min of the negation
            ZRule::MaxVariance => -var,
            // n/λ²; a zero estimate makes the ratio +inf, so a degenerate
            // alternative never paces the others
            ZRule::MinCountOverVariance => state.counts[x] as f64 / var,
        }
    };
    let mut best = state.active()[0];
    let mut best_score = score(best);
    for &x in &state.active()[1..] {
        let s = score(x);
        if s < best_score {
            best = x;
            best_score = s;
        }
    }
    best
}

/// Target counts for the next stage, aligned with the active set:
/// `ceil(λ²_x (n_z + B_z) / λ²_z)`, with `z` itself pinned to exactly
/// `n_z + B_z`. Realized counts are `max(target, current)` — samples are
/// never discarded; the caller draws the difference.
pub fn sampling_rule(state: &ProcedureState, params: &BizParams) -> Result<Vec<u64>> {
    let mut targets = Vec::new();
    sampling_rule_into(state, params, &mut targets)?;
    Ok(targets)
}

fn sampling_rule_into(
    state: &ProcedureState,
    params: &BizParams,
    targets: &mut Vec<u64>,
) -> Result<()> {
    let z = state.z;
    debug_assert!(state.is_active(z), "z must be an active alternative");
    let var_z = state.effective_variance(params, z)?;
    let paced = state.counts[z] + params.batch[z];
    targets.clear();
    for &x in state.active() {
        if x == z {
            targets.push(paced);
        } else {
            let var_x = state.effective_variance(params, x)?;
            let target = (var_x * paced as f64 / var_z).ceil();
            debug_assert!(target.is_finite() && target >= 0.0);
            targets.push(target as u64);
        }
    }
    Ok(())
}

/// Anything the procedure can draw observations from: the real problem
/// configuration, or a scripted source in tests.
pub trait SampleSource {
    /// Number of alternatives k.
    fn alternatives(&self) -> usize;
    /// Index of the true best alternative (largest mean), used only for
    /// the outcome's correctness flag.
    fn best(&self) -> usize;
    /// One observation from `alternative`.
    fn draw(&self, alternative: usize, rng: &mut RandomStream) -> f64;
}

/// Result of one complete run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// The selected alternative.
    pub selected: usize,
    /// Whether `selected` is the source's true best.
    pub correct: bool,
    /// Total observations drawn across all alternatives.
    pub total_samples: u64,
    /// Sampling stages executed.
    pub stages: u64,
    /// Every elimination, in order, with the q-value at removal.
    pub eliminations: Vec<Elimination>,
}

/// Run the procedure to completion. Identical `(source, params, stream
/// state)` produce the identical outcome, elimination log included.
pub fn run_biz<S: SampleSource + ?Sized>(
    source: &S,
    params: &BizParams,
    rng: &mut RandomStream,
) -> Result<RunOutcome> {
    run_biz_observed(source, params, rng, |_| {})
}

/// [`run_biz`] with a per-stage observer, invoked after every sampling
/// stage with the post-stage state. Useful for tracing sample schedules.
pub fn run_biz_observed<S: SampleSource + ?Sized>(
    source: &S,
    params: &BizParams,
    rng: &mut RandomStream,
    mut observer: impl FnMut(&ProcedureState),
) -> Result<RunOutcome> {
    let k = source.alternatives();
    if k == 0 {
        return Err(Error::InvalidParameter("no alternatives".into()));
    }
    if k == 1 {
        // no competition: select the only alternative without sampling
        return Ok(RunOutcome {
            selected: 0,
            correct: source.best() == 0,
            total_samples: 0,
            stages: 0,
            eliminations: Vec::new(),
        });
    }
    params.validate(k)?;

    let mut state = ProcedureState::new(k, params.p_star, params.c);

    for x in 0..k {
        for _ in 0..params.n0 {
            state.record(x, source.draw(x, rng));
        }
    }
    state.z = select_z(&state, params);

    let mut var_scratch = Vec::new();
    let mut targets = Vec::new();
    let mut active_scratch = Vec::new();

    let selected = loop {
        // q (and hence both thresholds) is only evaluated once every
        // active alternative has at least one observation; with n0 = 0 the
        // first sampling stage runs before the first evaluation.
        if state.min_active_count() >= 1 {
            if let StepOutcome::Select(x) = state.step_machine_reusing(params, &mut var_scratch)? {
                break x;
            }
        }

        match params.z_rule {
            ZRule::MaxVariance => {
                if !state.is_active(state.z) {
                    state.z = select_z(&state, params);
                }
            }
            ZRule::MinCountOverVariance => state.z = select_z(&state, params),
        }

        sampling_rule_into(&state, params, &mut targets)?;
        active_scratch.clear();
        active_scratch.extend_from_slice(state.active());
        for (i, &x) in active_scratch.iter().enumerate() {
            let realized = targets[i].max(state.counts[x]);
            while state.counts[x] < realized {
                state.record(x, source.draw(x, rng));
            }
        }
        state.stage += 1;

        if state.total_samples > params.sample_cap {
            return Err(Error::StageCapExceeded {
                total_samples: state.total_samples,
                cap: params.sample_cap,
            });
        }
        observer(&state);
    };

    // The terminal q-argmax and the Z/n-argmax coincide (q is strictly
    // increasing in Z/n over a common active set); select via the ratios.
    let selected_by_ratio = state.leader();
    debug_assert_eq!(selected, selected_by_ratio);

    Ok(RunOutcome {
        selected: selected_by_ratio,
        correct: selected_by_ratio == source.best(),
        total_samples: state.total_samples,
        stages: state.stage,
        eliminations: state.machine.into_eliminations(),
    })
}
