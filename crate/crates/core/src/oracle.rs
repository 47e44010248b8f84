//! Continuous-time limit of the procedure, driven by discretized Brownian
//! motion.
//!
//! Each alternative carries an observation process with drift `a_x` and
//! common volatility `λ_z`; the q-path
//!
//! ```text
//! q_x(A) = exp(F_x(t)/λ_z + t·a_x/λ_z²) / Σ_{x'∈A} exp(F_x'(t)/λ_z + t·a_x'/λ_z²)
//! ```
//!
//! is fed through the exact same [`SelectionMachine`](crate::selection)
//! as the discrete procedure. On the drift boundary (top gap exactly 1)
//! the worst-case selection probability of this limit equals `p_star`,
//! which makes it the reference point that discrete runs approach as the
//! indifference parameter shrinks.
//!
//! Discretization: Euler grid with exact Gaussian increments of variance
//! `dt`; both thresholds are checked at grid times only. The resulting
//! overshoot bias is controlled empirically by re-running at `dt/2` and
//! comparing estimates rather than corrected analytically.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numeric::softmax_in_place;
use crate::procedure::{recommended_c, RunOutcome, DEFAULT_SAMPLE_CAP};
use crate::rng::RandomStream;
use crate::selection::{SelectionMachine, StepOutcome};

/// Configuration of a continuous-time run.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianOracleConfig {
    /// Drift vector `a`; the last alternative is the nominal best, and the
    /// preference-zone boundary is a top gap of exactly 1.
    pub drift: Vec<f64>,
    /// Common volatility λ_z > 0.
    pub volatility: f64,
    /// Euler time step.
    pub dt: f64,
    /// Target selection probability, in (1/k, 1).
    pub p_star: f64,
    /// Elimination cutoff, in [0, 1 − p_star^{1/(k−1)}].
    pub c: f64,
    /// Safety cap on grid steps per run.
    pub max_steps: u64,
}

impl BrownianOracleConfig {
    /// Config with the recommended cutoff and default step cap.
    pub fn new(drift: Vec<f64>, volatility: f64, dt: f64, p_star: f64) -> Self {
        let k = drift.len();
        Self {
            drift,
            volatility,
            dt,
            p_star,
            c: recommended_c(p_star, k),
            max_steps: DEFAULT_SAMPLE_CAP,
        }
    }

    pub fn k(&self) -> usize {
        self.drift.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "oracle requires k >= 2 alternatives, got {k}"
            )));
        }
        if self.drift.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("drift must be finite".into()));
        }
        if !(self.volatility.is_finite() && self.volatility > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "volatility must be finite and positive, got {}",
                self.volatility
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be finite and positive, got {}",
                self.dt
            )));
        }
        if !(self.p_star.is_finite() && self.p_star > 1.0 / k as f64 && self.p_star < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p_star must lie in (1/k, 1), got {}",
                self.p_star
            )));
        }
        let c_max = recommended_c(self.p_star, k);
        if !(self.c.is_finite() && self.c >= 0.0 && self.c <= c_max) {
            return Err(Error::InvalidParameter(format!(
                "c must lie in [0, {c_max:.6}], got {}",
                self.c
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be >= 1".into()));
        }
        Ok(())
    }
}

/// q-vector at time `t` for path values `paths` (full-length, indexed by
/// alternative) over the given active set: a stabilized softmax of
/// `F_x(t)/λ_z + t·a_x/λ_z²`.
pub fn q_continuous(
    paths: &[f64],
    t: f64,
    cfg: &BrownianOracleConfig,
    active: &[usize],
) -> Vec<f64> {
    let mut out = Vec::with_capacity(active.len());
    fill_q_continuous(paths, t, cfg, active, &mut out);
    out
}

fn fill_q_continuous(
    paths: &[f64],
    t: f64,
    cfg: &BrownianOracleConfig,
    active: &[usize],
    out: &mut Vec<f64>,
) {
    let lz = cfg.volatility;
    let lz2 = lz * lz;
    out.clear();
    out.extend(
        active
            .iter()
            .map(|&x| paths[x] / lz + t * cfg.drift[x] / lz2),
    );
    softmax_in_place(out);
}

/// Simulate one continuous-time run on the Euler grid. Only active paths
/// are advanced; `total_samples` in the outcome counts Gaussian increments
/// and `stages` counts grid steps. Correct selection means the last
/// alternative was chosen.
pub fn run_continuous_biz(cfg: &BrownianOracleConfig, rng: &mut RandomStream) -> Result<RunOutcome> {
    let k = cfg.k();
    if k == 1 {
        return Ok(RunOutcome {
            selected: 0,
            correct: true,
            total_samples: 0,
            stages: 0,
            eliminations: Vec::new(),
        });
    }
    cfg.validate()?;

    let mut machine = SelectionMachine::new(k, cfg.p_star, cfg.c);
    let mut paths = vec![0.0f64; k];
    let sqrt_dt = cfg.dt.sqrt();
    let mut steps: u64 = 0;
    let mut increments: u64 = 0;

    let selected = loop {
        let t = steps as f64 * cfg.dt;
        let outcome = machine.step(steps, |active, out| {
            fill_q_continuous(&paths, t, cfg, active, out);
        });
        if let StepOutcome::Select(x) = outcome {
            break x;
        }
        if steps >= cfg.max_steps {
            return Err(Error::StageCapExceeded {
                total_samples: increments,
                cap: cfg.max_steps,
            });
        }
        for &x in machine.active() {
            let z: f64 = StandardNormal.sample(rng);
            paths[x] += sqrt_dt * z;
            increments += 1;
        }
        steps += 1;
    };

    Ok(RunOutcome {
        selected,
        correct: selected == k - 1,
        total_samples: increments,
        stages: steps,
        eliminations: machine.into_eliminations(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn two_arm_cfg() -> BrownianOracleConfig {
        BrownianOracleConfig::new(vec![0.0, 1.0], 1.0, 1e-3, 0.9)
    }

    #[test]
    fn q_uniform_at_origin() {
        let cfg = BrownianOracleConfig::new(vec![0.0, 0.5, 1.0], 1.0, 1e-3, 0.9);
        let q = q_continuous(&[0.0, 0.0, 0.0], 0.0, &cfg, &[0, 1, 2]);
        for v in &q {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn q_single_active() {
        let cfg = two_arm_cfg();
        assert_eq!(q_continuous(&[3.0, -2.0], 5.0, &cfg, &[1]), vec![1.0]);
    }

    #[test]
    fn q_hand_value() {
        // λ_z = 1, t = 2, F = (0,0), a = (0,1) → exponents (0, 2):
        // (1/(1+e²), e²/(1+e²)); reference from a 40-digit evaluation
        let cfg = two_arm_cfg();
        let q = q_continuous(&[0.0, 0.0], 2.0, &cfg, &[0, 1]);
        assert!((q[0] - 0.11920292202211756).abs() < 1e-15);
        assert!((q[1] - 0.8807970779778824).abs() < 1e-15);
    }

    #[test]
    fn dominant_drift_always_selects_best() {
        // top gap 100: expected hitting time ~0.02, and essentially always
        // in the best alternative's favor
        let cfg = BrownianOracleConfig::new(vec![0.0, 100.0], 1.0, 1e-3, 0.9);
        let mut correct = 0u32;
        for rep in 0..1000 {
            let mut rng = stream(77, rep);
            let out = run_continuous_biz(&cfg, &mut rng).unwrap();
            if out.correct {
                correct += 1;
            }
        }
        assert!(correct >= 999, "PCS {}/1000 under dominant drift", correct);
    }

    #[test]
    fn oracle_is_deterministic_per_stream() {
        let cfg = two_arm_cfg();
        let a = run_continuous_biz(&cfg, &mut stream(3, 1)).unwrap();
        let b = run_continuous_biz(&cfg, &mut stream(3, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn step_cap_is_enforced() {
        let mut cfg = two_arm_cfg();
        cfg.max_steps = 5; // far too small to terminate
        let err = run_continuous_biz(&cfg, &mut stream(0, 0)).unwrap_err();
        assert!(matches!(err, Error::StageCapExceeded { .. }));
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut cfg = two_arm_cfg();
        cfg.dt = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = two_arm_cfg();
        cfg.volatility = -1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = two_arm_cfg();
        cfg.c = 0.5; // above 1 − 0.9 = 0.1
        assert!(cfg.validate().is_err());

        assert!(two_arm_cfg().validate().is_ok());
    }
}
