//! Ranking and selection with the Bayes-inspired indifference-zone (BIZ)
//! procedure.
//!
//! The library has five pieces:
//!
//! - [`distributions`]: sampling families parameterized by (mean, variance),
//!   so experiment configs stay family-agnostic.
//! - [`selection`]: the elimination / terminal-threshold state machine that
//!   maps q-value paths to a selected alternative. It is shared verbatim by
//!   the discrete procedure and the continuous-time oracle.
//! - [`procedure`]: the discrete-time BIZ procedure (q-statistics, the
//!   variance-paced sampling rule, known- and unknown-variance modes).
//! - [`oracle`]: the continuous-time limit of the procedure, driven by
//!   discretized Brownian motion. Its selection probability is the target
//!   the discrete procedure approaches as the indifference parameter
//!   shrinks.
//! - [`harness`]: a deterministic, parallel Monte Carlo replication engine
//!   estimating the probability of correct selection (PCS) with confidence
//!   intervals, plus δ-sweep curve generation.

pub mod distributions;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod oracle;
pub mod procedure;
pub mod rng;
pub mod selection;

pub use distributions::{DistributionSpec, Family};
pub use error::{Error, Result};
pub use harness::{
    binomial_ci, binomial_ci_with, estimate_pcs, estimate_pcs_with, run_replications,
    run_replications_with, sweep_delta, sweep_delta_with, CiMethod, McResult, ProblemConfig,
    SlippageTemplate,
};
pub use oracle::{q_continuous, run_continuous_biz, BrownianOracleConfig};
pub use procedure::{
    compute_beta, compute_q, recommended_c, run_biz, run_biz_observed, sampling_rule, select_z,
    BizParams, ProcedureState, RunOutcome, SampleSource, VarianceMode, ZRule,
};
pub use rng::{derive_seed, stream, RandomStream};
pub use selection::{Elimination, SelectionMachine, StepOutcome};
