//! The three built-in slippage experiments, each a PCS-versus-δ sweep over
//! a 20-point log grid on [0.1, 10] with p* = 0.9 and maximum elimination:
//!
//! - **a** — known, mildly heterogeneous variances: standard deviations
//!   fall linearly from 1.0 (alternative 1) to 0.5 (the best), n0 = 0.
//!   Typical behavior: the guarantee holds at every δ.
//! - **b** — unknown, highly heterogeneous variances: the best alternative's
//!   variance is 100, all others 1, with a deliberately small n0 = 15.
//!   Chosen to show under-delivery at moderate δ.
//! - **c** — the same variances as (b) but known, with n0 = 0. The most
//!   pathological of the three; PCS still converges back to p* as δ → 0.
//!
//! Desk scale (k = 10, 2000 replications) keeps runs short; paper scale is
//! k = 100 with 10⁴ replications, which is minutes-to-hours at the small-δ
//! end of the grid.

use biz::procedure::{BizParams, VarianceMode};
use biz::rng::derive_seed;
use biz::{sweep_delta_with, CiMethod, Family, SlippageTemplate};

use crate::error::{AppError, AppResult};
use crate::output::SweepRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    A,
    B,
    C,
}

impl Figure {
    pub fn name(&self) -> &'static str {
        match self {
            Figure::A => "a",
            Figure::B => "b",
            Figure::C => "c",
        }
    }
}

pub const DESK_K: usize = 10;
pub const DESK_REPS: u64 = 2000;
pub const PAPER_K: usize = 100;
pub const PAPER_REPS: u64 = 10_000;
pub const P_STAR: f64 = 0.9;
pub const GRID_POINTS: usize = 20;
pub const GRID_LO: f64 = 0.1;
pub const GRID_HI: f64 = 10.0;

/// Logarithmically spaced grid from `hi` down to `lo`, endpoints included.
pub fn log_grid(points: usize, lo: f64, hi: f64) -> Vec<f64> {
    assert!(points >= 2 && lo > 0.0 && hi > lo);
    let ratio = lo / hi;
    (0..points)
        .map(|j| hi * ratio.powf(j as f64 / (points - 1) as f64))
        .collect()
}

/// The default figure grid: 20 log-spaced δ from 10 down to 0.1.
pub fn default_grid() -> Vec<f64> {
    log_grid(GRID_POINTS, GRID_LO, GRID_HI)
}

/// The figure's slippage template, n0, and variance mode at a given k.
pub fn figure_setup(which: Figure, k: usize) -> (SlippageTemplate, u64, bool) {
    let mut a = vec![0.0; k];
    a[k - 1] = 1.0;
    match which {
        Figure::A => {
            // standard deviations linear from 1.0 down to 0.5 at the best
            let variances: Vec<f64> = (0..k)
                .map(|x| {
                    let sd = 1.0 - 0.5 * x as f64 / (k - 1) as f64;
                    sd * sd
                })
                .collect();
            let template =
                SlippageTemplate::new(a, variances, Family::Normal, format!("figure-a-k{k}"));
            (template, 0, true)
        }
        Figure::B | Figure::C => {
            let mut variances = vec![1.0; k];
            variances[k - 1] = 100.0;
            let known = which == Figure::C;
            let n0 = if known { 0 } else { 15 };
            let label = format!("figure-{}-k{k}", which.name());
            let template = SlippageTemplate::new(a, variances, Family::Normal, label);
            (template, n0, known)
        }
    }
}

/// Run one figure at the given scale and return its CSV rows (descending δ,
/// one row per grid point, each with its derived per-point seed).
pub fn run_figure(
    which: Figure,
    k: usize,
    reps: u64,
    seed: u64,
    ci_method: CiMethod,
) -> AppResult<Vec<SweepRow>> {
    if k < 2 {
        return Err(AppError::Validation(format!(
            "figure k must be >= 2, got {k}"
        )));
    }
    let (template, n0, known) = figure_setup(which, k);
    let variance_mode = if known {
        VarianceMode::Known(template.variances.clone())
    } else {
        VarianceMode::Unknown
    };
    // the per-point δ overwrites the placeholder inside the sweep
    let params = BizParams::new(P_STAR, GRID_HI, n0, k, variance_mode);
    let grid = default_grid();
    let results = sweep_delta_with(
        |d| template.config_for(d),
        &grid,
        &params,
        reps,
        seed,
        ci_method,
    )?;
    Ok(results
        .into_iter()
        .enumerate()
        .map(|(j, (delta, result))| SweepRow {
            delta,
            result,
            seed: derive_seed(seed, j as u64),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_descending_log_spaced_with_exact_endpoints() {
        let grid = default_grid();
        assert_eq!(grid.len(), 20);
        assert_eq!(grid[0], 10.0);
        assert!((grid[19] - 0.1).abs() < 1e-12);
        for w in grid.windows(2) {
            assert!(w[1] < w[0]);
        }
        // constant ratio between neighbors
        let r0 = grid[1] / grid[0];
        for w in grid.windows(2) {
            assert!((w[1] / w[0] - r0).abs() < 1e-12);
        }
    }

    #[test]
    fn figure_a_variance_ladder_endpoints() {
        let (template, n0, known) = figure_setup(Figure::A, 100);
        assert_eq!(template.variances[0], 1.0);
        assert!((template.variances[99] - 0.25).abs() < 1e-15);
        assert!(known);
        assert_eq!(n0, 0);
        // monotone decreasing toward the best
        for w in template.variances.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn figure_b_and_c_share_variances() {
        let (tb, n0b, known_b) = figure_setup(Figure::B, 10);
        let (tc, n0c, known_c) = figure_setup(Figure::C, 10);
        assert_eq!(tb.variances, tc.variances);
        assert_eq!(tb.variances[9], 100.0);
        assert_eq!(tb.variances[0], 1.0);
        assert!(!known_b && known_c);
        assert_eq!((n0b, n0c), (15, 0));
    }
}
