//! Behavioral tests of the replication engine: scheduling determinism,
//! confidence-interval coverage, sweep semantics, and a fast sanity point
//! from the large-gap regime.

use biz::procedure::{BizParams, RunOutcome, VarianceMode};
use biz::rng::derive_seed;
use biz::{estimate_pcs, run_replications, sweep_delta, Family, SlippageTemplate};

fn stub(correct: bool) -> RunOutcome {
    RunOutcome {
        selected: correct as usize,
        correct,
        total_samples: 3,
        stages: 1,
        eliminations: Vec::new(),
    }
}

#[test]
fn results_are_identical_across_worker_counts() {
    let template = SlippageTemplate::standard(5, Family::Normal);
    let config = template.config_for(0.8).unwrap();
    let params = BizParams::new(0.9, 0.8, 0, 5, VarianceMode::Known(vec![1.0; 5]));

    let run = |workers: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        pool.install(|| estimate_pcs(&config, &params, 2000, 31).unwrap())
    };

    let single = run(1);
    let four = run(4);
    let sixteen = run(16);
    assert_eq!(single, four);
    assert_eq!(single, sixteen);
    assert_eq!(single.reps, 2000);
}

#[test]
fn ci_covers_the_true_rate_at_nominal_frequency() {
    // Bernoulli(0.9) stub; 200 independent batches of 1000 replications.
    // The 95% normal-approximation interval should cover 0.9 in roughly
    // 90–99% of batches.
    let mut covered = 0u32;
    for batch in 0..200u64 {
        let res = run_replications(
            |rng| {
                use rand::Rng;
                Ok(stub(rng.random_bool(0.9)))
            },
            1000,
            derive_seed(777, batch),
        )
        .unwrap();
        if res.ci_low <= 0.9 && 0.9 <= res.ci_high {
            covered += 1;
        }
    }
    let rate = covered as f64 / 200.0;
    assert!(
        (0.90..=0.99).contains(&rate),
        "coverage {rate} outside [0.90, 0.99]"
    );
}

#[test]
fn single_point_sweep_reduces_to_estimate_pcs() {
    let template = SlippageTemplate::standard(3, Family::Normal);
    let params = BizParams::new(0.9, 1.0, 0, 3, VarianceMode::Known(vec![1.0; 3]));
    let sweep = sweep_delta(|d| template.config_for(d), &[0.7], &params, 500, 99).unwrap();
    assert_eq!(sweep.len(), 1);
    assert_eq!(sweep[0].0, 0.7);

    let mut point_params = params.clone();
    point_params.delta = 0.7;
    let direct = estimate_pcs(
        &template.config_for(0.7).unwrap(),
        &point_params,
        500,
        derive_seed(99, 0),
    )
    .unwrap();
    assert_eq!(sweep[0].1, direct);
}

#[test]
fn pcs_curve_decreases_toward_p_star_for_two_alternatives() {
    // Known common variance, k = 2: PCS(δ) is non-increasing toward p_star
    // as δ shrinks on a log grid, within twice the CI half-widths.
    let template = SlippageTemplate::standard(2, Family::Normal);
    let params = BizParams::new(0.9, 1.0, 0, 2, VarianceMode::Known(vec![1.0, 1.0]));
    let grid = [2.0, 1.0, 0.5, 0.2];
    let curve = sweep_delta(|d| template.config_for(d), &grid, &params, 4000, 2024).unwrap();

    for window in curve.windows(2) {
        let (_, hi_delta) = (&window[0].0, &window[0].1);
        let (_, lo_delta) = (&window[1].0, &window[1].1);
        let slack = 2.0 * (hi_delta.ci_half_width() + lo_delta.ci_half_width());
        assert!(
            lo_delta.pcs <= hi_delta.pcs + slack,
            "PCS rose from {} to {} against the trend",
            hi_delta.pcs,
            lo_delta.pcs
        );
    }
    // every point honors the guarantee in this exact-theory regime, and
    // the small-δ end sits near p_star rather than near 1
    for (delta, res) in &curve {
        assert!(
            res.pcs >= 0.9 - 2.0 * res.ci_half_width(),
            "PCS {} at δ={delta} dips below the guarantee",
            res.pcs
        );
    }
    let last = &curve.last().unwrap().1;
    assert!(last.pcs < 0.97, "PCS at δ=0.2 should approach 0.9");
}

#[test]
fn large_gap_many_alternatives_is_near_certain() {
    // δ = 10 with 100 alternatives: the gap dwarfs the noise, so the
    // procedure is essentially always right, and quickly.
    let k = 100;
    let template = SlippageTemplate::standard(k, Family::Normal);
    let config = template.config_for(10.0).unwrap();
    let params = BizParams::new(0.9, 10.0, 0, k, VarianceMode::Known(vec![1.0; k]));
    let res = estimate_pcs(&config, &params, 1000, 5).unwrap();
    assert!(res.pcs >= 0.995, "PCS {} not ≈ 1", res.pcs);
    assert!(res.mean_total_samples < 10_000.0);
}
