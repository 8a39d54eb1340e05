//! End-to-end acceptance checks on the default synthetic scenario.
//!
//! Runs as a plain binary so that every check reports a line, and exits
//! non-zero if any of them fails.

use std::process::ExitCode;
use std::time::Instant;

use relpos::filter::systematic_indices;
use relpos::model::effective_sample_size;
use relpos::ranging::log_range_likelihood;
use relpos::{Pose, RangingNoise};
use relpos_harness::config::RunConfig;
use relpos_harness::metrics::{linear_slope, mean, median};
use relpos_harness::sweep::{score_all, seeded, RunScore, SweepAxis};

const SEEDS: usize = 10;

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn scores(cfg: &RunConfig) -> Vec<RunScore> {
    score_all(&seeded(cfg, SEEDS), false).expect("run succeeds")
}

fn mean_rmse(s: &[RunScore]) -> f64 {
    mean(&s.iter().map(|r| r.rmse).collect::<Vec<_>>())
}

fn at(axis: SweepAxis, v: f64, base: &RunConfig) -> RunConfig {
    axis.apply(base, v).expect("valid grid value")
}

fn fusion_beats_dead_reckoning() -> Outcome {
    let cfg = RunConfig::default();
    let start = Instant::now();
    let fused = mean_rmse(&scores(&cfg));
    let elapsed = start.elapsed().as_secs_f64();
    let imu_only = mean_rmse(&scores(&RunConfig {
        use_ranging: false,
        ..cfg
    }));
    Outcome {
        pass: fused <= 3.0 && fused <= 0.5 * imu_only && elapsed <= 120.0,
        detail: format!("fused {fused:.3} m, imu-only {imu_only:.3} m, {elapsed:.1} s for {SEEDS} runs"),
    }
}

fn sigma_r_sweep_shape() -> Outcome {
    let base = RunConfig::default();
    let grid = [0.125, 0.5, 2.0, 8.0];
    let rmse: Vec<f64> = grid
        .iter()
        .map(|&v| mean_rmse(&scores(&at(SweepAxis::SigmaR, v, &base))))
        .collect();
    let best = rmse.iter().copied().fold(f64::INFINITY, f64::min);
    let at_two = rmse[2];
    Outcome {
        pass: at_two <= 1.1 * best,
        detail: format!("rmse over sigma_r {grid:?} = {rmse:.3?}; sigma_r=2 is {:.2}x the minimum", at_two / best),
    }
}

fn particle_count_plateau() -> Outcome {
    let base = RunConfig::default();
    let r = |m: f64| mean_rmse(&scores(&at(SweepAxis::Particles, m, &base)));
    let (r50, r500, r1000) = (r(50.0), r(500.0), r(1000.0));
    let rel = (r500 - r1000).abs() / r500.min(r1000);
    Outcome {
        pass: rel <= 0.15 && r50 >= r500,
        detail: format!("M=50 {r50:.4}, M=500 {r500:.4}, M=1000 {r1000:.4}; 500 vs 1000 differ by {:.1}%", 100.0 * rel),
    }
}

fn dual_filter_recovery() -> Outcome {
    let base = RunConfig {
        init_shift: 4.0,
        ..RunConfig::default()
    };
    let without = mean_rmse(&scores(&at(SweepAxis::Alpha, 0.0, &base)));
    let with = mean_rmse(&scores(&at(SweepAxis::Alpha, 0.01, &base)));
    let gain = 1.0 - with / without;
    Outcome {
        pass: gain >= 0.2,
        detail: format!("alpha=0 {without:.3} m, alpha=0.01 {with:.3} m, {:.0}% lower", 100.0 * gain),
    }
}

fn update_latency() -> Outcome {
    let base = RunConfig::default();
    let grid = [50.0, 100.0, 200.0, 500.0, 1000.0];
    let medians: Vec<f64> = grid
        .iter()
        .map(|&m| {
            let runs = score_all(&seeded(&at(SweepAxis::Particles, m, &base), 2), false).expect("run succeeds");
            let times: Vec<f64> = runs.iter().flat_map(|r| r.batch_seconds.iter().copied()).collect();
            median(&times)
        })
        .collect();
    let increasing = medians.windows(2).all(|w| w[1] > w[0]);
    let at_500 = medians[3];
    Outcome {
        pass: at_500 <= 0.05 && increasing,
        detail: format!(
            "median ms per batch over M {grid:?} = {:.3?}",
            medians.iter().map(|s| 1e3 * s).collect::<Vec<_>>()
        ),
    }
}

fn drift_curve() -> Outcome {
    let base = RunConfig {
        use_ranging: false,
        ..RunConfig::default()
    };
    let grid = [0.1, 0.2, 0.4, 0.8];
    let mut slopes = Vec::new();
    let mut finals = Vec::new();
    for &v in &grid {
        let runs = scores(&at(SweepAxis::ImuNoiseScale, v, &base));
        let n = runs[0].error_timeline.len();
        let averaged: Vec<(f64, f64)> = (0..n)
            .map(|i| (runs[0].error_timeline[i].0, mean(&runs.iter().map(|r| r.error_timeline[i].1).collect::<Vec<_>>())))
            .collect();
        slopes.push(linear_slope(&averaged));
        finals.push(averaged[n - 1].1);
    }
    let pass = slopes.iter().all(|&s| s > 0.0) && finals.windows(2).all(|w| w[1] > w[0]);
    Outcome {
        pass,
        detail: format!("slopes {slopes:.5?} m/s, final errors {finals:.3?} m"),
    }
}

/// A compact cross-section of the exact invariants; the full property suites
/// live in the per-crate tests.
fn property_spot_checks() -> Outcome {
    let w = [0.1, 0.2, 0.3, 0.4];
    let ess = effective_sample_size(&w).expect("normalized");
    let mut replication_ok = true;
    for k in 0..1000 {
        let idx = systematic_indices(&w, (k as f64 + 0.5) / 1000.0);
        for (j, &wj) in w.iter().enumerate() {
            let c = idx.iter().filter(|&&i| i == j).count() as f64;
            replication_ok &= c >= (4.0 * wj).floor() && c <= (4.0 * wj).ceil();
        }
    }
    let noise = RangingNoise::<f64>::new(2.0).expect("positive");
    let a = Pose::new(0.0, 0.0, 0.0);
    let b = Pose::new(3.0, 4.0, 1.0);
    let peak = log_range_likelihood(5.0, &a, &b, &noise).expect("valid").exp();
    let sym = log_range_likelihood(4.0, &a, &b, &noise).expect("valid")
        == log_range_likelihood(4.0, &b, &a, &noise).expect("valid");
    let pass = (1.0..=4.0).contains(&ess)
        && replication_ok
        && (peak - 0.199_471_140_200_716_3).abs() < 1e-12
        && sym;
    Outcome {
        pass,
        detail: format!("ess {ess:.4}, replication bounds {replication_ok}, peak {peak:.10}, symmetric {sym}"),
    }
}

fn main() -> ExitCode {
    let checks: [Check; 7] = [
        ("1 fusion beats dead reckoning", fusion_beats_dead_reckoning),
        ("2 sigma_r sweep shape", sigma_r_sweep_shape),
        ("3 particle-count plateau", particle_count_plateau),
        ("4 dual-filter recovery", dual_filter_recovery),
        ("5 update latency", update_latency),
        ("6 drift curve", drift_curve),
        ("7 property spot checks", property_spot_checks),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let o = check();
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
