use relpos_harness::config::RunConfig;
use relpos_harness::formats::{truth_from_csv, truth_to_csv, EventLog};
use relpos_harness::metrics::{error_timeline, linear_slope, mean};
use relpos_harness::replay::{run_log, simulate};
use relpos_harness::sweep::{score_all, seeded, SweepAxis};

fn short() -> RunConfig {
    RunConfig {
        duration: 120.0,
        particles: 200,
        ..RunConfig::default()
    }
}

fn noiseless() -> RunConfig {
    RunConfig {
        gen_sigma_d: 0.0,
        gen_sigma_theta: 0.0,
        sigma_d: 0.0,
        sigma_theta: 0.0,
        range_gen_sigma: 0.0,
        alpha: 0.0,
        ..short()
    }
}

#[test]
fn noiseless_closed_loop_is_exact() {
    for use_ranging in [false, true] {
        let cfg = RunConfig { use_ranging, ..noiseless() };
        let (truth, log) = simulate(&cfg).unwrap();
        let out = run_log(&log, &cfg).unwrap();
        let errors = error_timeline(&out.timeline, &truth).unwrap();
        let worst = errors.iter().map(|e| e.1).fold(0.0, f64::max);
        assert!(worst <= 1e-9, "ranging {use_ranging}: {worst}");
    }
}

#[test]
fn empty_log_keeps_only_the_priors() {
    let cfg = short();
    let (_, log) = simulate(&cfg).unwrap();
    let empty = EventLog { priors: log.priors.clone(), events: Vec::new() };
    let out = run_log(&empty, &cfg).unwrap();
    assert_eq!(out.timeline.rows.len(), 1);
    assert_eq!(out.timeline.rows[0].1, log.priors);
    assert!(out.batch_seconds.is_empty());
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = short();
    let (truth_a, log_a) = simulate(&cfg).unwrap();
    let (truth_b, log_b) = simulate(&cfg).unwrap();
    assert_eq!(log_a.to_text(), log_b.to_text());
    assert_eq!(truth_to_csv(&truth_a), truth_to_csv(&truth_b));
    let a = run_log(&log_a, &cfg).unwrap().timeline.to_csv();
    let b = run_log(&log_b, &cfg).unwrap().timeline.to_csv();
    assert_eq!(a, b);
    let other = RunConfig { seed: 1, ..cfg.clone() };
    assert_ne!(run_log(&simulate(&other).unwrap().1, &other).unwrap().timeline.to_csv(), a);
}

#[test]
fn simulated_logs_round_trip_through_text() {
    let (truth, log) = simulate(&short()).unwrap();
    let text = log.to_text();
    let parsed = EventLog::parse(&text, "sim").unwrap();
    assert_eq!(parsed.to_text(), text);
    let truth_text = truth_to_csv(&truth);
    assert_eq!(truth_to_csv(&truth_from_csv(&truth_text, "truth").unwrap()), truth_text);
}

#[test]
fn replaying_a_parsed_log_matches_the_original() {
    let cfg = short();
    let (_, log) = simulate(&cfg).unwrap();
    let parsed = EventLog::parse(&log.to_text(), "sim").unwrap();
    assert_eq!(
        run_log(&log, &cfg).unwrap().timeline.to_csv(),
        run_log(&parsed, &cfg).unwrap().timeline.to_csv()
    );
}

#[test]
fn dead_reckoning_error_grows() {
    let cfg = RunConfig { use_ranging: false, duration: 300.0, ..short() };
    let runs = score_all(&seeded(&cfg, 3), false).unwrap();
    for r in runs {
        assert!(linear_slope(&r.error_timeline) > 0.0);
    }
}

#[test]
fn error_does_not_decrease_with_initial_shift_without_recovery() {
    let base = RunConfig { alpha: 0.0, ..short() };
    let rmse: Vec<f64> = [0.0, 1.0, 2.0, 4.0]
        .iter()
        .map(|&shift| {
            let cfg = SweepAxis::InitShift.apply(&base, shift).unwrap();
            mean(&score_all(&seeded(&cfg, 4), false).unwrap().iter().map(|r| r.rmse).collect::<Vec<_>>())
        })
        .collect();
    assert!(rmse.windows(2).all(|w| w[1] >= w[0]), "{rmse:?}");
}
