//! Folding the fusion engine over an event log.

use std::path::Path;
use std::time::Instant;

use relpos::sim::generate_scenario;
use relpos::{Engine, GroundTruth, MeasurementEvent, Prior, RangingBatch};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::formats::{EstimateTimeline, EventLog};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub timeline: EstimateTimeline,
    /// Wall-clock seconds spent integrating each ranging batch.
    pub batch_seconds: Vec<f64>,
    pub failures: usize,
    pub dropped_ranges: usize,
}

/// Generates the scenario described by `cfg`; the log's priors are the true
/// initial poses.
pub fn simulate(cfg: &RunConfig) -> Result<(GroundTruth<f64>, EventLog)> {
    let (truth, events) = generate_scenario(&cfg.scenario()?)?;
    let priors = truth.initial_poses();
    Ok((truth, EventLog { priors, events }))
}

/// Replays `log`. Events sharing a timestamp are applied inertial first,
/// then all of their ranges as one batch; one timeline row is recorded per
/// timestamp, after a row for the priors at t = 0.
pub fn run_log(log: &EventLog, cfg: &RunConfig) -> Result<RunOutput> {
    let mut engine = Engine::new(cfg.engine()?)?;
    for (&u, &pose) in &log.priors {
        let prior = if cfg.init_shift > 0.0 {
            Prior::Offset {
                pose,
                shift: cfg.init_shift,
            }
        } else {
            Prior::Known(pose)
        };
        engine.register_user(u, prior)?;
    }
    let mut timeline = EstimateTimeline {
        rows: vec![(0.0, engine.snapshot())],
        config_hash: cfg.hash(),
        seed: cfg.seed,
    };
    let mut batch_seconds = Vec::new();
    let mut failures = 0;

    let events = &log.events;
    let mut i = 0;
    while i < events.len() {
        let t = events[i].timestamp();
        let end = events[i..]
            .iter()
            .position(|e| e.timestamp() != t)
            .map_or(events.len(), |k| i + k);
        let mut ranges = Vec::new();
        for e in &events[i..end] {
            match e {
                MeasurementEvent::Inertial(m) => engine.apply_inertial(m).map_err(data_error)?,
                MeasurementEvent::Range(r) if cfg.use_ranging => ranges.push(*r),
                MeasurementEvent::Range(_) => {}
            }
        }
        if !ranges.is_empty() {
            let batch = RangingBatch::new(ranges).map_err(data_error)?;
            let start = Instant::now();
            let report = engine.process_batch(&batch).map_err(data_error)?;
            batch_seconds.push(start.elapsed().as_secs_f64());
            failures += report.failures;
        }
        timeline.rows.push((t, engine.snapshot()));
        i = end;
    }
    Ok(RunOutput {
        timeline,
        batch_seconds,
        failures,
        dropped_ranges: engine.dropped_ranges(),
    })
}

fn data_error(e: relpos::Error) -> HarnessError {
    match e {
        relpos::Error::Config(_) => HarnessError::Core(e),
        other => HarnessError::Data(other.to_string()),
    }
}

pub fn run_replay(path: &Path, cfg: &RunConfig) -> Result<RunOutput> {
    run_log(&EventLog::load(path)?, cfg)
}
