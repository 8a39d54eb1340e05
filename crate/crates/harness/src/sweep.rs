//! Parameter sweeps over synthetic scenarios.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::metrics::{error_timeline, mean, median, std_dev};
use crate::replay::{run_log, simulate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    SigmaR,
    /// Sets `sigma_d = v` and `sigma_theta = v / 2` for both the generated
    /// data and the filter.
    ImuNoiseScale,
    Particles,
    Alpha,
    InitShift,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::SigmaR => "sigma_r",
            SweepAxis::ImuNoiseScale => "imu_noise_scale",
            SweepAxis::Particles => "m",
            SweepAxis::Alpha => "alpha",
            SweepAxis::InitShift => "init_shift",
        }
    }

    pub fn apply(&self, base: &RunConfig, v: f64) -> Result<RunConfig> {
        let mut cfg = base.clone();
        match self {
            SweepAxis::SigmaR => cfg.sigma_r = v,
            SweepAxis::ImuNoiseScale => {
                cfg.gen_sigma_d = v;
                cfg.gen_sigma_theta = 0.5 * v;
                cfg.sigma_d = v;
                cfg.sigma_theta = 0.5 * v;
                cfg.gen_noise_users.clear();
            }
            SweepAxis::Particles => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(HarnessError::Config(format!("particle count must be a positive integer, got {v}")));
                }
                cfg.particles = v as usize;
            }
            SweepAxis::Alpha => cfg.alpha = v,
            SweepAxis::InitShift => cfg.init_shift = v,
        }
        Ok(cfg)
    }
}

impl FromStr for SweepAxis {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sigma_r" => SweepAxis::SigmaR,
            "imu_noise_scale" => SweepAxis::ImuNoiseScale,
            "m" | "particles" => SweepAxis::Particles,
            "alpha" => SweepAxis::Alpha,
            "init_shift" => SweepAxis::InitShift,
            other => return Err(HarnessError::Usage(format!("unknown sweep axis {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub seeds: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(HarnessError::Usage("sweep grid is empty".into()));
        }
        if self.seeds == 0 {
            return Err(HarnessError::Usage("a sweep needs at least one seed".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub seeds: usize,
    pub mean_rmse: f64,
    pub std_rmse: f64,
    pub mean_update_s: f64,
    pub median_update_s: f64,
}

/// Outcome of one simulated run.
#[derive(Debug, Clone)]
pub struct RunScore {
    /// Time-averaged pairwise-distance RMSE.
    pub rmse: f64,
    pub error_timeline: Vec<(f64, f64)>,
    pub batch_seconds: Vec<f64>,
}

/// Simulates, replays and scores one configuration.
pub fn score_run(cfg: &RunConfig) -> Result<RunScore> {
    let (truth, log) = simulate(cfg)?;
    let out = run_log(&log, cfg)?;
    let errors = error_timeline(&out.timeline, &truth)?;
    let values: Vec<f64> = errors.iter().map(|e| e.1).collect();
    Ok(RunScore {
        rmse: mean(&values),
        error_timeline: errors,
        batch_seconds: out.batch_seconds,
    })
}

/// Configurations of one grid point, one per seed `base.seed + k`.
pub fn seeded(cfg: &RunConfig, seeds: usize) -> Vec<RunConfig> {
    (0..seeds as u64)
        .map(|k| RunConfig {
            seed: cfg.seed + k,
            ..cfg.clone()
        })
        .collect()
}

/// Scores every configuration, in parallel when asked; results keep input order.
pub fn score_all(cfgs: &[RunConfig], parallel: bool) -> Result<Vec<RunScore>> {
    if parallel {
        cfgs.par_iter().map(score_run).collect()
    } else {
        cfgs.iter().map(score_run).collect()
    }
}

pub fn run_sweep(spec: &SweepSpec, base: &RunConfig, parallel: bool) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut cfgs = Vec::new();
    for &v in &spec.values {
        cfgs.extend(seeded(&spec.axis.apply(base, v)?, spec.seeds));
    }
    let scores = score_all(&cfgs, parallel)?;
    Ok(spec
        .values
        .iter()
        .zip(scores.chunks(spec.seeds))
        .map(|(&value, chunk)| {
            let rmses: Vec<f64> = chunk.iter().map(|s| s.rmse).collect();
            let times: Vec<f64> = chunk.iter().flat_map(|s| s.batch_seconds.iter().copied()).collect();
            SweepRow {
                value,
                seeds: spec.seeds,
                mean_rmse: mean(&rmses),
                std_rmse: std_dev(&rmses),
                mean_update_s: if times.is_empty() { 0.0 } else { mean(&times) },
                median_update_s: if times.is_empty() { 0.0 } else { median(&times) },
            }
        })
        .collect())
}

pub fn rows_to_csv(axis: SweepAxis, rows: &[SweepRow]) -> String {
    let mut out = format!("{},seeds,mean_rmse,std_rmse,mean_update_s,median_update_s\n", axis.name());
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{:.9},{:.9}",
            r.value, r.seeds, r.mean_rmse, r.std_rmse, r.mean_update_s, r.median_update_s
        );
    }
    out
}
