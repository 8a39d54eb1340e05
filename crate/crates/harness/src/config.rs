//! Flat `key=value` run configuration covering both the synthetic scenario
//! and the filter.

use std::fmt::Write as _;
use std::path::Path;

use relpos::sim::StartMode;
use relpos::{
    BandwidthRule, DetectionModel, DualTrigger, EngineConfig, FilterConfig, KdeConfig, MotionNoise,
    RangingNoise, Replacement, ScenarioConfig,
};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_users: usize,
    pub spacing: f64,
    pub speed: f64,
    pub duration: f64,
    pub imu_rate: f64,
    pub uwb_rate: f64,
    pub area_width: f64,
    pub area_height: f64,
    pub path_width: f64,
    pub path_height: f64,
    pub path_center_x: f64,
    pub path_center_y: f64,
    pub gen_sigma_d: f64,
    pub gen_sigma_theta: f64,
    /// Optional per-user generation noise, `sigma_d:sigma_theta` pairs.
    pub gen_noise_users: Vec<(f64, f64)>,
    pub range_gen_sigma: f64,
    pub max_range: f64,
    pub detection: String,
    pub start_mode: StartMode,
    pub seed: u64,

    pub particles: usize,
    pub alpha: f64,
    pub sigma_d: f64,
    pub sigma_theta: f64,
    pub theta_floor: f64,
    pub sigma_r: f64,
    pub ess_fraction: f64,
    pub kde_bandwidth: Option<f64>,
    pub kde_min_bandwidth: f64,
    pub dual_trigger: DualTrigger,
    pub replacement: Replacement,
    pub symmetric: bool,
    pub reorder_tolerance: f64,
    pub init_shift: f64,
    pub use_ranging: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_users: 6,
            spacing: 8.0,
            speed: 0.5,
            duration: 600.0,
            imu_rate: 1.0,
            uwb_rate: 0.5,
            area_width: 20.0,
            area_height: 10.0,
            path_width: 16.0,
            path_height: 6.0,
            path_center_x: 10.0,
            path_center_y: 5.0,
            gen_sigma_d: 0.2,
            gen_sigma_theta: 0.1,
            gen_noise_users: Vec::new(),
            range_gen_sigma: 0.1,
            max_range: 30.0,
            detection: "ideal".into(),
            start_mode: StartMode::Staggered,
            seed: 0,
            particles: 500,
            alpha: 0.01,
            sigma_d: 0.2,
            sigma_theta: 0.1,
            theta_floor: 0.0,
            sigma_r: 2.0,
            ess_fraction: 0.5,
            kde_bandwidth: None,
            kde_min_bandwidth: 0.25,
            dual_trigger: DualTrigger::EveryUpdate,
            replacement: Replacement::LowestWeight,
            symmetric: true,
            reorder_tolerance: 0.0,
            init_shift: 0.0,
            use_ranging: true,
        }
    }
}

/// Every recognised key, in canonical order.
pub const KEYS: &[&str] = &[
    "n_users",
    "spacing",
    "speed",
    "duration",
    "imu_rate",
    "uwb_rate",
    "area_width",
    "area_height",
    "path_width",
    "path_height",
    "path_center_x",
    "path_center_y",
    "gen_sigma_d",
    "gen_sigma_theta",
    "gen_noise_users",
    "range_gen_sigma",
    "max_range",
    "detection",
    "start_mode",
    "seed",
    "particles",
    "alpha",
    "sigma_d",
    "sigma_theta",
    "theta_floor",
    "sigma_r",
    "ess_fraction",
    "kde_bandwidth",
    "kde_min_bandwidth",
    "dual_trigger",
    "replacement",
    "symmetric",
    "reorder_tolerance",
    "init_shift",
    "use_ranging",
];

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("{key}: cannot parse {value:?}")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(HarnessError::Config(format!("{key}: expected a boolean, got {other:?}"))),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "n_users" => self.n_users = num(key, v)?,
            "spacing" => self.spacing = num(key, v)?,
            "speed" => self.speed = num(key, v)?,
            "duration" => self.duration = num(key, v)?,
            "imu_rate" => self.imu_rate = num(key, v)?,
            "uwb_rate" => self.uwb_rate = num(key, v)?,
            "area_width" => self.area_width = num(key, v)?,
            "area_height" => self.area_height = num(key, v)?,
            "path_width" => self.path_width = num(key, v)?,
            "path_height" => self.path_height = num(key, v)?,
            "path_center_x" => self.path_center_x = num(key, v)?,
            "path_center_y" => self.path_center_y = num(key, v)?,
            "gen_sigma_d" => self.gen_sigma_d = num(key, v)?,
            "gen_sigma_theta" => self.gen_sigma_theta = num(key, v)?,
            "gen_noise_users" => {
                self.gen_noise_users = if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(';')
                        .map(|pair| {
                            let (d, t) = pair.split_once(':').ok_or_else(|| {
                                HarnessError::Config(format!("{key}: expected sigma_d:sigma_theta, got {pair:?}"))
                            })?;
                            Ok((num(key, d)?, num(key, t)?))
                        })
                        .collect::<Result<_>>()?
                }
            }
            "range_gen_sigma" => self.range_gen_sigma = num(key, v)?,
            "max_range" => self.max_range = num(key, v)?,
            "detection" => match v {
                "ideal" | "indoor" => self.detection = v.to_string(),
                _ => return Err(HarnessError::Config(format!("detection: unknown model {v:?}"))),
            },
            "start_mode" => {
                self.start_mode = match v {
                    "staggered" => StartMode::Staggered,
                    "spaced" => StartMode::Spaced,
                    _ => return Err(HarnessError::Config(format!("start_mode: unknown mode {v:?}"))),
                }
            }
            "seed" => self.seed = num(key, v)?,
            "particles" => self.particles = num(key, v)?,
            "alpha" => self.alpha = num(key, v)?,
            "sigma_d" => self.sigma_d = num(key, v)?,
            "sigma_theta" => self.sigma_theta = num(key, v)?,
            "theta_floor" => self.theta_floor = num(key, v)?,
            "sigma_r" => self.sigma_r = num(key, v)?,
            "ess_fraction" => self.ess_fraction = num(key, v)?,
            "kde_bandwidth" => {
                self.kde_bandwidth = if v == "scott" { None } else { Some(num(key, v)?) }
            }
            "kde_min_bandwidth" => self.kde_min_bandwidth = num(key, v)?,
            "dual_trigger" => {
                self.dual_trigger = match v {
                    "every" => DualTrigger::EveryUpdate,
                    "failure" => DualTrigger::OnFailure,
                    _ => return Err(HarnessError::Config(format!("dual_trigger: unknown value {v:?}"))),
                }
            }
            "replacement" => {
                self.replacement = match v {
                    "lowest" => Replacement::LowestWeight,
                    "random" => Replacement::Random,
                    _ => return Err(HarnessError::Config(format!("replacement: unknown value {v:?}"))),
                }
            }
            "symmetric" => self.symmetric = boolean(key, v)?,
            "reorder_tolerance" => self.reorder_tolerance = num(key, v)?,
            "init_shift" => self.init_shift = num(key, v)?,
            "use_ranging" => self.use_ranging = boolean(key, v)?,
            _ => return Err(HarnessError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let s = match key {
            "n_users" => self.n_users.to_string(),
            "spacing" => self.spacing.to_string(),
            "speed" => self.speed.to_string(),
            "duration" => self.duration.to_string(),
            "imu_rate" => self.imu_rate.to_string(),
            "uwb_rate" => self.uwb_rate.to_string(),
            "area_width" => self.area_width.to_string(),
            "area_height" => self.area_height.to_string(),
            "path_width" => self.path_width.to_string(),
            "path_height" => self.path_height.to_string(),
            "path_center_x" => self.path_center_x.to_string(),
            "path_center_y" => self.path_center_y.to_string(),
            "gen_sigma_d" => self.gen_sigma_d.to_string(),
            "gen_sigma_theta" => self.gen_sigma_theta.to_string(),
            "gen_noise_users" => self
                .gen_noise_users
                .iter()
                .map(|(d, t)| format!("{d}:{t}"))
                .collect::<Vec<_>>()
                .join(";"),
            "range_gen_sigma" => self.range_gen_sigma.to_string(),
            "max_range" => self.max_range.to_string(),
            "detection" => self.detection.clone(),
            "start_mode" => match self.start_mode {
                StartMode::Staggered => "staggered".into(),
                StartMode::Spaced => "spaced".into(),
            },
            "seed" => self.seed.to_string(),
            "particles" => self.particles.to_string(),
            "alpha" => self.alpha.to_string(),
            "sigma_d" => self.sigma_d.to_string(),
            "sigma_theta" => self.sigma_theta.to_string(),
            "theta_floor" => self.theta_floor.to_string(),
            "sigma_r" => self.sigma_r.to_string(),
            "ess_fraction" => self.ess_fraction.to_string(),
            "kde_bandwidth" => self.kde_bandwidth.map_or("scott".into(), |h| h.to_string()),
            "kde_min_bandwidth" => self.kde_min_bandwidth.to_string(),
            "dual_trigger" => match self.dual_trigger {
                DualTrigger::EveryUpdate => "every".into(),
                DualTrigger::OnFailure => "failure".into(),
            },
            "replacement" => match self.replacement {
                Replacement::LowestWeight => "lowest".into(),
                Replacement::Random => "random".into(),
            },
            "symmetric" => self.symmetric.to_string(),
            "reorder_tolerance" => self.reorder_tolerance.to_string(),
            "init_shift" => self.init_shift.to_string(),
            "use_ranging" => self.use_ranging.to_string(),
            _ => return None,
        };
        Some(s)
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| HarnessError::Parse {
                path: origin.to_string(),
                line: i + 1,
                msg: format!("expected key=value, got {line:?}"),
            })?;
            cfg.set(k.trim(), v).map_err(|e| HarnessError::Parse {
                path: origin.to_string(),
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Canonical text: every key in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for k in KEYS {
            let _ = writeln!(out, "{k}={}", self.get(k).expect("known key"));
        }
        out
    }

    /// First 16 hex digits of the SHA-256 of the canonical text.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn scenario(&self) -> Result<ScenarioConfig<f64>> {
        let imu_noise = if self.gen_noise_users.is_empty() {
            vec![MotionNoise::new(self.gen_sigma_d, self.gen_sigma_theta)]
        } else {
            self.gen_noise_users
                .iter()
                .map(|&(d, t)| MotionNoise::new(d, t))
                .collect()
        };
        let detection = match self.detection.as_str() {
            "indoor" => {
                let mut m = DetectionModel::indoor();
                m.max_range = self.max_range;
                m
            }
            _ => DetectionModel::ideal(self.max_range),
        };
        let cfg = ScenarioConfig {
            area: (self.area_width, self.area_height),
            path_size: (self.path_width, self.path_height),
            path_center: (self.path_center_x, self.path_center_y),
            n_users: self.n_users,
            spacing: self.spacing,
            speed: self.speed,
            duration: self.duration,
            imu_rate: self.imu_rate,
            uwb_rate: self.uwb_rate,
            imu_noise,
            range_gen_sigma: self.range_gen_sigma,
            detection,
            start_mode: self.start_mode,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn engine(&self) -> Result<EngineConfig<f64>> {
        let mut motion = MotionNoise::new(self.sigma_d, self.sigma_theta);
        motion.additive_theta_floor = self.theta_floor;
        let ranging = RangingNoise::new(self.sigma_r)?;
        let mut filter = FilterConfig::new(self.particles, self.alpha, motion, ranging);
        filter.ess_fraction = self.ess_fraction;
        filter.seed = self.seed;
        filter.dual_trigger = self.dual_trigger;
        filter.replacement = self.replacement;
        let kde = KdeConfig {
            bandwidth_rule: if self.kde_bandwidth.is_some() {
                BandwidthRule::Fixed
            } else {
                BandwidthRule::Scott
            },
            fixed_bandwidth: self.kde_bandwidth.unwrap_or(1.0),
            min_bandwidth: self.kde_min_bandwidth,
        };
        let cfg = EngineConfig {
            filter,
            kde,
            symmetric: self.symmetric,
            reorder_tolerance: self.reorder_tolerance,
        };
        cfg.validate()?;
        if !(self.init_shift >= 0.0) {
            return Err(HarnessError::Config("init_shift must be non-negative".into()));
        }
        Ok(cfg)
    }
}
