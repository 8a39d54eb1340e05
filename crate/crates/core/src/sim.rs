//! Synthetic world: users walking a rectangular loop, with noisy inertial
//! displacements and peer-to-peer ranges generated from the ground truth.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    euclidean_distance, InertialDelta, MeasurementEvent, MotionNoise, Pose, RangeObservation,
    Seconds, UserId,
};
use crate::scalar::{normalize_angle, Scalar};

/// Smallest range the simulated radio reports.
const MIN_RANGE: f64 = 1e-3;

/// Probability of receiving a range as a function of distance.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionModel<F> {
    pub max_range: F,
    /// Piecewise-linear `(distance, probability)` knots sorted by distance,
    /// held constant beyond the end knots. Empty means always detected.
    pub curve: Vec<(F, F)>,
}

impl<F: Scalar> DetectionModel<F> {
    pub fn ideal(max_range: F) -> Self {
        Self {
            max_range,
            curve: Vec::new(),
        }
    }

    /// Indoor-like preset: misses occur even at short distance and grow
    /// with range.
    pub fn indoor() -> Self {
        let knots = [(0.0, 0.9), (4.0, 0.85), (8.0, 0.7), (12.0, 0.5), (16.0, 0.3), (20.0, 0.15), (30.0, 0.0)];
        Self {
            max_range: F::lit(30.0),
            curve: knots.iter().map(|&(d, p)| (F::lit(d), F::lit(p))).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_range >= F::zero()) {
            return Err(Error::Config("max_range must be non-negative".into()));
        }
        for w in self.curve.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 > w[0].1 {
                return Err(Error::Config(
                    "detection curve must be sorted by distance and non-increasing".into(),
                ));
            }
        }
        if self.curve.iter().any(|&(d, p)| !(d >= F::zero()) || !(F::zero()..=F::one()).contains(&p)) {
            return Err(Error::Config("detection probabilities must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn probability(&self, d: F) -> F {
        if d > self.max_range {
            return F::zero();
        }
        let (Some(first), Some(last)) = (self.curve.first(), self.curve.last()) else {
            return F::one();
        };
        if d <= first.0 {
            return first.1;
        }
        if d >= last.0 {
            return last.1;
        }
        for w in self.curve.windows(2) {
            let ((d0, p0), (d1, p1)) = (w[0], w[1]);
            if d <= d1 {
                if d1 == d0 {
                    return p1;
                }
                return p0 + (p1 - p0) * (d - d0) / (d1 - d0);
            }
        }
        last.1
    }
}

/// Draws whether a range at distance `d` is received.
pub fn sample_detection<F: Scalar, R: Rng + ?Sized>(d: F, model: &DetectionModel<F>, rng: &mut R) -> bool {
    if d > model.max_range {
        return false;
    }
    F::unit_uniform(rng) < model.probability(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartMode {
    /// All users start at the path origin and set off one after the other,
    /// `spacing / speed` seconds apart.
    #[default]
    Staggered,
    /// Users start already `spacing` meters apart along the path.
    Spaced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<F> {
    pub area: (F, F),
    /// Width and height of the walked rectangle.
    pub path_size: (F, F),
    pub path_center: (F, F),
    pub n_users: usize,
    /// Distance between consecutive users along the path.
    pub spacing: F,
    pub speed: F,
    pub duration: Seconds,
    pub imu_rate: f64,
    pub uwb_rate: f64,
    /// Generation-side inertial noise, either one entry for everybody or one
    /// per user.
    pub imu_noise: Vec<MotionNoise<F>>,
    pub range_gen_sigma: F,
    pub detection: DetectionModel<F>,
    pub start_mode: StartMode,
    pub seed: u64,
}

impl<F: Scalar> Default for ScenarioConfig<F> {
    fn default() -> Self {
        Self {
            area: (F::lit(20.0), F::lit(10.0)),
            path_size: (F::lit(16.0), F::lit(6.0)),
            path_center: (F::lit(10.0), F::lit(5.0)),
            n_users: 6,
            spacing: F::lit(8.0),
            speed: F::lit(0.5),
            duration: 600.0,
            imu_rate: 1.0,
            uwb_rate: 0.5,
            imu_noise: vec![MotionNoise::new(F::lit(0.2), F::lit(0.1))],
            range_gen_sigma: F::lit(0.1),
            detection: DetectionModel::ideal(F::lit(30.0)),
            start_mode: StartMode::Staggered,
            seed: 0,
        }
    }
}

impl<F: Scalar> ScenarioConfig<F> {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.n_users == 0 {
            return bad("at least one user is required");
        }
        if !(self.imu_rate > 0.0 && self.uwb_rate > 0.0) {
            return bad("rates must be positive");
        }
        if !(self.duration >= 0.0) {
            return bad("duration must be non-negative");
        }
        if !(self.spacing >= F::zero()) || !(self.speed >= F::zero()) {
            return bad("spacing and speed must be non-negative");
        }
        if !(self.range_gen_sigma >= F::zero()) {
            return bad("range_gen_sigma must be non-negative");
        }
        let (w, h) = self.path_size;
        let (cx, cy) = self.path_center;
        let half = F::lit(0.5);
        if !(w > F::zero() && h > F::zero()) {
            return bad("path dimensions must be positive");
        }
        if cx - half * w < F::zero()
            || cx + half * w > self.area.0
            || cy - half * h < F::zero()
            || cy + half * h > self.area.1
        {
            return bad("path rectangle must fit in the area");
        }
        if self.imu_noise.len() != 1 && self.imu_noise.len() != self.n_users {
            return bad("imu_noise needs one entry or one per user");
        }
        for n in &self.imu_noise {
            n.validate()?;
        }
        self.detection.validate()
    }

    pub fn perimeter(&self) -> F {
        F::lit(2.0) * (self.path_size.0 + self.path_size.1)
    }

    pub fn noise_for(&self, user: usize) -> MotionNoise<F> {
        if self.imu_noise.len() == 1 {
            self.imu_noise[0]
        } else {
            self.imu_noise[user]
        }
    }

    /// Pose at arc length `s` along the loop, counter-clockwise from the
    /// lower-left corner.
    pub fn path_pose(&self, s: F) -> Pose<F> {
        let (w, h) = self.path_size;
        let half = F::lit(0.5);
        let x0 = self.path_center.0 - half * w;
        let y0 = self.path_center.1 - half * h;
        let p = self.perimeter();
        let s = s - p * (s / p).floor();
        let pi = F::PI();
        if s < w {
            Pose::new(x0 + s, y0, F::zero())
        } else if s < w + h {
            Pose::new(x0 + w, y0 + (s - w), half * pi)
        } else if s < w + h + w {
            Pose::new(x0 + w - (s - w - h), y0 + h, pi)
        } else {
            Pose::new(x0, y0 + h - (s - w - h - w), -half * pi)
        }
    }

    /// True pose of `user` (0-based index) at time `t`.
    pub fn true_pose(&self, user: usize, t: Seconds) -> Pose<F> {
        let t = F::lit(t);
        let lead = self.spacing * F::from_count(user);
        let s = match self.start_mode {
            StartMode::Staggered => {
                let delay = if self.speed > F::zero() { lead / self.speed } else { F::zero() };
                self.speed * (t - delay).max(F::zero())
            }
            StartMode::Spaced => self.speed * t - lead,
        };
        self.path_pose(s)
    }
}

/// Densely sampled true poses of every user.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<F> {
    pub dt: Seconds,
    pub users: BTreeMap<UserId, Vec<Pose<F>>>,
}

impl<F: Scalar> GroundTruth<F> {
    pub fn len(&self) -> usize {
        self.users.values().next().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn end_time(&self) -> Seconds {
        self.dt * self.len().saturating_sub(1) as f64
    }

    pub fn initial_poses(&self) -> BTreeMap<UserId, Pose<F>> {
        self.users.iter().map(|(&u, ps)| (u, ps[0])).collect()
    }

    /// Linearly interpolated pose (shortest-arc for the heading).
    pub fn pose_at(&self, user: UserId, t: Seconds) -> Result<Pose<F>> {
        let poses = self.users.get(&user).ok_or(Error::UnknownUser(user))?;
        let end = self.dt * (poses.len().saturating_sub(1)) as f64;
        let tol = 1e-9 * end.max(1.0);
        if poses.is_empty() || t < -tol || t > end + tol {
            return Err(Error::Invalid(format!("truth for user {user} does not cover t={t}")));
        }
        let pos = (t / self.dt).max(0.0);
        let i = (pos.floor() as usize).min(poses.len() - 1);
        let frac = pos - i as f64;
        if i + 1 >= poses.len() || frac <= 1e-12 {
            return Ok(poses[i]);
        }
        let (a, b) = (poses[i], poses[i + 1]);
        let f = F::lit(frac);
        let dtheta = normalize_angle(b.theta - a.theta);
        Ok(Pose::new(a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f, a.theta + dtheta * f))
    }

    pub fn poses_at(&self, t: Seconds) -> Result<BTreeMap<UserId, Pose<F>>> {
        self.users
            .keys()
            .map(|&u| self.pose_at(u, t).map(|p| (u, p)))
            .collect()
    }
}

fn tick_times(rate: f64, duration: Seconds) -> Vec<Seconds> {
    let n = (duration * rate + 1e-9).floor() as usize;
    (1..=n).map(|k| ((k as f64) * 1000.0 / rate).round() / 1000.0).collect()
}

/// Generates the ground truth and the time-sorted measurement log.
pub fn generate_scenario<F: Scalar>(
    cfg: &ScenarioConfig<F>,
) -> Result<(GroundTruth<F>, Vec<MeasurementEvent<F>>)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_users;
    let ids: Vec<UserId> = (0..n).map(|u| UserId(u as u32)).collect();

    let dt = 1.0 / cfg.imu_rate.max(cfg.uwb_rate);
    let samples = (cfg.duration / dt + 1e-9).floor() as usize + 1;
    let users = ids
        .iter()
        .enumerate()
        .map(|(u, &id)| (id, (0..samples).map(|k| cfg.true_pose(u, k as f64 * dt)).collect()))
        .collect();
    let truth = GroundTruth { dt, users };

    let imu_ticks = tick_times(cfg.imu_rate, cfg.duration);
    let uwb_ticks = tick_times(cfg.uwb_rate, cfg.duration);
    let mut times: Vec<Seconds> = imu_ticks.iter().chain(&uwb_ticks).copied().collect();
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite tick times"));
    times.dedup();

    let mut events = Vec::new();
    let mut last_imu = 0.0;
    let (mut ii, mut ui) = (0, 0);
    for &t in &times {
        if ii < imu_ticks.len() && imu_ticks[ii] == t {
            ii += 1;
            for (u, &user) in ids.iter().enumerate() {
                let a = cfg.true_pose(u, last_imu);
                let b = cfg.true_pose(u, t);
                let noise = cfg.noise_for(u);
                let (dx, dy) = (b.x - a.x, b.y - a.y);
                let dtheta = normalize_angle(b.theta - a.theta);
                let ex = noise.sigma_d * F::standard_normal(&mut rng);
                let ey = noise.sigma_d * F::standard_normal(&mut rng);
                let et = noise.sigma_theta * F::standard_normal(&mut rng);
                events.push(MeasurementEvent::Inertial(InertialDelta {
                    dx: dx + dx * ex,
                    dy: dy + dy * ey,
                    dtheta: dtheta + dtheta * et,
                    user,
                    t,
                }));
            }
            last_imu = t;
        }
        if ui < uwb_ticks.len() && uwb_ticks[ui] == t {
            ui += 1;
            let poses: Vec<Pose<F>> = (0..n).map(|u| cfg.true_pose(u, t)).collect();
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let d = euclidean_distance(&poses[i], &poses[j]);
                    if !sample_detection(d, &cfg.detection, &mut rng) {
                        continue;
                    }
                    let z = d + cfg.range_gen_sigma * F::standard_normal(&mut rng);
                    events.push(MeasurementEvent::Range(RangeObservation {
                        from: ids[i],
                        to: ids[j],
                        z: z.max(F::lit(MIN_RANGE)),
                        t,
                    }));
                }
            }
        }
    }
    Ok((truth, events))
}
