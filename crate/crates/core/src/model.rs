//! Domain types and the small geometric and statistical kernels the filters
//! are built from.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{normalize_angle, Scalar};

/// Timestamps are kept in `f64` seconds independently of the spatial scalar.
pub type Seconds = f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(pub u32);

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Planar pose. `theta` is in radians, kept in `[-pi, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose<F> {
    pub x: F,
    pub y: F,
    pub theta: F,
}

impl<F: Scalar> Pose<F> {
    pub fn new(x: F, y: F, theta: F) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn origin() -> Self {
        Self::new(F::zero(), F::zero(), F::zero())
    }

    pub fn translated(&self, dx: F, dy: F) -> Self {
        Self::new(self.x + dx, self.y + dy, self.theta)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle<F> {
    pub pose: Pose<F>,
    pub weight: F,
}

/// Weighted particle set approximating one user's posterior.
///
/// The particle count is fixed for the lifetime of the belief and the
/// weights sum to one after every public operation of the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief<F> {
    pub(crate) particles: Vec<Particle<F>>,
    pub(crate) owner: UserId,
    pub(crate) last_update: Seconds,
}

impl<F: Scalar> Belief<F> {
    /// Builds a belief from explicit particles, normalizing their weights.
    pub fn from_particles(
        owner: UserId,
        last_update: Seconds,
        mut particles: Vec<Particle<F>>,
    ) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::Invalid("a belief needs at least one particle".into()));
        }
        if particles
            .iter()
            .any(|p| !p.pose.is_finite() || !p.weight.is_finite() || p.weight < F::zero())
        {
            return Err(Error::Invalid("particles must be finite with non-negative weight".into()));
        }
        normalize_weights(&mut particles)?;
        Ok(Self {
            particles,
            owner,
            last_update,
        })
    }

    pub fn particles(&self) -> &[Particle<F>] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn owner(&self) -> UserId {
        self.owner
    }

    pub fn last_update(&self) -> Seconds {
        self.last_update
    }

    pub fn weights(&self) -> Vec<F> {
        self.particles.iter().map(|p| p.weight).collect()
    }

    pub fn weight_sum(&self) -> F {
        self.particles
            .iter()
            .fold(F::zero(), |acc, p| acc + p.weight)
    }
}

/// Rescales weights in place to sum to one.
pub(crate) fn normalize_weights<F: Scalar>(particles: &mut [Particle<F>]) -> Result<()> {
    let total = particles.iter().fold(F::zero(), |acc, p| acc + p.weight);
    if !(total > F::zero()) || !total.is_finite() {
        return Err(Error::DegenerateWeights);
    }
    for p in particles.iter_mut() {
        p.weight = p.weight / total;
    }
    Ok(())
}

/// Self-motion reported by a user's inertial unit over one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertialDelta<F> {
    pub dx: F,
    pub dy: F,
    pub dtheta: F,
    pub user: UserId,
    pub t: Seconds,
}

/// Range `z` in meters heard by `from` for peer `to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeObservation<F> {
    pub from: UserId,
    pub to: UserId,
    pub z: F,
    pub t: Seconds,
}

impl<F: Scalar> RangeObservation<F> {
    pub fn validate(&self) -> Result<()> {
        if self.from == self.to {
            return Err(Error::Invalid(format!("self range for user {}", self.from)));
        }
        if !(self.z > F::zero()) || !self.z.is_finite() {
            return Err(Error::Invalid(format!("range must be positive, got {}", self.z)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementEvent<F> {
    Inertial(InertialDelta<F>),
    Range(RangeObservation<F>),
}

impl<F> MeasurementEvent<F> {
    pub fn timestamp(&self) -> Seconds {
        match self {
            MeasurementEvent::Inertial(m) => m.t,
            MeasurementEvent::Range(r) => r.t,
        }
    }
}

/// Proportional motion noise: the standard deviation of each increment is
/// the reported increment times the scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionNoise<F> {
    pub sigma_d: F,
    pub sigma_theta: F,
    /// Additive heading noise in radians per update, zero by default.
    pub additive_theta_floor: F,
}

impl<F: Scalar> MotionNoise<F> {
    pub fn new(sigma_d: F, sigma_theta: F) -> Self {
        Self {
            sigma_d,
            sigma_theta,
            additive_theta_floor: F::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::new(F::zero(), F::zero())
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: F| v >= F::zero() && v.is_finite();
        if ok(self.sigma_d) && ok(self.sigma_theta) && ok(self.additive_theta_floor) {
            Ok(())
        } else {
            Err(Error::Config(format!("motion noise must be non-negative: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangingNoise<F> {
    pub sigma_r: F,
}

impl<F: Scalar> RangingNoise<F> {
    pub fn new(sigma_r: F) -> Result<Self> {
        let noise = Self { sigma_r };
        noise.validate()?;
        Ok(noise)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma_r > F::zero() && self.sigma_r.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!("sigma_r must be positive, got {}", self.sigma_r)))
        }
    }
}

/// When measurement-drawn particles are mixed into a belief.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DualTrigger {
    /// After every correction with at least one constraint.
    #[default]
    EveryUpdate,
    /// Only when a correction leaves no compatible particle.
    OnFailure,
}

/// Which particles make room for measurement-drawn ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Replacement {
    #[default]
    LowestWeight,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig<F> {
    /// Particle count.
    pub m: usize,
    /// Fraction of particles drawn from the ranging model at each update.
    pub alpha: F,
    pub motion: MotionNoise<F>,
    pub ranging: RangingNoise<F>,
    /// Resample when the effective sample size drops below `ess_fraction * m`.
    pub ess_fraction: F,
    pub seed: u64,
    pub dual_trigger: DualTrigger,
    pub replacement: Replacement,
}

impl<F: Scalar> FilterConfig<F> {
    pub fn new(m: usize, alpha: F, motion: MotionNoise<F>, ranging: RangingNoise<F>) -> Self {
        Self {
            m,
            alpha,
            motion,
            ranging,
            ess_fraction: F::lit(0.5),
            seed: 0,
            dual_trigger: DualTrigger::default(),
            replacement: Replacement::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Config("particle count must be at least 1".into()));
        }
        if !(self.alpha >= F::zero() && self.alpha <= F::one()) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.ess_fraction > F::zero() && self.ess_fraction <= F::one()) {
            return Err(Error::Config(format!(
                "ess_fraction must lie in (0, 1], got {}",
                self.ess_fraction
            )));
        }
        self.motion.validate()?;
        self.ranging.validate()
    }

    /// Number of measurement-drawn particles per injection, `round(alpha * m)`
    /// with ties to even.
    pub fn dual_count(&self) -> usize {
        (self.alpha * F::from_count(self.m))
            .round_half_even()
            .to_usize()
            .unwrap_or(0)
            .min(self.m)
    }
}

pub fn euclidean_distance<F: Scalar>(a: &Pose<F>, b: &Pose<F>) -> F {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Weighted mean direction, `atan2(sum w sin, sum w cos)` wrapped to `[-pi, pi)`.
pub fn circular_mean<F: Scalar>(angles: &[F], weights: &[F]) -> Result<F> {
    if angles.is_empty() || angles.len() != weights.len() {
        return Err(Error::Invalid(format!(
            "circular mean over {} angles and {} weights",
            angles.len(),
            weights.len()
        )));
    }
    let total = weights.iter().fold(F::zero(), |acc, &w| acc + w);
    if !(total > F::zero()) {
        return Err(Error::DegenerateWeights);
    }
    let first = angles[0];
    if angles
        .iter()
        .zip(weights)
        .all(|(&a, &w)| a == first || w == F::zero())
    {
        return Ok(normalize_angle(first));
    }
    let (s, c) = angles
        .iter()
        .zip(weights)
        .fold((F::zero(), F::zero()), |(s, c), (&a, &w)| {
            (s + w * a.sin(), c + w * a.cos())
        });
    let resultant = (s / total).hypot(c / total);
    if resultant < F::lit(1e-12) {
        return Err(Error::UndefinedMean(resultant.as_f64()));
    }
    Ok(normalize_angle(s.atan2(c)))
}

/// `1 / sum w^2` for a normalized weight vector.
///
/// The sum may deviate from one by `1e-6` or by the square root of the
/// scalar's epsilon, whichever is larger.
pub fn effective_sample_size<F: Scalar>(weights: &[F]) -> Result<F> {
    let total = weights.iter().fold(F::zero(), |acc, &w| acc + w);
    let tol = F::lit(1e-6).max(F::epsilon().sqrt());
    if (total - F::one()).abs() > tol || weights.is_empty() {
        return Err(Error::Unnormalized(total.as_f64()));
    }
    let sq = weights.iter().fold(F::zero(), |acc, &w| acc + w * w);
    Ok(sq.recip())
}

/// Weighted arithmetic mean of positions with a circular mean heading.
pub fn weighted_mean_pose<F: Scalar>(b: &Belief<F>) -> Result<Pose<F>> {
    let origin = b.particles.first().ok_or(Error::DegenerateWeights)?.pose;
    // offsets from the first particle keep a point mass exact
    let (sx, sy, sw) = b
        .particles
        .iter()
        .fold((F::zero(), F::zero(), F::zero()), |(sx, sy, sw), p| {
            (
                sx + p.weight * (p.pose.x - origin.x),
                sy + p.weight * (p.pose.y - origin.y),
                sw + p.weight,
            )
        });
    if !(sw > F::zero()) {
        return Err(Error::DegenerateWeights);
    }
    let angles: Vec<F> = b.particles.iter().map(|p| p.pose.theta).collect();
    let weights = b.weights();
    let theta = circular_mean(&angles, &weights)?;
    Ok(Pose::new(origin.x + sx / sw, origin.y + sy / sw, theta))
}
