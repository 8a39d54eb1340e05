//! Central fusion engine: one particle filter per user, driven by a
//! time-ordered stream of inertial and ranging events.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::filter::{correct, dual_inject, init_known, init_offset, maybe_resample, NeighborConstraint};
use crate::kde::KdeConfig;
use crate::model::{
    weighted_mean_pose, Belief, DualTrigger, FilterConfig, InertialDelta, MeasurementEvent, Pose,
    RangeObservation, Seconds, UserId,
};
use crate::motion::predict;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig<F> {
    pub filter: FilterConfig<F>,
    pub kde: KdeConfig<F>,
    /// Apply each range to both endpoints (otherwise only to `from`).
    pub symmetric: bool,
    /// How far behind the clock an event may be and still be accepted.
    pub reorder_tolerance: Seconds,
}

impl<F: Scalar> EngineConfig<F> {
    pub fn new(filter: FilterConfig<F>) -> Self {
        Self {
            filter,
            kde: KdeConfig::default(),
            symmetric: true,
            reorder_tolerance: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        self.kde.validate()?;
        if !(self.reorder_tolerance >= 0.0) {
            return Err(Error::Config("reorder tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

/// Initial belief of a user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prior<F> {
    Known(Pose<F>),
    /// Centered `shift` meters from `pose` in a random direction.
    Offset { pose: Pose<F>, shift: F },
}

/// Ranges sharing one timestamp, integrated atomically.
#[derive(Debug, Clone, PartialEq)]
pub struct RangingBatch<F> {
    t: Seconds,
    observations: Vec<RangeObservation<F>>,
}

impl<F: Scalar> RangingBatch<F> {
    pub fn new(observations: Vec<RangeObservation<F>>) -> Result<Self> {
        let Some(first) = observations.first() else {
            return Err(Error::Invalid("empty ranging batch".into()));
        };
        let t = first.t;
        if observations.iter().any(|o| o.t != t) {
            return Err(Error::Invalid("ranging batch mixes timestamps".into()));
        }
        for o in &observations {
            o.validate()?;
        }
        Ok(Self { t, observations })
    }

    pub fn t(&self) -> Seconds {
        self.t
    }

    pub fn observations(&self) -> &[RangeObservation<F>] {
        &self.observations
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BatchReport {
    /// Users whose filter received at least one constraint.
    pub users_updated: usize,
    /// Corrections that left no compatible particle and fell back to a
    /// full re-draw from the ranges.
    pub failures: usize,
    pub resampled: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone)]
struct UserFilter<F> {
    belief: Belief<F>,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone)]
pub struct Engine<F> {
    cfg: EngineConfig<F>,
    users: BTreeMap<UserId, UserFilter<F>>,
    clock: Seconds,
    pending: Vec<RangeObservation<F>>,
    dropped_ranges: usize,
}

impl<F: Scalar> Engine<F> {
    pub fn new(cfg: EngineConfig<F>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            users: BTreeMap::new(),
            clock: 0.0,
            pending: Vec::new(),
            dropped_ranges: 0,
        })
    }

    pub fn config(&self) -> &EngineConfig<F> {
        &self.cfg
    }

    pub fn clock(&self) -> Seconds {
        self.clock
    }

    /// Ranges dropped because an endpoint was never registered.
    pub fn dropped_ranges(&self) -> usize {
        self.dropped_ranges
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.users.keys().copied()
    }

    pub fn belief(&self, u: UserId) -> Option<&Belief<F>> {
        self.users.get(&u).map(|f| &f.belief)
    }

    /// Each user owns an independent random stream derived from the seed
    /// and its id, so results do not depend on the order users are touched.
    /// Stream 0 is left to the scenario generator.
    fn user_rng(&self, u: UserId) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.filter.seed);
        rng.set_stream(u64::from(u.0) + 1);
        rng
    }

    pub fn register_user(&mut self, u: UserId, prior: Prior<F>) -> Result<()> {
        if self.users.contains_key(&u) {
            return Err(Error::DuplicateUser(u));
        }
        let mut rng = self.user_rng(u);
        let belief = match prior {
            Prior::Known(pose) => init_known(u, pose, &self.cfg.filter, self.clock)?,
            Prior::Offset { pose, shift } => {
                init_offset(u, pose, shift, &self.cfg.filter, self.clock, &mut rng)?
            }
        };
        self.users.insert(u, UserFilter { belief, rng });
        Ok(())
    }

    fn check_time(&self, t: Seconds) -> Result<()> {
        if !t.is_finite() || t < self.clock - self.cfg.reorder_tolerance {
            return Err(Error::OutOfOrder {
                event: t,
                current: self.clock,
            });
        }
        Ok(())
    }

    /// Feeds one event. Inertial events are applied immediately; ranges are
    /// buffered until an event with a later timestamp, an inertial event or
    /// [`Engine::flush`] closes their batch.
    pub fn ingest(&mut self, e: MeasurementEvent<F>) -> Result<Option<BatchReport>> {
        let t = e.timestamp();
        let pending_t = self.pending.first().map(|o| o.t);
        match pending_t {
            Some(pt) if t < pt - self.cfg.reorder_tolerance => {
                return Err(Error::OutOfOrder { event: t, current: pt })
            }
            _ => self.check_time(t)?,
        }
        match e {
            MeasurementEvent::Inertial(m) => {
                if !self.users.contains_key(&m.user) {
                    return Err(Error::UnknownUser(m.user));
                }
                let report = self.flush()?;
                self.apply_inertial(&m)?;
                Ok(report)
            }
            MeasurementEvent::Range(r) => {
                r.validate()?;
                let report = match pending_t {
                    Some(pt) if pt != t => self.flush()?,
                    _ => None,
                };
                self.pending.push(r);
                Ok(report)
            }
        }
    }

    /// Integrates any buffered ranges.
    pub fn flush(&mut self) -> Result<Option<BatchReport>> {
        if self.pending.is_empty() {
            return Ok(None);
        }
        let batch = RangingBatch::new(std::mem::take(&mut self.pending))?;
        self.process_batch(&batch).map(Some)
    }

    pub fn apply_inertial(&mut self, m: &InertialDelta<F>) -> Result<()> {
        self.check_time(m.t)?;
        let noise = self.cfg.filter.motion;
        let f = self.users.get_mut(&m.user).ok_or(Error::UnknownUser(m.user))?;
        predict(&mut f.belief, m, &noise, &mut f.rng)?;
        self.clock = self.clock.max(m.t);
        Ok(())
    }

    /// Integrates a batch: every user's constraints are built from the
    /// estimates at batch start, then each user is corrected, receives dual
    /// samples and is resampled if needed.
    pub fn process_batch(&mut self, batch: &RangingBatch<F>) -> Result<BatchReport> {
        self.check_time(batch.t)?;
        let estimates = self.snapshot();
        let mut constraints: BTreeMap<UserId, Vec<NeighborConstraint<F>>> = BTreeMap::new();
        let mut report = BatchReport::default();
        for o in &batch.observations {
            let (Some(from_pose), Some(to_pose)) = (estimates.get(&o.from), estimates.get(&o.to))
            else {
                report.dropped += 1;
                continue;
            };
            constraints.entry(o.from).or_default().push(NeighborConstraint {
                z: o.z,
                neighbor_estimate: *to_pose,
                neighbor: o.to,
            });
            if self.cfg.symmetric {
                constraints.entry(o.to).or_default().push(NeighborConstraint {
                    z: o.z,
                    neighbor_estimate: *from_pose,
                    neighbor: o.from,
                });
            }
        }
        self.dropped_ranges += report.dropped;

        let cfg = self.cfg;
        let mut recovery = cfg.filter;
        recovery.alpha = F::one();
        for (u, mut cs) in constraints {
            // Canonical order makes the outcome independent of arrival order.
            cs.sort_by(|a, b| {
                a.neighbor
                    .cmp(&b.neighbor)
                    .then(a.z.partial_cmp(&b.z).expect("validated ranges"))
            });
            let f = self.users.get_mut(&u).expect("constraints only for registered users");
            match correct(&mut f.belief, &cs, &cfg.filter.ranging) {
                Ok(()) => {
                    if cfg.filter.dual_trigger == DualTrigger::EveryUpdate {
                        dual_inject(&mut f.belief, &cs, &cfg.filter, &cfg.kde, &mut f.rng)?;
                    }
                }
                Err(Error::DegenerateCorrection) => {
                    report.failures += 1;
                    dual_inject(&mut f.belief, &cs, &recovery, &cfg.kde, &mut f.rng)?;
                }
                Err(e) => return Err(e),
            }
            if maybe_resample(&mut f.belief, &cfg.filter, &mut f.rng)? {
                report.resampled += 1;
            }
            f.belief.last_update = f.belief.last_update.max(batch.t);
            report.users_updated += 1;
        }
        self.clock = self.clock.max(batch.t);
        Ok(report)
    }

    /// Current point estimate of every user.
    pub fn snapshot(&self) -> BTreeMap<UserId, Pose<F>> {
        self.users
            .iter()
            .map(|(&u, f)| (u, point_estimate(&f.belief)))
            .collect()
    }
}

/// Weighted mean pose; when the headings cancel out the heading of the
/// heaviest particle is used instead.
pub fn point_estimate<F: Scalar>(b: &Belief<F>) -> Pose<F> {
    weighted_mean_pose(b).unwrap_or_else(|_| {
        let (sx, sy) = b.particles().iter().fold((F::zero(), F::zero()), |(sx, sy), p| {
            (sx + p.weight * p.pose.x, sy + p.weight * p.pose.y)
        });
        let best = b
            .particles()
            .iter()
            .max_by(|a, c| a.weight.partial_cmp(&c.weight).expect("finite weights"))
            .expect("belief is non-empty");
        Pose::new(sx, sy, best.pose.theta)
    })
}
