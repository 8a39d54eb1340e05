//! Per-user particle filter operations: initialization, range correction,
//! ESS-triggered systematic resampling and injection of particles drawn from
//! the ranging model (dual sampling) weighted by a KDE of the prior belief.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kde::{KdeConfig, PositionKde};
use crate::model::{
    effective_sample_size, normalize_weights, Belief, FilterConfig, Particle, Pose, RangingNoise,
    Replacement, Seconds, UserId,
};
use crate::ranging::log_batch_likelihood;
use crate::scalar::{normalize_angle, Scalar};

/// A received range paired with the current point estimate of the peer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborConstraint<F> {
    pub z: F,
    pub neighbor_estimate: Pose<F>,
    pub neighbor: UserId,
}

/// `m` particles at `pose` with uniform weights.
pub fn init_known<F: Scalar>(
    owner: UserId,
    pose: Pose<F>,
    cfg: &FilterConfig<F>,
    t: Seconds,
) -> Result<Belief<F>> {
    cfg.validate()?;
    if !pose.is_finite() {
        return Err(Error::Invalid("prior pose must be finite".into()));
    }
    let w = F::from_count(cfg.m).recip();
    Ok(Belief {
        particles: vec![Particle { pose, weight: w }; cfg.m],
        owner,
        last_update: t,
    })
}

/// Like [`init_known`] but centered `shift` meters away from `pose` in a
/// uniformly random direction.
pub fn init_offset<F: Scalar, R: Rng + ?Sized>(
    owner: UserId,
    pose: Pose<F>,
    shift: F,
    cfg: &FilterConfig<F>,
    t: Seconds,
    rng: &mut R,
) -> Result<Belief<F>> {
    if !(shift >= F::zero()) || !shift.is_finite() {
        return Err(Error::Invalid(format!("shift must be non-negative, got {shift}")));
    }
    if shift == F::zero() {
        return init_known(owner, pose, cfg, t);
    }
    let phi = F::TAU() * F::unit_uniform(rng);
    let shifted = pose.translated(shift * phi.cos(), shift * phi.sin());
    init_known(owner, shifted, cfg, t)
}

/// Multiplies each weight by the likelihood of all `constraints` and
/// renormalizes. Poses are never touched.
///
/// Returns [`Error::DegenerateCorrection`] and leaves `b` unchanged when the
/// total unnormalized weight is not representable as a positive number, i.e.
/// no particle is compatible with the ranges.
pub fn correct<F: Scalar>(
    b: &mut Belief<F>,
    constraints: &[NeighborConstraint<F>],
    noise: &RangingNoise<F>,
) -> Result<()> {
    if constraints.is_empty() {
        return Ok(());
    }
    noise.validate()?;
    let ranges: Vec<(F, Pose<F>)> = constraints
        .iter()
        .map(|c| (c.z, c.neighbor_estimate))
        .collect();
    let mut log_w = Vec::with_capacity(b.particles.len());
    for p in &b.particles {
        log_w.push(p.weight.ln() + log_batch_likelihood(&ranges, &p.pose, noise)?);
    }
    let max = log_w.iter().copied().fold(F::neg_infinity(), F::max);
    if !max.is_finite() {
        return Err(Error::DegenerateCorrection);
    }
    let log_total = max + log_w.iter().fold(F::zero(), |acc, &l| acc + (l - max).exp()).ln();
    if log_total < F::min_positive_value().ln() {
        return Err(Error::DegenerateCorrection);
    }
    for (p, l) in b.particles.iter_mut().zip(log_w) {
        p.weight = (l - log_total).exp();
    }
    normalize_weights(&mut b.particles)
}

/// Systematic resampling: particle `j` is selected once for every
/// `k + offset` (`k = 0..m`) falling in `[m * c_(j-1), m * c_j)`, where `c`
/// are the cumulative weights. `offset` must lie in `[0, 1)`.
pub fn systematic_indices<F: Scalar>(weights: &[F], offset: F) -> Vec<usize> {
    let m = weights.len();
    let Some(last) = weights.iter().rposition(|&w| w > F::zero()) else {
        return Vec::new();
    };
    let mf = F::from_count(m);
    let mut out = Vec::with_capacity(m);
    let mut j = 0;
    let mut edge = weights[0] * mf;
    for k in 0..m {
        let u = F::from_count(k) + offset;
        while u >= edge && j < last {
            j += 1;
            edge = edge + weights[j] * mf;
        }
        out.push(j);
    }
    out
}

/// Resamples when the effective sample size is below `ess_fraction * m`.
/// Returns whether a resample happened.
pub fn maybe_resample<F: Scalar, R: Rng + ?Sized>(
    b: &mut Belief<F>,
    cfg: &FilterConfig<F>,
    rng: &mut R,
) -> Result<bool> {
    let weights = b.weights();
    let ess = effective_sample_size(&weights)?;
    let m = b.particles.len();
    if ess >= cfg.ess_fraction * F::from_count(m) {
        return Ok(false);
    }
    let picks = systematic_indices(&weights, F::unit_uniform(rng));
    let w = F::from_count(m).recip();
    b.particles = picks
        .into_iter()
        .map(|i| Particle {
            pose: b.particles[i].pose,
            weight: w,
        })
        .collect();
    Ok(true)
}

/// Replaces `round(alpha * m)` particles with samples drawn from the ranging
/// model and returns how many were injected.
///
/// Each sample picks one constraint uniformly, a radius `z + N(0, sigma_r^2)`
/// and a uniform bearing around that neighbor's estimate, and a uniform
/// heading. Samples are weighted by a kernel density estimate of the incoming
/// belief. The retained particles and the samples then form a two-component
/// mixture: the retained weights are scaled to carry mass `1 - k/m` and the
/// KDE weights to carry `k/m`, with `k` the number of samples.
pub fn dual_inject<F: Scalar, R: Rng + ?Sized>(
    b: &mut Belief<F>,
    constraints: &[NeighborConstraint<F>],
    cfg: &FilterConfig<F>,
    kde_cfg: &KdeConfig<F>,
    rng: &mut R,
) -> Result<usize> {
    let n_dual = cfg.dual_count();
    if n_dual == 0 {
        return Ok(0);
    }
    if constraints.is_empty() {
        return Err(Error::NoConstraints);
    }
    cfg.ranging.validate()?;
    let m = b.particles.len();
    let n_dual = n_dual.min(m);
    let kde = PositionKde::fit(&b.particles, kde_cfg)?;

    let mut slots: Vec<usize> = match cfg.replacement {
        Replacement::LowestWeight => {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&i, &j| {
                b.particles[i]
                    .weight
                    .partial_cmp(&b.particles[j].weight)
                    .expect("weights are finite")
                    .then(i.cmp(&j))
            });
            order.truncate(n_dual);
            order
        }
        Replacement::Random => index::sample(rng, m, n_dual).into_vec(),
    };
    slots.sort_unstable();

    let sigma = cfg.ranging.sigma_r;
    let mut samples = Vec::with_capacity(n_dual);
    for _ in 0..n_dual {
        let c = &constraints[rng.random_range(0..constraints.len())];
        let radius = c.z + sigma * F::standard_normal(rng);
        let bearing = F::TAU() * F::unit_uniform(rng);
        let heading = F::TAU() * F::unit_uniform(rng) - F::PI();
        let pose = Pose {
            x: c.neighbor_estimate.x + radius * bearing.cos(),
            y: c.neighbor_estimate.y + radius * bearing.sin(),
            theta: normalize_angle(heading),
        };
        samples.push((pose, kde.log_density(pose.x, pose.y)));
    }

    let mut in_slot = vec![false; m];
    for &s in &slots {
        in_slot[s] = true;
    }
    let retained_mass = b
        .particles
        .iter()
        .zip(&in_slot)
        .filter(|(_, &replaced)| !replaced)
        .fold(F::zero(), |acc, (p, _)| acc + p.weight);
    let mut dual_mass = F::from_count(n_dual) / F::from_count(m);
    if !(retained_mass > F::zero()) {
        dual_mass = F::one();
    }
    let retained_scale = if retained_mass > F::zero() {
        (F::one() - dual_mass) / retained_mass
    } else {
        F::zero()
    };

    let max_log = samples
        .iter()
        .map(|s| s.1)
        .fold(F::neg_infinity(), F::max);
    let rel: Vec<F> = if max_log.is_finite() {
        samples.iter().map(|s| (s.1 - max_log).exp()).collect()
    } else {
        vec![F::one(); n_dual]
    };
    let rel_total = rel.iter().fold(F::zero(), |acc, &r| acc + r);

    for (p, &replaced) in b.particles.iter_mut().zip(&in_slot) {
        if !replaced {
            p.weight = p.weight * retained_scale;
        }
    }
    for ((&slot, (pose, _)), r) in slots.iter().zip(samples).zip(rel) {
        b.particles[slot] = Particle {
            pose,
            weight: dual_mass * r / rel_total,
        };
    }
    normalize_weights(&mut b.particles)?;
    Ok(n_dual)
}
