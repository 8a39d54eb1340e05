//! Prediction step: every particle is moved by the reported inertial
//! displacement, corrupted by noise proportional to that displacement.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Belief, InertialDelta, MotionNoise};
use crate::scalar::{normalize_angle, Scalar};

/// Propagates `b` in place by `m`.
///
/// The displacement is applied in the world frame. Each particle draws its
/// own `eps_x, eps_y ~ N(0, sigma_d^2)` and `eps_theta ~ N(0, sigma_theta^2)`
/// and moves by `dx + dx * eps_x`, `dy + dy * eps_y`,
/// `dtheta + dtheta * eps_theta` (plus the optional additive heading floor).
/// Weights are left untouched.
pub fn predict<F: Scalar, R: Rng + ?Sized>(
    b: &mut Belief<F>,
    m: &InertialDelta<F>,
    noise: &MotionNoise<F>,
    rng: &mut R,
) -> Result<()> {
    if m.user != b.owner {
        return Err(Error::WrongOwner {
            expected: b.owner,
            got: m.user,
        });
    }
    if m.t < b.last_update {
        return Err(Error::OutOfOrder {
            event: m.t,
            current: b.last_update,
        });
    }
    if !(m.dx.is_finite() && m.dy.is_finite() && m.dtheta.is_finite()) {
        return Err(Error::Invalid(format!("non-finite inertial delta at t={}", m.t)));
    }
    noise.validate()?;

    let floor = noise.additive_theta_floor;
    for p in b.particles.iter_mut() {
        let ex = noise.sigma_d * F::standard_normal(rng);
        let ey = noise.sigma_d * F::standard_normal(rng);
        let et = noise.sigma_theta * F::standard_normal(rng);
        let ef = if floor > F::zero() {
            floor * F::standard_normal(rng)
        } else {
            F::zero()
        };
        p.pose.x = p.pose.x + m.dx + m.dx * ex;
        p.pose.y = p.pose.y + m.dy + m.dy * ey;
        p.pose.theta = normalize_angle(p.pose.theta + m.dtheta + m.dtheta * et + ef);
    }
    b.last_update = m.t;
    Ok(())
}
