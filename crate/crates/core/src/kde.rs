//! Weighted Gaussian kernel density estimate over particle positions.
//!
//! The kernel is a product of two axis-aligned Gaussians. Headings are not
//! part of the estimate.

use crate::error::{Error, Result};
use crate::model::Particle;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandwidthRule {
    /// Per-axis weighted standard deviation times `n_eff^(-1/6)`.
    #[default]
    Scott,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeConfig<F> {
    pub bandwidth_rule: BandwidthRule,
    /// Used iff `bandwidth_rule` is `Fixed`.
    pub fixed_bandwidth: F,
    /// Lower bound on Scott bandwidths; a collapsed particle cloud would
    /// otherwise give a zero-width kernel.
    pub min_bandwidth: F,
}

impl<F: Scalar> Default for KdeConfig<F> {
    fn default() -> Self {
        Self {
            bandwidth_rule: BandwidthRule::Scott,
            fixed_bandwidth: F::one(),
            min_bandwidth: F::lit(0.25),
        }
    }
}

impl<F: Scalar> KdeConfig<F> {
    pub fn fixed(bandwidth: F) -> Self {
        Self {
            bandwidth_rule: BandwidthRule::Fixed,
            fixed_bandwidth: bandwidth,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: F| v > F::zero() && v.is_finite();
        match self.bandwidth_rule {
            BandwidthRule::Fixed if !positive(self.fixed_bandwidth) => Err(Error::Config(
                format!("fixed KDE bandwidth must be positive, got {}", self.fixed_bandwidth),
            )),
            BandwidthRule::Scott if !positive(self.min_bandwidth) => Err(Error::Config(format!(
                "minimum KDE bandwidth must be positive, got {}",
                self.min_bandwidth
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PositionKde<F> {
    xs: Vec<F>,
    ys: Vec<F>,
    log_weights: Vec<F>,
    hx: F,
    hy: F,
}

impl<F: Scalar> PositionKde<F> {
    /// Fits the estimate to the positions of `particles`, weighted by their
    /// (not necessarily normalized) weights.
    pub fn fit(particles: &[Particle<F>], cfg: &KdeConfig<F>) -> Result<Self> {
        cfg.validate()?;
        let total = particles.iter().fold(F::zero(), |acc, p| acc + p.weight);
        if particles.is_empty() || !(total > F::zero()) {
            return Err(Error::DegenerateWeights);
        }
        let weights: Vec<F> = particles.iter().map(|p| p.weight / total).collect();
        let (hx, hy) = match cfg.bandwidth_rule {
            BandwidthRule::Fixed => (cfg.fixed_bandwidth, cfg.fixed_bandwidth),
            BandwidthRule::Scott => {
                let xs: Vec<F> = particles.iter().map(|p| p.pose.x).collect();
                let ys: Vec<F> = particles.iter().map(|p| p.pose.y).collect();
                let factor = scott_factor(&weights);
                (
                    (weighted_std(&xs, &weights) * factor).max(cfg.min_bandwidth),
                    (weighted_std(&ys, &weights) * factor).max(cfg.min_bandwidth),
                )
            }
        };
        Ok(Self {
            xs: particles.iter().map(|p| p.pose.x).collect(),
            ys: particles.iter().map(|p| p.pose.y).collect(),
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            hx,
            hy,
        })
    }

    pub fn bandwidth(&self) -> (F, F) {
        (self.hx, self.hy)
    }

    /// Log density at `(x, y)`; finite even far outside the particle cloud.
    pub fn log_density(&self, x: F, y: F) -> F {
        let half = F::lit(0.5);
        let exponent = |i: usize| {
            let u = (x - self.xs[i]) / self.hx;
            let v = (y - self.ys[i]) / self.hy;
            self.log_weights[i] - half * (u * u + v * v)
        };
        let max = (0..self.xs.len()).map(exponent).fold(F::neg_infinity(), F::max);
        if max == F::neg_infinity() {
            return max;
        }
        let sum = (0..self.xs.len()).fold(F::zero(), |acc, i| acc + (exponent(i) - max).exp());
        max + sum.ln() - (F::TAU() * self.hx * self.hy).ln()
    }

    pub fn density(&self, x: F, y: F) -> F {
        self.log_density(x, y).exp()
    }
}

/// Scott's factor `n_eff^(-1/(d+4))` with `d = 2`.
fn scott_factor<F: Scalar>(weights: &[F]) -> F {
    let sq = weights.iter().fold(F::zero(), |acc, &w| acc + w * w);
    let n_eff = sq.recip();
    n_eff.powf(-F::lit(1.0 / 6.0))
}

/// Weighted standard deviation with the reliability-weights correction
/// `1 / (1 - sum w^2)`; zero for a single effective point.
fn weighted_std<F: Scalar>(values: &[F], weights: &[F]) -> F {
    let mean = values
        .iter()
        .zip(weights)
        .fold(F::zero(), |acc, (&v, &w)| acc + w * v);
    let ss = values
        .iter()
        .zip(weights)
        .fold(F::zero(), |acc, (&v, &w)| acc + w * (v - mean) * (v - mean));
    let sq = weights.iter().fold(F::zero(), |acc, &w| acc + w * w);
    let denom = F::one() - sq;
    if denom <= F::epsilon() {
        F::zero()
    } else {
        (ss / denom).max(F::zero()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Pose;
    use approx::assert_relative_eq;

    fn particles(pts: &[(f64, f64, f64)]) -> Vec<Particle<f64>> {
        pts.iter()
            .map(|&(x, y, w)| Particle {
                pose: Pose::new(x, y, 0.0),
                weight: w,
            })
            .collect()
    }

    // Straight sum of Gaussian bumps.
    fn brute_density(pts: &[(f64, f64, f64)], hx: f64, hy: f64, x: f64, y: f64) -> f64 {
        let total: f64 = pts.iter().map(|p| p.2).sum();
        pts.iter()
            .map(|&(px, py, w)| {
                let g = (-0.5 * (((x - px) / hx).powi(2) + ((y - py) / hy).powi(2))).exp();
                w / total * g / (2.0 * std::f64::consts::PI * hx * hy)
            })
            .sum()
    }

    #[test]
    fn fixed_bandwidth_matches_direct_sum() {
        let pts = [(0.0, 0.0, 1.0), (1.0, 2.0, 3.0), (-1.5, 0.5, 0.5)];
        let kde = PositionKde::fit(&particles(&pts), &KdeConfig::fixed(0.8)).unwrap();
        for &(x, y) in &[(0.0, 0.0), (0.3, 1.1), (4.0, -2.0)] {
            assert_relative_eq!(
                kde.density(x, y),
                brute_density(&pts, 0.8, 0.8, x, y),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn scott_bandwidth_by_hand() {
        // Equal weights on x = {0, 2}, y = {0, 0}: unbiased std of x is sqrt(2),
        // n_eff = 2, factor 2^(-1/6).
        let pts = [(0.0, 0.0, 1.0), (2.0, 0.0, 1.0)];
        let cfg = KdeConfig {
            min_bandwidth: 1e-3,
            ..KdeConfig::default()
        };
        let kde = PositionKde::fit(&particles(&pts), &cfg).unwrap();
        let (hx, hy) = kde.bandwidth();
        assert_relative_eq!(hx, 2f64.sqrt() * 2f64.powf(-1.0 / 6.0), max_relative = 1e-12);
        assert_eq!(hy, 1e-3);
    }

    #[test]
    fn density_integrates_to_one() {
        let pts = [(0.0, 0.0, 1.0), (1.0, 2.0, 3.0), (-1.5, 0.5, 0.5), (0.2, -0.7, 2.0)];
        let kde = PositionKde::fit(&particles(&pts), &KdeConfig::default()).unwrap();
        let step = 0.05;
        let mut total = 0.0;
        let mut x = -10.0;
        while x <= 10.0 {
            let mut y = -10.0;
            while y <= 10.0 {
                total += kde.density(x, y) * step * step;
                y += step;
            }
            x += step;
        }
        assert!((total - 1.0).abs() < 1e-4, "integral {total}");
    }

    #[test]
    fn log_density_stays_finite_far_away() {
        let pts = [(0.0, 0.0, 1.0)];
        let kde = PositionKde::fit(&particles(&pts), &KdeConfig::fixed(0.1)).unwrap();
        let far = kde.log_density(100.0, 0.0);
        assert!(far.is_finite());
        assert_eq!(kde.density(100.0, 0.0), 0.0);
        assert!(kde.log_density(1.0, 0.0) > far);
    }

    #[test]
    fn config_validation() {
        assert!(KdeConfig::<f64>::fixed(0.0).validate().is_err());
        let mut cfg = KdeConfig::<f64>::default();
        cfg.min_bandwidth = 0.0;
        assert!(cfg.validate().is_err());
        assert!(PositionKde::fit(&particles(&[(0.0, 0.0, 0.0)]), &KdeConfig::default()).is_err());
    }
}
