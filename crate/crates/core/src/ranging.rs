//! Gaussian likelihood of a peer-to-peer range given two positions.
//!
//! Only received ranges contribute a factor; a missing range carries no
//! information and is simply absent from the product.

use crate::error::Result;
use crate::model::{euclidean_distance, Pose, RangingNoise};
use crate::scalar::Scalar;

/// `ln N(z; d(a, b), sigma_r^2)`.
pub fn log_range_likelihood<F: Scalar>(
    z: F,
    a: &Pose<F>,
    b: &Pose<F>,
    noise: &RangingNoise<F>,
) -> Result<F> {
    noise.validate()?;
    Ok(log_density_unchecked(z, euclidean_distance(a, b), noise.sigma_r))
}

#[inline]
pub(crate) fn log_density_unchecked<F: Scalar>(z: F, d: F, sigma: F) -> F {
    let r = (z - d) / sigma;
    -(F::lit(0.5) * r * r) - sigma.ln() - F::lit(0.5) * F::TAU().ln()
}

/// `1 / (sqrt(2 pi) sigma_r) * exp(-(z - d)^2 / (2 sigma_r^2))` with `d`
/// the Euclidean distance between `a` and `b`. Headings are ignored.
pub fn range_likelihood<F: Scalar>(
    z: F,
    a: &Pose<F>,
    b: &Pose<F>,
    noise: &RangingNoise<F>,
) -> Result<F> {
    log_range_likelihood(z, a, b, noise).map(F::exp)
}

/// Sum of log-likelihoods of several ranges from pose `p`.
pub fn log_batch_likelihood<F: Scalar>(
    ranges: &[(F, Pose<F>)],
    p: &Pose<F>,
    noise: &RangingNoise<F>,
) -> Result<F> {
    noise.validate()?;
    Ok(ranges.iter().fold(F::zero(), |acc, (z, q)| {
        acc + log_density_unchecked(*z, euclidean_distance(p, q), noise.sigma_r)
    }))
}

/// Product of [`range_likelihood`] over `ranges`; the empty product is one.
pub fn batch_likelihood<F: Scalar>(
    ranges: &[(F, Pose<F>)],
    p: &Pose<F>,
    noise: &RangingNoise<F>,
) -> Result<F> {
    log_batch_likelihood(ranges, p, noise).map(F::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use approx::assert_relative_eq;

    // Independent evaluation of the normal pdf.
    fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
        let k = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        k * (-(x - mu) * (x - mu) / (2.0 * sigma * sigma)).exp()
    }

    fn noise(s: f64) -> RangingNoise<f64> {
        RangingNoise::new(s).unwrap()
    }

    #[test]
    fn peak_and_one_sigma_values() {
        let a = Pose::new(0.0, 0.0, 0.0);
        let b = Pose::new(3.0, 4.0, 1.0);
        let peak = range_likelihood(5.0, &a, &b, &noise(2.0)).unwrap();
        assert_relative_eq!(peak, normal_pdf(5.0, 5.0, 2.0), max_relative = 1e-12);
        assert_relative_eq!(peak, 0.199_471_140_200_716_3, max_relative = 1e-12);
        let off = range_likelihood(7.0, &a, &b, &noise(2.0)).unwrap();
        assert_relative_eq!(off, normal_pdf(7.0, 5.0, 2.0), max_relative = 1e-12);
        assert_relative_eq!(off, 0.120_985_362_259_571_6, max_relative = 1e-12);
        let below = range_likelihood(3.0, &a, &b, &noise(2.0)).unwrap();
        assert_relative_eq!(off, below, max_relative = 1e-12);
    }

    #[test]
    fn rejects_non_positive_sigma() {
        let p = Pose::origin();
        let bad = RangingNoise { sigma_r: 0.0 };
        assert!(matches!(range_likelihood(1.0, &p, &p, &bad), Err(Error::Config(_))));
        assert!(RangingNoise::new(-1.0).is_err());
    }

    #[test]
    fn batch_products() {
        let p = Pose::new(1.0, 1.0, 0.0);
        let n = noise(0.7);
        assert_eq!(batch_likelihood(&[], &p, &n).unwrap(), 1.0);
        let q1 = Pose::new(4.0, 5.0, 0.0);
        let q2 = Pose::new(-2.0, 1.5, 2.0);
        let single = batch_likelihood(&[(4.5, q1)], &p, &n).unwrap();
        assert_relative_eq!(single, range_likelihood(4.5, &p, &q1, &n).unwrap(), max_relative = 1e-12);
        let pair = batch_likelihood(&[(4.5, q1), (3.2, q2)], &p, &n).unwrap();
        let direct = normal_pdf(4.5, 5.0, 0.7) * normal_pdf(3.2, 3.0413812651491097, 0.7);
        assert_relative_eq!(pair, direct, max_relative = 1e-12);
    }
}
