//! Relative positioning error: RMSE of all pairwise distances.

use std::collections::BTreeMap;

use relpos::model::euclidean_distance;
use relpos::{GroundTruth, Pose, UserId};

use crate::error::{HarnessError, Result};
use crate::formats::EstimateTimeline;

/// RMSE over unordered pairs of `d(est_i, est_j) - d(truth_i, truth_j)`.
pub fn pairwise_rmse(
    est: &BTreeMap<UserId, Pose<f64>>,
    truth: &BTreeMap<UserId, Pose<f64>>,
) -> Result<f64> {
    if est.len() < 2 {
        return Err(HarnessError::Data("pairwise RMSE needs at least two users".into()));
    }
    if !est.keys().eq(truth.keys()) {
        return Err(HarnessError::Data("estimates and truth cover different users".into()));
    }
    let users: Vec<UserId> = est.keys().copied().collect();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for (a, &i) in users.iter().enumerate() {
        for &j in &users[a + 1..] {
            let e = euclidean_distance(&est[&i], &est[&j]) - euclidean_distance(&truth[&i], &truth[&j]);
            sum += e * e;
            pairs += 1;
        }
    }
    Ok((sum / pairs as f64).sqrt())
}

/// Pairwise RMSE at every timeline row against interpolated truth.
pub fn error_timeline(run: &EstimateTimeline, truth: &GroundTruth<f64>) -> Result<Vec<(f64, f64)>> {
    run.rows
        .iter()
        .map(|(t, est)| {
            let at = truth
                .poses_at(*t)
                .map_err(|e| HarnessError::Data(e.to_string()))?;
            Ok((*t, pairwise_rmse(est, &at)?))
        })
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `y` against `t`.
pub fn linear_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mt).powi(2)).sum();
    cov / var
}
