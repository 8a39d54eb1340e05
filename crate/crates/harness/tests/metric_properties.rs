use std::collections::BTreeMap;

use proptest::prelude::*;
use relpos::{Pose, UserId};
use relpos_harness::metrics::pairwise_rmse;

fn users() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 2..8)
}

fn poses(pts: &[(f64, f64)]) -> BTreeMap<UserId, Pose<f64>> {
    pts.iter()
        .enumerate()
        .map(|(i, &(x, y))| (UserId(i as u32), Pose::new(x, y, 0.0)))
        .collect()
}

proptest! {
    #[test]
    fn rigid_transforms_of_the_estimates_do_not_change_the_error(
        pts in users(),
        noise in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 8),
        angle in -3.2..3.2f64,
        tx in -50.0..50.0f64,
        ty in -50.0..50.0f64,
        mirror in any::<bool>(),
    ) {
        let truth = poses(&pts);
        let est: Vec<(f64, f64)> = pts.iter().zip(&noise).map(|(&(x, y), &(nx, ny))| (x + nx, y + ny)).collect();
        let (c, s) = (angle.cos(), angle.sin());
        let moved: Vec<(f64, f64)> = est
            .iter()
            .map(|&(x, y)| {
                let y = if mirror { -y } else { y };
                (c * x - s * y + tx, s * x + c * y + ty)
            })
            .collect();
        let a = pairwise_rmse(&poses(&est), &truth).unwrap();
        let b = pairwise_rmse(&poses(&moved), &truth).unwrap();
        prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn estimates_equal_to_truth_score_zero(pts in users()) {
        let p = poses(&pts);
        prop_assert_eq!(pairwise_rmse(&p, &p).unwrap(), 0.0);
    }
}
