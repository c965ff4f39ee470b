mod common;

use common::*;
use far3_core::baselines::svd_solve;
use far3_core::{centroids, cross_covariance, fa3r_solve, h_table, Error, Fa3rConfig, Mat3, PointPairSet, Vec3};
use proptest::prelude::*;

#[test]
fn two_pair_example() {
    let pairs = PointPairSet::new(
        vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)],
        vec![Vec3::new(0.0, 2.0, 0.0), Vec3::new(0.0, -2.0, 0.0)],
    )
    .unwrap();
    let cov = cross_covariance(&pairs).unwrap();
    assert_eq!(cov.d, Mat3::new([[0.0, 2.0, 0.0], [0.0; 3], [0.0; 3]]));
    assert_eq!(centroids(&pairs).unwrap(), (Vec3::ZERO, Vec3::ZERO));
    let h = h_table(&pairs).unwrap();
    assert_eq!((h.hx1(), h.hx2(), h.hx3()), (0.0, 2.0, 0.0));
    assert_eq!(h.columns().1, Vec3::new(2.0, 0.0, 0.0));
}

#[test]
fn weights_are_normalized() {
    let r = vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0), Vec3::new(0.0, 3.0, 0.0)];
    let b = r.clone();
    let a = cross_covariance(&PointPairSet::with_weights(r.clone(), b.clone(), vec![1.0, 2.0, 3.0]).unwrap()).unwrap();
    let c = cross_covariance(&PointPairSet::with_weights(r, b, vec![10.0, 20.0, 30.0]).unwrap()).unwrap();
    assert!(a.d.max_abs_diff(&c.d) < 1e-15);
    assert!((a.r_mean - Vec3::new(-1.0 / 6.0, 1.5, 0.0)).norm() < 1e-15);
}

#[test]
fn construction_errors() {
    assert!(matches!(cross_covariance(&PointPairSet::new(vec![], vec![]).unwrap()), Err(Error::EmptySet)));
    assert!(matches!(PointPairSet::new(vec![Vec3::ZERO], vec![]), Err(Error::LengthMismatch { .. })));
    assert!(PointPairSet::with_weights(vec![Vec3::ZERO], vec![Vec3::ZERO], vec![0.0]).is_err());
    assert!(PointPairSet::with_weights(vec![Vec3::ZERO], vec![Vec3::ZERO], vec![1.0, 1.0]).is_err());
    assert!(PointPairSet::new(vec![Vec3::new(f64::NAN, 0.0, 0.0)], vec![Vec3::ZERO]).is_err());
}

#[test]
fn noise_free_recovery_is_exact() {
    let mut g = rng(11);
    for _ in 0..50 {
        let c = rotation(&mut g);
        let t = vec3(&mut g, 5.0);
        let pairs = noisy_pairs(&mut g, 6, &c, t, 0.0);
        let cov = cross_covariance(&pairs).unwrap();
        assert!(fa3r_solve(&cov, &Fa3rConfig::default()).unwrap().rotation.max_abs_diff(&c) < 1e-12);
        assert!(svd_solve(&cov).unwrap().rotation.max_abs_diff(&c) < 1e-12);
    }
}

proptest! {
    #[test]
    fn translation_invariance(seed in any::<u64>(), t in prop::array::uniform3(-1e3f64..1e3)) {
        let mut g = rng(seed);
        let c = rotation(&mut g);
        let pairs = noisy_pairs(&mut g, 8, &c, Vec3::ZERO, 0.1);
        let shifted: Vec<Vec3> = pairs.body().iter().map(|p| *p + Vec3::from_array(t)).collect();
        let a = cross_covariance(&pairs).unwrap().d;
        let b = cross_covariance(&PointPairSet::new(pairs.reference().to_vec(), shifted).unwrap()).unwrap().d;
        prop_assert!(a.max_abs_diff(&b) <= 1e-12 * (1.0 + t.iter().fold(0.0f64, |m, v| m.max(v.abs()))) * a.max_abs().max(1.0));
    }

    #[test]
    fn rank_is_bounded_by_pair_count(seed in any::<u64>(), n in 1usize..4) {
        let mut g = rng(seed);
        let r: Vec<Vec3> = (0..n).map(|_| vec3(&mut g, 10.0)).collect();
        let b: Vec<Vec3> = (0..n).map(|_| vec3(&mut g, 10.0)).collect();
        let d = cross_covariance(&PointPairSet::new(r, b).unwrap()).unwrap().d;
        let sv = na3(&d).singular_values();
        let rank = sv.iter().filter(|s| **s > 1e-9 * sv.max().max(1e-300)).count();
        prop_assert!(rank <= (n - 1).min(3));
    }

    #[test]
    fn swapped_set_transposes(seed in any::<u64>()) {
        let mut g = rng(seed);
        let c = rotation(&mut g);
        let pairs = noisy_pairs(&mut g, 5, &c, Vec3::ZERO, 1.0);
        let a = cross_covariance(&pairs).unwrap().d;
        let b = cross_covariance(&pairs.swapped()).unwrap().d;
        prop_assert!(a.transpose().max_abs_diff(&b) < 1e-12);
    }
}
