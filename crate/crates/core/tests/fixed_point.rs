mod common;

use common::*;
use far3_core::fixed_point::{DEFAULT_SCALE_BITS, MAX_SCALE_BITS};
use far3_core::{
    cross_covariance, fa3r_register, fa3r_solve, fixed_iterate, fixed_register, generate, geodesic_angle, metric_error,
    solve_covariance, to_fixed, CrossCovariance, Error, Fa3rConfig, FixedConfig, FixedVec3, Mat3, PointPairSet,
    SolverKind, SolverOptions, SynthSpec, Vec3,
};
use proptest::prelude::*;

const S30: i64 = 1 << 30;

#[test]
fn identity_encodes_to_the_scale() {
    let (h, prescale) = to_fixed(&CrossCovariance::from_matrix(Mat3::IDENTITY), &FixedConfig::default()).unwrap();
    assert_eq!(prescale, 1.0);
    assert_eq!(h, [FixedVec3::new(S30, 0, 0), FixedVec3::new(0, S30, 0), FixedVec3::new(0, 0, S30)]);
    let trace = fixed_iterate(h, &FixedConfig::default()).unwrap();
    assert!(trace.converged);
    assert_eq!(trace.iterations_used, 1);
    assert_eq!(trace.steps[0].rho, S30 / 2);
}

#[test]
fn prescale_divides_by_the_largest_entry() {
    let d = Mat3::new([[5.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    let (h, prescale) = to_fixed(&CrossCovariance::from_matrix(d), &FixedConfig::default()).unwrap();
    assert_eq!(prescale, 5.0);
    assert_eq!(h[0].x, S30);
    assert_eq!(h[1].y, (S30 as f64 / 5.0).round() as i64);
}

#[test]
fn worked_covariance_decodes_within_quantization() {
    let cov = worked_cov();
    let (h, prescale) = to_fixed(&cov, &FixedConfig::default()).unwrap();
    let s = (1u64 << DEFAULT_SCALE_BITS) as f64;
    for j in 0..3 {
        let back = h[j].decode(s) * prescale;
        assert!((back - cov.d.col(j)).max_abs() <= 2f64.powi(-29) * prescale);
    }
    let fixed = solve_covariance(SolverKind::Fa3rFixed, &cov, &SolverOptions::default()).unwrap();
    let float = fa3r_solve(&cov, &Fa3rConfig::default()).unwrap();
    assert!(geodesic_angle(&fixed.rotation, &float.rotation).unwrap() < 1e-4);
}

#[test]
fn differential_against_double() {
    let mut g = rng(31);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let cov = CrossCovariance::from_matrix(matrix(&mut g));
        let fixed = solve_covariance(SolverKind::Fa3rFixed, &cov, &SolverOptions::default()).unwrap();
        let float = fa3r_solve(&cov, &Fa3rConfig::default()).unwrap();
        worst = worst.max(geodesic_angle(&fixed.rotation, &float.rotation).unwrap());
    }
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn traces_are_deterministic() {
    let mut g = rng(32);
    for _ in 0..100 {
        let cov = CrossCovariance::from_matrix(matrix(&mut g));
        let (h, _) = to_fixed(&cov, &FixedConfig::default()).unwrap();
        let a = fixed_iterate(h, &FixedConfig::default()).unwrap();
        let b = fixed_iterate(h, &FixedConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn exact_transform_and_identity() {
    let mut g = rng(33);
    let c = rotation(&mut g);
    let t = Vec3::new(12.0, -7.0, 30.0);
    let pairs = noisy_pairs(&mut g, 50, &c, t, 0.0);
    let report = fixed_register(&pairs, &FixedConfig::default()).unwrap();
    assert!(geodesic_angle(&report.transform.rotation, &c).unwrap() < 1e-4);
    assert!((report.transform.translation - t).norm() < 1e-4 * t.norm());

    let r: Vec<Vec3> = (0..10).map(|_| vec3(&mut g, 10.0)).collect();
    let report = fixed_register(&PointPairSet::new(r.clone(), r).unwrap(), &FixedConfig::default()).unwrap();
    assert_eq!(report.transform.rotation, Mat3::IDENTITY);
    assert!(report.transform.translation.max_abs() < 1e-12);
}

#[test]
fn snr_ten_metric_matches_double() {
    for seed in 0..20 {
        let (pairs, _) = generate(&SynthSpec::with_snr(10.0, 1000, seed)).unwrap();
        let fixed = metric_error(&pairs, &fixed_register(&pairs, &FixedConfig::default()).unwrap().transform);
        let float = metric_error(&pairs, &fa3r_register(&pairs, &Fa3rConfig::default()).unwrap().transform);
        assert!((fixed - float).abs() <= 1e-3 * float, "{fixed} vs {float}");
    }
}

#[test]
fn wide_mode_reaches_32_bits() {
    let cov = worked_cov();
    let wide = FixedConfig::with_scale_bits(MAX_SCALE_BITS);
    assert!(wide.wide);
    let est =
        solve_covariance(SolverKind::Fa3rFixed, &cov, &SolverOptions { fixed: wide, ..Default::default() }).unwrap();
    let float = fa3r_solve(&cov, &Fa3rConfig::default()).unwrap();
    assert!(geodesic_angle(&est.rotation, &float.rotation).unwrap() < 1e-6);

    let narrow = FixedConfig { wide: false, ..wide };
    let (h, _) = to_fixed(&cov, &narrow).unwrap();
    assert!(matches!(fixed_iterate(h, &narrow), Err(Error::Overflow { scale_bits: 32 })));
}

#[test]
fn config_errors() {
    assert!(to_fixed(&CrossCovariance::from_matrix(Mat3::ZERO), &FixedConfig::default()).is_err());
    assert!(FixedConfig::with_scale_bits(4).validate().is_err());
    assert!(FixedConfig::with_scale_bits(40).validate().is_err());
    let stuck = FixedConfig { max_iterations: 1, ..FixedConfig::default() };
    let cov = cross_covariance(&noisy_pairs(&mut rng(34), 10, &Mat3::rot_x(2.0), Vec3::ZERO, 1.0)).unwrap();
    assert!(matches!(
        solve_covariance(SolverKind::Fa3rFixed, &cov, &SolverOptions { fixed: stuck, ..Default::default() }),
        Err(Error::FixedNotConverged { iterations: 1 })
    ));
}

proptest! {
    #[test]
    fn coarse_scales_still_track_double(seed in any::<u64>(), bits in 16u32..=30) {
        let cov = CrossCovariance::from_matrix(matrix(&mut rng(seed)));
        let opts = SolverOptions { fixed: FixedConfig::with_scale_bits(bits), ..Default::default() };
        let fixed = solve_covariance(SolverKind::Fa3rFixed, &cov, &opts).unwrap();
        let float = fa3r_solve(&cov, &Fa3rConfig::default()).unwrap();
        let tol = 2f64.powi(-(bits as i32)) * 1e4;
        prop_assert!(geodesic_angle(&fixed.rotation, &float.rotation).unwrap() < tol.max(1e-4));
    }
}
