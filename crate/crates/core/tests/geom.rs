mod common;

use common::*;
use far3_core::{
    convert_convention, cross, geodesic_angle, quat_to_rotation, rotation_to_quat, Error, Mat3, QuatScalarFirst,
    QuatVectorFirst, RigidTransform, Vec3,
};
use proptest::prelude::*;

fn finite_vec() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-1e3f64..1e3).prop_map(Vec3::from_array)
}

proptest! {
    #[test]
    fn cross_is_antisymmetric(a in finite_vec(), b in finite_vec()) {
        prop_assert_eq!(cross(a, b), -cross(b, a));
    }

    #[test]
    fn cross_is_orthogonal_to_both(a in finite_vec(), b in finite_vec()) {
        let c = cross(a, b);
        let bound = 1e-12 * a.norm() * b.norm() * (a.norm().max(b.norm()));
        prop_assert!(c.dot(a).abs() <= bound);
        prop_assert!(c.dot(b).abs() <= bound);
    }

    #[test]
    fn cross_norm_is_sine_law(a in finite_vec(), b in finite_vec()) {
        let (na, nb) = (a.norm(), b.norm());
        prop_assume!(na > 1e-6 && nb > 1e-6);
        let cos = (a.dot(b) / (na * nb)).clamp(-1.0, 1.0);
        let sin = (1.0 - cos * cos).sqrt();
        let n = cross(a, b).norm();
        prop_assert!((n - na * nb * sin).abs() <= 1e-6 * na * nb);
        prop_assert!(n <= na.min(nb) * na.max(nb) * (1.0 + 1e-12));
    }

    #[test]
    fn vector_first_conversion_round_trips(a in prop::array::uniform4(-1.0f64..1.0)) {
        let v = QuatVectorFirst::new(a[0], a[1], a[2], a[3]);
        let s = convert_convention(v);
        prop_assert_eq!(s.to_array(), [a[3], a[0], a[1], a[2]]);
        prop_assert_eq!(QuatVectorFirst::from(s), v);
    }

    #[test]
    fn transform_inverse_composes_to_identity(seed in any::<u64>()) {
        let mut g = rng(seed);
        let t = RigidTransform::new(rotation(&mut g), vec3(&mut g, 50.0));
        let p = vec3(&mut g, 10.0);
        let back = t.inverse().apply(t.apply(p));
        prop_assert!((back - p).norm() < 1e-11);
        let id = t.compose(&t.inverse());
        prop_assert!(id.rotation.max_abs_diff(&Mat3::IDENTITY) < 1e-14);
    }
}

#[test]
fn quaternion_rotation_round_trips() {
    let mut g = rng(7);
    for _ in 0..10_000 {
        let q = unit_quat(&mut g).canonical();
        let c = quat_to_rotation(q).unwrap();
        let back = rotation_to_quat(&c).unwrap();
        assert!(back.sign_invariant_distance(q) < 1e-9, "{q:?} -> {back:?}");
        assert!(quat_to_rotation(back).unwrap().max_abs_diff(&c) < 1e-9);
    }
}

#[test]
fn rotation_agrees_with_nalgebra() {
    let mut g = rng(8);
    for _ in 0..200 {
        let q = unit_quat(&mut g);
        let [w, i, j, k] = q.to_array();
        let oracle = nalgebra::UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(w, i, j, k));
        let r = oracle.to_rotation_matrix();
        let c = quat_to_rotation(q).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert!((c.m[a][b] - r[(a, b)]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn canonical_sign() {
    let q = QuatScalarFirst::new(-0.5, 0.5, -0.5, 0.5).canonical();
    assert_eq!(q.to_array(), [0.5, -0.5, 0.5, -0.5]);
    let tie = QuatScalarFirst::new(0.0, 0.0, -1.0, 0.0).canonical();
    assert_eq!(tie.to_array(), [0.0, 0.0, 1.0, 0.0]);
}

#[test]
fn geodesic_examples() {
    let a = Mat3::rot_z(0.3);
    assert!((geodesic_angle(&Mat3::IDENTITY, &a).unwrap() - 0.3).abs() < 1e-12);
    assert!((geodesic_angle(&a, &Mat3::rot_z(-0.4)).unwrap() - 0.7).abs() < 1e-12);
    assert!(
        (geodesic_angle(&Mat3::IDENTITY, &Mat3::rot_x(std::f64::consts::PI)).unwrap() - std::f64::consts::PI).abs()
            < 1e-7
    );
    assert_eq!(geodesic_angle(&a, &a).unwrap(), 0.0);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(matches!(quat_to_rotation(QuatScalarFirst::new(1.0, 1.0, 0.0, 0.0)), Err(Error::NonUnitQuaternion { .. })));
    assert!(matches!(rotation_to_quat(&Mat3::diag(1.0, 1.0, -1.0)), Err(Error::NotARotation { .. })));
    assert!(geodesic_angle(&Mat3::diag(2.0, 1.0, 1.0), &Mat3::IDENTITY).is_err());
}
