#![allow(dead_code)]

use far3_core::{CrossCovariance, Mat3, PointPairSet, QuatScalarFirst, Vec3};
use nalgebra::{Matrix3, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const WORKED_D: [[f64; 3]; 3] = [
    [-0.1493707, 0.33704186, -0.26092604],
    [0.15536306, -0.15098108, 0.87009800],
    [0.72649274, -0.26632189, -0.91058475],
];

pub fn worked_cov() -> CrossCovariance {
    CrossCovariance::from_matrix(Mat3::new(WORKED_D))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_quat(rng: &mut ChaCha8Rng) -> QuatScalarFirst {
    let q = QuatScalarFirst::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    q.normalized()
}

pub fn rotation(rng: &mut ChaCha8Rng) -> Mat3 {
    far3_core::quat_to_rotation(unit_quat(rng)).unwrap()
}

pub fn vec3(rng: &mut ChaCha8Rng, h: f64) -> Vec3 {
    Vec3::new(rng.random_range(-h..h), rng.random_range(-h..h), rng.random_range(-h..h))
}

pub fn matrix(rng: &mut ChaCha8Rng) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    m.iter_mut().flatten().for_each(|v| *v = rng.sample(StandardNormal));
    Mat3::new(m)
}

/// Points with `b = C r + T + noise`.
pub fn noisy_pairs(rng: &mut ChaCha8Rng, n: usize, c: &Mat3, t: Vec3, sigma: f64) -> PointPairSet {
    let r: Vec<Vec3> = (0..n).map(|_| vec3(rng, 10.0)).collect();
    let b = r
        .iter()
        .map(|p| {
            let e = Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
            *c * *p + t + e * sigma
        })
        .collect();
    PointPairSet::new(r, b).unwrap()
}

pub fn na3(m: &Mat3) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m.m[i][j])
}

pub fn na4(m: &far3_core::Mat4) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| m.m[i][j])
}

/// Optimal rotation for `b ≈ C r`, `D = Σ r bᵀ`, via nalgebra's SVD.
pub fn oracle_rotation(d: &Mat3) -> Mat3 {
    let svd = na3(d).svd(true, true);
    let u = svd.u.unwrap();
    let v = svd.v_t.unwrap().transpose();
    let s = (u.determinant() * v.determinant()).signum();
    let c = v * Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, s)) * u.transpose();
    Mat3::new([[c[(0, 0)], c[(0, 1)], c[(0, 2)]], [c[(1, 0)], c[(1, 1)], c[(1, 2)]], [c[(2, 0)], c[(2, 1)], c[(2, 2)]]])
}

/// Eigenvalues, descending.
pub fn oracle_eigenvalues(m: &far3_core::Mat4) -> [f64; 4] {
    let e = nalgebra::SymmetricEigen::new(na4(m));
    let mut v = [e.eigenvalues[0], e.eigenvalues[1], e.eigenvalues[2], e.eigenvalues[3]];
    v.sort_by(|a, b| b.total_cmp(a));
    v
}
