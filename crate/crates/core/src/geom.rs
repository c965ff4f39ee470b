//! Fixed-size vectors, matrices and quaternions used throughout the crate.
//!
//! Everything here is a plain `Copy` value type. Matrices are stored row-major:
//! `m[row][col]`.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used by [`Mat3::check_rotation`] and the quaternion converters.
pub const ROTATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// `(a2 b3 - a3 b2, a3 b1 - a1 b3, a1 b2 - a2 b1)`.
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Free-function form of [`Vec3::cross`].
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    a.cross(b)
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        self.scale(s)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const ZERO: Mat3 = Mat3 { m: [[0.0; 3]; 3] };
    pub const IDENTITY: Mat3 = Mat3 { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] };

    pub const fn new(m: [[f64; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn from_row_slice(v: &[f64; 9]) -> Self {
        Self::new([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
    }

    pub fn from_rows(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Self::new([a.to_array(), b.to_array(), c.to_array()])
    }

    pub fn from_cols(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Self::from_rows(a, b, c).transpose()
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Self::new([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    /// `a bᵀ`
    pub fn outer(a: Vec3, b: Vec3) -> Self {
        let (a, b) = (a.to_array(), b.to_array());
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i] * b[j];
            }
        }
        Self::new(m)
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::from_array(self.m[i])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn to_row_slice(&self) -> [f64; 9] {
        let m = &self.m;
        [m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self::new([[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]])
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> f64 {
        self.row(0).dot(self.row(1).cross(self.row(2)))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, o: &Mat3) -> f64 {
        self.m.iter().flatten().zip(o.m.iter().flatten()).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Largest entry of `|MᵀM - I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        (self.transpose() * *self).max_abs_diff(&Mat3::IDENTITY)
    }

    /// Checks membership in SO(3) within [`ROTATION_TOLERANCE`].
    pub fn check_rotation(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NotARotation { residual: f64::INFINITY, det: f64::NAN });
        }
        let residual = self.orthonormality_residual();
        let det = self.det();
        if residual > ROTATION_TOLERANCE || (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(Error::NotARotation { residual, det });
        }
        Ok(())
    }

    pub fn rot_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    }

    pub fn rot_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    pub fn rot_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j] + self.m[i][2] * o.m[2][j];
            }
        }
        Mat3::new(m)
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut out = self;
        for (a, b) in out.m.iter_mut().flatten().zip(o.m.iter().flatten()) {
            *a += b;
        }
        out
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        self + o.scale(-1.0)
    }
}

/// General 4×4 matrix. Only used for the structural identities around the
/// symmetric quaternion matrices (the `M`, `N` permutation-sign matrices are
/// skew).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat4 {
    pub m: [[f64; 4]; 4],
}

impl Mat4 {
    pub const ZERO: Mat4 = Mat4 { m: [[0.0; 4]; 4] };

    pub fn identity() -> Self {
        Self::scalar(1.0)
    }

    pub fn scalar(s: f64) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = s;
        }
        Self { m }
    }

    pub fn transpose(&self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.m[j][i];
            }
        }
        Self { m }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.m[i][i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn max_abs_diff(&self, o: &Mat4) -> f64 {
        self.m.iter().flatten().zip(o.m.iter().flatten()).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn mul_vec(&self, v: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|j| self.m[i][j] * v[j]).sum();
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| self.m[i][j] == self.m[j][i]))
    }

    /// Repeated squaring: `self^(2^j)`.
    pub fn pow2(&self, j: u32) -> Mat4 {
        (0..j).fold(*self, |acc, _| acc * acc)
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, o: Mat4) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Mat4 { m }
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, o: Mat4) -> Mat4 {
        let mut out = self;
        for (a, b) in out.m.iter_mut().flatten().zip(o.m.iter().flatten()) {
            *a += b;
        }
        out
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, o: Mat4) -> Mat4 {
        self + o.scale(-1.0)
    }
}

/// Symmetric 4×4 matrix. Construction mirrors the upper triangle, so
/// `m[i][j] == m[j][i]` holds bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat4Sym(Mat4);

impl Mat4Sym {
    /// Builds from a full array, taking the upper triangle as authoritative.
    pub fn from_upper(m: [[f64; 4]; 4]) -> Self {
        let mut out = m;
        for i in 0..4 {
            for j in 0..i {
                out[i][j] = m[j][i];
            }
        }
        Self(Mat4 { m: out })
    }

    pub fn zero() -> Self {
        Self(Mat4::ZERO)
    }

    pub fn as_mat4(&self) -> &Mat4 {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.m[i][j]
    }

    pub fn shifted(&self, s: f64) -> Mat4Sym {
        let mut m = self.0.m;
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += s;
        }
        Mat4Sym(Mat4 { m })
    }

    pub fn mul_vec(&self, v: [f64; 4]) -> [f64; 4] {
        self.0.mul_vec(v)
    }
}

impl From<Mat4Sym> for Mat4 {
    fn from(s: Mat4Sym) -> Mat4 {
        s.0
    }
}

/// Unit quaternion, scalar first: `(cos θ/2, n sin θ/2)`.
///
/// The rotation it encodes is the active (Hamilton) rotation `v ↦ q v q*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuatScalarFirst {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

/// Same quaternion with the vector part first: `(n sin θ/2, cos θ/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuatVectorFirst {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub q0: f64,
}

impl QuatScalarFirst {
    pub const IDENTITY: QuatScalarFirst = QuatScalarFirst { q0: 1.0, q1: 0.0, q2: 0.0, q3: 0.0 };

    pub const fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        Self { q0, q1, q2, q3 }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.q0, self.q1, self.q2, self.q3]
    }

    pub fn norm(self) -> f64 {
        self.to_array().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::from_array(self.to_array().map(|v| v / n))
    }

    pub fn conjugate(self) -> Self {
        Self::new(self.q0, -self.q1, -self.q2, -self.q3)
    }

    pub fn negate(self) -> Self {
        Self::from_array(self.to_array().map(|v| -v))
    }

    /// Sign canonicalization: `q0 > 0`, or on a tie the first nonzero
    /// component positive.
    pub fn canonical(self) -> Self {
        let a = self.to_array();
        match a.iter().find(|v| **v != 0.0) {
            Some(v) if *v < 0.0 => self.negate(),
            _ => self,
        }
    }

    /// Distance between rotations, insensitive to the `q ~ -q` ambiguity.
    pub fn sign_invariant_distance(self, o: QuatScalarFirst) -> f64 {
        let a = self.to_array();
        let b = o.to_array();
        let plus = (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max);
        let minus = (0..4).map(|i| (a[i] + b[i]).abs()).fold(0.0, f64::max);
        plus.min(minus)
    }
}

impl QuatVectorFirst {
    pub const fn new(q1: f64, q2: f64, q3: f64, q0: f64) -> Self {
        Self { q1, q2, q3, q0 }
    }

    pub fn norm(self) -> f64 {
        (self.q0 * self.q0 + self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3).sqrt()
    }
}

/// `(q1, q2, q3, q0) -> (q0, q1, q2, q3)`. A pure permutation.
pub fn convert_convention(q: QuatVectorFirst) -> QuatScalarFirst {
    QuatScalarFirst::new(q.q0, q.q1, q.q2, q.q3)
}

impl From<QuatVectorFirst> for QuatScalarFirst {
    fn from(q: QuatVectorFirst) -> Self {
        convert_convention(q)
    }
}

impl From<QuatScalarFirst> for QuatVectorFirst {
    fn from(q: QuatScalarFirst) -> Self {
        QuatVectorFirst::new(q.q1, q.q2, q.q3, q.q0)
    }
}

const QUAT_NORM_TOLERANCE: f64 = 1e-6;

/// Direction cosine matrix of a unit quaternion. `q` and `-q` give the same
/// matrix.
pub fn quat_to_rotation(q: QuatScalarFirst) -> Result<Mat3> {
    let n = q.norm();
    if !n.is_finite() || (n - 1.0).abs() > QUAT_NORM_TOLERANCE {
        return Err(Error::NonUnitQuaternion { norm: n });
    }
    Ok(quat_to_rotation_unchecked(q))
}

pub(crate) fn quat_to_rotation_unchecked(q: QuatScalarFirst) -> Mat3 {
    let QuatScalarFirst { q0, q1, q2, q3 } = q;
    Mat3::new([
        [q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3, 2.0 * (q1 * q2 - q0 * q3), 2.0 * (q1 * q3 + q0 * q2)],
        [2.0 * (q1 * q2 + q0 * q3), q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3, 2.0 * (q2 * q3 - q0 * q1)],
        [2.0 * (q1 * q3 - q0 * q2), 2.0 * (q2 * q3 + q0 * q1), q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3],
    ])
}

/// Inverse of [`quat_to_rotation`], branching on the largest of
/// `(tr C, C11, C22, C33)`. Result is canonicalized (`q0 >= 0`).
pub fn rotation_to_quat(c: &Mat3) -> Result<QuatScalarFirst> {
    c.check_rotation()?;
    Ok(rotation_to_quat_unchecked(c))
}

pub(crate) fn rotation_to_quat_unchecked(c: &Mat3) -> QuatScalarFirst {
    let m = &c.m;
    let tr = c.trace();
    let q = if tr >= m[0][0] && tr >= m[1][1] && tr >= m[2][2] {
        let s = 2.0 * (1.0 + tr).sqrt();
        [0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s]
    } else if m[0][0] >= m[1][1] && m[0][0] >= m[2][2] {
        let s = 2.0 * (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt();
        [(m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s]
    } else if m[1][1] >= m[2][2] {
        let s = 2.0 * (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt();
        [(m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s]
    } else {
        let s = 2.0 * (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt();
        [(m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s]
    };
    QuatScalarFirst::from_array(q).normalized().canonical()
}

/// `arccos((tr(Caᵀ Cb) - 1) / 2)`, in `[0, π]`.
///
/// Evaluated as `atan2(sin, cos)` with the sine taken from the skew part of
/// `Caᵀ Cb`; the bare arccos cannot resolve angles below about `1e-8`.
pub fn geodesic_angle(ca: &Mat3, cb: &Mat3) -> Result<f64> {
    ca.check_rotation()?;
    cb.check_rotation()?;
    Ok(geodesic_angle_unchecked(ca, cb))
}

pub(crate) fn geodesic_angle_unchecked(ca: &Mat3, cb: &Mat3) -> f64 {
    let r = ca.transpose() * *cb;
    let m = &r.m;
    let cos = (r.trace() - 1.0) / 2.0;
    let sin = Vec3::new(m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]).norm() / 2.0;
    sin.atan2(cos)
}

/// Rotation `C` and translation `T` mapping reference points to body points:
/// `b ≈ C r + T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform { rotation: Mat3::IDENTITY, translation: Vec3::ZERO };

    pub fn new(rotation: Mat3, translation: Vec3) -> Self {
        Self { rotation, translation }
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform::new(self.rotation * other.rotation, self.rotation * other.translation + self.translation)
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform::new(rt, -(rt * self.translation))
    }
}
