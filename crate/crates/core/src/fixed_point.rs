//! The cross-product iteration in scaled signed integers.
//!
//! A value `v` is held as `round(v · S)` with `S = 2^scale_bits`. Products of
//! two such values carry `S²` and are divided by `S` right away, so every
//! stored quantity stays in `S` units:
//!
//! ```text
//! c     = (a2 b3 - a3 b2) / S, …
//! den   = Σ h·h / S + S                 (κ + 1 in S units)
//! ρ_S   = 2 S S / den                   (ρ in S units)
//! h'    = ρ_S (h + c) / S
//! ```
//!
//! Divisions truncate toward zero. The narrow mode computes intermediates in
//! `i64`, which fits `scale_bits ≤ 30`; the wide mode uses `i128` and admits
//! `scale_bits = 32`. Every operation is checked and overflow is an error.

use std::fmt::Debug;

use num_traits::{PrimInt, Signed};
use serde::{Deserialize, Serialize};

use crate::covariance::{CrossCovariance, PointPairSet};
use crate::error::{Error, Result};
use crate::fa3r::prescale_factor;
use crate::geom::{quat_to_rotation_unchecked, Mat3, QuatScalarFirst, Vec3};
use crate::solver::{register, RotationEstimate, SolverKind, SolverOptions, SolverReport};

pub const DEFAULT_SCALE_BITS: u32 = 30;
pub const MIN_SCALE_BITS: u32 = 8;
pub const MAX_SCALE_BITS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FixedVec3 {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl FixedVec3 {
    pub const fn new(x: i64, y: i64, z: i64) -> Self {
        Self { x, y, z }
    }

    pub fn encode(v: Vec3, scale: f64) -> Self {
        Self::new((v.x * scale).round() as i64, (v.y * scale).round() as i64, (v.z * scale).round() as i64)
    }

    pub fn decode(self, scale: f64) -> Vec3 {
        Vec3::new(self.x as f64 / scale, self.y as f64 / scale, self.z as f64 / scale)
    }

    fn to_array(self) -> [i64; 3] {
        [self.x, self.y, self.z]
    }

    fn max_abs(self) -> i64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedConfig {
    pub scale_bits: u32,
    pub max_iterations: usize,
    /// Stop threshold on `Σ |Δh|²` in `S²` units; `None` means `1e-9 · S²`.
    pub epsilon_fixed: Option<i128>,
    /// 128-bit intermediates.
    pub wide: bool,
}

impl Default for FixedConfig {
    fn default() -> Self {
        Self { scale_bits: DEFAULT_SCALE_BITS, max_iterations: 100, epsilon_fixed: None, wide: false }
    }
}

impl FixedConfig {
    pub fn with_scale_bits(scale_bits: u32) -> Self {
        Self { scale_bits, wide: scale_bits > 30, ..Self::default() }
    }

    pub fn scale(&self) -> f64 {
        (1u64 << self.scale_bits) as f64
    }

    pub fn threshold(&self) -> i128 {
        self.epsilon_fixed.unwrap_or_else(|| (1e-9 * self.scale() * self.scale()).round() as i128)
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_SCALE_BITS..=MAX_SCALE_BITS).contains(&self.scale_bits) {
            return Err(Error::InvalidConfig(format!(
                "scale_bits must lie in {MIN_SCALE_BITS}..={MAX_SCALE_BITS}, got {}",
                self.scale_bits
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if matches!(self.epsilon_fixed, Some(e) if e <= 0) {
            return Err(Error::InvalidConfig("epsilon_fixed must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedStep {
    pub triple: [FixedVec3; 3],
    /// `ρ` in `S` units.
    pub rho: i64,
    /// `Σ |Δh|²` in `S²` units, saturating.
    pub step_residual: i128,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedTrace {
    pub scale_bits: u32,
    pub initial: [FixedVec3; 3],
    pub steps: Vec<FixedStep>,
    pub iterations_used: usize,
    pub converged: bool,
}

impl FixedTrace {
    pub fn final_triple(&self) -> [FixedVec3; 3] {
        self.steps.last().map_or(self.initial, |s| s.triple)
    }

    pub fn decoded_final(&self) -> [Vec3; 3] {
        let s = (1u64 << self.scale_bits) as f64;
        self.final_triple().map(|h| h.decode(s))
    }
}

/// Prescales `D` exactly as the floating path does and encodes its columns.
pub fn to_fixed(cov: &CrossCovariance, cfg: &FixedConfig) -> Result<([FixedVec3; 3], f64)> {
    cfg.validate()?;
    let d = &cov.d;
    if !d.is_finite() {
        return Err(Error::DegenerateInput);
    }
    let prescale = prescale_factor(d);
    if prescale == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let s = cfg.scale() / prescale;
    Ok(([0, 1, 2].map(|j| FixedVec3::encode(d.col(j), s)), prescale))
}

trait Word: PrimInt + Signed + Debug {
    fn from_i64(v: i64) -> Self;
    fn narrow(self) -> Option<i64>;
    fn to_wide(self) -> i128;
}

impl Word for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }
    fn narrow(self) -> Option<i64> {
        Some(self)
    }
    fn to_wide(self) -> i128 {
        self as i128
    }
}

impl Word for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn narrow(self) -> Option<i64> {
        i64::try_from(self).ok()
    }
    fn to_wide(self) -> i128 {
        self
    }
}

fn mul<T: Word>(a: T, b: T) -> Option<T> {
    a.checked_mul(&b)
}

fn add<T: Word>(a: T, b: T) -> Option<T> {
    a.checked_add(&b)
}

fn sub<T: Word>(a: T, b: T) -> Option<T> {
    a.checked_sub(&b)
}

/// `(a × b) / S`.
fn cross_s<T: Word>(a: [T; 3], b: [T; 3], s: T) -> Option<[T; 3]> {
    let c = |i: usize, j: usize| -> Option<T> { Some(sub(mul(a[i], b[j])?, mul(a[j], b[i])?)? / s) };
    Some([c(1, 2)?, c(2, 0)?, c(0, 1)?])
}

/// One step; returns the new triple and `ρ_S`.
fn step<T: Word>(t: &[FixedVec3; 3], s: T) -> Option<([FixedVec3; 3], i64)> {
    let h = t.map(|v| v.to_array().map(T::from_i64));
    let mut kappa = T::zero();
    for v in &h {
        for &c in v {
            kappa = add(kappa, mul(c, c)? / s)?;
        }
    }
    let den = add(kappa, s)?;
    let rho = mul(mul(T::from_i64(2), s)?, s)? / den;
    let crosses = [cross_s(h[1], h[2], s)?, cross_s(h[2], h[0], s)?, cross_s(h[0], h[1], s)?];
    let mut out = [FixedVec3::default(); 3];
    for k in 0..3 {
        let mut c = [0i64; 3];
        for i in 0..3 {
            c[i] = (mul(rho, add(h[k][i], crosses[k][i])?)? / s).narrow()?;
        }
        out[k] = FixedVec3::new(c[0], c[1], c[2]);
    }
    Some((out, rho.narrow()?))
}

fn step_residual(a: &[FixedVec3; 3], b: &[FixedVec3; 3]) -> i128 {
    let mut acc: i128 = 0;
    for k in 0..3 {
        for (x, y) in a[k].to_array().into_iter().zip(b[k].to_array()) {
            let d = (x as i128) - (y as i128);
            acc = acc.saturating_add(d.saturating_mul(d));
        }
    }
    acc
}

fn iterate_with<T: Word>(h: [FixedVec3; 3], cfg: &FixedConfig) -> Result<FixedTrace> {
    let s = T::from_i64(1i64 << cfg.scale_bits);
    let threshold = cfg.threshold();
    let mut trace =
        FixedTrace { scale_bits: cfg.scale_bits, initial: h, steps: Vec::new(), iterations_used: 0, converged: false };
    let mut current = h;
    while trace.iterations_used < cfg.max_iterations {
        let (next, rho) = step(&current, s).ok_or(Error::Overflow { scale_bits: cfg.scale_bits })?;
        debug_assert!(
            next.iter().all(|v| v.max_abs().to_wide() <= 2 * s.to_wide()),
            "iterate left the |h| <= 2S envelope"
        );
        let step_residual = step_residual(&next, &current);
        trace.steps.push(FixedStep { triple: next, rho, step_residual });
        trace.iterations_used += 1;
        current = next;
        if step_residual < threshold {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// Runs the integer iteration. A run that exhausts `max_iterations` is
/// returned with `converged = false`.
pub fn fixed_iterate(h: [FixedVec3; 3], cfg: &FixedConfig) -> Result<FixedTrace> {
    cfg.validate()?;
    if cfg.wide {
        iterate_with::<i128>(h, cfg)
    } else {
        iterate_with::<i64>(h, cfg)
    }
}

/// Decodes the converged triple and reads the quaternion off it. The
/// quantized triple is only orthonormal to about `2^-scale_bits`, so the
/// rotation is rebuilt from the quaternion rather than taken verbatim.
pub fn fixed_solve(cov: &CrossCovariance, cfg: &FixedConfig) -> Result<RotationEstimate> {
    let (h, _) = to_fixed(cov, cfg)?;
    let trace = fixed_iterate(h, cfg)?;
    if !trace.converged {
        return Err(Error::FixedNotConverged { iterations: trace.iterations_used });
    }
    let [a, b, c] = trace.decoded_final();
    let m = Mat3::from_rows(a, b, c).m;
    let numerator = QuatScalarFirst::new(
        1.0 + m[0][0] + m[1][1] + m[2][2],
        m[2][1] - m[1][2],
        m[0][2] - m[2][0],
        m[1][0] - m[0][1],
    );
    if !(numerator.norm() > 1e-6) {
        return Err(Error::ZeroNorm);
    }
    let quaternion = numerator.normalized().canonical();
    Ok(RotationEstimate {
        rotation: quat_to_rotation_unchecked(quaternion),
        quaternion,
        iterations: trace.iterations_used,
        degenerate: false,
        trace: None,
    })
}

/// Floating-point covariance, integer iteration.
pub fn fixed_register(pairs: &PointPairSet, cfg: &FixedConfig) -> Result<SolverReport> {
    register(SolverKind::Fa3rFixed, pairs, &SolverOptions { fixed: *cfg, ..SolverOptions::default() })
}

#[cfg(test)]
mod tests {
    use super::*;

    const S30: i64 = 1 << 30;

    #[test]
    fn identity_encoding_and_fixed_point() {
        let cov = CrossCovariance::from_matrix(Mat3::IDENTITY);
        let cfg = FixedConfig::default();
        let (h, p) = to_fixed(&cov, &cfg).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(h, [FixedVec3::new(S30, 0, 0), FixedVec3::new(0, S30, 0), FixedVec3::new(0, 0, S30)]);
        let trace = fixed_iterate(h, &cfg).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations_used, 1);
        assert_eq!(trace.steps[0].rho, S30 / 2);
        assert_eq!(trace.steps[0].triple, h);
    }

    #[test]
    fn prescale_by_largest_entry() {
        let d = Mat3::new([[5.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let (h, p) = to_fixed(&CrossCovariance::from_matrix(d), &FixedConfig::default()).unwrap();
        assert_eq!(p, 5.0);
        assert_eq!(h[0].x, S30);
        assert_eq!(h[1].y, (S30 as f64 / 5.0).round() as i64);
    }

    #[test]
    fn zero_matrix_and_bad_scale() {
        let cov = CrossCovariance::from_matrix(Mat3::ZERO);
        assert!(matches!(to_fixed(&cov, &FixedConfig::default()), Err(Error::ZeroMatrix)));
        let cfg = FixedConfig { scale_bits: 7, ..FixedConfig::default() };
        assert!(matches!(to_fixed(&CrossCovariance::from_matrix(Mat3::IDENTITY), &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn narrow_words_overflow_at_32_bits() {
        let cov = CrossCovariance::from_matrix(Mat3::new([[0.3, -1.0, 0.2], [0.9, 0.1, -0.4], [0.2, 0.5, 0.8]]));
        let narrow = FixedConfig { scale_bits: 32, wide: false, ..FixedConfig::default() };
        assert!(matches!(fixed_solve(&cov, &narrow), Err(Error::Overflow { scale_bits: 32 })));
        let wide = FixedConfig::with_scale_bits(32);
        assert!(fixed_solve(&cov, &wide).is_ok());
    }
}
