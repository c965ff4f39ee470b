//! The cross-product iteration.
//!
//! Starting from the columns `h_x, h_y, h_z` of the cross-covariance `D`,
//! each step computes
//!
//! ```text
//! ρ     = 2 / (|h_x|² + |h_y|² + |h_z|² + 1)
//! h_x' = ρ (h_x + h_y × h_z)
//! h_y' = ρ (h_y + h_z × h_x)
//! h_z' = ρ (h_z + h_x × h_y)
//! ```
//!
//! One step is algebraically a squaring of `W + I`, the 4×4 quaternion matrix
//! built from the triple, renormalized so that it keeps the `W + I` shape. The
//! iteration is therefore a power method on `W + I` that never forms the 4×4
//! matrix. The triple converges to an orthonormal, right-handed set with
//! `ρ → 1/2`.
//!
//! Orientation: with `b ≈ C r + T` and `D = Σ (r - r̄)(b - b̄)ᵀ`, the converged
//! column triple spans the polar factor of `D`, which is `Cᵀ`. The optimal
//! rotation therefore has the converged vectors as its *rows*
//! ([`Fa3rMode::RowVariant`]). Iterating the rows of `D` instead gives the
//! same rotation with the converged vectors as its *columns*
//! ([`Fa3rMode::ColumnVariant`]).

use web_time::Instant;

use serde::{Deserialize, Serialize};

use crate::covariance::{cross_covariance, CrossCovariance, PointPairSet};
use crate::error::{Error, Result};
use crate::geom::{quat_to_rotation_unchecked, rotation_to_quat_unchecked, Mat3, QuatScalarFirst, Vec3};
use crate::solver::{RotationEstimate, SolverKind, SolverReport};

pub const DEFAULT_EPSILON: f64 = 1e-12;
pub const DEFAULT_MAX_ITERATIONS: usize = 100;

/// Converged triples farther than this from orthonormal are rejected by
/// [`rotation_from_trace`].
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-6;

const RANK_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fa3rMode {
    /// Iterate the columns of `D`; the rotation's rows are the result.
    #[default]
    RowVariant,
    /// Iterate the rows of `D`; the rotation's columns are the result.
    ColumnVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fa3rConfig {
    /// Stop once `Σ |h_k - h_{k-1}|²` drops below this.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub mode: Fa3rMode,
}

impl Default for Fa3rConfig {
    fn default() -> Self {
        Self { epsilon: DEFAULT_EPSILON, max_iterations: DEFAULT_MAX_ITERATIONS, mode: Fa3rMode::RowVariant }
    }
}

impl Fa3rConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self { epsilon, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// One step of the iteration: the new triple, the `ρ` that produced it and
/// the squared step length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fa3rStep {
    pub h_x: Vec3,
    pub h_y: Vec3,
    pub h_z: Vec3,
    pub rho: f64,
    pub step_residual: f64,
}

impl Fa3rStep {
    pub fn triple(&self) -> [Vec3; 3] {
        [self.h_x, self.h_y, self.h_z]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fa3rTrace {
    pub mode: Fa3rMode,
    /// The covariance was divided by this before iterating.
    pub prescale: f64,
    /// Triple at iteration index `k = 1`, after prescaling.
    pub initial: [Vec3; 3],
    /// `steps[i]` is the triple at iteration index `k = i + 2`.
    pub steps: Vec<Fa3rStep>,
    pub iterations_used: usize,
    pub converged: bool,
    /// Numerical rank of `D` (1, 2 or 3), estimated before iterating.
    pub rank_estimate: u8,
}

impl Fa3rTrace {
    /// The current triple (the initial one if no step was taken).
    pub fn final_triple(&self) -> [Vec3; 3] {
        self.steps.last().map_or(self.initial, Fa3rStep::triple)
    }

    pub fn final_residual(&self) -> f64 {
        self.steps.last().map_or(f64::INFINITY, |s| s.step_residual)
    }

    /// Iteration index `k` of the final triple (the initial triple is `k = 1`).
    pub fn final_index(&self) -> usize {
        self.iterations_used + 1
    }

    /// Triple at iteration index `k >= 1`.
    pub fn triple_at(&self, k: usize) -> Option<[Vec3; 3]> {
        match k {
            0 => None,
            1 => Some(self.initial),
            _ => self.steps.get(k - 2).map(Fa3rStep::triple),
        }
    }

    /// `ρ` evaluated on the final triple; `1/2` at the fixed point.
    pub fn final_rho(&self) -> f64 {
        rho(&self.final_triple())
    }

    /// The optimal rotation is not unique when `rank(D) < 2`; rank 2 is
    /// flagged as well since it sits on that boundary.
    pub fn degenerate_rank(&self) -> bool {
        self.rank_estimate < 3
    }

    /// Final triple arranged as a matrix with the rotation's layout (rows for
    /// the row variant, columns for the column variant).
    pub fn final_matrix(&self) -> Mat3 {
        let [a, b, c] = self.final_triple();
        match self.mode {
            Fa3rMode::RowVariant => Mat3::from_rows(a, b, c),
            Fa3rMode::ColumnVariant => Mat3::from_cols(a, b, c),
        }
    }
}

/// Divisor applied to `D` before iterating: the largest entry magnitude, or
/// `|D|_F / √3` when that is larger.
///
/// The iteration is a power method on `W + I`, so the `+ I` shift is only
/// harmless relative to a bounded `W`. With `|D̂|_F ≤ √3` every singular value
/// of `D̂` except a lone largest one stays below 1, which keeps `λ_max + 1` the
/// dominant eigenvalue of `Ŵ + I` even when `det D < 0`.
pub fn prescale_factor(d: &Mat3) -> f64 {
    d.max_abs().max(d.frobenius_norm() / 3.0_f64.sqrt())
}

#[inline]
fn rho(t: &[Vec3; 3]) -> f64 {
    2.0 / (t[0].norm_squared() + t[1].norm_squared() + t[2].norm_squared() + 1.0)
}

/// One step, arithmetic in the order add-then-scale.
#[inline]
pub fn fa3r_step(t: &[Vec3; 3]) -> ([Vec3; 3], f64) {
    let [hx, hy, hz] = *t;
    let r = rho(t);
    let nx = (hx + hy.cross(hz)) * r;
    let ny = (hy + hz.cross(hx)) * r;
    let nz = (hz + hx.cross(hy)) * r;
    ([nx, ny, nz], r)
}

fn rank_estimate(t: &[Vec3; 3]) -> u8 {
    let [a, b, c] = *t;
    let fro2 = a.norm_squared() + b.norm_squared() + c.norm_squared();
    // Sum of squared 2×2 minors = σ1²σ2² + σ1²σ3² + σ2²σ3².
    let minors2 = a.cross(b).norm_squared() + b.cross(c).norm_squared() + c.cross(a).norm_squared();
    let det = a.dot(b.cross(c)).abs();
    if minors2.sqrt() <= RANK_RATIO * fro2 {
        1
    } else if det <= RANK_RATIO * minors2.sqrt() * fro2.sqrt() {
        2
    } else {
        3
    }
}

fn initial_triple(cov: &CrossCovariance, mode: Fa3rMode) -> Result<([Vec3; 3], f64)> {
    let d = &cov.d;
    if !d.is_finite() {
        return Err(Error::DegenerateInput);
    }
    let scale = prescale_factor(d);
    if !(scale > 1e-300) {
        return Err(Error::DegenerateInput);
    }
    let s = 1.0 / scale;
    let t = match mode {
        Fa3rMode::RowVariant => [d.col(0) * s, d.col(1) * s, d.col(2) * s],
        Fa3rMode::ColumnVariant => [d.row(0) * s, d.row(1) * s, d.row(2) * s],
    };
    Ok((t, scale))
}

/// Runs the iteration on the columns (row variant) or rows (column variant)
/// of `D`. A run that hits `max_iterations` is returned inside
/// [`Error::NotConverged`] with its trace.
pub fn fa3r_iterate(cov: &CrossCovariance, cfg: &Fa3rConfig) -> Result<Fa3rTrace> {
    cfg.validate()?;
    let (initial, prescale) = initial_triple(cov, cfg.mode)?;
    let mut trace = Fa3rTrace {
        mode: cfg.mode,
        prescale,
        initial,
        steps: Vec::with_capacity(16),
        iterations_used: 0,
        converged: false,
        rank_estimate: rank_estimate(&initial),
    };
    let mut current = initial;
    while trace.iterations_used < cfg.max_iterations {
        let (next, r) = fa3r_step(&current);
        let step_residual = (0..3).map(|i| (next[i] - current[i]).norm_squared()).sum::<f64>();
        trace.steps.push(Fa3rStep { h_x: next[0], h_y: next[1], h_z: next[2], rho: r, step_residual });
        trace.iterations_used += 1;
        current = next;
        if step_residual < cfg.epsilon {
            trace.converged = true;
            return Ok(trace);
        }
        if !step_residual.is_finite() {
            break;
        }
    }
    Err(Error::NotConverged(Box::new(trace)))
}

/// Same recursion on the rows of `D`.
pub fn fa3r_iterate_columns(cov: &CrossCovariance, cfg: &Fa3rConfig) -> Result<Fa3rTrace> {
    fa3r_iterate(cov, &Fa3rConfig { mode: Fa3rMode::ColumnVariant, ..*cfg })
}

/// The optimal rotation read directly off the converged triple.
pub fn rotation_from_trace(trace: &Fa3rTrace) -> Result<Mat3> {
    let c = trace.final_matrix();
    let residual = c.orthonormality_residual();
    if !trace.converged || !(residual <= ORTHONORMAL_TOLERANCE) || !((c.det() - 1.0).abs() <= ORTHONORMAL_TOLERANCE) {
        return Err(Error::NotOrthonormal { residual });
    }
    Ok(c)
}

/// Quaternion of the converged triple: the normalized first column of
/// `W∞ + I`, i.e. `(1 + tr A, A32 - A23, A13 - A31, A21 - A12)` for the
/// converged matrix `A`.
///
/// This stays valid when `rank(D) = 1`: the triple then converges to a
/// rank-one matrix rather than a rotation, `W∞ + I` is twice the projector on
/// the optimal quaternion subspace, and the result is the optimal quaternion
/// closest to the identity.
pub fn quaternion_from_trace(trace: &Fa3rTrace) -> Result<QuatScalarFirst> {
    let a = trace.final_matrix();
    let m = &a.m;
    let numerator = QuatScalarFirst::new(1.0 + a.trace(), m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]);
    let n = numerator.norm();
    if n.is_finite() && n > 1e-8 {
        return Ok(numerator.normalized().canonical());
    }
    // Rotation by π: the column above vanishes.
    match rotation_from_trace(trace) {
        Ok(c) => Ok(rotation_to_quat_unchecked(&c)),
        Err(_) => Err(Error::ZeroNorm),
    }
}

/// Iterates and extracts the rotation. Falls back to the quaternion route
/// when the triple does not converge to an orthonormal set (rank one).
pub fn fa3r_solve(cov: &CrossCovariance, cfg: &Fa3rConfig) -> Result<RotationEstimate> {
    let trace = fa3r_iterate(cov, cfg)?;
    let quaternion = quaternion_from_trace(&trace)?;
    let rotation = match rotation_from_trace(&trace) {
        Ok(c) => c,
        Err(_) => quat_to_rotation_unchecked(quaternion),
    };
    Ok(RotationEstimate {
        rotation,
        quaternion,
        iterations: trace.iterations_used,
        degenerate: trace.degenerate_rank(),
        trace: Some(trace),
    })
}

/// End-to-end registration: covariance, iteration, `T = b̄ - C r̄`.
pub fn fa3r_register(pairs: &PointPairSet, cfg: &Fa3rConfig) -> Result<SolverReport> {
    if pairs.len() < 3 {
        return Err(Error::TooFewPoints { n: pairs.len() });
    }
    let start = Instant::now();
    let cov = cross_covariance(pairs)?;
    let covariance_time = start.elapsed();
    let start = Instant::now();
    let estimate = fa3r_solve(&cov, cfg)?;
    let wall_time = start.elapsed();
    Ok(SolverReport::assemble(SolverKind::Fa3r, &cov, estimate, wall_time, covariance_time))
}
