//! Quaternion eigen-solvers on `P`, `G`, `K`, `W` and the power-method oracle.

use web_time::Instant;

use serde::{Deserialize, Serialize};

use super::quartic::characteristic_quartic;
use super::structure::{build_g, build_k, build_p, build_w, k_inputs};
use crate::covariance::{cross_covariance, CrossCovariance, HTable, PointPairSet};
use crate::error::{Error, Result};
use crate::fa3r::prescale_factor;
use crate::geom::{quat_to_rotation_unchecked, Mat4, Mat4Sym, QuatScalarFirst};
use crate::solver::{RotationEstimate, SolverKind, SolverReport};

/// Eigenvalues closer than this (after prescaling) count as repeated.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Closed-form roots of a quartic only separate a double root to about
/// `√ε`, so gaps below this are indistinguishable from zero.
pub const ROOT_RESOLUTION: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EigMatrix {
    P,
    G,
    K,
    W,
}

impl EigMatrix {
    pub const ALL: [EigMatrix; 4] = [EigMatrix::P, EigMatrix::G, EigMatrix::K, EigMatrix::W];

    pub fn solver_kind(self) -> SolverKind {
        match self {
            EigMatrix::P => SolverKind::EigP,
            EigMatrix::G => SolverKind::EigG,
            EigMatrix::K => SolverKind::EigK,
            EigMatrix::W => SolverKind::EigW,
        }
    }

    /// Basis vector that encodes the identity rotation in this matrix's
    /// quaternion layout.
    fn identity_index(self) -> usize {
        match self {
            EigMatrix::K => 3,
            _ => 0,
        }
    }

    /// Converts an eigenvector of this matrix into the scalar-first
    /// quaternion of `C` (with `b ≈ C r + T`).
    fn to_rotation_quat(self, v: [f64; 4]) -> QuatScalarFirst {
        let q = match self {
            EigMatrix::P => QuatScalarFirst::from_array(v),
            // G and W are posed on Dᵀ and yield the inverse rotation.
            EigMatrix::G | EigMatrix::W => QuatScalarFirst::from_array(v).conjugate(),
            EigMatrix::K => QuatScalarFirst::new(v[3], v[0], v[1], v[2]).conjugate(),
        };
        q.normalized().canonical()
    }

    pub fn build(self, cov: &CrossCovariance) -> Mat4Sym {
        match self {
            EigMatrix::P => build_p(&cov.d),
            EigMatrix::G => build_g(&cov.d.transpose()),
            EigMatrix::K => {
                let (b, z) = k_inputs(cov);
                build_k(&b, z)
            }
            EigMatrix::W => build_w(&HTable::from_covariance(cov)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnDegenerate {
    /// Report [`Error::DegenerateEigenvalue`].
    #[default]
    Error,
    /// Project the identity quaternion onto the top eigenspace: the optimal
    /// rotation closest to the identity, which is also where the
    /// cross-product iteration lands.
    ProjectIdentity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WSelection {
    /// The largest eigenvalue, which is the optimum for any scaling of `D`.
    #[default]
    Largest,
    /// The root nearest 1. Only meaningful for unit vectors with weights
    /// summing to 1, where `λ_max ≤ 1`.
    ClosestToOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EigOptions {
    pub on_degenerate: OnDegenerate,
    pub w_selection: WSelection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    /// All four eigenvalues, descending.
    pub eigenvalues: [f64; 4],
    /// The selected eigenvalue.
    pub lambda: f64,
    /// Unit eigenvector in the matrix's own layout (vector-first for `K`).
    pub eigenvector: [f64; 4],
    pub matrix: Option<EigMatrix>,
    /// `|M v - λ v|`.
    pub residual: f64,
}

impl EigenResult {
    /// The eigenvector as a scalar-first quaternion of the optimal rotation.
    pub fn chosen_eigenvector(&self) -> QuatScalarFirst {
        match self.matrix {
            Some(m) => m.to_rotation_quat(self.eigenvector),
            None => QuatScalarFirst::from_array(self.eigenvector),
        }
    }
}

fn norm4(v: [f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize4(v: [f64; 4]) -> [f64; 4] {
    let n = norm4(v);
    v.map(|x| x / n)
}

fn residual(m: &Mat4Sym, lambda: f64, v: [f64; 4]) -> f64 {
    let mv = m.mul_vec(v);
    norm4([0, 1, 2, 3].map(|i| mv[i] - lambda * v[i]))
}

fn frobenius(m: &Mat4) -> f64 {
    m.m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

fn det3(a: [[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Adjugate of a 4×4, as columns.
fn adjugate_columns(a: &Mat4) -> [[f64; 4]; 4] {
    let mut cols = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut minor = [[0.0; 3]; 3];
            for (r, ri) in (0..4).filter(|&r| r != i).enumerate() {
                for (c, cj) in (0..4).filter(|&c| c != j).enumerate() {
                    minor[r][c] = a.m[ri][cj];
                }
            }
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            // adj[j][i] = cofactor(i, j); column i of adj holds cofactors of row i.
            cols[i][j] = sign * det3(minor);
        }
    }
    cols
}

/// Dominant eigenpair of `M + shift I` by multiply-and-normalize.
/// Eigenvalues are reported for `M` itself (shift removed); the other three
/// come from Hotelling deflation.
pub fn power_method_oracle(m: &Mat4Sym, shift: f64, iters: usize) -> EigenResult {
    let iters = iters.max(1);
    let a0 = *m.shifted(shift).as_mat4();
    let mut a = a0;
    let mut eigenvalues = [0.0; 4];
    let mut first = ([1.0, 0.0, 0.0, 0.0], 0.0);
    for slot in 0..4 {
        let v = dominant(&a, iters);
        let lambda: f64 = (0..4).map(|i| v[i] * a.mul_vec(v)[i]).sum();
        eigenvalues[slot] = lambda - shift;
        if slot == 0 {
            first = (v, lambda - shift);
        }
        for i in 0..4 {
            for j in 0..4 {
                a.m[i][j] -= lambda * v[i] * v[j];
            }
        }
    }
    eigenvalues.sort_by(|x, y| y.total_cmp(x));
    let (eigenvector, lambda) = first;
    EigenResult { eigenvalues, lambda, eigenvector, matrix: None, residual: residual(m, lambda, eigenvector) }
}

fn dominant(a: &Mat4, iters: usize) -> [f64; 4] {
    // Start from the largest column: never orthogonal to the top eigenvector
    // unless the matrix vanishes on it.
    let cols = (0..4).map(|j| [a.m[0][j], a.m[1][j], a.m[2][j], a.m[3][j]]);
    let start = cols.max_by(|x, y| norm4(*x).total_cmp(&norm4(*y))).unwrap();
    if norm4(start) == 0.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let mut v = normalize4(start);
    for _ in 0..iters {
        let w = a.mul_vec(v);
        let n = norm4(w);
        if n == 0.0 {
            break;
        }
        v = w.map(|x| x / n);
    }
    v
}

/// Groups roots lying within `tol` of each other; returns one value per
/// cluster (descending) and the size of the top cluster.
fn cluster_roots(roots: &[f64; 4], tol: f64) -> (Vec<f64>, usize) {
    let mut clusters: Vec<(f64, usize)> = Vec::with_capacity(4);
    for &r in roots {
        match clusters.last_mut() {
            Some((c, k)) if (*c - r).abs() <= tol => {
                *c = (*c * *k as f64 + r) / (*k as f64 + 1.0);
                *k += 1;
            }
            _ => clusters.push((r, 1)),
        }
    }
    let top = clusters[0].1;
    (clusters.into_iter().map(|c| c.0).collect(), top)
}

/// Quartic-path eigen-decomposition: roots in closed form, eigenvector from
/// the adjugate of `M - λ I`.
pub fn eigen_decompose(m: &Mat4Sym, label: Option<EigMatrix>, selection: WSelection) -> EigenResult {
    let eigenvalues = characteristic_quartic(m).real_roots();
    let lambda = match selection {
        WSelection::Largest => eigenvalues[0],
        WSelection::ClosestToOne => {
            *eigenvalues.iter().min_by(|a, b| (*a - 1.0).abs().total_cmp(&(*b - 1.0).abs())).unwrap()
        }
    };
    let shifted = *m.shifted(-lambda).as_mat4();
    let cols = adjugate_columns(&shifted);
    let best = cols.iter().copied().max_by(|x, y| norm4(*x).total_cmp(&norm4(*y))).unwrap();
    let scale = frobenius(m.as_mat4()).max(f64::MIN_POSITIVE);
    let eigenvector = if norm4(best) >= 1e-12 * scale.powi(3) {
        normalize4(best)
    } else {
        // Repeated root: the adjugate collapses. Shifting by |M|_F makes the
        // spectrum non-negative, so the largest root becomes dominant.
        power_method_oracle(m, scale, 200).eigenvector
    };
    EigenResult { eigenvalues, lambda, eigenvector, matrix: label, residual: residual(m, lambda, eigenvector) }
}

/// Optimal rotation from one of the four quaternion matrices.
pub fn eig_solve(cov: &CrossCovariance, which: EigMatrix, opts: &EigOptions) -> Result<RotationEstimate> {
    let d = &cov.d;
    if !d.is_finite() {
        return Err(Error::DegenerateInput);
    }
    let scale = prescale_factor(d);
    if !(scale > 1e-300) {
        return Err(Error::DegenerateInput);
    }
    // Rotation is invariant to scaling D; prescaling makes the gap test absolute.
    let scaled = CrossCovariance::from_matrix(d.scale(1.0 / scale));
    let m = which.build(&scaled);
    let selection = if which == EigMatrix::W { opts.w_selection } else { WSelection::Largest };
    let roots = characteristic_quartic(&m).real_roots();
    let gap = roots[0] - roots[1];
    let degenerate = gap <= DEGENERACY_GAP.max(ROOT_RESOLUTION) && selection == WSelection::Largest;

    let v = if degenerate {
        match opts.on_degenerate {
            OnDegenerate::Error => {
                return Err(Error::DegenerateEigenvalue { lambda: roots[0] * scale, gap: gap * scale })
            }
            OnDegenerate::ProjectIdentity => project_onto_top(&m, &roots, which.identity_index())?,
        }
    } else {
        eigen_decompose(&m, Some(which), selection).eigenvector
    };
    let quaternion = which.to_rotation_quat(v);
    Ok(RotationEstimate {
        rotation: quat_to_rotation_unchecked(quaternion),
        quaternion,
        iterations: 0,
        degenerate: degenerate || roots[1] - roots[2] <= DEGENERACY_GAP.max(ROOT_RESOLUTION),
        trace: None,
    })
}

/// `Π_{μ ≠ λ1} (M - μ I) / (λ1 - μ)` applied to a basis vector, preferring
/// the identity's.
fn project_onto_top(m: &Mat4Sym, roots: &[f64; 4], preferred: usize) -> Result<[f64; 4]> {
    let (clusters, _) = cluster_roots(roots, 1e-6);
    let lambda = clusters[0];
    let a = *m.as_mat4();
    let project = |mut v: [f64; 4]| {
        for &mu in &clusters[1..] {
            let w = a.mul_vec(v);
            v = [0, 1, 2, 3].map(|i| (w[i] - mu * v[i]) / (lambda - mu));
        }
        v
    };
    let mut e = [0.0; 4];
    e[preferred] = 1.0;
    let v = project(e);
    if norm4(v) > 1e-6 {
        return Ok(normalize4(v));
    }
    let best = (0..4)
        .map(|i| {
            let mut e = [0.0; 4];
            e[i] = 1.0;
            project(e)
        })
        .max_by(|x, y| norm4(*x).total_cmp(&norm4(*y)))
        .ok_or(Error::ZeroNorm)?;
    if norm4(best) > 1e-6 {
        Ok(normalize4(best))
    } else {
        Err(Error::ZeroNorm)
    }
}

pub fn eig_register(pairs: &PointPairSet, which: EigMatrix) -> Result<SolverReport> {
    eig_register_with(pairs, which, &EigOptions::default())
}

pub fn eig_register_with(pairs: &PointPairSet, which: EigMatrix, opts: &EigOptions) -> Result<SolverReport> {
    if pairs.len() < 3 {
        return Err(Error::TooFewPoints { n: pairs.len() });
    }
    let start = Instant::now();
    let cov = cross_covariance(pairs)?;
    let covariance_time = start.elapsed();
    let start = Instant::now();
    let estimate = eig_solve(&cov, which, opts)?;
    let wall_time = start.elapsed();
    Ok(SolverReport::assemble(which.solver_kind(), &cov, estimate, wall_time, covariance_time))
}
