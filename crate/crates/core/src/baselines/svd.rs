//! Umeyama-corrected SVD solver on a one-sided Jacobi 3×3 SVD.

use web_time::Instant;

use crate::covariance::{cross_covariance, CrossCovariance, PointPairSet};
use crate::error::{Error, Result};
use crate::geom::{rotation_to_quat_unchecked, Mat3, Vec3};
use crate::solver::{RotationEstimate, SolverKind, SolverReport};

pub const JACOBI_TOLERANCE: f64 = 1e-15;
pub const JACOBI_MAX_SWEEPS: usize = 30;

/// Singular values below this fraction of the largest are treated as zero
/// when completing `U`.
const NULL_RATIO: f64 = 1e-13;

/// `A = U diag(σ) Vᵀ` with `σ` sorted descending and `U`, `V` orthogonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Svd3 {
    pub u: Mat3,
    pub sigma: [f64; 3],
    pub v: Mat3,
    pub sweeps: usize,
}

impl Svd3 {
    pub fn reconstruct(&self) -> Mat3 {
        self.u * Mat3::diag(self.sigma[0], self.sigma[1], self.sigma[2]) * self.v.transpose()
    }
}

/// One-sided (Hestenes) Jacobi: rotate column pairs of `A V` until they are
/// mutually orthogonal.
pub fn svd3(a: &Mat3) -> Result<Svd3> {
    let mut w = [a.col(0), a.col(1), a.col(2)];
    let mut v = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
    let mut sweeps = 0;
    loop {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::SvdNotConverged { sweeps });
        }
        sweeps += 1;
        let mut rotated = false;
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let alpha = w[p].norm_squared();
            let beta = w[q].norm_squared();
            let gamma = w[p].dot(w[q]);
            if gamma == 0.0 || gamma.abs() <= JACOBI_TOLERANCE * (alpha * beta).sqrt() {
                continue;
            }
            rotated = true;
            let zeta = (beta - alpha) / (2.0 * gamma);
            let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = c * t;
            let (wp, wq) = (w[p], w[q]);
            w[p] = wp * c - wq * s;
            w[q] = wp * s + wq * c;
            let (vp, vq) = (v[p], v[q]);
            v[p] = vp * c - vq * s;
            v[q] = vp * s + vq * c;
        }
        if !rotated {
            break;
        }
    }

    let mut order = [0usize, 1, 2];
    let norms = w.map(Vec3::norm);
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma = order.map(|i| norms[i]);
    let vs = order.map(|i| v[i]);
    let ws = order.map(|i| w[i]);

    let floor = NULL_RATIO * sigma[0];
    let mut u = [Vec3::ZERO; 3];
    u[0] = if sigma[0] > 0.0 { ws[0] * (1.0 / sigma[0]) } else { Vec3::new(1.0, 0.0, 0.0) };
    u[1] = if sigma[1] > floor && sigma[1] > 0.0 { ws[1] * (1.0 / sigma[1]) } else { any_orthogonal(u[0]) };
    u[2] = if sigma[2] > floor && sigma[2] > 0.0 { ws[2] * (1.0 / sigma[2]) } else { u[0].cross(u[1]) };

    Ok(Svd3 { u: Mat3::from_cols(u[0], u[1], u[2]), sigma, v: Mat3::from_cols(vs[0], vs[1], vs[2]), sweeps })
}

fn any_orthogonal(a: Vec3) -> Vec3 {
    let e = if a.x.abs() <= a.y.abs() && a.x.abs() <= a.z.abs() {
        Vec3::new(1.0, 0.0, 0.0)
    } else if a.y.abs() <= a.z.abs() {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let o = a.cross(e);
    o * (1.0 / o.norm())
}

/// `C = V diag(1, 1, det(U) det(V)) Uᵀ` for `D = U S Vᵀ`.
pub fn svd_solve(cov: &CrossCovariance) -> Result<RotationEstimate> {
    if !cov.d.is_finite() {
        return Err(Error::DegenerateInput);
    }
    let svd = svd3(&cov.d)?;
    let d = (svd.u.det() * svd.v.det()).signum();
    let rotation = svd.v * Mat3::diag(1.0, 1.0, d) * svd.u.transpose();
    let s = svd.sigma;
    Ok(RotationEstimate {
        quaternion: rotation_to_quat_unchecked(&rotation),
        rotation,
        iterations: svd.sweeps,
        degenerate: !(s[2] > 1e-10 * s[0]),
        trace: None,
    })
}

pub fn svd_register(pairs: &PointPairSet) -> Result<SolverReport> {
    if pairs.len() < 3 {
        return Err(Error::TooFewPoints { n: pairs.len() });
    }
    let start = Instant::now();
    let cov = cross_covariance(pairs)?;
    let covariance_time = start.elapsed();
    let start = Instant::now();
    let estimate = svd_solve(&cov)?;
    let wall_time = start.elapsed();
    Ok(SolverReport::assemble(SolverKind::Svd, &cov, estimate, wall_time, covariance_time))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_and_sorts() {
        let a = Mat3::new([[1.0, 2.0, 3.0], [-4.0, 5.0, 0.5], [0.1, -0.2, 7.0]]);
        let s = svd3(&a).unwrap();
        assert!(s.reconstruct().max_abs_diff(&a) < 1e-13);
        assert!(s.sigma[0] >= s.sigma[1] && s.sigma[1] >= s.sigma[2]);
        assert!(s.u.orthonormality_residual() < 1e-14);
        assert!(s.v.orthonormality_residual() < 1e-14);
    }

    #[test]
    fn completes_u_for_rank_one() {
        let a = Mat3::outer(Vec3::new(1.0, 2.0, 2.0), Vec3::new(0.0, 3.0, 4.0));
        let s = svd3(&a).unwrap();
        assert!((s.sigma[0] - 15.0).abs() < 1e-12);
        assert!(s.u.orthonormality_residual() < 1e-14);
        assert!(s.reconstruct().max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn reflection_branch() {
        // det D < 0: the plain V Uᵀ would be a reflection.
        let cov = CrossCovariance::from_matrix(Mat3::diag(3.0, 2.0, -1.0));
        let est = svd_solve(&cov).unwrap();
        assert!((est.rotation.det() - 1.0).abs() < 1e-14);
        assert!(est.rotation.max_abs_diff(&Mat3::IDENTITY) < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let s = svd3(&Mat3::ZERO).unwrap();
        assert_eq!(s.sigma, [0.0; 3]);
        assert!(s.u.orthonormality_residual() < 1e-15);
    }
}
