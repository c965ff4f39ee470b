//! Uniform front end over every rotation solver.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::baselines::{eig_solve, svd_solve, EigMatrix, EigOptions};
use crate::covariance::{cross_covariance, CrossCovariance, PointPairSet};
use crate::error::{Error, Result};
use crate::fa3r::{fa3r_solve, Fa3rConfig, Fa3rTrace};
use crate::fixed_point::{fixed_solve, FixedConfig};
use crate::geom::{Mat3, QuatScalarFirst, RigidTransform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "svd")]
    Svd,
    #[serde(rename = "eig-p")]
    EigP,
    #[serde(rename = "eig-g")]
    EigG,
    #[serde(rename = "eig-k")]
    EigK,
    #[serde(rename = "eig-w")]
    EigW,
    #[serde(rename = "fa3r")]
    Fa3r,
    #[serde(rename = "fa3r-fixed")]
    Fa3rFixed,
}

impl SolverKind {
    pub const ALL: [SolverKind; 7] = [
        SolverKind::Svd,
        SolverKind::EigP,
        SolverKind::EigG,
        SolverKind::EigK,
        SolverKind::EigW,
        SolverKind::Fa3r,
        SolverKind::Fa3rFixed,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SolverKind::Svd => "svd",
            SolverKind::EigP => "eig-p",
            SolverKind::EigG => "eig-g",
            SolverKind::EigK => "eig-k",
            SolverKind::EigW => "eig-w",
            SolverKind::Fa3r => "fa3r",
            SolverKind::Fa3rFixed => "fa3r-fixed",
        }
    }

    pub fn eig_matrix(self) -> Option<EigMatrix> {
        match self {
            SolverKind::EigP => Some(EigMatrix::P),
            SolverKind::EigG => Some(EigMatrix::G),
            SolverKind::EigK => Some(EigMatrix::K),
            SolverKind::EigW => Some(EigMatrix::W),
            _ => None,
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown solver '{s}'")))
    }
}

/// Per-solver settings; each solver reads only its own field.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverOptions {
    pub fa3r: Fa3rConfig,
    pub fixed: FixedConfig,
    pub eig: EigOptions,
}

/// Rotation produced from a covariance, before translation recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationEstimate {
    pub rotation: Mat3,
    pub quaternion: QuatScalarFirst,
    /// Iterations (FA3R variants) or Jacobi sweeps (SVD); zero for closed form.
    pub iterations: usize,
    /// The optimum is not unique or sits next to a non-unique one.
    pub degenerate: bool,
    pub trace: Option<Fa3rTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub solver: SolverKind,
    pub transform: RigidTransform,
    pub quaternion: QuatScalarFirst,
    pub iterations: usize,
    pub degenerate: bool,
    /// Time spent in the rotation solver only.
    pub wall_time: Duration,
    pub covariance_time: Duration,
    pub trace: Option<Fa3rTrace>,
}

impl SolverReport {
    /// Attaches `T = b̄ - C r̄` to a rotation estimate.
    pub fn assemble(
        solver: SolverKind,
        cov: &CrossCovariance,
        est: RotationEstimate,
        wall_time: Duration,
        covariance_time: Duration,
    ) -> Self {
        let translation = cov.b_mean - est.rotation * cov.r_mean;
        SolverReport {
            solver,
            transform: RigidTransform::new(est.rotation, translation),
            quaternion: est.quaternion,
            iterations: est.iterations,
            degenerate: est.degenerate,
            wall_time,
            covariance_time,
            trace: est.trace,
        }
    }

    pub fn solver_name(&self) -> &'static str {
        self.solver.label()
    }
}

pub fn solve_covariance(kind: SolverKind, cov: &CrossCovariance, opts: &SolverOptions) -> Result<RotationEstimate> {
    match kind {
        SolverKind::Svd => svd_solve(cov),
        SolverKind::Fa3r => fa3r_solve(cov, &opts.fa3r),
        SolverKind::Fa3rFixed => fixed_solve(cov, &opts.fixed),
        _ => eig_solve(cov, kind.eig_matrix().expect("eigen solver"), &opts.eig),
    }
}

/// Covariance, rotation and translation with the two phases timed apart.
pub fn register(kind: SolverKind, pairs: &PointPairSet, opts: &SolverOptions) -> Result<SolverReport> {
    if pairs.len() < 3 {
        return Err(Error::TooFewPoints { n: pairs.len() });
    }
    let start = Instant::now();
    let cov = cross_covariance(pairs)?;
    let covariance_time = start.elapsed();
    register_covariance(kind, &cov, opts, covariance_time)
}

/// Registration from a precomputed covariance (its centroids supply `T`).
pub fn register_covariance(
    kind: SolverKind,
    cov: &CrossCovariance,
    opts: &SolverOptions,
    covariance_time: Duration,
) -> Result<SolverReport> {
    let start = Instant::now();
    let est = solve_covariance(kind, cov, opts)?;
    let wall_time = start.elapsed();
    Ok(SolverReport::assemble(kind, cov, est, wall_time, covariance_time))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.label().parse::<SolverKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.label()));
        }
        assert!("qr".parse::<SolverKind>().is_err());
    }
}
