use far3_core::{
    metric_error, register, register_covariance, CrossCovariance, Mat3, PointPairSet, SolverKind, SolverOptions,
    SolverReport,
};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub solver: SolverKind,
    /// Row-major.
    pub rotation: [[f64; 3]; 3],
    /// Scalar first.
    pub quaternion: [f64; 4],
    pub translation: [f64; 3],
    /// Absent when solving from a bare covariance.
    pub metric_error: Option<f64>,
    pub iterations: usize,
    pub degenerate: bool,
    pub wall_time_s: f64,
    pub covariance_time_s: f64,
}

/// Flat single-row layout for CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRow {
    pub solver: String,
    pub c11: f64,
    pub c12: f64,
    pub c13: f64,
    pub c21: f64,
    pub c22: f64,
    pub c23: f64,
    pub c31: f64,
    pub c32: f64,
    pub c33: f64,
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
    pub metric_error: Option<f64>,
    pub iterations: usize,
    pub degenerate: bool,
    pub wall_time_s: f64,
}

impl SolveOutput {
    fn from_report(report: &SolverReport, metric: Option<f64>) -> Self {
        SolveOutput {
            solver: report.solver,
            rotation: report.transform.rotation.m,
            quaternion: report.quaternion.to_array(),
            translation: report.transform.translation.to_array(),
            metric_error: metric,
            iterations: report.iterations,
            degenerate: report.degenerate,
            wall_time_s: report.wall_time.as_secs_f64(),
            covariance_time_s: report.covariance_time.as_secs_f64(),
        }
    }

    pub fn row(&self) -> SolveRow {
        let [[c11, c12, c13], [c21, c22, c23], [c31, c32, c33]] = self.rotation;
        let [q0, q1, q2, q3] = self.quaternion;
        let [tx, ty, tz] = self.translation;
        SolveRow {
            solver: self.solver.label().to_string(),
            c11,
            c12,
            c13,
            c21,
            c22,
            c23,
            c31,
            c32,
            c33,
            q0,
            q1,
            q2,
            q3,
            tx,
            ty,
            tz,
            metric_error: self.metric_error,
            iterations: self.iterations,
            degenerate: self.degenerate,
            wall_time_s: self.wall_time_s,
        }
    }
}

pub fn solve_pairs(pairs: &PointPairSet, kind: SolverKind, opts: &SolverOptions) -> Result<SolveOutput> {
    let report = register(kind, pairs, opts)?;
    let metric = metric_error(pairs, &report.transform);
    Ok(SolveOutput::from_report(&report, Some(metric)))
}

/// Rotation from a covariance given directly; the translation is zero.
pub fn solve_d_matrix(d: Mat3, kind: SolverKind, opts: &SolverOptions) -> Result<SolveOutput> {
    let report = register_covariance(kind, &CrossCovariance::from_matrix(d), opts, Default::default())?;
    Ok(SolveOutput::from_report(&report, None))
}
