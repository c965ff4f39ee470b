//! Per-iteration convergence traces of FA3R on synthetic data.

use far3_core::{
    cross_covariance, fa3r_iterate, generate, metric_error, Error, Fa3rConfig, Fa3rTrace, Mat3, PointPairSet,
    RigidTransform, SynthSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub snr: f64,
    pub trial: usize,
    /// Iteration index; `k = 1` is the prescaled input.
    pub k: usize,
    /// `ln L` with the iterate itself (rows `h_x, h_y, h_z`) as the rotation
    /// and the matching translation.
    pub ln_metric_error: f64,
    /// `Σ |Δh|²` of the step that produced this iterate.
    pub step_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSpec {
    pub snrs: Vec<f64>,
    pub config: Fa3rConfig,
    pub seed: u64,
    pub trials: usize,
    pub n_points: usize,
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        ConvergenceSpec {
            snrs: vec![1e-4, 1e-2, 1.0, 100.0],
            config: Fa3rConfig::default(),
            seed: 1,
            trials: 1,
            n_points: 100,
        }
    }
}

/// The trace of one trial, whether or not it converged.
pub fn trial_trace(snr: f64, n_points: usize, seed: u64, cfg: &Fa3rConfig) -> Result<(PointPairSet, Fa3rTrace)> {
    let (pairs, _) = generate(&SynthSpec::with_snr(snr, n_points, seed))?;
    let cov = cross_covariance(&pairs)?;
    let trace = match fa3r_iterate(&cov, cfg) {
        Ok(t) => t,
        Err(Error::NotConverged(t)) => *t,
        Err(e) => return Err(e.into()),
    };
    Ok((pairs, trace))
}

fn seed_for(base: u64, snr_index: usize, trial: usize) -> u64 {
    base.wrapping_add((snr_index as u64) << 32).wrapping_add(trial as u64)
}

pub fn run_convergence(spec: &ConvergenceSpec) -> Result<Vec<ConvergenceRow>> {
    if spec.snrs.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(CliError::Input("snr values must be > 0".into()));
    }
    let mut rows = Vec::new();
    for (si, &snr) in spec.snrs.iter().enumerate() {
        for trial in 0..spec.trials {
            let (pairs, trace) = trial_trace(snr, spec.n_points, seed_for(spec.seed, si, trial), &spec.config)?;
            let (r_mean, b_mean) = far3_core::centroids(&pairs)?;
            for k in 1..=trace.final_index() {
                let [a, b, c] = trace.triple_at(k).expect("k within trace");
                let m = Mat3::from_rows(a, b, c);
                let transform = RigidTransform::new(m, b_mean - m * r_mean);
                rows.push(ConvergenceRow {
                    snr,
                    trial,
                    k,
                    ln_metric_error: metric_error(&pairs, &transform).ln(),
                    step_residual: (k >= 2).then(|| trace.steps[k - 2].step_residual),
                });
            }
        }
    }
    Ok(rows)
}
