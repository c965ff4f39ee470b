//! Timing harness. Every solver sees the same synthetic input in each trial;
//! only the rotation solve is timed, covariance construction separately.

use std::time::Instant;

use far3_core::{cross_covariance, generate, solve_covariance, SolverKind, SolverOptions, SynthSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub solvers: Vec<SolverKind>,
    pub n_points: usize,
    pub snr: f64,
    pub trials: usize,
    pub warmup: usize,
    pub seed: u64,
    pub options: SolverOptions,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            solvers: vec![SolverKind::Svd, SolverKind::EigW, SolverKind::Fa3r],
            n_points: 10_000,
            snr: 10.0,
            trials: 10_000,
            warmup: 100,
            seed: 1,
            options: SolverOptions::default(),
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CliError::Input("trials must be >= 1".into()));
        }
        if self.solvers.is_empty() {
            return Err(CliError::Input("no solvers selected".into()));
        }
        if !(self.snr > 0.0) {
            return Err(CliError::Input("snr must be > 0".into()));
        }
        if self.n_points < 3 {
            return Err(CliError::Input("n must be >= 3".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    /// A solver label, or `covariance` for the shared construction step.
    pub solver: String,
    pub trials: usize,
    pub total_time_s: f64,
    pub median_per_call_s: f64,
    pub mean_iterations: f64,
    /// Median of per-call time divided by iterations (iterative solvers).
    pub median_per_iteration_s: Option<f64>,
}

struct Sample {
    seconds: f64,
    iterations: usize,
}

fn trial(spec: &BenchSpec, index: usize) -> Result<(f64, Vec<Sample>)> {
    let synth = SynthSpec::with_snr(spec.snr, spec.n_points, spec.seed.wrapping_add(index as u64));
    let (pairs, _) = generate(&synth)?;
    let start = Instant::now();
    let cov = cross_covariance(&pairs)?;
    let cov_time = start.elapsed().as_secs_f64();
    let mut samples = Vec::with_capacity(spec.solvers.len());
    for &kind in &spec.solvers {
        let start = Instant::now();
        let est = solve_covariance(kind, &cov, &spec.options)?;
        let seconds = start.elapsed().as_secs_f64();
        samples.push(Sample { seconds, iterations: est.iterations });
    }
    Ok((cov_time, samples))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One row per solver plus a `covariance` row. Trials run on the current
/// rayon pool; results are gathered in trial order.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    for i in 0..spec.warmup {
        trial(spec, spec.trials + i)?;
    }
    let results: Vec<(f64, Vec<Sample>)> =
        (0..spec.trials).into_par_iter().map(|i| trial(spec, i)).collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let cov: Vec<f64> = results.iter().map(|r| r.0).collect();
    rows.push(BenchRow {
        solver: "covariance".into(),
        trials: spec.trials,
        total_time_s: cov.iter().sum(),
        median_per_call_s: median(cov),
        mean_iterations: 0.0,
        median_per_iteration_s: None,
    });
    for (j, kind) in spec.solvers.iter().enumerate() {
        let times: Vec<f64> = results.iter().map(|r| r.1[j].seconds).collect();
        let iters: Vec<usize> = results.iter().map(|r| r.1[j].iterations).collect();
        let iterative = matches!(kind, SolverKind::Fa3r | SolverKind::Fa3rFixed | SolverKind::Svd);
        let per_iter = iterative
            .then(|| median(results.iter().map(|r| r.1[j].seconds / r.1[j].iterations.max(1) as f64).collect()));
        rows.push(BenchRow {
            solver: kind.label().into(),
            trials: spec.trials,
            total_time_s: times.iter().sum(),
            median_per_call_s: median(times),
            mean_iterations: iters.iter().sum::<usize>() as f64 / iters.len() as f64,
            median_per_iteration_s: per_iter,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n_points: usize,
    pub median_covariance_s: f64,
}

/// Median covariance-construction time per point count. Runs sequentially
/// so the trials do not compete for memory bandwidth.
pub fn covariance_scaling(sizes: &[usize], trials: usize, seed: u64) -> Result<Vec<ScalingRow>> {
    if trials == 0 {
        return Err(CliError::Input("trials must be >= 1".into()));
    }
    sizes
        .iter()
        .map(|&n| {
            let (pairs, _) = generate(&SynthSpec::with_snr(10.0, n, seed))?;
            let times = (0..trials)
                .map(|_| {
                    let start = Instant::now();
                    let cov = cross_covariance(&pairs).map(std::hint::black_box);
                    (start.elapsed().as_secs_f64(), cov)
                })
                .map(|(t, cov)| cov.map(|_| t))
                .collect::<std::result::Result<Vec<f64>, _>>()?;
            Ok(ScalingRow { n_points: n, median_covariance_s: median(times) })
        })
        .collect()
}

/// Coefficient of determination of the least-squares line through the
/// points.
pub fn linear_fit_r2(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoke() {
        let spec = BenchSpec { trials: 1, warmup: 0, n_points: 50, ..BenchSpec::default() };
        let rows = run_bench(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].solver, "covariance");
        assert!(rows.iter().all(|r| r.trials == 1 && r.total_time_s >= 0.0));
        assert!(run_bench(&BenchSpec { trials: 0, ..spec }).is_err());
    }

    #[test]
    fn r2_of_a_line() {
        assert!((linear_fit_r2(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-15);
        assert!(linear_fit_r2(&[1.0, 2.0, 3.0, 4.0], &[1.0, -1.0, 1.0, -1.0]) < 0.5);
    }
}
