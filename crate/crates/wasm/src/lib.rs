//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes plain numbers or text and returns a JSON string. The
//! report builders behind them are ordinary functions so they can be tested
//! natively.

use far3_core::geom::geodesic_angle;
use far3_core::synth::noise_sigma_for_snr;
use far3_core::{
    cross_covariance, fa3r_iterate, generate, metric_error, register, rotation_from_trace, solve_covariance,
    CrossCovariance, Error, Fa3rConfig, Fa3rTrace, Mat3, SolverKind, SolverOptions, SynthSpec,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_TRIALS: usize = 2000;
const MAX_POINTS: usize = 200_000;

#[derive(Debug, Clone, Serialize)]
pub struct StepView {
    pub k: usize,
    pub h_x: [f64; 3],
    pub h_y: [f64; 3],
    pub h_z: [f64; 3],
    /// `None` for the initial triple.
    pub rho: Option<f64>,
    pub step_residual: Option<f64>,
    /// Largest entry of `H Hᵀ - I` for the triple as a matrix.
    pub orthonormality: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceReport {
    pub prescale: f64,
    pub rank: u8,
    pub converged: bool,
    pub iterations: usize,
    pub steps: Vec<StepView>,
    pub rotation: Option<[[f64; 3]; 3]>,
    pub svd_rotation: [[f64; 3]; 3],
    /// Angle between the FA3R and SVD rotations, radians.
    pub angle_to_svd: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverRow {
    pub solver: String,
    pub rotation_error: f64,
    pub translation_error: f64,
    pub metric_error: f64,
    pub iterations: usize,
    pub time_us: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub snr: f64,
    pub sigma: f64,
    pub n_points: usize,
    pub true_euler: [f64; 3],
    pub true_translation: [f64; 3],
    pub rows: Vec<SolverRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SnrSeries {
    pub snr: f64,
    /// `histogram[i]` counts trials that stopped after `i` iterations.
    pub histogram: Vec<usize>,
    /// Per-trial step residuals, `residuals[t][i]` at `k = i + 2`.
    pub residuals: Vec<Vec<f64>>,
    pub not_converged: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub epsilon: f64,
    pub series: Vec<SnrSeries>,
}

pub fn parse_numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("'{t}' is not a finite number")),
        })
        .collect()
}

fn iteration_config(epsilon: f64, max_iterations: usize) -> Result<Fa3rConfig, String> {
    let cfg = Fa3rConfig { epsilon, max_iterations, ..Fa3rConfig::default() };
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// Runs the iteration even past the cap, keeping what it produced.
fn iterate_keep(cov: &CrossCovariance, cfg: &Fa3rConfig) -> Result<Fa3rTrace, String> {
    match fa3r_iterate(cov, cfg) {
        Ok(t) => Ok(t),
        Err(Error::NotConverged(t)) => Ok(*t),
        Err(e) => Err(e.to_string()),
    }
}

fn orthonormality(m: &Mat3) -> f64 {
    (*m * m.transpose()).max_abs_diff(&Mat3::IDENTITY)
}

pub fn trace_report(d: &[f64], epsilon: f64, max_iterations: usize) -> Result<TraceReport, String> {
    let d: &[f64; 9] = d.try_into().map_err(|_| format!("D needs 9 values, got {}", d.len()))?;
    let cfg = iteration_config(epsilon, max_iterations)?;
    let cov = CrossCovariance::from_matrix(Mat3::from_row_slice(d));
    let trace = iterate_keep(&cov, &cfg)?;
    let svd = solve_covariance(SolverKind::Svd, &cov, &SolverOptions::default()).map_err(|e| e.to_string())?;

    let steps = (1..=trace.final_index())
        .map(|k| {
            let [a, b, c] = trace.triple_at(k).expect("k within trace");
            let step = k.checked_sub(2).map(|i| &trace.steps[i]);
            StepView {
                k,
                h_x: a.to_array(),
                h_y: b.to_array(),
                h_z: c.to_array(),
                rho: step.map(|s| s.rho),
                step_residual: step.map(|s| s.step_residual),
                orthonormality: orthonormality(&Mat3::from_rows(a, b, c)),
            }
        })
        .collect();
    let rotation = if trace.converged { rotation_from_trace(&trace).ok() } else { None };
    Ok(TraceReport {
        prescale: trace.prescale,
        rank: trace.rank_estimate,
        converged: trace.converged,
        iterations: trace.iterations_used,
        steps,
        rotation: rotation.map(|r| r.m),
        svd_rotation: svd.rotation.m,
        angle_to_svd: rotation.and_then(|r| geodesic_angle(&r, &svd.rotation).ok()),
    })
}

pub fn compare_report(snr: f64, n_points: usize, seed: u64) -> Result<CompareReport, String> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err("SNR must be a positive number".into());
    }
    if !(3..=MAX_POINTS).contains(&n_points) {
        return Err(format!("point count must be between 3 and {MAX_POINTS}"));
    }
    let spec = SynthSpec::with_snr(snr, n_points, seed);
    let (pairs, truth) = generate(&spec).map_err(|e| e.to_string())?;
    let opts = SolverOptions::default();
    let mut rows = Vec::new();
    for kind in SolverKind::ALL {
        let report = register(kind, &pairs, &opts).map_err(|e| format!("{kind}: {e}"))?;
        rows.push(SolverRow {
            solver: kind.label().to_string(),
            rotation_error: geodesic_angle(&report.transform.rotation, &truth.rotation).map_err(|e| e.to_string())?,
            translation_error: (report.transform.translation - truth.translation).norm(),
            metric_error: metric_error(&pairs, &report.transform),
            iterations: report.iterations,
            time_us: report.wall_time.as_secs_f64() * 1e6,
            degenerate: report.degenerate,
        });
    }
    Ok(CompareReport {
        snr,
        sigma: noise_sigma_for_snr(snr, spec.point_box),
        n_points,
        true_euler: spec.true_euler,
        true_translation: truth.translation.to_array(),
        rows,
    })
}

pub fn convergence_report(
    snrs: &[f64],
    trials: usize,
    seed: u64,
    epsilon: f64,
    max_iterations: usize,
) -> Result<ConvergenceReport, String> {
    if snrs.is_empty() || snrs.iter().any(|s| !(*s > 0.0)) {
        return Err("give at least one positive SNR".into());
    }
    if !(1..=MAX_TRIALS).contains(&trials) {
        return Err(format!("trials must be between 1 and {MAX_TRIALS}"));
    }
    let cfg = iteration_config(epsilon, max_iterations)?;
    let mut series = Vec::new();
    for (si, &snr) in snrs.iter().enumerate() {
        let mut s = SnrSeries { snr, histogram: vec![0; max_iterations + 1], residuals: Vec::new(), not_converged: 0 };
        for trial in 0..trials {
            let trial_seed = seed.wrapping_add((si as u64) << 32).wrapping_add(trial as u64);
            let (pairs, _) = generate(&SynthSpec::with_snr(snr, 100, trial_seed)).map_err(|e| e.to_string())?;
            let trace = iterate_keep(&cross_covariance(&pairs).map_err(|e| e.to_string())?, &cfg)?;
            s.histogram[trace.iterations_used] += 1;
            s.not_converged += usize::from(!trace.converged);
            s.residuals.push(trace.steps.iter().map(|st| st.step_residual).collect());
        }
        series.push(s);
    }
    Ok(ConvergenceReport { epsilon, series })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// Iteration trace for a covariance given as nine row-major numbers.
#[wasm_bindgen]
pub fn trace(d_text: &str, epsilon: f64, max_iterations: u32) -> Result<String, JsError> {
    to_js(parse_numbers(d_text).and_then(|d| trace_report(&d, epsilon, max_iterations as usize)))
}

/// Every solver on one synthetic point set.
#[wasm_bindgen]
pub fn compare(snr: f64, n_points: u32, seed: u32) -> Result<String, JsError> {
    to_js(compare_report(snr, n_points as usize, seed.into()))
}

#[wasm_bindgen]
pub fn convergence(
    snr_text: &str,
    trials: u32,
    seed: u32,
    epsilon: f64,
    max_iterations: u32,
) -> Result<String, JsError> {
    to_js(
        parse_numbers(snr_text)
            .and_then(|s| convergence_report(&s, trials as usize, seed.into(), epsilon, max_iterations as usize)),
    )
}
