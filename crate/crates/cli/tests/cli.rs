use std::path::Path;
use std::process::{Command, Output};

use far3::bench::BenchRow;
use far3::convergence::ConvergenceRow;
use far3::icp::IcpResult;
use far3::io::{format_cloud, format_point_pairs};
use far3::solve::{SolveOutput, SolveRow};
use far3_core::geom::geodesic_angle;
use far3_core::{generate, SolverKind, SynthSpec};

const D: &str =
    "-0.1493707,0.33704186,-0.26092604,0.15536306,-0.15098108,0.87009800,0.72649274,-0.26632189,-0.91058475";

fn far3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_far3")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows<T: serde::de::DeserializeOwned>(text: &str) -> Vec<T> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().map(Result::unwrap).collect()
}

fn write_pairs(dir: &Path, snr: f64, n: usize, seed: u64) -> (String, SynthSpec) {
    let spec = SynthSpec::with_snr(snr, n, seed);
    let (pairs, _) = generate(&spec).unwrap();
    let path = dir.join(format!("pairs-{seed}.txt"));
    std::fs::write(&path, format_point_pairs(&pairs)).unwrap();
    (path.display().to_string(), spec)
}

#[test]
fn d_matrix_rows_are_the_converged_triple() {
    let out: SolveOutput = serde_json::from_str(&stdout(&far3(&["solve", "--d-matrix", D]))).unwrap();
    assert_eq!(out.solver, SolverKind::Fa3r);
    assert!(out.iterations >= 5 && out.iterations <= 7, "{}", out.iterations);
    assert_eq!(out.translation, [0.0; 3]);
    assert_eq!(out.metric_error, None);
    let svd: SolveOutput =
        serde_json::from_str(&stdout(&far3(&["solve", "--d-matrix", D, "--solver", "svd"]))).unwrap();
    for (a, b) in out.rotation.iter().flatten().zip(svd.rotation.iter().flatten()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn every_solver_recovers_the_file_transform() {
    let dir = tempfile::tempdir().unwrap();
    let (path, spec) = write_pairs(dir.path(), 1000.0, 300, 11);
    let truth = spec.truth();
    for kind in SolverKind::ALL {
        let text = stdout(&far3(&["solve", &path, "--solver", kind.label(), "--format", "csv"]));
        let rows: Vec<SolveRow> = csv_rows(&text);
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        let c = far3_core::Mat3::new([[r.c11, r.c12, r.c13], [r.c21, r.c22, r.c23], [r.c31, r.c32, r.c33]]);
        assert!(geodesic_angle(&c, &truth.rotation).unwrap() < 1e-2, "{kind}");
        let t = far3_core::Vec3::new(r.tx, r.ty, r.tz);
        assert!((t - truth.translation).norm() < 1.0, "{kind}");
        assert!(r.metric_error.unwrap() > 0.0);
    }
}

#[test]
fn json_and_csv_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = write_pairs(dir.path(), 10.0, 100, 12);
    let json: SolveOutput = serde_json::from_str(&stdout(&far3(&["solve", &path]))).unwrap();
    let csv: Vec<SolveRow> = csv_rows(&stdout(&far3(&["solve", &path, "--format", "csv"])));
    let mut from_json = json.row();
    from_json.wall_time_s = csv[0].wall_time_s;
    assert_eq!(from_json, csv[0]);
}

#[test]
fn cases_cover_the_catalog() {
    let text = stdout(&far3(&["cases"]));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[0], "case_id");
    let ids: Vec<usize> = reader.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
    for id in 1..=9 {
        assert!(ids.contains(&id), "case {id} missing");
    }
    let json: serde_json::Value = serde_json::from_str(&stdout(&far3(&["cases", "--format", "json"]))).unwrap();
    assert_eq!(json.as_array().unwrap().len(), ids.len());
}

#[test]
fn convergence_is_seed_deterministic() {
    let args = ["convergence", "--snr", "0.01,100", "--trials", "3", "--seed", "9"];
    let strip = |text: String| -> Vec<(usize, usize, f64, Option<f64>)> {
        csv_rows::<ConvergenceRow>(&text)
            .into_iter()
            .map(|r| (r.trial, r.k, r.ln_metric_error, r.step_residual))
            .collect()
    };
    let a = strip(stdout(&far3(&args)));
    assert_eq!(a, strip(stdout(&far3(&args))));
    assert!(a.iter().any(|r| r.1 == 1 && r.3.is_none()));
    let other = strip(stdout(&far3(&["convergence", "--snr", "0.01,100", "--trials", "3", "--seed", "10"])));
    assert_ne!(a, other);
}

#[test]
fn icp_aligns_a_moved_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec {
        true_euler: [0.05, -0.03, 0.04],
        true_translation: far3_core::Vec3::new(1.0, -2.0, 0.5),
        noise_covariance: [0.0; 3],
        point_box: 10.0,
        ..SynthSpec::with_snr(1.0, 400, 13)
    };
    let (pairs, truth) = generate(&spec).unwrap();
    let src = dir.path().join("src.txt");
    let tgt = dir.path().join("tgt.txt");
    std::fs::write(&src, format_cloud(pairs.reference())).unwrap();
    std::fs::write(&tgt, format_cloud(pairs.body())).unwrap();
    for mode in ["brute-force", "grid-hash"] {
        let out = far3(&["icp", src.to_str().unwrap(), tgt.to_str().unwrap(), "--correspondence", mode]);
        let r: IcpResult = serde_json::from_str(&stdout(&out)).unwrap();
        assert!(geodesic_angle(&r.transform.rotation, &truth.rotation).unwrap() < 1e-6, "{mode}");
        assert!((r.transform.translation - truth.translation).norm() < 1e-6, "{mode}");
        assert_eq!(r.rms.len(), r.iterations);
    }
}

#[test]
fn bench_reports_each_solver_and_covariance() {
    let text = stdout(&far3(&["bench", "--solver", "svd,fa3r", "--n", "200", "--trials", "20", "--warmup", "2"]));
    let rows: Vec<BenchRow> = csv_rows(&text);
    let names: Vec<&str> = rows.iter().map(|r| r.solver.as_str()).collect();
    assert_eq!(names, ["covariance", "svd", "fa3r"]);
    assert!(rows.iter().all(|r| r.trials == 20 && r.median_per_call_s > 0.0));
    assert!(rows[2].mean_iterations >= 2.0);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["solve"],
        vec!["solve", "--d-matrix", "1,2,3"],
        vec!["solve", "--d-matrix", D, "--epsilon", "0"],
        vec!["convergence", "--snr", "-1"],
        vec!["bench", "--trials", "0"],
        vec!["icp", "/nonexistent/a.txt", "/nonexistent/b.txt"],
    ] {
        let out = far3(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = Command::new(env!("CARGO_BIN_EXE_far3")).args(["cases"]).env("FAR3_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
