//! Rigid 3D registration by cross-product iteration.
//!
//! Given matched points `b_i ≈ C r_i + T`, the optimal rotation is read off
//! the fixed point of a three-vector recursion on the columns of the
//! cross-covariance, with no SVD or eigen-decomposition. SVD and quaternion
//! eigen baselines, an integer variant and a synthetic-data harness sit
//! alongside.
//!
//! ```
//! use far3_core::{fa3r_register, generate, Fa3rConfig, SynthSpec};
//!
//! let spec = SynthSpec { noise_covariance: [0.0; 3], ..SynthSpec::with_snr(1.0, 100, 1) };
//! let (pairs, truth) = generate(&spec).unwrap();
//! let report = fa3r_register(&pairs, &Fa3rConfig::default()).unwrap();
//! assert!(report.transform.rotation.max_abs_diff(&truth.rotation) < 1e-10);
//! ```

pub mod baselines;
pub mod covariance;
pub mod error;
pub mod fa3r;
pub mod fixed_point;
pub mod geom;
pub mod solver;
pub mod synth;

pub use covariance::{centroids, cross_covariance, h_table, CrossCovariance, HTable, PointPairSet};
pub use error::{Error, Result};
pub use fa3r::{
    fa3r_iterate, fa3r_iterate_columns, fa3r_register, fa3r_solve, quaternion_from_trace, rotation_from_trace,
    Fa3rConfig, Fa3rMode, Fa3rStep, Fa3rTrace,
};
pub use fixed_point::{fixed_iterate, fixed_register, to_fixed, FixedConfig, FixedTrace, FixedVec3};
pub use geom::{
    convert_convention, cross, geodesic_angle, quat_to_rotation, rotation_to_quat, Mat3, Mat4, Mat4Sym,
    QuatScalarFirst, QuatVectorFirst, RigidTransform, Vec3,
};
pub use solver::{
    register, register_covariance, solve_covariance, RotationEstimate, SolverKind, SolverOptions, SolverReport,
};
pub use synth::{
    euler_from_rotation, euler_to_rotation, generate, metric_error, run_case_catalog, snr, EulerAngles, EvalRecord,
    SynthSpec,
};
