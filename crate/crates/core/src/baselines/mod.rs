//! Reference solvers the iteration is compared against.

pub mod eigen;
pub mod quartic;
pub mod structure;
pub mod svd;

pub use eigen::{
    eig_register, eig_register_with, eig_solve, eigen_decompose, power_method_oracle, EigMatrix, EigOptions,
    EigenResult, OnDegenerate, WSelection,
};
pub use quartic::{characteristic_quartic, QuarticCoefficients};
pub use structure::{build_g, build_k, build_p, build_w, h1, h2, h3, m_matrix, n_matrix};
pub use svd::{svd3, svd_register, svd_solve, Svd3};
