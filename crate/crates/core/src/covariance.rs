//! Point-pair sets and the 3×3 statistics every solver starts from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Mat3, Vec3};

/// Matched reference points `r_i` and body points `b_i`, optionally weighted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPairSet {
    reference: Vec<Vec3>,
    body: Vec<Vec3>,
    weights: Option<Vec<f64>>,
}

impl PointPairSet {
    pub fn new(reference: Vec<Vec3>, body: Vec<Vec3>) -> Result<Self> {
        Self::build(reference, body, None)
    }

    pub fn with_weights(reference: Vec<Vec3>, body: Vec<Vec3>, weights: Vec<f64>) -> Result<Self> {
        Self::build(reference, body, Some(weights))
    }

    fn build(reference: Vec<Vec3>, body: Vec<Vec3>, weights: Option<Vec<f64>>) -> Result<Self> {
        if reference.len() != body.len() {
            return Err(Error::LengthMismatch { reference: reference.len(), body: body.len() });
        }
        if let Some(w) = &weights {
            if w.len() != reference.len() {
                return Err(Error::WeightCount { weights: w.len(), points: reference.len() });
            }
            if let Some((index, &value)) = w.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        if let Some(index) = reference.iter().zip(&body).position(|(r, b)| !(r.is_finite() && b.is_finite())) {
            return Err(Error::NonFinitePoint { index });
        }
        Ok(Self { reference, body, weights })
    }

    pub fn len(&self) -> usize {
        self.reference.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reference.is_empty()
    }

    pub fn reference(&self) -> &[Vec3] {
        &self.reference
    }

    pub fn body(&self) -> &[Vec3] {
        &self.body
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        self.reference.iter().copied().zip(self.body.iter().copied())
    }

    /// Swaps the roles of reference and body.
    pub fn swapped(&self) -> PointPairSet {
        Self { reference: self.body.clone(), body: self.reference.clone(), weights: self.weights.clone() }
    }

    /// Weights normalized to sum 1 (uniform `1/n` when absent).
    pub fn normalized_weights(&self) -> Vec<f64> {
        let n = self.len();
        match &self.weights {
            None => vec![1.0 / n as f64; n],
            Some(w) => {
                let total: f64 = w.iter().sum();
                w.iter().map(|v| v / total).collect()
            }
        }
    }
}

/// The matrix `D = Σ a_i (r_i - r̄)(b_i - b̄)ᵀ` and its column triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCovariance {
    pub d: Mat3,
    pub h_x: Vec3,
    pub h_y: Vec3,
    pub h_z: Vec3,
    pub r_mean: Vec3,
    pub b_mean: Vec3,
}

impl CrossCovariance {
    /// Wraps a covariance matrix supplied directly (centroids set to zero).
    pub fn from_matrix(d: Mat3) -> Self {
        Self::from_parts(d, Vec3::ZERO, Vec3::ZERO)
    }

    fn from_parts(d: Mat3, r_mean: Vec3, b_mean: Vec3) -> Self {
        Self { d, h_x: d.col(0), h_y: d.col(1), h_z: d.col(2), r_mean, b_mean }
    }
}

/// Weighted (or uniform) means of the reference and body points.
pub fn centroids(pairs: &PointPairSet) -> Result<(Vec3, Vec3)> {
    if pairs.is_empty() {
        return Err(Error::EmptySet);
    }
    let w = pairs.normalized_weights();
    let mut r_mean = Vec3::ZERO;
    let mut b_mean = Vec3::ZERO;
    for ((r, b), a) in pairs.pairs().zip(&w) {
        r_mean += r * *a;
        b_mean += b * *a;
    }
    Ok((r_mean, b_mean))
}

/// Two-pass cross-covariance: means first, then centered outer products.
pub fn cross_covariance(pairs: &PointPairSet) -> Result<CrossCovariance> {
    let (r_mean, b_mean) = centroids(pairs)?;
    let d = match pairs.weights() {
        None => {
            let mut acc = [[0.0; 3]; 3];
            for (r, b) in pairs.pairs() {
                accumulate_outer(&mut acc, (r - r_mean).to_array(), (b - b_mean).to_array(), 1.0);
            }
            Mat3::new(acc).scale(1.0 / pairs.len() as f64)
        }
        Some(_) => {
            let w = pairs.normalized_weights();
            let mut acc = [[0.0; 3]; 3];
            for ((r, b), a) in pairs.pairs().zip(&w) {
                accumulate_outer(&mut acc, (r - r_mean).to_array(), (b - b_mean).to_array(), *a);
            }
            Mat3::new(acc)
        }
    };
    Ok(CrossCovariance::from_parts(d, r_mean, b_mean))
}

#[inline]
fn accumulate_outer(acc: &mut [[f64; 3]; 3], r: [f64; 3], b: [f64; 3], a: f64) {
    for i in 0..3 {
        let ar = a * r[i];
        for j in 0..3 {
            acc[i][j] += ar * b[j];
        }
    }
}

/// The nine scalars `H_{x1} … H_{z3}`, i.e. the entries of `Bᵀ` with
/// `B = Σ a_i b_i r_iᵀ` (uncentered, weights normalized).
///
/// Row `x` holds `(Σ a r_x b_x, Σ a r_x b_y, Σ a r_x b_z)`, and so on; the
/// vectors `h_x, h_y, h_z` are its columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HTable(pub Mat3);

impl HTable {
    pub fn hx1(&self) -> f64 {
        self.0.m[0][0]
    }
    pub fn hx2(&self) -> f64 {
        self.0.m[0][1]
    }
    pub fn hx3(&self) -> f64 {
        self.0.m[0][2]
    }
    pub fn hy1(&self) -> f64 {
        self.0.m[1][0]
    }
    pub fn hy2(&self) -> f64 {
        self.0.m[1][1]
    }
    pub fn hy3(&self) -> f64 {
        self.0.m[1][2]
    }
    pub fn hz1(&self) -> f64 {
        self.0.m[2][0]
    }
    pub fn hz2(&self) -> f64 {
        self.0.m[2][1]
    }
    pub fn hz3(&self) -> f64 {
        self.0.m[2][2]
    }

    /// `(h_x, h_y, h_z)`: the columns of the table.
    pub fn columns(&self) -> (Vec3, Vec3, Vec3) {
        (self.0.col(0), self.0.col(1), self.0.col(2))
    }

    /// For centered data the table is exactly `D`.
    pub fn from_covariance(cov: &CrossCovariance) -> Self {
        HTable(cov.d)
    }

    /// The table whose columns are the given triple.
    pub fn from_columns(h_x: Vec3, h_y: Vec3, h_z: Vec3) -> Self {
        HTable(Mat3::from_cols(h_x, h_y, h_z))
    }
}

pub fn h_table(pairs: &PointPairSet) -> Result<HTable> {
    if pairs.is_empty() {
        return Err(Error::EmptySet);
    }
    let w = pairs.normalized_weights();
    let mut acc = [[0.0; 3]; 3];
    for ((r, b), a) in pairs.pairs().zip(&w) {
        accumulate_outer(&mut acc, r.to_array(), b.to_array(), *a);
    }
    Ok(HTable(Mat3::new(acc)))
}
