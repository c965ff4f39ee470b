//! The four symmetric quaternion matrices and the pieces `W` splits into.

use crate::covariance::{CrossCovariance, HTable};
use crate::geom::{Mat3, Mat4, Mat4Sym, Vec3};

/// `P = [[tr D, dᵀ], [d, D + Dᵀ - tr(D) I]]`, `d = (D23 - D32, D31 - D13, D12 - D21)`.
pub fn build_p(d: &Mat3) -> Mat4Sym {
    let m = &d.m;
    let t = d.trace();
    let dv = [m[1][2] - m[2][1], m[2][0] - m[0][2], m[0][1] - m[1][0]];
    let mut out = [[0.0; 4]; 4];
    out[0][0] = t;
    for i in 0..3 {
        out[0][i + 1] = dv[i];
        for j in i..3 {
            out[i + 1][j + 1] = m[i][j] + m[j][i] - if i == j { t } else { 0.0 };
        }
    }
    Mat4Sym::from_upper(out)
}

/// Horn's matrix on `X = Dᵀ` (body-to-reference cross-covariance).
pub fn build_g(x: &Mat3) -> Mat4Sym {
    let [[xx, xy, xz], [yx, yy, yz], [zx, zy, zz]] = x.m;
    Mat4Sym::from_upper([
        [xx + yy + zz, yz - zy, zx - xz, xy - yx],
        [0.0, xx - yy - zz, xy + yx, xz + zx],
        [0.0, 0.0, -xx + yy - zz, yz + zy],
        [0.0, 0.0, 0.0, -xx - yy + zz],
    ])
}

/// Davenport's matrix `[[B + Bᵀ - tr(B) I, z], [zᵀ, tr B]]`, eigenvector
/// vector-first.
pub fn build_k(b: &Mat3, z: Vec3) -> Mat4Sym {
    let m = &b.m;
    let t = b.trace();
    let mut out = [[0.0; 4]; 4];
    for i in 0..3 {
        for j in i..3 {
            out[i][j] = m[i][j] + m[j][i] - if i == j { t } else { 0.0 };
        }
        out[i][3] = z[i];
    }
    out[3][3] = t;
    Mat4Sym::from_upper(out)
}

/// The FLAE matrix, laid out entry by entry from the `H` table.
pub fn build_w(h: &HTable) -> Mat4Sym {
    let (hx1, hx2, hx3) = (h.hx1(), h.hx2(), h.hx3());
    let (hy1, hy2, hy3) = (h.hy1(), h.hy2(), h.hy3());
    let (hz1, hz2, hz3) = (h.hz1(), h.hz2(), h.hz3());
    Mat4Sym::from_upper([
        [hx1 + hy2 + hz3, -hy3 + hz2, -hz1 + hx3, -hx2 + hy1],
        [0.0, hx1 - hy2 - hz3, hx2 + hy1, hx3 + hz1],
        [0.0, 0.0, hy2 - hx1 - hz3, hy3 + hz2],
        [0.0, 0.0, 0.0, hz3 - hy2 - hx1],
    ])
}

/// `B = Dᵀ` and `z = Σ b × r` recovered from a centered covariance.
pub fn k_inputs(cov: &CrossCovariance) -> (Mat3, Vec3) {
    let m = &cov.d.m;
    (cov.d.transpose(), Vec3::new(m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]))
}

pub fn h1(x: Vec3) -> Mat4Sym {
    let [a, b, c] = x.to_array();
    Mat4Sym::from_upper([[a, 0.0, -c, b], [0.0, a, b, c], [0.0, 0.0, -a, 0.0], [0.0, 0.0, 0.0, -a]])
}

pub fn h2(y: Vec3) -> Mat4Sym {
    let [a, b, c] = y.to_array();
    Mat4Sym::from_upper([[b, c, 0.0, -a], [0.0, -b, a, 0.0], [0.0, 0.0, b, c], [0.0, 0.0, 0.0, -b]])
}

pub fn h3(z: Vec3) -> Mat4Sym {
    let [a, b, c] = z.to_array();
    Mat4Sym::from_upper([[c, -b, a, 0.0], [0.0, -c, 0.0, a], [0.0, 0.0, -c, b], [0.0, 0.0, 0.0, c]])
}

pub fn m_matrix() -> Mat4 {
    Mat4 { m: [[0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]] }
}

pub fn n_matrix() -> Mat4 {
    Mat4 { m: [[0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0], [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]] }
}

/// `H1(h_x) + H2(h_y) + H3(h_z)`.
pub fn w_from_parts(hx: Vec3, hy: Vec3, hz: Vec3) -> Mat4 {
    *h1(hx).as_mat4() + *h2(hy).as_mat4() + *h3(hz).as_mat4()
}

/// `(W + I)²` without squaring:
/// `(κ + 1) I + 2 [H1(h_x + h_y × h_z) + H2(h_y + h_z × h_x) + H3(h_z + h_x × h_y)]`
/// with `κ = |h_x|² + |h_y|² + |h_z|²`.
pub fn w_plus_identity_squared(hx: Vec3, hy: Vec3, hz: Vec3) -> Mat4 {
    let kappa = hx.norm_squared() + hy.norm_squared() + hz.norm_squared();
    Mat4::scalar(kappa + 1.0) + w_from_parts(hx + hy.cross(hz), hy + hz.cross(hx), hz + hx.cross(hy)).scale(2.0)
}
