//! Characteristic quartic of a symmetric 4×4 and its closed-form roots.

use serde::{Deserialize, Serialize};

use crate::geom::{Mat4, Mat4Sym};

/// Depressed quartic `y⁴ + τ1 y² + τ2 y + τ3 = 0` in `y = λ - shift`.
///
/// `shift = -τ̃1 / 4 = tr(M) / 4`, which is zero for `P`, `G`, `K` and `W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticCoefficients {
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub shift: f64,
}

/// General coefficients `[τ̃1, τ̃2, τ̃3, τ̃4]` of
/// `λ⁴ + τ̃1 λ³ + τ̃2 λ² + τ̃3 λ + τ̃4` by Faddeev–LeVerrier.
pub fn general_coefficients(m: &Mat4Sym) -> [f64; 4] {
    let a = *m.as_mat4();
    let mut mk = Mat4::ZERO;
    let mut c = [0.0; 4];
    let mut prev = 1.0;
    for (k, ck) in c.iter_mut().enumerate() {
        mk = a * mk + Mat4::scalar(prev);
        *ck = -(a * mk).trace() / (k + 1) as f64;
        prev = *ck;
    }
    c
}

pub fn characteristic_quartic(m: &Mat4Sym) -> QuarticCoefficients {
    let [t1, t2, t3, t4] = general_coefficients(m);
    QuarticCoefficients {
        tau1: t2 - 3.0 / 8.0 * t1 * t1,
        tau2: t3 - t1 * t2 / 2.0 + t1 * t1 * t1 / 8.0,
        tau3: t4 - t1 * t3 / 4.0 + t1 * t1 * t2 / 16.0 - 3.0 * t1.powi(4) / 256.0,
        shift: -t1 / 4.0,
    }
}

impl QuarticCoefficients {
    /// Value of the characteristic polynomial at `λ`.
    pub fn eval(&self, lambda: f64) -> f64 {
        let y = lambda - self.shift;
        let y2 = y * y;
        (y2 + self.tau1) * y2 + self.tau2 * y + self.tau3
    }

    fn derivative(&self, lambda: f64) -> f64 {
        let y = lambda - self.shift;
        (4.0 * y * y + 2.0 * self.tau1) * y + self.tau2
    }

    /// The four real roots, descending. Assumes all roots are real, which
    /// holds for symmetric matrices.
    ///
    /// Ferrari: the resolvent cubic `z³ + 2p z² + (p² - 4r) z - q² = 0` has
    /// roots `(y1 + y2)², (y1 + y3)², (y1 + y4)²`, solved trigonometrically,
    /// then each root gets two Newton steps on the quartic itself.
    pub fn real_roots(&self) -> [f64; 4] {
        let (p, q, r) = (self.tau1, self.tau2, self.tau3);
        let z = cubic_real_roots(2.0 * p, p * p - 4.0 * r, -q * q).map(|z| z.max(0.0));
        let s1 = z[0].sqrt();
        let s2 = z[1].sqrt();
        // s1 s2 s3 = -q fixes the sign of the last square root.
        let s3 = if -q < 0.0 { -z[2].sqrt() } else { z[2].sqrt() };
        let mut roots = [0.5 * (s1 + s2 + s3), 0.5 * (s1 - s2 - s3), 0.5 * (-s1 + s2 - s3), 0.5 * (-s1 - s2 + s3)]
            .map(|y| y + self.shift);
        for root in &mut roots {
            for _ in 0..2 {
                let d = self.derivative(*root);
                if d != 0.0 {
                    let step = self.eval(*root) / d;
                    if step.is_finite() {
                        *root -= step;
                    }
                }
            }
        }
        roots.sort_by(|a, b| b.total_cmp(a));
        let spread = roots[0].abs().max(roots[3].abs()).max(f64::MIN_POSITIVE);
        for i in 0..3 {
            if roots[i] - roots[i + 1] <= PAIR_WINDOW * spread {
                let (hi, lo) = self.split_pair(roots[i], roots[i + 1]);
                roots[i] = hi;
                roots[i + 1] = lo;
            }
        }
        roots.sort_by(|a, b| b.total_cmp(a));
        roots
    }

    fn second_derivative(&self, lambda: f64) -> f64 {
        let y = lambda - self.shift;
        12.0 * y * y + 2.0 * self.tau1
    }

    /// Re-resolves two nearly equal roots around the critical point between
    /// them. Near a double root the polynomial is locally a parabola, so this
    /// reaches `√ε` resolution where the resolvent cubic only reaches `ε^¼`.
    fn split_pair(&self, hi: f64, lo: f64) -> (f64, f64) {
        let mut m = 0.5 * (hi + lo);
        for _ in 0..4 {
            let d2 = self.second_derivative(m);
            if d2 == 0.0 {
                return (hi, lo);
            }
            let step = self.derivative(m) / d2;
            if !step.is_finite() {
                return (hi, lo);
            }
            m -= step;
        }
        let d2 = self.second_derivative(m);
        let h2 = -2.0 * self.eval(m) / d2;
        if !h2.is_finite() || !(m <= hi.max(lo) + (hi - lo).abs() && m >= lo.min(hi) - (hi - lo).abs()) {
            return (hi, lo);
        }
        let h = h2.max(0.0).sqrt();
        (m + h, m - h)
    }
}

/// Adjacent roots closer than this (relative to the spectrum) are polished
/// as a pair.
const PAIR_WINDOW: f64 = 1e-3;

/// Roots of `z³ + a z² + b z + c`, assumed all real, descending.
fn cubic_real_roots(a: f64, b: f64, c: f64) -> [f64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let off = -a / 3.0;
    if p >= 0.0 {
        // Only a (near) triple root is real-rooted with p >= 0.
        let t = -q.cbrt();
        return [t + off; 3];
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let tau = 2.0 * std::f64::consts::PI / 3.0;
    let mut r = [m * theta.cos() + off, m * (theta - tau).cos() + off, m * (theta - 2.0 * tau).cos() + off];
    r.sort_by(|x, y| y.total_cmp(x));
    r
}
