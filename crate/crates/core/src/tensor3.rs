//! Small fixed-size 3-vector and 3×3-matrix algebra.
//!
//! Only what the constitutive laws and the particle-grid transfers need:
//! products, determinant, trace, deviator, and a rotation-variant SVD with
//! the matching polar rotation.

use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub const fn splat(v: f64) -> Self {
        Vec3 { x: v, y: v, z: v }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Vec3 {
        Vec3::new(f(self.x), f(self.y), f(self.z))
    }

    pub fn component_mul(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn sum(self) -> f64 {
        self.x + self.y + self.z
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl MulAssign<f64> for Vec3 {
    fn mul_assign(&mut self, s: f64) {
        *self = *self * s;
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const ZERO: Mat3 = Mat3 { m: [[0.0; 3]; 3] };
    pub const IDENTITY: Mat3 = Mat3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const fn from_rows(m: [[f64; 3]; 3]) -> Self {
        Mat3 { m }
    }

    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Mat3::from_rows([[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]])
    }

    pub fn from_diagonal(d: Vec3) -> Self {
        Mat3::from_rows([[d.x, 0.0, 0.0], [0.0, d.y, 0.0], [0.0, 0.0, d.z]])
    }

    pub fn scaled_identity(s: f64) -> Self {
        Mat3::from_diagonal(Vec3::splat(s))
    }

    /// `a · bᵀ`
    pub fn outer(a: Vec3, b: Vec3) -> Self {
        let mut r = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = a[i] * b[j];
            }
        }
        r
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::from(self.m[i])
    }

    pub fn set_col(&mut self, j: usize, c: Vec3) {
        self.m[0][j] = c.x;
        self.m[1][j] = c.y;
        self.m[2][j] = c.z;
    }

    pub fn diagonal(&self) -> Vec3 {
        Vec3::new(self.m[0][0], self.m[1][1], self.m[2][2])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.m;
        Mat3::from_rows([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    /// Traceless part `m − (tr m / 3) I`.
    pub fn deviator(&self) -> Mat3 {
        *self - Mat3::scaled_identity(self.trace() / 3.0)
    }

    /// Frobenius inner product `Σ aᵢⱼ bᵢⱼ`.
    pub fn ddot(&self, o: &Mat3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.m[i][j] * o.m[i][j];
            }
        }
        s
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }
}

pub fn det3(m: &Mat3) -> f64 {
    m.det()
}

pub fn trace3(m: &Mat3) -> f64 {
    m.trace()
}

pub fn deviator(m: &Mat3) -> Mat3 {
    m.deviator()
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut r = self;
        r += o;
        r
    }
}

impl AddAssign for Mat3 {
    fn add_assign(&mut self, o: Mat3) {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] += o.m[i][j];
            }
        }
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        self + (-o)
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self * -1.0
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        let mut r = self;
        r.m.iter_mut().flatten().for_each(|v| *v *= s);
        r
    }
}

impl Mul<Mat3> for f64 {
    type Output = Mat3;
    fn mul(self, m: Mat3) -> Mat3 {
        m * self
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut r = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j] + self.m[i][2] * o.m[2][j];
            }
        }
        r
    }
}

/// Singular value decomposition `M = U · diag(sigma) · Vᵀ` with `U, V ∈ SO(3)`.
///
/// A reflection in the input shows up as a negative `sigma[2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Svd3 {
    pub u: Mat3,
    pub sigma: Vec3,
    pub v: Mat3,
}

impl Svd3 {
    pub fn reconstruct(&self) -> Mat3 {
        self.u * Mat3::from_diagonal(self.sigma) * self.v.transpose()
    }

    /// `U Vᵀ`
    pub fn rotation(&self) -> Mat3 {
        self.u * self.v.transpose()
    }
}

const JACOBI_MAX_SWEEPS: usize = 32;

/// Cyclic Jacobi eigen-solve of a symmetric matrix. Returns the eigenvalues
/// and the eigenvector matrix (eigenvectors as columns), in the order the
/// rotations leave them.
fn symmetric_eigen(a: &Mat3) -> (Vec3, Mat3) {
    let mut a = *a;
    let mut v = Mat3::IDENTITY;
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return (Vec3::ZERO, v);
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = a.m[0][1].powi(2) + a.m[0][2].powi(2) + a.m[1][2].powi(2);
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a.m[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (a.m[q][q] - a.m[p][p]) / (2.0 * apq);
            let t = if theta.abs() < 1e150 {
                theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
            } else {
                0.5 / theta
            };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // a ← Jᵀ a J and v ← v J for the plane rotation J in (p, q).
            let r = 3 - p - q;
            let (arp, arq) = (a.m[r][p], a.m[r][q]);
            a.m[p][p] -= t * apq;
            a.m[q][q] += t * apq;
            a.m[p][q] = 0.0;
            a.m[q][p] = 0.0;
            a.m[r][p] = c * arp - s * arq;
            a.m[p][r] = a.m[r][p];
            a.m[r][q] = s * arp + c * arq;
            a.m[q][r] = a.m[r][q];
            for row in &mut v.m {
                let (vp, vq) = (row[p], row[q]);
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    (a.diagonal(), v)
}

/// Any unit vector perpendicular to the unit vector `n`.
fn perpendicular(n: Vec3) -> Vec3 {
    let axis = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vec3::new(1.0, 0.0, 0.0)
    } else if n.y.abs() <= n.z.abs() {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let p = n.cross(axis);
    p / p.norm()
}

/// Rotation-variant SVD of a 3×3 matrix.
///
/// Right singular vectors come from a Jacobi eigen-solve of `MᵀM`; the left
/// basis is recovered by Gram–Schmidt on the columns of `M V`, which keeps
/// the small singular values accurate without squaring them. Columns are
/// ordered by descending singular value; ties keep the eigen-solver order.
pub fn svd3(m: &Mat3) -> Svd3 {
    let (_, v_raw) = symmetric_eigen(&(m.transpose() * *m));
    let b_raw = *m * v_raw;

    let norms = [0, 1, 2].map(|j| b_raw.col(j).norm_squared());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut v = Mat3::ZERO;
    let mut b = Mat3::ZERO;
    for (dst, &src) in order.iter().enumerate() {
        v.set_col(dst, v_raw.col(src));
        b.set_col(dst, b_raw.col(src));
    }
    if v.det() < 0.0 {
        v.set_col(2, -v.col(2));
        b.set_col(2, -b.col(2));
    }

    let tiny = f64::MIN_POSITIVE.sqrt();
    let b0 = b.col(0);
    let s0 = b0.norm();
    let u0 = if s0 > tiny { b0 / s0 } else { v.col(0) };
    let b1 = b.col(1);
    let r1 = b1 - u0 * u0.dot(b1);
    let s1 = r1.norm();
    let u1 = if s1 > tiny * (1.0 + s0) { r1 / s1 } else { perpendicular(u0) };
    let u2 = u0.cross(u1);
    let mut s2 = u2.dot(b.col(2));
    if s2.abs() > s1 {
        s2 = s1.copysign(s2);
    }

    Svd3 {
        u: Mat3::from_cols(u0, u1, u2),
        sigma: Vec3::new(s0, s1, s2),
        v,
    }
}

/// Rotation factor `R = U Vᵀ` of the polar decomposition `F = R S`.
pub fn polar_rotation(f: &Mat3) -> Result<Mat3, DomainError> {
    let j = f.det();
    if !(j > 0.0) {
        return Err(DomainError::InvertedElement { det: j });
    }
    Ok(svd3(f).rotation())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn rot_z(theta: f64) -> Mat3 {
        let (s, c) = theta.sin_cos();
        Mat3::from_rows([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    #[test]
    fn identity_svd_is_exact() {
        let s = svd3(&Mat3::IDENTITY);
        assert_eq!(s.u, Mat3::IDENTITY);
        assert_eq!(s.v, Mat3::IDENTITY);
        assert_eq!(s.sigma, Vec3::splat(1.0));
    }

    #[test]
    fn diagonal_svd_is_exact() {
        let s = svd3(&Mat3::from_diagonal(Vec3::new(3.0, 2.0, 1.0)));
        assert_eq!(s.u, Mat3::IDENTITY);
        assert_eq!(s.v, Mat3::IDENTITY);
        assert_eq!(s.sigma, Vec3::new(3.0, 2.0, 1.0));
    }

    #[test]
    fn unsorted_diagonal_is_sorted() {
        let s = svd3(&Mat3::from_diagonal(Vec3::new(1.0, 3.0, 2.0)));
        assert_eq!(s.sigma, Vec3::new(3.0, 2.0, 1.0));
        assert!((s.reconstruct() - Mat3::from_diagonal(Vec3::new(1.0, 3.0, 2.0))).frobenius_norm() < 1e-14);
        assert!((s.u.det() - 1.0).abs() < 1e-14);
        assert!((s.v.det() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reflection_goes_to_last_singular_value() {
        let m = Mat3::from_diagonal(Vec3::new(-2.0, 1.0, 0.5));
        let s = svd3(&m);
        assert!((s.sigma.x - 2.0).abs() < 1e-14);
        assert!((s.sigma.y - 1.0).abs() < 1e-14);
        assert!((s.sigma.z + 0.5).abs() < 1e-14);
        assert!((s.reconstruct() - m).frobenius_norm() < 1e-13);
    }

    #[test]
    fn zero_and_rank_one_inputs() {
        let s = svd3(&Mat3::ZERO);
        assert_eq!(s.sigma, Vec3::ZERO);
        assert!((s.u.det() - 1.0).abs() < 1e-14);

        let m = Mat3::outer(Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.5, 2.0));
        let s = svd3(&m);
        assert!((s.reconstruct() - m).frobenius_norm() < 1e-12 * m.frobenius_norm());
        assert!(s.sigma.y.abs() < 1e-7 && s.sigma.z.abs() < 1e-7);
        assert!(((s.u.transpose() * s.u) - Mat3::IDENTITY).frobenius_norm() < 1e-12);
    }

    #[test]
    fn polar_of_rotation_is_itself() {
        let r = rot_z(0.7) * Mat3::from_rows([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]);
        assert!((polar_rotation(&r).unwrap() - r).frobenius_norm() < 1e-12);
        assert!((polar_rotation(&Mat3::IDENTITY).unwrap() - Mat3::IDENTITY).frobenius_norm() < 1e-15);
    }

    #[test]
    fn polar_rejects_inverted() {
        let f = Mat3::from_diagonal(Vec3::new(1.0, 1.0, -1.0));
        assert!(matches!(polar_rotation(&f), Err(DomainError::InvertedElement { .. })));
        assert!(polar_rotation(&Mat3::ZERO).is_err());
    }

    #[test]
    fn scalar_helpers() {
        assert_eq!(det3(&Mat3::IDENTITY), 1.0);
        assert_eq!(trace3(&Mat3::from_diagonal(Vec3::new(1.0, 2.0, 3.0))), 6.0);
        assert_eq!(deviator(&Mat3::scaled_identity(4.2)).frobenius_norm(), 0.0);
        let m = Mat3::from_rows([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 10.0]]);
        assert!(deviator(&m).trace().abs() < 1e-12);
    }
}
