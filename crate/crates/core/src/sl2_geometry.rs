//! 2×2 linear algebra over ℝ and ℂ, the sl(2,R) and su(1,1) coordinates,
//! the Minkowski form on sl(2,R), its cones, and Möbius actions.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::TOL;
use crate::error::{Error, Result};

pub type C64 = Complex64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Real 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2R {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2R {
    pub const IDENTITY: Mat2R = Mat2R { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };
    pub const ZERO: Mat2R = Mat2R { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2R { a, b, c, d }
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat2R::new(c, -s, s, c)
    }

    /// Rotation by `turns` full turns, i.e. by `2π·turns` radians.
    pub fn rotation_turns(turns: f64) -> Self {
        Mat2R::rotation(2.0 * PI * turns)
    }

    pub fn diag(l: f64) -> Self {
        Mat2R::new(l, 0.0, 0.0, 1.0 / l)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Self {
        Mat2R::new(self.a, self.c, self.b, self.d)
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat2R::new(s * self.a, s * self.b, s * self.c, s * self.d)
    }

    /// Inverse of a general invertible matrix.
    pub fn inv(&self) -> Self {
        let det = self.det();
        Mat2R::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    /// Adjugate, which equals the inverse for unimodular matrices.
    pub fn inv_unimodular(&self) -> Self {
        Mat2R::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn frobenius(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        let s = self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d;
        let det = self.det();
        let disc = (s * s - 4.0 * det * det).max(0.0);
        ((s + disc.sqrt()) / 2.0).sqrt()
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        (self.det() - 1.0).abs() <= tol
    }

    pub fn check_unimodular(&self) -> Result<()> {
        let det = self.det();
        if (det - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnimodular { det });
        }
        Ok(())
    }

    /// Divide by `√det` (requires `det > 0`).
    pub fn renormalized(&self) -> Self {
        self.scale(1.0 / self.det().sqrt())
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Angle (radians) of the orthogonal factor in the polar decomposition
    /// `A = R_φ S` with `S` symmetric positive definite.
    pub fn polar_angle(&self) -> f64 {
        (self.c - self.b).atan2(self.a + self.d)
    }

    pub fn to_complex(&self) -> Mat2C {
        Mat2C::new(self.a.into(), self.b.into(), self.c.into(), self.d.into())
    }

    pub fn dist(&self, other: &Mat2R) -> f64 {
        (*self - *other).op_norm()
    }

    /// Real logarithm in sl(2,R) when it exists (trace > −2).
    pub fn log(&self) -> Option<AlgebraVector> {
        let id_dist = (*self - Mat2R::IDENTITY).frobenius();
        if id_dist < 0.25 {
            let m = log_series(self.to_complex());
            return Some(AlgebraVector::from_matrix(&m.re()));
        }
        let half = self.trace() / 2.0;
        let m = if half > 1.0 {
            let s = half.acosh();
            (*self - Mat2R::IDENTITY.scale(half)).scale(s / s.sinh())
        } else if half > -1.0 {
            let t = half.acos();
            (*self - Mat2R::IDENTITY.scale(half)).scale(t / t.sin())
        } else {
            return None;
        };
        Some(AlgebraVector::from_matrix(&m))
    }
}

impl Mul for Mat2R {
    type Output = Mat2R;
    fn mul(self, o: Mat2R) -> Mat2R {
        Mat2R::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Add for Mat2R {
    type Output = Mat2R;
    fn add(self, o: Mat2R) -> Mat2R {
        Mat2R::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2R {
    type Output = Mat2R;
    fn sub(self, o: Mat2R) -> Mat2R {
        Mat2R::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Mat2R {
    type Output = Mat2R;
    fn neg(self) -> Mat2R {
        self.scale(-1.0)
    }
}

/// Complex 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2C {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mat2C {
    pub const IDENTITY: Mat2C = Mat2C {
        a: C64 { re: 1.0, im: 0.0 },
        b: C64 { re: 0.0, im: 0.0 },
        c: C64 { re: 0.0, im: 0.0 },
        d: C64 { re: 1.0, im: 0.0 },
    };

    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2C { a, b, c, d }
    }

    pub fn diag(z: C64) -> Self {
        Mat2C::new(z, C64::new(0.0, 0.0), C64::new(0.0, 0.0), 1.0 / z)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2C::new(s * self.a, s * self.b, s * self.c, s * self.d)
    }

    pub fn inv(&self) -> Self {
        let det = self.det();
        Mat2C::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    pub fn inv_unimodular(&self) -> Self {
        Mat2C::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn frobenius(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.norm().max(self.b.norm()).max(self.c.norm()).max(self.d.norm())
    }

    pub fn op_norm(&self) -> f64 {
        let s = self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr();
        let det = self.det().norm();
        let disc = (s * s - 4.0 * det * det).max(0.0);
        ((s + disc.sqrt()) / 2.0).sqrt()
    }

    pub fn re(&self) -> Mat2R {
        Mat2R::new(self.a.re, self.b.re, self.c.re, self.d.re)
    }

    pub fn max_imag(&self) -> f64 {
        self.a.im.abs().max(self.b.im.abs()).max(self.c.im.abs()).max(self.d.im.abs())
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        (self.det() - 1.0).norm() <= tol
    }

    /// Logarithm of a unimodular matrix close to the identity, or along the
    /// principal branch of `acosh(tr/2)` otherwise.
    pub fn log(&self) -> Mat2C {
        if (*self - Mat2C::IDENTITY).frobenius() < 0.25 {
            return log_series(*self);
        }
        let half = self.trace() / 2.0;
        let s = half.acosh();
        let factor = if s.norm() < 1e-8 { C64::new(1.0, 0.0) } else { s / s.sinh() };
        (*self - Mat2C::IDENTITY.scale(half)).scale(factor)
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, o: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

fn log_series(m: Mat2C) -> Mat2C {
    let y = m - Mat2C::IDENTITY;
    let mut term = y;
    let mut acc = y;
    for k in 2..60 {
        term = term * y;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let add = term.scale(C64::new(sign / k as f64, 0.0));
        acc = acc + add;
        if add.frobenius() < 1e-18 * acc.frobenius().max(1e-300) {
            break;
        }
    }
    // project onto the traceless part
    let t = acc.trace() / 2.0;
    acc - Mat2C::IDENTITY.scale(t)
}

/// Exponential of a traceless complex matrix: `cosh(s)·I + sinh(s)/s·X` with
/// `s² = −det X`.
pub fn exp_traceless(x: &Mat2C) -> Mat2C {
    let s2 = -x.det();
    let s = s2.sqrt();
    let (ch, sh_over_s) = if s.norm() < 1e-4 {
        (
            1.0 + s2 / 2.0 + s2 * s2 / 24.0 + s2 * s2 * s2 / 720.0,
            1.0 + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0,
        )
    } else {
        (s.cosh(), s.sinh() / s)
    };
    Mat2C::IDENTITY.scale(ch) + x.scale(sh_over_s)
}

/// Element `{x, y, z}` of sl(2,R), the matrix `[[x, y+z], [y−z, −x]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AlgebraVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl AlgebraVector {
    pub const ZERO: AlgebraVector = AlgebraVector { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        AlgebraVector { x, y, z }
    }

    pub fn to_matrix(&self) -> Mat2R {
        Mat2R::new(self.x, self.y + self.z, self.y - self.z, -self.x)
    }

    /// Coordinates of the traceless part of `m`.
    pub fn from_matrix(m: &Mat2R) -> Self {
        AlgebraVector::new((m.a - m.d) / 2.0, (m.b + m.c) / 2.0, (m.b - m.c) / 2.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        AlgebraVector::new(s * self.x, s * self.y, s * self.z)
    }

    /// Euclidean norm `√(x² + y² + z²)`.
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn exp(&self) -> Mat2R {
        exp_traceless(&self.to_matrix().to_complex()).re()
    }

    /// `Ad(A).v = A v A⁻¹`.
    pub fn ad(&self, a: &Mat2R) -> AlgebraVector {
        let m = *a * self.to_matrix() * a.inv();
        AlgebraVector::from_matrix(&m)
    }

    /// Bracket normalized as half the matrix commutator, the convention in
    /// which `q(v)q(w) = κ(v,w)² + q([v,w])` holds.
    pub fn bracket(&self, w: &AlgebraVector) -> AlgebraVector {
        let (v, w) = (self.to_matrix(), w.to_matrix());
        AlgebraVector::from_matrix(&(v * w - w * v).scale(0.5))
    }
}

impl Add for AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, o: AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, o: AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for AlgebraVector {
    type Output = AlgebraVector;
    fn neg(self) -> AlgebraVector {
        self.scale(-1.0)
    }
}

/// `q(v) = det v = −x² − y² + z²`.
pub fn quad_form(v: &AlgebraVector) -> f64 {
    -v.x * v.x - v.y * v.y + v.z * v.z
}

/// Polar form of `q`.
pub fn kappa(v: &AlgebraVector, w: &AlgebraVector) -> f64 {
    -v.x * w.x - v.y * w.y + v.z * w.z
}

/// `N(v) = √q(v)` on the future cone.
pub fn minkowski_norm(v: &AlgebraVector) -> Result<f64> {
    let q = quad_form(v);
    if q < -TOL.cone || v.z < -TOL.cone {
        return Err(Error::ConeViolation { q, z: v.z });
    }
    Ok(q.max(0.0).sqrt())
}

/// `N` without the cone check, clamping negative `q` to zero.
pub fn minkowski_norm_unchecked(v: &AlgebraVector) -> f64 {
    quad_form(v).max(0.0).sqrt()
}

/// `Ad(A).v`, rejecting non-unimodular `A`.
pub fn ad_action(a: &Mat2R, v: &AlgebraVector) -> Result<AlgebraVector> {
    let det = a.det();
    if (det - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnimodular { det });
    }
    let m = *a * v.to_matrix() * a.inv_unimodular();
    Ok(AlgebraVector::from_matrix(&m))
}

/// `z ≥ (1+δ)√(x²+y²)` up to `1e−12`.
pub fn cone_membership(v: &AlgebraVector, delta: f64) -> bool {
    v.z >= (1.0 + delta) * v.x.hypot(v.y) - TOL.cone
}

/// Largest δ with `v ∈ E⁺_δ` (−1 means `z = 0`, negative values are outside E⁺).
pub fn cone_margin(v: &AlgebraVector) -> f64 {
    let r = v.x.hypot(v.y);
    if r == 0.0 {
        if v.z >= 0.0 {
            f64::INFINITY
        } else {
            -f64::INFINITY
        }
    } else {
        v.z / r - 1.0
    }
}

/// Result of [`commutator_defect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorDefect {
    pub bracket_norm: f64,
    pub bound: f64,
    /// `κ(v,w) − N(v)N(w)`, nonnegative on the cone.
    pub anti_cs_gap: f64,
    /// `q(v)q(w) − κ² − q([v,w])`.
    pub acs_residual: f64,
}

/// Euclidean norm of `[v,w]` together with the bound
/// `2√(κ² − q(v)q(w))·‖v‖²/q(v)`.
pub fn commutator_defect(v: &AlgebraVector, w: &AlgebraVector) -> Result<CommutatorDefect> {
    let nv = minkowski_norm(v)?;
    let nw = minkowski_norm(w)?;
    let qv = quad_form(v);
    let qw = quad_form(w);
    let vn2 = v.norm().powi(2);
    if qv <= TOL.light_cone_ratio * vn2 {
        return Err(Error::ConeViolation { q: qv, z: v.z });
    }
    let k = kappa(v, w);
    let br = v.bracket(w);
    let disc = (k * k - qv * qw).max(0.0);
    Ok(CommutatorDefect {
        bracket_norm: br.norm(),
        bound: 2.0 * disc.sqrt() * vn2 / qv,
        anti_cs_gap: k - nv * nw,
        acs_residual: qv * qw - k * k - quad_form(&br),
    })
}

/// Element `{t, ν}` of su(1,1), the matrix `[[it, ν], [ν̄, −it]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Su11Vector {
    pub t: f64,
    pub nu: C64,
}

impl Su11Vector {
    pub fn new(t: f64, nu: C64) -> Self {
        Su11Vector { t, nu }
    }

    pub fn to_matrix(&self) -> Mat2C {
        Mat2C::new(C64::new(0.0, self.t), self.nu, self.nu.conj(), C64::new(0.0, -self.t))
    }

    /// Projection of a traceless matrix onto su(1,1) coordinates.
    pub fn from_matrix(m: &Mat2C) -> Self {
        Su11Vector::new((m.a.im - m.d.im) / 2.0, (m.b + m.c.conj()) / 2.0)
    }

    /// `q({t,ν}) = t² − |ν|²`.
    pub fn quad_form(&self) -> f64 {
        self.t * self.t - self.nu.norm_sqr()
    }

    pub fn exp(&self) -> Mat2C {
        exp_traceless(&self.to_matrix())
    }

    pub fn norm(&self) -> f64 {
        (self.t * self.t + self.nu.norm_sqr()).sqrt()
    }
}

fn p_matrix() -> Mat2C {
    Mat2C::new(C64::new(-1.0, 0.0), -I, C64::new(-1.0, 0.0), I)
}

fn p_inverse() -> Mat2C {
    Mat2C::new(C64::new(-0.5, 0.0), C64::new(-0.5, 0.0), 0.5 * I, -0.5 * I)
}

/// `A ↦ PAP⁻¹` with `P = [[−1, −i], [−1, i]]`, from SL(2,R) to SU(1,1).
pub fn sl2_to_su11(a: &Mat2R) -> Mat2C {
    p_matrix() * a.to_complex() * p_inverse()
}

/// Inverse of [`sl2_to_su11`] for complex input (SL(2,C) to SL(2,C)).
pub fn su11_to_sl2_complex(m: &Mat2C) -> Mat2C {
    p_inverse() * *m * p_matrix()
}

/// Inverse of [`sl2_to_su11`], keeping real parts.
pub fn su11_to_sl2(m: &Mat2C) -> Mat2R {
    su11_to_sl2_complex(m).re()
}

/// Generic conjugation by `P` for complex matrices.
pub fn to_su11_picture(m: &Mat2C) -> Mat2C {
    p_matrix() * *m * p_inverse()
}

pub fn algebra_to_su11(v: &AlgebraVector) -> Su11Vector {
    Su11Vector::from_matrix(&to_su11_picture(&v.to_matrix().to_complex()))
}

pub fn su11_to_algebra(v: &Su11Vector) -> AlgebraVector {
    AlgebraVector::from_matrix(&su11_to_sl2(&v.to_matrix()))
}

/// `D_z = diag(z, 1/z)`.
pub fn d_z(z: C64) -> Mat2C {
    Mat2C::diag(z)
}

/// `C_z = [[e, −f], [f, e]]` with `e = (z + 1/z)/2`, `f = (z − 1/z)/(2i)`.
pub fn c_z(z: C64) -> Mat2C {
    let e = (z + 1.0 / z) / 2.0;
    let f = (z - 1.0 / z) / (2.0 * I);
    Mat2C::new(e, -f, f, e)
}

/// Point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjPoint {
    Finite(C64),
    Infinity,
}

/// `(am + b)/(cm + d)`; `POLE` when `|cm + d| < 1e−300`.
pub fn moebius_act(m: &Mat2C, w: C64) -> Result<C64> {
    let den = m.c * w + m.d;
    if den.norm() < TOL.pole {
        return Err(Error::Pole { modulus: den.norm() });
    }
    Ok((m.a * w + m.b) / den)
}

/// Projective version of [`moebius_act`] returning the `Infinity` sentinel.
pub fn moebius_act_projective(m: &Mat2C, w: ProjPoint) -> ProjPoint {
    let (num, den) = match w {
        ProjPoint::Finite(w) => (m.a * w + m.b, m.c * w + m.d),
        ProjPoint::Infinity => (m.a, m.c),
    };
    if den.norm() < TOL.pole {
        ProjPoint::Infinity
    } else {
        ProjPoint::Finite(num / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_form_examples() {
        assert_eq!(quad_form(&AlgebraVector::new(0.0, 0.0, 1.0)), 1.0);
        assert_eq!(quad_form(&AlgebraVector::new(1.0, 0.0, 0.0)), -1.0);
        assert_eq!(quad_form(&AlgebraVector::new(3.0, 4.0, 5.0)), 0.0);
    }

    #[test]
    fn norm_examples() {
        assert_eq!(minkowski_norm(&AlgebraVector::new(0.0, 0.0, 2.0)).unwrap(), 2.0);
        assert!((minkowski_norm(&AlgebraVector::new(0.0, 3.0, 5.0)).unwrap() - 4.0).abs() < 1e-15);
        let err = minkowski_norm(&AlgebraVector::new(2.0, 0.0, 1.0)).unwrap_err();
        assert_eq!(err.code(), "CONE_VIOLATION");
    }

    #[test]
    fn quad_form_is_determinant() {
        let v = AlgebraVector::new(0.3, -1.2, 2.5);
        assert!((quad_form(&v) - v.to_matrix().det()).abs() < 1e-14);
    }

    #[test]
    fn rotation_fixes_elliptic_axis() {
        let v = AlgebraVector::new(0.0, 0.0, 1.0);
        let r = Mat2R::rotation(0.3);
        let w = ad_action(&r, &v).unwrap();
        let direct = AlgebraVector::from_matrix(&(r * v.to_matrix() * r.transpose()));
        assert!((w - v).norm() < 1e-15);
        assert!((direct - v).norm() < 1e-15);
    }

    #[test]
    fn ad_rejects_non_unimodular() {
        let e = ad_action(&Mat2R::new(2.0, 0.0, 0.0, 1.0), &AlgebraVector::ZERO).unwrap_err();
        assert_eq!(e.code(), "NOT_UNIMODULAR");
    }

    #[test]
    fn cone_examples() {
        assert!(cone_membership(&AlgebraVector::new(0.0, 0.0, 1.0), 1.0));
        assert!(!cone_membership(&AlgebraVector::new(1.0, 0.0, 1.0), 0.5));
        let v = AlgebraVector::new(0.3, 0.4, 1.0);
        assert!(cone_membership(&v, 0.9));
        assert!(!cone_membership(&v, 1.1));
    }

    #[test]
    fn commutator_examples() {
        let e = AlgebraVector::new(0.0, 0.0, 1.0);
        let d = commutator_defect(&e, &e).unwrap();
        assert_eq!((d.bracket_norm, d.bound), (0.0, 0.0));
        let w = AlgebraVector::new(0.3, 0.0, 1.0);
        let d = commutator_defect(&e, &w).unwrap();
        let (vm, wm) = (e.to_matrix(), w.to_matrix());
        let explicit = AlgebraVector::from_matrix(&(vm * wm - wm * vm)).norm() / 2.0;
        assert!((d.bracket_norm - explicit).abs() < 1e-15);
        assert!((d.bracket_norm - 0.3).abs() < 1e-15);
        assert!(d.bracket_norm <= d.bound + 1e-10);
    }

    #[test]
    fn su11_conversion_examples() {
        let id = sl2_to_su11(&Mat2R::IDENTITY);
        assert!((id - Mat2C::IDENTITY).max_abs() < 1e-15);
        let r = sl2_to_su11(&Mat2R::rotation(0.3));
        assert!((r - d_z(C64::from_polar(1.0, 0.3))).max_abs() < 1e-15);
        assert!((c_z(C64::from_polar(1.0, 0.3)) - Mat2R::rotation(0.3).to_complex()).max_abs() < 1e-15);
    }

    #[test]
    fn c_z_is_conjugate_of_d_z() {
        let z = C64::from_polar(0.7, 1.1);
        let lhs = c_z(z);
        let rhs = su11_to_sl2_complex(&d_z(z));
        assert!((lhs - rhs).max_abs() < 1e-14);
        assert!((lhs.det() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn moebius_examples() {
        let m = C64::new(0.3, -0.7);
        assert_eq!(moebius_act(&Mat2C::IDENTITY, m).unwrap(), m);
        assert_eq!(moebius_act(&d_z(C64::new(0.5, 0.0)), C64::new(0.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
        let sing = Mat2C::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        assert_eq!(moebius_act(&sing, C64::new(0.0, 0.0)).unwrap_err().code(), "POLE");
        assert_eq!(moebius_act_projective(&sing, ProjPoint::Finite(C64::new(0.0, 0.0))), ProjPoint::Infinity);
    }

    #[test]
    fn c_z_preserves_lower_half_plane() {
        // image computed by the Moebius map and by the closed formula for Im m̂
        let z = C64::from_polar(0.8, 0.2);
        let m = C64::new(0.0, -1.0);
        let cz = c_z(z);
        let image = moebius_act(&cz, m).unwrap();
        let e = (z + 1.0 / z) / 2.0;
        let f = (z - 1.0 / z) / (2.0 * I);
        let zz = z.norm_sqr();
        let formula = ((e.norm_sqr() + f.norm_sqr()) * m.im + (1.0 + m.norm_sqr()) * 0.25 * (zz - 1.0 / zz))
            / (f * m + e).norm_sqr();
        assert!(image.im < 0.0);
        assert!((image.im - formula).abs() < 1e-13);
    }

    #[test]
    fn exp_log_round_trip() {
        for v in [AlgebraVector::new(0.1, 0.2, 0.9), AlgebraVector::new(0.5, -0.3, 0.1), AlgebraVector::new(1e-6, 2e-6, 0.0)] {
            let m = v.exp();
            assert!((m.det() - 1.0).abs() < 1e-13);
            let back = m.log().unwrap();
            assert!((back - v).norm() < 1e-12, "{v:?} -> {back:?}");
        }
    }

    #[test]
    fn polar_angle_of_rotation() {
        assert!((Mat2R::rotation(0.7).polar_angle() - 0.7).abs() < 1e-15);
        let m = Mat2R::rotation(-2.0) * Mat2R::new(2.0, 0.3, 0.3, 0.545);
        assert!((m.polar_angle() + 2.0).abs() < 1e-14);
    }
}
