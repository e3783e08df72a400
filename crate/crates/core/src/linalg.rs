//! 2×2 complex matrices and the projective line.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Vec2C = [C64; 2];

/// `|det|` at or below this is treated as singular by [`act`].
pub const SINGULAR_DET_TOL: f64 = 1e-14;
/// Directions closer than this in [`proj_distance`] count as equal.
pub const PROJ_EQ_TOL: f64 = 1e-8;

#[inline]
pub(crate) fn cabs(z: C64) -> f64 {
    (z.re * z.re + z.im * z.im).sqrt()
}

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2C {
    pub a11: C64,
    pub a12: C64,
    pub a21: C64,
    pub a22: C64,
}

impl Mat2C {
    pub const IDENTITY: Mat2C =
        Mat2C { a11: C64::new(1.0, 0.0), a12: C64::new(0.0, 0.0), a21: C64::new(0.0, 0.0), a22: C64::new(1.0, 0.0) };

    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Mat2C { a11, a12, a21, a22 }
    }

    pub fn real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2C::new(c(a11, 0.0), c(a12, 0.0), c(a21, 0.0), c(a22, 0.0))
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Mat2C::new(d1, C64::default(), C64::default(), d2)
    }

    pub fn det(&self) -> C64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> C64 {
        self.a11 + self.a22
    }

    /// Maximum row sum of absolute values.
    pub fn norm(&self) -> f64 {
        let r1 = cabs(self.a11) + cabs(self.a12);
        let r2 = cabs(self.a21) + cabs(self.a22);
        r1.max(r2)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral (operator 2-) norm.
    pub fn spectral_norm(&self) -> f64 {
        let f2 = self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>();
        let d = cabs(self.det());
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0).sqrt();
        ((f2 + disc) / 2.0).sqrt()
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2C::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    #[inline]
    pub fn scale_real(&self, s: f64) -> Self {
        Mat2C::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn adjoint(&self) -> Self {
        Mat2C::new(self.a11.conj(), self.a21.conj(), self.a12.conj(), self.a22.conj())
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if cabs(det) == 0.0 || !det.is_finite() {
            return Err(Error::SingularMatrix(cabs(det)));
        }
        let inv = det.inv();
        Ok(Mat2C::new(self.a22 * inv, -self.a12 * inv, -self.a21 * inv, self.a11 * inv))
    }

    pub fn apply(&self, v: Vec2C) -> Vec2C {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    /// Both eigenvalues, the one of larger modulus first.
    pub fn eigenvalues(&self) -> (C64, C64) {
        let half_tr = self.trace() / 2.0;
        let disc = (half_tr * half_tr - self.det()).sqrt();
        let (l1, l2) = (half_tr + disc, half_tr - disc);
        if cabs(l1) >= cabs(l2) {
            (l1, l2)
        } else {
            (l2, l1)
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        cabs(self.eigenvalues().0)
    }

    pub fn max_abs_diff(&self, other: &Mat2C) -> f64 {
        let d = *self - *other;
        d.entries().iter().map(|z| cabs(*z)).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    #[inline]
    fn mul(self, b: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a11 * b.a11 + self.a12 * b.a21,
            self.a11 * b.a12 + self.a12 * b.a22,
            self.a21 * b.a11 + self.a22 * b.a21,
            self.a21 * b.a12 + self.a22 * b.a22,
        )
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, b: Mat2C) -> Mat2C {
        Mat2C::new(self.a11 + b.a11, self.a12 + b.a12, self.a21 + b.a21, self.a22 + b.a22)
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, b: Mat2C) -> Mat2C {
        Mat2C::new(self.a11 - b.a11, self.a12 - b.a12, self.a21 - b.a21, self.a22 - b.a22)
    }
}

pub fn max_norm(v: Vec2C) -> f64 {
    cabs(v[0]).max(cabs(v[1]))
}

pub fn euclid_norm(v: Vec2C) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// A point of the complex projective line.
#[derive(Clone, Copy, Debug)]
pub struct ProjPoint {
    rep: Vec2C,
}

impl ProjPoint {
    /// Direction of `v`. The representative has max-norm 1 and its first
    /// nonzero entry is real positive.
    pub fn new(v: Vec2C) -> Result<Self> {
        let m = max_norm(v);
        if m == 0.0 || !m.is_finite() {
            return Err(Error::ZeroVector);
        }
        let lead = if v[0] != C64::default() { v[0] } else { v[1] };
        let phase = lead / cabs(lead);
        let s = (phase * m).inv();
        Ok(ProjPoint { rep: [v[0] * s, v[1] * s] })
    }

    pub fn from_real(x: f64, y: f64) -> Result<Self> {
        ProjPoint::new([c(x, 0.0), c(y, 0.0)])
    }

    pub fn vector(&self) -> Vec2C {
        self.rep
    }

    /// The point `e_(u,v) = (e^{iu} cos v, e^{-iu} sin v)`.
    pub fn from_chart(u: f64, v: f64) -> Self {
        let w = [C64::from_polar(v.cos(), u), C64::from_polar(v.sin(), -u)];
        ProjPoint::new(w).expect("chart vectors are nonzero")
    }

    /// Coordinates `(u, v)` with `u ∈ [0, π)`, `v ∈ [0, π/2]` such that the
    /// point equals `e_(u,v)`.
    pub fn chart(&self) -> (f64, f64) {
        let [w1, w2] = self.rep;
        let (m1, m2) = (cabs(w1), cabs(w2));
        let v = m2.atan2(m1);
        if m1 == 0.0 || m2 == 0.0 {
            return (0.0, v);
        }
        let u = ((w1.arg() - w2.arg()) / 2.0).rem_euclid(PI);
        (if u >= PI { 0.0 } else { u }, v.min(FRAC_PI_2))
    }

    pub fn same_as(&self, other: &ProjPoint) -> bool {
        proj_distance(self, other) <= PROJ_EQ_TOL
    }
}

/// Sine of the angle between two complex lines, in `[0, 1]`.
pub fn proj_distance(v: &ProjPoint, w: &ProjPoint) -> f64 {
    let (a, b) = (v.rep, w.rep);
    let cross = cabs(a[0] * b[1] - a[1] * b[0]);
    (cross / (euclid_norm(a) * euclid_norm(b))).min(1.0)
}

/// Projective action of a nonsingular matrix.
pub fn act(m: &Mat2C, v: &ProjPoint) -> Result<ProjPoint> {
    let d = cabs(m.det());
    if d <= SINGULAR_DET_TOL {
        return Err(Error::SingularMatrix(d));
    }
    ProjPoint::new(m.apply(v.rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cplx() -> impl Strategy<Value = C64> {
        (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| c(a, b))
    }

    fn mat() -> impl Strategy<Value = Mat2C> {
        (cplx(), cplx(), cplx(), cplx()).prop_map(|(a, b, cc, d)| Mat2C::new(a, b, cc, d))
    }

    fn point() -> impl Strategy<Value = ProjPoint> {
        (cplx(), cplx())
            .prop_filter("nonzero", |(a, b)| max_norm([*a, *b]) > 1e-3)
            .prop_map(|(a, b)| ProjPoint::new([a, b]).unwrap())
    }

    #[test]
    fn row_sum_norm() {
        let m = Mat2C::real(1.0, -2.0, 0.5, 0.5);
        assert_eq!(m.norm(), 3.0);
        assert_eq!(Mat2C::IDENTITY.norm(), 1.0);
    }

    #[test]
    fn eigenvalues_of_symmetric_real_matrix() {
        let (l1, l2) = Mat2C::real(1.0, 2.0, 2.0, 5.0).eigenvalues();
        let s = 2.0f64.sqrt();
        assert!((l1.re - (3.0 + 2.0 * s)).abs() < 1e-12 && l1.im.abs() < 1e-12);
        assert!((l2.re - (3.0 - 2.0 * s)).abs() < 1e-12);
    }

    #[test]
    fn projective_examples() {
        let e1 = ProjPoint::from_real(1.0, 0.0).unwrap();
        let e2 = ProjPoint::from_real(0.0, 1.0).unwrap();
        assert_eq!(proj_distance(&e1, &e1), 0.0);
        assert_eq!(proj_distance(&e1, &e2), 1.0);
        let p = ProjPoint::from_real(1.0, 1.0).unwrap();
        let m = ProjPoint::from_real(1.0, -1.0).unwrap();
        assert!((proj_distance(&p, &m) - 1.0).abs() < 1e-15);

        let rho = 3.0 + 2.0 * 2.0f64.sqrt();
        let img = act(&Mat2C::real(rho, 0.0, 0.0, 1.0 / rho), &p).unwrap();
        assert!(img.same_as(&ProjPoint::from_real(rho, 1.0 / rho).unwrap()));
        assert!(act(&Mat2C::real(1.0, 2.0, 2.0, 4.0), &p).is_err());
        assert!(ProjPoint::from_real(0.0, 0.0).is_err());
    }

    #[test]
    fn canonical_representative() {
        let p = ProjPoint::new([c(0.0, -2.0), c(1.0, 1.0)]).unwrap();
        let [w1, w2] = p.vector();
        assert!(w1.im.abs() < 1e-15 && w1.re > 0.0);
        assert!((max_norm([w1, w2]) - 1.0).abs() < 1e-15);
        let q = ProjPoint::new([c(0.0, 0.0), c(0.0, 3.0)]).unwrap();
        assert_eq!(q.vector(), [c(0.0, 0.0), c(1.0, 0.0)]);
    }

    proptest! {
        #[test]
        fn inverse_roundtrip(m in mat()) {
            prop_assume!(cabs(m.det()) > 1e-2);
            let inv = m.inverse().unwrap();
            prop_assert!((inv * m).max_abs_diff(&Mat2C::IDENTITY) < 1e-10);
        }

        #[test]
        fn det_is_multiplicative(a in mat(), b in mat()) {
            let lhs = (a * b).det();
            let rhs = a.det() * b.det();
            prop_assert!(cabs(lhs - rhs) <= 1e-12 * (1.0 + cabs(rhs)) * 100.0);
        }

        #[test]
        fn norm_is_submultiplicative(a in mat(), b in mat()) {
            prop_assert!((a * b).norm() <= a.norm() * b.norm() * (1.0 + 1e-12));
        }

        #[test]
        fn distance_symmetric_and_scale_invariant(v in point(), w in point(), s in cplx()) {
            prop_assume!(cabs(s) > 1e-3);
            let d = proj_distance(&v, &w);
            prop_assert!((d - proj_distance(&w, &v)).abs() < 1e-15);
            let vs = ProjPoint::new([v.vector()[0] * s, v.vector()[1] * s]).unwrap();
            prop_assert!((proj_distance(&vs, &w) - d).abs() < 1e-12);
            prop_assert!(proj_distance(&vs, &v) < 1e-12);
            prop_assert!((0.0..=1.0).contains(&d));
        }

        #[test]
        fn act_is_projective(m in mat(), v in point(), s in cplx()) {
            prop_assume!(cabs(m.det()) > 1e-2 && cabs(s) > 1e-3);
            let a = act(&m, &v).unwrap();
            let b = act(&m.scale(s), &v).unwrap();
            prop_assert!(a.same_as(&b));
            prop_assert!(act(&Mat2C::IDENTITY, &v).unwrap().same_as(&v));
        }

        #[test]
        fn chart_roundtrip(v in point()) {
            let (u, w) = v.chart();
            prop_assert!((0.0..PI).contains(&u) && (0.0..=FRAC_PI_2).contains(&w));
            prop_assert!(ProjPoint::from_chart(u, w).same_as(&v));
        }
    }
}
