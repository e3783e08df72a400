//! The disorder parameter, the band stencil of the free operator, transfer
//! matrices and spectral arcs.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, cabs, Mat2C, Vec2C, C64};
use crate::measure::PhaseMeasure;
use crate::torus::TorusAngle;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DisorderParam {
    t: f64,
    r: f64,
}

impl DisorderParam {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidDisorder(t));
        }
        let r = ((1.0 - t) * (1.0 + t)).sqrt();
        Ok(DisorderParam { t, r })
    }

    #[inline]
    pub fn t(&self) -> f64 {
        self.t
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Hyperbolic eigenvalue `(r+1)²/t²` of the transfer matrix at `(π, π)`.
    pub fn rho(&self) -> f64 {
        (1.0 + self.r) / (1.0 - self.r)
    }
}

impl TryFrom<f64> for DisorderParam {
    type Error = Error;
    fn try_from(t: f64) -> Result<Self> {
        DisorderParam::new(t)
    }
}

impl From<DisorderParam> for f64 {
    fn from(d: DisorderParam) -> f64 {
        d.t
    }
}

/// Two-step transfer matrix with phases `θ` (even site) and `η` (odd site).
pub fn transfer_matrix(theta: TorusAngle, eta: TorusAngle, d: DisorderParam) -> Mat2C {
    let (t, r) = (d.t, d.r);
    let x = theta.cis();
    let zb = eta.cis().conj();
    let xzb = x * zb;
    let q = r / t;
    let one = c(1.0, 0.0);
    let a11 = -zb;
    let a12 = (xzb - zb) * q;
    let a21 = (one - zb) * q;
    let s = one + xzb - zb;
    let a22 = (s - x) / (t * t) - s;
    Mat2C::new(a11, a12, a21, a22)
}

pub fn transfer_matrix_shifted(theta: TorusAngle, eta: TorusAngle, lambda: TorusAngle, d: DisorderParam) -> Mat2C {
    transfer_matrix(theta + lambda, eta + lambda, d)
}

/// The fixed basis `P = [[1, 1], [(r+1)/t, (r-1)/t]]` in which the transfer
/// matrices at `θ, η ∈ {0, π}` become diagonal or anti-diagonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenFrame {
    pub p: Mat2C,
    pub p_inv: Mat2C,
    d: DisorderParam,
}

impl EigenFrame {
    pub fn new(d: DisorderParam) -> Self {
        let (t, r) = (d.t, d.r);
        let p = Mat2C::real(1.0, 1.0, (r + 1.0) / t, (r - 1.0) / t);
        let p_inv = Mat2C::real((1.0 - r) / 2.0, t / 2.0, (1.0 + r) / 2.0, -t / 2.0);
        EigenFrame { p, p_inv, d }
    }

    /// `P⁻¹ T(θ, η) P` from a factored closed form whose entries vanish exactly
    /// when `e^{iθ}, e^{iη} ∈ {±1}`.
    pub fn transfer(&self, theta: TorusAngle, eta: TorusAngle) -> Mat2C {
        frame_transfer(theta.cis(), eta.cis(), self.d)
    }

    /// `P m P⁻¹`: maps a frame matrix back to the standard basis.
    pub fn to_standard(&self, m: &Mat2C) -> Mat2C {
        self.p * *m * self.p_inv
    }

    pub fn to_frame(&self, m: &Mat2C) -> Mat2C {
        self.p_inv * *m * self.p
    }

    pub fn disorder(&self) -> DisorderParam {
        self.d
    }
}

pub(crate) fn frame_transfer(x: C64, z: C64, d: DisorderParam) -> Mat2C {
    // Entries split with (1+r)(1-r) = t² so that A(0,0) = -I and the unit
    // swap at (0, π) come out exact.
    let (t, r) = (d.t, d.r);
    let one = c(1.0, 0.0);
    let p = (x - one) * (z - one);
    let m = (x - one) * (z + one);
    let (sum, dif) = (x + z, x - z);
    let w = z.conj() / (2.0 * t * t);
    let h = z.conj() / 2.0;
    let (rp, rm) = (1.0 + r, 1.0 - r);
    Mat2C::new(-(p * w * rp) - sum * h, m * w * rm - dif * h, m * w * rp - dif * h, -(p * w * rm) - sum * h)
}

/// `P⁻¹ T(θ, η) P`.
pub fn basis_change_a(theta: TorusAngle, eta: TorusAngle, d: DisorderParam) -> Mat2C {
    EigenFrame::new(d).transfer(theta, eta)
}

/// Nonzero entries of the five-diagonal operator, per row parity. Row `2k`
/// touches columns `2k-1..=2k+2`, row `2k+1` touches `2k-1..=2k+2` as well.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    pub even_row: [f64; 4],
    pub odd_row: [f64; 4],
}

impl Stencil {
    pub fn new(d: DisorderParam) -> Self {
        let (t, r) = (d.t, d.r);
        Stencil { even_row: [r * t, r * r, r * t, -t * t], odd_row: [-t * t, -t * r, r * r, -r * t] }
    }

    /// Copy with one coefficient replaced (negative controls in tests).
    pub fn with_entry(mut self, odd: bool, idx: usize, value: f64) -> Self {
        if odd {
            self.odd_row[idx] = value;
        } else {
            self.even_row[idx] = value;
        }
        self
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: i64) -> [(i64, f64); 4] {
        let base = i - i.rem_euclid(2) - 1;
        let coeffs = if i.rem_euclid(2) == 0 { &self.even_row } else { &self.odd_row };
        std::array::from_fn(|j| (base + j as i64, coeffs[j]))
    }
}

/// Rows `row_min..=row_max` of the band operator on columns
/// `col_min..=col_max`, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct BandWindow {
    pub row_min: i64,
    pub row_max: i64,
    pub col_min: i64,
    pub col_max: i64,
    data: Vec<f64>,
}

impl BandWindow {
    pub fn rows(&self) -> usize {
        (self.row_max - self.row_min + 1) as usize
    }

    pub fn cols(&self) -> usize {
        (self.col_max - self.col_min + 1) as usize
    }

    pub fn get(&self, i: i64, j: i64) -> f64 {
        if i < self.row_min || i > self.row_max || j < self.col_min || j > self.col_max {
            return 0.0;
        }
        self.data[(i - self.row_min) as usize * self.cols() + (j - self.col_min) as usize]
    }

    pub fn row(&self, i: i64) -> &[f64] {
        let start = (i - self.row_min) as usize * self.cols();
        &self.data[start..start + self.cols()]
    }

    /// Rows whose whole band lies inside the column range.
    pub fn interior_rows(&self) -> impl Iterator<Item = i64> + '_ {
        (self.row_min..=self.row_max).filter(|&i| {
            let base = i - i.rem_euclid(2) - 1;
            base >= self.col_min && base + 3 <= self.col_max
        })
    }
}

pub fn s_matrix_window(d: DisorderParam, k_min: i64, k_max: i64) -> Result<BandWindow> {
    stencil_window(&Stencil::new(d), k_min, k_max)
}

pub fn stencil_window(stencil: &Stencil, k_min: i64, k_max: i64) -> Result<BandWindow> {
    if k_max - k_min < 6 {
        return Err(Error::WindowTooSmall { k_min, k_max });
    }
    let (col_min, col_max) = (k_min - 2, k_max + 2);
    let cols = (col_max - col_min + 1) as usize;
    let mut data = vec![0.0; (k_max - k_min + 1) as usize * cols];
    for i in k_min..=k_max {
        for (j, v) in stencil.row(i) {
            if (col_min..=col_max).contains(&j) {
                data[(i - k_min) as usize * cols + (j - col_min) as usize] = v;
            }
        }
    }
    Ok(BandWindow { row_min: k_min, row_max: k_max, col_min, col_max, data })
}

/// Maximum relative residual of the eigenvalue equation `D S ψ = e^{iλ} ψ`
/// on a window, where `ψ` comes from the transfer recursion.
pub fn verify_eigen_recursion(
    phases: &[TorusAngle],
    lambda: TorusAngle,
    d: DisorderParam,
    c_init: Vec2C,
) -> Result<f64> {
    verify_eigen_recursion_with(&Stencil::new(d), phases, lambda, d, c_init)
}

pub fn verify_eigen_recursion_with(
    stencil: &Stencil,
    phases: &[TorusAngle],
    lambda: TorusAngle,
    d: DisorderParam,
    c_init: Vec2C,
) -> Result<f64> {
    let len = phases.len();
    if len < 8 || !len.is_multiple_of(2) {
        return Err(Error::PhaseCount(len));
    }
    if c_init.iter().all(|z| *z == C64::default()) {
        return Err(Error::ZeroVector);
    }
    let n = len / 2;
    // psi[j + 1] holds the coefficient at site j, j = -1..=2n
    let mut psi = Vec::with_capacity(len + 2);
    psi.extend_from_slice(&c_init);
    let mut cur = c_init;
    for k in 0..n {
        let m = transfer_matrix_shifted(phases[2 * k], phases[2 * k + 1], lambda, d);
        cur = m.apply(cur);
        psi.extend_from_slice(&cur);
    }
    let window = stencil_window(stencil, 0, len as i64 - 1)?;
    let e_lambda = lambda.cis();
    let mut worst = 0.0f64;
    for i in 0..len as i64 {
        let mut lhs = C64::default();
        let mut scale = 0.0;
        for j in (i - 2)..=(i + 2) {
            let s = window.get(i, j);
            if s != 0.0 {
                let z = psi[(j + 1) as usize];
                lhs += z * s;
                scale += s.abs() * cabs(z);
            }
        }
        lhs *= phases[i as usize].cis().conj();
        let rhs = e_lambda * psi[(i + 1) as usize];
        let denom = scale.max(cabs(rhs));
        if denom > 0.0 {
            worst = worst.max(cabs(lhs - rhs) / denom);
        }
    }
    Ok(worst)
}

/// A closed arc of the unit circle, `{e^{iϑ} : |ϑ - center| <= half_width}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralArc {
    pub center: TorusAngle,
    pub half_width: f64,
}

/// Arc endpoints closer than this are joined when merging.
pub const ARC_TOUCH_TOL: f64 = 1e-12;

impl SpectralArc {
    pub const FULL: SpectralArc = SpectralArc { center: TorusAngle::ZERO, half_width: PI };

    pub fn is_full(&self) -> bool {
        self.half_width >= PI
    }

    pub fn contains(&self, angle: TorusAngle, tol: f64) -> bool {
        self.is_full() || angle.distance(self.center) <= self.half_width + tol
    }
}

/// Spectrum of the free operator.
pub fn spectral_arc(d: DisorderParam) -> SpectralArc {
    let t2 = d.t * d.t;
    SpectralArc { center: TorusAngle::ZERO, half_width: (1.0 - 2.0 * t2).clamp(-1.0, 1.0).acos() }
}

/// The free spectrum rotated by every atom of a finitely supported measure.
pub fn almost_sure_spectrum(mu: &PhaseMeasure, d: DisorderParam) -> Result<Vec<SpectralArc>> {
    let support = mu.support().ok_or(Error::UnsupportedMeasure(mu.kind_name()))?;
    let base = spectral_arc(d);
    let arcs: Vec<_> = support.iter().map(|&a| SpectralArc { center: a, half_width: base.half_width }).collect();
    Ok(merge_arcs(&arcs))
}

/// Union of arcs as disjoint arcs sorted by center.
pub fn merge_arcs(arcs: &[SpectralArc]) -> Vec<SpectralArc> {
    if arcs.iter().any(SpectralArc::is_full) {
        return vec![SpectralArc::FULL];
    }
    // (start, end, original arc if untouched by merging)
    let mut iv: Vec<(f64, f64, Option<SpectralArc>)> = arcs
        .iter()
        .map(|a| {
            let s = (a.center - TorusAngle::new(a.half_width)).value();
            (s, s + 2.0 * a.half_width, Some(*a))
        })
        .collect();
    iv.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64, Option<SpectralArc>)> = Vec::with_capacity(iv.len());
    for (s, e, orig) in iv {
        match merged.last_mut() {
            Some(last) if s <= last.1 + ARC_TOUCH_TOL => {
                last.1 = last.1.max(e);
                last.2 = None;
            }
            _ => merged.push((s, e, orig)),
        }
    }
    while merged.len() > 1 {
        let first = merged[0];
        let last = merged.last_mut().unwrap();
        if last.1 + ARC_TOUCH_TOL >= first.0 + TAU {
            last.1 = last.1.max(first.1 + TAU);
            last.2 = None;
            merged.remove(0);
        } else {
            break;
        }
    }
    let mut out: Vec<SpectralArc> = Vec::with_capacity(merged.len());
    for (s, e, orig) in merged {
        if e - s + ARC_TOUCH_TOL >= TAU {
            return vec![SpectralArc::FULL];
        }
        out.push(orig.unwrap_or(SpectralArc { center: TorusAngle::new((s + e) / 2.0), half_width: (e - s) / 2.0 }));
    }
    out.sort_by(|x, y| x.center.value().total_cmp(&y.center.value()));
    out
}
