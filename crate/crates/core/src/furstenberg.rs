//! Constructive witnesses for non-compactness and strong irreducibility of
//! the groups generated by transfer matrices.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{act, c, cabs, euclid_norm, proj_distance, Mat2C, ProjPoint, C64, PROJ_EQ_TOL};
use crate::model::{transfer_matrix, DisorderParam};
use crate::torus::TorusAngle;

/// Phases closer than this are treated as equal.
pub const PHASE_EQ_TOL: f64 = 1e-10;
/// `tr K` must exceed 2 by this to certify a hyperbolic element.
pub const TRACE_K_MARGIN: f64 = 1e-10;
/// `|tr| = 2` within this counts as parabolic.
pub const PARABOLIC_TOL: f64 = 1e-12;

/// Products of transfer matrices with a hyperbolic self-adjoint element `K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupWitness {
    /// `T(θ,θ) T(θ,η)⁻¹`
    pub d: Mat2C,
    /// `T(η,θ)⁻¹ T(θ,θ)`
    pub e: Mat2C,
    pub l: Mat2C,
    pub j: Mat2C,
    /// `J⁻¹ L`
    pub k: Mat2C,
    pub trace_k: f64,
    /// `2 + (r²/t⁴)|x z̄ - 1|⁴`
    pub trace_k_closed_form: f64,
    pub noncompact: bool,
}

/// The witness matrices without the distinct-phase check.
pub fn witness_matrices(theta: TorusAngle, eta: TorusAngle, d: DisorderParam) -> GroupWitness {
    let (t, r) = (d.t(), d.r());
    let q = r / t;
    let w = (eta - theta).cis(); // x z̄ with x = e^{-iθ}, z = e^{-iη}
    let one = c(1.0, 0.0);
    let dm = Mat2C::new(w, C64::default(), (w - one) * q, one);
    let em = Mat2C::new(one, (one - w.conj()) * q, C64::default(), w.conj());
    let l = dm * em;
    let j = em * dm;
    let k = j.inverse().expect("det J = 1") * l;
    let trace_k = k.trace().re;
    let trace_k_closed_form = 2.0 + r * r / t.powi(4) * cabs(w - one).powi(4);
    GroupWitness { d: dm, e: em, l, j, k, trace_k, trace_k_closed_form, noncompact: trace_k > 2.0 + TRACE_K_MARGIN }
}

pub fn build_witness(theta: TorusAngle, eta: TorusAngle, d: DisorderParam) -> Result<GroupWitness> {
    if theta.distance(eta) <= PHASE_EQ_TOL {
        return Err(Error::Degenerate("equal phases give K = I".into()));
    }
    Ok(witness_matrices(theta, eta, d))
}

fn min_pairwise(points: &[ProjPoint]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min(proj_distance(a, b));
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct PiIrreducibility {
    pub v_plus: ProjPoint,
    pub v_minus: ProjPoint,
    /// Images of `v₊` under `T(θ,θ)`, `T(θ,η)`, `T(η,θ)`.
    pub images_plus: [ProjPoint; 3],
    pub images_minus: [ProjPoint; 3],
    pub distinct_images: bool,
    pub min_distance: f64,
    /// `λ ∈ {-a, -b}`, where the images are known to coincide.
    pub degenerate: bool,
    /// `D E` for the antipodal pair; hyperbolic with eigenvectors `v₊`, `v₋`.
    pub l: Mat2C,
}

/// Three-image test for the eigenvectors of `L` when the atoms are antipodal.
pub fn pi_case_irreducibility(lambda: TorusAngle, a: TorusAngle, d: DisorderParam) -> PiIrreducibility {
    let (t, r) = (d.t(), d.r());
    let b = a + TorusAngle::PI;
    let (th, et) = (a + lambda, b + lambda);
    let v_plus = ProjPoint::from_real(1.0, (r + 1.0) / t).unwrap();
    let v_minus = ProjPoint::from_real(1.0, (r - 1.0) / t).unwrap();
    let mats = [transfer_matrix(th, th, d), transfer_matrix(th, et, d), transfer_matrix(et, th, d)];
    let images = |v: &ProjPoint| mats.map(|m| act(&m, v).expect("transfer matrices are unimodular"));
    let images_plus = images(&v_plus);
    let images_minus = images(&v_minus);
    let min_distance = min_pairwise(&images_plus).min(min_pairwise(&images_minus));
    let degenerate = th.distance(TorusAngle::ZERO) <= PHASE_EQ_TOL || et.distance(TorusAngle::ZERO) <= PHASE_EQ_TOL;
    PiIrreducibility {
        v_plus,
        v_minus,
        images_plus,
        images_minus,
        distinct_images: min_distance > PROJ_EQ_TOL,
        min_distance,
        degenerate,
        l: witness_matrices(th, et, d).l,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitGenerator {
    D,
    E,
}

#[derive(Clone, Debug)]
pub struct IrreducibilityWitness {
    pub generator: OrbitGenerator,
    /// `v̄`, `G v̄`, `G² v̄`.
    pub points: Vec<ProjPoint>,
    pub min_distance: f64,
}

/// Three distinct images of `v̄` under `{I, G, G²}` with `G ∈ {D, E}`, chosen
/// as in the two-case argument: `E` for `(0, 1)` and `(1, r/t)`, `D` otherwise.
pub fn general_irreducibility_witness(
    lambda: TorusAngle,
    theta0: TorusAngle,
    eta0: TorusAngle,
    d: DisorderParam,
    v: &ProjPoint,
) -> Result<IrreducibilityWitness> {
    let (th, et) = (theta0 + lambda, eta0 + lambda);
    let diff = th - et;
    if diff.distance(TorusAngle::ZERO) <= PHASE_EQ_TOL || diff.distance(TorusAngle::PI) <= PHASE_EQ_TOL {
        return Err(Error::Degenerate("atoms equal or antipodal (x z̄ = ±1)".into()));
    }
    let w = witness_matrices(th, et, d);
    let [v1, v2] = v.vector();
    let q = d.r() / d.t();
    let first = if cabs(v1) <= 1e-12 * cabs(v2) || cabs(v2 / v1 - c(q, 0.0)) <= 1e-8 {
        OrbitGenerator::E
    } else {
        OrbitGenerator::D
    };
    let orbit = |g: OrbitGenerator| -> Result<IrreducibilityWitness> {
        let m = match g {
            OrbitGenerator::D => w.d,
            OrbitGenerator::E => w.e,
        };
        let p1 = act(&m, v)?;
        let p2 = act(&m, &p1)?;
        let points = vec![*v, p1, p2];
        Ok(IrreducibilityWitness { generator: g, min_distance: min_pairwise(&points), points })
    };
    let primary = orbit(first)?;
    if primary.min_distance > PROJ_EQ_TOL {
        return Ok(primary);
    }
    let other = orbit(match first {
        OrbitGenerator::D => OrbitGenerator::E,
        OrbitGenerator::E => OrbitGenerator::D,
    })?;
    if other.min_distance > PROJ_EQ_TOL {
        return Ok(other);
    }
    Err(Error::NotCertified(format!(
        "both orbits collapse (min distance {:.3e})",
        primary.min_distance.max(other.min_distance)
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

/// Real trace of `T(θ, θ)` and its regime.
pub fn dimer_regime(theta: TorusAngle, d: DisorderParam) -> (f64, Regime) {
    let t2 = d.t() * d.t();
    let trace = (2.0 * d.r() * d.r() - 2.0 * theta.cis().re) / t2;
    let regime = if (trace.abs() - 2.0).abs() <= PARABOLIC_TOL {
        Regime::Parabolic
    } else if trace.abs() < 2.0 {
        Regime::Elliptic
    } else {
        Regime::Hyperbolic
    };
    (trace, regime)
}

/// `F = [[α e^{ic}, β], [β, α e^{-ic}]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticForm {
    pub alpha: f64,
    pub c: f64,
    pub beta: f64,
}

/// Simultaneous normal form of the dimer pair `T(θ,θ)`, `T(η,η)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimerConjugation {
    pub trace: f64,
    pub regime: Regime,
    pub rho: C64,
    pub n: Mat2C,
    /// `N T(θ,θ) N⁻¹ = diag(ρ, 1/ρ)`
    pub e_diag: Mat2C,
    /// `N T(η,η) N⁻¹`
    pub f: Mat2C,
    /// `F` from its closed-form entries.
    pub f_formula: Mat2C,
    pub elliptic: Option<EllipticForm>,
}

fn n_matrix(x: C64, rho: C64, q: f64) -> Mat2C {
    let u = (c(1.0, 0.0) - x) * q;
    Mat2C::new(u, x + rho, x + rho, -u)
}

fn f_closed_form(x: C64, z: C64, rho: C64, d: DisorderParam) -> Mat2C {
    let (t, r) = (d.t(), d.r());
    let rho_inv = rho.inv();
    let den = (rho - rho_inv) * (t * t);
    let cross = z * x.conj() + z.conj() * x;
    let zz = z + z.conj();
    let two_r2 = 2.0 * r * r;
    let f11 = ((rho + 1.0) * two_r2 - cross - rho * zz) / den;
    let f22 = -((rho_inv + 1.0) * two_r2 - cross - rho_inv * zz) / den;
    let im = x.im - z.im + (z * x.conj()).im;
    let f12 = c(0.0, 2.0 * r * im) / ((rho - rho_inv) * t.powi(3));
    Mat2C::new(f11, f12, f12, f22)
}

pub fn dimer_conjugation(theta: TorusAngle, eta: TorusAngle, d: DisorderParam) -> Result<DimerConjugation> {
    let (trace, regime) = dimer_regime(theta, d);
    let rho = match regime {
        Regime::Parabolic => return Err(Error::Parabolic(trace)),
        Regime::Elliptic => C64::from_polar(1.0, (trace / 2.0).acos()),
        Regime::Hyperbolic => {
            let s = (trace * trace - 4.0).sqrt();
            c(if trace > 0.0 { (trace + s) / 2.0 } else { (trace - s) / 2.0 }, 0.0)
        }
    };
    let x = theta.cis().conj();
    let z = eta.cis().conj();
    let q = d.r() / d.t();
    // N needs x + ρ ≠ 0; the other eigenvalue works equally well
    let rho = if cabs(x + rho) < 1e-8 { rho.inv() } else { rho };
    let n = n_matrix(x, rho, q);
    let n_inv = n.inverse()?;
    let e_diag = n * transfer_matrix(theta, theta, d) * n_inv;
    let f = n * transfer_matrix(eta, eta, d) * n_inv;
    let f_formula = f_closed_form(x, z, rho, d);
    let elliptic = (regime == Regime::Elliptic).then(|| EllipticForm {
        alpha: cabs(f_formula.a11),
        c: f_formula.a11.arg(),
        beta: f_formula.a12.re,
    });
    Ok(DimerConjugation { trace, regime, rho, n, e_diag, f, f_formula, elliptic })
}

/// The E-power and F-diagonal conditions for the dimer pair. `witnessed` is
/// never a proof of reducibility when false.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimerIrreducibility {
    pub rho4_distinct_from_one: bool,
    pub f_diagonal_nonzero: bool,
    pub witnessed: bool,
}

pub fn dimer_irreducibility(theta: TorusAngle, eta: TorusAngle, d: DisorderParam) -> DimerIrreducibility {
    match dimer_conjugation(theta, eta, d) {
        Ok(conj) => {
            let rho4 = conj.rho.powi(4);
            let rho4_distinct_from_one = cabs(rho4 - c(1.0, 0.0)) > 1e-10;
            let f_diagonal_nonzero = cabs(conj.f.a11) > 1e-10 || cabs(conj.f.a22) > 1e-10;
            DimerIrreducibility {
                rho4_distinct_from_one,
                f_diagonal_nonzero,
                witnessed: rho4_distinct_from_one && f_diagonal_nonzero,
            }
        }
        Err(_) => DimerIrreducibility { rho4_distinct_from_one: false, f_diagonal_nonzero: false, witnessed: false },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalKind {
    MinusA,
    MinusB,
    Intersection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet {
    pub points: Vec<TorusAngle>,
    /// Origin of each point, aligned with `points`.
    pub components: Vec<CriticalKind>,
}

impl CriticalSet {
    pub fn contains(&self, lambda: TorusAngle, tol: f64) -> bool {
        self.points.iter().any(|p| p.distance(lambda) <= tol)
    }

    pub fn distance_to(&self, lambda: TorusAngle) -> f64 {
        self.points.iter().map(|p| p.distance(lambda)).fold(f64::INFINITY, f64::min)
    }
}

/// Quasi-energies where `T(a+λ, a+λ)` has trace `0` or `±2` (away from `-a`).
pub fn m_set(a: TorusAngle, d: DisorderParam) -> [TorusAngle; 4] {
    let (r2, t2) = (d.r() * d.r(), d.t() * d.t());
    let (c1, c2) = (r2.acos(), (r2 - t2).acos());
    [c1, TAU - c1, c2, TAU - c2].map(|x| TorusAngle::new(x) - a)
}

/// Intersection tolerance for [`dimer_critical_set`].
pub const CRITICAL_SET_TOL: f64 = 1e-10;

pub fn dimer_critical_set(a: TorusAngle, b: TorusAngle, d: DisorderParam) -> Result<CriticalSet> {
    if a.distance(b) <= PHASE_EQ_TOL {
        return Err(Error::InvalidParameter("dimer atoms must differ".into()));
    }
    let mut tagged = vec![(-a, CriticalKind::MinusA), (-b, CriticalKind::MinusB)];
    let mb = m_set(b, d);
    for x in m_set(a, d) {
        if mb.iter().any(|y| y.distance(x) <= CRITICAL_SET_TOL)
            && !tagged.iter().any(|(p, _)| p.distance(x) <= CRITICAL_SET_TOL)
        {
            tagged.push((x, CriticalKind::Intersection));
        }
    }
    tagged.sort_by(|x, y| x.0.value().total_cmp(&y.0.value()));
    Ok(CriticalSet { points: tagged.iter().map(|x| x.0).collect(), components: tagged.iter().map(|x| x.1).collect() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Letter {
    /// `E_diag` raised to a power.
    E(u32),
    F,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitWitness {
    /// Spectral norm of the word's product.
    pub achieved_norm: f64,
    /// Letters in order of application (rightmost factor first).
    pub word: Vec<Letter>,
    /// Squared-norm gain of each `F` application.
    pub gains: Vec<f64>,
    pub reached_target: bool,
}

/// Largest `E` power tried per step.
const MAX_E_POWER: u32 = 100_000;

/// Greedy unbounded-orbit search for an elliptic `E_diag = diag(e^{iy}, e^{-iy})`
/// and `F` with `β = F₁₂ ≠ 0`: rotate with the smallest power of `E_diag` that
/// makes `‖F ŵ‖² > 1 + β²`, then apply `F`; repeat until the product norm
/// exceeds `growth_target` or `max_words` applications of `F` were made.
pub fn dimer_noncompact_orbit_witness(
    e_diag: &Mat2C,
    f: &Mat2C,
    growth_target: f64,
    max_words: usize,
) -> Result<OrbitWitness> {
    let rho = e_diag.a11;
    if (cabs(rho) - 1.0).abs() > 1e-10 || cabs(e_diag.a12) + cabs(e_diag.a21) > 1e-10 {
        return Err(Error::InvalidParameter("E must be diagonal with unimodular entries".into()));
    }
    let beta = f.a12.re;
    if beta.abs() < 1e-12 {
        return Err(Error::NotCertified("β = 0: F is diagonal".into()));
    }
    let target_gain = 1.0 + beta * beta;
    let mut w = [c(1.0, 0.0), c(0.0, 0.0)];
    let mut product = Mat2C::IDENTITY;
    let mut word = Vec::new();
    let mut gains = Vec::new();
    let mut achieved = 1.0;
    while gains.len() < max_words && achieved <= growth_target {
        let mut rotated = w;
        let mut best = (0u32, 0.0f64);
        let mut k = 0;
        let chosen = loop {
            let gain = euclid_norm(f.apply(rotated)).powi(2);
            if gain > target_gain {
                break k;
            }
            if gain > best.1 {
                best = (k, gain);
            }
            if k == MAX_E_POWER {
                break best.0;
            }
            rotated = e_diag.apply(rotated);
            k += 1;
        };
        let ek = Mat2C::diag(rho.powi(chosen as i32), rho.inv().powi(chosen as i32));
        if chosen > 0 {
            word.push(Letter::E(chosen));
        }
        word.push(Letter::F);
        let step = *f * ek;
        let img = step.apply(w);
        let gain = euclid_norm(img).powi(2);
        gains.push(gain);
        let s = euclid_norm(img);
        w = [img[0] / s, img[1] / s];
        product = step * product;
        achieved = product.spectral_norm();
    }
    Ok(OrbitWitness { achieved_norm: achieved, word, gains, reached_target: achieved > growth_target })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, PI};

    fn half() -> DisorderParam {
        DisorderParam::new(FRAC_1_SQRT_2).unwrap()
    }

    fn ang(x: f64) -> TorusAngle {
        TorusAngle::new(x)
    }

    #[test]
    fn witness_matrices_are_products_of_transfer_matrices() {
        let d = DisorderParam::new(0.4).unwrap();
        let (th, et) = (ang(0.9), ang(2.3));
        let w = build_witness(th, et, d).unwrap();
        let tt = transfer_matrix(th, th, d);
        let te = transfer_matrix(th, et, d);
        let et_ = transfer_matrix(et, th, d);
        assert!(w.d.max_abs_diff(&(tt * te.inverse().unwrap())) < 1e-12);
        assert!(w.e.max_abs_diff(&(et_.inverse().unwrap() * tt)) < 1e-12);
        assert!((w.l.det() - c(1.0, 0.0)).norm() < 1e-12 && (w.j.det() - c(1.0, 0.0)).norm() < 1e-12);
        assert!(w.j.inverse().unwrap().max_abs_diff(&w.l.adjoint()) < 1e-12);
    }

    #[test]
    fn antipodal_trace_k() {
        let w = build_witness(ang(0.3), ang(0.3 + PI), half()).unwrap();
        assert!((w.trace_k - 34.0).abs() < 1e-10);
        assert!(w.noncompact);
        let same = witness_matrices(ang(1.0), ang(1.0), half());
        assert!(same.k.max_abs_diff(&Mat2C::IDENTITY) < 1e-15);
        assert_eq!(same.trace_k, 2.0);
        assert!(build_witness(ang(1.0), ang(1.0 + 1e-12), half()).is_err());
    }

    #[test]
    fn pi_case() {
        let d = half();
        let rep = pi_case_irreducibility(ang(0.7), ang(0.0), d);
        assert!(rep.distinct_images && !rep.degenerate);
        let q = d.r() / d.t();
        let expect = Mat2C::real(-1.0, -2.0 * q, -2.0 * q, -1.0 - 4.0 * q * q);
        assert!(rep.l.max_abs_diff(&expect) < 1e-12);
        assert!(rep.l.trace().re.abs() > 2.0);
        let crit = pi_case_irreducibility(ang(0.0), ang(0.0), d);
        assert!(crit.degenerate && !crit.distinct_images);
        let crit_b = pi_case_irreducibility(ang(-0.4 - PI), ang(0.4), d);
        assert!(crit_b.degenerate && !crit_b.distinct_images);
    }

    #[test]
    fn general_witness_recipes() {
        let d = half();
        let (th, et) = (ang(0.0), ang(FRAC_PI_2));
        let lam = ang(1.0);
        let q = d.r() / d.t();
        let cases = [
            (ProjPoint::from_real(0.0, 1.0).unwrap(), OrbitGenerator::E),
            (ProjPoint::from_real(1.0, q).unwrap(), OrbitGenerator::E),
            (ProjPoint::from_real(1.0, 0.0).unwrap(), OrbitGenerator::D),
        ];
        for (v, g) in cases {
            let w = general_irreducibility_witness(lam, th, et, d, &v).unwrap();
            assert_eq!(w.generator, g);
            assert_eq!(w.points.len(), 3);
            assert!(w.min_distance > PROJ_EQ_TOL);
        }
        let v = ProjPoint::from_real(0.0, 1.0).unwrap();
        assert!(general_irreducibility_witness(lam, th, ang(PI), d, &v).is_err());
        assert!(general_irreducibility_witness(lam, th, th, d, &v).is_err());
    }

    #[test]
    fn dimer_conjugation_identities() {
        let d = half();
        for (th, et) in [(0.4, 1.4), (2.5, 0.7), (1.2, 4.0), (3.0, 5.5)] {
            let conj = dimer_conjugation(ang(th), ang(et), d).unwrap();
            let rho = conj.rho;
            assert!(conj.e_diag.max_abs_diff(&Mat2C::diag(rho, rho.inv())) < 1e-10);
            assert!(conj.f.max_abs_diff(&conj.f_formula) < 1e-10, "{conj:?}");
            assert!((conj.f.det() - c(1.0, 0.0)).norm() < 1e-10);
            let x = ang(th).cis().conj();
            assert!((conj.n.det() - (x + rho) * (rho.inv() - rho)).norm() < 1e-10);
            if let Some(ef) = conj.elliptic {
                assert!((ef.alpha * ef.alpha - ef.beta * ef.beta - 1.0).abs() < 1e-10);
                let y = (d.r().powi(2) / d.t().powi(2) - x.re / d.t().powi(2)).acos();
                assert!((rho - C64::from_polar(1.0, y)).norm() < 1e-12);
            }
        }
        // F₁₂ vanishes exactly when one phase is zero
        assert!(dimer_conjugation(ang(1.0), ang(0.0), d).unwrap().f.a12.norm() < 1e-12);
        assert!(dimer_conjugation(ang(1.0), ang(0.5), d).unwrap().f.a12.norm() > 1e-3);
        // T(0,0) = -I has trace -2
        assert!(matches!(dimer_conjugation(ang(0.0), ang(1.0), d), Err(Error::Parabolic(_))));
    }

    #[test]
    fn critical_sets() {
        let d = half();
        let ma = m_set(ang(0.0), d);
        for (x, e) in ma.iter().zip([FRAC_PI_3, 5.0 * FRAC_PI_3, FRAC_PI_2, 3.0 * FRAC_PI_2]) {
            assert!(x.distance(ang(e)) < 1e-12);
        }
        let m = dimer_critical_set(ang(0.3), ang(1.1), d).unwrap();
        assert_eq!(m.points.len(), 2);
        assert!(m.contains(ang(-0.3), 1e-12) && m.contains(ang(-1.1), 1e-12));
        // b = π/6 shifts π/2 onto π/3 and 5π/3 onto 3π/2
        let m = dimer_critical_set(ang(0.0), ang(FRAC_PI_3 / 2.0), d).unwrap();
        assert_eq!(m.points.len(), 4);
        assert!(m.contains(ang(FRAC_PI_3), 1e-10) && m.contains(ang(3.0 * FRAC_PI_2), 1e-10));
        assert_eq!(m.components.iter().filter(|k| **k == CriticalKind::Intersection).count(), 2);
        assert!(dimer_critical_set(ang(0.2), ang(0.2), d).is_err());
    }

    #[test]
    fn orbit_witness_grows() {
        let d = half();
        let (a, b, lam) = (0.0, 1.0, 0.4);
        let conj = dimer_conjugation(ang(a + lam), ang(b + lam), d).unwrap();
        assert_eq!(conj.regime, Regime::Elliptic);
        let beta = conj.elliptic.unwrap().beta;
        let w = dimer_noncompact_orbit_witness(&conj.e_diag, &conj.f, 1e3, 500).unwrap();
        assert!(w.reached_target, "{w:?}");
        assert!(w.gains.iter().all(|&g| g > 1.0 + beta * beta));
        // exhaustive short words stay far below what the greedy search reaches
        let mut best: f64 = 0.0;
        let mut stack = vec![(Mat2C::IDENTITY, 0)];
        while let Some((m, len)) = stack.pop() {
            best = best.max(m.spectral_norm());
            if len < 10 {
                stack.push((conj.e_diag * m, len + 1));
                stack.push((conj.f * m, len + 1));
            }
        }
        assert!(best < w.achieved_norm);
        let crit = dimer_conjugation(ang(a + 0.9), ang(b + 0.9), d);
        if let Ok(c) = crit {
            if c.regime == Regime::Elliptic {
                assert!(dimer_noncompact_orbit_witness(&c.e_diag, &Mat2C::diag(c.f.a11, c.f.a22), 10.0, 10).is_err());
            }
        }
    }

    proptest! {
        #[test]
        fn trace_k_identity(th in 0.0f64..TAU, et in 0.0f64..TAU, t in 0.05f64..0.95) {
            let d = DisorderParam::new(t).unwrap();
            prop_assume!(ang(th).distance(ang(et)) > 1e-3);
            let w = build_witness(ang(th), ang(et), d).unwrap();
            prop_assert!((w.trace_k - w.trace_k_closed_form).abs() <= 1e-10 * w.trace_k_closed_form.max(1.0));
            prop_assert!(w.k.trace().im.abs() <= 1e-10 * w.trace_k);
            prop_assert!(w.noncompact);
            prop_assert!(w.k.max_abs_diff(&w.k.adjoint()) <= 1e-10 * w.k.norm());
            prop_assert!((w.k.det() - c(1.0, 0.0)).norm() <= 1e-10 * w.k.norm().powi(2));
            prop_assert!(w.k.a11.re > 0.0);
        }

        #[test]
        fn f_formula_matches_conjugation(th in 0.0f64..TAU, et in 0.0f64..TAU, t in 0.1f64..0.9) {
            let d = DisorderParam::new(t).unwrap();
            let (tr, regime) = dimer_regime(ang(th), d);
            prop_assume!(regime != Regime::Parabolic && (tr.abs() - 2.0).abs() > 1e-3);
            let conj = dimer_conjugation(ang(th), ang(et), d).unwrap();
            let scale = conj.f.norm().max(1.0);
            prop_assert!(conj.f.max_abs_diff(&conj.f_formula) <= 1e-10 * scale * scale);
            if let Some(ef) = conj.elliptic {
                prop_assert!((ef.alpha * ef.alpha - ef.beta * ef.beta - 1.0).abs() <= 1e-9 * scale * scale);
            }
        }

        #[test]
        fn critical_set_symmetric(a in 0.0f64..TAU, b in 0.0f64..TAU, t in 0.1f64..0.9) {
            prop_assume!(ang(a).distance(ang(b)) > 1e-6);
            let d = DisorderParam::new(t).unwrap();
            let m1 = dimer_critical_set(ang(a), ang(b), d).unwrap();
            let m2 = dimer_critical_set(ang(b), ang(a), d).unwrap();
            prop_assert_eq!(m1.points.len(), m2.points.len());
            for (x, y) in m1.points.iter().zip(&m2.points) {
                prop_assert!(x.distance(*y) < 1e-12);
            }
            prop_assert!(m1.points.len() <= 6);
        }

        #[test]
        fn pi_case_distinct_off_critical(lam in 0.0f64..TAU, a in 0.0f64..TAU, ti in 0usize..3) {
            let t = [0.3, FRAC_1_SQRT_2, 0.9][ti];
            let d = DisorderParam::new(t).unwrap();
            let lam = ang(lam);
            prop_assume!(lam.distance(-ang(a)) > 1e-3 && lam.distance(-ang(a) - TorusAngle::PI) > 1e-3);
            prop_assert!(pi_case_irreducibility(lam, ang(a), d).distinct_images);
        }
    }
}
