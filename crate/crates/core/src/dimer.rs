//! The dimer variant: each random phase occupies two adjacent sites, so every
//! two-step factor is `T(ω+λ, ω+λ)` with determinant one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::furstenberg::{dimer_critical_set, CriticalSet, PARABOLIC_TOL};
use crate::linalg::{cabs, Mat2C, C64};
use crate::lyapunov::{AnomalyReport, Budget, ChainOptions, Ensemble, Thresholds};
use crate::measure::PhaseMeasure;
use crate::model::{transfer_matrix, DisorderParam};
use crate::stream::{RealizationStream, StreamMode};
use crate::torus::TorusAngle;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimerParams {
    pub a: TorusAngle,
    pub b: TorusAngle,
    /// Probability of `a`; `p = 1` is the trivial law `δ_a`.
    pub p: f64,
    pub d: DisorderParam,
}

impl DimerParams {
    pub fn new(a: TorusAngle, b: TorusAngle, p: f64, d: DisorderParam) -> Result<Self> {
        if a.same_as(b) {
            return Err(Error::InvalidParameter("dimer atoms must differ".into()));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!("probability {p} outside (0, 1]")));
        }
        Ok(DimerParams { a, b, p, d })
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub fn measure(&self) -> PhaseMeasure {
        if self.p == 1.0 {
            PhaseMeasure::dirac(self.a)
        } else {
            PhaseMeasure::bernoulli(self.a, self.p, self.b).expect("validated probability")
        }
    }

    pub fn ensemble(&self) -> Ensemble {
        Ensemble::dimer(self.measure(), self.d)
    }

    /// `T(b-a, b-a)`: the non-trivial factor at `λ = -a`.
    pub fn critical_factor(&self) -> Mat2C {
        let eta = self.b - self.a;
        transfer_matrix(eta, eta, self.d)
    }
}

/// `ln‖T_n‖` for `n` dimer factors; the stream must be in dimer mode.
pub fn dimer_transfer_product(
    stream: &mut RealizationStream,
    lambda: TorusAngle,
    mu: &PhaseMeasure,
    d: DisorderParam,
    n: usize,
) -> Result<f64> {
    if stream.mode() != StreamMode::Dimer {
        return Err(Error::StreamMode { expected: "dimer", found: stream.mode().name() });
    }
    let ens = Ensemble::dimer(mu.clone(), d);
    Ok(ens.run_chain(stream, lambda, n, &ChainOptions::default())?.log_norm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumCase {
    InSpectrum,
    InResolvent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub value: f64,
    pub case: SpectrumCase,
    /// `|tr T(b-a, b-a)| = 2`: `b - a` sits on an endpoint of the free arc.
    pub boundary: bool,
    pub trace: f64,
}

/// Closed-form exponent at `λ = -a`: zero when `b - a` lies in the free
/// spectrum, `q ln(spectral radius of T(b-a, b-a))` otherwise.
pub fn dimer_gamma_critical(params: &DimerParams) -> CriticalValue {
    let m = params.critical_factor();
    let trace = m.trace().re;
    let boundary = (trace.abs() - 2.0).abs() <= PARABOLIC_TOL;
    if trace.abs() <= 2.0 || boundary {
        CriticalValue { value: 0.0, case: SpectrumCase::InSpectrum, boundary, trace }
    } else {
        CriticalValue { value: params.q() * m.spectral_radius().ln(), case: SpectrumCase::InResolvent, boundary, trace }
    }
}

/// `ln(‖V‖ ‖V⁻¹‖)` (row-sum norm) for the eigenvector matrix `V` of an
/// elliptic `T(b-a, b-a)`; bounds every partial product at `λ = -a`.
pub fn dimer_conditioning_bound(params: &DimerParams) -> Result<f64> {
    let m = params.critical_factor();
    let (l1, l2) = m.eigenvalues();
    if cabs(l1 - l2) < 1e-12 {
        return Err(Error::Parabolic(m.trace().re));
    }
    let col = |l: C64| -> [C64; 2] {
        // (a12, l - a11) or (l - a22, a21), whichever is larger
        let u = [m.a12, l - m.a11];
        let v = [l - m.a22, m.a21];
        if cabs(u[0]) + cabs(u[1]) >= cabs(v[0]) + cabs(v[1]) {
            u
        } else {
            v
        }
    };
    let (c1, c2) = (col(l1), col(l2));
    let v = Mat2C::new(c1[0], c2[0], c1[1], c2[1]);
    Ok((v.norm() * v.inverse()?.norm()).ln())
}

/// `sup_{k <= n_max} ln‖T_k‖` at `λ = -a` along one dimer stream.
pub fn dimer_boundedness_check(params: &DimerParams, n_max: usize, seed: u64) -> Result<f64> {
    let trace = params.critical_factor().trace().re;
    if params.p < 1.0 && trace.abs() >= 2.0 - PARABOLIC_TOL {
        return Err(Error::InvalidParameter(format!("T(b-a, b-a) must be elliptic (trace {trace} inside (-2, 2))")));
    }
    let ens = params.ensemble();
    let opts = ChainOptions { track_sup: true, ..Default::default() };
    let run = ens.run_chain(&mut ens.stream(seed, 0), -params.a, n_max, &opts)?;
    Ok(run.sup_log_norm)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimerSweepPoint {
    pub report: AnomalyReport,
    /// Within [`NEAR_CRITICAL_TOL`] of the critical set.
    pub near_critical: bool,
}

pub const NEAR_CRITICAL_TOL: f64 = 1e-6;

pub fn dimer_sweep(
    grid: &[TorusAngle],
    params: &DimerParams,
    th: &Thresholds,
    budget: &Budget,
) -> Result<(CriticalSet, Vec<DimerSweepPoint>)> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty quasi-energy grid".into()));
    }
    let crit = dimer_critical_set(params.a, params.b, params.d)?;
    let ens = params.ensemble();
    let points = grid
        .iter()
        .enumerate()
        .map(|(i, &lam)| {
            let b = Budget { seed: crate::lyapunov::point_seed(budget.seed, i), ..budget.clone() };
            Ok(DimerSweepPoint {
                report: ens.classify(lam, th, &b)?,
                near_critical: crit.contains(lam, NEAR_CRITICAL_TOL),
            })
        })
        .collect::<Result<_>>()?;
    Ok((crit, points))
}
