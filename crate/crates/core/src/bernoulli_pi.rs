//! Two-point phase laws whose atoms are antipodal. At `λ = -a` every frame
//! factor is `±I`, `diag(ρ, 1/ρ)` or an anti-diagonal swap, so the log-norm of
//! the product is tracked exactly by an integer Markov chain.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_norm, Mat2C, C64};
use crate::measure::PhaseMeasure;
use crate::model::{DisorderParam, EigenFrame};
use crate::stats::MeanEstimate;
use crate::stream::{RealizationStream, StreamMode};
use crate::torus::TorusAngle;

pub use crate::model::basis_change_a;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiBernoulliParams {
    pub a: TorusAngle,
    /// Probability of `a`; `a + π` has probability `1 - p`.
    pub p: f64,
    pub d: DisorderParam,
}

impl PiBernoulliParams {
    /// `p = 1` is allowed and gives the trivial law `δ_a`.
    pub fn new(a: TorusAngle, p: f64, d: DisorderParam) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!("probability {p} outside (0, 1]")));
        }
        Ok(PiBernoulliParams { a, p, d })
    }

    pub fn b(&self) -> TorusAngle {
        self.a + TorusAngle::PI
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub fn rho(&self) -> f64 {
        self.d.rho()
    }

    pub fn alpha(&self) -> f64 {
        self.q() - self.p
    }

    /// Atom 0 is `a`, atom 1 (if present) is `a + π`.
    pub fn measure(&self) -> PhaseMeasure {
        if self.p == 1.0 {
            PhaseMeasure::dirac(self.a)
        } else {
            PhaseMeasure::bernoulli(self.a, self.p, self.b()).expect("validated probability")
        }
    }

    pub fn critical_lambda(&self) -> TorusAngle {
        -self.a
    }
}

/// Position of the chain: `ln‖Λ_n u₀‖∞ = |x| ln ρ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkovState(pub i64);

/// Which frame factor a pair of draws selects at `λ = -a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PiDraw {
    /// `(a, a)`: `-I`.
    Stay,
    /// `(b, b)`: `diag(ρ, 1/ρ)`.
    Climb,
    /// `(a, b)`: plain swap.
    Flip,
    /// `(b, a)`: scaled swap.
    FlipDown,
}

impl PiDraw {
    pub fn from_outcomes(first_is_b: bool, second_is_b: bool) -> Self {
        match (first_is_b, second_is_b) {
            (false, false) => PiDraw::Stay,
            (true, true) => PiDraw::Climb,
            (false, true) => PiDraw::Flip,
            (true, false) => PiDraw::FlipDown,
        }
    }

    /// Shifted phases `(θ - a, η - a)` of this draw.
    pub fn phases(self) -> (TorusAngle, TorusAngle) {
        let (z, p) = (TorusAngle::ZERO, TorusAngle::PI);
        match self {
            PiDraw::Stay => (z, z),
            PiDraw::Climb => (p, p),
            PiDraw::Flip => (z, p),
            PiDraw::FlipDown => (p, z),
        }
    }
}

pub fn markov_step(x: MarkovState, draw: PiDraw) -> MarkovState {
    MarkovState(match draw {
        PiDraw::Stay => x.0,
        PiDraw::Climb => x.0 + 1,
        PiDraw::Flip => -x.0,
        PiDraw::FlipDown => -x.0 - 1,
    })
}

/// `(E x_n, E x_n²)` from the exact one-step recursions.
pub fn exact_moments(n: usize, p: f64) -> (f64, f64) {
    let q = 1.0 - p;
    let alpha = q - p;
    let (mut m1, mut m2) = (0.0, 0.0);
    for _ in 0..n {
        let next1 = alpha * alpha * m1 + q * alpha;
        m2 += 2.0 * q * m1 + q;
        m1 = next1;
    }
    (m1, m2)
}

/// `(ln ρ / n) √(E x_n²)`, which bounds `E ln‖Λ_n‖ / n` at the critical point.
pub fn gamma_upper_bound(n: usize, p: f64, d: DisorderParam) -> f64 {
    let (_, m2) = exact_moments(n, p);
    d.rho().ln() / n as f64 * m2.sqrt()
}

fn next_draw(stream: &mut RealizationStream, mu: &PhaseMeasure) -> PiDraw {
    let (i, j) = stream.next_atom_pair(mu);
    PiDraw::from_outcomes(i == 1, j == 1)
}

/// Runs the frame product `Λ_k u₀` (with `u₀ = (1, 1)`) and the chain on the same
/// draws and returns `max_k | ln‖Λ_k u₀‖∞ - |x_k| ln ρ |`.
pub fn chain_vs_transfer_consistency(
    stream: &mut RealizationStream,
    params: &PiBernoulliParams,
    n: usize,
) -> Result<f64> {
    if stream.mode() != StreamMode::Independent {
        return Err(Error::StreamMode { expected: "independent", found: stream.mode().name() });
    }
    let mu = params.measure();
    let frame = EigenFrame::new(params.d);
    let lambda = params.critical_lambda();
    let ln_rho = params.rho().ln();
    let mut u = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
    let mut log_acc = 0.0;
    let mut x = MarkovState::default();
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (th, et) = stream.next_pair(&mu);
        let (i_b, j_b) = (th.same_as(params.b()), et.same_as(params.b()));
        x = markov_step(x, PiDraw::from_outcomes(i_b, j_b));
        let a_mat: Mat2C = frame.transfer(th + lambda, et + lambda);
        u = a_mat.apply(u);
        let s = max_norm(u);
        u = [u[0] / s, u[1] / s];
        log_acc += s.ln();
        worst = worst.max((log_acc - x.0.unsigned_abs() as f64 * ln_rho).abs());
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainMoments {
    pub x: MeanEstimate,
    pub x2: MeanEstimate,
    pub abs_x: MeanEstimate,
}

/// Monte Carlo moments of `x_n` over independent realizations.
pub fn sample_chain_moments(
    params: &PiBernoulliParams,
    n: usize,
    realizations: usize,
    seed: u64,
) -> Result<ChainMoments> {
    if realizations < 2 {
        return Err(Error::InvalidParameter("need at least 2 realizations".into()));
    }
    let mu = params.measure();
    let xs: Vec<i64> = (0..realizations)
        .into_par_iter()
        .map(|i| {
            let mut s = RealizationStream::new(seed, i as u64, StreamMode::Independent);
            let mut x = MarkovState::default();
            for _ in 0..n {
                x = markov_step(x, next_draw(&mut s, &mu));
            }
            x.0
        })
        .collect();
    let f = |g: fn(i64) -> f64| MeanEstimate::of(&xs.iter().map(|&x| g(x)).collect::<Vec<_>>());
    Ok(ChainMoments { x: f(|x| x as f64), x2: f(|x| (x * x) as f64), abs_x: f(|x| x.abs() as f64) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cabs;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn half() -> DisorderParam {
        DisorderParam::new(FRAC_1_SQRT_2).unwrap()
    }

    #[test]
    fn transitions() {
        let x = MarkovState(3);
        assert_eq!(markov_step(x, PiDraw::Stay), MarkovState(3));
        assert_eq!(markov_step(x, PiDraw::Climb), MarkovState(4));
        assert_eq!(markov_step(x, PiDraw::Flip), MarkovState(-3));
        assert_eq!(markov_step(x, PiDraw::FlipDown), MarkovState(-4));
    }

    #[test]
    fn moments_small_cases() {
        for p in [0.25, 0.5, 0.75] {
            let q = 1.0 - p;
            assert_eq!(exact_moments(0, p), (0.0, 0.0));
            let (m1, m2) = exact_moments(1, p);
            assert!((m1 - q * (q - p)).abs() < 1e-15 && (m2 - q).abs() < 1e-15);
        }
        for n in [1, 10, 1000, 12_345] {
            assert_eq!(exact_moments(n, 0.5), (0.0, n as f64 / 2.0));
        }
    }

    #[test]
    fn moments_match_brute_force_distribution() {
        // exact law of x_n by dynamic programming over the reachable states
        for p in [0.25, 0.6] {
            let q = 1.0 - p;
            let n = 12;
            let mut dist = std::collections::BTreeMap::from([(0i64, 1.0f64)]);
            for _ in 0..n {
                let mut next = std::collections::BTreeMap::new();
                for (&x, &w) in &dist {
                    for (draw, pr) in [
                        (PiDraw::Stay, p * p),
                        (PiDraw::Climb, q * q),
                        (PiDraw::Flip, p * q),
                        (PiDraw::FlipDown, p * q),
                    ] {
                        *next.entry(markov_step(MarkovState(x), draw).0).or_insert(0.0) += w * pr;
                    }
                }
                dist = next;
            }
            let m1: f64 = dist.iter().map(|(&x, &w)| x as f64 * w).sum();
            let m2: f64 = dist.iter().map(|(&x, &w)| (x * x) as f64 * w).sum();
            let (e1, e2) = exact_moments(n, p);
            assert!((m1 - e1).abs() < 1e-12 && (m2 - e2).abs() < 1e-12);
        }
    }

    #[test]
    fn upper_bound_values() {
        let d = half();
        let ln_rho = (3.0 + 2.0 * 2.0f64.sqrt()).ln();
        assert!((gamma_upper_bound(1, 0.5, d) - ln_rho * 0.5f64.sqrt()).abs() < 1e-12);
        let b = gamma_upper_bound(10_000, 0.5, d);
        assert!((b - ln_rho * 5000f64.sqrt() / 1e4).abs() < 1e-12);
        assert!((b - 1.246e-2).abs() < 1e-4);
    }

    #[test]
    fn consistency_on_stream() {
        let params = PiBernoulliParams::new(TorusAngle::new(0.4), 0.5, half()).unwrap();
        for seed in 0..5 {
            let mut s = RealizationStream::new(seed, 0, StreamMode::Independent);
            let dev = chain_vs_transfer_consistency(&mut s, &params, 1000).unwrap();
            assert!(dev <= 1e-9, "seed {seed}: {dev}");
        }
        let near_one = PiBernoulliParams::new(TorusAngle::new(2.0), 0.5, DisorderParam::new(0.999).unwrap()).unwrap();
        let mut s = RealizationStream::new(3, 0, StreamMode::Independent);
        assert!(chain_vs_transfer_consistency(&mut s, &near_one, 100).unwrap() <= 1e-8);
        let trivial = PiBernoulliParams::new(TorusAngle::ZERO, 1.0, half()).unwrap();
        let mut s = RealizationStream::new(3, 0, StreamMode::Independent);
        assert_eq!(chain_vs_transfer_consistency(&mut s, &trivial, 100).unwrap(), 0.0);
        let mut s = RealizationStream::new(3, 0, StreamMode::Dimer);
        assert!(chain_vs_transfer_consistency(&mut s, &params, 10).is_err());
    }

    #[test]
    fn rho_identity() {
        for t in [0.1, 0.5, FRAC_1_SQRT_2, 0.95] {
            let d = DisorderParam::new(t).unwrap();
            let r = d.r();
            assert!(((r + 1.0).powi(2) / (t * t) - (1.0 + r) / (1.0 - r)).abs() < 1e-12 * d.rho());
        }
    }

    #[test]
    fn monte_carlo_moments_within_three_sigma() {
        for p in [0.25, 0.5, 0.75] {
            let params = PiBernoulliParams::new(TorusAngle::ZERO, p, half()).unwrap();
            for n in [100, 1000] {
                let mc = sample_chain_moments(&params, n, 4000, 17).unwrap();
                let (e1, e2) = exact_moments(n, p);
                assert!((mc.x.mean - e1).abs() <= 3.0 * mc.x.stderr, "p={p} n={n}: {mc:?}");
                assert!((mc.x2.mean - e2).abs() <= 3.0 * mc.x2.stderr, "p={p} n={n}: {mc:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn frame_products_stay_diagonal_or_antidiagonal(seed in any::<u64>(), a in 0.0f64..std::f64::consts::TAU) {
            let params = PiBernoulliParams::new(TorusAngle::new(a), 0.5, half()).unwrap();
            let mu = params.measure();
            let frame = EigenFrame::new(params.d);
            let mut s = RealizationStream::new(seed, 0, StreamMode::Independent);
            let mut m = Mat2C::IDENTITY;
            for _ in 0..25 {
                let (th, et) = s.next_pair(&mu);
                m = frame.transfer(th + params.critical_lambda(), et + params.critical_lambda()) * m;
                let diag = m.a12 == C64::default() && m.a21 == C64::default();
                let anti = m.a11 == C64::default() && m.a22 == C64::default();
                prop_assert!(diag || anti);
                let (x, y) = if diag { (m.a11, m.a22) } else { (m.a12, m.a21) };
                prop_assert!(x.im.abs() < 1e-9 * cabs(x) && y.im.abs() < 1e-9 * cabs(y));
                prop_assert!((cabs(x * y) - 1.0).abs() < 1e-9);
            }
        }
    }
}
