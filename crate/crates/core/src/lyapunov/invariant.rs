//! Norm-growth function `Φ(λ, v̄) = E ln(‖T_λ v‖∞ / ‖v‖∞)`, the invariant
//! measure of the projective action and the integral formula for `γ`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Ensemble, Kernel, LyapunovEstimate, Model};
use crate::error::{Error, Result};
use crate::linalg::{c, max_norm, proj_distance, Mat2C, ProjPoint, Vec2C};
use crate::measure::PhaseMeasure;
use crate::model::{transfer_matrix, DisorderParam, EigenFrame};
use crate::stats::MeanEstimate;
use crate::stream::{derive_seed, RealizationStream, StreamMode};
use crate::torus::TorusAngle;

/// Stream tag for initial directions, kept apart from the phase draws.
const INIT_TAG: u64 = 0x1A17_D1AC_0000_0001;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiValue {
    pub value: f64,
    /// `None` for the exact weighted sum.
    pub stderr: Option<f64>,
}

fn log_growth(m: &Mat2C, v: Vec2C) -> f64 {
    (max_norm(m.apply(v)) / max_norm(v)).ln()
}

impl Ensemble {
    /// Exact `Φ` as a weighted sum over the support (finite measures).
    pub fn phi_exact(&self, lambda: TorusAngle, v: &ProjPoint) -> Result<f64> {
        let atoms = self.measure.atoms().ok_or(Error::UnsupportedMeasure(self.measure.kind_name()))?;
        let vec = v.vector();
        let d = self.disorder;
        let mut sum = 0.0;
        for a in atoms {
            match self.model {
                Model::Anderson => {
                    for b in atoms {
                        let m = transfer_matrix(a.angle + lambda, b.angle + lambda, d);
                        sum += a.prob * b.prob * log_growth(&m, vec);
                    }
                }
                Model::Dimer => {
                    let m = transfer_matrix(a.angle + lambda, a.angle + lambda, d);
                    sum += a.prob * log_growth(&m, vec);
                }
            }
        }
        Ok(sum)
    }

    /// Monte Carlo `Φ` from `samples` independent factors.
    pub fn phi_monte_carlo(
        &self,
        lambda: TorusAngle,
        v: &ProjPoint,
        samples: usize,
        seed: u64,
    ) -> Result<MeanEstimate> {
        if samples < 2 {
            return Err(Error::InvalidParameter("need at least 2 samples".into()));
        }
        let mut s = self.stream(seed, 0);
        let vec = v.vector();
        let xs: Vec<f64> = (0..samples).map(|_| log_growth(&self.next_transfer(&mut s, lambda), vec)).collect();
        Ok(MeanEstimate::of(&xs))
    }

    /// Exact sum for finite measures, Monte Carlo otherwise.
    pub fn phi(&self, lambda: TorusAngle, v: &ProjPoint, samples: usize, seed: u64) -> Result<PhiValue> {
        if self.measure.is_finite() {
            return Ok(PhiValue { value: self.phi_exact(lambda, v)?, stderr: None });
        }
        let e = self.phi_monte_carlo(lambda, v, samples, seed)?;
        Ok(PhiValue { value: e.mean, stderr: Some(e.stderr) })
    }
}

pub fn phi(
    lambda: TorusAngle,
    v: &ProjPoint,
    mu: &PhaseMeasure,
    d: DisorderParam,
    samples: usize,
    seed: u64,
) -> Result<PhiValue> {
    Ensemble::anderson(mu.clone(), d).phi(lambda, v, samples, seed)
}

/// Counts over the chart `(u, v) ∈ [0, π) × [0, π/2]` of the projective line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartHistogram {
    pub bins_u: usize,
    pub bins_v: usize,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl ChartHistogram {
    pub fn new(bins_u: usize, bins_v: usize) -> Self {
        ChartHistogram { bins_u, bins_v, counts: vec![0; bins_u * bins_v], total: 0 }
    }

    pub fn from_points<'a>(bins_u: usize, bins_v: usize, points: impl IntoIterator<Item = &'a ProjPoint>) -> Self {
        let mut h = ChartHistogram::new(bins_u, bins_v);
        for p in points {
            h.add(p);
        }
        h
    }

    pub fn add(&mut self, p: &ProjPoint) {
        let (u, v) = p.chart();
        let iu = ((u / PI * self.bins_u as f64) as usize).min(self.bins_u - 1);
        let iv = ((v / FRAC_PI_2 * self.bins_v as f64) as usize).min(self.bins_v - 1);
        self.counts[iu * self.bins_v + iv] += 1;
        self.total += 1;
    }

    /// Total variation distance between the normalized histograms.
    pub fn tv_distance(&self, other: &ChartHistogram) -> f64 {
        assert_eq!((self.bins_u, self.bins_v), (other.bins_u, other.bins_v), "histogram shapes differ");
        let (a, b) = (self.total.max(1) as f64, other.total.max(1) as f64);
        0.5 * self.counts.iter().zip(&other.counts).map(|(&x, &y)| (x as f64 / a - y as f64 / b).abs()).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantMeasureOptions {
    pub burn_in: usize,
    /// Recorded points per chain.
    pub samples: usize,
    pub chains: usize,
    pub seed: u64,
    /// Largest allowed total variation between the first and second half of
    /// the recorded samples (on the coarse check grid).
    pub tolerance: f64,
    /// Chains whose orbit and companion orbit stay farther apart than this
    /// after burn-in have not forgotten their start.
    pub sync_tolerance: f64,
    /// Bins per chart axis of the convergence check.
    pub check_bins: usize,
}

impl Default for InvariantMeasureOptions {
    fn default() -> Self {
        InvariantMeasureOptions {
            burn_in: 1_000,
            samples: 4_000,
            chains: 16,
            seed: 0,
            tolerance: 0.1,
            sync_tolerance: 1e-6,
            check_bins: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "kebab-case")]
pub enum Convergence {
    Converged,
    NotConverged(String),
}

/// Equally weighted orbit points, chain after chain.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    pub lambda: TorusAngle,
    pub points: Vec<ProjPoint>,
    pub chains: usize,
    /// 64×64 histogram over the chart.
    pub histogram: ChartHistogram,
    pub half_split_distance: f64,
    /// Largest distance between an orbit and its companion after burn-in.
    pub sync_distance: f64,
    pub status: Convergence,
}

impl EmpiricalMeasure {
    pub fn chain(&self, i: usize) -> &[ProjPoint] {
        let len = self.points.len() / self.chains;
        &self.points[i * len..(i + 1) * len]
    }

    /// Image of every point under one independent random factor.
    pub fn push_forward(&self, ens: &Ensemble, seed: u64) -> Result<Vec<ProjPoint>> {
        let mut s = ens.stream(seed, 0);
        self.points.iter().map(|p| ProjPoint::new(ens.next_transfer(&mut s, self.lambda).apply(p.vector()))).collect()
    }
}

struct ChainTrace {
    points: Vec<ProjPoint>,
    sync: f64,
}

fn normalize(v: Vec2C) -> Vec2C {
    let m = max_norm(v);
    [v[0] / m, v[1] / m]
}

impl Ensemble {
    /// Orbits of random initial directions under the random projective action.
    ///
    /// The orbit is iterated in the eigenframe and reported in the standard
    /// basis. Each chain also carries a companion orbit from the orthogonal
    /// start driven by the same factors.
    pub fn invariant_measure(&self, lambda: TorusAngle, opts: &InvariantMeasureOptions) -> Result<EmpiricalMeasure> {
        if opts.chains < 2 || opts.samples < 2 {
            return Err(Error::InvalidParameter("need at least 2 chains and 2 samples".into()));
        }
        let kernel = Kernel::new(self, lambda);
        let frame = EigenFrame::new(self.disorder);
        let init_seed = derive_seed(opts.seed, INIT_TAG);
        let traces: Vec<ChainTrace> = (0..opts.chains)
            .into_par_iter()
            .map(|i| {
                let mut init = RealizationStream::new(init_seed, i as u64, StreamMode::Independent);
                let (u0, v0) = (PI * init.next_uniform(), FRAC_PI_2 * init.next_uniform());
                let mut x = ProjPoint::from_chart(u0, v0).vector();
                let mut y = [-x[1].conj(), x[0].conj()];
                let mut s = self.stream(opts.seed, i as u64);
                let mut points = Vec::with_capacity(opts.samples);
                let mut sync: f64 = 0.0;
                for step in 0..opts.burn_in + opts.samples {
                    let m = kernel.next(&mut s);
                    x = normalize(m.apply(x));
                    y = normalize(m.apply(y));
                    if step >= opts.burn_in {
                        let px = ProjPoint::new(frame.p.apply(x)).expect("nonzero orbit");
                        let py = ProjPoint::new(frame.p.apply(y)).expect("nonzero orbit");
                        sync = sync.max(proj_distance(&px, &py));
                        points.push(px);
                    }
                }
                ChainTrace { points, sync }
            })
            .collect();

        let sync_distance = traces.iter().map(|t| t.sync).fold(0.0, f64::max);
        let half = opts.samples / 2;
        let cb = opts.check_bins;
        let first = ChartHistogram::from_points(cb, cb, traces.iter().flat_map(|t| &t.points[..half]));
        let second = ChartHistogram::from_points(cb, cb, traces.iter().flat_map(|t| &t.points[half..]));
        let half_split_distance = first.tv_distance(&second);
        let points: Vec<ProjPoint> = traces.into_iter().flat_map(|t| t.points).collect();
        let histogram = ChartHistogram::from_points(64, 64, &points);

        let status = if sync_distance > opts.sync_tolerance {
            Convergence::NotConverged(format!(
                "orbits from different starts remain {sync_distance:.3e} apart after {} steps",
                opts.burn_in
            ))
        } else if half_split_distance > opts.tolerance {
            Convergence::NotConverged(format!(
                "histograms of consecutive halves differ by {half_split_distance:.3} in total variation"
            ))
        } else {
            Convergence::Converged
        };
        Ok(EmpiricalMeasure {
            lambda,
            points,
            chains: opts.chains,
            histogram,
            half_split_distance,
            sync_distance,
            status,
        })
    }
}

pub fn empirical_invariant_measure(
    lambda: TorusAngle,
    mu: &PhaseMeasure,
    d: DisorderParam,
    opts: &InvariantMeasureOptions,
) -> Result<EmpiricalMeasure> {
    Ensemble::anderson(mu.clone(), d).invariant_measure(lambda, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckBudget {
    pub n: usize,
    pub realizations: usize,
    pub seed: u64,
    pub measure: InvariantMeasureOptions,
    /// Monte Carlo samples per point for `Φ` when the measure is not finite.
    pub phi_samples: usize,
    /// Absolute slack added to the agreement band (finite-length bias).
    pub floor: f64,
}

impl Default for CrossCheckBudget {
    fn default() -> Self {
        CrossCheckBudget {
            n: 100_000,
            realizations: 32,
            seed: 0,
            measure: InvariantMeasureOptions::default(),
            phi_samples: 64,
            floor: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub direct: LyapunovEstimate,
    pub integral: MeanEstimate,
    pub agreement: bool,
}

impl CrossCheck {
    pub fn combined_stderr(&self) -> f64 {
        self.direct.stderr.hypot(self.integral.stderr)
    }
}

impl Ensemble {
    /// Direct `γ̂` against `∫ Φ dν̂`. The integral's standard error comes from
    /// the spread of per-chain averages.
    pub fn furstenberg_cross_check(&self, lambda: TorusAngle, budget: &CrossCheckBudget) -> Result<CrossCheck> {
        let nu = self.invariant_measure(lambda, &budget.measure)?;
        if let Convergence::NotConverged(reason) = &nu.status {
            return Err(Error::NotConverged(reason.clone()));
        }
        let per_chain: Vec<f64> = (0..nu.chains)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let pts = nu.chain(i);
                let mut sum = 0.0;
                for (k, p) in pts.iter().enumerate() {
                    let seed = derive_seed(budget.seed ^ INIT_TAG, (i * pts.len() + k) as u64);
                    sum += self.phi(lambda, p, budget.phi_samples, seed)?.value;
                }
                Ok(sum / pts.len() as f64)
            })
            .collect::<Result<_>>()?;
        let integral = MeanEstimate::of(&per_chain);
        let direct = self.estimate(lambda, budget.n, budget.realizations, budget.seed)?;
        let band = 3.0 * direct.stderr.hypot(integral.stderr) + budget.floor;
        Ok(CrossCheck { direct, integral, agreement: (direct.mean - integral.mean).abs() <= band })
    }
}

pub fn furstenberg_cross_check(
    lambda: TorusAngle,
    mu: &PhaseMeasure,
    d: DisorderParam,
    budget: &CrossCheckBudget,
) -> Result<CrossCheck> {
    Ensemble::anderson(mu.clone(), d).furstenberg_cross_check(lambda, budget)
}

/// `e_1` as a projective point.
pub fn e1() -> ProjPoint {
    ProjPoint::new([c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
}
