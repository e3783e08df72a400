//! Monte Carlo Lyapunov exponents from renormalized transfer-matrix products.
//!
//! Products are accumulated in the fixed [`EigenFrame`] and mapped back to the
//! standard basis only when a norm is read out. At phases in `{0, π}` the frame
//! factors are exactly diagonal or anti-diagonal, so critical products keep
//! their structure instead of drifting under rounding.

mod classify;
mod invariant;

pub use classify::*;
pub use invariant::*;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cabs, Mat2C, C64};
use crate::measure::PhaseMeasure;
use crate::model::{transfer_matrix, DisorderParam, EigenFrame};
use crate::stats::MeanEstimate;
use crate::stream::{RealizationStream, StreamMode};
use crate::torus::TorusAngle;

/// Finite measures with at most this many atoms use a precomputed factor table.
const TABLE_MAX_ATOMS: usize = 64;
/// Scale accumulator is folded into the log sum outside `[1/LIM, LIM]`.
const SCALE_LIM: f64 = 1e100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Anderson,
    Dimer,
}

impl Model {
    pub fn stream_mode(self) -> StreamMode {
        match self {
            Model::Anderson => StreamMode::Independent,
            Model::Dimer => StreamMode::Dimer,
        }
    }
}

/// A random operator family: model, phase law and disorder.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub model: Model,
    pub measure: PhaseMeasure,
    pub disorder: DisorderParam,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub lambda: TorusAngle,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub realizations: usize,
}

impl LyapunovEstimate {
    pub fn combined_stderr(&self, other: &LyapunovEstimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChainOptions {
    /// Step counts (ascending, each `<= n`) at which `ln‖T_k‖` is recorded.
    pub checkpoints: Vec<usize>,
    pub track_sup: bool,
    pub history: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainRun {
    pub log_norm: f64,
    pub at_checkpoints: Vec<f64>,
    /// `max_{1 <= k <= n} ln‖T_k‖`, or NaN when not tracked.
    pub sup_log_norm: f64,
    /// `ln‖T_k‖` for `k = 1..=n`.
    pub history: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub n: usize,
    pub gamma: LyapunovEstimate,
    /// `(ln‖T_n‖)² / n` averaged over realizations.
    pub second_moment: MeanEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderStats {
    pub rungs: Vec<Rung>,
    /// Largest partial log-norm seen over all realizations and steps.
    pub sup_log_norm: f64,
}

enum Factors {
    Table { k: usize, mats: Vec<Mat2C> },
    Direct,
}

/// Draws frame factors `P⁻¹ T(θ+λ, η+λ) P` from a stream.
pub(crate) struct Kernel<'a> {
    ens: &'a Ensemble,
    frame: EigenFrame,
    lambda: TorusAngle,
    factors: Factors,
}

impl<'a> Kernel<'a> {
    fn new(ens: &'a Ensemble, lambda: TorusAngle) -> Self {
        let frame = EigenFrame::new(ens.disorder);
        let factors = match ens.measure.atoms() {
            Some(atoms) if atoms.len() <= TABLE_MAX_ATOMS => {
                let mut mats = Vec::with_capacity(atoms.len() * atoms.len());
                for a in atoms {
                    for b in atoms {
                        mats.push(frame.transfer(a.angle + lambda, b.angle + lambda));
                    }
                }
                Factors::Table { k: atoms.len(), mats }
            }
            _ => Factors::Direct,
        };
        Kernel { ens, frame, lambda, factors }
    }

    #[inline]
    fn next(&self, s: &mut RealizationStream) -> Mat2C {
        match &self.factors {
            Factors::Table { k, mats } => {
                let (i, j) = s.next_atom_pair(&self.ens.measure);
                mats[i * k + j]
            }
            Factors::Direct => {
                let (th, et) = s.next_pair(&self.ens.measure);
                self.frame.transfer(th + self.lambda, et + self.lambda)
            }
        }
    }

    /// `ln‖P m P⁻¹‖` for the renormalized frame product `m`.
    #[inline]
    fn readout(&self, m: &Mat2C) -> f64 {
        if m.a12 == C64::default() && m.a21 == C64::default() && m.a11 == m.a22 {
            // scalar matrices are basis independent
            return cabs(m.a11).ln();
        }
        self.frame.to_standard(m).norm().ln()
    }

    fn run(&self, s: &mut RealizationStream, n: usize, opts: &ChainOptions) -> ChainRun {
        let mut m = Mat2C::IDENTITY;
        let mut log_acc = 0.0;
        let mut scale = 1.0;
        let per_step = opts.track_sup || opts.history;
        let mut sup = if opts.track_sup { f64::NEG_INFINITY } else { f64::NAN };
        let mut history = opts.history.then(|| Vec::with_capacity(n));
        let mut at_checkpoints = Vec::with_capacity(opts.checkpoints.len());
        let mut next_cp = opts.checkpoints.iter().peekable();
        let mut log_norm = 0.0;
        for step in 1..=n {
            m = self.next(s) * m;
            let sz = m.norm();
            m = m.scale_real(1.0 / sz);
            scale *= sz;
            if !(1.0 / SCALE_LIM..=SCALE_LIM).contains(&scale) {
                log_acc += scale.ln();
                scale = 1.0;
            }
            let at_cp = next_cp.peek().is_some_and(|&&c| c == step);
            if per_step || at_cp || step == n {
                let value = log_acc + scale.ln() + self.readout(&m);
                if opts.track_sup {
                    sup = sup.max(value);
                }
                if let Some(h) = history.as_mut() {
                    h.push(value);
                }
                while next_cp.peek().is_some_and(|&&c| c == step) {
                    at_checkpoints.push(value);
                    next_cp.next();
                }
                if step == n {
                    log_norm = value;
                }
            }
        }
        ChainRun { log_norm, at_checkpoints, sup_log_norm: sup, history }
    }
}

fn check_chain(n: usize, realizations: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("chain length n must be >= 1".into()));
    }
    if realizations < 2 {
        return Err(Error::InvalidParameter("need at least 2 realizations".into()));
    }
    Ok(())
}

impl Ensemble {
    pub fn anderson(measure: PhaseMeasure, disorder: DisorderParam) -> Self {
        Ensemble { model: Model::Anderson, measure, disorder }
    }

    pub fn dimer(measure: PhaseMeasure, disorder: DisorderParam) -> Self {
        Ensemble { model: Model::Dimer, measure, disorder }
    }

    pub fn stream(&self, seed: u64, index: u64) -> RealizationStream {
        RealizationStream::new(seed, index, self.model.stream_mode())
    }

    /// Standard-basis factor `T(θ+λ, η+λ)` for the next two sites.
    pub fn next_transfer(&self, s: &mut RealizationStream, lambda: TorusAngle) -> Mat2C {
        let (th, et) = s.next_pair(&self.measure);
        transfer_matrix(th + lambda, et + lambda, self.disorder)
    }

    fn check_stream(&self, s: &RealizationStream) -> Result<()> {
        let expected = self.model.stream_mode();
        if s.mode() != expected {
            return Err(Error::StreamMode { expected: expected.name(), found: s.mode().name() });
        }
        Ok(())
    }

    /// One chain of `n` two-step factors drawn from `stream`.
    pub fn run_chain(
        &self,
        stream: &mut RealizationStream,
        lambda: TorusAngle,
        n: usize,
        opts: &ChainOptions,
    ) -> Result<ChainRun> {
        self.check_stream(stream)?;
        if n == 0 {
            return Err(Error::InvalidParameter("chain length n must be >= 1".into()));
        }
        if opts.checkpoints.windows(2).any(|w| w[0] > w[1]) || opts.checkpoints.last().is_some_and(|&c| c > n) {
            return Err(Error::InvalidParameter("checkpoints must be ascending and <= n".into()));
        }
        Ok(Kernel::new(self, lambda).run(stream, n, opts))
    }

    fn par_runs(
        &self,
        lambda: TorusAngle,
        n: usize,
        realizations: usize,
        seed: u64,
        opts: &ChainOptions,
    ) -> Vec<ChainRun> {
        let kernel = Kernel::new(self, lambda);
        (0..realizations).into_par_iter().map(|i| kernel.run(&mut self.stream(seed, i as u64), n, opts)).collect()
    }

    pub fn estimate(&self, lambda: TorusAngle, n: usize, realizations: usize, seed: u64) -> Result<LyapunovEstimate> {
        check_chain(n, realizations)?;
        let runs = self.par_runs(lambda, n, realizations, seed, &ChainOptions::default());
        let xs: Vec<f64> = runs.iter().map(|r| r.log_norm / n as f64).collect();
        let e = MeanEstimate::of(&xs);
        Ok(LyapunovEstimate { lambda, mean: e.mean, stderr: e.stderr, n, realizations })
    }

    /// Estimate of `E[(ln‖T_n‖)²] / n`.
    pub fn second_moment(&self, lambda: TorusAngle, n: usize, realizations: usize, seed: u64) -> Result<MeanEstimate> {
        check_chain(n, realizations)?;
        let runs = self.par_runs(lambda, n, realizations, seed, &ChainOptions::default());
        let xs: Vec<f64> = runs.iter().map(|r| r.log_norm * r.log_norm / n as f64).collect();
        Ok(MeanEstimate::of(&xs))
    }

    /// Statistics at several chain lengths from one set of chains, each run to
    /// the longest rung.
    pub fn ladder(
        &self,
        lambda: TorusAngle,
        rungs: &[usize],
        realizations: usize,
        seed: u64,
        track_sup: bool,
    ) -> Result<LadderStats> {
        let mut sorted = rungs.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let n = *sorted.last().ok_or_else(|| Error::InvalidParameter("empty ladder".into()))?;
        check_chain(sorted[0], realizations)?;
        let opts = ChainOptions { checkpoints: sorted.clone(), track_sup, history: false };
        let runs = self.par_runs(lambda, n, realizations, seed, &opts);
        let rungs = sorted
            .iter()
            .enumerate()
            .map(|(k, &nk)| {
                let ls: Vec<f64> = runs.iter().map(|r| r.at_checkpoints[k]).collect();
                let g = MeanEstimate::of(&ls.iter().map(|l| l / nk as f64).collect::<Vec<_>>());
                let m2 = MeanEstimate::of(&ls.iter().map(|l| l * l / nk as f64).collect::<Vec<_>>());
                Rung {
                    n: nk,
                    gamma: LyapunovEstimate { lambda, mean: g.mean, stderr: g.stderr, n: nk, realizations },
                    second_moment: m2,
                }
            })
            .collect();
        let sup_log_norm =
            if track_sup { runs.iter().map(|r| r.sup_log_norm).fold(f64::NEG_INFINITY, f64::max) } else { f64::NAN };
        Ok(LadderStats { rungs, sup_log_norm })
    }

    /// One estimate per grid point; point `i` uses its own derived seed
    /// (point 0 uses `seed` itself).
    pub fn sweep(
        &self,
        grid: &[TorusAngle],
        n: usize,
        realizations: usize,
        seed: u64,
    ) -> Result<Vec<LyapunovEstimate>> {
        if grid.is_empty() {
            return Err(Error::InvalidParameter("empty quasi-energy grid".into()));
        }
        grid.iter().enumerate().map(|(i, &lam)| self.estimate(lam, n, realizations, point_seed(seed, i))).collect()
    }
}

/// Seed used for grid point `i` of a sweep.
pub fn point_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogNorm {
    pub log_norm: f64,
    pub history: Option<Vec<f64>>,
}

/// `ln‖T_n‖` along one stream; the stream mode selects the model.
pub fn renormalized_log_norm(
    stream: &mut RealizationStream,
    lambda: TorusAngle,
    mu: &PhaseMeasure,
    d: DisorderParam,
    n: usize,
    history: bool,
) -> Result<LogNorm> {
    let model = match stream.mode() {
        StreamMode::Independent => Model::Anderson,
        StreamMode::Dimer => Model::Dimer,
    };
    let ens = Ensemble { model, measure: mu.clone(), disorder: d };
    let run = ens.run_chain(stream, lambda, n, &ChainOptions { history, ..Default::default() })?;
    Ok(LogNorm { log_norm: run.log_norm, history: run.history })
}

pub fn estimate_lyapunov(
    lambda: TorusAngle,
    mu: &PhaseMeasure,
    d: DisorderParam,
    n: usize,
    realizations: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    Ensemble::anderson(mu.clone(), d).estimate(lambda, n, realizations, seed)
}

pub fn estimate_second_moment(
    lambda: TorusAngle,
    mu: &PhaseMeasure,
    d: DisorderParam,
    n: usize,
    realizations: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    Ensemble::anderson(mu.clone(), d).second_moment(lambda, n, realizations, seed)
}

pub fn sweep(
    grid: &[TorusAngle],
    mu: &PhaseMeasure,
    d: DisorderParam,
    n: usize,
    realizations: usize,
    seed: u64,
) -> Result<Vec<LyapunovEstimate>> {
    Ensemble::anderson(mu.clone(), d).sweep(grid, n, realizations, seed)
}
