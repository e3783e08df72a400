use serde::{Deserialize, Serialize};

use super::{Ensemble, LyapunovEstimate, Rung};
use crate::error::Result;
use crate::measure::PhaseMeasure;
use crate::model::DisorderParam;
use crate::torus::TorusAngle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Positive,
    DiffusiveCritical,
    BoundedCritical,
    Inconclusive,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Positive => "positive",
            Classification::DiffusiveCritical => "diffusive-critical",
            Classification::BoundedCritical => "bounded-critical",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Positive needs `γ̂ > max(k_stderr·stderr, gamma_floor)`.
    pub k_stderr: f64,
    pub gamma_floor: f64,
    /// Allowed relative change of `γ̂` between the two longest rungs.
    pub gamma_drift: f64,
    /// Allowed relative spread of the second moment per step across rungs.
    pub moment_drift: f64,
    /// Allowed relative spread of `γ̂·√n` across rungs.
    pub sqrt_n_drift: f64,
    /// Bounded needs every partial `ln‖T_k‖` below this.
    pub bounded_log: f64,
    /// Rung-to-rung differences within this many combined standard errors
    /// count as stable whatever their relative size.
    pub noise_sigmas: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            k_stderr: 5.0,
            gamma_floor: 1e-3,
            gamma_drift: 0.1,
            moment_drift: 0.1,
            sqrt_n_drift: 0.15,
            bounded_log: 50f64.ln(),
            noise_sigmas: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub ladder: Vec<usize>,
    pub realizations: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { ladder: vec![1_000, 10_000, 100_000], realizations: 1_000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub lambda: TorusAngle,
    /// Estimate at the longest rung.
    pub gamma_hat: LyapunovEstimate,
    pub second_moment_per_n: f64,
    pub sup_norm_log: f64,
    pub classification: Classification,
    pub ladder: Vec<Rung>,
}

/// `|a - b|` is small relative to `scale` or within noise.
fn stable(a: f64, b: f64, rel: f64, scale: f64, noise: f64) -> bool {
    (a - b).abs() <= (rel * scale.abs()).max(noise)
}

fn all_pairs_stable(values: &[(f64, f64)], rel: f64, sigmas: f64) -> bool {
    let mean = values.iter().map(|v| v.0).sum::<f64>() / values.len() as f64;
    values
        .iter()
        .enumerate()
        .all(|(i, a)| values[i + 1..].iter().all(|b| stable(a.0, b.0, rel, mean, sigmas * a.1.hypot(b.1))))
}

/// Deterministic regime decision from ladder statistics. Checked in order:
/// positive, bounded, diffusive.
pub fn classify_ladder(rungs: &[Rung], sup_log_norm: f64, th: &Thresholds) -> Classification {
    let Some(top) = rungs.last() else {
        return Classification::Inconclusive;
    };
    let g = &top.gamma;
    let gamma_stable = match rungs.len() {
        0 | 1 => true,
        k => {
            let prev = &rungs[k - 2].gamma;
            stable(g.mean, prev.mean, th.gamma_drift, g.mean, th.noise_sigmas * g.combined_stderr(prev))
        }
    };
    if g.mean > (th.k_stderr * g.stderr).max(th.gamma_floor) && gamma_stable {
        return Classification::Positive;
    }
    if sup_log_norm < th.bounded_log {
        return Classification::BoundedCritical;
    }
    if rungs.len() >= 2 {
        let m2: Vec<(f64, f64)> = rungs.iter().map(|r| (r.second_moment.mean, r.second_moment.stderr)).collect();
        let positive = m2.iter().all(|&(m, se)| m > th.k_stderr * se && m > 0.0);
        let scaled: Vec<(f64, f64)> = rungs
            .iter()
            .map(|r| {
                let s = (r.n as f64).sqrt();
                (r.gamma.mean * s, r.gamma.stderr * s)
            })
            .collect();
        if positive
            && all_pairs_stable(&m2, th.moment_drift, th.noise_sigmas)
            && all_pairs_stable(&scaled, th.sqrt_n_drift, th.noise_sigmas)
        {
            return Classification::DiffusiveCritical;
        }
    }
    Classification::Inconclusive
}

impl Ensemble {
    pub fn classify(&self, lambda: TorusAngle, th: &Thresholds, budget: &Budget) -> Result<AnomalyReport> {
        let stats = self.ladder(lambda, &budget.ladder, budget.realizations, budget.seed, true)?;
        let top = *stats.rungs.last().unwrap();
        Ok(AnomalyReport {
            lambda,
            gamma_hat: top.gamma,
            second_moment_per_n: top.second_moment.mean,
            sup_norm_log: stats.sup_log_norm,
            classification: classify_ladder(&stats.rungs, stats.sup_log_norm, th),
            ladder: stats.rungs,
        })
    }
}

pub fn classify_quasi_energy(
    lambda: TorusAngle,
    mu: &PhaseMeasure,
    d: DisorderParam,
    th: &Thresholds,
    budget: &Budget,
) -> Result<AnomalyReport> {
    Ensemble::anderson(mu.clone(), d).classify(lambda, th, budget)
}
