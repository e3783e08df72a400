//! Sweep, single-point estimate and algebraic diagnostics.

use serde::Serialize;
use ulyap::furstenberg::{dimer_irreducibility, dimer_regime, DimerIrreducibility, OrbitGenerator};
use ulyap::lyapunov::point_seed;
use ulyap::{
    build_witness, dimer_critical_set, general_irreducibility_witness, pi_case_irreducibility, Budget, CriticalSet,
    Model, ProjPoint, Regime, Thresholds, TorusAngle,
};

use crate::config::{AngleSpec, GridSpec, Resolved, RunConfig};
use crate::output::{Report, SweepRow};
use crate::CliError;

/// Grid points closer than this to a known zero of the exponent are flagged.
pub const NEAR_CRITICAL_TOL: f64 = 1e-6;

fn row(res: &Resolved, cfg: &RunConfig, i: usize, lambda: TorusAngle) -> Result<SweepRow, CliError> {
    let seed = point_seed(cfg.seed, i);
    let (est, classification) = if cfg.classify {
        let budget = Budget { ladder: res.ladder.clone(), realizations: cfg.realizations, seed };
        let rep = res.ensemble.classify(lambda, &Thresholds::default(), &budget)?;
        (rep.gamma_hat, rep.classification.as_str().to_string())
    } else {
        (res.ensemble.estimate(lambda, cfg.n, cfg.realizations, seed)?, "unclassified".to_string())
    };
    Ok(SweepRow {
        lambda: lambda.value(),
        gamma_mean: est.mean,
        gamma_stderr: est.stderr,
        n: est.n,
        realizations: est.realizations,
        classification,
        near_critical: res.critical.iter().any(|c| c.distance(lambda) <= NEAR_CRITICAL_TOL),
    })
}

/// One row per grid point. Point `i` draws from its own derived seed, so rows
/// do not depend on thread count or on the rest of the grid.
pub fn sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    let res = cfg.resolve()?;
    let total = res.grid.len();
    let rows = res
        .grid
        .iter()
        .enumerate()
        .map(|(i, &lam)| {
            eprintln!("[{}/{total}] lambda = {:.6}", i + 1, lam.value());
            row(&res, cfg, i, lam)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report { command: "sweep".into(), seed: cfg.seed, config: cfg.clone(), rows })
}

/// A sweep over the single point `lambda`.
pub fn estimate(cfg: &RunConfig, lambda: &AngleSpec) -> Result<Report, CliError> {
    let single = RunConfig { grid: GridSpec::List { values: vec![lambda.clone()] }, ..cfg.clone() };
    let mut report = sweep(&single)?;
    report.command = "estimate".into();
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairWitness {
    pub theta: f64,
    pub eta: f64,
    pub trace_k: f64,
    pub trace_k_closed_form: f64,
    pub noncompact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitCheck {
    /// Chart coordinates of the probed direction.
    pub direction: (f64, f64),
    pub generator: Option<OrbitGenerator>,
    pub min_distance: f64,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Irreducibility {
    /// Antipodal atoms: three images of each eigenvector of `L`.
    Antipodal { theta: f64, eta: f64, distinct_images: bool, min_distance: f64, degenerate: bool },
    /// Generic pair: orbit of probe directions under `D` or `E`.
    Generic { theta: f64, eta: f64, probes: Vec<OrbitCheck> },
}

#[derive(Clone, Debug, Serialize)]
pub struct DimerDiagnostics {
    pub critical_set: CriticalSet,
    pub trace_a: f64,
    pub regime_a: Regime,
    pub irreducibility: DimerIrreducibility,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnosis {
    pub lambda: f64,
    pub model: Model,
    pub t: f64,
    pub pairs: Vec<PairWitness>,
    pub irreducibility: Vec<Irreducibility>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimer: Option<DimerDiagnostics>,
}

fn probes(d: ulyap::DisorderParam) -> Vec<ProjPoint> {
    let q = d.r() / d.t();
    vec![
        ProjPoint::from_real(1.0, 0.0).unwrap(),
        ProjPoint::from_real(0.0, 1.0).unwrap(),
        ProjPoint::from_real(1.0, q).unwrap(),
        ProjPoint::from_chart(0.7, 0.4),
    ]
}

/// Group-theoretic witnesses for the support of a finite measure at `lambda`.
pub fn diagnose(cfg: &RunConfig, lambda: &AngleSpec) -> Result<Diagnosis, CliError> {
    let d = cfg.disorder()?;
    let mu = cfg.phase_measure()?;
    let lam = lambda.resolve()?;
    let support = mu.support().ok_or_else(|| CliError::Config("diagnose requires a finite-support measure".into()))?;
    if support.len() < 2 {
        return Err(CliError::Config("non-trivial measure required (support needs two or more points)".into()));
    }
    let mut pairs = Vec::new();
    let mut irreducibility = Vec::new();
    for (i, &a) in support.iter().enumerate() {
        for &b in &support[i + 1..] {
            let w = build_witness(a + lam, b + lam, d)?;
            pairs.push(PairWitness {
                theta: a.value(),
                eta: b.value(),
                trace_k: w.trace_k,
                trace_k_closed_form: w.trace_k_closed_form,
                noncompact: w.noncompact,
            });
            if a.distance(b + TorusAngle::PI) <= 1e-12 {
                let pi = pi_case_irreducibility(lam, a, d);
                irreducibility.push(Irreducibility::Antipodal {
                    theta: a.value(),
                    eta: b.value(),
                    distinct_images: pi.distinct_images,
                    min_distance: pi.min_distance,
                    degenerate: pi.degenerate,
                });
            } else {
                let checks = probes(d)
                    .iter()
                    .map(|v| match general_irreducibility_witness(lam, a, b, d, v) {
                        Ok(w) => OrbitCheck {
                            direction: v.chart(),
                            generator: Some(w.generator),
                            min_distance: w.min_distance,
                            certified: true,
                            reason: None,
                        },
                        Err(e) => OrbitCheck {
                            direction: v.chart(),
                            generator: None,
                            min_distance: 0.0,
                            certified: false,
                            reason: Some(e.to_string()),
                        },
                    })
                    .collect();
                irreducibility.push(Irreducibility::Generic { theta: a.value(), eta: b.value(), probes: checks });
            }
        }
    }
    let dimer = match (cfg.model, &support[..]) {
        (Model::Dimer, &[a, b]) => {
            let (trace_a, regime_a) = dimer_regime(a + lam, d);
            Some(DimerDiagnostics {
                critical_set: dimer_critical_set(a, b, d)?,
                trace_a,
                regime_a,
                irreducibility: dimer_irreducibility(a + lam, b + lam, d),
            })
        }
        (Model::Dimer, _) => {
            return Err(CliError::Config("dimer diagnostics need exactly two atoms".into()));
        }
        _ => None,
    };
    Ok(Diagnosis { lambda: lam.value(), model: cfg.model, t: d.t(), pairs, irreducibility, dimer })
}
