//! Exact-identity suites behind `ulyap verify`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt::Write as _;
use std::time::Instant;

use ulyap::furstenberg::dimer_regime;
use ulyap::model::verify_eigen_recursion_with;
use ulyap::{
    basis_change_a, build_witness, chain_vs_transfer_consistency, dimer_conjugation, transfer_matrix, DisorderParam,
    Mat2C, PhaseMeasure, PiBernoulliParams, RealizationStream, Regime, Stencil, StreamMode, TorusAngle, C64,
};

/// Disorder values every verify run covers, on top of the configured one.
pub const DEFAULT_TS: [f64; 3] = [0.3, FRAC_1_SQRT_2, 0.9];

pub const DET_TOL: f64 = 1e-12;
pub const TABLE_TOL: f64 = 1e-12;
pub const TRACE_K_TOL: f64 = 1e-10;
pub const RECURSION_TOL: f64 = 1e-10;
pub const CHAIN_TOL: f64 = 1e-8;
pub const F_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub ts: Vec<f64>,
    /// Perturbs one stencil entry; the eigen-recursion suite must then fail.
    pub corrupt_stencil: bool,
}

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: usize,
    /// Largest error-to-tolerance ratio seen.
    pub worst_ratio: f64,
    pub counterexample: Option<String>,
    pub seconds: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none() && self.checks > 0
    }
}

type Suite<'a> = (&'static str, Box<dyn Fn(&mut Tracker) + 'a>);

#[derive(Default)]
struct Tracker {
    checks: usize,
    worst: f64,
    first: Option<String>,
}

impl Tracker {
    /// Records `err <= tol`; `describe` gives inputs, observed and expected.
    fn check(&mut self, err: f64, tol: f64, describe: impl FnOnce() -> String) {
        self.checks += 1;
        let ratio = err / tol;
        if ratio.is_nan() || ratio > self.worst {
            self.worst = if ratio.is_nan() { f64::INFINITY } else { ratio };
        }
        if err.partial_cmp(&tol).is_none_or(|o| o.is_gt()) && self.first.is_none() {
            self.first = Some(format!("{} (error {err:.3e} > tolerance {tol:.1e})", describe()));
        }
    }
}

fn angle_grid(k: usize, offset: f64) -> impl Iterator<Item = TorusAngle> + Clone {
    (0..k).map(move |i| TorusAngle::new(TAU * i as f64 / k as f64 + offset))
}

fn fmt_c(z: C64) -> String {
    format!("{:.12}{:+.12}i", z.re, z.im)
}

fn fmt_m(m: &Mat2C) -> String {
    let e = [m.a11, m.a12, m.a21, m.a22].map(fmt_c);
    format!("[[{}, {}], [{}, {}]]", e[0], e[1], e[2], e[3])
}

fn det_identity(ts: &[DisorderParam], tr: &mut Tracker) {
    for &d in ts {
        for th in angle_grid(48, 0.011) {
            for et in angle_grid(48, 0.023) {
                let m = transfer_matrix(th, et, d);
                let (got, want) = (m.det(), (th - et).cis());
                let tol = DET_TOL * m.norm().powi(2).max(1.0);
                tr.check((got - want).norm(), tol, || {
                    format!("t={}, theta={th}, eta={et}: det {} vs {}", d.t(), fmt_c(got), fmt_c(want))
                });
            }
        }
    }
}

fn a_table(ts: &[DisorderParam], tr: &mut Tracker) {
    let (z, p) = (TorusAngle::ZERO, TorusAngle::PI);
    for &d in ts {
        let rho = d.rho();
        for (th, et, want) in [
            (z, z, Mat2C::real(-1.0, 0.0, 0.0, -1.0)),
            (p, p, Mat2C::real(rho, 0.0, 0.0, 1.0 / rho)),
            (p, z, Mat2C::real(0.0, -1.0 / rho, -rho, 0.0)),
            (z, p, Mat2C::real(0.0, 1.0, 1.0, 0.0)),
        ] {
            let got = basis_change_a(th, et, d);
            let tol = TABLE_TOL * want.norm().max(1.0);
            tr.check(got.max_abs_diff(&want), tol, || {
                format!("t={}, (theta, eta)=({th}, {et}): {} vs {}", d.t(), fmt_m(&got), fmt_m(&want))
            });
        }
    }
}

fn trace_k(ts: &[DisorderParam], tr: &mut Tracker) {
    for &d in ts {
        for th in angle_grid(20, 0.0) {
            for et in angle_grid(20, 0.0) {
                if th.same_as(et) {
                    continue;
                }
                let w = match build_witness(th, et, d) {
                    Ok(w) => w,
                    Err(e) => {
                        tr.check(f64::INFINITY, TRACE_K_TOL, || format!("t={}, ({th}, {et}): {e}", d.t()));
                        continue;
                    }
                };
                // absolute below trace 100, relative above: the trace grows like t⁻⁴
                let tol = TRACE_K_TOL * (w.trace_k_closed_form / 100.0).max(1.0);
                let err = if w.noncompact { (w.trace_k - w.trace_k_closed_form).abs() } else { f64::INFINITY };
                tr.check(err, tol, || {
                    format!(
                        "t={}, ({th}, {et}): tr K {:.15} vs closed form {:.15}, noncompact {}",
                        d.t(),
                        w.trace_k,
                        w.trace_k_closed_form,
                        w.noncompact
                    )
                });
            }
        }
    }
}

fn eigen_recursion(ts: &[DisorderParam], corrupt: bool, tr: &mut Tracker) {
    let mu = PhaseMeasure::uniform();
    for &d in ts {
        let mut stencil = Stencil::new(d);
        if corrupt {
            stencil = stencil.with_entry(true, 1, stencil.odd_row[1] + 1e-3);
        }
        for seed in 0..100u64 {
            let mut s = RealizationStream::new(seed, 0, StreamMode::Independent);
            let phases: Vec<TorusAngle> = (0..100).map(|_| s.next_phase(&mu)).collect();
            let lam = TorusAngle::new(TAU * s.next_uniform());
            let c0 = [C64::new(s.next_uniform() - 0.5, s.next_uniform()), C64::new(s.next_uniform(), -0.3)];
            match verify_eigen_recursion_with(&stencil, &phases, lam, d, c0) {
                Ok(res) => tr.check(res, RECURSION_TOL, || {
                    format!("t={}, seed={seed}, lambda={lam}: relative residual {res:.3e}, expected 0", d.t())
                }),
                Err(e) => tr.check(f64::INFINITY, RECURSION_TOL, || format!("t={}, seed={seed}: {e}", d.t())),
            }
        }
    }
}

fn chain_vs_transfer(ts: &[DisorderParam], tr: &mut Tracker) {
    for &d in ts {
        for p in [0.3, 0.5, 0.8] {
            let params = PiBernoulliParams::new(TorusAngle::ZERO, p, d).expect("valid π-Bernoulli parameters");
            for seed in 0..20u64 {
                let mut s = RealizationStream::new(seed, 0, StreamMode::Independent);
                match chain_vs_transfer_consistency(&mut s, &params, 300) {
                    Ok(dev) => tr.check(dev, CHAIN_TOL, || {
                        format!("t={}, p={p}, seed={seed}: |ln‖Λu‖ - |x| ln ρ| = {dev:.3e}, expected 0", d.t())
                    }),
                    Err(e) => tr.check(f64::INFINITY, CHAIN_TOL, || format!("t={}, p={p}, seed={seed}: {e}", d.t())),
                }
            }
        }
    }
}

fn f_conjugation(ts: &[DisorderParam], tr: &mut Tracker) {
    for &d in ts {
        for th in angle_grid(24, 0.013) {
            let (trace, regime) = dimer_regime(th, d);
            // the closed form divides by ρ - 1/ρ, which vanishes at |trace| = 2
            if regime == Regime::Parabolic || (trace.abs() - 2.0).abs() < 1e-6 {
                continue;
            }
            for et in angle_grid(24, 0.029) {
                match dimer_conjugation(th, et, d) {
                    Ok(c) => {
                        let tol = F_TOL * c.f.norm().max(1.0);
                        tr.check(c.f.max_abs_diff(&c.f_formula), tol, || {
                            format!(
                                "t={}, ({th}, {et}): N F N⁻¹ = {} vs formula {}",
                                d.t(),
                                fmt_m(&c.f),
                                fmt_m(&c.f_formula)
                            )
                        })
                    }
                    Err(e) => tr.check(f64::INFINITY, F_TOL, || format!("t={}, ({th}, {et}): {e}", d.t())),
                }
            }
        }
    }
}

/// Runs every suite on `DEFAULT_TS` plus `opts.ts`.
pub fn run_suites(opts: &VerifyOptions) -> Result<Vec<SuiteResult>, ulyap::Error> {
    let mut ts: Vec<f64> = DEFAULT_TS.to_vec();
    for &t in &opts.ts {
        if !ts.contains(&t) {
            ts.push(t);
        }
    }
    let ds = ts.iter().map(|&t| DisorderParam::new(t)).collect::<Result<Vec<_>, _>>()?;
    let corrupt = opts.corrupt_stencil;
    let suites: [Suite<'_>; 6] = [
        ("det-identity", Box::new(|tr| det_identity(&ds, tr))),
        ("a-matrix-table", Box::new(|tr| a_table(&ds, tr))),
        ("trace-k", Box::new(|tr| trace_k(&ds, tr))),
        ("eigen-recursion", Box::new(|tr| eigen_recursion(&ds, corrupt, tr))),
        ("chain-vs-transfer", Box::new(|tr| chain_vs_transfer(&ds, tr))),
        ("f-conjugation", Box::new(|tr| f_conjugation(&ds, tr))),
    ];
    Ok(suites
        .iter()
        .map(|(name, run)| {
            let start = Instant::now();
            let mut tr = Tracker::default();
            run(&mut tr);
            SuiteResult {
                name,
                checks: tr.checks,
                worst_ratio: tr.worst,
                counterexample: tr.first,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect())
}

pub fn summary(results: &[SuiteResult]) -> String {
    let mut out = String::new();
    for r in results {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{status} {:<18} {:>6} checks  worst err/tol {:.2e}  {:.3}s",
            r.name, r.checks, r.worst_ratio, r.seconds
        );
        if let Some(c) = &r.counterexample {
            let _ = writeln!(out, "     first counterexample: {c}");
        }
    }
    out
}
