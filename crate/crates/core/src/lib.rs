//! Transfer-matrix laboratory for the unitary Anderson model `U = D S` with
//! random phases, and its dimer variant.
//!
//! The free operator `S` is five-diagonal and unitary with coupling `t`
//! (`r² + t² = 1`). Generalized eigenvectors of `U` at quasi-energy `λ` are
//! propagated two sites at a time by 2×2 transfer matrices; the growth rate
//! of their products is the Lyapunov exponent.

pub mod bernoulli_pi;
pub mod dimer;
pub mod error;
pub mod furstenberg;
pub mod linalg;
pub mod lyapunov;
pub mod measure;
pub mod model;
pub mod stats;
pub mod stream;
pub mod torus;

pub use bernoulli_pi::{
    chain_vs_transfer_consistency, exact_moments, gamma_upper_bound, markov_step, sample_chain_moments, MarkovState,
    PiBernoulliParams, PiDraw,
};
pub use dimer::{
    dimer_boundedness_check, dimer_conditioning_bound, dimer_gamma_critical, dimer_sweep, dimer_transfer_product,
    DimerParams, SpectrumCase,
};
pub use error::{Error, Result};
pub use furstenberg::{
    build_witness, dimer_conjugation, dimer_critical_set, dimer_noncompact_orbit_witness,
    general_irreducibility_witness, pi_case_irreducibility, CriticalSet, DimerConjugation, GroupWitness, Regime,
};
pub use linalg::{act, proj_distance, Mat2C, ProjPoint, Vec2C, C64};
pub use lyapunov::{
    classify_quasi_energy, empirical_invariant_measure, estimate_lyapunov, estimate_second_moment,
    furstenberg_cross_check, phi, renormalized_log_norm, sweep, AnomalyReport, Budget, Classification, Ensemble,
    LyapunovEstimate, Model, Thresholds,
};
pub use measure::PhaseMeasure;
pub use model::{
    almost_sure_spectrum, basis_change_a, s_matrix_window, spectral_arc, transfer_matrix, transfer_matrix_shifted,
    verify_eigen_recursion, DisorderParam, EigenFrame, SpectralArc, Stencil,
};
pub use stats::MeanEstimate;
pub use stream::{RealizationStream, StreamMode};
pub use torus::TorusAngle;
