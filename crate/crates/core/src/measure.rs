//! Single-site phase distributions.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::torus::TorusAngle;

/// Probabilities of a finite measure must sum to one within this.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub angle: TorusAngle,
    pub prob: f64,
}

type Quantile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Finite { atoms: Vec<Atom>, cumulative: Vec<f64> },
    Uniform,
    Custom { name: String, quantile: Quantile },
}

/// Law of a single random phase.
#[derive(Clone)]
pub struct PhaseMeasure {
    kind: Kind,
}

impl PhaseMeasure {
    pub fn finite(atoms: Vec<(TorusAngle, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let mut total = 0.0;
        for (i, &(a, p)) in atoms.iter().enumerate() {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::InvalidMeasure(format!("atom {} has probability {p}", a.value())));
            }
            if atoms[..i].iter().any(|(b, _)| b.same_as(a)) {
                return Err(Error::InvalidMeasure(format!("duplicate atom {}", a.value())));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidMeasure(format!("probabilities sum to {total}")));
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = atoms
            .iter()
            .map(|&(_, p)| {
                acc += p;
                acc
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        let atoms = atoms.into_iter().map(|(angle, prob)| Atom { angle, prob }).collect();
        Ok(PhaseMeasure { kind: Kind::Finite { atoms, cumulative } })
    }

    pub fn dirac(a: TorusAngle) -> Self {
        PhaseMeasure::finite(vec![(a, 1.0)]).expect("a single unit atom is valid")
    }

    /// `p δ_a + (1-p) δ_b` with `0 < p < 1`.
    pub fn bernoulli(a: TorusAngle, p: f64, b: TorusAngle) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidMeasure(format!("Bernoulli weight {p} outside (0, 1)")));
        }
        PhaseMeasure::finite(vec![(a, p), (b, 1.0 - p)])
    }

    pub fn uniform() -> Self {
        PhaseMeasure { kind: Kind::Uniform }
    }

    /// A samplable measure given by its quantile function on `[0, 1)`.
    pub fn custom(name: impl Into<String>, quantile: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        PhaseMeasure { kind: Kind::Custom { name: name.into(), quantile: Arc::new(quantile) } }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::Finite { .. } => "finite",
            Kind::Uniform => "uniform",
            Kind::Custom { .. } => "custom",
        }
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.kind {
            Kind::Finite { atoms, .. } => Some(atoms),
            _ => None,
        }
    }

    pub fn support(&self) -> Option<Vec<TorusAngle>> {
        self.atoms().map(|a| a.iter().map(|x| x.angle).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.atoms().is_some()
    }

    /// Support has at least two points.
    pub fn is_nontrivial(&self) -> bool {
        self.atoms().is_none_or(|a| a.len() >= 2)
    }

    /// Atom index selected by a uniform variate `u ∈ [0, 1)`.
    pub fn atom_index(&self, u: f64) -> Option<usize> {
        match &self.kind {
            Kind::Finite { cumulative, .. } => {
                Some(cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1))
            }
            _ => None,
        }
    }

    /// Phase selected by a uniform variate `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> TorusAngle {
        match &self.kind {
            Kind::Finite { atoms, .. } => atoms[self.atom_index(u).unwrap()].angle,
            Kind::Uniform => TorusAngle::new(TAU * u),
            Kind::Custom { quantile, .. } => TorusAngle::new(quantile(u)),
        }
    }
}

impl fmt::Debug for PhaseMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Finite { atoms, .. } => f.debug_tuple("Finite").field(atoms).finish(),
            Kind::Uniform => f.write_str("Uniform"),
            Kind::Custom { name, .. } => f.debug_tuple("Custom").field(name).finish(),
        }
    }
}
