//! Run configuration: a TOML file plus command-line overrides.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use ulyap::torus::parse_angle;
use ulyap::{dimer_critical_set, DisorderParam, Ensemble, Model, PhaseMeasure, TorusAngle};

use crate::CliError;

/// An angle as written by the user: radians or a π-literal such as `"pi/2"`.
/// The original spelling is kept so configs round-trip unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Radians(f64),
    Literal(String),
}

impl AngleSpec {
    pub fn radians(&self) -> Result<f64, CliError> {
        match self {
            AngleSpec::Radians(x) if x.is_finite() => Ok(*x),
            AngleSpec::Radians(x) => Err(CliError::Config(format!("angle {x} is not finite"))),
            AngleSpec::Literal(s) => parse_angle(s).map_err(|e| CliError::Config(e.to_string())),
        }
    }

    pub fn resolve(&self) -> Result<TorusAngle, CliError> {
        self.radians().map(TorusAngle::new)
    }
}

impl fmt::Display for AngleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleSpec::Radians(x) => write!(f, "{x}"),
            AngleSpec::Literal(s) => f.write_str(s),
        }
    }
}

impl std::str::FromStr for AngleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_angle(s).map_err(|e| e.to_string())?;
        Ok(match s.trim().parse::<f64>() {
            Ok(x) => AngleSpec::Radians(x),
            Err(_) => AngleSpec::Literal(s.trim().to_string()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureSpec {
    Finite { atoms: Vec<AngleSpec>, probs: Vec<f64> },
    Uniform,
}

/// Quasi-energy grid: `count` evenly spaced points from `start` to `stop`
/// inclusive, or an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GridSpec {
    Range { start: AngleSpec, stop: AngleSpec, count: usize },
    List { values: Vec<AngleSpec> },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    pub t: f64,
    pub n: usize,
    pub realizations: usize,
    pub seed: u64,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Run the regime classifier at every grid point.
    #[serde(default)]
    pub classify: bool,
    /// Chain lengths for the classifier; the last rung must equal `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<usize>>,
    pub measure: MeasureSpec,
    pub grid: GridSpec,
}

impl Default for RunConfig {
    /// π-Bernoulli at `t = 1/√2`, swept over the full circle.
    fn default() -> Self {
        RunConfig {
            model: Model::Anderson,
            t: FRAC_1_SQRT_2,
            n: 10_000,
            realizations: 64,
            seed: 0,
            format: Format::Csv,
            output: None,
            threads: None,
            classify: false,
            ladder: None,
            measure: MeasureSpec::Finite {
                atoms: vec![AngleSpec::Radians(0.0), AngleSpec::Literal("pi".into())],
                probs: vec![0.5, 0.5],
            },
            grid: GridSpec::Range { start: AngleSpec::Radians(0.0), stop: AngleSpec::Literal("2pi".into()), count: 65 },
        }
    }
}

/// A validated configuration, ready to dispatch.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub ensemble: Ensemble,
    pub grid: Vec<TorusAngle>,
    pub ladder: Vec<usize>,
    /// Known zeros of the exponent, when the measure has a closed-form answer.
    pub critical: Vec<TorusAngle>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn disorder(&self) -> Result<DisorderParam, CliError> {
        DisorderParam::new(self.t).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn phase_measure(&self) -> Result<PhaseMeasure, CliError> {
        match &self.measure {
            MeasureSpec::Uniform => Ok(PhaseMeasure::uniform()),
            MeasureSpec::Finite { atoms, probs } => {
                if atoms.len() != probs.len() {
                    return Err(CliError::Config(format!(
                        "measure has {} atoms but {} probabilities",
                        atoms.len(),
                        probs.len()
                    )));
                }
                let pairs = atoms
                    .iter()
                    .zip(probs)
                    .map(|(a, &p)| Ok((a.resolve()?, p)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                PhaseMeasure::finite(pairs).map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }

    pub fn lambda_grid(&self) -> Result<Vec<TorusAngle>, CliError> {
        let grid = match &self.grid {
            GridSpec::List { values } => values.iter().map(AngleSpec::resolve).collect::<Result<Vec<_>, _>>()?,
            GridSpec::Range { start, stop, count } => {
                let (a, b) = (start.radians()?, stop.radians()?);
                match count {
                    0 => Vec::new(),
                    1 => vec![TorusAngle::new(a)],
                    &k => (0..k).map(|i| TorusAngle::new(a + (b - a) * i as f64 / (k - 1) as f64)).collect(),
                }
            }
        };
        if grid.is_empty() {
            return Err(CliError::Config("quasi-energy grid is empty".into()));
        }
        Ok(grid)
    }

    fn classifier_ladder(&self) -> Result<Vec<usize>, CliError> {
        let ladder = match &self.ladder {
            Some(l) => l.clone(),
            None => {
                let mut l: Vec<usize> = [self.n / 100, self.n / 10, self.n].into_iter().filter(|&k| k > 0).collect();
                l.dedup();
                l
            }
        };
        if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1]) || ladder[0] == 0 {
            return Err(CliError::Config(format!("ladder {ladder:?} must be positive and strictly increasing")));
        }
        if *ladder.last().unwrap() != self.n {
            return Err(CliError::Config(format!("last ladder rung must equal n = {}", self.n)));
        }
        Ok(ladder)
    }

    fn critical_points(&self, measure: &PhaseMeasure, d: DisorderParam) -> Vec<TorusAngle> {
        let Some(support) = measure.support() else { return Vec::new() };
        let [a, b] = support[..] else { return Vec::new() };
        match self.model {
            Model::Anderson if a.distance(b + TorusAngle::PI) <= 1e-12 => vec![-a, -b],
            Model::Anderson => Vec::new(),
            Model::Dimer => dimer_critical_set(a, b, d).map(|c| c.points).unwrap_or_default(),
        }
    }

    /// Checks every precondition the engine would otherwise reject mid-run.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let d = self.disorder()?;
        let measure = self.phase_measure()?;
        if self.n == 0 {
            return Err(CliError::Config("n must be positive".into()));
        }
        if self.realizations < 2 {
            return Err(CliError::Config("need at least 2 realizations for a standard error".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        let ladder = if self.classify { self.classifier_ladder()? } else { vec![self.n] };
        let grid = self.lambda_grid()?;
        let critical = self.critical_points(&measure, d);
        let ensemble = match self.model {
            Model::Anderson => Ensemble::anderson(measure, d),
            Model::Dimer => Ensemble::dimer(measure, d),
        };
        Ok(Resolved { ensemble, grid, ladder, critical })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn pi_literals_resolve() {
        let a: AngleSpec = "pi/2".parse().unwrap();
        assert_eq!(a.radians().unwrap(), PI / 2.0);
        assert_eq!("0.25".parse::<AngleSpec>().unwrap(), AngleSpec::Radians(0.25));
        assert!("half".parse::<AngleSpec>().is_err());
    }

    #[test]
    fn range_grid_includes_endpoints() {
        let cfg = RunConfig {
            grid: GridSpec::Range { start: AngleSpec::Radians(0.1), stop: AngleSpec::Radians(0.5), count: 5 },
            ..Default::default()
        };
        let g = cfg.lambda_grid().unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[0].value(), 0.1);
        assert!((g[4].value() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn antipodal_pair_has_two_critical_points() {
        let r = RunConfig::default().resolve().unwrap();
        assert_eq!(r.critical.len(), 2);
        assert!(r.critical.iter().any(|c| c.distance(TorusAngle::PI) < 1e-15));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad_t = RunConfig { t: 1.0, ..Default::default() };
        assert!(matches!(bad_t.resolve(), Err(CliError::Config(_))));
        let bad_probs = RunConfig {
            measure: MeasureSpec::Finite { atoms: vec![AngleSpec::Radians(0.0)], probs: vec![0.5, 0.5] },
            ..Default::default()
        };
        assert!(bad_probs.resolve().is_err());
        let one_r = RunConfig { realizations: 1, ..Default::default() };
        assert!(one_r.resolve().is_err());
        let bad_ladder = RunConfig { classify: true, ladder: Some(vec![10, 5]), ..Default::default() };
        assert!(bad_ladder.resolve().is_err());
        assert!(RunConfig::from_toml("model = \"anderson\"\nbogus = 1").is_err());
    }

    #[test]
    fn default_ladder_ends_at_n() {
        let cfg = RunConfig { classify: true, n: 5_000, ..Default::default() };
        assert_eq!(cfg.resolve().unwrap().ladder, vec![50, 500, 5_000]);
    }
}
