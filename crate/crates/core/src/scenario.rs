//! JSON scenario files.
//!
//! ```json
//! {
//!   "problem": "neumann_damped",
//!   "k": 0.5,
//!   "a": 0.5,
//!   "initial": { "preset": "example1" },
//!   "t_max": 10
//! }
//! ```
//!
//! `a` may also name a threshold (`"a1"`, `"a2"`, `"b1"`, `"b2"`). The delay
//! problem (`"dirichlet_delay"`) takes `mu1`, `mu2`, `tau`, `xi` and a
//! `history` instead of `a`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{example_solution, thresholds, ExampleKind, SelfSimilar, SelfSimilarShape};
use crate::data::{History, InitialData};
use crate::delay::{compatible_history, DelayOptions, DelayParams, DelayProfile};
use crate::error::{Error, Result};
use crate::fdm::{FdmGrid, FdmProblem};
use crate::geometry::DomainGeometry;
use crate::profile::NeumannProfile;
use crate::quad::Quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    NeumannDamped,
    DirichletDelay,
}

/// A damping gain given by value or by the name of a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gain {
    Value(f64),
    Named(String),
}

impl Gain {
    pub fn resolve(&self, k: f64) -> Result<f64> {
        match self {
            Gain::Value(v) => Ok(*v),
            Gain::Named(name) => {
                let t = thresholds(k)?;
                match name.as_str() {
                    "a1" => Ok(t.a1),
                    "a2" => Ok(t.a2),
                    "b1" => Ok(t.b1),
                    "b2" => Ok(t.b2),
                    other => Err(Error::Scenario(format!(
                        "unknown gain name {other:?} (expected a number or one of a1, a2, b1, b2)"
                    ))),
                }
            }
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Zero {},
    Quadratic {},
    Sine {
        #[serde(default = "one")]
        displacement: f64,
        #[serde(default)]
        velocity: f64,
    },
    Bump {
        #[serde(default = "one")]
        amplitude: f64,
        center: f64,
        width: f64,
    },
    Example1 {},
    Example2 {},
    Example3 {
        a: f64,
    },
    /// Self-similar profile matched to the scenario's `k` and `a`.
    SelfSimilar {
        #[serde(default = "one")]
        offset: f64,
        #[serde(default)]
        oscillation: f64,
        #[serde(default)]
        harmonic: u32,
        #[serde(default)]
        phase: f64,
    },
    /// Uniform samples of `u0` and `u1` on `[0, 1]`.
    Samples {
        u0: Vec<f64>,
        u1: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum HistorySpec {
    Zero {},
    Constant {
        value: f64,
    },
    Sine {
        amplitude: f64,
        omega: f64,
    },
    /// The history that continues the data smoothly past `y = 1`.
    Compatible {},
    /// Uniform samples of `g0` on `[-tau, 0]`.
    Samples {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdmSpec {
    #[serde(default = "FdmSpec::default_ny")]
    pub ny: usize,
    #[serde(default = "FdmSpec::default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub t_max: Option<f64>,
}

impl FdmSpec {
    fn default_ny() -> usize {
        512
    }

    fn default_cfl() -> f64 {
        FdmGrid::DEFAULT_CFL
    }
}

impl Default for FdmSpec {
    fn default() -> Self {
        Self { ny: Self::default_ny(), cfl: Self::default_cfl(), t_max: None }
    }
}

/// `start, start + step, ...` up to `stop` inclusive. In JSON either
/// `{"start": .., "stop": .., "step": ..}` or the string `"start:stop:step"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RangeRepr")]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.stop >= self.start) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::Scenario(format!(
                "sweep range needs start <= stop and step > 0 (got {}:{}:{})",
                self.start, self.stop, self.step
            )));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        if n > 1_000_000 {
            return Err(Error::Scenario("sweep range has more than a million points".into()));
        }
        Ok((0..=n).map(|i| self.start + i as f64 * self.step).collect())
    }

    /// Parses `start:stop:step`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Error::Scenario(format!("range must look like start:stop:step (got {text:?})"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        Ok(Self { start: num(parts[0])?, stop: num(parts[1])?, step: num(parts[2])? })
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RangeRepr {
    Text(String),
    Parts(RangeParts),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RangeParts {
    start: f64,
    stop: f64,
    step: f64,
}

impl TryFrom<RangeRepr> for Range {
    type Error = Error;

    fn try_from(r: RangeRepr) -> Result<Self> {
        match r {
            RangeRepr::Text(t) => Range::parse(&t),
            RangeRepr::Parts(RangeParts { start, stop, step }) => Ok(Range { start, stop, step }),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu1: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu2: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Range>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub problem: Problem,
    pub k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Gain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    pub initial: InitialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<HistorySpec>,
    #[serde(default = "Scenario::default_t_max")]
    pub t_max: f64,
    /// Number of output times in `[0, t_max]`.
    #[serde(default = "Scenario::default_sample_count")]
    pub sample_count: usize,
    /// Number of points across the domain for field output.
    #[serde(default = "Scenario::default_space_samples")]
    pub space_samples: usize,
    #[serde(default = "Scenario::default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default)]
    pub fdm: Option<FdmSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

/// A scenario turned into solver objects.
#[derive(Debug)]
pub enum Model {
    Neumann(NeumannProfile),
    Delay(DelayProfile),
}

impl Scenario {
    fn default_t_max() -> f64 {
        10.0
    }

    fn default_sample_count() -> usize {
        101
    }

    fn default_space_samples() -> usize {
        33
    }

    fn default_quad_tol() -> f64 {
        1e-10
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_with(text, |_| ())
    }

    /// Parses, applies `edit`, then validates.
    pub fn from_json_with(text: &str, edit: impl FnOnce(&mut Scenario)) -> Result<Self> {
        let mut s: Scenario = serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        s.fdm.get_or_insert_with(FdmSpec::default);
        edit(&mut s);
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::load_with(path, |_| ())
    }

    pub fn load_with(path: impl AsRef<Path>, edit: impl FnOnce(&mut Scenario)) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_with(&text, edit).map_err(|e| match e {
            Error::Scenario(msg) => Error::Scenario(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The scenario with defaults filled in, as pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn geometry(&self) -> Result<DomainGeometry> {
        DomainGeometry::new(self.k)
    }

    pub fn quadrature(&self) -> Quadrature {
        Quadrature::with_abs_tol(self.quad_tol)
    }

    /// The resolved damping gain of a Neumann scenario.
    pub fn gain(&self) -> Result<f64> {
        let a = self.a.as_ref().ok_or_else(|| missing("a", "neumann_damped"))?;
        a.resolve(self.k)
    }

    pub fn delay_params(&self) -> Result<DelayParams> {
        let get = |v: Option<f64>, name: &str| v.ok_or_else(|| missing(name, "dirichlet_delay"));
        Ok(DelayParams {
            mu1: get(self.mu1, "mu1")?,
            mu2: get(self.mu2, "mu2")?,
            tau: get(self.tau, "tau")?,
            xi: get(self.xi, "xi")?,
        })
    }

    /// Re-checks everything the solvers would reject, without building them.
    pub fn validate(&self) -> Result<()> {
        let geom = self.geometry()?;
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Scenario(format!("t_max must be positive (got {})", self.t_max)));
        }
        if self.sample_count < 2 {
            return Err(Error::Scenario("sample_count must be at least 2".into()));
        }
        if self.space_samples < 2 {
            return Err(Error::Scenario("space_samples must be at least 2".into()));
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::Scenario(format!("quad_tol must be positive (got {})", self.quad_tol)));
        }
        match self.problem {
            Problem::NeumannDamped => {
                for (name, present) in [
                    ("mu1", self.mu1.is_some()),
                    ("mu2", self.mu2.is_some()),
                    ("tau", self.tau.is_some()),
                    ("xi", self.xi.is_some()),
                    ("history", self.history.is_some()),
                ] {
                    if present {
                        return Err(Error::Scenario(format!("{name} does not apply to neumann_damped")));
                    }
                }
                // A sweep over a may leave the single gain out.
                let swept = self.sweep.as_ref().is_some_and(|s| s.a.is_some());
                if self.a.is_some() || !swept {
                    let a = self.gain()?;
                    if !a.is_finite() {
                        return Err(Error::Scenario(format!("a must be finite (got {a})")));
                    }
                    if a == -1.0 {
                        return Err(Error::DegenerateFeedback);
                    }
                }
                if let Some(s) = &self.sweep {
                    if s.mu1.is_some() || s.mu2.is_some() || s.tau.is_some() {
                        return Err(Error::Scenario("neumann_damped sweeps only range over a".into()));
                    }
                }
            }
            Problem::DirichletDelay => {
                if self.a.is_some() {
                    return Err(Error::Scenario("a does not apply to dirichlet_delay".into()));
                }
                if self.history.is_none() {
                    return Err(missing("history", "dirichlet_delay"));
                }
                let params = self.delay_params()?;
                if !(params.tau > 0.0 && params.tau < 1.0 / self.k) {
                    return Err(Error::Scenario(format!(
                        "tau must satisfy 0 < tau < 1/k = {} (got {})",
                        1.0 / self.k,
                        params.tau
                    )));
                }
                params.validate(&geom)?;
                if matches!(self.initial, InitialSpec::SelfSimilar { .. }) {
                    return Err(Error::Scenario("the self_similar preset only applies to neumann_damped".into()));
                }
                if let Some(s) = &self.sweep {
                    if s.a.is_some() {
                        return Err(Error::Scenario("dirichlet_delay sweeps range over mu1, mu2 and tau".into()));
                    }
                }
            }
        }
        if let Some(f) = &self.fdm {
            FdmGrid::new(self.k, f.ny, f.t_max.unwrap_or(1.0), f.cfl)?;
        }
        self.initial_data()?.validate()?;
        if let Some(h) = self.history()? {
            h.validate(self.tau.unwrap_or(1.0))?;
        }
        Ok(())
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        let k = self.k;
        Ok(match &self.initial {
            InitialSpec::Zero {} => InitialData::zero(),
            InitialSpec::Quadratic {} => InitialData::quadratic(),
            InitialSpec::Sine { displacement, velocity } => InitialData::sine(*displacement, *velocity),
            InitialSpec::Bump { amplitude, center, width } => InitialData::bump(*amplitude, *center, *width)?,
            InitialSpec::Example1 {} => example_solution(ExampleKind::Ex1, k)?.data,
            InitialSpec::Example2 {} => example_solution(ExampleKind::Ex2, k)?.data,
            InitialSpec::Example3 { a } => example_solution(ExampleKind::Ex3(*a), k)?.data,
            InitialSpec::SelfSimilar { offset, oscillation, harmonic, phase } => {
                let shape =
                    SelfSimilarShape { offset: *offset, oscillation: *oscillation, harmonic: *harmonic, phase: *phase };
                SelfSimilar::new(k, self.gain()?, shape)?.data()
            }
            InitialSpec::Samples { u0, u1 } => InitialData::sampled(u0.clone(), u1.clone())?,
        })
    }

    pub fn history(&self) -> Result<Option<History>> {
        let Some(spec) = &self.history else { return Ok(None) };
        Ok(Some(match spec {
            HistorySpec::Zero {} => History::zero(),
            HistorySpec::Constant { value } => History::constant(*value),
            HistorySpec::Sine { amplitude, omega } => History::sine(*amplitude, *omega),
            HistorySpec::Compatible {} => {
                compatible_history(&self.geometry()?, &self.delay_params()?, &self.initial_data()?)?
            }
            HistorySpec::Samples { values } => History::sampled(self.delay_params()?.tau, values.clone())?,
        }))
    }

    pub fn build(&self) -> Result<Model> {
        let geom = self.geometry()?;
        let data = self.initial_data()?;
        match self.problem {
            Problem::NeumannDamped => {
                Ok(Model::Neumann(NeumannProfile::build(geom, self.gain()?, data, self.quadrature())?))
            }
            Problem::DirichletDelay => {
                let opts = DelayOptions { quad: self.quadrature(), ..DelayOptions::default() };
                let history = self.history()?.ok_or_else(|| missing("history", "dirichlet_delay"))?;
                Ok(Model::Delay(DelayProfile::build(geom, self.delay_params()?, data, history, opts)?))
            }
        }
    }

    pub fn fdm_problem(&self) -> Result<FdmProblem> {
        Ok(match self.problem {
            Problem::NeumannDamped => FdmProblem::Neumann { a: self.gain()? },
            Problem::DirichletDelay => FdmProblem::Delay {
                params: self.delay_params()?,
                history: self.history()?.ok_or_else(|| missing("history", "dirichlet_delay"))?,
            },
        })
    }

    /// `sample_count` equally spaced times from `0` to `t_max`.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = self.sample_count - 1;
        (0..=n).map(|i| self.t_max * i as f64 / n as f64).collect()
    }
}

fn missing(name: &str, problem: &str) -> Error {
    Error::Scenario(format!("{problem} requires the parameter {name}"))
}
