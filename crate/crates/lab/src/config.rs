use std::fmt;

use cgt_core::census::Predicate;
use cgt_core::geometry::ContractionBudget;
use cgt_core::group::Caps;
use cgt_core::GroupSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Census,
    Genericity,
    Conjugacy,
    Barriers,
    Contraction,
    Paths,
    Bbf,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Census,
        Experiment::Genericity,
        Experiment::Conjugacy,
        Experiment::Barriers,
        Experiment::Contraction,
        Experiment::Paths,
        Experiment::Bbf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Census => "census",
            Experiment::Genericity => "genericity",
            Experiment::Conjugacy => "conjugacy",
            Experiment::Barriers => "barriers",
            Experiment::Contraction => "contraction",
            Experiment::Paths => "paths",
            Experiment::Bbf => "bbf",
        }
    }

    pub fn parse(name: &str) -> Option<Experiment> {
        Experiment::ALL.into_iter().find(|e| e.name() == name)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn default_predicate() -> Predicate {
    Predicate::All
}

fn default_factor() -> Predicate {
    Predicate::ConjugateIntoFactor
}

fn default_tau() -> f64 {
    2.0
}

fn default_extent() -> usize {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusParams {
    pub n_max: usize,
    #[serde(default = "default_predicate")]
    pub predicate: Predicate,
    #[serde(default)]
    pub caps: Caps,
    /// Annulus width used for the exponent estimate.
    #[serde(default)]
    pub delta: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericityParams {
    pub n_max: usize,
    #[serde(default = "default_factor")]
    pub predicate: Predicate,
    #[serde(default)]
    pub caps: Caps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugacyParams {
    pub n_max: usize,
    #[serde(default = "default_factor")]
    pub predicate: Predicate,
    /// Conjugator radius for the `conj_length` cross-check on short classes.
    #[serde(default = "default_search_radius")]
    pub search_radius: usize,
    /// Classes up to this length are cross-checked.
    #[serde(default = "default_check_length")]
    pub check_length: usize,
    #[serde(default)]
    pub caps: Caps,
}

fn default_search_radius() -> usize {
    2
}

fn default_check_length() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierParams {
    pub n_max: usize,
    pub epsilon: f64,
    #[serde(default, rename = "M")]
    pub big_m: f64,
    pub barrier_word: String,
    #[serde(default)]
    pub power: Option<u32>,
    /// Further ε values to sweep (each gets its own census).
    #[serde(default)]
    pub epsilon_sweep: Vec<f64>,
    #[serde(default)]
    pub caps: Caps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionParams {
    /// Axis generators, in dotted notation.
    pub axes: Vec<String>,
    #[serde(default = "default_extent")]
    pub extent: usize,
    /// Use the geodesic line through the orbit rather than the orbit alone.
    #[serde(default)]
    pub saturated: bool,
    pub budget: ContractionBudget,
    /// Extra budgets radii to repeat the estimate at.
    #[serde(default)]
    pub radius_sweep: Vec<usize>,
    #[serde(default)]
    pub caps: Caps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeParams {
    pub letters: Vec<String>,
    pub family: Vec<String>,
    #[serde(default = "default_extent")]
    pub extent: usize,
    pub d: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    pub word_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathParams {
    /// Axis generator of both legs.
    #[serde(default = "default_axis")]
    pub axis: String,
    /// Letter joining the legs.
    #[serde(default = "default_bridge")]
    pub bridge: String,
    #[serde(rename = "D")]
    pub d_values: Vec<usize>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub probe: Option<ProbeParams>,
    #[serde(default)]
    pub caps: Caps,
}

fn default_axis() -> String {
    "a".into()
}

fn default_bridge() -> String {
    "b".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BbfParams {
    #[serde(default = "default_axis")]
    pub axis: String,
    #[serde(default = "default_bbf_extent")]
    pub extent: usize,
    /// Translates `g` giving the members `g·Ax(h)`.
    pub shifts: Vec<String>,
    #[serde(rename = "K")]
    pub k: f64,
    /// Bridge length; defaults to `2K`.
    #[serde(default, rename = "N")]
    pub n: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// `K̃` for the standard-path check on the first and last members.
    #[serde(default)]
    pub k_tilde: f64,
}

fn default_bbf_extent() -> usize {
    3
}

fn default_delta() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", content = "params", rename_all = "snake_case")]
pub enum Params {
    Census(CensusParams),
    Genericity(GenericityParams),
    Conjugacy(ConjugacyParams),
    Barriers(BarrierParams),
    Contraction(ContractionParams),
    Paths(PathParams),
    Bbf(BbfParams),
}

impl Params {
    pub fn experiment(&self) -> Experiment {
        match self {
            Params::Census(_) => Experiment::Census,
            Params::Genericity(_) => Experiment::Genericity,
            Params::Conjugacy(_) => Experiment::Conjugacy,
            Params::Barriers(_) => Experiment::Barriers,
            Params::Contraction(_) => Experiment::Contraction,
            Params::Paths(_) => Experiment::Paths,
            Params::Bbf(_) => Experiment::Bbf,
        }
    }

    pub fn caps(&self) -> Caps {
        match self {
            Params::Census(p) => p.caps,
            Params::Genericity(p) => p.caps,
            Params::Conjugacy(p) => p.caps,
            Params::Barriers(p) => p.caps,
            Params::Contraction(p) => p.caps,
            Params::Paths(p) => p.caps,
            Params::Bbf(_) => Caps::default(),
        }
    }

    /// Largest ball radius the experiment enumerates, when it has one.
    pub fn n_max(&self) -> Option<usize> {
        match self {
            Params::Census(p) => Some(p.n_max),
            Params::Genericity(p) => Some(p.n_max),
            Params::Conjugacy(p) => Some(p.n_max),
            Params::Barriers(p) => Some(p.n_max),
            Params::Contraction(p) => Some(
                p.radius_sweep
                    .iter()
                    .copied()
                    .chain([p.budget.radius()])
                    .max()
                    .unwrap_or(0),
            ),
            Params::Paths(_) | Params::Bbf(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub group: GroupSpec,
    #[serde(flatten)]
    pub params: Params,
    #[serde(default = "default_output")]
    pub output: String,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_output() -> String {
    "lab-out".into()
}

#[derive(Deserialize)]
struct Head {
    experiment: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Typed<P> {
    group: GroupSpec,
    #[allow(dead_code)]
    experiment: String,
    params: P,
    #[serde(default = "default_output")]
    output: String,
    #[serde(default)]
    threads: Option<usize>,
}

fn typed<P: DeserializeOwned>(text: &str, wrap: fn(P) -> Params) -> Result<ExperimentConfig, LabError> {
    let t: Typed<P> = serde_json::from_str(text).map_err(LabError::from_json)?;
    Ok(ExperimentConfig {
        group: t.group,
        params: wrap(t.params),
        output: t.output,
        threads: t.threads,
    })
}

impl ExperimentConfig {
    /// Parses a config; errors carry the line, column and field at fault.
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let head: Head = serde_json::from_str(text).map_err(LabError::from_json)?;
        let name = head
            .experiment
            .ok_or_else(|| LabError::Config("missing field `experiment`".into()))?;
        let exp = Experiment::parse(&name).ok_or_else(|| LabError::UnknownExperiment(name.clone()))?;
        let cfg = match exp {
            Experiment::Census => typed(text, Params::Census)?,
            Experiment::Genericity => typed(text, Params::Genericity)?,
            Experiment::Conjugacy => typed(text, Params::Conjugacy)?,
            Experiment::Barriers => typed(text, Params::Barriers)?,
            Experiment::Contraction => typed(text, Params::Contraction)?,
            Experiment::Paths => typed(text, Params::Paths)?,
            Experiment::Bbf => typed(text, Params::Bbf)?,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Semantic checks beyond the schema.
    pub fn check(&self) -> Result<(), LabError> {
        let problems = self.problems();
        match problems.into_iter().next() {
            Some(p) => Err(LabError::Config(p)),
            None => Ok(()),
        }
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.threads == Some(0) {
            out.push("field `threads`: must be positive".into());
        }
        let caps = self.params.caps();
        if caps.max_streamed == 0 || caps.max_retained == 0 || caps.max_geodesics == 0 {
            out.push("field `params.caps`: budgets must be positive".into());
        }
        match &self.params {
            Params::Barriers(p) => {
                if p.epsilon < 0.0 || p.big_m < 0.0 || p.epsilon_sweep.iter().any(|&e| e < 0.0) {
                    out.push("field `params.epsilon`/`params.M`: must be non-negative".into());
                }
            }
            Params::Contraction(p) => {
                if p.axes.is_empty() {
                    out.push("field `params.axes`: at least one axis generator".into());
                }
                if let ContractionBudget::Sampled { samples: 0, .. } = p.budget {
                    out.push("field `params.budget.samples`: must be positive".into());
                }
            }
            Params::Paths(p) => {
                if p.d_values.is_empty() {
                    out.push("field `params.D`: at least one value".into());
                }
            }
            Params::Bbf(p) => {
                if p.shifts.len() < 2 {
                    out.push("field `params.shifts`: at least two members".into());
                }
                if p.k < 0.0 || p.n.is_some_and(|n| n <= 0.0) || p.delta < 0.0 {
                    out.push("field `params.K`/`params.N`/`params.delta`: out of range".into());
                }
            }
            _ => {}
        }
        out
    }

    /// Full schema and semantic diagnostics plus a dry-run cost estimate.
    pub fn validate_text(text: &str) -> Vec<String> {
        let cfg = match ExperimentConfig::parse(text) {
            Ok(c) => c,
            Err(e) => {
                let mut out = vec![e.to_string()];
                // The group may still be worth diagnosing on its own.
                if let Ok(v) = serde_json::from_str::<serde_json::Value>(text) {
                    if let Some(Ok(g)) = v.get("group").map(|g| serde_json::from_value::<GroupSpec>(g.clone())) {
                        out.extend(g.diagnostics().into_iter().map(|e| format!("group: {e}")));
                    }
                }
                return out;
            }
        };
        cfg.diagnostics()
    }

    pub fn diagnostics(&self) -> Vec<String> {
        let mut out: Vec<String> = self.group.diagnostics().into_iter().map(|e| format!("group: {e}")).collect();
        out.extend(self.problems());
        if let Some(n) = self.params.n_max() {
            let caps = self.params.caps();
            if let Some(ball) = predicted_ball(&self.group, n) {
                if ball > caps.max_streamed as f64 {
                    out.push(format!(
                        "predicted ball size {ball:.0} at n_max = {n} exceeds the streaming cap {}",
                        caps.max_streamed
                    ));
                }
            }
        }
        out
    }
}

/// Ball size from the exact sphere formula when the group has one.
pub fn predicted_ball(group: &GroupSpec, n: usize) -> Option<f64> {
    (0..=n).map(|k| group.closed_form_sphere(k)).sum()
}
