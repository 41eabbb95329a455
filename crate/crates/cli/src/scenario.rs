//! Scenario and system schemas: JSON in, validated model objects out.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use subdyn_core::measure::{Measure, Submeasure};
use subdyn_core::models::ModelSystem;
use subdyn_core::multimap::Multimap;
use subdyn_core::space::FiniteSpace;
use subdyn_core::transfer::{blowup_construct, BlowupModel};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("unknown label {label:?} in {context}")]
    UnknownLabel { label: String, context: String },
    #[error("scenario needs a system or a blowup section")]
    MissingSystem,
    #[error("unknown submeasure name {0:?}")]
    UnknownSubmeasure(String),
    #[error("unknown builtin or unreadable path: {0}")]
    UnknownScenario(String),
    #[error("parameter {name} = {value} outside the documented range")]
    BadParameter { name: &'static str, value: f64 },
    #[error("experiment {kind} failed: {message}")]
    Experiment { kind: &'static str, message: String },
    #[error(transparent)]
    Space(#[from] subdyn_core::space::SpaceError),
    #[error(transparent)]
    Multimap(#[from] subdyn_core::multimap::MultimapError),
    #[error(transparent)]
    Measure(#[from] subdyn_core::measure::MeasureError),
    #[error(transparent)]
    Transfer(#[from] subdyn_core::transfer::TransferError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A space plus self-map in label form. Image lists are order-insensitive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemSpec {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<f64>>,
    pub map: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
}

impl SystemSpec {
    pub fn build(&self) -> Result<ModelSystem, ScenarioError> {
        let space = FiniteSpace::new(self.labels.clone(), self.dist.clone())?;
        let index = |label: &str, context: &str| -> Result<usize, ScenarioError> {
            space
                .index_of(label)
                .ok_or_else(|| ScenarioError::UnknownLabel {
                    label: label.to_string(),
                    context: context.to_string(),
                })
        };
        let mut images: Vec<Vec<usize>> = vec![Vec::new(); space.len()];
        for (from, tos) in &self.map {
            let x = index(from, "map key")?;
            for to in tos {
                images[x].push(index(to, &format!("image of {from:?}"))?);
            }
        }
        let mut map = Multimap::new(Arc::clone(&space), Arc::clone(&space), images)?;
        if let Some(d) = self.degree {
            map = map.with_degree(d)?;
        }
        Ok(ModelSystem { space, map })
    }

    /// Serializes a model system back into label form.
    pub fn from_model(m: &ModelSystem) -> Self {
        let space = &m.space;
        let mut map = BTreeMap::new();
        for x in 0..space.len() {
            map.insert(
                space.label(x).to_string(),
                m.map
                    .images(x)
                    .iter()
                    .map(|&y| space.label(y).to_string())
                    .collect(),
            );
        }
        SystemSpec {
            labels: space.labels().to_vec(),
            dist: (0..space.len())
                .map(|i| (0..space.len()).map(|j| space.dist(i, j)).collect())
                .collect(),
            map,
            degree: m.map.degree(),
        }
    }
}

/// A submeasure in label form: omitted labels mean weight zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmeasureSpec {
    pub generators: Vec<BTreeMap<String, f64>>,
}

impl SubmeasureSpec {
    pub fn build(&self, space: &FiniteSpace) -> Result<Submeasure, ScenarioError> {
        let mut generators = Vec::with_capacity(self.generators.len());
        for table in &self.generators {
            let mut weights = vec![0.0; space.len()];
            for (label, &w) in table {
                let x = space
                    .index_of(label)
                    .ok_or_else(|| ScenarioError::UnknownLabel {
                        label: label.clone(),
                        context: "submeasure generator".into(),
                    })?;
                weights[x] = w;
            }
            generators.push(Measure::new(weights)?);
        }
        Ok(Submeasure::new(generators)?)
    }
}

/// Blowup scenario: a base system plus fiber sizes over center labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupSpec {
    pub base: SystemSpec,
    pub center: Vec<String>,
    pub fibers: BTreeMap<String, usize>,
}

impl BlowupSpec {
    pub fn build(&self) -> Result<(ModelSystem, BlowupModel), ScenarioError> {
        let base_system = self.base.build()?;
        let mut centers = Vec::new();
        let mut sizes = Vec::new();
        for label in &self.center {
            let idx =
                base_system
                    .space
                    .index_of(label)
                    .ok_or_else(|| ScenarioError::UnknownLabel {
                        label: label.clone(),
                        context: "blowup center".into(),
                    })?;
            centers.push(idx);
            sizes.push(*self.fibers.get(label).unwrap_or(&1));
        }
        let model = blowup_construct(Arc::clone(&base_system.space), &centers, &sizes, None)?;
        Ok((base_system, model))
    }
}

/// One named experiment over the scenario's system.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentSpec {
    /// Pushforward of a named submeasure, with mass-preservation checks.
    Pushforward { submeasure: String },
    /// Cesaro averages and the exact periodic cluster point.
    Cesaro { submeasure: String },
    /// Monotone decreasing construction from a subinvariant seed.
    InvLeq { submeasure: String },
    /// Sup-accumulation from a superinvariant seed.
    InvGeq { submeasure: String },
    /// Topological/measure entropies and the Parry cross-check.
    Entropy,
    /// Example-1 identity and the mass-splitting decomposition on the blowup.
    Blowup,
    /// The variational identity at the stated tolerance.
    Variational,
    /// Involution strictness: double pushforward against the exact composite.
    Cremona,
    /// Transcendental splitting on the infinity model.
    Picard,
}

/// Runtime parameters; every field has a documented default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Parameters {
    pub delta: Option<f64>,
    pub tol: f64,
    pub n_max: usize,
    pub cap: usize,
    pub prune_cap: usize,
    pub words_l: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fibers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbols: Option<usize>,
}

impl Default for Parameters {
    fn default() -> Self {
        Parameters {
            delta: None,
            tol: 1e-9,
            n_max: 10_000,
            cap: 10_000,
            prune_cap: 128,
            words_l: 20,
            seed: 7,
            fibers: None,
            symbols: None,
        }
    }
}

impl Parameters {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.tol > 0.0 && self.tol <= 1.0) {
            return Err(ScenarioError::BadParameter {
                name: "tol",
                value: self.tol,
            });
        }
        if self.words_l == 0 || self.words_l > 48 {
            return Err(ScenarioError::BadParameter {
                name: "words_l",
                value: self.words_l as f64,
            });
        }
        if let Some(d) = self.delta {
            if d < 0.0 {
                return Err(ScenarioError::BadParameter {
                    name: "delta",
                    value: d,
                });
            }
        }
        if self.n_max == 0 || self.cap == 0 || self.prune_cap == 0 {
            return Err(ScenarioError::BadParameter {
                name: "n_max/cap/prune_cap",
                value: 0.0,
            });
        }
        Ok(())
    }
}

/// A complete scenario: a system (or blowup), named submeasures, and an
/// experiment list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup: Option<BlowupSpec>,
    #[serde(default)]
    pub submeasures: BTreeMap<String, SubmeasureSpec>,
    pub experiments: Vec<ExperimentSpec>,
    #[serde(default)]
    pub parameters: Parameters,
}

pub fn default_schema_version() -> u32 {
    1
}

impl Scenario {
    /// Parses a scenario from JSON, reporting the JSON pointer on failure. A
    /// bare blowup document (base/center/fibers) is accepted and wrapped into a
    /// blowup experiment.
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ScenarioError::Schema {
                pointer: "/".into(),
                message: e.to_string(),
            })?;
        if value.get("base").is_some() && value.get("fibers").is_some() {
            let spec: BlowupSpec = deserialize_with_pointer(value)?;
            return Ok(Scenario {
                schema_version: default_schema_version(),
                name: "blowup-file".into(),
                system: None,
                blowup: Some(spec),
                submeasures: BTreeMap::new(),
                experiments: vec![ExperimentSpec::Blowup],
                parameters: Parameters::default(),
            });
        }
        deserialize_with_pointer(value)
    }
}

fn deserialize_with_pointer<T: serde::de::DeserializeOwned>(
    value: serde_json::Value,
) -> Result<T, ScenarioError> {
    let mut track = serde_path_to_error::Track::new();
    let de = serde_path_to_error::Deserializer::new(&value, &mut track);
    T::deserialize(de).map_err(|e| ScenarioError::Schema {
        pointer: format!("/{}", track.path().to_string().replace('.', "/")),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_spec_round_trips_labels() {
        let text = r#"{
            "labels": ["a", "b"],
            "dist": [[0.0, 1.0], [1.0, 0.0]],
            "map": { "a": ["a", "b"], "b": ["a"] }
        }"#;
        let spec: SystemSpec = serde_json::from_str(text).unwrap();
        let model = spec.build().unwrap();
        assert_eq!(model.map.images(0), &[0, 1]);
        assert_eq!(model.map.images(1), &[0]);
        let back = SystemSpec::from_model(&model);
        assert_eq!(back.labels, vec!["a", "b"]);
    }

    #[test]
    fn unknown_labels_are_reported() {
        let text = r#"{
            "labels": ["a"],
            "dist": [[0.0]],
            "map": { "a": ["zz"] }
        }"#;
        let spec: SystemSpec = serde_json::from_str(text).unwrap();
        let err = spec.build().unwrap_err();
        assert!(format!("{err}").contains("zz"));
    }

    #[test]
    fn submeasure_spec_defaults_missing_labels_to_zero() {
        let space = FiniteSpace::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap();
        let spec: SubmeasureSpec =
            serde_json::from_str(r#"{ "generators": [ { "b": 0.5 } ] }"#).unwrap();
        let mu = spec.build(&space).unwrap();
        assert_eq!(mu.generators()[0].weights(), &[0.0, 0.5]);
    }

    #[test]
    fn schema_errors_carry_a_pointer() {
        let text = r#"{
            "name": "x",
            "experiments": [ { "kind": "pushforward" } ]
        }"#;
        let err = Scenario::from_json(text).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("schema error"), "{msg}");
    }

    #[test]
    fn bare_blowup_documents_are_accepted() {
        let text = r#"{
            "base": {
                "labels": ["a", "b"],
                "dist": [[0.0, 1.0], [1.0, 0.0]],
                "map": { "a": ["b"], "b": ["a"] }
            },
            "center": ["a"],
            "fibers": { "a": 3 }
        }"#;
        let scenario = Scenario::from_json(text).unwrap();
        assert!(scenario.blowup.is_some());
        let (_, model) = scenario.blowup.unwrap().build().unwrap();
        assert_eq!(model.total.len(), 4);
    }
}
