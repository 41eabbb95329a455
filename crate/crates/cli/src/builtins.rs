//! Curated scenarios, constructed from the model systems in label form so that
//! reports read naturally.

use std::collections::BTreeMap;

use subdyn_core::models;

use crate::scenario::{
    default_schema_version, BlowupSpec, ExperimentSpec, Parameters, Scenario, SubmeasureSpec,
    SystemSpec,
};

pub const BUILTIN_NAMES: [&str; 5] = ["blowup", "cremona", "picard", "goldenmean", "fullshift"];

fn dirac_spec(label: &str) -> SubmeasureSpec {
    SubmeasureSpec {
        generators: vec![BTreeMap::from([(label.to_string(), 1.0)])],
    }
}

fn top_spec(labels: &[String]) -> SubmeasureSpec {
    SubmeasureSpec {
        generators: labels
            .iter()
            .map(|l| BTreeMap::from([(l.clone(), 1.0)]))
            .collect(),
    }
}

/// Builds a builtin scenario by name, honoring the `fibers`/`symbols`
/// overrides in the parameters.
pub fn builtin(name: &str, params: &Parameters) -> Option<Scenario> {
    let mut scenario = match name {
        "cremona" => {
            let model = models::cremona();
            Scenario {
                schema_version: default_schema_version(),
                name: "cremona".into(),
                system: Some(SystemSpec::from_model(&model)),
                blowup: None,
                submeasures: BTreeMap::from([("dirac_e0".to_string(), dirac_spec("e0"))]),
                experiments: vec![
                    ExperimentSpec::Cremona,
                    ExperimentSpec::Pushforward {
                        submeasure: "dirac_e0".into(),
                    },
                ],
                parameters: params.clone(),
            }
        }
        "blowup" => {
            let base = models::segment_space(4, "b");
            let base_model = models::ModelSystem {
                space: std::sync::Arc::clone(&base),
                map: subdyn_core::multimap::Multimap::deterministic(
                    std::sync::Arc::clone(&base),
                    std::sync::Arc::clone(&base),
                    vec![1, 2, 3, 0],
                )
                .expect("rotation is valid"),
            };
            let k = params.fibers.unwrap_or(3);
            Scenario {
                schema_version: default_schema_version(),
                name: "blowup".into(),
                system: None,
                blowup: Some(BlowupSpec {
                    base: SystemSpec::from_model(&base_model),
                    center: vec!["b1".into(), "b3".into()],
                    fibers: BTreeMap::from([("b1".to_string(), k), ("b3".to_string(), k)]),
                }),
                submeasures: BTreeMap::new(),
                experiments: vec![ExperimentSpec::Blowup],
                parameters: params.clone(),
            }
        }
        "picard" => {
            let n = params.symbols.unwrap_or(6);
            let model = models::picard(n);
            Scenario {
                schema_version: default_schema_version(),
                name: "picard".into(),
                system: Some(SystemSpec::from_model(&model)),
                blowup: None,
                submeasures: BTreeMap::from([("dirac_inf".to_string(), dirac_spec("inf"))]),
                experiments: vec![
                    ExperimentSpec::Picard,
                    ExperimentSpec::Cesaro {
                        submeasure: "dirac_inf".into(),
                    },
                    ExperimentSpec::InvGeq {
                        submeasure: "dirac_inf".into(),
                    },
                    ExperimentSpec::Entropy,
                ],
                parameters: params.clone(),
            }
        }
        "goldenmean" => {
            let model = models::golden_mean();
            let labels = model.space.labels().to_vec();
            Scenario {
                schema_version: default_schema_version(),
                name: "goldenmean".into(),
                system: Some(SystemSpec::from_model(&model)),
                blowup: None,
                submeasures: BTreeMap::from([("top".to_string(), top_spec(&labels))]),
                experiments: vec![
                    ExperimentSpec::Entropy,
                    ExperimentSpec::Variational,
                    ExperimentSpec::Pushforward {
                        submeasure: "top".into(),
                    },
                    ExperimentSpec::Cesaro {
                        submeasure: "top".into(),
                    },
                ],
                parameters: params.clone(),
            }
        }
        "fullshift" => {
            let k = params.symbols.unwrap_or(2);
            let model = models::full_shift(k);
            Scenario {
                schema_version: default_schema_version(),
                name: "fullshift".into(),
                system: Some(SystemSpec::from_model(&model)),
                blowup: None,
                submeasures: BTreeMap::new(),
                experiments: vec![ExperimentSpec::Entropy, ExperimentSpec::Variational],
                parameters: params.clone(),
            }
        }
        _ => return None,
    };
    scenario.parameters = params.clone();
    Some(scenario)
}

/// The full builtin battery under one parameter set, in a fixed order.
pub fn battery(params: &Parameters) -> Vec<Scenario> {
    BUILTIN_NAMES
        .iter()
        .map(|name| builtin(name, params).expect("builtin names are valid"))
        .collect()
}
