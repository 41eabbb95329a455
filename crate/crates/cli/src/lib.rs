//! Scenario runner for submeasure dynamics: loads JSON systems, executes named
//! experiments (pushforward, Cesaro, invariant constructions, entropy, blowup,
//! variational checks), and emits machine-readable reports. Reports are
//! byte-stable across runs given identical inputs.

pub mod builtins;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod study;

pub use report::Report;
pub use runner::run_scenario;
pub use scenario::{Parameters, Scenario, ScenarioError};

/// Resolves a scenario source: a builtin name or a JSON file path.
pub fn resolve_scenario(source: &str, params: &Parameters) -> Result<Scenario, ScenarioError> {
    if let Some(s) = builtins::builtin(source, params) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(source)
        .map_err(|_| ScenarioError::UnknownScenario(source.to_string()))?;
    let mut scenario = Scenario::from_json(&text)?;
    scenario.parameters = merge_params(&scenario.parameters, params);
    Ok(scenario)
}

/// File parameters stay unless an override differs from the default.
fn merge_params(file: &Parameters, overrides: &Parameters) -> Parameters {
    let default = Parameters::default();
    let mut merged = file.clone();
    if overrides.tol != default.tol {
        merged.tol = overrides.tol;
    }
    if overrides.delta != default.delta {
        merged.delta = overrides.delta;
    }
    if overrides.n_max != default.n_max {
        merged.n_max = overrides.n_max;
    }
    if overrides.cap != default.cap {
        merged.cap = overrides.cap;
    }
    if overrides.prune_cap != default.prune_cap {
        merged.prune_cap = overrides.prune_cap;
    }
    if overrides.words_l != default.words_l {
        merged.words_l = overrides.words_l;
    }
    if overrides.seed != default.seed {
        merged.seed = overrides.seed;
    }
    if overrides.fibers.is_some() {
        merged.fibers = overrides.fibers;
    }
    if overrides.symbols.is_some() {
        merged.symbols = overrides.symbols;
    }
    merged
}

/// Runs the whole builtin battery and renders one combined JSON document;
/// used by the determinism check and the CLI `run all`.
pub fn run_battery(params: &Parameters) -> Result<String, ScenarioError> {
    let mut reports = Vec::new();
    for scenario in builtins::battery(params) {
        reports.push(run_scenario(&scenario)?);
    }
    let passed = reports.iter().all(|r| r.passed);
    let doc = serde_json::json!({
        "schema_version": report::SCHEMA_VERSION,
        "battery": reports.iter().map(|r| serde_json::to_value(r).expect("report value")).collect::<Vec<_>>(),
        "passed": passed,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("battery serializes");
    text.push('\n');
    Ok(text)
}
