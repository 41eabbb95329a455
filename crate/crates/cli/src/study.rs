//! Refinement studies: run a scenario family across resolutions and emit one
//! CSV row per resolution with trend columns.

use std::fmt::Write as _;

use subdyn_core::entropy::{orbit_graph, top_entropy, TopEntropyMode};
use subdyn_core::invariant::{cesaro_cluster, cycle_invariant_measures};
use subdyn_core::measure::{Measure, Submeasure};
use subdyn_core::sampling;
use subdyn_core::space::GroundFunction;
use subdyn_core::transfer::{pushforward, pushforward_value};

use crate::builtins;
use crate::scenario::{Parameters, Scenario, ScenarioError};

pub const STUDY_HEADER: &str = "resolution,points,h_top_spectral,h_top_words,push_indicator,push_complement,push_constant,cycle_count,invariant_mass,example1_value,example1_expected,h_top_delta,h_top_monotone";

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

/// One row of the study; `None` columns print empty.
struct Row {
    resolution: usize,
    points: usize,
    h_top: Option<f64>,
    h_words: Option<f64>,
    push: [Option<f64>; 3],
    cycle_count: Option<usize>,
    invariant_mass: Option<f64>,
    example1_value: Option<f64>,
    example1_expected: Option<f64>,
}

fn scenario_at(
    source: &str,
    base: &Scenario,
    params: &Parameters,
    resolution: usize,
) -> Result<Scenario, ScenarioError> {
    let mut p = params.clone();
    match source {
        "picard" | "fullshift" => {
            p.symbols = Some(resolution);
        }
        "blowup" => {
            p.fibers = Some(resolution);
        }
        _ => {}
    }
    match builtins::builtin(source, &p) {
        Some(s) => Ok(s),
        None => {
            // Constant family: the given scenario repeated at every resolution.
            let mut s = base.clone();
            s.parameters = p;
            Ok(s)
        }
    }
}

fn measure_row(scenario: &Scenario, resolution: usize) -> Result<Row, ScenarioError> {
    let params = &scenario.parameters;
    if let Some(spec) = &scenario.blowup {
        let (_, model) = spec.build()?;
        let model = match params.fibers {
            Some(k) => {
                let base_system = spec.base.build()?;
                let centers: Vec<usize> = spec
                    .center
                    .iter()
                    .map(|l| base_system.space.index_of(l).expect("validated center"))
                    .collect();
                subdyn_core::transfer::blowup_construct(
                    std::sync::Arc::clone(&base_system.space),
                    &centers,
                    &vec![k; centers.len()],
                    None,
                )?
            }
            None => model,
        };
        // Example-1 value against the fiber max at this resolution.
        let mut rng = sampling::rng(params.seed);
        let phi = sampling::random_ground(&mut rng, model.total.len(), -1.0, 1.0);
        let center = *model.center.iter().next().expect("center is nonempty");
        let mu = Submeasure::dirac(model.base.len(), center);
        let value = pushforward(&model.inverse, &mu)?.evaluate(&phi)?;
        let expected = model.fibers[&center]
            .iter()
            .map(|&z| phi.get(z))
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(Row {
            resolution,
            points: model.total.len(),
            h_top: None,
            h_words: None,
            push: [None, None, None],
            cycle_count: None,
            invariant_mass: None,
            example1_value: Some(value),
            example1_expected: Some(expected),
        });
    }

    let model = scenario
        .system
        .as_ref()
        .ok_or(ScenarioError::MissingSystem)?
        .build()?;
    let n = model.space.len();
    let shift = orbit_graph(&model.map).map_err(ScenarioError::Multimap)?;
    let h_top = top_entropy(&shift, TopEntropyMode::Spectral).ok();
    let h_words = top_entropy(&shift, TopEntropyMode::Words(params.words_l)).ok();
    // Fixed test functions: indicator of the first point, its complement, one.
    let first: subdyn_core::space::PointSet = [0].into_iter().collect();
    let rest: subdyn_core::space::PointSet = (1..n).collect();
    let tests = [
        GroundFunction::indicator(n, &first),
        GroundFunction::indicator(n, &rest),
        GroundFunction::constant(n, 1.0),
    ];
    let top = Submeasure::top(n);
    let mut push = [None, None, None];
    for (slot, phi) in push.iter_mut().zip(&tests) {
        *slot = pushforward_value(&model.map, &top, phi).ok();
    }
    let cycles = cycle_invariant_measures(&model.map).map_err(ScenarioError::Multimap)?;
    let uniform: Submeasure = Measure::new(vec![1.0 / n as f64; n])
        .expect("uniform weights")
        .into();
    let invariant_mass = cesaro_cluster(&model.map, &uniform, params.n_max, params.prune_cap)
        .ok()
        .map(|c| c.cluster.mass());
    Ok(Row {
        resolution,
        points: n,
        h_top,
        h_words,
        push,
        cycle_count: Some(cycles.len()),
        invariant_mass,
        example1_value: None,
        example1_expected: None,
    })
}

/// Runs the family and renders the CSV, including monotonicity/trend columns
/// for the topological entropy.
pub fn refinement_study(
    source: &str,
    base: &Scenario,
    params: &Parameters,
    resolutions: &[usize],
) -> Result<String, ScenarioError> {
    let mut out = String::from(STUDY_HEADER);
    out.push('\n');
    let mut previous_h: Option<f64> = None;
    let mut monotone = true;
    for &r in resolutions {
        let scenario = scenario_at(source, base, params, r)?;
        let row = measure_row(&scenario, r)?;
        let delta = match (row.h_top, previous_h) {
            (Some(h), Some(p)) => Some(h - p),
            _ => None,
        };
        if let Some(d) = delta {
            monotone &= d >= -1e-12;
        }
        previous_h = row.h_top.or(previous_h);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.resolution,
            row.points,
            fmt_opt(row.h_top),
            fmt_opt(row.h_words),
            fmt_opt(row.push[0]),
            fmt_opt(row.push[1]),
            fmt_opt(row.push[2]),
            row.cycle_count.map(|c| c.to_string()).unwrap_or_default(),
            fmt_opt(row.invariant_mass),
            fmt_opt(row.example1_value),
            fmt_opt(row.example1_expected),
            fmt_opt(delta),
            monotone,
        )
        .expect("string write");
    }
    Ok(out)
}
