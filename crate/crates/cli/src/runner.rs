//! Experiment execution: each scenario experiment runs deterministically with
//! its assertions embedded, and reports inputs, outputs, defects, and
//! approximation events.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;

use subdyn_core::entropy::{
    markov_entropy, orbit_graph, parry_measure, submeasure_entropy, top_entropy, variational_check,
    TopEntropyMode,
};
use subdyn_core::invariant::{
    cesaro_cluster, cesaro_sequence, cycle_invariant_measures, inv_geq, inv_leq, InvarianceStatus,
};
use subdyn_core::measure::{leq, weak_distance, Measure, Submeasure};
use subdyn_core::models::{self, ModelSystem};
use subdyn_core::multimap::compose_multimaps;
use subdyn_core::sampling;
use subdyn_core::space::GroundFunction;
use subdyn_core::transfer::{
    blowup_construct, pushforward, pushforward_value, pushforward_with_cap, BlowupModel,
};

use crate::report::{Checks, ExperimentReport, Report, SCHEMA_VERSION};
use crate::scenario::{ExperimentSpec, Parameters, Scenario, ScenarioError};

struct Context {
    system: Option<ModelSystem>,
    blowup: Option<BlowupModel>,
    submeasures: BTreeMap<String, Submeasure>,
    params: Parameters,
}

impl Context {
    fn system(&self) -> Result<&ModelSystem, ScenarioError> {
        self.system.as_ref().ok_or(ScenarioError::MissingSystem)
    }

    fn submeasure(&self, name: &str) -> Result<&Submeasure, ScenarioError> {
        self.submeasures
            .get(name)
            .ok_or_else(|| ScenarioError::UnknownSubmeasure(name.to_string()))
    }
}

/// Runs every experiment of the scenario and assembles the report. The report
/// is byte-stable across runs for identical inputs: all randomness is seeded
/// from the recorded seed and all iteration orders are fixed.
pub fn run_scenario(scenario: &Scenario) -> Result<Report, ScenarioError> {
    scenario.parameters.validate()?;
    let system = scenario.system.as_ref().map(|s| s.build()).transpose()?;
    let blowup = match &scenario.blowup {
        Some(spec) => Some(build_blowup(spec, &scenario.parameters)?),
        None => None,
    };
    let mut submeasures = BTreeMap::new();
    if let Some(model) = &system {
        for (name, spec) in &scenario.submeasures {
            submeasures.insert(name.clone(), spec.build(&model.space)?);
        }
    }
    let ctx = Context {
        system,
        blowup,
        submeasures,
        params: scenario.parameters.clone(),
    };
    let mut experiments = Vec::with_capacity(scenario.experiments.len());
    for spec in &scenario.experiments {
        experiments.push(run_experiment(&ctx, spec)?);
    }
    let passed = experiments.iter().all(|e| e.passed);
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        name: scenario.name.clone(),
        parameters: scenario.parameters.clone(),
        experiments,
        passed,
    })
}

/// Builds the scenario's blowup model, honoring the `fibers` size override and
/// using `delta` (when set) as the intra-fiber separation.
fn build_blowup(
    spec: &crate::scenario::BlowupSpec,
    params: &Parameters,
) -> Result<BlowupModel, ScenarioError> {
    let base_system = spec.base.build()?;
    let mut centers = Vec::new();
    let mut sizes = Vec::new();
    for label in &spec.center {
        centers.push(base_system.space.index_of(label).ok_or_else(|| {
            ScenarioError::UnknownLabel {
                label: label.clone(),
                context: "blowup center".into(),
            }
        })?);
        sizes.push(params.fibers.unwrap_or(*spec.fibers.get(label).unwrap_or(&1)));
    }
    Ok(blowup_construct(
        Arc::clone(&base_system.space),
        &centers,
        &sizes,
        params.delta,
    )?)
}

fn run_experiment(ctx: &Context, spec: &ExperimentSpec) -> Result<ExperimentReport, ScenarioError> {
    match spec {
        ExperimentSpec::Pushforward { submeasure } => pushforward_experiment(ctx, submeasure),
        ExperimentSpec::Cesaro { submeasure } => cesaro_experiment(ctx, submeasure),
        ExperimentSpec::InvLeq { submeasure } => inv_experiment(ctx, submeasure, true),
        ExperimentSpec::InvGeq { submeasure } => inv_experiment(ctx, submeasure, false),
        ExperimentSpec::Entropy => entropy_experiment(ctx),
        ExperimentSpec::Blowup => blowup_experiment(ctx),
        ExperimentSpec::Variational => variational_experiment(ctx),
        ExperimentSpec::Cremona => cremona_experiment(ctx),
        ExperimentSpec::Picard => picard_experiment(ctx),
    }
}

fn pushforward_experiment(ctx: &Context, name: &str) -> Result<ExperimentReport, ScenarioError> {
    let model = ctx.system()?;
    let mu = ctx.submeasure(name)?;
    let mut checks = Checks::new();
    let n = model.space.len();
    let pushed =
        pushforward_with_cap(&model.map, mu, ctx.params.cap).map_err(ScenarioError::Transfer)?;
    let one = GroundFunction::constant(n, 1.0);
    let minus = GroundFunction::constant(n, -1.0);
    checks.close(
        "mass_preserved_plus",
        pushed.evaluate(&one).map_err(ScenarioError::Measure)?,
        mu.evaluate(&one).map_err(ScenarioError::Measure)?,
        1e-12,
    );
    checks.close(
        "mass_preserved_minus",
        pushed.evaluate(&minus).map_err(ScenarioError::Measure)?,
        mu.evaluate(&minus).map_err(ScenarioError::Measure)?,
        1e-12,
    );
    let mut rng = sampling::rng(ctx.params.seed);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let phi = sampling::random_ground(&mut rng, n, -1.0, 1.0);
        let lazy = pushforward_value(&model.map, mu, &phi).map_err(ScenarioError::Transfer)?;
        let materialized = pushed.evaluate(&phi).map_err(ScenarioError::Measure)?;
        worst = worst.max((lazy - materialized).abs());
    }
    checks.at_most("materialized_matches_lazy", worst, 1e-12);
    let details = json!({
        "input_generators": mu.generator_count(),
        "output_generators": pushed.generator_count(),
        "norm": pushed.norm(),
        "max_lazy_gap": worst,
    });
    Ok(checks.finish("pushforward", details, Vec::new()))
}

fn cesaro_experiment(ctx: &Context, name: &str) -> Result<ExperimentReport, ScenarioError> {
    let model = ctx.system()?;
    let mu = ctx.submeasure(name)?;
    let steps = ctx.params.n_max.min(64);
    let run =
        cesaro_sequence(&model.map, mu, steps, ctx.params.prune_cap).map_err(err_into_scenario)?;
    let cluster = cesaro_cluster(&model.map, mu, ctx.params.n_max, ctx.params.prune_cap)
        .map_err(err_into_scenario)?;
    let mut checks = Checks::new();
    let pushed = pushforward(&model.map, &cluster.cluster).map_err(ScenarioError::Transfer)?;
    let dominated =
        leq(&cluster.cluster, &pushed, ctx.params.tol).map_err(ScenarioError::Measure)?;
    checks.check(
        "cluster_superinvariant",
        dominated.holds,
        format!("defect {:.3e}", dominated.defect),
    );
    let mut events: Vec<String> = run.events.iter().map(|e| format!("{e}")).collect();
    events.extend(cluster.events.iter().map(|e| format!("{e}")));
    let trace_tail: Vec<serde_json::Value> = run
        .trace
        .rows
        .iter()
        .rev()
        .take(5)
        .rev()
        .map(|r| {
            json!({
                "step": r.step,
                "generators": r.generator_count,
                "mass": r.mass,
                "defect": if r.defect.is_finite() { r.defect } else { -1.0 },
                "pruned": r.pruned,
            })
        })
        .collect();
    let details = json!({
        "steps": steps,
        "period": cluster.period,
        "transient": cluster.transient,
        "cluster_generators": cluster.cluster.generator_count(),
        "cluster_mass": cluster.cluster.mass(),
        "trace_tail": trace_tail,
        "trace_csv": run.trace.to_csv(),
    });
    Ok(checks.finish("cesaro", details, events))
}

fn err_into_scenario(e: subdyn_core::invariant::InvariantError) -> ScenarioError {
    ScenarioError::Experiment {
        kind: "invariant",
        message: format!("{e}"),
    }
}

fn inv_experiment(
    ctx: &Context,
    name: &str,
    downward: bool,
) -> Result<ExperimentReport, ScenarioError> {
    let model = ctx.system()?;
    let mu = ctx.submeasure(name)?;
    let outcome = if downward {
        inv_leq(&model.map, mu, ctx.params.tol, ctx.params.n_max)
    } else {
        inv_geq(&model.map, mu, ctx.params.tol, ctx.params.n_max)
    }
    .map_err(err_into_scenario)?;
    let mut checks = Checks::new();
    checks.check(
        "certified_invariant",
        outcome.certificate.status == InvarianceStatus::Invariant,
        format!(
            "status {}, defect {:.3e}",
            outcome.certificate.status, outcome.certificate.defect
        ),
    );
    let order = if downward {
        leq(&outcome.submeasure, mu, ctx.params.tol).map_err(ScenarioError::Measure)?
    } else {
        leq(mu, &outcome.submeasure, ctx.params.tol).map_err(ScenarioError::Measure)?
    };
    checks.check(
        if downward { "below_seed" } else { "above_seed" },
        order.holds,
        format!("defect {:.3e}", order.defect),
    );
    if downward {
        // Largest-element property against the computable invariant family.
        let mut all_dominated = true;
        let mut detail = String::from("cycle measures below the seed: ");
        for rho in cycle_invariant_measures(&model.map).map_err(ScenarioError::Multimap)? {
            let as_sub: Submeasure = rho.into();
            if leq(&as_sub, mu, ctx.params.tol)
                .map_err(ScenarioError::Measure)?
                .holds
            {
                let ok = leq(&as_sub, &outcome.submeasure, ctx.params.tol)
                    .map_err(ScenarioError::Measure)?
                    .holds;
                all_dominated &= ok;
                detail.push_str(if ok { "+" } else { "-" });
            }
        }
        checks.check("dominates_cycle_measures", all_dominated, detail);
    }
    let events: Vec<String> = outcome.events.iter().map(|e| format!("{e}")).collect();
    let details = json!({
        "iterations": outcome.iterations,
        "generators": outcome.submeasure.generator_count(),
        "mass": outcome.submeasure.mass(),
        "final_defect": outcome.trace.rows.last().map(|r| r.defect).unwrap_or(0.0),
        "trace_csv": outcome.trace.to_csv(),
    });
    Ok(checks.finish(
        if downward { "inv_leq" } else { "inv_geq" },
        details,
        events,
    ))
}

fn entropy_experiment(ctx: &Context) -> Result<ExperimentReport, ScenarioError> {
    let model = ctx.system()?;
    let shift = orbit_graph(&model.map).map_err(ScenarioError::Multimap)?;
    let mut checks = Checks::new();
    let h_top = top_entropy(&shift, TopEntropyMode::Spectral).map_err(entropy_err)?;
    let mut words_table = BTreeMap::new();
    let mut last_words = f64::INFINITY;
    let mut monotone = true;
    for l in [4usize, 8, 12, 16, ctx.params.words_l] {
        if l == 0 || words_table.contains_key(&format!("{l}")) {
            continue;
        }
        let w = top_entropy(&shift, TopEntropyMode::Words(l)).map_err(entropy_err)?;
        monotone &= w <= last_words + 1e-12;
        last_words = w;
        words_table.insert(format!("{l}"), w);
    }
    checks.check(
        "words_upper_approximation",
        last_words >= h_top - 1e-12 && monotone,
        format!(
            "words({}) = {last_words:.9}, spectral {h_top:.9}",
            ctx.params.words_l
        ),
    );
    let top = Submeasure::top(model.space.len());
    let solve = submeasure_entropy(&model.map, &top, ctx.params.tol).map_err(entropy_err)?;
    checks.close("variational_identity", solve.value, h_top, 1e-3);
    let components = shift.component_spectra().map_err(entropy_err)?;
    if shift.is_irreducible() {
        let parry = parry_measure(&shift).map_err(entropy_err)?;
        checks.close(
            "parry_attains_spectral",
            markov_entropy(&parry),
            h_top,
            1e-6,
        );
    }
    let component_table: Vec<serde_json::Value> = components
        .iter()
        .map(|c| {
            json!({
                "vertices": c.vertices.iter().map(|&v| model.space.label(v)).collect::<Vec<_>>(),
                "rho": c.rho,
                "log_rho": if c.rho > 0.0 { c.rho.ln() } else { f64::NEG_INFINITY },
            })
        })
        .collect();
    let details = json!({
        "h_top_spectral": h_top,
        "h_top_words": words_table,
        "h_submeasure": solve.value,
        "gap": (solve.value - h_top).abs(),
        "component_table": component_table,
    });
    Ok(checks.finish("entropy", details, Vec::new()))
}

fn entropy_err(e: subdyn_core::entropy::EntropyError) -> ScenarioError {
    ScenarioError::Experiment {
        kind: "entropy",
        message: format!("{e}"),
    }
}

fn blowup_experiment(ctx: &Context) -> Result<ExperimentReport, ScenarioError> {
    let model = ctx.blowup.as_ref().ok_or(ScenarioError::MissingSystem)?;
    let mut checks = Checks::new();
    let mut rng = sampling::rng(ctx.params.seed);
    let nz = model.total.len();

    // Center Dirac pullback = fiber max, over seeded random functions.
    let mut worst_fiber = 0.0_f64;
    for &a in &model.center {
        let mu = Submeasure::dirac(model.base.len(), a);
        let pushed = pushforward(&model.inverse, &mu).map_err(ScenarioError::Transfer)?;
        for _ in 0..100 {
            let phi = sampling::random_ground(&mut rng, nz, -1.0, 1.0);
            let fiber_max = model.fibers[&a]
                .iter()
                .map(|&z| phi.get(z))
                .fold(f64::NEG_INFINITY, f64::max);
            let value = pushed.evaluate(&phi).map_err(ScenarioError::Measure)?;
            worst_fiber = worst_fiber.max((value - fiber_max).abs());
        }
    }
    checks.at_most("center_dirac_is_fiber_max", worst_fiber, 1e-12);

    // Mass-splitting decomposition, both sides by independent routes.
    let mut worst_split = 0.0_f64;
    for _ in 0..100 {
        let mu: Submeasure =
            sampling::random_measure(&mut rng, model.base.len(), model.base.len(), 1.0).into();
        let phi = sampling::random_ground(&mut rng, nz, -1.0, 1.0);
        let decomposition = subdyn_core::transfer::blowup_decompose(model, &mu, &phi)
            .map_err(ScenarioError::Transfer)?;
        worst_split = worst_split.max((decomposition.lhs - decomposition.rhs).abs());
    }
    checks.at_most("decomposition_residual", worst_split, 1e-12);

    let fibers: BTreeMap<String, usize> = model
        .fibers
        .iter()
        .map(|(&a, f)| (model.base.label(a).to_string(), f.len()))
        .collect();
    let details = json!({
        "base_points": model.base.len(),
        "total_points": model.total.len(),
        "fibers": fibers,
        "max_fiber_residual": worst_fiber,
        "max_split_residual": worst_split,
    });
    Ok(checks.finish("blowup", details, Vec::new()))
}

fn variational_experiment(ctx: &Context) -> Result<ExperimentReport, ScenarioError> {
    let model = ctx.system()?;
    let report = variational_check(&model.map, 1e-3).map_err(entropy_err)?;
    let mut checks = Checks::new();
    checks.check(
        "variational_principle",
        report.passed,
        format!("gap {:.3e}", report.gap),
    );
    checks.close(
        "invariant_sup_attains_h_top",
        report.h_submeasure_invariant,
        report.h_top_spectral,
        1e-3,
    );
    let details = json!({
        "h_top_spectral": report.h_top_spectral,
        "h_submeasure": report.h_submeasure_top,
        "h_submeasure_invariant": report.h_submeasure_invariant,
        "gap": report.gap,
        "component_count": report.components.len(),
    });
    Ok(checks.finish("variational", details, Vec::new()))
}

fn cremona_experiment(ctx: &Context) -> Result<ExperimentReport, ScenarioError> {
    let model = ctx.system()?;
    let space = &model.space;
    let n = space.len();
    let e0 = space
        .index_of("e0")
        .ok_or_else(|| ScenarioError::UnknownLabel {
            label: "e0".into(),
            context: "cremona experiment".into(),
        })?;
    let s1 = space
        .index_of("s1")
        .ok_or_else(|| ScenarioError::UnknownLabel {
            label: "s1".into(),
            context: "cremona experiment".into(),
        })?;
    let mut checks = Checks::new();
    let delta_e0 = Submeasure::dirac(n, e0);
    let once = pushforward(&model.map, &delta_e0).map_err(ScenarioError::Transfer)?;
    let twice = pushforward(&model.map, &once).map_err(ScenarioError::Transfer)?;
    let identity = models::cremona_identity_composite();
    let delta = ctx.params.delta.unwrap_or_else(|| model.space.max_distance());
    let composition = compose_multimaps(&model.map, &model.map, Some(&identity), delta)
        .map_err(ScenarioError::Multimap)?;
    let through =
        pushforward(&composition.composite, &delta_e0).map_err(ScenarioError::Transfer)?;
    checks.at_most(
        "composite_fixes_the_point",
        weak_distance(&through, &delta_e0, None).map_err(ScenarioError::Measure)?,
        0.0,
    );
    let witness = GroundFunction::indicator(n, &[s1].into_iter().collect());
    let strict = twice.evaluate(&witness).map_err(ScenarioError::Measure)?
        - delta_e0
            .evaluate(&witness)
            .map_err(ScenarioError::Measure)?;
    checks.check(
        "strict_inequality_witness",
        strict >= 1.0 - 1e-9,
        format!("witness gap {strict:.12}"),
    );
    let relation_at_e0: Vec<String> = composition
        .relation
        .images(e0)
        .iter()
        .map(|&y| space.label(y).to_string())
        .collect();
    checks.check(
        "relation_strictly_contains_composite",
        composition.relation.images(e0).len() > 1 && composition.relation.images(e0).contains(&e0),
        format!("relation at e0: {relation_at_e0:?}"),
    );
    let details = json!({
        "witness_label": space.label(s1),
        "witness_gap": strict,
        "double_push_generators": twice.generator_count(),
        "relation_at_e0": relation_at_e0,
    });
    Ok(checks.finish("cremona", details, Vec::new()))
}

fn picard_experiment(ctx: &Context) -> Result<ExperimentReport, ScenarioError> {
    let model = ctx.system()?;
    let n = model.space.len();
    let x0 = model
        .space
        .index_of("inf")
        .ok_or_else(|| ScenarioError::UnknownLabel {
            label: "inf".into(),
            context: "picard experiment".into(),
        })?;
    let mut checks = Checks::new();
    let top = Submeasure::top(n);
    let pushed_top = pushforward(&model.map, &top).map_err(ScenarioError::Transfer)?;
    checks.at_most(
        "top_is_fixed",
        weak_distance(&pushed_top, &top, None).map_err(ScenarioError::Measure)?,
        0.0,
    );
    let mut rng = sampling::rng(ctx.params.seed);
    let mut worst = 0.0_f64;
    for &a in &[0.0, 0.3, 1.0] {
        for _ in 0..20 {
            let mut weights = sampling::random_measure(&mut rng, n, n.max(2) - 1, 1.0)
                .weights()
                .to_vec();
            weights[x0] = 0.0;
            let mu0 = Measure::new(weights).map_err(ScenarioError::Measure)?;
            let with_atom: Submeasure = mu0.add(&Measure::dirac(n, x0).scale(a)).into();
            let lhs = pushforward(&model.map, &with_atom).map_err(ScenarioError::Transfer)?;
            let rhs = pushforward(&model.map, &mu0.clone().into())
                .map_err(ScenarioError::Transfer)?
                .add(&top.scale(a).map_err(ScenarioError::Measure)?)
                .map_err(ScenarioError::Measure)?;
            worst = worst.max(weak_distance(&lhs, &rhs, None).map_err(ScenarioError::Measure)?);
        }
    }
    checks.at_most("transcendental_split", worst, 1e-12);
    let details = json!({
        "points": n,
        "max_split_residual": worst,
    });
    Ok(checks.finish("picard", details, Vec::new()))
}
