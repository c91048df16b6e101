use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use serde_json::{json, Value};

use super::doc::{ModelSpec, NamedState, ProblemDocument};
use super::report::{fmt_f64, Check, Csv, RunReport};
use super::{require, Args, Command, Outcome};
use crate::bellchsh::{chsh_grid_max, chsh_value, horodecki_max, ChshSetting};
use crate::dwigner::{fourier_state, negativity, phase_point_operators, reconstruct_from_wigner, wigner};
use crate::error::{Error, Result};
use crate::feasopt::{
    alternate_search, ks_assignment_count, simplex_solve, single_point_program, solve_responses, validate_ray_set,
    verify_certificate, certificate_gap, FeasibilityProblem,
};
use crate::onto::{
    bell_model_qubit, bohm_region_probability, check_dispersion_free, delta_model, ks_model_qubit, predict,
    theorem_structure_check, EpistemicWeights, OnticSpace, OntoModel, ResponseVector, TabulatedModel,
};
use crate::qcore::{born_probability, standard_ic_states, PureState};

const DEFAULT_SEED: u64 = 0;
const DEFAULT_KS_LATTICE: usize = 20_000;
const DEFAULT_BELL_GRID: usize = 1000;
const DEFAULT_RESTARTS: usize = 20;
const DEFAULT_MAX_ITERS: usize = 200;
const DEFAULT_GRID_STEPS: usize = 12;
const DEFAULT_REFINE_ITERS: usize = 5;
/// Grid-search values may exceed the closed-form maximum by at most this.
const ORACLE_MARGIN: f64 = 1e-6;
const TSIRELSON_MARGIN: f64 = 1e-9;
/// Violations listed in full in a theorem-check report.
const LISTED_VIOLATIONS: usize = 20;

/// Resolves option values (flag, then document, then default) and records them.
struct Options {
    resolved: BTreeMap<String, Value>,
}

impl Options {
    fn new() -> Self {
        Self {
            resolved: BTreeMap::new(),
        }
    }

    fn pick<T: Copy + Into<Value>>(&mut self, key: &str, flag: Option<T>, doc: Option<T>, default: T) -> T {
        let v = flag.or(doc).unwrap_or(default);
        self.resolved.insert(key.into(), v.into());
        v
    }

    fn set<T: Into<Value>>(&mut self, key: &str, v: T) {
        self.resolved.insert(key.into(), v.into());
    }
}

fn finish(
    command: &Command,
    doc: &ProblemDocument,
    options: Options,
    results: Value,
    checks: Vec<Check>,
    csv: Option<Csv>,
    export: Option<String>,
) -> Outcome {
    let passed = checks.iter().all(|c| c.passed);
    Outcome {
        report: RunReport {
            command: command.name().into(),
            input: String::new(),
            input_digest: String::new(),
            options: options.resolved,
            input_norms: doc.input_norms(),
            results,
            checks,
            passed,
        },
        csv,
        export,
    }
}

pub(super) fn dispatch(command: &Command, doc: &ProblemDocument) -> Result<Outcome> {
    let args = command.args();
    match command {
        Command::VerifyModel(_) => verify_model(command, args, doc),
        Command::TheoremCheck(_) => theorem_check(command, args, doc),
        Command::Feasibility(_) => feasibility(command, args, doc),
        Command::KsSearch(_) => ks_search(command, doc),
        Command::Chsh(_) => chsh(command, args, doc),
        Command::Wigner(_) => wigner_tables(command, args, doc),
        Command::Bohm(_) => bohm(command, args, doc),
    }
}

fn states_or_err(doc: &ProblemDocument) -> Result<Vec<PureState>> {
    require(!doc.states.is_empty(), "document lists no states")?;
    Ok(doc.state_vectors())
}

fn model_kind(spec: &ModelSpec) -> &'static str {
    match spec {
        ModelSpec::Delta => "delta",
        ModelSpec::Ks { .. } => "ks",
        ModelSpec::Bell { .. } => "bell",
        ModelSpec::Table { .. } => "table",
    }
}

fn build_model(args: &Args, doc: &ProblemDocument, opts: &mut Options) -> Result<Box<dyn OntoModel>> {
    let spec = doc.model.clone().unwrap_or(ModelSpec::Delta);
    opts.set("model", model_kind(&spec));
    let states = states_or_err(doc)?;
    Ok(match spec {
        ModelSpec::Delta => Box::new(delta_model(&states)?),
        ModelSpec::Ks { lattice } => {
            let n = opts.pick("lattice", args.lattice, lattice.or(doc.options.lattice), DEFAULT_KS_LATTICE);
            Box::new(ks_model_qubit(n)?)
        }
        ModelSpec::Bell { grid } => {
            let m = opts.pick("lattice", args.lattice, grid.or(doc.options.lattice), DEFAULT_BELL_GRID);
            Box::new(bell_model_qubit(&states, m)?)
        }
        ModelSpec::Table {
            ontic,
            weights,
            responses,
        } => {
            let weights = weights.into_iter().map(EpistemicWeights::new).collect::<Result<_>>()?;
            let responses = responses.into_iter().map(ResponseVector::new).collect::<Result<_>>()?;
            Box::new(TabulatedModel::new(
                OnticSpace::new(ontic)?,
                states,
                weights,
                doc.effect_vectors(),
                responses,
            )?)
        }
    })
}

fn effects_or_states(doc: &ProblemDocument) -> Vec<NamedState> {
    if doc.effects.is_empty() {
        doc.states.clone()
    } else {
        doc.effects.clone()
    }
}

fn verify_model(command: &Command, args: &Args, doc: &ProblemDocument) -> Result<Outcome> {
    let mut opts = Options::new();
    let tol = opts.pick("tol", args.tol, doc.options.tol, 1e-9);
    let model = build_model(args, doc, &mut opts)?;
    let effects = effects_or_states(doc);
    let mut csv = Csv::new(&["state", "effect", "predicted", "born", "abs_error"]);
    let mut worst: f64 = 0.0;
    for s in &doc.states {
        for e in &effects {
            let p = predict(model.as_ref(), &s.state, &e.state)?;
            let b = born_probability(&s.state, &e.state)?;
            worst = worst.max((p - b).abs());
            csv.push(vec![s.name.clone(), e.name.clone(), fmt_f64(p), fmt_f64(b), fmt_f64((p - b).abs())]);
        }
    }
    let effect_states: Vec<PureState> = effects.iter().map(|e| e.state.clone()).collect();
    let dispersion_free = check_dispersion_free(model.as_ref(), &effect_states)?;
    let export = match &args.export_model {
        Some(_) => {
            let table = TabulatedModel::from_model(model.as_ref(), &doc.state_vectors(), &effect_states)?;
            let exported = ProblemDocument {
                dim: doc.dim,
                states: doc.states.clone(),
                effects: effects.clone(),
                model: Some(ModelSpec::Table {
                    ontic: table.ontic().labels().to_vec(),
                    weights: table.weight_table().iter().map(|w| w.as_slice().to_vec()).collect(),
                    responses: table.response_table().iter().map(|r| r.as_slice().to_vec()).collect(),
                }),
                options: Default::default(),
                density: None,
                region: None,
                expected: None,
                rays: None,
            };
            Some(exported.to_json())
        }
        None => None,
    };
    let results = json!({
        "dim": model.dim(),
        "ontic_size": model.ontic_size(),
        "states": doc.states.len(),
        "effects": effects.len(),
        "max_abs_error": worst,
        "dispersion_free": dispersion_free,
    });
    let checks = vec![Check::at_most("born_reproduction", worst, tol)];
    Ok(finish(command, doc, opts, results, checks, Some(csv), export))
}

fn theorem_check(command: &Command, args: &Args, doc: &ProblemDocument) -> Result<Outcome> {
    let mut opts = Options::new();
    let tol = opts.pick("tol", args.tol, doc.options.tol, 1e-9);
    let model = build_model(args, doc, &mut opts)?;
    let prepared = doc.state_vectors();
    let ic = if doc.effects.is_empty() {
        opts.set("ic_effects", "standard");
        standard_ic_states(model.dim())?
    } else {
        opts.set("ic_effects", "document");
        doc.effect_vectors()
    };
    let rep = theorem_structure_check(model.as_ref(), &prepared, &ic, tol)?;
    let mut support_sizes = vec![0usize; prepared.len()];
    for s in rep.support_map.iter().flatten() {
        support_sizes[*s] += 1;
    }
    let listed: Vec<Value> = rep
        .violations
        .iter()
        .take(LISTED_VIOLATIONS)
        .map(|v| json!({"point": v.point, "state_a": v.state_a, "state_b": v.state_b}))
        .collect();
    let results = json!({
        "ontic_size": rep.ontic_size,
        "prepared": rep.prepared,
        "distinct_prepared": rep.distinct_prepared,
        "born_residual": rep.born_residual,
        "reconstruction_residual": rep.reconstruction_residual,
        "max_lambda_deviation": rep.max_lambda_deviation(),
        "max_proportionality_deviation": rep.max_proportionality_deviation(),
        "max_lambda_mean_residual": rep.max_lambda_mean_residual(),
        "born_response_residual": rep.born_response_residual,
        "supports_disjoint": rep.supports_disjoint,
        "violation_count": rep.violations.len(),
        "violations": listed,
        "support_sizes": support_sizes,
        "inconsistent_points": rep.inconsistent_points.len(),
        "operator_bound_violation": rep.operator_bound_violation,
        "dimension_bound_holds": rep.dimension_bound_holds(),
    });
    let checks = vec![
        Check::at_most("born_residual", rep.born_residual, tol),
        Check::at_most("reconstruction_residual", rep.reconstruction_residual, tol),
        Check::at_most("lambda_deviation", rep.max_lambda_deviation(), tol),
        Check::at_most("born_response_residual", rep.born_response_residual, tol),
        Check::flag("supports_disjoint", rep.supports_disjoint),
        Check::flag("dimension_bound", rep.dimension_bound_holds()),
    ];
    let mut csv = Csv::new(&["point", "state", "lambda", "deviation"]);
    for e in &rep.proportionality {
        csv.push(vec![e.point.to_string(), e.state.to_string(), fmt_f64(e.lambda), fmt_f64(e.deviation)]);
    }
    Ok(finish(command, doc, opts, results, checks, Some(csv), None))
}

/// One ontic size: verdict, residual and, when infeasible, the certificate.
struct FeasibilityRow {
    ontic_size: usize,
    verdict: &'static str,
    residual: f64,
    best_restart: Option<usize>,
    iterations: Vec<usize>,
    certificate: Option<(Vec<f64>, bool, f64)>,
    frozen_weights_certificate: Option<bool>,
}

impl FeasibilityRow {
    fn to_json(&self) -> Value {
        let mut v = json!({
            "ontic_size": self.ontic_size,
            "verdict": self.verdict,
            "best_residual": self.residual,
        });
        let m = v.as_object_mut().expect("object");
        if let Some(r) = self.best_restart {
            m.insert("best_restart".into(), r.into());
            m.insert("iterations".into(), json!(self.iterations));
        }
        if let Some((y, ok, gap)) = &self.certificate {
            m.insert("certificate".into(), json!(y));
            m.insert("certificate_verified".into(), (*ok).into());
            m.insert("certificate_gap".into(), (*gap).into());
        }
        if let Some(ok) = self.frozen_weights_certificate {
            m.insert("frozen_weights_infeasible".into(), ok.into());
        }
        v
    }
}

fn solve_ontic_size(
    problem: &FeasibilityProblem,
    restarts: usize,
    max_iters: usize,
    seed: u64,
    tol: f64,
) -> Result<FeasibilityRow> {
    let k = problem.ontic_size();
    if k == 1 {
        let lp = single_point_program(problem)?;
        let out = simplex_solve(&lp)?;
        return Ok(match out.certificate {
            Some(y) => {
                let ok = verify_certificate(&lp, &y);
                let gap = certificate_gap(&lp, &y).unwrap_or(f64::NAN);
                FeasibilityRow {
                    ontic_size: 1,
                    verdict: "infeasible",
                    residual: f64::NAN,
                    best_restart: None,
                    iterations: Vec::new(),
                    certificate: Some((y, ok, gap)),
                    frozen_weights_certificate: None,
                }
            }
            None => {
                let x = out.solution.expect("optimal outcome carries a solution");
                let p = DMatrix::from_row_slice(problem.num_effects(), 1, &x);
                let rho = DMatrix::from_element(1, problem.num_states(), 1.0);
                FeasibilityRow {
                    ontic_size: 1,
                    verdict: "feasible",
                    residual: problem.residual(&p, &rho),
                    best_restart: None,
                    iterations: Vec::new(),
                    certificate: None,
                    frozen_weights_certificate: None,
                }
            }
        });
    }
    let rep = alternate_search(problem, restarts, max_iters, seed)?;
    let feasible = rep.best_residual <= tol;
    let frozen = if feasible {
        None
    } else {
        let lp = crate::feasopt::responses_program(problem, &rep.best_weights)?;
        let out = solve_responses(problem, &rep.best_weights)?;
        Some(out.certificate.as_ref().is_some_and(|y| verify_certificate(&lp, y)))
    };
    Ok(FeasibilityRow {
        ontic_size: k,
        verdict: if feasible { "feasible" } else { "not_found" },
        residual: rep.best_residual,
        best_restart: Some(rep.best_restart),
        iterations: rep.iterations,
        certificate: None,
        frozen_weights_certificate: frozen,
    })
}

fn feasibility(command: &Command, args: &Args, doc: &ProblemDocument) -> Result<Outcome> {
    let mut opts = Options::new();
    let states = states_or_err(doc)?;
    let effects: Vec<PureState> = effects_or_states(doc).into_iter().map(|e| e.state).collect();
    let s = states.len();
    let tol = opts.pick("tol", args.tol, doc.options.tol, 1e-9);
    let seed = opts.pick("seed", args.seed, doc.options.seed, DEFAULT_SEED);
    let restarts = opts.pick("restarts", args.restarts, doc.options.restarts, DEFAULT_RESTARTS);
    let max_iters = opts.pick("max_iters", args.max_iters, doc.options.max_iters, DEFAULT_MAX_ITERS);
    let base = FeasibilityProblem::new(states, effects, 1)?;
    let sizes: Vec<usize> = if args.sweep {
        opts.set("sweep", true);
        (1..=s).collect()
    } else {
        let k = opts.pick("ontic_size", args.ontic_size, doc.options.ontic_size, s);
        vec![k]
    };
    let mut rows = Vec::with_capacity(sizes.len());
    for &k in &sizes {
        rows.push(solve_ontic_size(&base.with_ontic_size(k)?, restarts, max_iters, seed, tol)?);
    }
    let mut checks = Vec::new();
    for row in &rows {
        let label = format!("K={}", row.ontic_size);
        match row.verdict {
            "infeasible" => {
                let ok = row.certificate.as_ref().is_some_and(|c| c.1);
                checks.push(Check::flag(&format!("{label} certificate_verified"), ok));
            }
            "feasible" => checks.push(Check::at_most(&format!("{label} residual"), row.residual, tol)),
            // in a sweep, undecided sizes are observations, except where a
            // point per state makes an exact model available
            _ if !args.sweep || row.ontic_size >= s => {
                checks.push(Check::at_most(&format!("{label} residual"), row.residual, tol))
            }
            _ => {}
        }
    }
    let mut csv = Csv::new(&["ontic_size", "verdict", "best_residual", "best_restart"]);
    for row in &rows {
        csv.push(vec![
            row.ontic_size.to_string(),
            row.verdict.to_string(),
            fmt_f64(row.residual),
            row.best_restart.map(|r| r.to_string()).unwrap_or_default(),
        ]);
    }
    let results = json!({
        "dim": base.dim(),
        "states": base.num_states(),
        "effects": base.num_effects(),
        "runs": rows.iter().map(FeasibilityRow::to_json).collect::<Vec<_>>(),
    });
    Ok(finish(command, doc, opts, results, checks, Some(csv), None))
}

fn ks_search(command: &Command, doc: &ProblemDocument) -> Result<Outcome> {
    let set = doc
        .rays
        .as_ref()
        .ok_or_else(|| Error::Document("document has no \"rays\"/\"bases\"".into()))?;
    let report = validate_ray_set(set);
    let opts = Options::new();
    let mut results = json!({
        "dim": set.dim(),
        "rays": set.rays().len(),
        "bases": set.bases().len(),
        "violations": report.violations,
    });
    let mut csv = None;
    if report.is_valid() {
        let count = ks_assignment_count(set)?;
        let m = results.as_object_mut().expect("object");
        m.insert("count".into(), count.count.into());
        m.insert("assignments_listed".into(), count.assignments.is_some().into());
        if let Some(list) = &count.assignments {
            let header: Vec<String> = (0..set.rays().len()).map(|r| format!("ray{r}")).collect();
            let mut table = Csv::new(&header);
            for a in list {
                table.push(a.iter().map(|v| v.to_string()).collect());
            }
            csv = Some(table);
        }
    }
    let checks = vec![Check::flag("ray_set_valid", report.is_valid())];
    Ok(finish(command, doc, opts, results, checks, csv, None))
}

fn chsh(command: &Command, args: &Args, doc: &ProblemDocument) -> Result<Outcome> {
    let mut opts = Options::new();
    states_or_err(doc)?;
    let seed = opts.pick("seed", args.seed, doc.options.seed, DEFAULT_SEED);
    let steps = opts.pick("grid_steps", args.grid_steps, doc.options.grid_steps, DEFAULT_GRID_STEPS);
    let refine = opts.pick("refine_iters", args.refine_iters, doc.options.refine_iters, DEFAULT_REFINE_ITERS);
    let tol = opts.pick("tol", args.tol, doc.options.tol, ORACLE_MARGIN);
    let names = ["theta_a", "phi_a", "theta_a2", "phi_a2", "theta_b", "phi_b", "theta_b2", "phi_b2"];
    let mut header = vec!["state"];
    header.extend(names);
    header.extend(["chsh", "horodecki"]);
    let mut csv = Csv::new(&header);
    let mut per_state = Vec::new();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut largest = 0.0f64;
    for s in &doc.states {
        let standard = chsh_value(&s.state, &ChshSetting::standard())?;
        let grid = chsh_grid_max(&s.state, steps, refine, seed)?;
        let h = horodecki_max(&s.state)?;
        worst_excess = worst_excess.max(grid.value - h);
        largest = largest.max(standard.abs()).max(grid.value.abs()).max(h);
        let angles = grid.setting.angles();
        let mut row = vec![s.name.clone()];
        row.extend(angles.iter().map(|a| fmt_f64(*a)));
        row.extend([fmt_f64(grid.value), fmt_f64(h)]);
        csv.push(row);
        per_state.push(json!({
            "name": s.name,
            "standard_setting": standard,
            "grid_max": grid.value,
            "grid_angles": angles.to_vec(),
            "horodecki_max": h,
        }));
    }
    let results = json!({ "states": per_state });
    let checks = vec![
        Check::at_most("grid_below_closed_form", worst_excess, tol),
        Check::at_most("tsirelson_bound", largest, 2.0 * SQRT_2 + TSIRELSON_MARGIN),
    ];
    Ok(finish(command, doc, opts, results, checks, Some(csv), None))
}

fn wigner_tables(command: &Command, args: &Args, doc: &ProblemDocument) -> Result<Outcome> {
    let mut opts = Options::new();
    let tol = opts.pick("tol", args.tol, doc.options.tol, 1e-10);
    states_or_err(doc)?;
    let d = doc.dim.expect("states imply a dimension");
    let pps = phase_point_operators(d)?;
    let mut header = vec!["state".to_string(), "q".to_string()];
    header.extend((0..d).map(|p| format!("p{p}")));
    let mut csv = Csv::new(&header);
    let (mut sum_err, mut marg_err, mut trip_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut per_state = Vec::new();
    for s in &doc.states {
        let rho = s.state.projector().to_operator();
        let w = wigner(&rho, &pps)?;
        for q in 0..d {
            let mut row = vec![s.name.clone(), q.to_string()];
            row.extend((0..d).map(|p| fmt_f64(w.get(q, p))));
            csv.push(row);
        }
        sum_err = sum_err.max((w.sum() - 1.0).abs());
        for (q, m) in w.position_marginal().iter().enumerate() {
            marg_err = marg_err.max((m - born_probability(&s.state, &PureState::basis(d, q)?)?).abs());
        }
        for (p, m) in w.momentum_marginal().iter().enumerate() {
            marg_err = marg_err.max((m - born_probability(&s.state, &fourier_state(d, p)?)?).abs());
        }
        trip_err = trip_err.max(reconstruct_from_wigner(&w, &pps)?.max_abs_diff(&rho));
        per_state.push(json!({
            "name": s.name,
            "sum": w.sum(),
            "min": w.min(),
            "negativity": negativity(&w),
        }));
    }
    let results = json!({ "dim": d, "states": per_state });
    let checks = vec![
        Check::at_most("normalization", sum_err, tol),
        Check::at_most("marginals", marg_err, tol),
        Check::at_most("round_trip", trip_err, tol),
    ];
    Ok(finish(command, doc, opts, results, checks, Some(csv), None))
}

fn bohm(command: &Command, args: &Args, doc: &ProblemDocument) -> Result<Outcome> {
    let mut opts = Options::new();
    let density = doc
        .density
        .as_ref()
        .ok_or_else(|| Error::Document("document has no \"density\"".into()))?;
    let [a, b] = doc
        .region
        .ok_or_else(|| Error::Document("document has no \"region\"".into()))?;
    let tol = opts.pick("tol", args.tol, doc.options.tol, 1e-4);
    let p = bohm_region_probability(density, a, b)?;
    let results = json!({
        "region": [a, b],
        "probability": p.probability,
        "clipped": p.clipped,
        "grid": {"x_min": density.x_min(), "x_max": density.x_max(), "points": density.values().len()},
        "expected": doc.expected,
    });
    let mut checks = Vec::new();
    if let Some(expected) = doc.expected {
        checks.push(Check::at_most("expected_probability", (p.probability - expected).abs(), tol));
    }
    let mut csv = Csv::new(&["a", "b", "probability", "clipped"]);
    csv.push(vec![fmt_f64(a), fmt_f64(b), fmt_f64(p.probability), p.clipped.to_string()]);
    Ok(finish(command, doc, opts, results, checks, Some(csv), None))
}
