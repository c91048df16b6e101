//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::f64::consts::{PI, SQRT_2};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::Value;

use ontolab::bellchsh::{bell_states, chsh_grid_max, chsh_value, horodecki_max, ChshSetting};
use ontolab::dwigner::{negativity, phase_point_operators, reconstruct_from_wigner, wigner};
use ontolab::feasopt::{
    cabello18, ks_assignment_count, responses_program, simplex_solve, single_point_program, solve_responses,
    solve_rho, validate_ray_set, verify_certificate, FeasibilityProblem, RaySet,
};
use ontolab::onto::{
    check_dispersion_free, delta_model, ks_model_qubit, predict, predict_from, theorem_structure_check,
    IcReconstructor, OntoModel,
};
use ontolab::qcore::{
    random_pure_state_with, seeded_rng, standard_ic_states, tensor_product, BlochVector, HermitianOperator,
    PureState,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// `|<a|b>|^2` summed out by hand.
fn born(a: &PureState, b: &PureState) -> f64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    re * re + im * im
}

fn states(dim: usize, n: usize, seed: u64) -> Vec<PureState> {
    let mut rng = seeded_rng(seed);
    (0..n).map(|_| random_pure_state_with(dim, &mut rng).unwrap()).collect()
}

fn qubit(re: [f64; 2], im: [f64; 2]) -> PureState {
    PureState::new(vec![Complex64::new(re[0], im[0]), Complex64::new(re[1], im[1])]).unwrap()
}

fn born_reproduction() -> Outcome {
    let mut worst = 0.0f64;
    for d in 2..=5 {
        let prepared = states(d, 50, 100 + d as u64);
        let effects = states(d, 1000, 200 + d as u64);
        let model = delta_model(&prepared).unwrap();
        let weights: Vec<_> = prepared.iter().map(|p| model.weights(p).unwrap()).collect();
        for phi in &effects {
            let r = model.responses(phi).unwrap();
            for (psi, w) in prepared.iter().zip(&weights) {
                worst = worst.max((predict_from(w, &r) - born(psi, phi)).abs());
            }
        }
    }
    outcome(worst < 1e-12, format!("max |predict - born| = {worst:.3e}"))
}

fn ks_qubit_model() -> Outcome {
    let model = ks_model_qubit(200_000).unwrap();
    let up = PureState::basis(2, 0).unwrap();
    let mut worst = 0.0f64;
    let mut sharp = true;
    let mut tied = 0;
    for i in 0..25 {
        let theta = PI * i as f64 / 24.0;
        let n = BlochVector::from_angles(theta, 0.0);
        let phi = PureState::from_bloch(&n).unwrap();
        let p = predict(&model, &up, &phi).unwrap();
        worst = worst.max((p - (1.0 + theta.cos()) / 2.0).abs());
        if model.ties(&n) > 0 {
            tied += 1;
        } else {
            sharp &= check_dispersion_free(&model, std::slice::from_ref(&phi)).unwrap();
        }
    }
    outcome(
        worst < 2e-3 && sharp,
        format!("max |P(+) - (1+cos)/2| = {worst:.3e}, dispersion-free {sharp}, tied effects {tied}"),
    )
}

fn theorem_structure() -> Outcome {
    let prepared = states(3, 6, 31);
    let ic = standard_ic_states(3).unwrap();
    let delta = delta_model(&prepared).unwrap();
    let rep = theorem_structure_check(&delta, &prepared, &ic, 1e-9).unwrap();
    let delta_ok =
        rep.reconstruction_residual < 1e-9 && rep.max_lambda_deviation() < 1e-9 && rep.supports_disjoint;

    let zero = PureState::basis(2, 0).unwrap();
    let plus = qubit([1.0 / SQRT_2, 1.0 / SQRT_2], [0.0, 0.0]);
    let ks = ks_model_qubit(20_000).unwrap();
    let ks_rep = theorem_structure_check(&ks, &[zero, plus], &standard_ic_states(2).unwrap(), 1e-9).unwrap();
    outcome(
        delta_ok && !ks_rep.supports_disjoint,
        format!(
            "delta d=3: reconstruction {:.3e}, max |lambda-1| {:.3e}, disjoint {}; qubit hemisphere: disjoint {}",
            rep.reconstruction_residual,
            rep.max_lambda_deviation(),
            rep.supports_disjoint,
            ks_rep.supports_disjoint
        ),
    )
}

fn random_effect_operator<R: Rng>(d: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let q = g.qr().q();
    let spectrum = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| {
        Complex64::new(rng.random::<f64>(), 0.0)
    }));
    &q * spectrum * q.adjoint()
}

fn operator_round_trip() -> Outcome {
    let d = 3;
    let ic = standard_ic_states(d).unwrap();
    let recon = IcReconstructor::new(&ic).unwrap();
    let mut rng = seeded_rng(44);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let b = random_effect_operator(d, &mut rng);
        let responses: Vec<f64> = ic
            .iter()
            .map(|phi| {
                let v = phi.as_vector();
                (v.adjoint() * &b * v)[(0, 0)].re
            })
            .collect();
        let got = recon.reconstruct(&responses).unwrap();
        let expected = HermitianOperator::with_tolerance(b, 1e-12).unwrap();
        worst = worst.max(got.operator.max_abs_diff(&expected));
    }
    outcome(worst < 1e-9, format!("max reconstruction error = {worst:.3e}"))
}

fn certificates() -> Outcome {
    let zero = PureState::basis(2, 0).unwrap();
    let one = PureState::basis(2, 1).unwrap();
    let plus = qubit([1.0 / SQRT_2, 1.0 / SQRT_2], [0.0, 0.0]);
    let problem = FeasibilityProblem::new(vec![zero.clone(), one, plus], vec![zero], 1).unwrap();
    let lp = single_point_program(&problem).unwrap();
    let out = simplex_solve(&lp).unwrap();
    let certified = out.is_infeasible() && out.certificate.as_ref().is_some_and(|y| verify_certificate(&lp, y));

    // forward instances: Born targets of four random qutrit states, generated
    // by the delta model on those states (weights = identity, responses = T)
    let mut rng = seeded_rng(55);
    let (s, e, k) = (4, 6, 4);
    let mut feasible = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let chi: Vec<PureState> = (0..s).map(|_| random_pure_state_with(3, &mut rng).unwrap()).collect();
        let effects: Vec<PureState> = (0..e).map(|_| random_pure_state_with(3, &mut rng).unwrap()).collect();
        let rho = DMatrix::<f64>::identity(k, s);
        let p = DMatrix::from_fn(e, k, |j, c| born(&chi[c], &effects[j]));
        let problem = FeasibilityProblem::new(chi, effects, k).unwrap();
        let mut ok = true;
        for i in 0..s {
            let lp_out = solve_rho(&problem, &p, i).unwrap();
            match &lp_out.solution {
                Some(x) if lp_out.is_optimal() => {
                    for j in 0..e {
                        let pred: f64 = (0..k).map(|c| p[(j, c)] * x[c]).sum();
                        worst = worst.max((pred - problem.targets()[(j, i)]).abs());
                    }
                }
                _ => ok = false,
            }
        }
        let lp = responses_program(&problem, &rho).unwrap();
        let resp = solve_responses(&problem, &rho).unwrap();
        match &resp.solution {
            Some(x) if resp.is_optimal() => worst = worst.max(lp.residual(x)),
            _ => ok = false,
        }
        feasible += usize::from(ok);
    }
    outcome(
        certified && feasible == 100 && worst < 1e-8,
        format!("K=1 certified {certified}; forward instances feasible {feasible}/100, max residual {worst:.3e}"),
    )
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_ontolab")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn mub_dimension_bound() -> (Outcome, Vec<u8>) {
    let (code, stdout) = run_cli(&["feasibility", "--sweep"]);
    let report: Value = serde_json::from_slice(&stdout).unwrap_or(Value::Null);
    let runs = report["results"]["runs"].as_array().cloned().unwrap_or_default();
    let run = |k: u64| runs.iter().find(|r| r["ontic_size"] == k);
    let k1 = run(1).is_some_and(|r| r["verdict"] == "infeasible" && r["certificate_verified"] == true);
    let k9 = run(9).and_then(|r| r["best_residual"].as_f64()).unwrap_or(f64::INFINITY);
    let table: Vec<String> = (2..=8)
        .filter_map(|k| run(k).and_then(|r| r["best_residual"].as_f64()).map(|v| format!("K={k}:{v:.4}")))
        .collect();
    let restarts = report["options"]["restarts"].as_u64();
    (
        outcome(
            code == 0 && k1 && k9 < 1e-9 && table.len() == 7 && restarts == Some(20),
            format!("K=1 certified {k1}, K=9 residual {k9:.3e}, recorded [{}]", table.join(" ")),
        ),
        stdout,
    )
}

fn contextuality() -> Outcome {
    let set = cabello18();
    let report = validate_ray_set(&set);
    let count = ks_assignment_count(&set).unwrap().count;
    let one_basis = RaySet::new(
        3,
        (0..3).map(|k| PureState::basis(3, k).unwrap().as_vector().clone()).collect(),
        vec![vec![0, 1, 2]],
    )
    .unwrap();
    let single = ks_assignment_count(&one_basis).unwrap().count;
    outcome(
        report.violations.is_empty() && count == 0 && single == 3,
        format!(
            "violations {}, Cabello count {count}, single basis count {single}",
            report.violations.len()
        ),
    )
}

fn chsh() -> Outcome {
    let phi_plus = &bell_states()[0];
    let tsirelson = 2.0 * SQRT_2;
    let standard = chsh_value(phi_plus, &ChshSetting::standard()).unwrap();
    let closed = horodecki_max(phi_plus).unwrap();

    let mut rng = seeded_rng(88);
    let mut product_max = f64::NEG_INFINITY;
    for i in 0..100 {
        let a = random_pure_state_with(2, &mut rng).unwrap();
        let b = random_pure_state_with(2, &mut rng).unwrap();
        product_max = product_max.max(chsh_grid_max(&tensor_product(&a, &b), 12, 5, i).unwrap().value);
    }
    let mut excess = f64::NEG_INFINITY;
    for i in 0..100 {
        let psi = random_pure_state_with(4, &mut rng).unwrap();
        let grid = chsh_grid_max(&psi, 12, 5, 1000 + i).unwrap().value;
        excess = excess.max(grid - horodecki_max(&psi).unwrap());
    }
    outcome(
        (standard - tsirelson).abs() < 1e-12
            && (closed - tsirelson).abs() < 1e-12
            && product_max <= 2.0 + 1e-9
            && excess <= 1e-6,
        format!(
            "standard {standard:.15}, closed form {closed:.15}, product grid max {product_max:.12}, \
             max grid - closed form {excess:.3e}"
        ),
    )
}

fn discrete_wigner() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for d in [3usize, 5] {
        let pps = phase_point_operators(d).unwrap();
        let invariants = pps.max_trace_deviation().max(pps.max_orthogonality_deviation());
        ok &= invariants < 1e-10;
        let mut rng = seeded_rng(90 + d as u64);
        let mut worst = 0.0f64;
        let mut most_negative = 0.0f64;
        for _ in 0..100 {
            let psi = random_pure_state_with(d, &mut rng).unwrap();
            let rho = psi.projector().to_operator();
            let w = wigner(&rho, &pps).unwrap();
            worst = worst.max((w.sum() - 1.0).abs());
            for (q, m) in w.position_marginal().iter().enumerate() {
                worst = worst.max((m - born(&psi, &PureState::basis(d, q).unwrap())).abs());
            }
            for (p, m) in w.momentum_marginal().iter().enumerate() {
                let f = PureState::new(
                    (0..d)
                        .map(|x| Complex64::from_polar(1.0, 2.0 * PI * (p * x) as f64 / d as f64))
                        .collect(),
                )
                .unwrap();
                worst = worst.max((m - born(&psi, &f)).abs());
            }
            let back = reconstruct_from_wigner(&w, &pps).unwrap();
            worst = worst.max(back.max_abs_diff(&rho));
            most_negative = most_negative.max(negativity(&w));
        }
        ok &= worst < 1e-10 && most_negative > 0.01;
        notes.push(format!(
            "d={d}: invariants {invariants:.2e}, contracts {worst:.2e}, max negativity {most_negative:.4}"
        ));
    }
    outcome(ok, notes.join("; "))
}

fn reproducibility(sweep: &[u8]) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    let (_, again) = run_cli(&["feasibility", "--sweep"]);
    if again != sweep {
        mismatched.push("feasibility --sweep".to_string());
    }
    for cmd in ["verify-model", "theorem-check", "feasibility", "ks-search", "chsh", "wigner", "bohm"] {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let csv = dir.path().join(format!("{cmd}-{rep}.csv"));
            let csv_arg = csv.to_str().unwrap();
            let (code, stdout) = run_cli(&[cmd, "--seed", "7", "--out", csv_arg]);
            let table = std::fs::read(&csv).unwrap_or_default();
            outputs.push((code, stdout, table));
        }
        if outputs[0] != outputs[1] || outputs[0].1.is_empty() {
            mismatched.push(cmd.to_string());
        }
    }
    outcome(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            "8 command runs repeated, reports and tables byte-identical".to_string()
        } else {
            format!("differing output: {}", mismatched.join(", "))
        },
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn main() {
    let mut lines = Vec::new();
    let mut record = |id: usize, name: &str, out: Outcome, took: Duration, limit: Option<Duration>| {
        let in_time = limit.is_none_or(|l| took < l);
        let passed = out.passed && in_time;
        let budget = limit.map(|l| format!(" / {} s", l.as_secs())).unwrap_or_default();
        lines.push((
            passed,
            format!(
                "{} {id:>2} {name}: {} [{:.2} s{budget}]",
                if passed { "PASS" } else { "FAIL" },
                out.detail,
                took.as_secs_f64()
            ),
        ));
    };

    let (o, t) = timed(born_reproduction);
    record(1, "born reproduction", o, t, Some(Duration::from_secs(10)));
    let (o, t) = timed(ks_qubit_model);
    record(2, "hemisphere qubit model", o, t, Some(Duration::from_secs(30)));
    let (o, t) = timed(theorem_structure);
    record(3, "theorem structure", o, t, None);
    let (o, t) = timed(operator_round_trip);
    record(4, "operator reconstruction", o, t, None);
    let (o, t) = timed(certificates);
    record(5, "infeasibility certificates", o, t, None);
    let ((o, sweep), t) = timed(mub_dimension_bound);
    record(6, "MUB-9 dimension bound", o, t, Some(Duration::from_secs(300)));
    let (o, t) = timed(contextuality);
    record(7, "contextuality obstruction", o, t, Some(Duration::from_secs(1)));
    let (o, t) = timed(chsh);
    record(8, "CHSH", o, t, Some(Duration::from_secs(120)));
    let (o, t) = timed(discrete_wigner);
    record(9, "discrete Wigner", o, t, None);
    let (o, t) = timed(|| reproducibility(&sweep));
    record(10, "reproducibility", o, t, None);

    for (_, line) in &lines {
        println!("{line}");
    }
    let failed = lines.iter().filter(|l| !l.0).count();
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
