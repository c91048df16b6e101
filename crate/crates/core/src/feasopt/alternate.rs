//! Alternating minimax search for the bilinear system `P rho = T`.
//!
//! Each half-step freezes one block and solves, for every free column of
//! `rho` (or row of `P`), the LP `min t` subject to `|P rho - T| <= t` on the
//! entries that column touches. The per-column optima combine into an
//! optimum of the joint max-norm LP over the whole block.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::Result;
use crate::qcore::rng_stream;

use super::lp::{simplex_solve, LinearProgram};
use super::problem::FeasibilityProblem;

/// Residual at or below which a restart stops.
const CONVERGED: f64 = 1e-12;
/// Smallest per-iteration improvement that keeps a restart going.
const STALL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlternationOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Start restart 0 from the one-point-per-state assignment when `K >= S`.
    pub delta_start: bool,
}

impl AlternationOptions {
    pub fn new(restarts: usize, max_iters: usize, seed: u64) -> Self {
        Self {
            restarts,
            max_iters,
            seed,
            delta_start: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlternationReport {
    pub restarts: usize,
    /// Completed iterations per restart.
    pub iterations: Vec<usize>,
    /// `max |P rho - T|` at the start and after every iteration, per restart.
    pub traces: Vec<Vec<f64>>,
    pub best_residual: f64,
    pub best_restart: usize,
    /// `K x S`, columns are `rho(.|psi_i)`.
    pub best_weights: DMatrix<f64>,
    /// `E x K`, rows are `P(phi_j|.)`.
    pub best_responses: DMatrix<f64>,
}

impl AlternationReport {
    pub fn trace_is_nonincreasing(&self) -> bool {
        self.traces.iter().all(|t| t.windows(2).all(|w| w[1] <= w[0]))
    }
}

pub fn alternate_search(
    problem: &FeasibilityProblem,
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> Result<AlternationReport> {
    alternate_search_with(problem, &AlternationOptions::new(restarts, max_iters, seed))
}

pub fn alternate_search_with(problem: &FeasibilityProblem, options: &AlternationOptions) -> Result<AlternationReport> {
    if options.restarts == 0 {
        return Err(crate::Error::Document("restarts must be at least 1".into()));
    }
    let runs: Vec<Run> = (0..options.restarts)
        .into_par_iter()
        .map(|r| run_restart(problem, options, r))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.residual < runs[best].residual {
            best = i;
        }
    }
    let best_residual = runs[best].residual;
    let iterations = runs.iter().map(|r| r.trace.len() - 1).collect();
    let best_weights = runs[best].rho.clone();
    let best_responses = runs[best].p.clone();
    Ok(AlternationReport {
        restarts: options.restarts,
        iterations,
        traces: runs.into_iter().map(|r| r.trace).collect(),
        best_residual,
        best_restart: best,
        best_weights,
        best_responses,
    })
}

struct Run {
    trace: Vec<f64>,
    residual: f64,
    rho: DMatrix<f64>,
    p: DMatrix<f64>,
}

fn run_restart(problem: &FeasibilityProblem, options: &AlternationOptions, restart: usize) -> Result<Run> {
    let (e, s, k) = (problem.num_effects(), problem.num_states(), problem.ontic_size());
    let (mut rho, mut p) = if restart == 0 && options.delta_start && k >= s {
        delta_start(problem)
    } else {
        let mut rng = rng_stream(options.seed, restart as u64);
        random_start(e, s, k, &mut rng)
    };
    let mut residual = problem.residual(&p, &rho);
    let mut trace = vec![residual];
    for _ in 0..options.max_iters {
        if residual <= CONVERGED {
            break;
        }
        let before = residual;
        let new_rho = weights_step(problem, &p)?;
        let r = problem.residual(&p, &new_rho);
        if r <= residual {
            rho = new_rho;
            residual = r;
        }
        let new_p = responses_step(problem, &rho)?;
        let r = problem.residual(&new_p, &rho);
        if r <= residual {
            p = new_p;
            residual = r;
        }
        trace.push(residual);
        if before - residual < STALL {
            break;
        }
    }
    Ok(Run { trace, residual, rho, p })
}

fn delta_start(problem: &FeasibilityProblem) -> (DMatrix<f64>, DMatrix<f64>) {
    let (e, s, k) = (problem.num_effects(), problem.num_states(), problem.ontic_size());
    let mut rho = DMatrix::zeros(k, s);
    let mut p = DMatrix::zeros(e, k);
    for i in 0..s {
        rho[(i, i)] = 1.0;
        p.set_column(i, &problem.targets().column(i));
    }
    (rho, p)
}

fn random_start<R: Rng>(e: usize, s: usize, k: usize, rng: &mut R) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rho = DMatrix::zeros(k, s);
    for i in 0..s {
        let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        for (c, v) in draws.into_iter().enumerate() {
            rho[(c, i)] = v / total;
        }
    }
    let p = DMatrix::from_fn(e, k, |_, _| rng.random::<f64>());
    (rho, p)
}

/// `min t` s.t. `-t <= M x - target <= t`, plus extra equality rows, with
/// slacks `s1, s2 >= 0` turning the two-sided bound into equalities.
/// Variables are `[x, t, s1, s2]`.
fn minimax_program(
    m: &DMatrix<f64>,
    target: &[f64],
    x_lower: f64,
    x_upper: f64,
    simplex_row: bool,
) -> Result<LinearProgram> {
    let (rows, n) = m.shape();
    let cols = n + 1 + 2 * rows;
    let extra = usize::from(simplex_row);
    let mut a = DMatrix::zeros(2 * rows + extra, cols);
    let mut b = vec![0.0; 2 * rows + extra];
    for r in 0..rows {
        for c in 0..n {
            a[(r, c)] = m[(r, c)];
            a[(rows + r, c)] = m[(r, c)];
        }
        a[(r, n)] = -1.0;
        a[(r, n + 1 + r)] = 1.0;
        a[(rows + r, n)] = 1.0;
        a[(rows + r, n + 1 + rows + r)] = -1.0;
        b[r] = target[r];
        b[rows + r] = target[r];
    }
    if simplex_row {
        for c in 0..n {
            a[(2 * rows, c)] = 1.0;
        }
        b[2 * rows] = 1.0;
    }
    let mut lower = vec![0.0; cols];
    let mut upper = vec![f64::INFINITY; cols];
    for c in 0..n {
        lower[c] = x_lower;
        upper[c] = x_upper;
    }
    let mut cost = vec![0.0; cols];
    cost[n] = 1.0;
    LinearProgram::new(a, b, lower, upper, cost)
}

fn solve_minimax(lp: &LinearProgram, n: usize) -> Result<Option<Vec<f64>>> {
    let out = simplex_solve(lp)?;
    Ok(out.solution.map(|x| x[..n].to_vec()))
}

fn weights_step(problem: &FeasibilityProblem, p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (s, k) = (problem.num_states(), problem.ontic_size());
    let mut rho = DMatrix::zeros(k, s);
    for i in 0..s {
        let target: Vec<f64> = problem.targets().column(i).iter().copied().collect();
        let lp = minimax_program(p, &target, 0.0, f64::INFINITY, true)?;
        let x = solve_minimax(&lp, k)?.expect("minimax program over the simplex is feasible");
        let x: Vec<f64> = x.into_iter().map(|v| v.max(0.0)).collect();
        let total: f64 = x.iter().sum();
        for (c, v) in x.into_iter().enumerate() {
            rho[(c, i)] = v / total;
        }
    }
    Ok(rho)
}

fn responses_step(problem: &FeasibilityProblem, rho: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (e, k) = (problem.num_effects(), problem.ontic_size());
    let m = rho.transpose();
    let mut p = DMatrix::zeros(e, k);
    for j in 0..e {
        let target: Vec<f64> = problem.targets().row(j).iter().copied().collect();
        let lp = minimax_program(&m, &target, 0.0, 1.0, false)?;
        let x = solve_minimax(&lp, k)?.expect("minimax program over the unit box is feasible");
        for (c, v) in x.into_iter().enumerate() {
            p[(j, c)] = v.clamp(0.0, 1.0);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{random_pure_state_with, seeded_rng, PureState};

    fn z_problem(k: usize) -> FeasibilityProblem {
        let z0 = PureState::basis(2, 0).unwrap();
        let z1 = PureState::basis(2, 1).unwrap();
        FeasibilityProblem::new(vec![z0.clone(), z1], vec![z0], k).unwrap()
    }

    #[test]
    fn delta_start_is_exact() {
        let mut rng = seeded_rng(4);
        let states: Vec<_> = (0..5).map(|_| random_pure_state_with(3, &mut rng).unwrap()).collect();
        let prob = FeasibilityProblem::new(states.clone(), states, 5).unwrap();
        let rep = alternate_search(&prob, 3, 20, 1).unwrap();
        assert!(rep.traces[0][0] < 1e-12);
        assert_eq!(rep.iterations[0], 0);
        assert_eq!(rep.best_restart, 0);
        assert!(rep.best_residual < 1e-12);
    }

    #[test]
    fn single_point_minimax_is_one_half() {
        let rep = alternate_search(&z_problem(1), 4, 50, 9).unwrap();
        assert!((rep.best_residual - 0.5).abs() < 1e-9);
        assert!((rep.best_responses[(0, 0)] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn two_points_separate_orthogonal_pair() {
        let mut opts = AlternationOptions::new(4, 50, 3);
        opts.delta_start = false;
        let rep = alternate_search_with(&z_problem(2), &opts).unwrap();
        assert!(rep.best_residual < 1e-9);
        assert!(rep.trace_is_nonincreasing());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut rng = seeded_rng(8);
        let states: Vec<_> = (0..4).map(|_| random_pure_state_with(2, &mut rng).unwrap()).collect();
        let prob = FeasibilityProblem::new(states.clone(), states, 2).unwrap();
        let a = alternate_search(&prob, 5, 30, 77).unwrap();
        let b = alternate_search(&prob, 5, 30, 77).unwrap();
        assert_eq!(a.traces, b.traces);
        assert_eq!(a.best_restart, b.best_restart);
        assert_eq!(a.best_weights, b.best_weights);
        assert!(a.trace_is_nonincreasing());
    }

    #[test]
    fn zero_restarts_rejected() {
        assert!(alternate_search(&z_problem(1), 0, 5, 0).is_err());
    }
}
