use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qcore::{born_probability, PureState};

use super::lp::{simplex_solve, LinearProgram, LpOutcome};

/// The finite system `sum_k P[j][k] rho[k][i] = T[j][i]` with `rho` columns
/// probability vectors over `K` ontic points and `P` entries in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct FeasibilityProblem {
    dim: usize,
    states: Vec<PureState>,
    effects: Vec<PureState>,
    ontic_size: usize,
    targets: DMatrix<f64>,
}

/// `T[j][i] = |<phi_j|psi_i>|^2`, effects by row and states by column.
pub fn target_matrix(states: &[PureState], effects: &[PureState]) -> Result<DMatrix<f64>> {
    let mut t = DMatrix::zeros(effects.len(), states.len());
    for (j, phi) in effects.iter().enumerate() {
        for (i, psi) in states.iter().enumerate() {
            t[(j, i)] = born_probability(psi, phi)?;
        }
    }
    Ok(t)
}

impl FeasibilityProblem {
    pub fn new(states: Vec<PureState>, effects: Vec<PureState>, ontic_size: usize) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::Document("feasibility problem needs at least one state".into()))?;
        if effects.is_empty() {
            return Err(Error::Document("feasibility problem needs at least one effect".into()));
        }
        if ontic_size == 0 {
            return Err(Error::Document("ontic size must be at least 1".into()));
        }
        let dim = first.dim();
        let targets = target_matrix(&states, &effects)?;
        Ok(Self {
            dim,
            states,
            effects,
            ontic_size,
            targets,
        })
    }

    /// A problem whose targets come from an arbitrary forward model rather
    /// than from Born probabilities of listed states.
    pub fn synthetic(targets: DMatrix<f64>, ontic_size: usize) -> Result<Self> {
        if targets.is_empty() || ontic_size == 0 {
            return Err(Error::Document("synthetic problem needs targets and K >= 1".into()));
        }
        if let Some(v) = targets.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
            return Err(Error::Document(format!("target {v} outside [0, 1]")));
        }
        Ok(Self {
            dim: 0,
            states: Vec::new(),
            effects: Vec::new(),
            ontic_size,
            targets,
        })
    }

    /// Same states and effects, different ontic size.
    pub fn with_ontic_size(&self, ontic_size: usize) -> Result<Self> {
        if ontic_size == 0 {
            return Err(Error::Document("ontic size must be at least 1".into()));
        }
        Ok(Self {
            ontic_size,
            ..self.clone()
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn effects(&self) -> &[PureState] {
        &self.effects
    }

    pub fn ontic_size(&self) -> usize {
        self.ontic_size
    }

    pub fn targets(&self) -> &DMatrix<f64> {
        &self.targets
    }

    pub fn num_states(&self) -> usize {
        self.targets.ncols()
    }

    pub fn num_effects(&self) -> usize {
        self.targets.nrows()
    }

    /// `max |P rho - T|`.
    pub fn residual(&self, responses: &DMatrix<f64>, weights: &DMatrix<f64>) -> f64 {
        (responses * weights - &self.targets).amax()
    }

    fn check_responses(&self, p: &DMatrix<f64>) -> Result<()> {
        if p.shape() != (self.num_effects(), self.ontic_size) {
            return Err(Error::DimensionMismatch {
                expected: self.num_effects() * self.ontic_size,
                found: p.len(),
            });
        }
        if let Some(v) = p.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
            return Err(Error::Document(format!("response {v} outside [0, 1]")));
        }
        Ok(())
    }

    fn check_weights(&self, rho: &DMatrix<f64>) -> Result<()> {
        if rho.shape() != (self.ontic_size, self.num_states()) {
            return Err(Error::DimensionMismatch {
                expected: self.ontic_size * self.num_states(),
                found: rho.len(),
            });
        }
        for col in rho.column_iter() {
            let sum: f64 = col.iter().sum();
            if col.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-10 {
                return Err(Error::Document("weight column is not a probability vector".into()));
            }
        }
        Ok(())
    }
}

/// LP for `rho(.|psi_i)` with the responses frozen:
/// `rho >= 0`, `sum rho = 1`, `P rho = T[., i]`.
pub fn rho_program(problem: &FeasibilityProblem, responses: &DMatrix<f64>, state: usize) -> Result<LinearProgram> {
    problem.check_responses(responses)?;
    if state >= problem.num_states() {
        return Err(Error::DimensionMismatch {
            expected: problem.num_states(),
            found: state + 1,
        });
    }
    let (e, k) = (problem.num_effects(), problem.ontic_size());
    let mut a = DMatrix::zeros(e + 1, k);
    let mut b = vec![0.0; e + 1];
    for j in 0..e {
        for c in 0..k {
            a[(j, c)] = responses[(j, c)];
        }
        b[j] = problem.targets[(j, state)];
    }
    a.row_mut(e).fill(1.0);
    b[e] = 1.0;
    LinearProgram::feasibility(a, b, vec![0.0; k], vec![f64::INFINITY; k])
}

pub fn solve_rho(problem: &FeasibilityProblem, responses: &DMatrix<f64>, state: usize) -> Result<LpOutcome> {
    simplex_solve(&rho_program(problem, responses, state)?)
}

/// LP for all responses with the weights frozen: `P in [0,1]^{E x K}`, `P rho = T`.
///
/// Variable `j * K + k` is `P[j][k]`; row `j * S + i` is the constraint for
/// effect `j` and state `i`.
pub fn responses_program(problem: &FeasibilityProblem, weights: &DMatrix<f64>) -> Result<LinearProgram> {
    problem.check_weights(weights)?;
    let (e, s, k) = (problem.num_effects(), problem.num_states(), problem.ontic_size());
    let mut a = DMatrix::zeros(e * s, e * k);
    let mut b = vec![0.0; e * s];
    for j in 0..e {
        for i in 0..s {
            let row = j * s + i;
            for c in 0..k {
                a[(row, j * k + c)] = weights[(c, i)];
            }
            b[row] = problem.targets[(j, i)];
        }
    }
    LinearProgram::feasibility(a, b, vec![0.0; e * k], vec![1.0; e * k])
}

pub fn solve_responses(problem: &FeasibilityProblem, weights: &DMatrix<f64>) -> Result<LpOutcome> {
    simplex_solve(&responses_program(problem, weights)?)
}

/// Unpacks a [`responses_program`] solution into the `E x K` matrix.
pub fn responses_from_solution(problem: &FeasibilityProblem, x: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(problem.num_effects(), problem.ontic_size(), x)
}

/// With a single ontic point every weight column is forced to `(1)`, so the
/// frozen-weights LP decides the joint problem exactly.
pub fn single_point_program(problem: &FeasibilityProblem) -> Result<LinearProgram> {
    let p = problem.with_ontic_size(1)?;
    responses_program(&p, &DMatrix::from_element(1, p.num_states(), 1.0))
}
