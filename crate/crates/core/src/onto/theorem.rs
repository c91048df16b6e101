//! Structure verifier for trace-form models.
//!
//! For every ontic point the verifier reconstructs the operator `B_k` that
//! reproduces the point's responses on an informationally complete effect
//! family, then measures how far the model is from the chain of consequences
//! that a Born-reproducing nonnegative model must obey:
//!
//! 1. `sum_k B_k rho(k|psi) = P_psi` for every prepared `psi`;
//! 2. on the support of `rho(.|psi)`, `B_k = lambda_k P_psi` with `lambda_k` in `[0, 1]`;
//! 3. `sum_k lambda_k rho(k|psi) = 1`, which forces `lambda_k = 1` on the support;
//! 4. hence `P(phi|k) = |<phi|psi>|^2` on the support;
//! 5. distinct prepared states have disjoint supports, so the support map
//!    `point -> state` is single valued and the ontic space has at least as
//!    many points as there are distinct prepared states.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qcore::{born_probability, HermitianOperator, PureState};

use super::{IcReconstructor, OntoModel, OnticOperatorAssignment};

/// `rho(k|psi)` above this counts as "nonzero".
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-12;

/// Overlap moduli above `1 - SAME_STATE_TOL` identify the same ray.
const SAME_STATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ProportionalityEntry {
    pub point: usize,
    pub state: usize,
    /// `Tr[B_k P_psi]`, the best-fit factor in `B_k ~ lambda P_psi`.
    pub lambda: f64,
    /// Spectral norm of `B_k - lambda P_psi`.
    pub deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DisjointnessViolation {
    pub point: usize,
    pub state_a: usize,
    pub state_b: usize,
}

#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub tol: f64,
    pub support_threshold: f64,
    pub ontic_size: usize,
    pub prepared: usize,
    /// Number of pairwise-distinct prepared rays.
    pub distinct_prepared: usize,
    pub born_residual: f64,
    pub reconstruction_residual: f64,
    pub proportionality: Vec<ProportionalityEntry>,
    pub lambda_mean_residual: Vec<f64>,
    pub born_response_residual: f64,
    pub supports_disjoint: bool,
    pub violations: Vec<DisjointnessViolation>,
    pub support_map: Vec<Option<usize>>,
    /// Points whose responses are not of the form `Tr[B P_phi]`.
    pub inconsistent_points: Vec<usize>,
    /// How far any `B_k` spectrum leaves `[0, 1]`.
    pub operator_bound_violation: f64,
    pub operators: OnticOperatorAssignment,
}

impl TheoremReport {
    pub fn max_lambda_deviation(&self) -> f64 {
        self.proportionality
            .iter()
            .map(|e| (e.lambda - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_proportionality_deviation(&self) -> f64 {
        self.proportionality
            .iter()
            .map(|e| e.deviation)
            .fold(0.0, f64::max)
    }

    pub fn max_lambda_mean_residual(&self) -> f64 {
        self.lambda_mean_residual.iter().copied().fold(0.0, f64::max)
    }

    /// Finite-size dimension bound: `K >= #distinct prepared states`.
    pub fn dimension_bound_holds(&self) -> bool {
        self.ontic_size >= self.distinct_prepared
    }

    /// Every link of the chain holds within `tol`.
    pub fn passed(&self) -> bool {
        self.born_residual < self.tol
            && self.reconstruction_residual < self.tol
            && self.max_lambda_deviation() < self.tol
            && self.born_response_residual < self.tol
            && self.supports_disjoint
    }
}

pub fn theorem_structure_check(
    model: &dyn OntoModel,
    prepared: &[PureState],
    ic_effects: &[PureState],
    tol: f64,
) -> Result<TheoremReport> {
    theorem_structure_check_with(model, prepared, ic_effects, tol, DEFAULT_SUPPORT_THRESHOLD)
}

pub fn theorem_structure_check_with(
    model: &dyn OntoModel,
    prepared: &[PureState],
    ic_effects: &[PureState],
    tol: f64,
    support_threshold: f64,
) -> Result<TheoremReport> {
    let dim = model.dim();
    for s in prepared.iter().chain(ic_effects) {
        s.check_dim(dim)?;
    }
    let recon = IcReconstructor::new(ic_effects)?;
    let k_size = model.ontic_size();
    let labels = model.ontic().labels();

    // responses[j][k] = P(phi_j | k); weights[i][k] = rho(k | psi_i)
    let responses: Vec<Vec<f64>> = ic_effects
        .iter()
        .map(|phi| model.responses(phi).map(|r| r.into_vec()))
        .collect::<Result<_>>()?;
    let weights: Vec<Vec<f64>> = prepared
        .iter()
        .map(|psi| model.weights(psi).map(|w| w.into_vec()))
        .collect::<Result<_>>()?;

    let reconstructions = (0..k_size)
        .into_par_iter()
        .map(|k| {
            let column: Vec<f64> = responses.iter().map(|row| row[k]).collect();
            recon.reconstruct(&column).map_err(|e| Error::Reconstruction {
                point: labels[k].clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let inconsistent_points: Vec<usize> = reconstructions
        .iter()
        .enumerate()
        .filter(|(_, r)| r.inconsistent)
        .map(|(k, _)| k)
        .collect();
    let operators = OnticOperatorAssignment {
        operators: reconstructions.into_iter().map(|r| r.operator).collect(),
    };

    // Born residual over prepared x (ic effects and prepared states as effects).
    let mut born_residual: f64 = 0.0;
    for (i, psi) in prepared.iter().enumerate() {
        for phi in ic_effects.iter().chain(prepared) {
            let r = model.responses(phi)?;
            let p: f64 = r.as_slice().iter().zip(&weights[i]).map(|(a, b)| a * b).sum();
            born_residual = born_residual.max((p - born_probability(psi, phi)?).abs());
        }
    }

    let projectors: Vec<HermitianOperator> =
        prepared.iter().map(|p| p.projector().to_operator()).collect();

    let mut reconstruction_residual: f64 = 0.0;
    for (i, w) in weights.iter().enumerate() {
        let mut acc = HermitianOperator::zeros(dim);
        for (k, &wk) in w.iter().enumerate() {
            if wk != 0.0 {
                acc = acc.add(&operators.operators[k].scale(wk))?;
            }
        }
        reconstruction_residual = reconstruction_residual.max(acc.sub(&projectors[i])?.operator_norm());
    }

    let mut proportionality = Vec::new();
    let mut lambda_mean_residual = vec![0.0; prepared.len()];
    let mut born_response_residual: f64 = 0.0;
    let ic_born: Vec<Vec<f64>> = prepared
        .iter()
        .map(|psi| ic_effects.iter().map(|phi| born_probability(phi, psi)).collect())
        .collect::<Result<_>>()?;
    for (i, w) in weights.iter().enumerate() {
        let mut mean = 0.0;
        for (k, &wk) in w.iter().enumerate() {
            if wk <= support_threshold {
                continue;
            }
            let b = &operators.operators[k];
            let lambda = b.trace_with(projectors[i].matrix());
            let deviation = b.sub(&projectors[i].scale(lambda))?.operator_norm();
            proportionality.push(ProportionalityEntry {
                point: k,
                state: i,
                lambda,
                deviation,
            });
            mean += lambda * wk;
            for (j, row) in responses.iter().enumerate() {
                born_response_residual = born_response_residual.max((row[k] - ic_born[i][j]).abs());
            }
        }
        lambda_mean_residual[i] = (mean - 1.0).abs();
    }

    // support map and disjointness
    let mut support_map = vec![None; k_size];
    let mut violations = Vec::new();
    for k in 0..k_size {
        let supporters: Vec<usize> = (0..prepared.len())
            .filter(|&i| weights[i][k] > support_threshold)
            .collect();
        let before = violations.len();
        for (a, &ia) in supporters.iter().enumerate() {
            for &ib in &supporters[a + 1..] {
                if !prepared[ia].same_ray(&prepared[ib], SAME_STATE_TOL) {
                    violations.push(DisjointnessViolation {
                        point: k,
                        state_a: ia,
                        state_b: ib,
                    });
                }
            }
        }
        // repeated copies of one ray still give a single-valued map
        if !supporters.is_empty() && violations.len() == before {
            support_map[k] = Some(supporters[0]);
        }
    }

    let mut distinct: Vec<&PureState> = Vec::new();
    for p in prepared {
        if !distinct.iter().any(|q| q.same_ray(p, SAME_STATE_TOL)) {
            distinct.push(p);
        }
    }

    Ok(TheoremReport {
        tol,
        support_threshold,
        ontic_size: k_size,
        prepared: prepared.len(),
        distinct_prepared: distinct.len(),
        born_residual,
        reconstruction_residual,
        proportionality,
        lambda_mean_residual,
        born_response_residual,
        supports_disjoint: violations.is_empty(),
        violations,
        support_map,
        inconsistent_points,
        operator_bound_violation: operators.bound_violation(),
        operators,
    })
}
