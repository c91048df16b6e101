//! Ontological models over a finite ontic space.
//!
//! A model assigns to every prepared state a probability vector over the ontic
//! points (the epistemic weights) and to every rank-1 effect a vector of
//! conditional probabilities in `[0, 1]` (the responses). Its prediction for
//! preparing `psi` and observing `phi` is the sum over points of
//! `response(phi)[k] * weights(psi)[k]`.

mod bohm;
mod models;
mod reconstruct;
mod theorem;

pub use bohm::{bohm_region_probability, GridDensity, RegionProbability};
pub use models::{
    bell_model_qubit, delta_model, fibonacci_sphere, ks_model_qubit, BellQubitModel, DeltaModel,
    KsQubitModel, TabulatedModel, KS_TIE_TOL, MIN_BELL_GRID, MIN_KS_LATTICE,
};
pub use reconstruct::{
    reconstruct_ontic_operator, IcReconstructor, OnticOperatorAssignment, Reconstruction,
    GRAM_RANK_TOL, INCONSISTENCY_TOL,
};
pub use theorem::{
    theorem_structure_check, theorem_structure_check_with, DisjointnessViolation,
    ProportionalityEntry, TheoremReport, DEFAULT_SUPPORT_THRESHOLD,
};

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::qcore::{BlochVector, PureState};

/// Optional per-point annotation.
#[derive(Debug, Clone, PartialEq)]
pub enum PointMeta {
    None,
    State(PureState),
    Direction(BlochVector),
    GridCell { state: usize, lambda: f64 },
}

/// Finite ordered set of uniquely labelled ontic points.
#[derive(Debug, Clone, PartialEq)]
pub struct OnticSpace {
    labels: Vec<String>,
    meta: Vec<PointMeta>,
}

impl OnticSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        let meta = vec![PointMeta::None; labels.len()];
        Self::with_meta(labels, meta)
    }

    pub fn with_meta(labels: Vec<String>, meta: Vec<PointMeta>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Document("ontic space must have at least one point".into()));
        }
        if meta.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: meta.len(),
            });
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Document(format!("duplicate ontic label {l:?}")));
            }
        }
        Ok(Self { labels, meta })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn meta(&self, k: usize) -> &PointMeta {
        &self.meta[k]
    }
}

/// `rho(.|psi)`: nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct EpistemicWeights(Vec<f64>);

impl EpistemicWeights {
    pub const SUM_TOL: f64 = 1e-10;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::Document(format!("negative epistemic weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::Document(format!("epistemic weights sum to {sum}")));
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// `P(phi|.)`: conditional probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseVector(Vec<f64>);

impl ResponseVector {
    pub const RANGE_TOL: f64 = 1e-12;

    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values
            .iter()
            .find(|v| !(**v >= -Self::RANGE_TOL && **v <= 1.0 + Self::RANGE_TOL))
        {
            return Err(Error::Document(format!("response {v} outside [0, 1]")));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// A candidate realistic description of a `d`-dimensional system.
pub trait OntoModel: Send + Sync {
    fn dim(&self) -> usize;

    fn ontic(&self) -> &OnticSpace;

    fn weights(&self, psi: &PureState) -> Result<EpistemicWeights>;

    fn responses(&self, phi: &PureState) -> Result<ResponseVector>;

    fn ontic_size(&self) -> usize {
        self.ontic().size()
    }
}

/// Predicted probability of observing `phi` after preparing `psi`.
pub fn predict(model: &dyn OntoModel, psi: &PureState, phi: &PureState) -> Result<f64> {
    psi.check_dim(model.dim())?;
    phi.check_dim(model.dim())?;
    let w = model.weights(psi)?;
    let r = model.responses(phi)?;
    Ok(predict_from(&w, &r))
}

/// `sum_k r_k w_k`; linear in each argument.
pub fn predict_from(weights: &EpistemicWeights, responses: &ResponseVector) -> f64 {
    weights
        .as_slice()
        .iter()
        .zip(responses.as_slice())
        .map(|(w, r)| w * r)
        .sum()
}

/// Tolerance for "0 or 1" in [`check_dispersion_free`].
pub const DISPERSION_FREE_TOL: f64 = 1e-9;

/// True iff every response entry for every effect is within 1e-9 of 0 or 1.
pub fn check_dispersion_free(model: &dyn OntoModel, effects: &[PureState]) -> Result<bool> {
    for phi in effects {
        let r = model.responses(phi)?;
        let sharp = r
            .as_slice()
            .iter()
            .all(|&v| v.abs() <= DISPERSION_FREE_TOL || (v - 1.0).abs() <= DISPERSION_FREE_TOL);
        if !sharp {
            return Ok(false);
        }
    }
    Ok(true)
}
