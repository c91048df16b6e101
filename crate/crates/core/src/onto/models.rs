use crate::error::{Error, Result};
use crate::qcore::{born_probability, BlochVector, PureState};

use super::{EpistemicWeights, OntoModel, OnticSpace, PointMeta, ResponseVector};

/// States closer than this to the same ray are considered identical.
const SAME_RAY_TOL: f64 = 1e-12;

fn find_ray(states: &[PureState], psi: &PureState, tol: f64) -> Result<usize> {
    states
        .iter()
        .position(|s| s.same_ray(psi, tol))
        .ok_or(Error::NotPrepared)
}

fn check_common_dim(states: &[PureState]) -> Result<usize> {
    let first = states
        .first()
        .ok_or_else(|| Error::Document("model needs at least one state".into()))?;
    let dim = first.dim();
    for s in states {
        first.check_dim(s.dim())?;
    }
    Ok(dim)
}

/// One ontic point per listed state; preparing a state puts all weight on its
/// point, and point `chi` answers effect `phi` with `|<phi|chi>|^2`.
#[derive(Debug, Clone)]
pub struct DeltaModel {
    dim: usize,
    states: Vec<PureState>,
    ontic: OnticSpace,
}

pub fn delta_model(states: &[PureState]) -> Result<DeltaModel> {
    let dim = check_common_dim(states)?;
    for i in 0..states.len() {
        for j in (i + 1)..states.len() {
            if states[i].same_ray(&states[j], SAME_RAY_TOL) {
                return Err(Error::DuplicateState(i, j));
            }
        }
    }
    let labels = (0..states.len()).map(|i| format!("chi{i}")).collect();
    let meta = states.iter().cloned().map(PointMeta::State).collect();
    Ok(DeltaModel {
        dim,
        states: states.to_vec(),
        ontic: OnticSpace::with_meta(labels, meta)?,
    })
}

impl DeltaModel {
    pub fn states(&self) -> &[PureState] {
        &self.states
    }
}

impl OntoModel for DeltaModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn ontic(&self) -> &OnticSpace {
        &self.ontic
    }

    fn weights(&self, psi: &PureState) -> Result<EpistemicWeights> {
        psi.check_dim(self.dim)?;
        let i = find_ray(&self.states, psi, SAME_RAY_TOL)?;
        let mut w = vec![0.0; self.states.len()];
        w[i] = 1.0;
        EpistemicWeights::new(w)
    }

    fn responses(&self, phi: &PureState) -> Result<ResponseVector> {
        phi.check_dim(self.dim)?;
        let r = self
            .states
            .iter()
            .map(|chi| born_probability(phi, chi))
            .collect::<Result<Vec<_>>>()?;
        ResponseVector::new(r)
    }
}

/// Smallest lattice accepted by [`ks_model_qubit`].
pub const MIN_KS_LATTICE: usize = 1000;
/// `|n . lambda|` below this is a tie and answers 0.5.
pub const KS_TIE_TOL: f64 = 1e-12;

/// `n` near-uniform unit vectors on the sphere (Fibonacci lattice).
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Qubit model with ontic points on a discretized sphere.
///
/// Preparing Bloch vector `m` gives weight proportional to `max(0, m . lambda)`,
/// normalized over the lattice. The effect with Bloch vector `n` fires (1) when
/// `n . lambda > 0`, is silent (0) when negative, and answers 0.5 on ties.
/// In the continuum limit the prediction is `(1 + cos theta) / 2`.
#[derive(Debug, Clone)]
pub struct KsQubitModel {
    directions: Vec<[f64; 3]>,
    ontic: OnticSpace,
}

pub fn ks_model_qubit(lattice_size: usize) -> Result<KsQubitModel> {
    if lattice_size < MIN_KS_LATTICE {
        return Err(Error::TooCoarse {
            what: "sphere lattice",
            min: MIN_KS_LATTICE,
            got: lattice_size,
        });
    }
    let directions = fibonacci_sphere(lattice_size);
    let labels = (0..lattice_size).map(|i| format!("lambda{i}")).collect();
    let meta = directions
        .iter()
        .map(|&d| PointMeta::Direction(BlochVector::new(d)))
        .collect();
    Ok(KsQubitModel {
        directions,
        ontic: OnticSpace::with_meta(labels, meta)?,
    })
}

impl KsQubitModel {
    pub fn directions(&self) -> &[[f64; 3]] {
        &self.directions
    }

    fn dots(&self, n: &BlochVector) -> impl Iterator<Item = f64> + '_ {
        let v = n.components();
        self.directions
            .iter()
            .map(move |d| d[0] * v[0] + d[1] * v[1] + d[2] * v[2])
    }

    /// Number of lattice points on the tie set of direction `n`.
    pub fn ties(&self, n: &BlochVector) -> usize {
        self.dots(n).filter(|x| x.abs() <= KS_TIE_TOL).count()
    }
}

impl OntoModel for KsQubitModel {
    fn dim(&self) -> usize {
        2
    }

    fn ontic(&self) -> &OnticSpace {
        &self.ontic
    }

    fn weights(&self, psi: &PureState) -> Result<EpistemicWeights> {
        let m = psi.bloch_vector()?;
        let raw: Vec<f64> = self.dots(&m).map(|x| x.max(0.0)).collect();
        let total: f64 = raw.iter().sum();
        EpistemicWeights::new(raw.into_iter().map(|x| x / total).collect())
    }

    fn responses(&self, phi: &PureState) -> Result<ResponseVector> {
        let n = phi.bloch_vector()?;
        let r = self
            .dots(&n)
            .map(|x| {
                if x.abs() <= KS_TIE_TOL {
                    0.5
                } else if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        ResponseVector::new(r)
    }
}

/// Smallest grid accepted by [`bell_model_qubit`].
pub const MIN_BELL_GRID: usize = 100;

/// Qubit model with ontic points `(i, lambda_j)`.
///
/// Preparing listed state `i` spreads weight uniformly over the `M` midpoints
/// `lambda_j` of `[0, 1]` attached to `i`; point `(i, lambda_j)` fires for `phi`
/// iff `lambda_j <= |<phi|psi_i>|^2`. Responses are 0/1 and predictions are
/// within `1/(2M)` of the Born rule.
#[derive(Debug, Clone)]
pub struct BellQubitModel {
    states: Vec<PureState>,
    grid: usize,
    ontic: OnticSpace,
}

pub fn bell_model_qubit(states: &[PureState], grid_size: usize) -> Result<BellQubitModel> {
    if grid_size < MIN_BELL_GRID {
        return Err(Error::TooCoarse {
            what: "Bell grid",
            min: MIN_BELL_GRID,
            got: grid_size,
        });
    }
    let dim = check_common_dim(states)?;
    if dim != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: dim });
    }
    for i in 0..states.len() {
        for j in (i + 1)..states.len() {
            if states[i].same_ray(&states[j], SAME_RAY_TOL) {
                return Err(Error::DuplicateState(i, j));
            }
        }
    }
    let mut labels = Vec::with_capacity(states.len() * grid_size);
    let mut meta = Vec::with_capacity(states.len() * grid_size);
    for i in 0..states.len() {
        for j in 0..grid_size {
            labels.push(format!("s{i}g{j}"));
            meta.push(PointMeta::GridCell {
                state: i,
                lambda: (j as f64 + 0.5) / grid_size as f64,
            });
        }
    }
    Ok(BellQubitModel {
        states: states.to_vec(),
        grid: grid_size,
        ontic: OnticSpace::with_meta(labels, meta)?,
    })
}

impl BellQubitModel {
    pub fn grid_size(&self) -> usize {
        self.grid
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }
}

impl OntoModel for BellQubitModel {
    fn dim(&self) -> usize {
        2
    }

    fn ontic(&self) -> &OnticSpace {
        &self.ontic
    }

    fn weights(&self, psi: &PureState) -> Result<EpistemicWeights> {
        psi.check_dim(2)?;
        let i = find_ray(&self.states, psi, SAME_RAY_TOL)?;
        let m = self.grid;
        let mut w = vec![0.0; self.states.len() * m];
        w[i * m..(i + 1) * m].fill(1.0 / m as f64);
        EpistemicWeights::new(w)
    }

    fn responses(&self, phi: &PureState) -> Result<ResponseVector> {
        phi.check_dim(2)?;
        let m = self.grid;
        let mut r = Vec::with_capacity(self.states.len() * m);
        for s in &self.states {
            let p = born_probability(phi, s)?;
            r.extend((0..m).map(|j| {
                if (j as f64 + 0.5) / m as f64 <= p {
                    1.0
                } else {
                    0.0
                }
            }));
        }
        ResponseVector::new(r)
    }
}

/// A model given by explicit tables over listed states and effects.
///
/// Lookups match states and effects up to a global phase.
#[derive(Debug, Clone)]
pub struct TabulatedModel {
    dim: usize,
    ontic: OnticSpace,
    states: Vec<PureState>,
    weights: Vec<EpistemicWeights>,
    effects: Vec<PureState>,
    responses: Vec<ResponseVector>,
}

const TABLE_MATCH_TOL: f64 = 1e-10;

impl TabulatedModel {
    pub fn new(
        ontic: OnticSpace,
        states: Vec<PureState>,
        weights: Vec<EpistemicWeights>,
        effects: Vec<PureState>,
        responses: Vec<ResponseVector>,
    ) -> Result<Self> {
        let dim = check_common_dim(&states)?;
        for e in &effects {
            e.check_dim(dim)?;
        }
        if weights.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                found: weights.len(),
            });
        }
        if responses.len() != effects.len() {
            return Err(Error::DimensionMismatch {
                expected: effects.len(),
                found: responses.len(),
            });
        }
        let k = ontic.size();
        for v in weights.iter().map(|w| w.as_slice().len()).chain(responses.iter().map(|r| r.as_slice().len())) {
            if v != k {
                return Err(Error::DimensionMismatch { expected: k, found: v });
            }
        }
        Ok(Self {
            dim,
            ontic,
            states,
            weights,
            effects,
            responses,
        })
    }

    /// Samples `model` on the given states and effects.
    pub fn from_model(model: &dyn OntoModel, states: &[PureState], effects: &[PureState]) -> Result<Self> {
        let weights = states.iter().map(|s| model.weights(s)).collect::<Result<Vec<_>>>()?;
        let responses = effects.iter().map(|e| model.responses(e)).collect::<Result<Vec<_>>>()?;
        Self::new(
            model.ontic().clone(),
            states.to_vec(),
            weights,
            effects.to_vec(),
            responses,
        )
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn effects(&self) -> &[PureState] {
        &self.effects
    }

    pub fn weight_table(&self) -> &[EpistemicWeights] {
        &self.weights
    }

    pub fn response_table(&self) -> &[ResponseVector] {
        &self.responses
    }

    /// Replaces one response entry, keeping it in `[0, 1]`.
    pub fn with_response(mut self, effect: usize, point: usize, value: f64) -> Result<Self> {
        let mut row = self.responses[effect].as_slice().to_vec();
        row[point] = value;
        self.responses[effect] = ResponseVector::new(row)?;
        Ok(self)
    }
}

impl OntoModel for TabulatedModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn ontic(&self) -> &OnticSpace {
        &self.ontic
    }

    fn weights(&self, psi: &PureState) -> Result<EpistemicWeights> {
        psi.check_dim(self.dim)?;
        let i = find_ray(&self.states, psi, TABLE_MATCH_TOL)?;
        Ok(self.weights[i].clone())
    }

    fn responses(&self, phi: &PureState) -> Result<ResponseVector> {
        phi.check_dim(self.dim)?;
        let j = find_ray(&self.effects, phi, TABLE_MATCH_TOL)?;
        Ok(self.responses[j].clone())
    }
}
