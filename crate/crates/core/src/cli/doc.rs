//! Problem documents.
//!
//! A document is a JSON object. Every field is optional at the syntax level;
//! each command checks for the parts it needs.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "states": [{"name": "up", "vector": [1, 0]},
//!              {"name": "plus_i", "vector": [[0.7071, 0], [0, 0.7071]]}],
//!   "effects": [{"name": "up", "vector": [1, 0]}],
//!   "model": {"kind": "delta"},
//!   "options": {"seed": 7, "tol": 1e-9}
//! }
//! ```
//!
//! Components are bare reals or `[re, im]` pairs. Vectors are normalized on
//! load and their original norms are kept.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasopt::RaySet;
use crate::onto::GridDensity;
use crate::qcore::{to_amplitudes, to_complex, Amplitude, PureState};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVector {
    name: String,
    vector: Vec<Amplitude>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDensity {
    x0: f64,
    h: f64,
    values: Vec<f64>,
}

/// How to build the model a command runs against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// One ontic point per listed state.
    Delta,
    /// The qubit hemisphere model on a Fibonacci lattice.
    Ks {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lattice: Option<usize>,
    },
    /// The qubit model with points `(state, lambda)`.
    Bell {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<usize>,
    },
    /// Explicit tables: one weight vector per state and one response vector
    /// per effect, both over the `ontic` labels.
    Table {
        ontic: Vec<String>,
        weights: Vec<Vec<f64>>,
        responses: Vec<Vec<f64>>,
    },
}

/// Per-document option overrides; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ontic_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_iters: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    states: Vec<RawVector>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    effects: Vec<RawVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    options: DocOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<RawDensity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    region: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expected: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rays: Option<Vec<Vec<Amplitude>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bases: Option<Vec<Vec<usize>>>,
}

fn is_default(o: &DocOptions) -> bool {
    *o == DocOptions::default()
}

#[derive(Debug, Clone)]
pub struct NamedState {
    pub name: String,
    pub state: PureState,
}

#[derive(Debug, Clone)]
pub struct ProblemDocument {
    pub dim: Option<usize>,
    pub states: Vec<NamedState>,
    pub effects: Vec<NamedState>,
    pub model: Option<ModelSpec>,
    pub options: DocOptions,
    pub density: Option<GridDensity>,
    pub region: Option<[f64; 2]>,
    /// Reference value for the `bohm` region probability.
    pub expected: Option<f64>,
    pub rays: Option<RaySet>,
}

fn named_list(kind: &str, raw: Vec<RawVector>, dim: Option<usize>) -> Result<Vec<NamedState>> {
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    let dim = dim.ok_or_else(|| Error::Document(format!("{kind}s given but \"dim\" is missing")))?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(raw.len());
    for v in raw {
        if !seen.insert(v.name.clone()) {
            return Err(Error::Document(format!("duplicate {kind} name {:?}", v.name)));
        }
        if v.vector.len() != dim {
            return Err(Error::Document(format!(
                "{kind} {:?} has {} components, expected {dim}",
                v.name,
                v.vector.len()
            )));
        }
        let state = PureState::new(to_complex(&v.vector))
            .map_err(|e| Error::Document(format!("{kind} {:?}: {e}", v.name)))?;
        out.push(NamedState { name: v.name, state });
    }
    Ok(out)
}

pub fn parse_problem(text: &str) -> Result<ProblemDocument> {
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let states = named_list("state", raw.states, raw.dim)?;
    let effects = named_list("effect", raw.effects, raw.dim)?;
    let density = raw
        .density
        .map(|d| GridDensity::new(d.x0, d.h, d.values))
        .transpose()?;
    let rays = match (raw.rays, raw.bases) {
        (Some(r), Some(b)) => {
            let dim = raw.dim.ok_or_else(|| Error::Document("rays given but \"dim\" is missing".into()))?;
            if let Some((i, ray)) = r.iter().enumerate().find(|(_, ray)| ray.len() != dim) {
                return Err(Error::Document(format!(
                    "ray {i} has {} components, expected {dim}",
                    ray.len()
                )));
            }
            Some(RaySet::from_components(dim, r.iter().map(|x| to_complex(x)).collect(), b)?)
        }
        (None, None) => None,
        _ => return Err(Error::Document("\"rays\" and \"bases\" must be given together".into())),
    };
    if let Some(ModelSpec::Table { ontic, weights, responses }) = &raw.model {
        if weights.len() != states.len() || responses.len() != effects.len() {
            return Err(Error::Document(format!(
                "table model lists {} weight and {} response vectors for {} states and {} effects",
                weights.len(),
                responses.len(),
                states.len(),
                effects.len()
            )));
        }
        let k = ontic.len();
        let named = states.iter().zip(weights).chain(effects.iter().zip(responses));
        for (s, row) in named {
            if row.len() != k {
                return Err(Error::Document(format!(
                    "table entry for {:?} has {} values, expected {k}",
                    s.name,
                    row.len()
                )));
            }
        }
    }
    Ok(ProblemDocument {
        dim: raw.dim,
        states,
        effects,
        model: raw.model,
        options: raw.options,
        density,
        region: raw.region,
        expected: raw.expected,
        rays,
    })
}

impl ProblemDocument {
    pub fn state_vectors(&self) -> Vec<PureState> {
        self.states.iter().map(|s| s.state.clone()).collect()
    }

    pub fn effect_vectors(&self) -> Vec<PureState> {
        self.effects.iter().map(|s| s.state.clone()).collect()
    }

    /// Original norms of the listed states and effects, keyed by name.
    pub fn input_norms(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for s in &self.states {
            out.insert(format!("state:{}", s.name), s.state.input_norm());
        }
        for e in &self.effects {
            out.insert(format!("effect:{}", e.name), e.state.input_norm());
        }
        out
    }

    /// Serializes with normalized vectors as `[re, im]` pairs.
    pub fn to_json(&self) -> String {
        let vecs = |list: &[NamedState]| {
            list.iter()
                .map(|s| RawVector {
                    name: s.name.clone(),
                    vector: to_amplitudes(s.state.amplitudes()),
                })
                .collect()
        };
        let raw = RawDocument {
            dim: self.dim,
            states: vecs(&self.states),
            effects: vecs(&self.effects),
            model: self.model.clone(),
            options: self.options.clone(),
            density: self.density.as_ref().map(|d| RawDensity {
                x0: d.x_min(),
                h: d.spacing(),
                values: d.values().to_vec(),
            }),
            region: self.region,
            expected: self.expected,
            rays: self
                .rays
                .as_ref()
                .map(|r| r.rays().iter().map(|v| to_amplitudes(v.as_slice())).collect()),
            bases: self.rays.as_ref().map(|r| r.bases().to_vec()),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("document serializes");
        s.push('\n');
        s
    }
}
