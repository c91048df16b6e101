//! Noncontextual 0/1 assignments on finite ray sets.
//!
//! A valuation assigns 0 or 1 to every ray so that each listed orthonormal
//! basis contains exactly one ray valued 1. The search is exhaustive, so a
//! count of zero certifies that no such valuation exists for the set.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{to_amplitudes, to_complex, Amplitude};

/// Tolerance for unit norm and pairwise orthogonality.
pub const RAY_TOL: f64 = 1e-9;
/// Assignments are listed only when there are at most this many.
pub const KS_ASSIGNMENT_LIMIT: u64 = 1000;

static CABELLO18: &str = include_str!("../../data/cabello18.json");

#[derive(Debug, Clone, PartialEq)]
pub struct RaySet {
    dim: usize,
    rays: Vec<DVector<Complex64>>,
    bases: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RaySetDoc {
    dim: usize,
    rays: Vec<Vec<Amplitude>>,
    bases: Vec<Vec<usize>>,
}

impl RaySet {
    /// Rays are stored as given; see [`validate_ray_set`] for the checks.
    pub fn new(dim: usize, rays: Vec<DVector<Complex64>>, bases: Vec<Vec<usize>>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim, "ray set dimension must be at least 2"));
        }
        for r in &rays {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
        }
        Ok(Self { dim, rays, bases })
    }

    /// Normalizes every ray; zero rays are rejected.
    pub fn from_components(dim: usize, rays: Vec<Vec<Complex64>>, bases: Vec<Vec<usize>>) -> Result<Self> {
        let mut out = Vec::with_capacity(rays.len());
        for (i, r) in rays.into_iter().enumerate() {
            let v = DVector::from_vec(r);
            let n = v.norm();
            if n < crate::qcore::MIN_NORM {
                return Err(Error::InvalidRaySet(format!("ray {i} is zero")));
            }
            out.push(v.unscale(n));
        }
        Self::new(dim, out, bases)
    }

    /// Parses `{"dim", "rays", "bases"}`; ray components may be integers,
    /// reals or `[re, im]` pairs. Rays are normalized on load.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: RaySetDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let rays = doc.rays.iter().map(|r| to_complex(r)).collect();
        Self::from_components(doc.dim, rays, doc.bases)
    }

    pub fn to_json(&self) -> String {
        let doc = RaySetDoc {
            dim: self.dim,
            rays: self.rays.iter().map(|r| to_amplitudes(r.as_slice())).collect(),
            bases: self.bases.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("ray set serializes")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[DVector<Complex64>] {
        &self.rays
    }

    pub fn bases(&self) -> &[Vec<usize>] {
        &self.bases
    }
}

/// The 18-ray, 9-basis set in dimension 4, integer components normalized on load.
pub fn cabello18() -> RaySet {
    RaySet::from_json(CABELLO18).expect("bundled ray set parses")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RayViolation {
    NotUnit { ray: usize, norm: f64 },
    NotOrthogonal { basis: usize, first: usize, second: usize, overlap: f64 },
    WrongBasisSize { basis: usize, size: usize },
    RepeatedRay { basis: usize, ray: usize },
    IndexOutOfRange { basis: usize, index: usize },
    UnusedRay { ray: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaySetReport {
    pub violations: Vec<RayViolation>,
}

impl RaySetReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_ray_set(set: &RaySet) -> RaySetReport {
    let mut violations = Vec::new();
    for (i, r) in set.rays.iter().enumerate() {
        let norm = r.norm();
        if (norm - 1.0).abs() > RAY_TOL {
            violations.push(RayViolation::NotUnit { ray: i, norm });
        }
    }
    let mut used = vec![false; set.rays.len()];
    for (b, group) in set.bases.iter().enumerate() {
        if group.len() != set.dim {
            violations.push(RayViolation::WrongBasisSize {
                basis: b,
                size: group.len(),
            });
        }
        let mut seen = Vec::new();
        for &idx in group {
            if idx >= set.rays.len() {
                violations.push(RayViolation::IndexOutOfRange { basis: b, index: idx });
            } else if seen.contains(&idx) {
                violations.push(RayViolation::RepeatedRay { basis: b, ray: idx });
            } else {
                used[idx] = true;
                seen.push(idx);
            }
        }
        for (x, &first) in seen.iter().enumerate() {
            for &second in &seen[x + 1..] {
                let overlap = set.rays[first].dotc(&set.rays[second]).norm();
                if overlap > RAY_TOL {
                    violations.push(RayViolation::NotOrthogonal {
                        basis: b,
                        first,
                        second,
                        overlap,
                    });
                }
            }
        }
    }
    for (ray, u) in used.into_iter().enumerate() {
        if !u {
            violations.push(RayViolation::UnusedRay { ray });
        }
    }
    RaySetReport { violations }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KsCount {
    pub count: u64,
    /// Every assignment, by ray index, when `count <= KS_ASSIGNMENT_LIMIT`.
    pub assignments: Option<Vec<Vec<u8>>>,
}

struct Search<'a> {
    bases_of: Vec<Vec<usize>>,
    /// Largest ray index in each basis: the basis is complete once it is set.
    last: Vec<usize>,
    bases: &'a [Vec<usize>],
    ones: Vec<usize>,
    value: Vec<u8>,
    count: u64,
    found: Vec<Vec<u8>>,
}

impl Search<'_> {
    fn consistent(&self, ray: usize) -> bool {
        self.bases_of[ray].iter().all(|&b| {
            let ones = self.ones[b];
            ones <= 1 && (self.last[b] != ray || ones == 1)
        })
    }

    fn visit(&mut self, ray: usize) {
        if ray == self.value.len() {
            self.count += 1;
            if self.count <= KS_ASSIGNMENT_LIMIT {
                self.found.push(self.value.clone());
            }
            return;
        }
        for v in [0u8, 1] {
            self.value[ray] = v;
            if v == 1 {
                for &b in &self.bases_of[ray] {
                    self.ones[b] += 1;
                }
            }
            if self.consistent(ray) {
                self.visit(ray + 1);
            }
            if v == 1 {
                for &b in &self.bases_of[ray] {
                    self.ones[b] -= 1;
                }
            }
        }
        self.value[ray] = 0;
    }
}

/// Counts valuations by backtracking over rays in index order, 0 before 1.
pub fn ks_assignment_count(set: &RaySet) -> Result<KsCount> {
    let report = validate_ray_set(set);
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidRaySet(format!(
            "{} violation(s), first: {v:?}",
            report.violations.len()
        )));
    }
    let n = set.rays.len();
    let mut bases_of = vec![Vec::new(); n];
    for (b, group) in set.bases.iter().enumerate() {
        for &r in group {
            bases_of[r].push(b);
        }
    }
    let mut search = Search {
        bases_of,
        last: set.bases.iter().map(|g| *g.iter().max().expect("nonempty basis")).collect(),
        bases: &set.bases,
        ones: vec![0; set.bases.len()],
        value: vec![0; n],
        count: 0,
        found: Vec::new(),
    };
    search.visit(0);
    debug_assert!(search.found.iter().all(|a| search
        .bases
        .iter()
        .all(|g| g.iter().map(|&r| a[r] as usize).sum::<usize>() == 1)));
    let assignments = (search.count <= KS_ASSIGNMENT_LIMIT).then_some(search.found);
    Ok(KsCount {
        count: search.count,
        assignments,
    })
}
