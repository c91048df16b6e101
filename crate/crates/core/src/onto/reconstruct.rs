//! Linear inversion of response functions into per-point operators.
//!
//! If a point's responses have the form `P(phi) = Tr[B P_phi]` for a Hermitian
//! `B`, then knowing `P` on an informationally complete family of rank-1
//! projectors determines `B`. We parametrize `B` by `d^2` real coordinates
//! over the basis `E_kk`, `E_jk + E_kj`, `-i E_jk + i E_kj` and solve the real
//! least-squares system with a precomputed pseudo-inverse.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{HermitianOperator, PureState};

/// Gram-matrix eigenvalues above this count towards the rank.
pub const GRAM_RANK_TOL: f64 = 1e-8;
/// Least-squares residual above this flags the responses as not of trace form.
pub const INCONSISTENCY_TOL: f64 = 1e-8;

/// `Tr[H_a P_phi]` for every basis element `H_a`.
fn trace_coordinates(phi: &PureState) -> Vec<f64> {
    let d = phi.dim();
    let c = phi.amplitudes();
    let mut row = Vec::with_capacity(d * d);
    row.extend(c.iter().map(|z| z.norm_sqr()));
    for j in 0..d {
        for k in (j + 1)..d {
            let z = c[j].conj() * c[k];
            row.push(2.0 * z.re);
            row.push(2.0 * z.im);
        }
    }
    row
}

fn assemble(dim: usize, x: &[f64]) -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 0..dim {
        m[(k, k)] = Complex64::new(x[k], 0.0);
    }
    let mut idx = dim;
    for j in 0..dim {
        for k in (j + 1)..dim {
            let (a, b) = (x[idx], x[idx + 1]);
            idx += 2;
            // a (E_jk + E_kj) + b (-i E_jk + i E_kj)
            m[(j, k)] = Complex64::new(a, -b);
            m[(k, j)] = Complex64::new(a, b);
        }
    }
    m
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub operator: HermitianOperator,
    /// Max |Tr[B P_phi] - response| over the effect family.
    pub residual: f64,
    pub inconsistent: bool,
}

/// Precomputed inversion for a fixed informationally complete effect family.
#[derive(Debug, Clone)]
pub struct IcReconstructor {
    dim: usize,
    effects: Vec<PureState>,
    design: DMatrix<f64>,
    pinv: DMatrix<f64>,
    rank: usize,
}

impl IcReconstructor {
    pub fn new(effects: &[PureState]) -> Result<Self> {
        let first = effects.first().ok_or(Error::DeficientSpan { rank: 0, needed: 4 })?;
        let dim = first.dim();
        for e in effects {
            first.check_dim(e.dim())?;
        }
        let n = effects.len();
        let gram = DMatrix::from_fn(n, n, |a, b| {
            effects[a].as_vector().dotc(effects[b].as_vector()).norm_sqr()
        });
        let rank = SymmetricEigen::new(gram)
            .eigenvalues
            .iter()
            .filter(|&&ev| ev > GRAM_RANK_TOL)
            .count();
        if rank < dim * dim {
            return Err(Error::DeficientSpan {
                rank,
                needed: dim * dim,
            });
        }
        let rows: Vec<Vec<f64>> = effects.iter().map(trace_coordinates).collect();
        let design = DMatrix::from_fn(n, dim * dim, |r, c| rows[r][c]);
        let pinv = design
            .clone()
            .svd(true, true)
            .pseudo_inverse(1e-12)
            .expect("nonnegative epsilon");
        Ok(Self {
            dim,
            effects: effects.to_vec(),
            design,
            pinv,
            rank,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[PureState] {
        &self.effects
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Solves `Tr[B P_phi_j] = responses[j]` for Hermitian `B`.
    pub fn reconstruct(&self, responses: &[f64]) -> Result<Reconstruction> {
        if responses.len() != self.effects.len() {
            return Err(Error::DimensionMismatch {
                expected: self.effects.len(),
                found: responses.len(),
            });
        }
        let r = nalgebra::DVector::from_column_slice(responses);
        let x = &self.pinv * &r;
        let fitted = &self.design * &x;
        let residual = (fitted - r).amax();
        let operator = HermitianOperator::new(assemble(self.dim, x.as_slice()))?;
        Ok(Reconstruction {
            operator,
            residual,
            inconsistent: residual > INCONSISTENCY_TOL,
        })
    }
}

/// One-shot reconstruction from `(effect, response)` pairs.
pub fn reconstruct_ontic_operator(responses: &[(PureState, f64)], dim: usize) -> Result<Reconstruction> {
    for (phi, _) in responses {
        phi.check_dim(dim)?;
    }
    let effects: Vec<PureState> = responses.iter().map(|(p, _)| p.clone()).collect();
    let values: Vec<f64> = responses.iter().map(|(_, v)| *v).collect();
    IcReconstructor::new(&effects)?.reconstruct(&values)
}

/// Operators `B(X)` attached to each ontic point.
#[derive(Debug, Clone, Default)]
pub struct OnticOperatorAssignment {
    pub operators: Vec<HermitianOperator>,
}

impl OnticOperatorAssignment {
    pub const SPECTRUM_TOL: f64 = 1e-9;

    /// Largest amount by which any spectrum leaves `[0, 1]`.
    pub fn bound_violation(&self) -> f64 {
        self.operators
            .iter()
            .map(|b| {
                let ev = b.eigenvalues();
                let lo = ev.first().copied().unwrap_or(0.0);
                let hi = ev.last().copied().unwrap_or(0.0);
                (-lo).max(hi - 1.0).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    pub fn is_valid(&self) -> bool {
        self.bound_violation() <= Self::SPECTRUM_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{born_probability, random_pure_state_with, seeded_rng, standard_ic_states};

    #[test]
    fn born_responses_give_projector() {
        let mut rng = seeded_rng(31);
        let ic = standard_ic_states(3).unwrap();
        let chi = random_pure_state_with(3, &mut rng).unwrap();
        let pairs: Vec<_> = ic
            .iter()
            .map(|phi| (phi.clone(), born_probability(phi, &chi).unwrap()))
            .collect();
        let rec = reconstruct_ontic_operator(&pairs, 3).unwrap();
        assert!(rec.operator.max_abs_diff(&chi.projector().to_operator()) < 1e-9);
        assert!(!rec.inconsistent);
    }

    #[test]
    fn constant_responses_give_multiple_of_identity() {
        let ic = standard_ic_states(4).unwrap();
        let pairs: Vec<_> = ic.iter().map(|phi| (phi.clone(), 0.3)).collect();
        let rec = reconstruct_ontic_operator(&pairs, 4).unwrap();
        assert!(rec.operator.max_abs_diff(&HermitianOperator::identity(4).scale(0.3)) < 1e-9);
    }

    #[test]
    fn deficient_span_reports_rank() {
        let basis: Vec<_> = (0..3).map(|k| (PureState::basis(3, k).unwrap(), 0.5)).collect();
        match reconstruct_ontic_operator(&basis, 3) {
            Err(Error::DeficientSpan { rank, needed }) => {
                assert_eq!(rank, 3);
                assert_eq!(needed, 9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dispersion_free_responses_are_flagged_inconsistent() {
        // 0/1 responses on an over-complete qubit family are not of trace form
        let mut rng = seeded_rng(2);
        let mut effects = standard_ic_states(2).unwrap();
        effects.extend((0..6).map(|_| random_pure_state_with(2, &mut rng).unwrap()));
        let n = crate::qcore::BlochVector::z();
        let responses: Vec<f64> = effects
            .iter()
            .map(|e| if e.bloch_vector().unwrap().dot(&n) > 0.2 { 1.0 } else { 0.0 })
            .collect();
        let rec = IcReconstructor::new(&effects).unwrap().reconstruct(&responses).unwrap();
        assert!(rec.inconsistent);
    }

    #[test]
    fn spectrum_bounds() {
        let a = OnticOperatorAssignment {
            operators: vec![HermitianOperator::identity(2), HermitianOperator::identity(2).scale(1.5)],
        };
        assert!((a.bound_violation() - 0.5).abs() < 1e-12);
        assert!(!a.is_valid());
    }
}
