//! Dense complex state algebra for finite dimensions.
//!
//! States are normalized on construction. All tolerances are absolute.

mod amplitude;
mod operator;
mod state;

pub use amplitude::{to_amplitudes, to_complex, Amplitude};

pub use operator::{
    hermitian_deviation, pauli_matrices, pauli_observable, trace_product, BlochVector,
    HermitianOperator, Projector,
};
pub use state::{
    random_pure_state, random_pure_state_with, rng_stream, seeded_rng, tensor_product, PureState,
    MIN_NORM,
};

use crate::error::Result;

/// `|<psi|phi>|^2`.
pub fn born_probability(psi: &PureState, phi: &PureState) -> Result<f64> {
    Ok(psi.inner(phi)?.norm_sqr().min(1.0))
}

/// The `d^2` states `|k>`, `(|j>+|k>)/sqrt2`, `(|j>+i|k>)/sqrt2` (j < k).
///
/// Their projectors span the real space of Hermitian `d x d` matrices.
pub fn standard_ic_states(dim: usize) -> Result<Vec<PureState>> {
    use num_complex::Complex64;
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(dim * dim);
    for k in 0..dim {
        out.push(PureState::basis(dim, k)?);
    }
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut v = vec![zero; dim];
            v[j] = Complex64::new(1.0, 0.0);
            v[k] = Complex64::new(1.0, 0.0);
            out.push(PureState::new(v.clone())?);
            v[k] = Complex64::new(0.0, 1.0);
            out.push(PureState::new(v)?);
        }
    }
    Ok(out)
}

/// Orthonormal basis whose first vector is `phi` (Gram-Schmidt against the computational basis).
pub fn complete_basis(phi: &PureState) -> Vec<PureState> {
    use nalgebra::DVector;
    let d = phi.dim();
    let mut basis: Vec<DVector<num_complex::Complex64>> = vec![phi.as_vector().clone()];
    for k in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = PureState::basis(d, k).unwrap().as_vector().clone();
        for b in &basis {
            let c = b.dotc(&v);
            v -= b * c;
        }
        if v.norm() > 1e-6 {
            let n = v.norm();
            basis.push(v.unscale(n));
        }
    }
    basis
        .into_iter()
        .map(|v| PureState::new(v.as_slice().to_vec()).unwrap())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn born_trivial_cases() {
        let z0 = PureState::basis(2, 0).unwrap();
        let z1 = PureState::basis(2, 1).unwrap();
        let plus = PureState::from_real(&[1.0, 1.0]).unwrap();
        assert!((born_probability(&z0, &z0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(born_probability(&z0, &z1).unwrap(), 0.0);
        assert!((born_probability(&z0, &plus).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn born_dimension_mismatch() {
        let a = PureState::basis(2, 0).unwrap();
        let b = PureState::basis(3, 0).unwrap();
        assert!(matches!(
            born_probability(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn completion_sums_to_one() {
        let mut rng = seeded_rng(21);
        for d in 2..6 {
            let psi = random_pure_state_with(d, &mut rng).unwrap();
            let phi = random_pure_state_with(d, &mut rng).unwrap();
            let total: f64 = complete_basis(&phi)
                .iter()
                .map(|b| born_probability(&psi, b).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn projector_trace_matches_born() {
        let mut rng = seeded_rng(4);
        for d in 2..6 {
            let psi = random_pure_state_with(d, &mut rng).unwrap();
            let phi = random_pure_state_with(d, &mut rng).unwrap();
            let t = psi.projector().trace_with(&phi.projector());
            assert!((t - born_probability(&psi, &phi).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn ic_set_size() {
        for d in 2..5 {
            assert_eq!(standard_ic_states(d).unwrap().len(), d * d);
        }
    }
}
