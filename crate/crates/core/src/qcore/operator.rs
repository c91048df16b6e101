use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::PureState;

const HERMITIAN_TOL: f64 = 1e-12;

/// A real 3-vector: Bloch coordinates of a qubit state or a spin direction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub fn new(components: [f64; 3]) -> Self {
        Self(components)
    }

    /// Unit vector at polar angle `theta` from `+z` and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
    }

    pub fn x() -> Self {
        Self([1.0, 0.0, 0.0])
    }

    pub fn z() -> Self {
        Self([0.0, 0.0, 1.0])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-9 {
            return Err(Error::DegenerateVector(n));
        }
        Ok(Self(self.0.map(|c| c / n)))
    }

    pub fn require_unit(&self) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnit(n));
        }
        Ok(())
    }
}

/// A Hermitian matrix on `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: DMatrix<Complex64>,
}

impl HermitianOperator {
    /// Accepts matrices Hermitian to within 1e-12 and symmetrizes them exactly.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerance(matrix, HERMITIAN_TOL)
    }

    pub fn with_tolerance(matrix: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let dev = hermitian_deviation(&matrix);
        if dev > tol {
            return Err(Error::NotHermitian(dev));
        }
        let sym = (&matrix + matrix.adjoint()).unscale(2.0);
        Ok(Self { matrix: sym })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr[self * other]`, real for Hermitian arguments.
    pub fn trace_with(&self, other: &DMatrix<Complex64>) -> f64 {
        trace_product(&self.matrix, other)
    }

    pub fn expectation(&self, psi: &PureState) -> Result<f64> {
        psi.check_dim(self.dim())?;
        let v = psi.as_vector();
        Ok(v.dotc(&(&self.matrix * v)).re)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Spectral norm.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.scale(factor),
        }
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }
}

impl From<Projector> for HermitianOperator {
    fn from(p: Projector) -> Self {
        Self { matrix: p.matrix }
    }
}

/// Rank-1 projector `|phi><phi|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: DMatrix<Complex64>,
    source: Option<PureState>,
}

impl Projector {
    pub fn from_state(phi: &PureState) -> Self {
        let v = phi.as_vector();
        Self {
            matrix: v * v.adjoint(),
            source: Some(phi.clone()),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn source(&self) -> Option<&PureState> {
        self.source.as_ref()
    }

    pub fn trace_with(&self, other: &Projector) -> f64 {
        trace_product(&self.matrix, &other.matrix)
    }

    pub fn to_operator(&self) -> HermitianOperator {
        HermitianOperator {
            matrix: self.matrix.clone(),
        }
    }
}

/// `Tr[a * b]` real part.
pub fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

pub fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `sigma_x`, `sigma_y`, `sigma_z`.
pub fn pauli_matrices() -> [DMatrix<Complex64>; 3] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    ]
}

/// Spin observable `n . sigma` for a unit direction `n`.
pub fn pauli_observable(n: &BlochVector) -> Result<HermitianOperator> {
    n.require_unit()?;
    let [s0, s1, s2] = pauli_matrices();
    let [x, y, z] = n.components();
    Ok(HermitianOperator {
        matrix: s0.scale(x) + s1.scale(y) + s2.scale(z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{random_pure_state_with, seeded_rng};

    #[test]
    fn sigma_z_and_sigma_x() {
        let z = pauli_observable(&BlochVector::z()).unwrap();
        assert_eq!(z.matrix()[(0, 0)].re, 1.0);
        assert_eq!(z.matrix()[(1, 1)].re, -1.0);
        let x = pauli_observable(&BlochVector::x()).unwrap();
        assert_eq!(x.matrix()[(0, 1)].re, 1.0);
        assert_eq!(x.matrix()[(1, 0)].re, 1.0);
        assert_eq!(x.matrix()[(0, 0)].norm(), 0.0);
    }

    #[test]
    fn rejects_non_unit_direction() {
        assert!(matches!(
            pauli_observable(&BlochVector::new([0.5, 0.0, 0.0])),
            Err(Error::NotUnit(_))
        ));
    }

    #[test]
    fn pauli_trace_zero_det_minus_one() {
        let mut rng = seeded_rng(5);
        for _ in 0..30 {
            let n = random_pure_state_with(2, &mut rng).unwrap().bloch_vector().unwrap();
            let op = pauli_observable(&n).unwrap();
            assert!(op.trace().abs() < 1e-12);
            let m = op.matrix();
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            assert!((det.re + 1.0).abs() < 1e-12 && det.im.abs() < 1e-12);
            let ev = op.eigenvalues();
            assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn expectation_equals_bloch_dot() {
        let mut rng = seeded_rng(9);
        for _ in 0..50 {
            let n = random_pure_state_with(2, &mut rng).unwrap().bloch_vector().unwrap();
            let psi = random_pure_state_with(2, &mut rng).unwrap();
            let m = psi.bloch_vector().unwrap();
            let e = pauli_observable(&n).unwrap().expectation(&psi).unwrap();
            assert!((e - n.dot(&m)).abs() < 1e-12);
        }
    }

    #[test]
    fn projector_invariants() {
        let mut rng = seeded_rng(2);
        for d in 2..6 {
            let p = random_pure_state_with(d, &mut rng).unwrap().projector();
            let m = p.matrix();
            assert!(hermitian_deviation(m) < 1e-12);
            let sq = m * m;
            assert!((sq - m).iter().all(|z| z.norm() < 1e-10));
            assert!((m.trace().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn hermitian_constructor_rejects_asymmetric() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian(_))));
    }
}
