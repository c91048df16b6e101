use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

use super::{BlochVector, Projector};

/// Smallest norm accepted before normalization.
pub const MIN_NORM: f64 = 1e-9;

/// A normalized vector in `C^d`.
///
/// The amplitudes are rescaled to unit norm on construction; the norm of the
/// raw input is kept so that document parsers can report it.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex64>,
    input_norm: f64,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidDimension(amplitudes.len(), "states need d >= 2"));
        }
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if !norm.is_finite() || norm < MIN_NORM {
            return Err(Error::DegenerateVector(norm));
        }
        Ok(Self {
            amplitudes: v.unscale(norm),
            input_norm: norm,
        })
    }

    pub fn from_real(components: &[f64]) -> Result<Self> {
        Self::new(components.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|k>`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: k + 1 });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[k] = Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    /// Qubit state whose Bloch vector is `n` (which must be unit length).
    pub fn from_bloch(n: &BlochVector) -> Result<Self> {
        n.require_unit()?;
        let [x, y, z] = n.components();
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = y.atan2(x);
        Self::new(vec![
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ])
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amplitudes.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// Norm of the vector this state was built from.
    pub fn input_norm(&self) -> f64 {
        self.input_norm
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        self.check_dim(other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }

    /// True when the two states are equal up to a global phase.
    pub fn same_ray(&self, other: &PureState, tol: f64) -> bool {
        self.dim() == other.dim() && self.amplitudes.dotc(&other.amplitudes).norm() > 1.0 - tol
    }

    pub fn projector(&self) -> Projector {
        Projector::from_state(self)
    }

    pub fn bloch_vector(&self) -> Result<BlochVector> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.dim() });
        }
        let (c0, c1) = (self.amplitudes[0], self.amplitudes[1]);
        let off = c0.conj() * c1;
        Ok(BlochVector::new([
            2.0 * off.re,
            2.0 * off.im,
            c0.norm_sqr() - c1.norm_sqr(),
        ]))
    }
}

/// The generator behind every stochastic operation: ChaCha8 seeded from a `u64`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator for `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Haar-random state: i.i.d. complex standard normal entries, normalized.
pub fn random_pure_state(dim: usize, seed: u64) -> Result<PureState> {
    random_pure_state_with(dim, &mut seeded_rng(seed))
}

pub fn random_pure_state_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim, "states need d >= 2"));
    }
    let amps = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    PureState::new(amps)
}

/// Kronecker product; index `i * d_b + j` holds `a_i * b_j`.
pub fn tensor_product(a: &PureState, b: &PureState) -> PureState {
    let amps: Vec<Complex64> = a
        .amplitudes()
        .iter()
        .flat_map(|&x| b.amplitudes().iter().map(move |&y| x * y))
        .collect();
    PureState::new(amps).expect("product of unit vectors is a unit vector")
}
