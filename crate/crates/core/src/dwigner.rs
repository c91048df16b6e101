//! Discrete Wigner functions on the `d x d` phase-space lattice, `d` an odd prime.
//!
//! `<m|A(q,p)|n> = [m + n = 2q mod d] w^{p(m-n)}` with `w = exp(2 pi i / d)`,
//! and `W(q,p) = Tr[rho A(q,p)] / d`. Summing `W` over `p` gives the
//! computational-basis distribution; summing over `q` gives the distribution
//! in the Fourier basis `|f_p> = d^{-1/2} sum_m w^{pm} |m>`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{HermitianOperator, PureState};

/// Unit-trace tolerance for [`wigner`] inputs.
pub const TRACE_TOL: f64 = 1e-10;

pub fn is_odd_prime(d: usize) -> bool {
    d >= 3 && !d.is_multiple_of(2) && (3..).step_by(2).take_while(|k| k * k <= d).all(|k| !d.is_multiple_of(k))
}

fn omega(d: usize, k: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (k % d) as f64 / d as f64)
}

#[derive(Debug, Clone)]
pub struct PhasePointSet {
    dim: usize,
    /// Index `q * d + p`.
    operators: Vec<HermitianOperator>,
}

impl PhasePointSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, q: usize, p: usize) -> &HermitianOperator {
        &self.operators[q * self.dim + p]
    }

    pub fn operators(&self) -> &[HermitianOperator] {
        &self.operators
    }

    /// `max |Tr A(q,p) - 1|`.
    pub fn max_trace_deviation(&self) -> f64 {
        self.operators.iter().map(|a| (a.trace() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `max |Tr[A(a) A(b)] - d delta_ab|` over all pairs.
    pub fn max_orthogonality_deviation(&self) -> f64 {
        let d = self.dim as f64;
        let mut worst: f64 = 0.0;
        for (i, a) in self.operators.iter().enumerate() {
            for (j, b) in self.operators.iter().enumerate() {
                let want = if i == j { d } else { 0.0 };
                worst = worst.max((a.trace_with(b.matrix()) - want).abs());
            }
        }
        worst
    }
}

pub fn phase_point_operators(d: usize) -> Result<PhasePointSet> {
    if !is_odd_prime(d) {
        return Err(Error::NotOddPrime(d));
    }
    let mut operators = Vec::with_capacity(d * d);
    for q in 0..d {
        for p in 0..d {
            let mut m = DMatrix::zeros(d, d);
            for r in 0..d {
                // r + c = 2q mod d
                let c = (2 * q + 2 * d - r) % d;
                m[(r, c)] = omega(d, p * ((r + d - c) % d));
            }
            operators.push(HermitianOperator::new(m)?);
        }
    }
    Ok(PhasePointSet { dim: d, operators })
}

/// `W(q, p)`, row `q`, column `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerTable {
    dim: usize,
    values: DMatrix<f64>,
}

impl WignerTable {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if !values.is_square() {
            return Err(Error::DimensionMismatch {
                expected: values.nrows(),
                found: values.ncols(),
            });
        }
        Ok(Self {
            dim: values.nrows(),
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, q: usize, p: usize) -> f64 {
        self.values[(q, p)]
    }

    pub fn sum(&self) -> f64 {
        self.values.sum()
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    /// `sum_p W(q, p)` for each `q`.
    pub fn position_marginal(&self) -> Vec<f64> {
        self.values.row_iter().map(|r| r.sum()).collect()
    }

    /// `sum_q W(q, p)` for each `p`.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        self.values.column_iter().map(|c| c.sum()).collect()
    }
}

pub fn wigner(op: &HermitianOperator, pps: &PhasePointSet) -> Result<WignerTable> {
    let d = pps.dim;
    if op.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: op.dim() });
    }
    let tr = op.trace();
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidTrace(tr));
    }
    let values = DMatrix::from_fn(d, d, |q, p| pps.get(q, p).trace_with(op.matrix()) / d as f64);
    Ok(WignerTable { dim: d, values })
}

/// `sum max(0, -W)`.
pub fn negativity(table: &WignerTable) -> f64 {
    table.values.iter().map(|w| (-w).max(0.0)).sum()
}

/// `sum W(q,p) A(q,p)`.
pub fn reconstruct_from_wigner(table: &WignerTable, pps: &PhasePointSet) -> Result<HermitianOperator> {
    let d = pps.dim;
    if table.dim != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: table.dim,
        });
    }
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for q in 0..d {
        for p in 0..d {
            m += pps.get(q, p).matrix() * Complex64::new(table.get(q, p), 0.0);
        }
    }
    HermitianOperator::with_tolerance(m, 1e-9)
}

/// `|f_p> = d^{-1/2} sum_m w^{pm} |m>`.
pub fn fourier_state(d: usize, p: usize) -> Result<PureState> {
    PureState::new((0..d).map(|m| omega(d, p * m)).collect())
}
