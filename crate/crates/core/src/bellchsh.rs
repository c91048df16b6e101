//! CHSH values of two-qubit pure states.
//!
//! Spin up/down along z are `|0>`/`|1>` and the first qubit is the left
//! Kronecker factor. For spin observables `a.sigma` and `b.sigma` the
//! correlator is `a^T T b` with `T` the correlation tensor of the state.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::qcore::{pauli_matrices, seeded_rng, BlochVector, PureState};

/// Settings `a, a'` on the first qubit and `b, b'` on the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshSetting {
    pub a: BlochVector,
    pub a_prime: BlochVector,
    pub b: BlochVector,
    pub b_prime: BlochVector,
}

impl ChshSetting {
    pub fn new(a: BlochVector, a_prime: BlochVector, b: BlochVector, b_prime: BlochVector) -> Result<Self> {
        for v in [&a, &a_prime, &b, &b_prime] {
            v.require_unit()?;
        }
        Ok(Self { a, a_prime, b, b_prime })
    }

    /// `a = z`, `a' = x`, `b = (x+z)/sqrt2`, `b' = (z-x)/sqrt2`.
    pub fn standard() -> Self {
        Self {
            a: BlochVector::z(),
            a_prime: BlochVector::x(),
            b: BlochVector::new([1.0 / SQRT_2, 0.0, 1.0 / SQRT_2]),
            b_prime: BlochVector::new([-1.0 / SQRT_2, 0.0, 1.0 / SQRT_2]),
        }
    }

    /// `(polar, azimuth)` for `a, a', b, b'` in that order.
    pub fn from_angles(angles: &[f64; 8]) -> Self {
        let v = |i: usize| BlochVector::from_angles(angles[2 * i], angles[2 * i + 1]);
        Self {
            a: v(0),
            a_prime: v(1),
            b: v(2),
            b_prime: v(3),
        }
    }

    pub fn angles(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (i, v) in [self.a, self.a_prime, self.b, self.b_prime].iter().enumerate() {
            let [x, y, z] = v.components();
            out[2 * i] = z.clamp(-1.0, 1.0).acos();
            out[2 * i + 1] = y.atan2(x);
        }
        out
    }
}

/// `T[m][n] = <psi| sigma_m (x) sigma_n |psi>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTensor(pub Matrix3<f64>);

impl CorrelationTensor {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn correlator(&self, a: &BlochVector, b: &BlochVector) -> f64 {
        (vec3(a).transpose() * self.0 * vec3(b))[(0, 0)]
    }

    pub fn chsh(&self, s: &ChshSetting) -> f64 {
        self.correlator(&s.a, &s.b) + self.correlator(&s.a, &s.b_prime) + self.correlator(&s.a_prime, &s.b)
            - self.correlator(&s.a_prime, &s.b_prime)
    }
}

fn vec3(v: &BlochVector) -> Vector3<f64> {
    Vector3::from(v.components())
}

pub fn correlation_tensor(state: &PureState) -> Result<CorrelationTensor> {
    state.check_dim(4)?;
    let psi = state.amplitudes();
    let sigma = pauli_matrices();
    let mut t = Matrix3::zeros();
    for m in 0..3 {
        for n in 0..3 {
            // sum over a,b,c,d of conj(psi_ab) s_m[a,c] s_n[b,d] psi_cd
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        for d in 0..2 {
                            acc += psi[2 * a + b].conj() * sigma[m][(a, c)] * sigma[n][(b, d)] * psi[2 * c + d];
                        }
                    }
                }
            }
            t[(m, n)] = acc.re;
        }
    }
    Ok(CorrelationTensor(t))
}

/// `<ab> + <ab'> + <a'b> - <a'b'>`.
pub fn chsh_value(state: &PureState, setting: &ChshSetting) -> Result<f64> {
    Ok(correlation_tensor(state)?.chsh(setting))
}

/// `2 sqrt(u1 + u2)` with `u1, u2` the two largest eigenvalues of `T^T T`.
pub fn horodecki_max(state: &PureState) -> Result<f64> {
    let t = correlation_tensor(state)?.0;
    let mut ev: Vec<f64> = SymmetricEigen::new(t.transpose() * t).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    Ok(2.0 * (ev[0] + ev[1]).max(0.0).sqrt())
}

/// `phi+, phi-, psi+, psi-` in the computational basis.
pub fn bell_states() -> [PureState; 4] {
    let s = |v: [f64; 4]| PureState::from_real(&v).expect("nonzero");
    [
        s([1.0, 0.0, 0.0, 1.0]),
        s([1.0, 0.0, 0.0, -1.0]),
        s([0.0, 1.0, 1.0, 0.0]),
        s([0.0, 1.0, -1.0, 0.0]),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshSearch {
    pub value: f64,
    pub setting: ChshSetting,
}

const GOLDEN_STEPS: usize = 40;

/// Grid search over the four Bloch directions followed by golden-section
/// refinement of the eight angles, round-robin, `4 * refine_iters` passes.
///
/// The grid has polar angles `i pi / (steps - 1)` and azimuths
/// `2 pi j / steps + offset`, with the offset drawn from `seed`.
pub fn chsh_grid_max(state: &PureState, coarse_steps: usize, refine_iters: usize, seed: u64) -> Result<ChshSearch> {
    if coarse_steps < 8 {
        return Err(crate::Error::TooCoarse {
            what: "CHSH grid steps",
            min: 8,
            got: coarse_steps,
        });
    }
    let tensor = correlation_tensor(state)?;
    let t = tensor.0;
    let d_theta = PI / (coarse_steps - 1) as f64;
    let d_phi = 2.0 * PI / coarse_steps as f64;
    let offset = seeded_rng(seed).random::<f64>() * d_phi;
    let grid: Vec<(f64, f64, Vector3<f64>)> = (0..coarse_steps)
        .flat_map(|i| (0..coarse_steps).map(move |j| (i as f64 * d_theta, j as f64 * d_phi + offset)))
        .map(|(th, ph)| (th, ph, vec3(&BlochVector::from_angles(th, ph))))
        .collect();
    // for fixed b, b' the value is a.(T(b+b')) + a'.(T(b-b')), maximized
    // over a and a' independently
    let best_over = |u: &Vector3<f64>| {
        let mut best = (f64::NEG_INFINITY, 0);
        for (g, (_, _, v)) in grid.iter().enumerate() {
            let val = v.dot(u);
            if val > best.0 {
                best = (val, g);
            }
        }
        best
    };
    let (_, idx) = (0..grid.len())
        .into_par_iter()
        .map(|ib| {
            let mut best = (f64::NEG_INFINITY, [0usize; 4]);
            for ibp in 0..grid.len() {
                let (b, bp) = (&grid[ib].2, &grid[ibp].2);
                let (va, ia) = best_over(&(t * (b + bp)));
                let (vap, iap) = best_over(&(t * (b - bp)));
                if va + vap > best.0 {
                    best = (va + vap, [ia, iap, ib, ibp]);
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, [0usize; 4]),
            |x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x },
        );
    let mut angles = [0.0; 8];
    for (slot, &g) in idx.iter().enumerate() {
        angles[2 * slot] = grid[g].0;
        angles[2 * slot + 1] = grid[g].1;
    }
    let eval = |ang: &[f64; 8]| tensor.chsh(&ChshSetting::from_angles(ang));
    let mut current = eval(&angles);
    let mut width = [d_theta, d_phi];
    for _ in 0..4 * refine_iters {
        for coord in 0..8 {
            let w = width[coord % 2];
            let centre = angles[coord];
            let f = |x: f64| {
                let mut trial = angles;
                trial[coord] = x;
                eval(&trial)
            };
            let x = golden_max(f, centre - w, centre + w);
            let mut trial = angles;
            trial[coord] = x;
            let v = eval(&trial);
            if v > current {
                current = v;
                angles = trial;
            }
        }
        width[0] *= 0.7;
        width[1] *= 0.7;
    }
    Ok(ChshSearch {
        value: current,
        setting: ChshSetting::from_angles(&angles),
    })
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_STEPS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{random_pure_state_with, tensor_product};
    use nalgebra::DMatrix;

    fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        a.kronecker(b)
    }

    /// `<psi|sigma_m (x) sigma_n|psi>` from explicit 4x4 matrices.
    fn oracle_tensor(psi: &PureState) -> Matrix3<f64> {
        let s = pauli_matrices();
        let v = psi.as_vector();
        Matrix3::from_fn(|m, n| (v.adjoint() * kron(&s[m], &s[n]) * v)[(0, 0)].re)
    }

    #[test]
    fn tensor_examples() {
        let phi_plus = &bell_states()[0];
        let t = correlation_tensor(phi_plus).unwrap().0;
        assert!((t - Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0))).amax() < 1e-12);
        let zz = PureState::basis(4, 0).unwrap();
        let t = correlation_tensor(&zz).unwrap().0;
        assert!((t - Matrix3::from_diagonal(&Vector3::new(0.0, 0.0, 1.0))).amax() < 1e-12);
        assert!(correlation_tensor(&PureState::basis(3, 0).unwrap()).is_err());
        let mut rng = seeded_rng(5);
        for _ in 0..50 {
            let psi = random_pure_state_with(4, &mut rng).unwrap();
            let t = correlation_tensor(&psi).unwrap().0;
            assert!((t - oracle_tensor(&psi)).amax() < 1e-12);
            assert!(t.amax() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn standard_setting_values() {
        let s = ChshSetting::standard();
        let v = chsh_value(&bell_states()[0], &s).unwrap();
        assert!((v - 2.0 * SQRT_2).abs() < 1e-12);
        let v = chsh_value(&PureState::basis(4, 0).unwrap(), &s).unwrap();
        assert!((v - SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn horodecki_examples() {
        for b in bell_states() {
            assert!((horodecki_max(&b).unwrap() - 2.0 * SQRT_2).abs() < 1e-12);
        }
        assert!((horodecki_max(&PureState::basis(4, 0).unwrap()).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bell_states_orthonormal() {
        let b = bell_states();
        for i in 0..4 {
            for j in 0..4 {
                let ip = b[i].inner(&b[j]).unwrap().norm();
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn global_phase_invariance() {
        let mut rng = seeded_rng(6);
        let psi = random_pure_state_with(4, &mut rng).unwrap();
        let phase = Complex64::from_polar(1.0, 0.7);
        let rotated = PureState::new(psi.amplitudes().iter().map(|z| z * phase).collect()).unwrap();
        let s = ChshSetting::standard();
        assert!((chsh_value(&psi, &s).unwrap() - chsh_value(&rotated, &s).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn product_states_respect_classical_bound() {
        let mut rng = seeded_rng(7);
        for _ in 0..20 {
            let a = random_pure_state_with(2, &mut rng).unwrap();
            let b = random_pure_state_with(2, &mut rng).unwrap();
            let t = correlation_tensor(&tensor_product(&a, &b)).unwrap();
            for _ in 0..500 {
                let mut ang = [0.0; 8];
                for x in ang.iter_mut() {
                    *x = rng.random::<f64>() * 2.0 * PI;
                }
                assert!(t.chsh(&ChshSetting::from_angles(&ang)) <= 2.0 + 1e-9);
            }
        }
    }

    #[test]
    fn grid_search_approaches_oracle() {
        let res = chsh_grid_max(&bell_states()[0], 8, 5, 1).unwrap();
        assert!(res.value >= 2.82);
        assert!(res.value <= 2.0 * SQRT_2 + 1e-9);
        let res = chsh_grid_max(&PureState::basis(4, 0).unwrap(), 8, 5, 1).unwrap();
        assert!(res.value <= 2.0 + 1e-9);
        let mut rng = seeded_rng(8);
        for _ in 0..5 {
            let psi = random_pure_state_with(4, &mut rng).unwrap();
            let res = chsh_grid_max(&psi, 8, 3, 2).unwrap();
            let h = horodecki_max(&psi).unwrap();
            assert!(res.value <= h + 1e-6);
            assert!((chsh_value(&psi, &res.setting).unwrap() - res.value).abs() < 1e-12);
        }
        assert!(chsh_grid_max(&bell_states()[0], 7, 1, 0).is_err());
    }

    #[test]
    fn grid_search_is_deterministic() {
        let psi = random_pure_state_with(4, &mut seeded_rng(10)).unwrap();
        let a = chsh_grid_max(&psi, 9, 2, 3).unwrap();
        let b = chsh_grid_max(&psi, 9, 2, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn angle_round_trip() {
        let s = ChshSetting::standard();
        let back = ChshSetting::from_angles(&s.angles());
        for (x, y) in [(s.a, back.a), (s.a_prime, back.a_prime), (s.b, back.b), (s.b_prime, back.b_prime)] {
            let (x, y) = (x.components(), y.components());
            assert!((0..3).all(|i| (x[i] - y[i]).abs() < 1e-15));
        }
    }
}
