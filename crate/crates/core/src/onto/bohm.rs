//! Position measurements in one dimension.
//!
//! The ontic variable is the particle position `x`, distributed as
//! `|psi(x)|^2`, and the response to "particle in region R" is the indicator
//! of `R`. The region probability is then the integral of the density over `R`.

use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-6;

/// Samples of a probability density on the uniform grid `x0 + k h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    x0: f64,
    h: f64,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(x0: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) || !x0.is_finite() {
            return Err(Error::InvalidDensity(format!("bad grid x0={x0}, h={h}")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidDensity("need at least two samples".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::InvalidDensity(format!("negative or NaN sample {v}")));
        }
        let density = Self { x0, h, values };
        let total = density.trapezoid(0, density.values.len() - 1);
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDensity(format!("integrates to {total}")));
        }
        Ok(density)
    }

    pub fn x_min(&self) -> f64 {
        self.x0
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.h * (self.values.len() - 1) as f64
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn trapezoid(&self, from: usize, to: usize) -> f64 {
        self.values[from..=to]
            .windows(2)
            .map(|w| 0.5 * self.h * (w[0] + w[1]))
            .sum()
    }

    fn interpolate(&self, x: f64, cell: usize) -> f64 {
        let t = (x - (self.x0 + cell as f64 * self.h)) / self.h;
        self.values[cell] * (1.0 - t) + self.values[cell + 1] * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionProbability {
    pub probability: f64,
    /// The region extends beyond the grid and was clipped to it.
    pub clipped: bool,
}

/// Trapezoid integral of the density over `[a, b]` intersected with the grid.
///
/// Cells cut by the region boundary use the linear interpolant of the density.
pub fn bohm_region_probability(density: &GridDensity, a: f64, b: f64) -> Result<RegionProbability> {
    if !(a <= b) {
        return Err(Error::InvalidRegion(a, b));
    }
    let (xmin, xmax) = (density.x_min(), density.x_max());
    let clipped = a < xmin || b > xmax;
    let lo = a.max(xmin);
    let hi = b.min(xmax);
    if lo >= hi {
        return Ok(RegionProbability { probability: 0.0, clipped });
    }
    let h = density.h;
    let cells = density.values.len() - 1;
    let mut total = 0.0;
    let first = (((lo - xmin) / h).floor() as usize).min(cells - 1);
    let last = (((hi - xmin) / h).ceil() as usize).clamp(first + 1, cells);
    for c in first..last {
        let cl = xmin + c as f64 * h;
        let cr = cl + h;
        let l = lo.max(cl);
        let r = hi.min(cr);
        if r <= l {
            continue;
        }
        if l == cl && r == cr {
            total += 0.5 * h * (density.values[c] + density.values[c + 1]);
        } else {
            total += 0.5 * (r - l) * (density.interpolate(l, c) + density.interpolate(r, c));
        }
    }
    Ok(RegionProbability {
        probability: total,
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(points: usize, half_width: f64) -> GridDensity {
        let h = 2.0 * half_width / (points - 1) as f64;
        let raw: Vec<f64> = (0..points)
            .map(|k| {
                let x = -half_width + k as f64 * h;
                (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
            })
            .collect();
        GridDensity::new(-half_width, h, raw).unwrap()
    }

    #[test]
    fn full_grid_integrates_to_one() {
        let g = gaussian(2001, 8.0);
        let p = bohm_region_probability(&g, g.x_min(), g.x_max()).unwrap();
        assert!((p.probability - 1.0).abs() < 1e-6);
        assert!(!p.clipped);
    }

    #[test]
    fn symmetric_half() {
        let g = gaussian(2001, 8.0);
        let p = bohm_region_probability(&g, 0.0, 8.0).unwrap();
        assert!((p.probability - 0.5).abs() < 1e-6);
    }

    #[test]
    fn one_sigma_interval() {
        // erf(1/sqrt 2) by composite Simpson on [0, 1] with 2000 panels, an
        // independent quadrature of the same integral
        let n = 2000;
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let hs = 1.0 / n as f64;
        let mut s = f(0.0) + f(1.0);
        for k in 1..n {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * hs);
        }
        let oracle = 2.0 * s * hs / 3.0;
        assert!((oracle - 0.682_689_492_137).abs() < 1e-10);
        let g = gaussian(2001, 8.0);
        let p = bohm_region_probability(&g, -1.0, 1.0).unwrap();
        assert!((p.probability - oracle).abs() < 1e-4);
    }

    #[test]
    fn off_grid_boundaries_and_clipping() {
        let g = GridDensity::new(0.0, 0.5, vec![0.5, 1.0, 1.5]).unwrap();
        // linear density 0.5 + x: integral over [0.25, 0.6] is 0.35*0.5 + (0.36-0.0625)/2
        let p = bohm_region_probability(&g, 0.25, 0.6).unwrap();
        assert!((p.probability - 0.32375).abs() < 1e-14);
        let p = bohm_region_probability(&g, -3.0, 0.5).unwrap();
        assert!(p.clipped);
        assert!((p.probability - 0.375).abs() < 1e-14);
        let p = bohm_region_probability(&g, 5.0, 6.0).unwrap();
        assert!(p.clipped && p.probability == 0.0);
        assert!(matches!(bohm_region_probability(&g, 1.0, 0.0), Err(Error::InvalidRegion(..))));
    }

    #[test]
    fn rejects_bad_densities() {
        assert!(GridDensity::new(0.0, 0.5, vec![0.5, 0.5, 0.5]).is_err());
        assert!(GridDensity::new(0.0, 0.5, vec![-0.5, 2.5, 0.5]).is_err());
        assert!(GridDensity::new(0.0, 0.0, vec![1.0, 1.0]).is_err());
    }
}
