use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex number in a document: `[re, im]` or a bare real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Amplitude> for Complex64 {
    fn from(a: Amplitude) -> Self {
        match a {
            Amplitude::Real(re) => Complex64::new(re, 0.0),
            Amplitude::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for Amplitude {
    fn from(z: Complex64) -> Self {
        Amplitude::Pair([z.re, z.im])
    }
}

pub fn to_complex(values: &[Amplitude]) -> Vec<Complex64> {
    values.iter().map(|&a| a.into()).collect()
}

pub fn to_amplitudes(values: &[Complex64]) -> Vec<Amplitude> {
    values.iter().map(|&z| z.into()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        let v: Vec<Amplitude> = serde_json::from_str("[1, 0.5, [0.25, -2]]").unwrap();
        let z = to_complex(&v);
        assert_eq!(z, vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(0.25, -2.0)]);
        assert_eq!(serde_json::to_string(&to_amplitudes(&z[2..])).unwrap(), "[[0.25,-2.0]]");
    }
}
