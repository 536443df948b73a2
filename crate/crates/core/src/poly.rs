//! Homogeneous polynomials in a few real variables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A homogeneous polynomial stored as exponent vectors mapped to coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialND {
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl PolynomialND {
    /// Builds a polynomial, rejecting exponent vectors of the wrong length or degree.
    pub fn homogeneous(nvars: usize, degree: u32, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(Error::InvalidParameter(format!("exponent vector {exps:?} for {nvars} variables")));
            }
            if exps.iter().sum::<u32>() != degree {
                return Err(Error::InvalidParameter(format!("monomial {exps:?} is not of degree {degree}")));
            }
            if !c.is_finite() {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
            *map.entry(exps).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        Ok(PolynomialND { nvars, degree, terms: map })
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::homogeneous(nvars, 0, [(vec![0; nvars], c)]).expect("constant is homogeneous")
    }

    /// `c * x_var^degree`.
    pub fn power(nvars: usize, var: usize, degree: u32, c: f64) -> Self {
        let mut e = vec![0; nvars];
        e[var] = degree;
        Self::homogeneous(nvars, degree, [(e, c)]).expect("power is homogeneous")
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// The Laplacian, of degree `degree - 2` (zero when the degree is below 2).
    pub fn laplacian(&self) -> Self {
        let degree = self.degree.saturating_sub(2);
        let mut out: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (e, c) in &self.terms {
            for v in 0..self.nvars {
                if e[v] >= 2 {
                    let mut f = e.clone();
                    f[v] -= 2;
                    *out.entry(f).or_insert(0.0) += c * (e[v] * (e[v] - 1)) as f64;
                }
            }
        }
        out.retain(|_, c| *c != 0.0);
        PolynomialND { nvars: self.nvars, degree, terms: out }
    }

    /// Whether every Laplacian coefficient is below `tol` in magnitude.
    pub fn is_harmonic(&self, tol: f64) -> bool {
        self.laplacian().terms.values().all(|c| c.abs() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_of_quadratic() {
        let p = PolynomialND::homogeneous(2, 2, [(vec![2, 0], 1.0), (vec![0, 2], -1.0), (vec![1, 1], 3.0)]).unwrap();
        assert!(p.is_harmonic(0.0));
        let q = PolynomialND::power(2, 0, 4, 1.0);
        let l = q.laplacian();
        assert_eq!(l.eval(&[2.0, 5.0]), 12.0 * 4.0);
        assert!(l.laplacian().eval(&[0.0, 0.0]) == 24.0);
        assert!(l.laplacian().laplacian().is_zero());
    }

    #[test]
    fn rejects_inhomogeneous() {
        assert!(PolynomialND::homogeneous(2, 2, [(vec![1, 0], 1.0)]).is_err());
        assert!(PolynomialND::homogeneous(2, 1, [(vec![1], 1.0)]).is_err());
    }
}
