//! Sparse bivariate polynomials of total degree at most three.
//!
//! These hold the perturbation coefficients of the piecewise system. The
//! representation is a canonical sparse exponent map: coefficients that are
//! exactly zero are never stored, so "slot present" is meaningful and the
//! averaging stage can skip integrals whose multiplier is structurally absent.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Total-degree cap for perturbation polynomials.
pub const MAX_TOTAL_DEGREE: u32 = 3;

/// Sparse bivariate polynomial Σ c_{ij} xⁱ yʲ with i + j ≤ 3.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BivarPoly {
    terms: BTreeMap<(u32, u32), f64>,
}

impl BivarPoly {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from `(i, j, coefficient)` triples. Zero coefficients are dropped
    /// (canonical form); degree violations are rejected.
    pub fn from_terms<I: IntoIterator<Item = (u32, u32, f64)>>(terms: I) -> Result<Self> {
        let mut p = Self::new();
        for (i, j, c) in terms {
            p.set_term(i, j, c)?;
        }
        Ok(p)
    }

    /// Set the coefficient of xⁱyʲ, replacing any previous value.
    /// Setting an exact zero removes the term.
    pub fn set_term(&mut self, i: u32, j: u32, coeff: f64) -> Result<()> {
        if i + j > MAX_TOTAL_DEGREE {
            return Err(Error::DegreeExceeded { i, j });
        }
        if coeff == 0.0 {
            self.terms.remove(&(i, j));
        } else {
            self.terms.insert((i, j), coeff);
        }
        Ok(())
    }

    /// Coefficient of xⁱyʲ, zero when absent.
    pub fn coeff(&self, i: u32, j: u32) -> f64 {
        self.terms.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// Stored (nonzero) coefficient, if present. Negative indices are treated
    /// as structurally absent, matching the convention that out-of-range
    /// perturbation slots contribute nothing.
    pub fn slot(&self, i: i64, j: i64) -> Option<f64> {
        if i < 0 || j < 0 {
            return None;
        }
        self.terms.get(&(i as u32, j as u32)).copied()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterate stored terms in lexicographic (i, j) order.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluate at (x, y). The empty polynomial evaluates to 0; a unit
    /// monomial evaluates to exactly xⁱyʲ.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), &c)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }
}

impl std::fmt::Display for BivarPoly {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(fm, "0");
        }
        let mut first = true;
        for (&(i, j), &c) in &self.terms {
            if first {
                write!(fm, "{c}")?;
                first = false;
            } else if c < 0.0 {
                write!(fm, " - {}", -c)?;
            } else {
                write!(fm, " + {c}")?;
            }
            if i > 0 {
                write!(fm, "*x^{i}")?;
            }
            if j > 0 {
                write!(fm, "*y^{j}")?;
            }
        }
        Ok(())
    }
}
