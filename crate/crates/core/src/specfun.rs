//! Generalized Laguerre polynomials and factorial-ratio helpers.
//!
//! These are the special-function ingredients of the Fock-state-dependent
//! Rabi frequencies: every carrier and sideband coupling strength reduces to
//! `L_n^a(x)` evaluated at `x = eta^2` together with a `sqrt(n_<!/n_>!)`
//! normalization factor.

use crate::error::{Error, Result};

/// A validated evaluation point for a generalized Laguerre polynomial
/// `L_n^a(x)` with integer degree `n >= 0`, integer order `a >= 0`, and
/// real argument `x >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaguerreSpec {
    degree: usize,
    order: usize,
    argument: f64,
}

impl LaguerreSpec {
    /// Validate an evaluation point. The argument must be finite and
    /// non-negative (it is `eta^2` everywhere in this crate).
    pub fn new(degree: usize, order: usize, argument: f64) -> Result<Self> {
        Error::check_non_negative("laguerre argument", argument)?;
        Ok(Self { degree, order, argument })
    }

    pub fn degree(&self) -> usize { self.degree }
    pub fn order(&self) -> usize { self.order }
    pub fn argument(&self) -> f64 { self.argument }
}

/// Evaluate `L_n^a(x)` by the upward three-term recurrence
///
/// ```text
/// (n+1) L_{n+1}^a = (2n + 1 + a - x) L_n^a - (n + a) L_{n-1}^a
/// ```
///
/// which is numerically stable for the small degrees and arguments used
/// here, unlike the alternating power series.
pub fn laguerre(spec: LaguerreSpec) -> f64 {
    laguerre_unchecked(spec.degree, spec.order, spec.argument)
}

/// Recurrence core; callers guarantee `x >= 0`.
pub(crate) fn laguerre_unchecked(n: usize, alpha: usize, x: f64) -> f64 {
    let a = alpha as f64;
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0; // L_0
    let mut cur = 1.0 + a - x; // L_1
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - x) * cur - (jf + a) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `sqrt(n_lo! / n_hi!)` as a running product of inverse square roots, so no
/// intermediate factorial is ever formed (safe far beyond the `n = 170`
/// overflow limit of a direct f64 factorial).
pub fn sqrt_factorial_ratio(n_lo: usize, n_hi: usize) -> Result<f64> {
    if n_lo > n_hi {
        return Err(Error::FactorialOrder { n_lo, n_hi });
    }
    let mut acc = 1.0;
    for j in (n_lo + 1)..=n_hi {
        acc /= (j as f64).sqrt();
    }
    Ok(acc)
}
