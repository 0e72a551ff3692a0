//! The `N -> infinity` limit of the uniform sum:
//!
//! `P(t)^2 = 1 - (4/pi) int_0^{pi/4} exp(-t^2 / (2 cos^2 phi)) dphi`
//!
//! and its power series in `t^2/2` with coefficients
//! `c_n = int_0^{pi/4} sec^{2n} phi dphi = sum_{k<n} C(n-1, k) / (2k + 1)`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quad::integrate;
use crate::search::compensated_sum;

/// Largest `n` for which `c_n` is summed in exact rational arithmetic.
pub const EXACT_COEFF_MAX: u32 = 20;

const QUAD_TOL: f64 = 1e-13;

/// `c_n` for `n >= 1`.
pub fn c_coeff(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(domain("c_n is defined for n >= 1"));
    }
    if n <= EXACT_COEFF_MAX {
        Ok(c_coeff_exact(n))
    } else {
        Ok(c_coeff_compensated(n))
    }
}

fn c_coeff_exact(n: u32) -> f64 {
    let m = (n - 1) as i128;
    let mut binom: i128 = 1;
    let mut sum = Ratio::<i128>::from_integer(0);
    for k in 0..=m {
        sum += Ratio::new(binom, 2 * k + 1);
        binom = binom * (m - k) / (k + 1);
    }
    *sum.numer() as f64 / *sum.denom() as f64
}

fn c_coeff_compensated(n: u32) -> f64 {
    let m = (n - 1) as usize;
    let mut binom = 1.0f64;
    let terms = (0..=m).map(|k| {
        let term = binom / (2 * k + 1) as f64;
        binom = binom * (m - k) as f64 / (k + 1) as f64;
        term
    });
    compensated_sum(terms)
}

/// `c_1 ... c_n`.
pub fn coefficients(n_max: u32) -> Result<Vec<f64>> {
    (1..=n_max).map(c_coeff).collect()
}

/// `P(t)^2` from adaptive quadrature of the angular integral.
pub fn p_sq_continuum(t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(domain(format!("t must be finite and >= 0, got {t}")));
    }
    let half_t2 = 0.5 * t * t;
    let r = integrate(
        |phi: f64| {
            let c = phi.cos();
            (-half_t2 / (c * c)).exp()
        },
        0.0,
        FRAC_PI_4,
        QUAD_TOL,
    );
    Ok(1.0 - 4.0 / PI * r.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    /// `t^{2N} / (N! N)`
    pub bound: f64,
    /// False when the bound exceeds 1, i.e. the truncation says nothing.
    pub informative: bool,
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Log-magnitude of the `n`-th series term `(4/pi) (t^2/2)^n c_n / n!`.
fn ln_term(ln_half_t2: f64, n: u32, c: f64) -> f64 {
    (4.0 / PI).ln() + n as f64 * ln_half_t2 - ln_factorial(n) + c.ln()
}

/// `(4/pi) sum_{n=1}^N (-1)^{n-1} (t^2/2)^n c_n / n!`, with terms formed in the
/// log domain, and the truncation bound `t^{2N}/(N! N)`.
pub fn p_sq_series(t: f64, n_terms: u32) -> Result<SeriesValue> {
    if !t.is_finite() || t < 0.0 {
        return Err(domain(format!("t must be finite and >= 0, got {t}")));
    }
    if n_terms < 1 {
        return Err(domain("series needs at least one term"));
    }
    let bound = series_bound(t, n_terms);
    if t == 0.0 {
        return Ok(SeriesValue { value: 0.0, bound, informative: true });
    }
    let ln_half_t2 = (0.5 * t * t).ln();
    let terms = (1..=n_terms).map(|n| {
        let c = c_coeff(n).expect("n >= 1");
        let mag = ln_term(ln_half_t2, n, c).exp();
        if n % 2 == 1 {
            mag
        } else {
            -mag
        }
    });
    let value = compensated_sum(terms);
    Ok(SeriesValue { value, bound, informative: bound <= 1.0 })
}

/// `t^{2N} / (N! N)`
pub fn series_bound(t: f64, n_terms: u32) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let n = n_terms as f64;
    (2.0 * n * t.ln() - ln_factorial(n_terms) - n.ln()).exp()
}

/// Signed tail `(4/pi) sum_{n>N} (-1)^{n-1} (t^2/2)^n c_n / n!`, i.e. the exact
/// truncation error `P^2 - series_N`, summed until the terms are negligible.
pub fn series_tail(t: f64, n_terms: u32) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(domain(format!("t must be finite and >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let ln_half_t2 = (0.5 * t * t).ln();
    let mut terms = Vec::new();
    let mut n = n_terms + 1;
    loop {
        let mag = ln_term(ln_half_t2, n, c_coeff(n)?).exp();
        terms.push(if n % 2 == 1 { mag } else { -mag });
        let first = terms[0].abs();
        if n > n_terms + 4 && (mag < first * 1e-18 || mag == 0.0) {
            break;
        }
        if n > n_terms + 2000 {
            return Err(domain(format!("series tail does not converge at t = {t}")));
        }
        n += 1;
    }
    Ok(compensated_sum(terms))
}
