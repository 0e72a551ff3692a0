//! Closed-form approximations of `P(t)`.
//!
//! The general form is `P(t) ~ sqrt(1 - sum_n w_n exp(-k_n^2 t^2 / 2))` with
//! widths `k_n` in `[1, sqrt(2)]` and positive weights summing to one. The
//! single-term case with `k = 1` and `k = sqrt(4/pi)` gives the lower and upper
//! envelopes of `P(t)`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Result};
use crate::geometry::{Scheme, ENDPOINT_TOL};
use crate::oracle::Probability;
use crate::search::{compensated_sum, golden_max};

/// Width of the one-term approximation with the smallest published error.
pub const LEADING_K: f64 = 1.116;

/// Largest single width keeping `sqrt(1 - exp(-k^2 t^2/2))` above `P(t)` everywhere.
pub fn upper_envelope_k() -> f64 {
    (4.0 / PI).sqrt()
}

/// Tolerance on the weight sum.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Width and weight vectors for the sum-of-Gaussians approximation.
///
/// Immutable after construction; squared widths are cached for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    widths: Vec<f64>,
    weights: Vec<f64>,
    half_k_sq: Vec<f64>,
    scheme: Option<Scheme>,
}

impl ParameterSet {
    pub fn new(widths: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if widths.is_empty() {
            return Err(contract("parameter set needs at least one width"));
        }
        if widths.len() != weights.len() {
            return Err(contract(format!(
                "{} widths but {} weights",
                widths.len(),
                weights.len()
            )));
        }
        for (i, &k) in widths.iter().enumerate() {
            if !k.is_finite() || k < 1.0 - ENDPOINT_TOL || k > SQRT_2 + ENDPOINT_TOL {
                return Err(contract(format!("k_{} = {k} outside [1, sqrt(2)]", i + 1)));
            }
            if i > 0 && k <= widths[i - 1] {
                return Err(contract(format!("widths not strictly increasing at k_{}", i + 1)));
            }
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(contract(format!("weight w_{} = {w} must be positive", i + 1)));
            }
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(contract(format!("weights sum to {total}, expected 1")));
        }
        let half_k_sq = widths.iter().map(|k| 0.5 * k * k).collect();
        Ok(ParameterSet { widths, weights, half_k_sq, scheme: None })
    }

    /// Equal weights `1/N`.
    pub fn uniform(widths: Vec<f64>) -> Result<Self> {
        let n = widths.len();
        if n == 0 {
            return Err(contract("parameter set needs at least one width"));
        }
        ParameterSet::new(widths, vec![1.0 / n as f64; n])
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = Some(scheme);
        self
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scheme(&self) -> Option<Scheme> {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.widths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.widths.is_empty()
    }

    /// `1 - sum_n w_n exp(-k_n^2 t^2/2)`, the approximation of `P(t)^2`.
    #[inline]
    pub fn p_sq(&self, t: f64) -> f64 {
        let t2 = t * t;
        let mut s = 0.0;
        for (w, h) in self.weights.iter().zip(&self.half_k_sq) {
            s += w * (-h * t2).exp();
        }
        1.0 - s
    }

    /// Unchecked evaluation for validated `t`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.p_sq(t).max(0.0).sqrt()
    }
}

/// `sqrt(1 - sum_n w_n exp(-k_n^2 t^2 / 2))`.
pub fn p_approx(params: &ParameterSet, t: f64) -> Result<Probability> {
    check_t(t)?;
    Ok(Probability::new_unchecked(params.eval(t)))
}

/// One-term approximation `sqrt(1 - exp(-k^2 t^2/2))` with `k` in `[1, sqrt(2)]`.
pub fn p_leading(k: f64, t: f64) -> Result<Probability> {
    if !k.is_finite() || k < 1.0 || k > SQRT_2 + ENDPOINT_TOL {
        return Err(domain(format!("leading-order width k = {k} outside [1, sqrt(2)]")));
    }
    check_t(t)?;
    Ok(Probability::new_unchecked(leading_raw(k, t)))
}

#[inline]
fn leading_raw(k: f64, t: f64) -> f64 {
    let x = k * t;
    (-(-0.5 * x * x).exp_m1()).max(0.0).sqrt()
}

fn check_t(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(domain(format!("t must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Lower envelope (`k = 1`), upper envelope (`k = sqrt(4/pi)`) and their gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRange {
    pub lower: f64,
    pub upper: f64,
    pub range: f64,
}

pub fn envelope_range(t: f64) -> Result<EnvelopeRange> {
    check_t(t)?;
    let lower = leading_raw(1.0, t);
    let upper = leading_raw(upper_envelope_k(), t);
    Ok(EnvelopeRange { lower, upper, range: upper - lower })
}

/// Location and size of the largest envelope gap on `t >= 0`.
pub fn envelope_argmax() -> (f64, f64) {
    let gap = |t: f64| leading_raw(upper_envelope_k(), t) - leading_raw(1.0, t);
    let step = 1.0 / 512.0;
    let (mut best_t, mut best) = (0.0, f64::NEG_INFINITY);
    for i in 0..=(8 * 512) {
        let t = i as f64 * step;
        let v = gap(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    golden_max(gap, (best_t - step).max(0.0), best_t + step, 1e-12)
}

/// Shenton-type bounds `(P_m, P_M)` in the square-root-free form.
///
/// `P_m = 1 - 4 sqrt(2/pi) exp(-t^2/2) / (3t + sqrt(t^2 + 8))`,
/// `P_M = 1 - (sqrt(t^2 + 4) - t) exp(-t^2/2) / sqrt(2 pi)`.
/// `P_m` is negative near zero; these are bounds, not probabilities.
pub fn shenton_bounds(t: f64) -> Result<(f64, f64)> {
    check_t(t)?;
    let g = (-0.5 * t * t).exp();
    let lower = 1.0 - 4.0 * (2.0 / PI).sqrt() * g / (3.0 * t + (t * t + 8.0).sqrt());
    let upper = 1.0 - ((t * t + 4.0).sqrt() - t) * g / (2.0 * PI).sqrt();
    Ok((lower, upper))
}
