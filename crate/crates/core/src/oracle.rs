//! Reference evaluation of the bounded Gauss integral
//!
//! `P(t) = (1/sqrt(2 pi)) * int_{-t}^{t} exp(-x^2/2) dx = erf(t / sqrt(2))`.
//!
//! Two regimes, both self-contained:
//!
//! - `x = t/sqrt(2) < ERF_SERIES_LIMIT`: the positive-term series
//!   `erf(x) = (2/sqrt(pi)) exp(-x^2) sum_n 2^n x^(2n+1) / (2n+1)!!`.
//!   Every term is positive so there is no cancellation.
//! - `x >= ERF_SERIES_LIMIT`: `1 - erfc(x)` with `erfc` from the Laplace
//!   continued fraction, evaluated by the modified Lentz method.
//!
//! The switch point is a fixed constant; the overlap test in this module checks
//! that both regimes agree there to 1e-14.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Regime switch for the argument `x = t/sqrt(2)` (i.e. `t = 2.5 * sqrt(2)`).
pub const ERF_SERIES_LIMIT: f64 = 2.5;

/// `2 / sqrt(pi)`
const TWO_OVER_SQRT_PI: f64 = 1.128_379_167_095_512_6;

const MAX_TERMS: usize = 500;

/// A probability value in `[0, 1]`.
///
/// The mathematical value of `P(t)` is strictly below one, but for `t` beyond
/// roughly 8.3 the nearest double is exactly `1.0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub(crate) fn new_unchecked(value: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&value), "probability out of range: {value}");
        Probability(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Exact bounded Gauss integral `P(t)` for `t >= 0`, absolute error below 1e-14.
pub fn p_exact(t: f64) -> Result<Probability> {
    if !t.is_finite() || t < 0.0 {
        return Err(domain(format!("p_exact requires finite t >= 0, got {t}")));
    }
    Ok(Probability::new_unchecked(erf_nonneg(t * FRAC_1_SQRT_2)))
}

/// `P(t)` without argument checking, for hot loops over validated grids.
#[inline]
pub(crate) fn p_exact_raw(t: f64) -> f64 {
    erf_nonneg(t * FRAC_1_SQRT_2)
}

fn erf_nonneg(x: f64) -> f64 {
    if x < ERF_SERIES_LIMIT {
        erf_series(x)
    } else {
        1.0 - erfc_continued_fraction(x)
    }
}

/// Positive-term series for `erf(x)`, accurate for moderate `x`.
pub(crate) fn erf_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_TERMS {
        term *= 2.0 * x2 / (2 * n + 1) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    TWO_OVER_SQRT_PI * (-x2).exp() * sum
}

/// `erfc(x)` for `x > 0` via
/// `erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`.
pub(crate) fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let prefactor = (-x * x).exp() / PI.sqrt();
    if prefactor == 0.0 {
        return 0.0;
    }
    // b_0 = x, a_n = n/2, b_n = x
    let mut f = x;
    let mut c = f;
    let mut d = 0.0;
    for n in 1..MAX_TERMS {
        let a = n as f64 * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    prefactor / f
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    // mpmath, 40 digits
    const GOLDEN: &[(f64, f64)] = &[
        (0.5, 0.382_924_922_548_026_2),
        (1.0, 0.682_689_492_137_085_9),
        (1.0668, 0.713_937_841_413_302_6),
        (2.0, 0.954_499_736_103_641_6),
        (3.0, 0.997_300_203_936_739_8),
        (5.0, 0.999_999_426_696_856_2),
    ];

    #[test]
    fn golden_values() {
        for &(t, want) in GOLDEN {
            let got = p_exact(t).unwrap().value();
            assert!((got - want).abs() < 1e-15, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn zero_and_infinity() {
        assert_eq!(p_exact(0.0).unwrap().value(), 0.0);
        assert!((p_exact(40.0).unwrap().value() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(p_exact(-1e-3).is_err());
        assert!(p_exact(f64::NAN).is_err());
        assert!(p_exact(f64::INFINITY).is_err());
    }

    #[test]
    fn regimes_agree_at_switch() {
        for x in [ERF_SERIES_LIMIT - 0.05, ERF_SERIES_LIMIT, ERF_SERIES_LIMIT + 0.05] {
            let a = erf_series(x);
            let b = 1.0 - erfc_continued_fraction(x);
            assert!((a - b).abs() < 1e-14, "x={x}: {a} vs {b}");
        }
        // t exactly at the switch, mpmath value
        let t = ERF_SERIES_LIMIT * SQRT_2;
        assert!((p_exact(t).unwrap().value() - 0.999_593_047_982_555_0).abs() < 1e-15);
    }

    #[test]
    fn small_argument_slope() {
        let t = 1e-6;
        let ratio = p_exact(t).unwrap().value() / t;
        let want = (2.0 / PI).sqrt();
        assert!(((ratio - want) / want).abs() < 1e-9);
    }

    #[test]
    fn strictly_increasing_on_grid() {
        // Beyond t ~ 7 consecutive values differ by less than an ulp of 1.
        let mut prev = -1.0;
        for i in 0..=4000 {
            let t = i as f64 * 0.002;
            let v = p_exact(t).unwrap().value();
            if t <= 6.0 {
                assert!(v > prev, "not increasing at t = {t}");
            } else {
                assert!(v >= prev, "decreasing at t = {t}");
            }
            prev = v;
        }
    }
}
