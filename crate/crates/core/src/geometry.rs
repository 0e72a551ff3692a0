//! Interval bounds on the width parameters from the rotated-square partition.
//!
//! Each partition step rotates the integration polygon and splits the angular
//! range `[0, pi/4]` uniformly. Width `k_n` (zero-based `n`) is confined to
//! `[1/cos(pi n / 4N), 1/cos(pi (n+1) / 4N)]`, so consecutive intervals share an
//! endpoint and together cover `[1, sqrt(2)]`.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::approx::ParameterSet;
use crate::error::{contract, Result};

/// Endpoint tolerance used when checking a width against its interval.
pub const ENDPOINT_TOL: f64 = 1e-12;

/// Binary (`base = 2`) or ternary (`base = 3`) partition at depth `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SchemeRepr")]
pub struct Scheme {
    base: u32,
    depth: u32,
}

impl Scheme {
    pub fn new(base: u32, depth: u32) -> Result<Self> {
        if base != 2 && base != 3 {
            return Err(contract(format!("scheme base must be 2 or 3, got {base}")));
        }
        let n = base
            .checked_pow(depth)
            .ok_or_else(|| contract(format!("{base}^{depth} overflows the index type")))?;
        if usize::try_from(n).is_err() {
            return Err(contract(format!("{base}^{depth} overflows usize")));
        }
        Ok(Scheme { base, depth })
    }

    pub fn binary(depth: u32) -> Result<Self> {
        Scheme::new(2, depth)
    }

    pub fn ternary(depth: u32) -> Result<Self> {
        Scheme::new(3, depth)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of width parameters, `base^depth`.
    pub fn len(&self) -> usize {
        self.base.pow(self.depth) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Deserialize)]
struct SchemeRepr {
    base: u32,
    depth: u32,
}

impl TryFrom<SchemeRepr> for Scheme {
    type Error = crate::error::Error;

    fn try_from(r: SchemeRepr) -> Result<Self> {
        Scheme::new(r.base, r.depth)
    }
}

/// Closed interval `[lo, hi]` for a single width parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, k: f64) -> bool {
        k >= self.lo - ENDPOINT_TOL && k <= self.hi + ENDPOINT_TOL
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Chained intervals `[k_n^min, k_n^max]` with `k_n^min = k_{n-1}^max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTable {
    intervals: Vec<Interval>,
}

/// `1/cos(pi * i / (4 n))`, pinned to exactly 1 and sqrt(2) at the ends.
fn endpoint(i: usize, n: usize) -> f64 {
    if i == 0 {
        1.0
    } else if i == n {
        SQRT_2
    } else {
        1.0 / (FRAC_PI_4 * i as f64 / n as f64).cos()
    }
}

impl BoundTable {
    /// Builds a table from explicit intervals, checking the chain property.
    pub fn from_intervals(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(contract("bound table must have at least one interval"));
        }
        for (i, iv) in intervals.iter().enumerate() {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo < iv.hi) {
                return Err(contract(format!("interval {} is empty or non-finite", i + 1)));
            }
            if i > 0 && intervals[i - 1].hi != iv.lo {
                return Err(contract(format!("intervals {} and {} do not chain", i, i + 1)));
            }
        }
        Ok(BoundTable { intervals })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// All `N + 1` endpoints in ascending order.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        out.push(self.intervals[0].lo);
        out.extend(self.intervals.iter().map(|iv| iv.hi));
        out
    }

    pub fn lower_corner(&self) -> Vec<f64> {
        self.intervals.iter().map(|iv| iv.lo).collect()
    }

    pub fn upper_corner(&self) -> Vec<f64> {
        self.intervals.iter().map(|iv| iv.hi).collect()
    }
}

/// Bound table for a binary or ternary scheme.
pub fn bounds(scheme: Scheme) -> BoundTable {
    let n = scheme.len();
    let intervals = (0..n)
        .map(|i| Interval { lo: endpoint(i, n), hi: endpoint(i + 1, n) })
        .collect();
    BoundTable { intervals }
}

/// True iff every width lies in its interval (closed, with `ENDPOINT_TOL`).
pub fn validate(params: &ParameterSet, table: &BoundTable) -> Result<bool> {
    validate_widths(params.widths(), table)
}

/// Same check on a raw width vector.
pub fn validate_widths(widths: &[f64], table: &BoundTable) -> Result<bool> {
    if widths.len() != table.len() {
        return Err(contract(format!(
            "parameter count {} does not match bound table length {}",
            widths.len(),
            table.len()
        )));
    }
    Ok(widths.iter().zip(table.intervals()).all(|(&k, iv)| iv.contains(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn binary_depth_one() {
        let t = bounds(Scheme::binary(1).unwrap());
        let c = 1.0 / (PI / 8.0).cos();
        assert_eq!(t.endpoints(), vec![1.0, c, SQRT_2]);
    }

    #[test]
    fn ternary_depth_one() {
        let t = bounds(Scheme::ternary(1).unwrap());
        let want = [1.0, 1.0 / (PI / 12.0).cos(), 1.0 / (PI / 6.0).cos(), 1.0 / (PI / 4.0).cos()];
        for (got, want) in t.endpoints().iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn binary_depth_two_six_decimals() {
        let t = bounds(Scheme::binary(2).unwrap());
        let want = [1.0, 1.019591, 1.082392, 1.202690, 1.414214];
        for (got, want) in t.endpoints().iter().zip(want) {
            assert!((got - want).abs() < 5e-7, "{got} vs {want}");
        }
    }

    #[test]
    fn depth_zero_is_single_interval() {
        let t = bounds(Scheme::binary(0).unwrap());
        assert_eq!(t.endpoints(), vec![1.0, SQRT_2]);
    }

    #[test]
    fn scheme_rejects_bad_base_and_overflow() {
        assert!(Scheme::new(4, 1).is_err());
        assert!(Scheme::new(2, 40).is_err());
        assert!(Scheme::new(3, 30).is_err());
    }

    #[test]
    fn validate_examples() {
        let tern = bounds(Scheme::ternary(1).unwrap());
        assert!(validate_widths(&[1.02335, 1.05674, 1.28633], &tern).unwrap());
        let bin = bounds(Scheme::binary(1).unwrap());
        assert!(validate_widths(&[1.0, SQRT_2], &bin).unwrap());
        assert!(!validate_widths(&[0.99, 1.2], &bin).unwrap());
        assert!(validate_widths(&[1.0], &bin).is_err());
    }

    #[test]
    fn from_intervals_requires_chain() {
        let ok = BoundTable::from_intervals(vec![
            Interval { lo: 1.0, hi: 1.1 },
            Interval { lo: 1.1, hi: 1.2 },
        ]);
        assert!(ok.is_ok());
        let gap = BoundTable::from_intervals(vec![
            Interval { lo: 1.0, hi: 1.1 },
            Interval { lo: 1.15, hi: 1.2 },
        ]);
        assert!(gap.is_err());
    }
}
