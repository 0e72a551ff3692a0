//! Error measurement and convergence analysis.

mod bench;

pub use bench::{bench, BenchReport, TDistribution, BENCH_MIN_STABLE_EVALS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::ParameterSet;
use crate::error::{contract, domain, Result};
use crate::fit::upper_boundary_params;
use crate::geometry::{bounds, Scheme};
use crate::oracle::p_exact_raw;
use crate::search::golden_max;

/// Reference abscissa where the envelope gap peaks.
pub const T0: f64 = 1.0668;

/// `sqrt(2^2 3^3 / 5^5)`, the maximum of `H(t) sqrt(1 - exp(-t^2/2))`.
pub fn bound_constant() -> f64 {
    (108.0f64 / 3125.0).sqrt()
}

/// Uniform grid `t_min, t_min + step, ..., t_max` (inclusive when it lands on a step).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid { t_min: 0.0, t_max: 8.0, step: 1.0 / 512.0 }
    }
}

impl ScanGrid {
    pub fn new(t_min: f64, t_max: f64, step: f64) -> Result<Self> {
        let g = ScanGrid { t_min, t_max, step };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        let ScanGrid { t_min, t_max, step } = *self;
        if !(t_min.is_finite() && t_max.is_finite() && step.is_finite()) {
            return Err(contract("scan grid must be finite"));
        }
        if t_min < 0.0 {
            return Err(domain(format!("scan grid starts below zero: {t_min}")));
        }
        if !(step > 0.0) || t_max < t_min {
            return Err(contract(format!("empty scan grid [{t_min}, {t_max}] step {step}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.t_max - self.t_min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.t_min + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// Sup-norm deviation of an approximation from `P(t)` over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub max_abs_dev: f64,
    pub argmax_t: f64,
    pub grid_max_abs_dev: f64,
    pub grid_argmax_t: f64,
    pub grid: ScanGrid,
    pub refined: bool,
}

/// Signed `P_approx(t) - P(t)`.
pub fn deviation_at(params: &ParameterSet, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(domain(format!("t must be finite and >= 0, got {t}")));
    }
    Ok(params.eval(t) - p_exact_raw(t))
}

/// Largest of two `(value, t)` pairs, ties going to the smaller `t`.
fn max_pair(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    if a.0 > b.0 || (a.0 == b.0 && a.1 <= b.1) {
        a
    } else {
        b
    }
}

/// Maximum of `f` over the grid points, computed in parallel; the reduction is
/// order-independent so the result does not depend on the thread count.
pub(crate) fn grid_max<F>(grid: &ScanGrid, f: F) -> (f64, f64)
where
    F: Fn(f64) -> f64 + Sync,
{
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let t = grid.point(i);
            (f(t), t)
        })
        .reduce(|| (f64::NEG_INFINITY, f64::INFINITY), max_pair)
}

/// Grid sup of `|P_approx - P|`, then golden-section refinement within one
/// step of the grid argmax.
pub fn max_deviation(params: &ParameterSet, grid: &ScanGrid) -> Result<ErrorReport> {
    grid.check()?;
    let dev = |t: f64| (params.eval(t) - p_exact_raw(t)).abs();
    let (grid_max_abs_dev, grid_argmax_t) = grid_max(grid, dev);
    let lo = (grid_argmax_t - grid.step).max(grid.t_min);
    let hi = (grid_argmax_t + grid.step).min(grid.t_max);
    let (mut argmax_t, mut max_abs_dev) = (grid_argmax_t, grid_max_abs_dev);
    if hi > lo {
        let (t, v) = golden_max(dev, lo, hi, 1e-12);
        if v > max_abs_dev {
            argmax_t = t;
            max_abs_dev = v;
        }
    }
    Ok(ErrorReport {
        max_abs_dev,
        argmax_t,
        grid_max_abs_dev,
        grid_argmax_t,
        grid: *grid,
        refined: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub p: u32,
    pub n: usize,
    pub deviation: f64,
    pub abs_deviation: f64,
}

/// `|Delta(t0)|` of the upper-boundary parameter set for each depth.
pub fn convergence_table(
    base: u32,
    depths: std::ops::RangeInclusive<u32>,
    t0: f64,
) -> Result<Vec<ConvergenceRow>> {
    if !t0.is_finite() || t0 < 0.0 {
        return Err(domain(format!("t0 must be finite and >= 0, got {t0}")));
    }
    let schemes = depths
        .map(|p| Scheme::new(base, p))
        .collect::<Result<Vec<_>>>()?;
    schemes
        .into_par_iter()
        .map(|s| {
            let params = upper_boundary_params(s)?;
            let deviation = deviation_at(&params, t0)?;
            Ok(ConvergenceRow {
                p: s.depth(),
                n: s.len(),
                deviation,
                abs_deviation: deviation.abs(),
            })
        })
        .collect()
}

/// `H(t) = exp(-t^2/2) - exp(-t^2)`.
pub fn h_fn(t: f64) -> f64 {
    (-0.5 * t * t).exp() - (-t * t).exp()
}

/// `(1/N) sum_n (exp(-(k_n^min)^2 t^2/2) - exp(-(k_n^max)^2 t^2/2))`, term by term.
/// Telescopes to `H(t)/N`.
pub fn telescoped_range(scheme: Scheme, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(domain(format!("t must be finite and >= 0, got {t}")));
    }
    let table = bounds(scheme);
    let t2 = 0.5 * t * t;
    let sum: f64 = table
        .intervals()
        .iter()
        .map(|iv| (-iv.lo * iv.lo * t2).exp() - (-iv.hi * iv.hi * t2).exp())
        .sum();
    Ok(sum / table.len() as f64)
}

/// Numerical maximum of `H(t) sqrt(1 - exp(-t^2/2))` on `[0, 10]`.
pub fn bound_constant_check() -> (f64, f64) {
    let g = |t: f64| h_fn(t) * (-(-0.5 * t * t).exp_m1()).sqrt();
    let grid = ScanGrid { t_min: 0.0, t_max: 10.0, step: 1.0 / 256.0 };
    let (_, t) = grid_max(&grid, g);
    golden_max(g, (t - grid.step).max(0.0), (t + grid.step).min(10.0), 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_len() {
        assert_eq!(ScanGrid::default().len(), 4097);
        assert_eq!(ScanGrid::new(0.0, 1.0, 0.3).unwrap().len(), 4);
        assert_eq!(ScanGrid::new(2.0, 2.0, 0.1).unwrap().len(), 1);
        assert!(ScanGrid::new(1.0, 0.5, 0.1).is_err());
        assert!(ScanGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(ScanGrid::new(-1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn deviation_zero_at_origin() {
        let p = ParameterSet::uniform(vec![1.01, 1.23345]).unwrap();
        assert_eq!(deviation_at(&p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn single_term_sup_norm() {
        let p = ParameterSet::uniform(vec![1.116]).unwrap();
        let r = max_deviation(&p, &ScanGrid::default()).unwrap();
        // mpmath bounded search: 0.0033531937823 at t = 0.6065662
        assert!((r.max_abs_dev - 0.003_353_193_782_3).abs() < 1e-12);
        assert!((r.argmax_t - 0.606_566).abs() < 1e-5);
        assert!(r.max_abs_dev >= r.grid_max_abs_dev);
    }

    #[test]
    fn depth_zero_boundary_deviation() {
        let rows = convergence_table(2, 0..=0, T0).unwrap();
        // single term k = sqrt(2); mpmath 0.11041684247071641
        assert!((rows[0].abs_deviation - 0.110_416_842_470_716_4).abs() < 1e-14);
    }

    #[test]
    fn telescoping_examples() {
        let s = Scheme::binary(3).unwrap();
        let want = ((-0.5f64).exp() - (-1.0f64).exp()) / 8.0;
        assert!((telescoped_range(s, 1.0).unwrap() - want).abs() < 1e-15);
        let s = Scheme::ternary(2).unwrap();
        assert!((telescoped_range(s, 2.0).unwrap() - 0.013_002_182_705_319_835).abs() < 1e-15);
        assert_eq!(telescoped_range(s, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn bound_constant_attained() {
        let (t, v) = bound_constant_check();
        assert!((t - 1.353_728_726).abs() < 1e-5);
        assert!(v <= bound_constant() + 1e-9);
        assert!((v - bound_constant()).abs() < 1e-12);
        assert_eq!(h_fn(0.0), 0.0);
    }
}
