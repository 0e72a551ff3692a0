//! Choosing the width parameters.
//!
//! Three routes:
//! - [`fit_nodes`]: force `P_approx(t_i)^2 = P(t_i)^2` at `N` nodes by nested
//!   elimination, one bracketed 1-D root per level.
//! - [`fit_random`]: uniform random draws inside the bound table, keeping the
//!   draw with the smallest grid sup-norm error, optionally followed by local
//!   refinement.
//! - [`upper_boundary_params`]: every width at the top of its interval.
//!
//! Random draws come from ChaCha8 (`rand_chacha`). Draws are grouped into fixed
//! chunks of [`CHUNK`] candidates; chunk `c` uses the substream seeded with
//! `seed + c`. Chunks are evaluated in parallel and merged by (error, widths)
//! so the result does not depend on the number of threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{max_deviation, ErrorReport, ScanGrid};
use crate::approx::ParameterSet;
use crate::error::{contract, Error, Result};
use crate::geometry::{bounds, validate_widths, BoundTable, Interval, Scheme};
use crate::oracle::p_exact_raw;
use crate::search::{bisect, golden_min, newton_polish};

/// Candidates per random substream.
pub const CHUNK: u64 = 256;

/// Bisection stopping width for the node equations.
const NODE_BISECT_TOL: f64 = 1e-13;
/// Sub-intervals scanned for sign changes at each elimination level.
const NODE_SCAN: usize = 64;
/// Residual accepted at every node after solving.
pub const NODE_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Node abscissae for [`fit_nodes`]; ignored by [`fit_random`].
    pub nodes: Option<Vec<f64>>,
    pub grid: ScanGrid,
    /// Number of uniform random draws.
    pub iterations: u64,
    pub seed: u64,
    /// Run local refinement after the random phase.
    pub refine: bool,
    /// Budget of the local random search inside the refinement.
    pub refine_iterations: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            nodes: None,
            grid: ScanGrid::default(),
            iterations: 4096,
            seed: 0,
            refine: true,
            refine_iterations: 20_000,
        }
    }
}

impl FitConfig {
    pub fn check(&self) -> Result<()> {
        self.grid.check()?;
        if self.iterations == 0 {
            return Err(contract("fit_random needs at least one iteration"));
        }
        if let Some(nodes) = &self.nodes {
            check_nodes(nodes)?;
        }
        Ok(())
    }
}

fn check_nodes(nodes: &[f64]) -> Result<()> {
    for (i, &t) in nodes.iter().enumerate() {
        if !(t.is_finite() && t > 0.0) {
            return Err(contract(format!("node t_{} = {t} must be positive", i + 1)));
        }
        if i > 0 && t <= nodes[i - 1] {
            return Err(contract("nodes must be strictly increasing"));
        }
    }
    Ok(())
}

/// Widths at the upper end of every interval, with uniform weights.
pub fn upper_boundary_params(scheme: Scheme) -> Result<ParameterSet> {
    Ok(ParameterSet::uniform(bounds(scheme).upper_corner())?.with_scheme(scheme))
}

/// The three chained intervals of the half-step partition: the lower binary
/// interval is kept, the upper one is split at `1/cos(3 pi/16)`.
pub fn half_step_table() -> BoundTable {
    use std::f64::consts::{PI, SQRT_2};
    let a = 1.0 / (2.0 * PI / 16.0).cos();
    let b = 1.0 / (3.0 * PI / 16.0).cos();
    BoundTable::from_intervals(vec![
        Interval { lo: 1.0, hi: a },
        Interval { lo: a, hi: b },
        Interval { lo: b, hi: SQRT_2 },
    ])
    .expect("half-step intervals chain")
}

/// Weights `(1/2, 1/4, 1/4)` matching [`half_step_table`].
pub const HALF_STEP_WEIGHTS: [f64; 3] = [0.5, 0.25, 0.25];

fn check_weights(table: &BoundTable, weights: &[f64]) -> Result<()> {
    if weights.len() != table.len() {
        return Err(contract(format!(
            "{} weights for a table of {} intervals",
            weights.len(),
            table.len()
        )));
    }
    // Interval midpoints satisfy the width invariants, so this checks the weights.
    let probe = table.intervals().iter().map(|iv| 0.5 * (iv.lo + iv.hi)).collect();
    ParameterSet::new(probe, weights.to_vec()).map(|_| ())
}

// ---------------------------------------------------------------------------
// Node equations

struct NodeSystem<'a> {
    table: &'a BoundTable,
    weights: &'a [f64],
    nodes: &'a [f64],
    target: Vec<f64>,
}

impl NodeSystem<'_> {
    /// `Q(t_i) = P_approx^2(t_i) - P^2(t_i)`.
    fn residual(&self, i: usize, k: &[f64]) -> f64 {
        let t2 = self.nodes[i] * self.nodes[i];
        let s: f64 = k
            .iter()
            .zip(self.weights)
            .map(|(k, w)| w * (-0.5 * k * k * t2).exp())
            .sum();
        (1.0 - s) - self.target[i]
    }

    /// Solves equations `0..=level` for `k[0..=level]` with `k[level+1..]` fixed.
    /// Roots are sought inside each width's own interval only.
    fn solve_level(&self, level: usize, k: &mut [f64]) -> bool {
        let iv = self.table.intervals()[level];
        let mut trial = k.to_vec();
        let mut g = |x: f64| -> f64 {
            trial[level] = x;
            if level > 0 && !self.solve_level(level - 1, &mut trial) {
                return f64::NAN;
            }
            self.residual(level, &trial)
        };

        let root = if level == 0 {
            // Q is monotone in a single width: one bracket is enough.
            bisect(&mut g, iv.lo, iv.hi, NODE_BISECT_TOL)
        } else {
            let xs: Vec<f64> = (0..=NODE_SCAN)
                .map(|j| iv.lo + iv.width() * j as f64 / NODE_SCAN as f64)
                .collect();
            let vals: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
            (0..NODE_SCAN).find_map(|j| {
                let (a, b) = (vals[j], vals[j + 1]);
                if a.is_finite() && b.is_finite() && (a == 0.0 || a.signum() != b.signum()) {
                    bisect(&mut g, xs[j], xs[j + 1], NODE_BISECT_TOL)
                } else {
                    None
                }
            })
        };
        let Some(root) = root else {
            return false;
        };
        let root = newton_polish(&mut g, root, iv.lo, iv.hi);
        k[level] = root;
        if level > 0 && !self.solve_level(level - 1, k) {
            return false;
        }
        true
    }

    fn corner_signs(&self) -> String {
        let sign = |v: f64| if v > 0.0 { '+' } else if v < 0.0 { '-' } else { '0' };
        let lo = self.table.lower_corner();
        let hi = self.table.upper_corner();
        let fmt = |k: &[f64]| -> String {
            (0..self.nodes.len()).map(|i| sign(self.residual(i, k))).collect()
        };
        format!("lower corner [{}], upper corner [{}]", fmt(&lo), fmt(&hi))
    }
}

/// Solves `Q(t_i) = 0` at every node for widths inside `table`.
///
/// The equation at the smallest node fixes `k_1` given the other widths, the
/// next node fixes `k_2` given the rest, and so on; the outermost width is
/// located by scanning its interval for a sign change and bisecting. Branches
/// leaving the admissible box (in particular any `k_n < 1`) are discarded.
pub fn fit_nodes(table: &BoundTable, weights: &[f64], nodes: &[f64]) -> Result<ParameterSet> {
    let n = table.len();
    if nodes.len() != n {
        return Err(contract(format!("{} nodes for {n} free widths", nodes.len())));
    }
    check_nodes(nodes)?;
    check_weights(table, weights)?;
    let sys = NodeSystem {
        table,
        weights,
        nodes,
        target: nodes.iter().map(|&t| p_exact_raw(t).powi(2)).collect(),
    };
    let mut k = table.upper_corner();
    let no_solution = |reason: &str| Error::NoSolution {
        reason: reason.to_string(),
        corner_signs: sys.corner_signs(),
    };
    if !sys.solve_level(n - 1, &mut k) {
        return Err(no_solution("no sign change of the node residuals inside the bound table"));
    }
    if !validate_widths(&k, table)? || k.iter().any(|&x| x < 1.0) {
        return Err(no_solution("root left the admissible box"));
    }
    if let Some(i) = (0..n).find(|&i| sys.residual(i, &k).abs() > NODE_RESIDUAL_TOL) {
        return Err(no_solution(&format!("residual at node {} above tolerance", i + 1)));
    }
    ParameterSet::new(k, weights.to_vec())
}

// ---------------------------------------------------------------------------
// Random search

/// Grid sup-norm objective with the reference values precomputed.
struct GridObjective {
    t2: Vec<f64>,
    exact: Vec<f64>,
    /// Coarse subset first, so poor candidates are rejected early.
    order: Vec<usize>,
}

impl GridObjective {
    fn new(grid: &ScanGrid) -> Self {
        let ts = grid.points();
        let n = ts.len();
        let mut order: Vec<usize> = (0..n).step_by(16).collect();
        order.extend((0..n).filter(|i| i % 16 != 0));
        GridObjective {
            t2: ts.iter().map(|t| t * t).collect(),
            exact: ts.iter().map(|&t| p_exact_raw(t)).collect(),
            order,
        }
    }

    /// Sup of `|P_approx - P|`, or `None` once it exceeds `cutoff`.
    fn sup(&self, half_k_sq: &[f64], weights: &[f64], cutoff: f64) -> Option<f64> {
        let mut worst = 0.0f64;
        for &i in &self.order {
            let t2 = self.t2[i];
            let mut s = 0.0;
            for (w, h) in weights.iter().zip(half_k_sq) {
                s += w * (-h * t2).exp();
            }
            let d = ((1.0 - s).max(0.0).sqrt() - self.exact[i]).abs();
            if d > worst {
                worst = d;
                if worst > cutoff {
                    return None;
                }
            }
        }
        Some(worst)
    }

    fn eval(&self, k: &[f64], weights: &[f64], cutoff: f64) -> Option<f64> {
        let h: Vec<f64> = k.iter().map(|k| 0.5 * k * k).collect();
        self.sup(&h, weights, cutoff)
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    err: f64,
    k: Vec<f64>,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        self.err < other.err
            || (self.err == other.err
                && self.k.partial_cmp(&other.k) == Some(std::cmp::Ordering::Less))
    }
}

fn pick(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.better_than(&a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

fn strictly_increasing(k: &[f64]) -> bool {
    k.windows(2).all(|w| w[0] < w[1])
}

fn draw(rng: &mut ChaCha8Rng, table: &BoundTable, out: &mut [f64]) {
    for (k, iv) in out.iter_mut().zip(table.intervals()) {
        *k = iv.lo + iv.width() * rng.gen::<f64>();
    }
}

fn run_chunk(
    obj: &GridObjective,
    table: &BoundTable,
    weights: &[f64],
    seed: u64,
    chunk: u64,
    count: u64,
) -> Option<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(chunk));
    let mut k = vec![0.0; table.len()];
    let mut best: Option<Candidate> = None;
    for _ in 0..count {
        draw(&mut rng, table, &mut k);
        let cutoff = best.as_ref().map_or(f64::INFINITY, |b| b.err);
        if let Some(err) = obj.eval(&k, weights, cutoff) {
            let cand = Candidate { err, k: k.clone() };
            best = pick(best, Some(cand));
        }
    }
    best
}

/// One pass of golden-section minimisation along each coordinate.
fn coordinate_sweep(obj: &GridObjective, table: &BoundTable, weights: &[f64], best: &mut Candidate) {
    for n in 0..best.k.len() {
        let iv = table.intervals()[n];
        let mut trial = best.k.clone();
        let f = |x: f64| {
            let mut k = trial.clone();
            k[n] = x;
            if !strictly_increasing(&k) {
                return f64::INFINITY;
            }
            obj.eval(&k, weights, f64::INFINITY).unwrap_or(f64::INFINITY)
        };
        let (x, v) = golden_min(f, iv.lo, iv.hi, 1e-12);
        trial[n] = x;
        let cand = Candidate { err: v, k: trial };
        if cand.better_than(best) && strictly_increasing(&cand.k) {
            *best = cand;
        }
    }
}

/// Shrinking-box random search around the incumbent. The box grows after a
/// success and shrinks after a run of failures.
fn local_search(
    obj: &GridObjective,
    table: &BoundTable,
    weights: &[f64],
    seed: u64,
    budget: u64,
    best: &mut Candidate,
) {
    const GROW: f64 = 1.2;
    const SHRINK: f64 = 0.7;
    const PATIENCE: u32 = 200;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let widths: Vec<f64> = table.intervals().iter().map(|iv| iv.width()).collect();
    let mut radius: Vec<f64> = widths.iter().map(|w| 0.25 * w).collect();
    let mut fails = 0u32;
    let mut k = best.k.clone();
    for _ in 0..budget {
        if radius.iter().all(|&r| r < 1e-13) {
            break;
        }
        for (n, iv) in table.intervals().iter().enumerate() {
            let step = radius[n] * (2.0 * rng.gen::<f64>() - 1.0);
            k[n] = (best.k[n] + step).clamp(iv.lo, iv.hi);
        }
        let accepted = strictly_increasing(&k)
            && match obj.eval(&k, weights, best.err) {
                Some(err) if err < best.err => {
                    *best = Candidate { err, k: k.clone() };
                    true
                }
                _ => false,
            };
        if accepted {
            fails = 0;
            for (r, w) in radius.iter_mut().zip(&widths) {
                *r = (*r * GROW).min(*w);
            }
        } else {
            fails += 1;
            if fails >= PATIENCE {
                fails = 0;
                radius.iter_mut().for_each(|r| *r *= SHRINK);
            }
        }
    }
}

/// Uniform random search within `table`, keeping the draw with the smallest
/// grid sup-norm error; with `config.refine`, followed by coordinate
/// golden-section sweeps, a shrinking-box local search, and a final sweep.
///
/// Deterministic for a given seed, independent of the rayon thread count.
pub fn fit_random(
    table: &BoundTable,
    weights: &[f64],
    config: &FitConfig,
) -> Result<(ParameterSet, ErrorReport)> {
    config.check()?;
    check_weights(table, weights)?;
    let obj = GridObjective::new(&config.grid);
    let chunks = config.iterations.div_ceil(CHUNK);
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(config.iterations - c * CHUNK);
            run_chunk(&obj, table, weights, config.seed, c, count)
        })
        .reduce(|| None, pick);
    let mut best = best.ok_or_else(|| contract("random search produced no candidate"))?;

    if config.refine {
        coordinate_sweep(&obj, table, weights, &mut best);
        local_search(&obj, table, weights, config.seed, config.refine_iterations, &mut best);
        coordinate_sweep(&obj, table, weights, &mut best);
    }

    let params = ParameterSet::new(best.k, weights.to_vec())?;
    let report = max_deviation(&params, &config.grid)?;
    Ok((params, report))
}
