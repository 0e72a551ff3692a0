//! Wall-clock comparison of the approximation against the reference `P(t)`.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx::ParameterSet;
use crate::error::{contract, Result};
use crate::oracle::p_exact_raw;

/// Below this many evaluations the timings are flagged as unstable.
pub const BENCH_MIN_STABLE_EVALS: u64 = 100_000;

const BATCHES: u64 = 21;
const INPUT_LEN: usize = 4096;

/// Distribution of the benchmark inputs `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TDistribution {
    Uniform { lo: f64, hi: f64 },
    Fixed { t: f64 },
}

impl Default for TDistribution {
    fn default() -> Self {
        TDistribution::Uniform { lo: 0.0, hi: 8.0 }
    }
}

impl TDistribution {
    fn sample(&self) -> Result<Vec<f64>> {
        match *self {
            TDistribution::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
                    return Err(contract(format!("bad uniform range [{lo}, {hi}]")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(0);
                Ok((0..INPUT_LEN).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect())
            }
            TDistribution::Fixed { t } => {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(contract(format!("bad fixed t {t}")));
                }
                Ok(vec![t; INPUT_LEN])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub n_terms: usize,
    pub n_evals: u64,
    pub batches: u64,
    /// Median over batches.
    pub ns_per_eval_approx: f64,
    pub ns_per_eval_exact: f64,
    /// Median absolute deviation over batches.
    pub mad_ns_approx: f64,
    pub mad_ns_exact: f64,
    pub speedup: f64,
    pub unstable: bool,
}

fn run_batch<F: Fn(f64) -> f64>(f: &F, inputs: &[f64], len: u64) -> f64 {
    let start = Instant::now();
    let mut acc = 0.0;
    let mask = inputs.len() - 1;
    for i in 0..len as usize {
        acc += f(black_box(inputs[i & mask]));
    }
    black_box(acc);
    start.elapsed().as_nanos() as f64 / len as f64
}

fn median_mad(mut xs: Vec<f64>) -> (f64, f64) {
    xs.sort_by(f64::total_cmp);
    let med = xs[xs.len() / 2];
    let mut dev: Vec<f64> = xs.iter().map(|x| (x - med).abs()).collect();
    dev.sort_by(f64::total_cmp);
    (med, dev[dev.len() / 2])
}

/// Times `n_evals` evaluations of each of the approximation and the reference,
/// split into interleaved batches after one warm-up batch per function.
/// Single-threaded.
pub fn bench(params: &ParameterSet, n_evals: u64, dist: TDistribution) -> Result<BenchReport> {
    if n_evals == 0 {
        return Err(contract("bench needs at least one evaluation"));
    }
    let inputs = dist.sample()?;
    let batches = BATCHES.min(n_evals);
    let per_batch = n_evals / batches;

    let approx = |t: f64| params.eval(t);
    let exact = |t: f64| p_exact_raw(t);
    run_batch(&approx, &inputs, per_batch.min(INPUT_LEN as u64 * 16));
    run_batch(&exact, &inputs, per_batch.min(INPUT_LEN as u64 * 16));

    let mut a = Vec::with_capacity(batches as usize);
    let mut e = Vec::with_capacity(batches as usize);
    for _ in 0..batches {
        a.push(run_batch(&approx, &inputs, per_batch));
        e.push(run_batch(&exact, &inputs, per_batch));
    }
    let (ns_a, mad_a) = median_mad(a);
    let (ns_e, mad_e) = median_mad(e);
    Ok(BenchReport {
        n_terms: params.len(),
        n_evals,
        batches,
        ns_per_eval_approx: ns_a,
        ns_per_eval_exact: ns_e,
        mad_ns_approx: mad_a,
        mad_ns_exact: mad_e,
        speedup: ns_e / ns_a,
        unstable: n_evals < BENCH_MIN_STABLE_EVALS,
    })
}
