#![allow(dead_code)]

//! Test-only reference routines, independent of the library's own
//! quadrature and special-function code.

use std::f64::consts::PI;

/// Adaptive Simpson with Richardson correction, absolute tolerance `eps`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, eps, 60)
}

#[allow(clippy::too_many_arguments)]
fn step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    // Below a few ulps of the panel value the difference is rounding noise.
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || diff.abs() <= (15.0 * eps).max(floor) {
        return left + right + diff / 15.0;
    }
    step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

/// `P(t)` by direct quadrature of the standard normal density over `[-t, t]`,
/// split into unit panels so each panel is smooth and well scaled.
pub fn p_quadrature(t: f64, eps: f64) -> f64 {
    let rho = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    let panels = t.ceil().max(1.0) as usize;
    let h = t / panels as f64;
    let half: f64 = (0..panels)
        .map(|i| simpson(&rho, i as f64 * h, (i + 1) as f64 * h, eps / panels as f64))
        .sum();
    2.0 * half
}

/// `int_0^{pi/4} sec^{2n}(phi) dphi` by adaptive Simpson.
pub fn sec_power_integral(n: u32, eps: f64) -> f64 {
    let f = |phi: f64| phi.cos().powi(-2 * n as i32);
    simpson(&f, 0.0, PI / 4.0, eps)
}

/// `n` evenly spaced points covering `[a, b]` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}
