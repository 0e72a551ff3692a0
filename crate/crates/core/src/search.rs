//! One-dimensional search primitives shared by the fitting and analysis code.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)`; the endpoints are included as candidates.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Golden-section search for a minimum; see [`golden_max`].
pub fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|x| -f(x), a, b, tol);
    (x, -v)
}

/// Bisection on a bracketing interval. `f(a)` and `f(b)` must differ in sign
/// (or one of them be zero). Stops when the bracket is narrower than `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Option<f64> {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if !fm.is_finite() {
            return None;
        }
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// One Newton step using a central finite-difference derivative. The step is
/// accepted only if it stays inside `[lo, hi]` and does not increase `|f|`.
pub fn newton_polish<F: FnMut(f64) -> f64>(mut f: F, x: f64, lo: f64, hi: f64) -> f64 {
    let fx = f(x);
    if fx == 0.0 {
        return x;
    }
    let h = 1e-7 * x.abs().max(1.0);
    let d = (f(x + h) - f(x - h)) / (2.0 * h);
    if d == 0.0 || !d.is_finite() {
        return x;
    }
    let next = x - fx / d;
    if next >= lo && next <= hi {
        let fn_ = f(next);
        if fn_.is_finite() && fn_.abs() <= fx.abs() {
            return next;
        }
    }
    x
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn golden_prefers_endpoint_for_monotone() {
        let (x, _) = golden_max(|x| x, 0.0, 1.0, 1e-9);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-14).is_none());
    }

    #[test]
    fn newton_improves() {
        let x = newton_polish(|x| x * x - 2.0, 1.4142, 1.0, 2.0);
        assert!((x - std::f64::consts::SQRT_2).abs() < 1e-8);
    }

    #[test]
    fn compensated_beats_naive() {
        let n = 59049;
        let w = 1.0 / n as f64;
        let s = compensated_sum(std::iter::repeat(w).take(n));
        assert!((s - 1.0).abs() < 1e-15);
    }
}
