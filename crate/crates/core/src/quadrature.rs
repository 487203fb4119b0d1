//! One-dimensional adaptive quadrature and interval location.

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// Subdivides until the local Richardson estimate is below
/// `tol · max(|whole|, tiny)`, down to a fixed recursion depth.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    // seed with a coarse split so narrow features are not missed
    const SEED: usize = 16;
    let h = (b - a) / SEED as f64;
    let mut total = 0.0;
    for k in 0..SEED {
        let (x0, x1) = (a + k as f64 * h, a + (k + 1) as f64 * h);
        let (f0, f1) = (f(x0), f(x1));
        let m = 0.5 * (x0 + x1);
        let fm = f(m);
        let whole = simpson(x0, x1, f0, fm, f1);
        let eps = rel_tol * whole.abs().max(1e-300);
        total += recurse(f, x0, x1, f0, fm, f1, whole, eps / SEED as f64, 48);
    }
    total
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

/// Maximal sub-intervals of `[a, b]` on which `pred` holds, located by a
/// uniform scan of `grid` cells followed by bisection of every sign change.
///
/// Features narrower than one grid cell can be missed.
pub fn intervals_where<P: Fn(f64) -> bool>(pred: &P, a: f64, b: f64, grid: usize) -> Vec<(f64, f64)> {
    let grid = grid.max(1);
    let h = (b - a) / grid as f64;
    let mut out = Vec::new();
    let mut start = if pred(a) { Some(a) } else { None };
    let mut prev_x = a;
    let mut prev = start.is_some();
    for k in 1..=grid {
        let x = if k == grid { b } else { a + k as f64 * h };
        let cur = pred(x);
        if cur != prev {
            let edge = bisect(pred, prev_x, x, prev);
            if cur {
                start = Some(edge);
            } else if let Some(s) = start.take() {
                out.push((s, edge));
            }
        }
        prev = cur;
        prev_x = x;
    }
    if let Some(s) = start {
        out.push((s, b));
    }
    out
}

fn bisect<P: Fn(f64) -> bool>(pred: &P, mut lo: f64, mut hi: f64, lo_val: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) == lo_val {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_gaussian() {
        let v = integrate(&|x: f64| x * x, 0.0, 3.0, 1e-12);
        assert!((v - 9.0).abs() < 1e-12);
        let g = integrate(&|x: f64| (-x * x / 2.0).exp(), -10.0, 10.0, 1e-12);
        assert!((g - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn empty_range_is_zero() {
        assert_eq!(integrate(&|_| 1.0, 2.0, 1.0, 1e-9), 0.0);
    }

    #[test]
    fn locates_intervals() {
        let iv = intervals_where(&|x: f64| x.sin() > 0.5, 0.0, 10.0, 500);
        let pi = std::f64::consts::PI;
        let want = [(pi / 6.0, 5.0 * pi / 6.0), (2.0 * pi + pi / 6.0, 2.0 * pi + 5.0 * pi / 6.0)];
        assert_eq!(iv.len(), 2);
        for ((a, b), (c, d)) in iv.iter().zip(want) {
            assert!((a - c).abs() < 1e-12 && (b - d).abs() < 1e-12);
        }
        let all = intervals_where(&|_| true, 0.0, 1.0, 10);
        assert_eq!(all, vec![(0.0, 1.0)]);
    }
}
