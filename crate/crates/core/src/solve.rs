//! Bracketing root finders used across the crate.
//!
//! Everything here assumes a continuous function and an enclosing sign
//! change; robustness is preferred over iteration counts (band edges can sit
//! next to near-vertical discriminant walls, and secular functions oscillate
//! thousands of times across a band).

use crate::CoreError;

/// Bisection to an absolute x-tolerance. Requires f(a) and f(b) to have
/// opposite signs (zero counts as either).
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64, CoreError> {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    if flo == 0.0 {
        return Ok(lo);
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(CoreError::NoBracket { lo: a, hi: b });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid == lo || mid == hi {
            break;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection followed by a few secant steps for the last digits. The secant
/// iterate is accepted only while it stays inside the current bracket, so the
/// result is never worse than plain bisection.
pub fn bisect_refined<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
) -> Result<f64, CoreError> {
    // Bisect down to a coarse interval first (cheap, safe), then polish.
    let mid = bisect(&mut f, a, b, xtol.max(1e-15))?;
    let h = xtol.max(1e-15) * 4.0;
    let (mut x0, mut x1) = (mid - h, mid + h);
    let (mut f0, mut f1) = (f(x0), f(x1));
    for _ in 0..8 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !x2.is_finite() || x2 < a || x2 > b {
            break;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f(x1);
        if (x1 - x0).abs() <= 0.25 * xtol {
            break;
        }
    }
    // Guard against a diverged polish: fall back to the bisection value.
    if (x1 - mid).abs() > 16.0 * h {
        Ok(mid)
    } else {
        Ok(x1)
    }
}

/// Scan `grid` (ascending) and return all consecutive pairs enclosing a sign
/// change of `f`. Exact zeros are attached to the interval on their left.
pub fn sign_change_brackets<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if grid.len() < 2 {
        return out;
    }
    let mut prev_x = grid[0];
    let mut prev_f = f(prev_x);
    for &x in &grid[1..] {
        let fx = f(x);
        if prev_f == 0.0 || prev_f.signum() != fx.signum() {
            out.push((prev_x, x));
        }
        prev_x = x;
        prev_f = fx;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-13).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn refined_is_at_least_as_good() {
        let r = bisect_refined(|x| x.cos() - x, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.cos() - r).abs() < 1e-14);
    }

    #[test]
    fn no_bracket_is_reported() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(CoreError::NoBracket { .. })
        ));
    }

    #[test]
    fn brackets_found_on_grid() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let br = sign_change_brackets(|x| (x - 2.05) * (x - 7.33), &grid);
        assert_eq!(br.len(), 2);
        assert!(br[0].0 <= 2.05 && 2.05 <= br[0].1);
        assert!(br[1].0 <= 7.33 && 7.33 <= br[1].1);
    }
}
