//! Bracketed scalar root finding.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Root of `f` in `[lo, hi]`, given a sign change. Each step takes a secant
/// (false-position) candidate when it lands well inside the bracket and
/// shrinks it fast enough, and a bisection step otherwise.
pub fn bracketed_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::BracketFailure { lo, hi });
    }
    for _ in 0..MAX_ITER {
        let width = b - a;
        if width <= rel_tol * a.abs().max(b.abs()) || width <= f64::MIN_POSITIVE {
            break;
        }
        let secant = b - fb * (b - a) / (fb - fa);
        let margin = 0.01 * width;
        let x = if secant.is_finite() && secant > a + margin && secant < b - margin {
            secant
        } else {
            0.5 * (a + b)
        };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        // guarantee progress when false position stalls on one side
        if b - a > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt2() {
        let x = bracketed_root(|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_missing_sign_change() {
        assert_eq!(
            bracketed_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::BracketFailure { lo: -1.0, hi: 1.0 })
        );
    }

    #[test]
    fn handles_flat_functions() {
        // x^9 is very flat at the root; bisection fallback must still converge
        let x = bracketed_root(|x: f64| (x - 0.3).powi(9), -1.0, 2.0, 1e-14).unwrap();
        assert!((x - 0.3).abs() < 1e-2);
        let x = bracketed_root(|x: f64| x.tanh() - 0.5, -5.0, 5.0, 1e-15).unwrap();
        assert!((x - 0.5f64.atanh()).abs() < 1e-15);
    }
}
