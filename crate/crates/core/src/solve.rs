//! Bracketed root finding on monotone scalar functions.

use crate::error::{Error, Result};

/// Find x with g(x) = 0 for strictly decreasing g, given g(lo) >= 0 >= g(hi).
///
/// Illinois-damped regula falsi with bisection fallback whenever an endpoint
/// value is infinite (common here: log-survivals hit -inf past the support).
/// Stops on |g(x)| < ftol or on bracket collapse below xtol (relative).
pub(crate) fn solve_decreasing(
    mut g: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    ftol: f64,
    xtol: f64,
    max_iter: u32,
) -> Result<f64> {
    let mut a = lo;
    let mut b = hi;
    let mut fa = g(a)?;
    let mut fb = g(b)?;
    if fa < 0.0 {
        return Err(Error::Bracket(format!(
            "g({a}) = {fa} < 0; target above bracket"
        )));
    }
    if fb > 0.0 {
        return Err(Error::Bracket(format!(
            "g({b}) = {fb} > 0; target below bracket"
        )));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    // which endpoint kept its value in the previous step (Illinois damping)
    let mut stale: i8 = 0;
    for _ in 0..max_iter {
        let x = if fa.is_finite() && fb.is_finite() {
            let x = (a * fb - b * fa) / (fb - fa);
            if x > a && x < b {
                x
            } else {
                0.5 * (a + b)
            }
        } else {
            0.5 * (a + b)
        };
        let fx = g(x)?;
        if fx.abs() < ftol {
            return Ok(x);
        }
        if fx > 0.0 {
            a = x;
            fa = fx;
            if stale == 1 {
                fb *= 0.5;
            }
            stale = 1;
        } else {
            b = x;
            fb = fx;
            if stale == -1 {
                fa *= 0.5;
            }
            stale = -1;
        }
        if (b - a).abs() < xtol * b.abs().max(1.0) {
            return Ok(0.5 * (a + b));
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_root() {
        let r = solve_decreasing(|x| Ok(2.0 - x), 0.0, 10.0, 1e-12, 1e-14, 200).unwrap();
        assert!((r - 2.0).abs() < 1e-10);
    }

    #[test]
    fn handles_infinite_endpoint() {
        // g(x) = ln(1-x) - ln(0.25), -inf at x = 1
        let r = solve_decreasing(
            |x| Ok((1.0 - x).ln() - 0.25f64.ln()),
            0.0,
            1.0,
            1e-12,
            1e-15,
            300,
        )
        .unwrap();
        assert!((r - 0.75).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_bracket() {
        assert!(solve_decreasing(|x| Ok(-1.0 - x), 0.0, 1.0, 1e-9, 1e-12, 50).is_err());
    }
}
