//! Bracketed scalar root finding.
//!
//! Both solvers require a sign change over the initial bracket and never
//! leave it, which is what the rate inversion and the crossing search rely on.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change over [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NotBracketed {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("function returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("no convergence after {iterations} iterations (last x = {x})")]
    NoConvergence { iterations: usize, x: f64 },
}

/// Stopping rule shared by both solvers.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Absolute tolerance on x.
    pub x_abs: f64,
    /// Relative tolerance on x.
    pub x_rel: f64,
    /// Stop as soon as |f(x)| falls below this.
    pub f_abs: f64,
    pub max_iterations: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            x_abs: 0.0,
            x_rel: 1e-10,
            f_abs: 0.0,
            max_iterations: 200,
        }
    }
}

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64, RootError> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(RootError::NonFinite { x })
    }
}

fn check_bracket(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<(), RootError> {
    if f_lo.signum() == f_hi.signum() && f_lo != 0.0 && f_hi != 0.0 {
        return Err(RootError::NotBracketed { lo, hi, f_lo, f_hi });
    }
    Ok(())
}

/// Plain bisection. Slow but immune to badly scaled or nearly flat functions.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = eval(&mut f, a)?;
    let fb = eval(&mut f, b)?;
    check_bracket(a, b, fa, fb)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    for _ in 0..tol.max_iterations {
        let mid = 0.5 * (a + b);
        let fm = eval(&mut f, mid)?;
        if fm == 0.0 || fm.abs() < tol.f_abs {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        let width_tol = tol.x_abs + tol.x_rel * mid.abs();
        if b - a <= width_tol || b - a <= f64::EPSILON * mid.abs() {
            return Ok(0.5 * (a + b));
        }
    }
    Err(RootError::NoConvergence {
        iterations: tol.max_iterations,
        x: 0.5 * (a + b),
    })
}

/// Brent's method (inverse quadratic interpolation guarded by bisection).
///
/// Follows the classic `zbrent` formulation: the current best estimate `b`
/// is always bracketed by `c`, and interpolation steps are only accepted when
/// they land well inside the bracket and shrink it fast enough.
pub fn brent<F>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
{
    let mut a = lo;
    let mut b = hi;
    let mut fa = eval(&mut f, a)?;
    let mut fb = eval(&mut f, b)?;
    check_bracket(a, b, fa, fb)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }

    let mut c = b;
    let mut fc = fb;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..tol.max_iterations {
        if (fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * (tol.x_abs + tol.x_rel * b.abs());
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 || fb.abs() < tol.f_abs {
            return Ok(b);
        }

        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }

        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = eval(&mut f, b)?;
    }
    Err(RootError::NoConvergence {
        iterations: tol.max_iterations,
        x: b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> Tolerance {
        Tolerance {
            x_abs: 1e-14,
            x_rel: 1e-14,
            f_abs: 0.0,
            max_iterations: 500,
        }
    }

    #[test]
    fn brent_finds_sqrt_two() {
        let root = brent(|x| x * x - 2.0, 0.0, 2.0, tight()).unwrap();
        assert!((root - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_finds_ln_two() {
        let root = bisect(|x| 2.0 * (1.0 - (-x).exp()) - 1.0, 0.0, 3.0, tight()).unwrap();
        assert!((root - 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn endpoint_root_is_returned_exactly() {
        assert_eq!(brent(|x| x, 0.0, 1.0, tight()).unwrap(), 0.0);
        assert_eq!(bisect(|x| x - 1.0, 0.0, 1.0, tight()).unwrap(), 1.0);
    }

    #[test]
    fn missing_sign_change_is_reported() {
        let err = brent(|x| x * x + 1.0, -1.0, 1.0, tight()).unwrap_err();
        assert!(matches!(err, RootError::NotBracketed { .. }));
        let err = bisect(|x| x * x + 1.0, -1.0, 1.0, tight()).unwrap_err();
        assert!(matches!(err, RootError::NotBracketed { .. }));
    }

    #[test]
    fn brent_matches_bisection_on_a_flat_exponential() {
        // Very flat near the root; both must agree.
        let f = |x: f64| (x - 0.3).powi(3) * 1e-3 + (x - 0.3) * 1e-9;
        let r1 = brent(f, 0.0, 1.0, tight()).unwrap();
        let r2 = bisect(f, 0.0, 1.0, tight()).unwrap();
        assert!((r1 - 0.3).abs() < 1e-9, "{r1}");
        assert!((r2 - 0.3).abs() < 1e-9, "{r2}");
    }

    #[test]
    fn non_finite_values_are_errors() {
        let err = brent(|x| 1.0 / x - 1.0, 0.0, 2.0, tight()).unwrap_err();
        assert!(matches!(err, RootError::NonFinite { .. }));
    }
}
