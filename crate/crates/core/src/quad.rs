//! Small adaptive-Simpson quadrature used by the weight-integral machinery.

use crate::error::Result;

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
///
/// The integrand may fail (non-finite evaluation); failures propagate.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 24)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let half_tol = 0.5 * tol;
    Ok(recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1)?
        + recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let v = adaptive_simpson(&|x| Ok(x * x), 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 9.0).abs() < 1e-10);
    }

    #[test]
    fn integrates_decaying_exponential() {
        let v = adaptive_simpson(&|x: f64| Ok((-x).exp()), 0.0, 40.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn handles_kink() {
        let v = adaptive_simpson(&|x: f64| Ok((x - 0.3).abs()), 0.0, 1.0, 1e-12).unwrap();
        let exact = 0.3_f64.powi(2) / 2.0 + 0.7_f64.powi(2) / 2.0;
        assert!((v - exact).abs() < 1e-8);
    }

    #[test]
    fn propagates_failures() {
        let r = adaptive_simpson(
            &|x: f64| {
                if x > 0.5 {
                    Err(crate::error::Error::Evaluation { x, y: 0.0 })
                } else {
                    Ok(x)
                }
            },
            0.0,
            1.0,
            1e-6,
        );
        assert!(r.is_err());
    }
}
