//! Simultaneous polynomial root finding (Aberth–Ehrlich).

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;

fn eval(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Roots of `Σ coeffs[k] x^k`, with multiplicity. Trailing zero coefficients are ignored.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let top = coeffs.iter().rposition(|c| c.norm() > 0.0);
    let Some(deg) = top else {
        return Err(Error::Numeric(
            "zero polynomial has no isolated roots".into(),
        ));
    };
    let low = coeffs.iter().position(|c| c.norm() > 0.0).unwrap_or(0);
    let mut roots = vec![Complex64::new(0.0, 0.0); low];
    let reduced: Vec<Complex64> = coeffs[low..=deg].iter().map(|c| c / coeffs[deg]).collect();
    let n = reduced.len() - 1;
    if n == 0 {
        return Ok(roots);
    }
    if n == 1 {
        roots.push(-reduced[0]);
        return Ok(roots);
    }
    // Cauchy-style radius for the initial circle.
    let radius = reduced[..n]
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm().powf(1.0 / (n - k) as f64))
        .fold(0.0f64, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            Complex64::from_polar(
                radius,
                2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64,
            )
        })
        .collect();
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut max_step = 0.0f64;
        for k in 0..n {
            let (p, dp) = eval(&reduced, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        // Multiple roots converge slowly; accept if residuals are small.
        let scale: f64 = reduced.iter().map(|c| c.norm()).sum();
        if z.iter()
            .any(|&x| eval(&reduced, x).0.norm() > 1e-8 * scale * (1.0 + x.norm()).powi(n as i32))
        {
            return Err(Error::Numeric("root finder did not converge".into()));
        }
    }
    roots.extend(z);
    Ok(roots)
}
