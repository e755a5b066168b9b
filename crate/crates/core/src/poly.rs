//! Complex polynomial roots (Aberth-Ehrlich) for the amplitude generator's
//! characteristic polynomial.

use crate::prelude::*;

/// Coefficients in increasing degree.
fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn times_linear(poly: &[Complex64], shift: Complex64) -> Vec<Complex64> {
    // (z + shift) * poly
    let mut out = vec![ZERO; poly.len() + 1];
    for (k, c) in poly.iter().enumerate() {
        out[k] += c * shift;
        out[k + 1] += c;
    }
    out
}

/// Roots of a polynomial given by coefficients in increasing degree.
pub fn roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.len() > 1 && coeffs.last() == Some(&ZERO) {
        coeffs.pop();
    }
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    if n == 1 {
        return vec![-monic[0]];
    }
    let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = 2.0 * core::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(0.5 * radius, angle)
        })
        .collect();
    for _ in 0..1000 {
        let mut worst = 0.0_f64;
        for k in 0..n {
            let (p, dp) = eval_with_derivative(&monic, z[k]);
            if p == ZERO {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| ONE / (z[k] - z[j]))
                .sum();
            let step = ratio / (ONE - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                worst = worst.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if worst < 1e-15 {
            break;
        }
    }
    z
}

/// Roots of `z + sum_l w_l / (z + s_l) = 0`, i.e. of
/// `z prod_m (z + s_m) + sum_l w_l prod_{m != l} (z + s_m)`.
pub fn resolvent_roots(shifts: &[Complex64], weights: &[f64]) -> Vec<Complex64> {
    assert_eq!(shifts.len(), weights.len());
    let mut full = vec![ZERO, ONE];
    for s in shifts {
        full = times_linear(&full, *s);
    }
    for (l, w) in weights.iter().enumerate() {
        let mut partial = vec![Complex64::new(*w, 0.0)];
        for (m, s) in shifts.iter().enumerate() {
            if m != l {
                partial = times_linear(&partial, *s);
            }
        }
        for (k, c) in partial.iter().enumerate() {
            full[k] += c;
        }
    }
    roots(&full)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contains(roots: &[Complex64], z: Complex64, tol: f64) -> bool {
        roots.iter().any(|r| (r - z).norm() < tol)
    }

    #[test]
    fn cubic_with_known_roots() {
        // (z - 1)(z + 2i)(z + 0.5) expanded
        let r = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -2.0),
            Complex64::new(-0.5, 0.0),
        ];
        let mut poly = vec![ONE];
        for x in r {
            poly = times_linear(&poly, -x);
        }
        let found = roots(&poly);
        for x in r {
            assert!(contains(&found, x, 1e-12));
        }
    }

    #[test]
    fn decoupled_resolvent() {
        let s = Complex64::new(0.2, 0.5);
        let found = resolvent_roots(&[s], &[0.0]);
        assert!(contains(&found, ZERO, 1e-14));
        assert!(contains(&found, -s, 1e-14));
    }
}
