//! All complex roots of a real polynomial by Aberth-Ehrlich iteration with a
//! final Newton polish.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Leading coefficients below this fraction of the largest are dropped.
pub const TRIM_RELATIVE: f64 = 64.0 * f64::EPSILON;

/// Acceptance bound on `|f(r)| / (max|c| max(1,|r|)^deg)`.
pub const RESIDUAL_BOUND: f64 = 1e-10;

const MAX_ITERATIONS: usize = 500;

/// Removes negligible leading coefficients (ascending order input).
pub fn trim_leading(coeffs: &[f64]) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut out = coeffs.to_vec();
    while let Some(&last) = out.last() {
        if last.abs() <= TRIM_RELATIVE * scale {
            out.pop();
        } else {
            break;
        }
    }
    out
}

/// `(f(z), f'(z))` by Horner, ascending coefficients.
fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Scaled residual used for the acceptance test.
pub fn scaled_residual(coeffs: &[f64], root: Complex64) -> f64 {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let deg = coeffs.len().saturating_sub(1) as i32;
    horner(coeffs, root).0.norm() / (scale * root.norm().max(1.0).powi(deg))
}

/// All roots of `sum_k coeffs[k] x^k`.
///
/// Negligible leading coefficients are trimmed first, so a polynomial whose
/// degree drops returns fewer roots.
pub fn find_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let full = trim_leading(coeffs);
    if full.is_empty() {
        return Err(Error::DegenerateZeroPolynomial);
    }
    let mut c = full.clone();
    let mut roots = Vec::new();
    // Exact zero roots.
    while c.len() > 1 && c[0] == 0.0 {
        c.remove(0);
        roots.push(Complex64::new(0.0, 0.0));
    }
    let deg = c.len() - 1;
    match deg {
        0 => {}
        1 => roots.push(Complex64::new(-c[0] / c[1], 0.0)),
        _ => roots.extend(aberth(&c)?),
    }
    for r in &roots {
        let res = scaled_residual(&full, *r);
        if !(res < RESIDUAL_BOUND) {
            return Err(Error::RootFinderFailed(format!(
                "root {r} has scaled residual {res:e}"
            )));
        }
    }
    Ok(roots)
}

fn aberth(c: &[f64]) -> Result<Vec<Complex64>> {
    let deg = c.len() - 1;
    // Start on a circle of the geometric-mean root radius.
    let radius = (c[0].abs() / c[deg].abs()).powf(1.0 / deg as f64).max(f64::MIN_POSITIVE);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / deg as f64 + 0.4))
        .collect();
    let mut converged = vec![false; deg];
    for _ in 0..MAX_ITERATIONS {
        for i in 0..deg {
            if converged[i] {
                continue;
            }
            let (p, dp) = horner(c, z[i]);
            if p == Complex64::new(0.0, 0.0) {
                converged[i] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                return Err(Error::RootFinderFailed("non-finite Aberth step".into()));
            }
            z[i] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[i].norm() {
                converged[i] = true;
            }
        }
        if converged.iter().all(|&b| b) {
            break;
        }
    }
    for r in z.iter_mut() {
        polish(c, r);
    }
    Ok(z)
}

/// A few Newton steps, kept only while the residual improves.
fn polish(c: &[f64], r: &mut Complex64) {
    for _ in 0..3 {
        let (p, dp) = horner(c, *r);
        if dp == Complex64::new(0.0, 0.0) {
            return;
        }
        let cand = *r - p / dp;
        if horner(c, cand).0.norm() < p.norm() {
            *r = cand;
        } else {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn linear_and_quadratic() {
        let r = find_roots(&[2.0, -1.0]).unwrap();
        assert_eq!(r, vec![Complex64::new(2.0, 0.0)]);
        let r = sorted(find_roots(&[1.0, 0.0, 1.0]).unwrap());
        assert!((r[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((r[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn degree_drop_is_trimmed() {
        let r = find_roots(&[6.0, -3.0, 1e-18]).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert_eq!(find_roots(&[0.0, 0.0]), Err(Error::DegenerateZeroPolynomial));
        assert_eq!(find_roots(&[]), Err(Error::DegenerateZeroPolynomial));
        assert!(find_roots(&[3.0]).unwrap().is_empty());
    }

    #[test]
    fn known_cubic_with_repeated_root() {
        // (x - 1)^2 (x + 2) = x^3 - 3x + 2
        let r = sorted(find_roots(&[2.0, -3.0, 0.0, 1.0]).unwrap());
        assert!((r[0] - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(1.0, 0.0)).norm() < 1e-7);
        assert!((r[2] - Complex64::new(1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn zero_roots_are_split_off() {
        let r = find_roots(&[0.0, 0.0, -1.0, 1.0]).unwrap();
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
    }

    proptest! {
        #[test]
        fn recovers_planted_roots(roots in prop::collection::vec(-3.0f64..3.0, 1..8)) {
            // expand prod (x - r)
            let mut c = vec![1.0];
            for &r in &roots {
                let mut next = vec![0.0; c.len() + 1];
                for (i, &a) in c.iter().enumerate() {
                    next[i] -= a * r;
                    next[i + 1] += a;
                }
                c = next;
            }
            let found = find_roots(&c).unwrap();
            prop_assert_eq!(found.len(), roots.len());
            for z in &found {
                prop_assert!(scaled_residual(&c, *z) < RESIDUAL_BOUND);
            }
        }
    }
}
