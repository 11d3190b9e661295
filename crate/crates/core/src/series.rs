//! Bergman kernel as an orthonormal-monomial series.
//!
//! The egg domain is a complete Reinhardt domain in `(W, Z)`, so the
//! monomials `W^a Z^alpha` are mutually orthogonal and, normalised, form a
//! basis of the Bergman space. With the squared norms
//!
//! ```text
//! ||W^a Z^alpha||^2 = pi^{n+1} alpha! Gamma((a+1)/K) / (K Gamma((a+1)/K + |alpha| + n + 1))
//! ```
//!
//! the kernel is `sum W^a Z^alpha conj(zeta^a xi^alpha) / ||W^a Z^alpha||^2`.
//! Nothing here touches the closed-form coefficients, which is what makes
//! the series usable as an oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::coefficients::EggDomainSpec;
use crate::error::{Error, Result};
use crate::kernel::PointPair;

/// Minimum membership defect for points fed to the series.
pub const INTERIOR_MARGIN: f64 = 1e-6;

/// Largest tail estimate, relative to `|value|`, that a series evaluation accepts.
pub const MAX_RELATIVE_TAIL: f64 = 0.1;

/// Exponents `(a, alpha)` of the monomial `W^a z_1^{alpha_1} ... z_n^{alpha_n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonomialIndex {
    pub a: u32,
    pub alpha: Vec<u32>,
}

impl MonomialIndex {
    pub fn new(a: u32, alpha: Vec<u32>) -> Self {
        Self { a, alpha }
    }

    pub fn constant(n: usize) -> Self {
        Self { a: 0, alpha: vec![0; n] }
    }

    pub fn total_degree(&self) -> u32 {
        self.a + self.alpha.iter().sum::<u32>()
    }

    /// Value of the monomial at `(w, z)`.
    pub fn eval(&self, w: Complex64, z: &[Complex64]) -> Complex64 {
        self.alpha
            .iter()
            .zip(z)
            .fold(w.powu(self.a), |acc, (&e, &zj)| acc * zj.powu(e))
    }
}

fn ln_factorial(k: u32) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// `ln` of the squared L2 norm of a monomial over the egg domain.
pub fn ln_monomial_norm_sq(spec: &EggDomainSpec, idx: &MonomialIndex) -> Result<f64> {
    if idx.alpha.len() != spec.n() {
        return Err(Error::ShapeMismatch(format!(
            "monomial has {} base exponents, domain has {}",
            idx.alpha.len(),
            spec.n()
        )));
    }
    let n = spec.n() as f64;
    let c = (idx.a as f64 + 1.0) / spec.k();
    let m: u32 = idx.alpha.iter().sum();
    let alpha_fact: f64 = idx.alpha.iter().map(|&e| ln_factorial(e)).sum();
    Ok((n + 1.0) * PI.ln() + alpha_fact + ln_gamma(c) - spec.k().ln() - ln_gamma(c + m as f64 + n + 1.0))
}

/// Squared L2 norm of a monomial over the egg domain.
pub fn monomial_norm_sq(spec: &EggDomainSpec, idx: &MonomialIndex) -> Result<f64> {
    ln_monomial_norm_sq(spec, idx).map(f64::exp)
}

/// Partial sum of the series together with its tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEvaluation {
    pub value: Complex64,
    /// Highest total degree included.
    pub cutoff: usize,
    pub tail_estimate: f64,
}

/// Degree-shell decomposition of the series at one point pair.
///
/// Shell `d` collects every monomial of total degree `d`. Alongside each
/// shell sum the absolute sum of its terms is kept; the tail estimate works
/// on those, since the complex shell sums can cancel.
#[derive(Debug, Clone)]
pub struct SeriesExpansion {
    shells: Vec<Complex64>,
    magnitudes: Vec<f64>,
}

impl SeriesExpansion {
    /// Accumulates shells `0 ..= cutoff`.
    pub fn new(spec: &EggDomainSpec, pair: &PointPair, cutoff: usize) -> Result<Self> {
        for p in [&pair.p, &pair.q] {
            if p.spec() != spec {
                return Err(Error::InvalidArgument("pair does not belong to this domain".into()));
            }
            if p.defect() <= INTERIOR_MARGIN {
                return Err(Error::NotInDomain(format!(
                    "series needs membership defect above {INTERIOR_MARGIN:e}, got {:e}",
                    p.defect()
                )));
            }
        }
        let n = spec.n();
        let s = pair.p.w() * pair.q.w().conj();
        let x: Vec<Complex64> = pair
            .p
            .z()
            .iter()
            .zip(pair.q.z())
            .map(|(a, b)| a * b.conj())
            .collect();

        // base[m] = sum over |alpha| = m of x^alpha / alpha!, enumerated index by index.
        let mut base = vec![Complex64::new(0.0, 0.0); cutoff + 1];
        let mut base_abs = vec![0.0; cutoff + 1];
        let mut alpha = vec![0u32; n];
        for m in 0..=cutoff {
            enumerate_compositions(&mut alpha, 0, m as u32, &mut |alpha| {
                let mut term = Complex64::new(1.0, 0.0);
                let mut ln_fact = 0.0;
                for (&e, xj) in alpha.iter().zip(&x) {
                    term *= xj.powu(e);
                    ln_fact += ln_factorial(e);
                }
                let inv_fact = (-ln_fact).exp();
                base[m] += term * inv_fact;
                base_abs[m] += term.norm() * inv_fact;
            });
        }

        let nf = n as f64;
        let ln_pre = spec.k().ln() - (nf + 1.0) * PI.ln();
        let mut shells = vec![Complex64::new(0.0, 0.0); cutoff + 1];
        let mut magnitudes = vec![0.0; cutoff + 1];
        for a in 0..=cutoff {
            let c = (a as f64 + 1.0) / spec.k();
            let ln_gc = ln_gamma(c);
            let sa = s.powu(a as u32);
            for m in 0..=(cutoff - a) {
                // 1 / ||W^a Z^alpha||^2 = alpha!^{-1} K Gamma(c + m + n + 1) / (pi^{n+1} Gamma(c))
                let weight = (ln_pre + ln_gamma(c + m as f64 + nf + 1.0) - ln_gc).exp();
                shells[a + m] += sa * base[m] * weight;
                magnitudes[a + m] += sa.norm() * base_abs[m] * weight;
            }
        }
        Ok(Self { shells, magnitudes })
    }

    pub fn max_cutoff(&self) -> usize {
        self.shells.len() - 1
    }

    pub fn shells(&self) -> &[Complex64] {
        &self.shells
    }

    /// Sum of shells `0 ..= cutoff` in fixed order.
    pub fn partial_sum(&self, cutoff: usize) -> Complex64 {
        self.shells[..=cutoff].iter().sum()
    }

    /// Geometric extrapolation from the absolute sums of the last three shells.
    pub fn tail_estimate(&self, cutoff: usize) -> f64 {
        let m = &self.magnitudes;
        let last = m[cutoff];
        if last == 0.0 {
            return 0.0;
        }
        if cutoff < 2 || m[cutoff - 1] == 0.0 || m[cutoff - 2] == 0.0 {
            return f64::INFINITY;
        }
        let ratio = (last / m[cutoff - 1]).max(m[cutoff - 1] / m[cutoff - 2]);
        if ratio >= 1.0 {
            f64::INFINITY
        } else {
            last * ratio / (1.0 - ratio)
        }
    }

    pub fn evaluation(&self, cutoff: usize) -> SeriesEvaluation {
        SeriesEvaluation {
            value: self.partial_sum(cutoff),
            cutoff,
            tail_estimate: self.tail_estimate(cutoff),
        }
    }
}

/// Calls `visit` on every `alpha` with `alpha[pos..]` summing to `remaining`,
/// in lexicographic order.
fn enumerate_compositions<F: FnMut(&[u32])>(
    alpha: &mut [u32],
    pos: usize,
    remaining: u32,
    visit: &mut F,
) {
    if pos + 1 == alpha.len() {
        alpha[pos] = remaining;
        visit(alpha);
        return;
    }
    for e in (0..=remaining).rev() {
        alpha[pos] = e;
        enumerate_compositions(alpha, pos + 1, remaining - e, visit);
    }
}

/// Series kernel through total degree `cutoff`.
pub fn kernel_series(
    spec: &EggDomainSpec,
    pair: &PointPair,
    cutoff: usize,
) -> Result<SeriesEvaluation> {
    if cutoff < 1 {
        return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
    }
    let eval = SeriesExpansion::new(spec, pair, cutoff)?.evaluation(cutoff);
    let value = eval.value.norm();
    if !(eval.tail_estimate <= MAX_RELATIVE_TAIL * value) {
        return Err(Error::CutoffTooSmall {
            cutoff,
            tail: eval.tail_estimate,
            value,
        });
    }
    Ok(eval)
}
