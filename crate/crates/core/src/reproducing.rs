//! Monte-Carlo check of the reproducing property `f(z) = ∫ f(T) K(z, T) dV_T`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::EggDomainSpec;
use crate::error::{Error, Result};
use crate::kernel::{BergmanKernel, DomainPoint};
use crate::sampling::integrate;
use crate::series::MonomialIndex;

pub const MIN_SAMPLES: usize = 100_000;

/// Standard errors above this fraction of `|f(z)|` make the estimate useless.
pub const MAX_RELATIVE_STD_ERR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReproducingReport {
    pub estimate: Complex64,
    pub target: Complex64,
    /// `|estimate - target| / |target|`.
    pub relative_error: f64,
    /// Standard error of `relative_error`.
    pub relative_std_err: f64,
    pub samples: usize,
}

impl ReproducingReport {
    /// Deviation measured in standard errors.
    pub fn sigmas(&self) -> f64 {
        self.relative_error / self.relative_std_err
    }
}

pub fn reproducing_check(
    spec: &EggDomainSpec,
    f: &MonomialIndex,
    z: &DomainPoint,
    samples: usize,
    seed: u64,
) -> Result<ReproducingReport> {
    if f.alpha.len() != spec.n() {
        return Err(Error::ShapeMismatch(format!(
            "monomial has {} Z-exponents, domain needs {}",
            f.alpha.len(),
            spec.n()
        )));
    }
    if z.spec() != spec {
        return Err(Error::InvalidArgument("point does not belong to this domain".into()));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InsufficientSamples(format!(
            "{samples} samples requested, at least {MIN_SAMPLES} needed"
        )));
    }
    let kernel = BergmanKernel::new(spec);
    let (zw, zz) = (z.w(), z.z());
    let est = integrate(spec, samples, seed, |w, t| {
        let k = kernel.eval_unguarded(zw, zz, w, t).ok()?;
        Some(f.eval(w, t) * k.value)
    });
    let target = f.eval(zw, zz);
    let scale = target.norm();
    if !(est.std_err <= MAX_RELATIVE_STD_ERR * scale) {
        return Err(Error::InsufficientSamples(format!(
            "standard error {:e} exceeds half of |f(z)| = {scale:e}",
            est.std_err
        )));
    }
    Ok(ReproducingReport {
        estimate: est.mean,
        target,
        relative_error: (est.mean - target).norm() / scale,
        relative_std_err: est.std_err / scale,
        samples,
    })
}
