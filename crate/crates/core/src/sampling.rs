//! Random points of the egg domain and Monte-Carlo integration over it.
//!
//! Samples are drawn uniformly from the bounding region `{|W| < 1} x B_n`
//! and rejected outside the domain. Work is split into a fixed number of
//! shards, each with its own ChaCha stream, so results do not depend on the
//! thread count.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::coefficients::{factorial, EggDomainSpec};
use crate::kernel::{membership_defect, DomainPoint};

/// Number of independent streams a Monte-Carlo run is split into.
pub const SHARDS: u64 = 16;

/// Uniform point of the unit disk.
pub fn uniform_disk<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r = rng.random::<f64>().sqrt();
    let t = 2.0 * PI * rng.random::<f64>();
    Complex64::from_polar(r, t)
}

/// Uniform point of the unit ball of `C^n`.
pub fn uniform_ball<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let g: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = g.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let radius = rng.random::<f64>().powf(1.0 / (2.0 * n as f64));
    g.into_iter().map(|x| x * (radius / norm)).collect()
}

/// Volume of `{|W| < 1} x B_n` in real `2n + 2` dimensions.
pub fn bounding_volume(n: usize) -> f64 {
    PI * PI.powi(n as i32) / factorial(n)
}

/// Point with `|W|^{2K} + |Z|^2 < level`, uniform on that sub-domain.
pub fn random_interior_point<R: Rng + ?Sized>(
    spec: &EggDomainSpec,
    rng: &mut R,
    level: f64,
) -> DomainPoint {
    assert!(level > 0.0 && level <= 1.0);
    loop {
        let w = uniform_disk(rng);
        let z = uniform_ball(rng, spec.n());
        if 1.0 - membership_defect(spec, w, &z) < level {
            if let Ok(p) = DomainPoint::new(spec, w, z) {
                return p;
            }
        }
    }
}

/// Monte-Carlo estimate of a complex integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: Complex64,
    /// Standard error of `mean`, combining real and imaginary variances.
    pub std_err: f64,
    pub samples: usize,
    pub accepted: usize,
}

#[derive(Default, Clone, Copy)]
struct Moments {
    sum: Complex64,
    sum_sq: f64,
    accepted: usize,
}

/// Integrates `integrand(W, Z)` over the egg domain with `samples` draws.
///
/// The integrand is evaluated only at accepted points; rejected draws count
/// as zero.
pub fn integrate<F>(spec: &EggDomainSpec, samples: usize, seed: u64, integrand: F) -> McEstimate
where
    F: Fn(Complex64, &[Complex64]) -> Option<Complex64> + Sync,
{
    let shard_sizes: Vec<usize> = (0..SHARDS)
        .map(|i| {
            let base = samples / SHARDS as usize;
            base + usize::from((i as usize) < samples % SHARDS as usize)
        })
        .collect();
    let parts: Vec<Moments> = shard_sizes
        .par_iter()
        .enumerate()
        .map(|(shard, &count)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard as u64);
            let mut m = Moments::default();
            for _ in 0..count {
                let w = uniform_disk(&mut rng);
                let z = uniform_ball(&mut rng, spec.n());
                if membership_defect(spec, w, &z) <= 0.0 {
                    continue;
                }
                if let Some(v) = integrand(w, &z) {
                    m.sum += v;
                    m.sum_sq += v.norm_sqr();
                    m.accepted += 1;
                }
            }
            m
        })
        .collect();
    let total = parts.iter().fold(Moments::default(), |a, b| Moments {
        sum: a.sum + b.sum,
        sum_sq: a.sum_sq + b.sum_sq,
        accepted: a.accepted + b.accepted,
    });
    let n = samples as f64;
    let vol = bounding_volume(spec.n());
    let mean = total.sum / n;
    let var = (total.sum_sq / n - mean.norm_sqr()).max(0.0);
    McEstimate {
        mean: mean * vol,
        std_err: vol * (var / n).sqrt(),
        samples,
        accepted: total.accepted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for n in 1..5 {
            for _ in 0..1000 {
                let z = uniform_ball(&mut rng, n);
                assert!(z.iter().map(|x| x.norm_sqr()).sum::<f64>() < 1.0);
            }
        }
    }

    #[test]
    fn interior_points_respect_level() {
        let spec = EggDomainSpec::new(2, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let p = random_interior_point(&spec, &mut rng, 0.4);
            assert!(p.defect() > 0.6);
        }
    }

    #[test]
    fn volume_of_ball_case() {
        // n=1, K=1 is the unit ball of C^2 with volume pi^2/2.
        let spec = EggDomainSpec::new(1, 1.0).unwrap();
        let est = integrate(&spec, 200_000, 4, |_, _| Some(Complex64::new(1.0, 0.0)));
        let exact = PI * PI / 2.0;
        assert!((est.mean.re - exact).abs() < 4.0 * est.std_err, "{est:?}");
    }

    #[test]
    fn shard_split_is_deterministic() {
        let spec = EggDomainSpec::new(1, 2.0).unwrap();
        let f = |w: Complex64, _: &[Complex64]| Some(w.conj() * w);
        let a = integrate(&spec, 10_001, 77, f);
        let b = integrate(&spec, 10_001, 77, f);
        assert_eq!(a, b);
        assert_eq!(a.samples, 10_001);
    }
}
