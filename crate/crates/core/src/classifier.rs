//! Lu Qi-Keng classification of the egg domains.
//!
//! On the fiber `Z = xi = 0` the kernel is a nonvanishing factor times
//! `f(t)` with `t = 1 - W conj(zeta)`, where
//! `f(t) = sum_{i=1}^{n+1} i! b_i t^{n+1-i}`. Every pair of points is moved
//! onto that fiber by an automorphism, so the kernel has a zero iff `f` has a
//! root with `|1 - t| < 1`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{factorial, EggDomainSpec, KernelCoefficients};
use crate::error::{Error, Result};
use crate::kernel::{hermitian_dot, DomainPoint, PointPair};
use crate::roots;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const MAX_TOL: f64 = 1e-3;
pub const DEFAULT_PRECISION: f64 = 1e-6;

/// Pairs are on the zero locus when `|X - s|` is below this.
pub const ZERO_LOCUS_TOL: f64 = 1e-10;

/// Points of the coarse grid recorded by [`threshold_sweep`].
const SWEEP_GRID: usize = 65;

/// `f(t)` in ascending powers of `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberPolynomial {
    pub coefficients: Vec<f64>,
    pub spec: EggDomainSpec,
}

impl FiberPolynomial {
    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }
}

/// Coefficient of `t^k` is `(n+1-k)! b_{n+1-k}`.
pub fn fiber_polynomial(coeffs: &KernelCoefficients) -> FiberPolynomial {
    let n = coeffs.spec().n();
    let b = coeffs.b();
    let coefficients = (0..=n)
        .map(|k| {
            let i = n + 1 - k;
            factorial(i) * b[i]
        })
        .collect();
    FiberPolynomial {
        coefficients,
        spec: *coeffs.spec(),
    }
}

/// Roots in `t` after trimming vanishing leading coefficients.
pub fn find_roots(f: &FiberPolynomial) -> Result<Vec<Complex64>> {
    roots::find_roots(&f.coefficients)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LqkStatus {
    LuQiKeng,
    NotLuQiKeng,
    Borderline,
}

impl LqkStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            LqkStatus::LuQiKeng => 0,
            LqkStatus::NotLuQiKeng => 1,
            LqkStatus::Borderline => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub status: LqkStatus,
    /// Roots `s = 1 - t` with `|s| < 1`.
    pub witness_roots: Vec<Complex64>,
    /// Every root, as `s`.
    pub roots: Vec<Complex64>,
    /// `max (1 - |s|)` over roots; `-inf` when `f` is constant.
    pub margin: f64,
}

/// Signed margin of the roots `s`.
fn margin_of(s_roots: &[Complex64]) -> f64 {
    s_roots
        .iter()
        .map(|s| 1.0 - s.norm())
        .fold(f64::NEG_INFINITY, f64::max)
}

fn root_images(spec: &EggDomainSpec) -> Result<Vec<Complex64>> {
    let f = fiber_polynomial(&KernelCoefficients::compute(spec));
    Ok(find_roots(&f)?
        .into_iter()
        .map(|t| Complex64::new(1.0, 0.0) - t)
        .collect())
}

/// Signed margin of `(n, K)`.
pub fn margin(spec: &EggDomainSpec) -> Result<f64> {
    Ok(margin_of(&root_images(spec)?))
}

/// Classifies `spec`.
///
/// A root on the unit circle is outside the open domain, so `margin <= 0`
/// is Lu Qi-Keng. Roots inside the disk by no more than `tol` are reported
/// as borderline.
pub fn classify(spec: &EggDomainSpec, tol: f64) -> Result<ClassificationResult> {
    if !(tol > 0.0 && tol <= MAX_TOL) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must lie in (0, {MAX_TOL:e}], got {tol}"
        )));
    }
    let s_roots = root_images(spec)?;
    let margin = margin_of(&s_roots);
    let status = if margin > tol {
        LqkStatus::NotLuQiKeng
    } else if margin > 0.0 {
        LqkStatus::Borderline
    } else {
        LqkStatus::LuQiKeng
    };
    let witness_roots = s_roots.iter().copied().filter(|s| s.norm() < 1.0).collect();
    Ok(ClassificationResult {
        status,
        witness_roots,
        roots: s_roots,
        margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub n: usize,
    #[serde(rename = "K_star")]
    pub k_star: f64,
    pub bracket: (f64, f64),
    /// `(K, margin)` sorted by `K`.
    pub samples: Vec<(f64, f64)>,
}

/// Margins on `count` evenly spaced `K` in `[lo, hi]`.
pub fn margin_grid(n: usize, lo: f64, hi: f64, count: usize) -> Result<Vec<(f64, f64)>> {
    if count < 2 || !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "grid needs 0 < lo < hi and at least two points, got ({lo}, {hi}) x {count}"
        )));
    }
    (0..count)
        .into_par_iter()
        .map(|i| {
            let k = lo + (hi - lo) * i as f64 / (count - 1) as f64;
            Ok((k, margin(&EggDomainSpec::new(n, k)?)?))
        })
        .collect()
}

/// Bisects on the sign of the margin (positive against non-positive).
pub fn threshold_sweep(n: usize, range: (f64, f64), precision: f64) -> Result<ThresholdReport> {
    let (lo, hi) = range;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad range ({lo}, {hi})")));
    }
    if !(precision > 0.0) {
        return Err(Error::InvalidArgument(format!("precision must be positive, got {precision}")));
    }
    EggDomainSpec::new(n, lo)?;
    let mut samples = margin_grid(n, lo, hi, SWEEP_GRID)?;
    let (m_lo, m_hi) = (samples[0].1, samples[SWEEP_GRID - 1].1);
    let side_lo = m_lo > 0.0;
    if side_lo == (m_hi > 0.0) {
        return Err(Error::NoSignChange {
            lo,
            hi,
            margin_lo: m_lo,
            margin_hi: m_hi,
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > precision {
        let mid = 0.5 * (a + b);
        let m = margin(&EggDomainSpec::new(n, mid)?)?;
        samples.push((mid, m));
        if (m > 0.0) == side_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    samples.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(ThresholdReport {
        n,
        k_star: 0.5 * (a + b),
        bracket: (a, b),
        samples,
    })
}

/// The set of pairs with `W conj(zeta) (1 - <Z, xi>)^{-1/K} = s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroLocus {
    spec: EggDomainSpec,
    s: Complex64,
}

pub fn zero_locus(spec: &EggDomainSpec, witness_s: Complex64) -> Result<ZeroLocus> {
    if !(witness_s.norm() < 1.0) {
        return Err(Error::InadmissibleWitness(witness_s.norm()));
    }
    Ok(ZeroLocus {
        spec: *spec,
        s: witness_s,
    })
}

impl ZeroLocus {
    pub fn witness(&self) -> Complex64 {
        self.s
    }

    /// `|X(p, q) - s|`.
    pub fn residual(&self, pair: &PointPair) -> f64 {
        let base = Complex64::new(1.0, 0.0) - hermitian_dot(pair.p.z(), pair.q.z());
        let x = pair.p.w() * pair.q.w().conj() * base.powf(-1.0 / self.spec.k());
        (x - self.s).norm()
    }

    pub fn contains(&self, pair: &PointPair) -> bool {
        self.residual(pair) < ZERO_LOCUS_TOL
    }

    /// `((W, 0), (zeta, 0))` with `W = sqrt|s| e^{i arg s}` and `zeta = sqrt|s|`.
    pub fn fiber_pair(&self) -> Result<PointPair> {
        self.shifted_pair(vec![Complex64::new(0.0, 0.0); self.spec.n()])
    }

    /// Pair with `Z = xi = z`, splitting `|W conj(zeta)|` evenly.
    pub fn shifted_pair(&self, z: Vec<Complex64>) -> Result<PointPair> {
        let u = 1.0 - z.iter().map(|x| x.norm_sqr()).sum::<f64>();
        if !(u > 0.0) {
            return Err(Error::NotInDomain("shift must lie in the unit ball".into()));
        }
        let target = self.s * u.powf(1.0 / self.spec.k());
        let r = target.norm().sqrt();
        let p = DomainPoint::new(&self.spec, Complex64::from_polar(r, target.arg()), z.clone())?;
        let q = DomainPoint::new(&self.spec, Complex64::new(r, 0.0), z)?;
        PointPair::new(p, q)
    }

    /// Solves for `W` given the other three coordinates.
    pub fn solve_w(&self, z: Vec<Complex64>, zeta: Complex64, xi: Vec<Complex64>) -> Result<PointPair> {
        if zeta.norm() == 0.0 {
            return Err(Error::InvalidArgument("zeta must be nonzero".into()));
        }
        let base = Complex64::new(1.0, 0.0) - hermitian_dot(&z, &xi);
        let w = self.s * base.powf(1.0 / self.spec.k()) / zeta.conj();
        let p = DomainPoint::new(&self.spec, w, z)?;
        let q = DomainPoint::new(&self.spec, zeta, xi)?;
        PointPair::new(p, q)
    }
}
