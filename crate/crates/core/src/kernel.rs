//! Closed-form Bergman kernel of the egg domain and its centering automorphisms.
//!
//! For `p = (W, Z)` and `q = (zeta, xi)`:
//!
//! ```text
//! K(p, q) = K^{-n} pi^{-(n+1)} F(Y) (1 - <Z, xi>)^{-(n + 1 + 1/K)}
//! X = W conj(zeta) (1 - <Z, xi>)^{-1/K},   Y = 1 / (1 - X)
//! F(Y) = sum_i b_i i! Y^{i+1}
//! ```
//!
//! All fractional powers take the principal branch; on the domain
//! `1 - <Z, xi>` has positive real part.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::{EggDomainSpec, KernelCoefficients};
use crate::error::{Error, Result};

/// Evaluations at points whose membership defect is below this are rejected.
pub const BOUNDARY_GUARD: f64 = 1e-12;

/// `|X - 1|` below this is treated as the boundary singularity.
pub const SINGULARITY_GUARD: f64 = 1e-14;

/// Step for the central-difference Jacobians of automorphisms.
pub const JACOBIAN_STEP: f64 = 1e-6;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Hermitian pairing `sum_j a_j conj(b_j)`.
pub fn hermitian_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm_sq(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// `1 - |w|^{2K} - |z|^2`; positive exactly on the domain.
pub fn membership_defect(spec: &EggDomainSpec, w: Complex64, z: &[Complex64]) -> f64 {
    1.0 - w.norm_sqr().powf(spec.k()) - norm_sq(z)
}

/// A point `(W, Z)` of the egg domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainPoint {
    w: Complex64,
    z: Vec<Complex64>,
    spec: EggDomainSpec,
}

impl DomainPoint {
    pub fn new(spec: &EggDomainSpec, w: Complex64, z: Vec<Complex64>) -> Result<Self> {
        if z.len() != spec.n() {
            return Err(Error::ShapeMismatch(format!(
                "base coordinate has length {}, expected {}",
                z.len(),
                spec.n()
            )));
        }
        if !(w.is_finite() && z.iter().all(|c| c.is_finite())) {
            return Err(Error::NotInDomain("non-finite coordinate".into()));
        }
        let defect = membership_defect(spec, w, &z);
        if defect <= 0.0 {
            return Err(Error::NotInDomain(format!(
                "|W|^(2K) + |Z|^2 = {} is not below 1",
                1.0 - defect
            )));
        }
        Ok(Self { w, z, spec: *spec })
    }

    /// Builds from the flat coordinate vector `[W, z_1, ..., z_n]`.
    pub fn from_coords(spec: &EggDomainSpec, coords: &[Complex64]) -> Result<Self> {
        match coords.split_first() {
            Some((&w, z)) => Self::new(spec, w, z.to_vec()),
            None => Err(Error::ShapeMismatch("empty coordinate vector".into())),
        }
    }

    pub fn origin(spec: &EggDomainSpec) -> Self {
        Self {
            w: Complex64::new(0.0, 0.0),
            z: vec![Complex64::new(0.0, 0.0); spec.n()],
            spec: *spec,
        }
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn spec(&self) -> &EggDomainSpec {
        &self.spec
    }

    pub fn coords(&self) -> Vec<Complex64> {
        std::iter::once(self.w).chain(self.z.iter().copied()).collect()
    }

    pub fn defect(&self) -> f64 {
        membership_defect(&self.spec, self.w, &self.z)
    }
}

/// Two points of the same domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPair {
    pub p: DomainPoint,
    pub q: DomainPoint,
}

impl PointPair {
    pub fn new(p: DomainPoint, q: DomainPoint) -> Result<Self> {
        if p.spec != q.spec {
            return Err(Error::InvalidArgument("points belong to different domains".into()));
        }
        Ok(Self { p, q })
    }

    pub fn diagonal(p: DomainPoint) -> Self {
        Self { q: p.clone(), p }
    }

    pub fn swapped(&self) -> Self {
        Self {
            p: self.q.clone(),
            q: self.p.clone(),
        }
    }
}

/// Kernel value with the intermediates `X` and `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: Complex64,
    #[serde(rename = "X")]
    pub x: Complex64,
    #[serde(rename = "Y")]
    pub y: Complex64,
}

/// Precomputed evaluator for one domain.
#[derive(Debug, Clone)]
pub struct BergmanKernel {
    spec: EggDomainSpec,
    coefficients: KernelCoefficients,
    /// `b_i i!` for `i = 0 ..= n+1`.
    weighted: Vec<f64>,
    prefactor: f64,
    base_exponent: f64,
}

impl BergmanKernel {
    pub fn new(spec: &EggDomainSpec) -> Self {
        let coefficients = KernelCoefficients::compute(spec);
        Self::with_coefficients(coefficients)
    }

    pub fn with_coefficients(coefficients: KernelCoefficients) -> Self {
        let spec = *coefficients.spec();
        let n = spec.n() as f64;
        Self {
            weighted: coefficients.weighted(),
            prefactor: spec.k().powf(-n) * PI.powf(-(n + 1.0)),
            base_exponent: -(n + 1.0 + 1.0 / spec.k()),
            coefficients,
            spec,
        }
    }

    pub fn spec(&self) -> &EggDomainSpec {
        &self.spec
    }

    pub fn coefficients(&self) -> &KernelCoefficients {
        &self.coefficients
    }

    /// `F(y) = sum_i b_i i! y^{i+1}`.
    pub fn fiber_function(&self, y: Complex64) -> Complex64 {
        let inner = self
            .weighted
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * y + c);
        inner * y
    }

    /// Kernel on raw coordinates. Coordinates are checked against the
    /// boundary guard but not otherwise validated.
    pub fn eval_raw(
        &self,
        w: Complex64,
        z: &[Complex64],
        zeta: Complex64,
        xi: &[Complex64],
    ) -> Result<KernelValue> {
        for (a, b) in [(w, z), (zeta, xi)] {
            let d = membership_defect(&self.spec, a, b);
            if !(d >= BOUNDARY_GUARD) {
                return Err(Error::NumericalOverflow(format!(
                    "membership defect {d:e} is below the boundary guard"
                )));
            }
        }
        self.eval_unguarded(w, z, zeta, xi)
    }

    /// Kernel without the boundary-defect guard; used by finite-difference
    /// stencils that straddle a guarded point.
    pub(crate) fn eval_unguarded(
        &self,
        w: Complex64,
        z: &[Complex64],
        zeta: Complex64,
        xi: &[Complex64],
    ) -> Result<KernelValue> {
        let base = ONE - hermitian_dot(z, xi);
        let x = w * zeta.conj() * base.powf(-1.0 / self.spec.k());
        if (x - ONE).norm() < SINGULARITY_GUARD {
            return Err(Error::NumericalOverflow(format!(
                "|X - 1| = {:e} at the boundary singularity",
                (x - ONE).norm()
            )));
        }
        let y = (ONE - x).inv();
        let value = self.fiber_function(y) * base.powf(self.base_exponent) * self.prefactor;
        if !value.is_finite() {
            return Err(Error::NumericalOverflow("kernel value is not finite".into()));
        }
        Ok(KernelValue { value, x, y })
    }

    pub fn eval(&self, pair: &PointPair) -> Result<KernelValue> {
        if pair.p.spec != self.spec || pair.q.spec != self.spec {
            return Err(Error::InvalidArgument(
                "pair does not belong to this kernel's domain".into(),
            ));
        }
        self.eval_raw(pair.p.w, &pair.p.z, pair.q.w, &pair.q.z)
    }

    /// `K(0, 0)`, the reciprocal of the volume.
    pub fn at_origin(&self) -> f64 {
        self.fiber_function(ONE).re * self.prefactor
    }

    /// `K(p, p)`, real and positive.
    pub fn diagonal(&self, p: &DomainPoint) -> Result<f64> {
        Ok(self.eval_raw(p.w, &p.z, p.w, &p.z)?.value.re)
    }

    /// `|K(p,q)| / sqrt(K(p,p) K(q,q))`.
    pub fn diag_normalized(&self, pair: &PointPair) -> Result<f64> {
        let v = self.eval(pair)?.value.norm();
        Ok(v / (self.diagonal(&pair.p)? * self.diagonal(&pair.q)?).sqrt())
    }

    /// `|K(p,q)| / K(0,0)`.
    pub fn origin_normalized(&self, pair: &PointPair) -> Result<f64> {
        Ok(self.eval(pair)?.value.norm() / self.at_origin())
    }
}

/// One-shot kernel evaluation.
pub fn eval_kernel(spec: &EggDomainSpec, pair: &PointPair) -> Result<KernelValue> {
    BergmanKernel::new(spec).eval(pair)
}

/// Unit-ball kernel `(n+1)!/pi^{n+1} (1 - W conj(zeta) - <Z, xi>)^{-(n+2)}`,
/// which the egg kernel reduces to at `K = 1`.
pub fn ball_kernel(n: usize, p: &[Complex64], q: &[Complex64]) -> Complex64 {
    let d = n + 1;
    let gamma = crate::coefficients::factorial(d);
    let base = ONE - hermitian_dot(p, q);
    base.powi(-(d as i32 + 1)) * gamma / PI.powi(d as i32)
}

/// Holomorphic automorphism `(W, Z) -> (W [sqrt(1-|Z0|^2) / (1 - <Z,Z0>)]^{1/K}, phi_{Z0}(Z))`
/// where `phi_{Z0}` is the ball involution composed with `-1`, so that it
/// sends `Z0` to `0` and reduces to the identity at `Z0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteringAutomorphism {
    z0: Vec<Complex64>,
    spec: EggDomainSpec,
    z0_norm_sq: f64,
    s: f64,
}

impl CenteringAutomorphism {
    pub fn new(spec: &EggDomainSpec, z0: Vec<Complex64>) -> Result<Self> {
        if z0.len() != spec.n() {
            return Err(Error::ShapeMismatch(format!(
                "base point has length {}, expected {}",
                z0.len(),
                spec.n()
            )));
        }
        let z0_norm_sq = norm_sq(&z0);
        if !(z0_norm_sq < 1.0) {
            return Err(Error::InvalidBasePoint(z0_norm_sq.sqrt()));
        }
        Ok(Self {
            z0,
            spec: *spec,
            z0_norm_sq,
            s: (1.0 - z0_norm_sq).sqrt(),
        })
    }

    pub fn z0(&self) -> &[Complex64] {
        &self.z0
    }

    pub fn is_identity(&self) -> bool {
        self.z0_norm_sq == 0.0
    }

    /// Applies the map to arbitrary coordinates `[W, Z]`.
    pub fn apply_coords(&self, coords: &[Complex64]) -> Vec<Complex64> {
        let (w, z) = coords.split_first().expect("non-empty coordinates");
        let mut out = Vec::with_capacity(coords.len());
        if self.is_identity() {
            out.extend_from_slice(coords);
            return out;
        }
        let pairing = hermitian_dot(z, &self.z0);
        let denom = ONE - pairing;
        let factor = (Complex64::new(self.s, 0.0) / denom).powf(1.0 / self.spec.k());
        out.push(w * factor);
        // phi(Z) = (P Z + s Q Z - Z0) / (1 - <Z, Z0>), P the projection onto Z0.
        let proj_coef = pairing / self.z0_norm_sq;
        for (zj, aj) in z.iter().zip(&self.z0) {
            let pz = aj * proj_coef;
            let qz = zj - pz;
            out.push((pz + qz * self.s - aj) / denom);
        }
        out
    }

    pub fn apply(&self, p: &DomainPoint) -> Result<DomainPoint> {
        DomainPoint::from_coords(&self.spec, &self.apply_coords(&p.coords()))
    }

    /// Complex Jacobian matrix at `coords` by central differences along the
    /// real axis of each holomorphic coordinate.
    pub fn jacobian(&self, coords: &[Complex64]) -> DMatrix<Complex64> {
        if self.is_identity() {
            return DMatrix::identity(coords.len(), coords.len());
        }
        holomorphic_jacobian(|c| self.apply_coords(c), coords, JACOBIAN_STEP)
    }

    pub fn jacobian_det(&self, coords: &[Complex64]) -> Complex64 {
        self.jacobian(coords).determinant()
    }
}

/// Jacobian `J[i][j] = d f_i / d x_j` of a holomorphic map by central differences.
pub fn holomorphic_jacobian<F>(f: F, at: &[Complex64], h: f64) -> DMatrix<Complex64>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let d = at.len();
    let mut jac = DMatrix::zeros(d, d);
    let mut buf = at.to_vec();
    for j in 0..d {
        buf[j] = at[j] + h;
        let plus = f(&buf);
        buf[j] = at[j] - h;
        let minus = f(&buf);
        buf[j] = at[j];
        for i in 0..d {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    jac
}

/// Builds the centering automorphism sending the base point `z0` to `0`.
pub fn centering_automorphism(
    spec: &EggDomainSpec,
    z0: Vec<Complex64>,
) -> Result<CenteringAutomorphism> {
    CenteringAutomorphism::new(spec, z0)
}

/// Relative residual of `K(p,q) = det J(p) K(F p, F q) conj(det J(q))`.
pub fn verify_transformation_rule(
    spec: &EggDomainSpec,
    auto: &CenteringAutomorphism,
    pair: &PointPair,
) -> Result<f64> {
    let kernel = BergmanKernel::new(spec);
    transformation_residual(&kernel, auto, pair)
}

pub(crate) fn transformation_residual(
    kernel: &BergmanKernel,
    auto: &CenteringAutomorphism,
    pair: &PointPair,
) -> Result<f64> {
    let direct = kernel.eval(pair)?.value;
    let fp = auto.apply(&pair.p)?;
    let fq = auto.apply(&pair.q)?;
    let moved = kernel.eval(&PointPair::new(fp, fq)?)?.value;
    let jp = auto.jacobian_det(&pair.p.coords());
    let jq = auto.jacobian_det(&pair.q.coords());
    let pulled = jp * moved * jq.conj();
    Ok((direct - pulled).norm() / direct.norm())
}
