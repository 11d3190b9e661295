//! Bergman representative coordinates based at an interior point `t`:
//!
//! ```text
//! f_i(Z) = sum_j (T^{-1})_{ji} d/d conj(W_j) log(K(Z, W) / K(W, W)) |_{W = t}
//! T_ij   = d^2 log K(Z, W) / dZ_i d conj(W_j) |_{Z = W = t}
//! ```
//!
//! indexed over all `n + 1` coordinates `(W, Z)`. Every derivative is a
//! central difference with one Richardson step, taken on logarithms of
//! kernel ratios so the principal branch is never crossed. A zero of
//! `K(Z, t)` makes the map undefined, which is the obstruction the Lu Qi-Keng
//! property rules out.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::coefficients::EggDomainSpec;
use crate::error::{Error, Result};
use crate::kernel::{BergmanKernel, DomainPoint, PointPair};

/// Step for first `conj(W)` derivatives.
pub const FIRST_STEP: f64 = 1e-5;

/// Step for the mixed second derivatives of the metric; smaller steps lose
/// the Hermitian tolerance to roundoff.
pub const METRIC_STEP: f64 = 1e-3;

/// Step for the numerical Jacobian of the map.
pub const JACOBIAN_STEP: f64 = 1e-3;

/// Normalized kernel values below this count as zeros.
pub const ZERO_THRESHOLD: f64 = 1e-8;

pub const MAX_CONDITION: f64 = 1e12;

/// Base points must have at least this membership defect.
pub const MIN_DEFECT: f64 = 1e-6;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    /// `(n+1) x (n+1)` entries, coordinate 0 being `W`.
    pub entries: DMatrix<Complex64>,
    pub base_point: Vec<Complex64>,
}

impl MetricMatrix {
    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.entries.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Largest entry of `T - T*`.
    pub fn hermitian_defect(&self) -> f64 {
        let t = &self.entries;
        (t - t.adjoint()).iter().fold(0.0f64, |m, x| m.max(x.norm()))
    }

    /// Ratio of extreme eigenvalue magnitudes of the Hermitian part.
    pub fn condition_number(&self) -> f64 {
        let t = &self.entries;
        let h = (t + t.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = h.symmetric_eigen().eigenvalues;
        let max = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let min = eig.iter().fold(f64::INFINITY, |m, x| m.min(*x));
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

fn check_point(spec: &EggDomainSpec, p: &DomainPoint) -> Result<()> {
    if p.spec() != spec {
        return Err(Error::InvalidArgument("point does not belong to this domain".into()));
    }
    if !(p.defect() > MIN_DEFECT) {
        return Err(Error::NotInDomain(format!(
            "membership defect {:e} is below {MIN_DEFECT:e}",
            p.defect()
        )));
    }
    Ok(())
}

/// `K(p, q)` on raw coordinates, failing on non-finite or vanishing values.
fn kernel_at(kernel: &BergmanKernel, p: &[Complex64], q: &[Complex64]) -> Result<Complex64> {
    let v = kernel.eval_raw(p[0], &p[1..], q[0], &q[1..])?.value;
    if v == Complex64::new(0.0, 0.0) || !v.is_finite() {
        return Err(Error::KernelZeroOnPath(format!(
            "kernel value {v} on the differentiation stencil"
        )));
    }
    Ok(v)
}

fn shifted(at: &[Complex64], j: usize, by: Complex64) -> Vec<Complex64> {
    let mut v = at.to_vec();
    v[j] += by;
    v
}

/// `(4 D(h/2) - D(h)) / 3`.
fn richardson<F>(h: f64, d: F) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

pub fn metric_matrix(spec: &EggDomainSpec, z: &DomainPoint) -> Result<MetricMatrix> {
    check_point(spec, z)?;
    metric_with(&BergmanKernel::new(spec), &z.coords())
}

fn metric_with(kernel: &BergmanKernel, at: &[Complex64]) -> Result<MetricMatrix> {
    let d = at.len();
    let mut t = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            // K is holomorphic in its first slot and antiholomorphic in its
            // second, so real-axis steps give d/dZ_i and d/d conj(W_j).
            t[(i, j)] = richardson(METRIC_STEP, |h| {
                let hc = Complex64::new(h, 0.0);
                let (zp, zm) = (shifted(at, i, hc), shifted(at, i, -hc));
                let (wp, wm) = (shifted(at, j, hc), shifted(at, j, -hc));
                let num = kernel_at(kernel, &zp, &wp)? * kernel_at(kernel, &zm, &wm)?;
                let den = kernel_at(kernel, &zp, &wm)? * kernel_at(kernel, &zm, &wp)?;
                Ok((num / den).ln() / (4.0 * h * h))
            })?;
        }
    }
    Ok(MetricMatrix {
        entries: t,
        base_point: at.to_vec(),
    })
}

/// The map `Z -> f(Z)` for a fixed base point.
#[derive(Debug, Clone)]
pub struct RepresentativeMap {
    kernel: BergmanKernel,
    base: DomainPoint,
    metric: MetricMatrix,
    factor: Cholesky<Complex64, nalgebra::Dyn>,
}

impl RepresentativeMap {
    pub fn new(spec: &EggDomainSpec, base: &DomainPoint) -> Result<Self> {
        check_point(spec, base)?;
        let kernel = BergmanKernel::new(spec);
        let metric = metric_with(&kernel, &base.coords())?;
        let cond = metric.condition_number();
        if !(cond <= MAX_CONDITION) {
            return Err(Error::SingularMetric(cond));
        }
        let factor = Cholesky::new(metric.entries.clone()).ok_or(Error::SingularMetric(cond))?;
        Ok(Self {
            kernel,
            base: base.clone(),
            metric,
            factor,
        })
    }

    pub fn base(&self) -> &DomainPoint {
        &self.base
    }

    pub fn metric(&self) -> &MetricMatrix {
        &self.metric
    }

    /// Map at a domain point; checks the kernel against the zero threshold.
    pub fn eval(&self, z: &DomainPoint) -> Result<Vec<Complex64>> {
        check_point(self.kernel.spec(), z)?;
        let pair = PointPair::new(z.clone(), self.base.clone())?;
        let normalized = self.kernel.diag_normalized(&pair)?;
        if normalized < ZERO_THRESHOLD {
            return Err(Error::KernelZeroOnPath(format!(
                "normalized |K(Z, t)| = {normalized:e} vanishes"
            )));
        }
        self.eval_coords(&z.coords())
    }

    /// Map on raw coordinates `[W, Z]`.
    pub fn eval_coords(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let t = self.base.coords();
        let k = &self.kernel;
        let d = t.len();
        // log(R(W+)/R(W-)) with R(W) = K(z, W) / K(W, W).
        let diff = |wp: &[Complex64], wm: &[Complex64]| -> Result<Complex64> {
            let num = kernel_at(k, z, wp)? * kernel_at(k, wm, wm)?;
            let den = kernel_at(k, z, wm)? * kernel_at(k, wp, wp)?;
            Ok((num / den).ln())
        };
        let mut v = DVector::zeros(d);
        for j in 0..d {
            let dx = richardson(FIRST_STEP, |h| {
                let s = Complex64::new(h, 0.0);
                Ok(diff(&shifted(&t, j, s), &shifted(&t, j, -s))? / (2.0 * h))
            })?;
            let dy = richardson(FIRST_STEP, |h| {
                let s = I * h;
                Ok(diff(&shifted(&t, j, s), &shifted(&t, j, -s))? / (2.0 * h))
            })?;
            // Wirtinger derivative d/d conj(W) = (d/dx + i d/dy) / 2.
            v[j] = (dx + I * dy) * 0.5;
        }
        // f = (T^{-1})^t v = conj(T^{-1} conj(v)) for Hermitian T.
        let solved = self.factor.solve(&v.map(|x| x.conj()));
        Ok(solved.iter().map(|x| x.conj()).collect())
    }

    /// Numerical Jacobian `d f_i / d Z_k` at the base.
    pub fn jacobian_at_base(&self) -> Result<DMatrix<Complex64>> {
        let t = self.base.coords();
        let d = t.len();
        let mut jac = DMatrix::zeros(d, d);
        for k in 0..d {
            for i in 0..d {
                jac[(i, k)] = richardson(JACOBIAN_STEP, |h| {
                    let s = Complex64::new(h, 0.0);
                    let plus = self.eval_coords(&shifted(&t, k, s))?;
                    let minus = self.eval_coords(&shifted(&t, k, -s))?;
                    Ok((plus[i] - minus[i]) / (2.0 * h))
                })?;
            }
        }
        Ok(jac)
    }
}

pub fn representative_coordinates(
    spec: &EggDomainSpec,
    base: &DomainPoint,
    z: &DomainPoint,
) -> Result<Vec<Complex64>> {
    RepresentativeMap::new(spec, base)?.eval(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{classify, zero_locus, DEFAULT_TOL};
    use crate::sampling::random_interior_point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(n: usize, k: f64) -> EggDomainSpec {
        EggDomainSpec::new(n, k).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_abs(v: impl IntoIterator<Item = Complex64>) -> f64 {
        v.into_iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    #[test]
    fn ball_metric_at_origin() {
        let sp = spec(1, 1.0);
        let t = metric_matrix(&sp, &DomainPoint::origin(&sp)).unwrap();
        let expected = DMatrix::<Complex64>::identity(2, 2) * c(3.0, 0.0);
        assert!(max_abs((&t.entries - expected).iter().copied()) < 1e-8, "{}", t.entries);
    }

    #[test]
    fn metric_is_diagonal_at_origin() {
        for (n, k) in [(2, 0.5), (3, 2.0), (1, 0.3)] {
            let sp = spec(n, k);
            let t = metric_matrix(&sp, &DomainPoint::origin(&sp)).unwrap().entries;
            for i in 0..=n {
                assert!(t[(i, i)].re > 0.0);
                for j in 0..=n {
                    if i != j {
                        assert!(t[(i, j)].norm() < 1e-8, "({i},{j}) = {}", t[(i, j)]);
                    }
                }
            }
        }
    }

    #[test]
    fn metric_is_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (n, k) in [(1, 2.0), (2, 0.5), (2, 3.0)] {
            let sp = spec(n, k);
            for _ in 0..10 {
                let p = random_interior_point(&sp, &mut rng, 0.8);
                let t = metric_matrix(&sp, &p).unwrap();
                assert!(t.hermitian_defect() < 1e-8, "{:e}", t.hermitian_defect());
                assert!(t.condition_number().is_finite());
            }
        }
    }

    #[test]
    fn ball_map_is_identity() {
        let sp = spec(1, 1.0);
        let map = RepresentativeMap::new(&sp, &DomainPoint::origin(&sp)).unwrap();
        for (w, z) in [(c(0.3, 0.1), c(-0.2, 0.4)), (c(0.0, -0.5), c(0.6, 0.0))] {
            let p = DomainPoint::new(&sp, w, vec![z]).unwrap();
            let f = map.eval(&p).unwrap();
            assert!((f[0] - w).norm() < 1e-8 && (f[1] - z).norm() < 1e-8, "{f:?}");
        }
    }

    #[test]
    fn base_maps_to_zero_with_identity_jacobian() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (n, k) in [(1, 1.0), (1, 2.0), (2, 0.5), (2, 3.0)] {
            let sp = spec(n, k);
            for _ in 0..3 {
                let base = random_interior_point(&sp, &mut rng, 0.6);
                let map = RepresentativeMap::new(&sp, &base).unwrap();
                let f = map.eval(&base).unwrap();
                assert!(max_abs(f) < 1e-8);
                let jac = map.jacobian_at_base().unwrap();
                let id = DMatrix::<Complex64>::identity(n + 1, n + 1);
                let err = max_abs((jac - id).iter().copied());
                assert!(err < 1e-6, "n={n} K={k}: {err:e}");
            }
        }
    }

    #[test]
    fn lu_qi_keng_domains_evaluate_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sp = spec(2, 3.0);
        for _ in 0..20 {
            let base = random_interior_point(&sp, &mut rng, 0.9);
            let map = RepresentativeMap::new(&sp, &base).unwrap();
            for _ in 0..5 {
                let z = random_interior_point(&sp, &mut rng, 0.99);
                assert!(map.eval(&z).unwrap().iter().all(|x| x.is_finite()));
            }
        }
    }

    #[test]
    fn witness_pairs_are_obstructions() {
        for (n, k) in [(2, 0.25), (3, 0.5)] {
            let sp = spec(n, k);
            for s in classify(&sp, DEFAULT_TOL).unwrap().witness_roots {
                let locus = zero_locus(&sp, s).unwrap();
                let mut shift = vec![c(0.0, 0.0); n];
                shift[0] = c(0.1, 0.0);
                for pair in [locus.fiber_pair().unwrap(), locus.shifted_pair(shift).unwrap()] {
                    let e = representative_coordinates(&sp, &pair.q, &pair.p);
                    assert!(matches!(e, Err(Error::KernelZeroOnPath(_))), "{e:?}");
                }
            }
        }
    }

    #[test]
    fn boundary_base_is_rejected() {
        let sp = spec(1, 1.0);
        let p = DomainPoint::new(&sp, c(0.0, 0.0), vec![c(1.0 - 1e-8, 0.0)]).unwrap();
        assert!(matches!(metric_matrix(&sp, &p), Err(Error::NotInDomain(_))));
    }
}
