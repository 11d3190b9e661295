//! Membership and generic norms for the four classical Cartan domains and
//! the Hua constructions `sum_j |W_j|^{2 p_j} / N(Z, Z)^{K_j} < 1` over them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cholesky pivots at or below this make `I - Z Z*` non-definite.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CartanKind {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

/// A classical Cartan domain with its shape.
///
/// JSON form: `{"kind": "I", "shape": [m, n]}`; kinds II, III, IV take a
/// single shape entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCartanSpec", into = "RawCartanSpec")]
pub struct CartanDomainSpec {
    kind: CartanKind,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct RawCartanSpec {
    kind: CartanKind,
    shape: Vec<usize>,
}

impl TryFrom<RawCartanSpec> for CartanDomainSpec {
    type Error = Error;
    fn try_from(raw: RawCartanSpec) -> Result<Self> {
        CartanDomainSpec::new(raw.kind, &raw.shape)
    }
}

impl From<CartanDomainSpec> for RawCartanSpec {
    fn from(s: CartanDomainSpec) -> Self {
        let shape = match s.kind {
            CartanKind::I => vec![s.rows, s.cols],
            _ => vec![s.rows],
        };
        RawCartanSpec { kind: s.kind, shape }
    }
}

impl CartanDomainSpec {
    pub fn new(kind: CartanKind, shape: &[usize]) -> Result<Self> {
        let bad = |what: &str| Error::InvalidSpec(format!("kind {kind:?} needs {what}, got {shape:?}"));
        match kind {
            CartanKind::V | CartanKind::VI => Err(Error::UnsupportedKind(format!(
                "exceptional kind {kind:?} has no matrix realization here"
            ))),
            CartanKind::I => match shape {
                &[m, n] if m > 0 && n > 0 => Ok(Self { kind, rows: m, cols: n }),
                _ => Err(bad("two positive dimensions")),
            },
            _ => match shape {
                &[p] if p > 0 => Ok(Self { kind, rows: p, cols: p }),
                _ => Err(bad("one positive dimension")),
            },
        }
    }

    pub fn type_i(m: usize, n: usize) -> Result<Self> {
        Self::new(CartanKind::I, &[m, n])
    }

    pub fn type_ii(p: usize) -> Result<Self> {
        Self::new(CartanKind::II, &[p])
    }

    pub fn type_iii(q: usize) -> Result<Self> {
        Self::new(CartanKind::III, &[q])
    }

    pub fn type_iv(n: usize) -> Result<Self> {
        Self::new(CartanKind::IV, &[n])
    }

    pub fn kind(&self) -> CartanKind {
        self.kind
    }

    /// Number of independent complex entries of a point.
    pub fn independent_entries(&self) -> usize {
        let p = self.rows;
        match self.kind {
            CartanKind::I => self.rows * self.cols,
            CartanKind::II => p * (p + 1) / 2,
            CartanKind::III => p * (p - 1) / 2,
            _ => p,
        }
    }
}

/// A point given by its independent entries: row-major for kind I, the upper
/// triangle (with diagonal) for kind II, the strict upper triangle for kind
/// III, and the vector itself for kind IV.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanPoint {
    spec: CartanDomainSpec,
    entries: Vec<Complex64>,
}

impl CartanPoint {
    pub fn new(spec: &CartanDomainSpec, entries: Vec<Complex64>) -> Result<Self> {
        let want = spec.independent_entries();
        if entries.len() != want {
            return Err(Error::ShapeMismatch(format!(
                "kind {:?} point needs {want} entries, got {}",
                spec.kind,
                entries.len()
            )));
        }
        Ok(Self { spec: *spec, entries })
    }

    pub fn zero(spec: &CartanDomainSpec) -> Self {
        Self {
            spec: *spec,
            entries: vec![Complex64::new(0.0, 0.0); spec.independent_entries()],
        }
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Full matrix for kinds I-III.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let s = &self.spec;
        let zero = Complex64::new(0.0, 0.0);
        match s.kind {
            CartanKind::I => DMatrix::from_row_slice(s.rows, s.cols, &self.entries),
            CartanKind::II | CartanKind::III => {
                let p = s.rows;
                let mut m = DMatrix::from_element(p, p, zero);
                let mut it = self.entries.iter();
                let skew = s.kind == CartanKind::III;
                for i in 0..p {
                    for j in i..p {
                        if skew && i == j {
                            continue;
                        }
                        let v = *it.next().expect("entry count checked at construction");
                        m[(i, j)] = v;
                        m[(j, i)] = if skew { -v } else { v };
                    }
                }
                m
            }
            _ => DMatrix::from_row_slice(1, s.rows, &self.entries),
        }
    }
}

/// `I - Z Z*`.
fn defect_matrix(z: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::identity(z.nrows(), z.nrows()) - z * z.adjoint()
}

/// Positive-definiteness of a Hermitian matrix by Cholesky with a pivot floor.
pub fn is_positive_definite(a: &DMatrix<Complex64>) -> bool {
    let n = a.nrows();
    let mut l = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for j in 0..n {
        let d = a[(j, j)].re - (0..j).map(|k| l[(j, k)].norm_sqr()).sum::<f64>();
        if !(d > PIVOT_THRESHOLD) {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let s: Complex64 = (0..j).map(|k| l[(i, k)] * l[(j, k)].conj()).sum();
            l[(i, j)] = (a[(i, j)] - s) / d;
        }
    }
    true
}

fn check_spec(spec: &CartanDomainSpec, z: &CartanPoint) -> Result<()> {
    if &z.spec != spec {
        return Err(Error::ShapeMismatch(format!(
            "point belongs to {:?}, expected {:?}",
            z.spec, spec
        )));
    }
    Ok(())
}

/// `det(I - Z Z*)` for kinds I-III, `1 - 2|Z|^2 + |Z Z^t|^2` for kind IV.
pub fn generic_norm(spec: &CartanDomainSpec, z: &CartanPoint) -> Result<f64> {
    check_spec(spec, z)?;
    Ok(match spec.kind {
        CartanKind::IV => {
            let (norm2, square) = kind_iv_parts(&z.entries);
            1.0 - 2.0 * norm2 + square.norm_sqr()
        }
        _ => defect_matrix(&z.matrix()).determinant().re,
    })
}

/// `(|Z|^2, Z Z^t)`.
fn kind_iv_parts(z: &[Complex64]) -> (f64, Complex64) {
    (z.iter().map(|x| x.norm_sqr()).sum(), z.iter().map(|x| x * x).sum())
}

pub fn is_member(spec: &CartanDomainSpec, z: &CartanPoint) -> Result<bool> {
    check_spec(spec, z)?;
    Ok(match spec.kind {
        CartanKind::IV => {
            let (norm2, square) = kind_iv_parts(&z.entries);
            1.0 - 2.0 * norm2 + square.norm_sqr() > 0.0 && 1.0 - square.norm_sqr() > 0.0
        }
        _ => is_positive_definite(&defect_matrix(&z.matrix())),
    })
}

/// One fiber block: `N_j` coordinates with exponents `p_j` and `K_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuaBlock {
    pub dim: usize,
    pub p: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuaConstructionSpec {
    pub base: CartanDomainSpec,
    pub blocks: Vec<HuaBlock>,
}

impl HuaConstructionSpec {
    pub fn new(base: CartanDomainSpec, blocks: Vec<HuaBlock>) -> Result<Self> {
        let s = Self { base, blocks };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::InvalidSpec("at least one block is required".into()));
        }
        for (j, b) in self.blocks.iter().enumerate() {
            if b.dim == 0 || !(b.p > 0.0) || !(b.k > 0.0) || !b.p.is_finite() || !b.k.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "block {j} needs dim >= 1 and finite positive exponents, got {b:?}"
                )));
            }
        }
        Ok(())
    }

    /// The classical Hua domain: every `K_j = 1`.
    pub fn is_hua_domain(&self) -> bool {
        self.blocks.iter().all(|b| b.k == 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuaEvaluation {
    pub member: bool,
    pub generic_norm: f64,
    /// `sum_j |W_j|^{2 p_j} / N^{K_j}`; absent when `Z` is outside the base.
    pub lhs: Option<f64>,
}

pub fn hua_evaluate(
    spec: &HuaConstructionSpec,
    w_blocks: &[Vec<Complex64>],
    z: &CartanPoint,
) -> Result<HuaEvaluation> {
    spec.validate()?;
    if w_blocks.len() != spec.blocks.len()
        || w_blocks.iter().zip(&spec.blocks).any(|(w, b)| w.len() != b.dim)
    {
        return Err(Error::ShapeMismatch(format!(
            "W blocks have sizes {:?}, expected {:?}",
            w_blocks.iter().map(Vec::len).collect::<Vec<_>>(),
            spec.blocks.iter().map(|b| b.dim).collect::<Vec<_>>()
        )));
    }
    let norm = generic_norm(&spec.base, z)?;
    if !is_member(&spec.base, z)? {
        return Ok(HuaEvaluation {
            member: false,
            generic_norm: norm,
            lhs: None,
        });
    }
    let lhs: f64 = w_blocks
        .iter()
        .zip(&spec.blocks)
        .map(|(w, b)| {
            let w2: f64 = w.iter().map(|x| x.norm_sqr()).sum();
            w2.powf(b.p) / norm.powf(b.k)
        })
        .sum();
    Ok(HuaEvaluation {
        member: lhs < 1.0,
        generic_norm: norm,
        lhs: Some(lhs),
    })
}

pub fn hua_member(spec: &HuaConstructionSpec, w_blocks: &[Vec<Complex64>], z: &CartanPoint) -> Result<bool> {
    Ok(hua_evaluate(spec, w_blocks, z)?.member)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::EggDomainSpec;
    use crate::kernel::DomainPoint;
    use crate::sampling::{uniform_ball, uniform_disk};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn r(x: f64) -> Complex64 {
        c(x, 0.0)
    }

    #[test]
    fn norms_at_zero_are_one() {
        for spec in [
            CartanDomainSpec::type_i(2, 3).unwrap(),
            CartanDomainSpec::type_ii(3).unwrap(),
            CartanDomainSpec::type_iii(4).unwrap(),
            CartanDomainSpec::type_iv(5).unwrap(),
        ] {
            let z = CartanPoint::zero(&spec);
            assert!((generic_norm(&spec, &z).unwrap() - 1.0).abs() < 1e-15);
            assert!(is_member(&spec, &z).unwrap());
        }
    }

    #[test]
    fn kind_iv_hand_values() {
        let spec = CartanDomainSpec::type_iv(2).unwrap();
        let z = CartanPoint::new(&spec, vec![r(0.5), r(0.0)]).unwrap();
        assert_eq!(generic_norm(&spec, &z).unwrap(), 0.5625);
        assert!(is_member(&spec, &z).unwrap());
    }

    #[test]
    fn scalar_kind_i_examples() {
        let spec = CartanDomainSpec::type_i(1, 1).unwrap();
        let z = CartanPoint::new(&spec, vec![r(1.2)]).unwrap();
        assert!((generic_norm(&spec, &z).unwrap() + 0.44).abs() < 1e-15);
        assert!(!is_member(&spec, &z).unwrap());
        let spec = CartanDomainSpec::type_i(1, 2).unwrap();
        let z = CartanPoint::new(&spec, vec![r(0.8), r(0.7)]).unwrap();
        assert!(!is_member(&spec, &z).unwrap());
    }

    #[test]
    fn scalar_kinds_i_and_ii_agree() {
        let a = CartanDomainSpec::type_i(1, 1).unwrap();
        let b = CartanDomainSpec::type_ii(1).unwrap();
        for v in [c(0.3, 0.4), c(0.9, 0.5), c(0.0, 0.99), c(1.1, 0.0)] {
            let za = CartanPoint::new(&a, vec![v]).unwrap();
            let zb = CartanPoint::new(&b, vec![v]).unwrap();
            assert_eq!(generic_norm(&a, &za).unwrap(), generic_norm(&b, &zb).unwrap());
            assert_eq!(is_member(&a, &za).unwrap(), is_member(&b, &zb).unwrap());
        }
    }

    #[test]
    fn definiteness_not_determinant_sign() {
        let spec = CartanDomainSpec::type_i(2, 2).unwrap();
        let z = CartanPoint::new(&spec, vec![r(1.5), r(0.0), r(0.0), r(1.5)]).unwrap();
        // I - Z Z* = -1.25 I has positive determinant.
        assert!((generic_norm(&spec, &z).unwrap() - 1.5625).abs() < 1e-14);
        assert!(!is_member(&spec, &z).unwrap());
    }

    #[test]
    fn structured_kinds_build_symmetric_and_skew_matrices() {
        let s2 = CartanDomainSpec::type_ii(3).unwrap();
        let z = CartanPoint::new(&s2, (1..=6).map(|i| c(0.01 * i as f64, 0.02)).collect()).unwrap();
        let m = z.matrix();
        assert_eq!(m, m.transpose());
        let s3 = CartanDomainSpec::type_iii(3).unwrap();
        let z = CartanPoint::new(&s3, vec![c(0.1, 0.2), c(0.0, 0.3), c(-0.2, 0.0)]).unwrap();
        let m = z.matrix();
        assert_eq!(m, -m.transpose());
        assert!(is_member(&s3, &z).unwrap());
        assert!(matches!(CartanPoint::new(&s3, vec![r(0.1)]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn exceptional_kinds_rejected() {
        assert!(matches!(CartanDomainSpec::new(CartanKind::V, &[16]), Err(Error::UnsupportedKind(_))));
        assert!(matches!(CartanDomainSpec::new(CartanKind::VI, &[27]), Err(Error::UnsupportedKind(_))));
        assert!(matches!(CartanDomainSpec::new(CartanKind::I, &[2]), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn spec_json_round_trip() {
        let s = CartanDomainSpec::type_i(2, 3).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"kind":"I","shape":[2,3]}"#);
        assert_eq!(serde_json::from_str::<CartanDomainSpec>(&j).unwrap(), s);
        assert!(serde_json::from_str::<CartanDomainSpec>(r#"{"kind":"V","shape":[16]}"#).is_err());
    }

    #[test]
    fn two_block_hand_value() {
        let spec = HuaConstructionSpec::new(
            CartanDomainSpec::type_iv(2).unwrap(),
            vec![HuaBlock { dim: 1, p: 1.0, k: 1.0 }, HuaBlock { dim: 1, p: 2.0, k: 1.0 }],
        )
        .unwrap();
        assert!(spec.is_hua_domain());
        let z = CartanPoint::new(&spec.base, vec![r(0.5), r(0.0)]).unwrap();
        let e = hua_evaluate(&spec, &[vec![r(0.5)], vec![r(0.7)]], &z).unwrap();
        let lhs = e.lhs.unwrap();
        assert!((lhs - (0.25 + 0.2401) / 0.5625).abs() < 1e-15);
        assert!((lhs - 0.8713).abs() < 5e-5);
        assert!(e.member);
        assert_eq!(e.generic_norm, 0.5625);
    }

    #[test]
    fn origin_is_member() {
        let base = CartanDomainSpec::type_i(2, 2).unwrap();
        let spec = HuaConstructionSpec::new(base, vec![HuaBlock { dim: 3, p: 0.7, k: 2.0 }]).unwrap();
        assert!(hua_member(&spec, &[vec![r(0.0); 3]], &CartanPoint::zero(&base)).unwrap());
    }

    #[test]
    fn invalid_blocks() {
        let base = CartanDomainSpec::type_iv(3).unwrap();
        for b in [HuaBlock { dim: 0, p: 1.0, k: 1.0 }, HuaBlock { dim: 1, p: 0.0, k: 1.0 }, HuaBlock { dim: 1, p: 1.0, k: -1.0 }] {
            assert!(matches!(HuaConstructionSpec::new(base, vec![b]), Err(Error::InvalidSpec(_))));
        }
        let spec = HuaConstructionSpec::new(base, vec![HuaBlock { dim: 2, p: 1.0, k: 1.0 }]).unwrap();
        let z = CartanPoint::zero(&base);
        assert!(matches!(hua_member(&spec, &[vec![r(0.0)]], &z), Err(Error::ShapeMismatch(_))));
    }

    /// Egg domain as a one-block construction over the ball `R_I(1, n)`.
    fn egg_constructions(n: usize, k: f64) -> [HuaConstructionSpec; 2] {
        let base = CartanDomainSpec::type_i(1, n).unwrap();
        [
            HuaConstructionSpec::new(base, vec![HuaBlock { dim: 1, p: k, k: 1.0 }]).unwrap(),
            HuaConstructionSpec::new(base, vec![HuaBlock { dim: 1, p: 1.0, k: 1.0 / k }]).unwrap(),
        ]
    }

    #[test]
    fn egg_domain_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for (n, k) in [(1, 1.0), (2, 0.25), (3, 3.0), (2, 0.5)] {
            let egg = EggDomainSpec::new(n, k).unwrap();
            let hua = egg_constructions(n, k);
            let mut inside = 0;
            for _ in 0..10_000 {
                let w = uniform_disk(&mut rng) * 1.1;
                let z: Vec<Complex64> = uniform_ball(&mut rng, n).into_iter().map(|x| x * 1.1).collect();
                let expected = DomainPoint::new(&egg, w, z.clone()).is_ok();
                inside += usize::from(expected);
                let point = CartanPoint::new(&hua[0].base, z).unwrap();
                for h in &hua {
                    assert_eq!(hua_member(h, &[vec![w]], &point).unwrap(), expected, "n={n} K={k}");
                }
            }
            assert!(inside > 200 && inside < 9800, "{inside}");
        }
    }

    #[test]
    fn shrinking_fiber_preserves_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = CartanDomainSpec::type_iv(3).unwrap();
        let spec = HuaConstructionSpec::new(
            base,
            vec![HuaBlock { dim: 2, p: 0.8, k: 1.5 }, HuaBlock { dim: 1, p: 2.0, k: 0.5 }],
        )
        .unwrap();
        let mut members = 0;
        for _ in 0..2000 {
            let z: Vec<Complex64> = uniform_ball(&mut rng, 3).into_iter().map(|x| x * 0.5).collect();
            let z = CartanPoint::new(&base, z).unwrap();
            let w: Vec<Vec<Complex64>> = vec![uniform_ball(&mut rng, 2), vec![uniform_disk(&mut rng)]]
                .into_iter()
                .map(|b| b.into_iter().map(|x| x * 0.6).collect())
                .collect();
            if !hua_member(&spec, &w, &z).unwrap() {
                continue;
            }
            members += 1;
            let t: f64 = rng.random();
            let block = rng.random_range(0..2);
            let mut shrunk = w.clone();
            shrunk[block].iter_mut().for_each(|x| *x *= t);
            assert!(hua_member(&spec, &shrunk, &z).unwrap());
        }
        assert!(members > 100);
    }
}
