//! Coefficients of the egg-domain kernel.
//!
//! The kernel of `{ |w|^{2K} + |z|^2 < 1 }` is a finite combination
//! `F(Y) = sum_i b_i i! Y^{i+1}` whose coefficients are the Newton-basis
//! coordinates of
//!
//! ```text
//! P(x) = (x + 1) (x + 1 + K) (x + 1 + 2K) ... (x + 1 + nK)
//! ```
//!
//! in the rising factorials `(x+1)(x+2)...(x+i)`. Two independent routes
//! compute them: the triangular recurrence obtained by evaluating `P` at
//! `x = -2, -3, ...`, and the explicit alternating sum. [`KernelCoefficients::compute`]
//! runs both and uses their disagreement as a cancellation detector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative disagreement between the two coefficient routes above which the
/// recurrence is recomputed in double-double arithmetic.
pub const CANCELLATION_THRESHOLD: f64 = 1e-9;

/// The pair `(n, K)` defining the egg domain `|w|^{2K} + |z_1|^2 + ... + |z_n|^2 < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EggDomainSpec {
    n: usize,
    #[serde(rename = "K")]
    k: f64,
}

impl EggDomainSpec {
    pub fn new(n: usize, k: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("base dimension n must be at least 1".into()));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidSpec(format!("fiber exponent K must be positive, got {k}")));
        }
        Ok(Self { n, k })
    }

    /// Complex dimension of the base ball.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Fiber exponent.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Total complex dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.n + 1
    }
}

/// Dense real polynomial, coefficients in ascending degree order.
///
/// The coefficient vector is either empty (zero polynomial) or ends in a
/// nonzero entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPolynomial {
    coefficients: Vec<f64>,
}

impl RealPolynomial {
    pub fn new(mut coefficients: Vec<f64>) -> Self {
        while coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, x: num_complex::Complex64) -> num_complex::Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(num_complex::Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// Multiply by the monic linear factor `(x + root_shift)`.
    fn mul_linear(&self, shift: f64) -> Self {
        let mut out = vec![0.0; self.coefficients.len() + 1];
        for (i, &c) in self.coefficients.iter().enumerate() {
            out[i] += c * shift;
            out[i + 1] += c;
        }
        Self::new(out)
    }
}

/// `i!` as an exact product of small integers (exact in f64 up to 22!).
pub fn factorial(i: usize) -> f64 {
    (2..=i).fold(1.0, |acc, j| acc * j as f64)
}

/// `i! / (i - k)! = i (i-1) ... (i-k+1)`.
fn falling_factorial(i: usize, k: usize) -> f64 {
    ((i - k + 1)..=i).fold(1.0, |acc, j| acc * j as f64)
}

/// Expanded `P(x) = (x+1) prod_{j=1}^{n} (x + 1 + jK)`.
pub fn build_p(spec: &EggDomainSpec) -> RealPolynomial {
    (1..=spec.n()).fold(RealPolynomial::new(vec![1.0, 1.0]), |p, j| {
        p.mul_linear(1.0 + j as f64 * spec.k())
    })
}

/// `P(x)` from the product form.
pub fn p_value(spec: &EggDomainSpec, x: f64) -> f64 {
    (1..=spec.n()).fold(x + 1.0, |acc, j| acc * (x + 1.0 + j as f64 * spec.k()))
}

/// Result of the recurrence/closed-form cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    /// Largest elementwise relative disagreement between the two routes.
    pub max_rel_disagreement: f64,
    /// Whether the compensated recomputation was triggered.
    pub compensated: bool,
}

/// The vector `b_0, ..., b_{n+1}` for one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCoefficients {
    b: Vec<f64>,
    spec: EggDomainSpec,
    check: Option<CrossCheck>,
}

impl KernelCoefficients {
    /// Runs both routes, compares them, and falls back to the recurrence in
    /// double-double arithmetic if they disagree by more than
    /// [`CANCELLATION_THRESHOLD`].
    pub fn compute(spec: &EggDomainSpec) -> Self {
        let rec = coefficients_by_recurrence(spec);
        let closed = coefficients_by_closed_form(spec);
        let disagreement = max_relative_disagreement(&rec.b, &closed.b);
        if disagreement > CANCELLATION_THRESHOLD {
            let mut comp = coefficients_compensated(spec);
            comp.check = Some(CrossCheck {
                max_rel_disagreement: disagreement,
                compensated: true,
            });
            comp
        } else {
            Self {
                check: Some(CrossCheck {
                    max_rel_disagreement: disagreement,
                    compensated: false,
                }),
                ..rec
            }
        }
    }

    /// Coefficients `b_0 .. b_{n+1}`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn spec(&self) -> &EggDomainSpec {
        &self.spec
    }

    pub fn cross_check(&self) -> Option<CrossCheck> {
        self.check
    }

    /// `b_i i!` for `i = 0 ..= n + 1`, the coefficients of `F(Y) / Y`.
    pub fn weighted(&self) -> Vec<f64> {
        self.b
            .iter()
            .enumerate()
            .map(|(i, &b)| b * factorial(i))
            .collect()
    }
}

/// Wire form `{"n": int, "K": float, "b": [float, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientsRecord {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub b: Vec<f64>,
}

impl From<&KernelCoefficients> for CoefficientsRecord {
    fn from(c: &KernelCoefficients) -> Self {
        Self {
            n: c.spec.n(),
            k: c.spec.k(),
            b: c.b.clone(),
        }
    }
}

impl TryFrom<CoefficientsRecord> for KernelCoefficients {
    type Error = Error;

    fn try_from(r: CoefficientsRecord) -> Result<Self> {
        let spec = EggDomainSpec::new(r.n, r.k)?;
        if r.b.len() != spec.n() + 2 {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coefficients, got {}",
                spec.n() + 2,
                r.b.len()
            )));
        }
        Ok(Self {
            b: r.b,
            spec,
            check: None,
        })
    }
}

/// Triangular recurrence: `P(-i-1) = sum_{k<=i} b_k (-1)^k i!/(i-k)!`.
pub fn coefficients_by_recurrence(spec: &EggDomainSpec) -> KernelCoefficients {
    let top = spec.n() + 1;
    let mut b = vec![0.0; top + 1];
    for i in 1..=top {
        let mut acc = p_value(spec, -(i as f64) - 1.0);
        for (k, &bk) in b.iter().enumerate().take(i).skip(1) {
            acc -= bk * sign(k) * falling_factorial(i, k);
        }
        b[i] = acc / (sign(i) * factorial(i));
    }
    KernelCoefficients {
        b,
        spec: *spec,
        check: None,
    }
}

/// Explicit form `b_i = sum_{j=1}^{i} (-1)^j P(-j-1) / (j! (i-j)!)`.
///
/// The alternating sum cancels badly for small `K` and large `n` (relative
/// error near 1e-2 at `n = 8, K = 0.1` in plain doubles), so the products
/// and the sum are carried in double-double arithmetic.
pub fn coefficients_by_closed_form(spec: &EggDomainSpec) -> KernelCoefficients {
    let top = spec.n() + 1;
    let b = (0..=top)
        .map(|i| {
            (1..=i)
                .map(|j| {
                    p_value_dd(spec, -(j as f64) - 1.0)
                        .scale(sign(j))
                        .div(factorial(j) * factorial(i - j))
                })
                .fold(DoubleDouble::ZERO, DoubleDouble::add)
                .to_f64()
        })
        .collect();
    KernelCoefficients {
        b,
        spec: *spec,
        check: None,
    }
}

/// The recurrence again, carried in double-double arithmetic.
fn coefficients_compensated(spec: &EggDomainSpec) -> KernelCoefficients {
    let top = spec.n() + 1;
    let mut b = vec![DoubleDouble::ZERO; top + 1];
    for i in 1..=top {
        let mut acc = p_value_dd(spec, -(i as f64) - 1.0);
        for k in 1..i {
            acc = acc.add(b[k].scale(-sign(k) * falling_factorial(i, k)));
        }
        b[i] = acc.div(sign(i) * factorial(i));
    }
    KernelCoefficients {
        b: b.into_iter().map(DoubleDouble::to_f64).collect(),
        spec: *spec,
        check: None,
    }
}

fn p_value_dd(spec: &EggDomainSpec, x: f64) -> DoubleDouble {
    let x1 = DoubleDouble::from_sum(x, 1.0);
    (1..=spec.n()).fold(x1, |acc, j| {
        acc.mul(DoubleDouble::from_prod(j as f64, spec.k()).add(x1))
    })
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Error-free transformation `a + b = s + e`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Error-free transformation `a * b = p + e`.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    fn from_sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Self { hi, lo }
    }

    fn from_prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Self { hi, lo }
    }

    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        Self::renorm(s, e + self.lo + o.lo)
    }

    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        Self::renorm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn scale(self, f: f64) -> Self {
        self.mul(Self { hi: f, lo: 0.0 })
    }

    fn div(self, d: f64) -> Self {
        let q = self.hi / d;
        let (p, e) = two_prod(q, d);
        let r = (self.hi - p - e + self.lo) / d;
        Self::renorm(q, r)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Summation with a second running word for the rounding errors.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (s, c) = values.into_iter().fold((0.0, 0.0), |(s, c), v| {
        let (s, e) = two_sum(s, v);
        (s, c + e)
    });
    s + c
}

/// Elementwise `|a-b| / max(|a|,|b|)`, with exact agreement (including two
/// zeros) counting as zero.
pub fn max_relative_disagreement(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let scale = x.abs().max(y.abs());
            if x == y {
                0.0
            } else {
                (x - y).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}
