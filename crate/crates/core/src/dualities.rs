//! Catalog of duality functions and their evaluation.
//!
//! Every family is evaluated directly when all intermediate factors stay in
//! a safe floating-point range, and in log space with an explicit sign
//! otherwise. Hermite polynomials follow the physicists' convention
//! `H_{n+1} = 2x H_n - 2n H_{n-1}`: raising `e^{-x²/2}` with `x - d/dx`
//! produces exactly these polynomials.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::tolerances::SIMPLEX_SUM;

/// Threshold (in natural log) beyond which direct products are abandoned.
const LOG_SAFE: f64 = 690.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DualityFamily {
    /// `D(x,n) = Π x_i^{n_i}`.
    Monomial,
    /// `D(x,n) = Π (1-x_i)^{n_i}`, used for positive selection.
    ReflectedMonomial,
    /// `D(x,y) = exp(Σ x_i y_i)`.
    Exponential,
    /// `D(x,n) = e^{-x²/2} H_n(x)`.
    HermiteWeighted,
    /// `D_N(k,n) = C(k,n) / C(N,n)`.
    HypergeometricFinite { n: u64 },
    /// `d(z,n) = z^n Γ(m/2) / Γ(m/2 + n)`.
    GammaWeighted { m: f64 },
    /// `Π_i x_i^{k_i} / Γ(2θ/(d-1) + k_i)` over the full simplex coordinates.
    ProductGamma { theta: f64, d: usize },
    /// `Π_i k_i!/(k_i-ξ_i)! · Γ(s)/Γ(ξ_i+s)` with `s = 2θ/(d-1)`.
    MoranSelfDual { n: u64, theta: f64, d: usize },
    /// `Π_{ξ_i ≥ 1} x_i^{ξ_i} / (ξ_i - 1)!` (zero-mutation limit).
    LimitingSip,
    /// `Π_{ξ_i ≥ 1} η_i! / ((η_i-ξ_i)! (ξ_i-1)!)` (zero-mutation self-duality limit).
    LimitingMoranSelfDual,
}

/// Argument of a duality function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalPoint {
    /// Continuous first argument, discrete second argument.
    Mixed { x: Vec<f64>, n: Vec<u64> },
    /// Both arguments continuous.
    Continuous { x: Vec<f64>, y: Vec<f64> },
    /// Both arguments discrete.
    Discrete { k: Vec<u64>, xi: Vec<u64> },
}

impl EvalPoint {
    pub fn mixed(x: impl Into<Vec<f64>>, n: impl Into<Vec<u64>>) -> Self {
        EvalPoint::Mixed { x: x.into(), n: n.into() }
    }

    pub fn continuous(x: impl Into<Vec<f64>>, y: impl Into<Vec<f64>>) -> Self {
        EvalPoint::Continuous { x: x.into(), y: y.into() }
    }

    pub fn discrete(k: impl Into<Vec<u64>>, xi: impl Into<Vec<u64>>) -> Self {
        EvalPoint::Discrete { k: k.into(), xi: xi.into() }
    }
}

/// A real number stored as `sign · exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: f64,
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0.0, ln_abs: f64::NEG_INFINITY };
    pub const ONE: SignedLog = SignedLog { sign: 1.0, ln_abs: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            SignedLog { sign: v.signum(), ln_abs: v.abs().ln() }
        }
    }

    fn mul(self, other: SignedLog) -> Self {
        if self.sign == 0.0 || other.sign == 0.0 {
            Self::ZERO
        } else {
            SignedLog { sign: self.sign * other.sign, ln_abs: self.ln_abs + other.ln_abs }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0.0
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }
}

/// Value, gradient and Hessian of a duality function in its continuous argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Partials {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
}

impl DualityFamily {
    pub fn kind(&self) -> &'static str {
        match self {
            DualityFamily::Monomial => "monomial",
            DualityFamily::ReflectedMonomial => "reflected-monomial",
            DualityFamily::Exponential => "exponential",
            DualityFamily::HermiteWeighted => "hermite-weighted",
            DualityFamily::HypergeometricFinite { .. } => "hypergeometric-finite",
            DualityFamily::GammaWeighted { .. } => "gamma-weighted",
            DualityFamily::ProductGamma { .. } => "product-gamma",
            DualityFamily::MoranSelfDual { .. } => "moran-self-dual",
            DualityFamily::LimitingSip => "limiting-sip",
            DualityFamily::LimitingMoranSelfDual => "limiting-moran-self-dual",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
            }
        };
        let types = |d: usize| {
            if d >= 2 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("d must be >= 2, got {d}")))
            }
        };
        match *self {
            DualityFamily::GammaWeighted { m } => positive("m", m),
            DualityFamily::ProductGamma { theta, d } => {
                positive("theta", theta)?;
                types(d)
            }
            DualityFamily::MoranSelfDual { theta, d, .. } => {
                positive("theta", theta)?;
                types(d)
            }
            _ => Ok(()),
        }
    }

    /// True when the family pairs a continuous argument with a discrete one.
    pub fn is_mixed(&self) -> bool {
        matches!(
            self,
            DualityFamily::Monomial
                | DualityFamily::ReflectedMonomial
                | DualityFamily::HermiteWeighted
                | DualityFamily::GammaWeighted { .. }
                | DualityFamily::ProductGamma { .. }
                | DualityFamily::LimitingSip
        )
    }

    /// True for the zero-mutation limiting families whose dual side carries
    /// the occupied-site indicator.
    pub fn is_limiting(&self) -> bool {
        matches!(self, DualityFamily::LimitingSip | DualityFamily::LimitingMoranSelfDual)
    }
}

/// Evaluates `family` at `p`.
pub fn evaluate(family: &DualityFamily, p: &EvalPoint) -> Result<f64> {
    let log = evaluate_log(family, p)?;
    if log.is_zero() {
        return Ok(0.0);
    }
    if log.ln_abs.abs() < LOG_SAFE {
        let direct = evaluate_direct(family, p)?;
        if direct.is_finite() && direct != 0.0 {
            return Ok(direct);
        }
        Ok(log.to_f64())
    } else if log.ln_abs > f64::MAX.ln() {
        Err(Error::Numerical(format!(
            "{} value exp({:.3}) overflows f64",
            family.kind(),
            log.ln_abs
        )))
    } else {
        Ok(log.to_f64())
    }
}

fn ensure_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::dims(format!("{what} of length {want}"), format!("length {got}")))
    }
}

fn wrong_point(family: &DualityFamily, p: &EvalPoint) -> Error {
    let got = match p {
        EvalPoint::Mixed { .. } => "mixed",
        EvalPoint::Continuous { .. } => "continuous",
        EvalPoint::Discrete { .. } => "discrete",
    };
    Error::Domain(format!("{} cannot be evaluated at a {got} point", family.kind()))
}

fn check_simplex(x: &[f64]) -> Result<()> {
    if x.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::Domain(format!("simplex point has a negative entry: {x:?}")));
    }
    let s: f64 = x.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_SUM {
        return Err(Error::Domain(format!("simplex point sums to {s}, not 1")));
    }
    Ok(())
}

fn shape_parameter(theta: f64, d: usize) -> f64 {
    2.0 * theta / (d as f64 - 1.0)
}

fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `Π_{j<n} (a + j)`.
fn rising(a: f64, n: u64) -> f64 {
    (0..n).fold(1.0, |acc, j| acc * (a + j as f64))
}

/// `Π_{j<n} (k - j)`, the falling factorial `k!/(k-n)!`.
fn falling(k: u64, n: u64) -> f64 {
    (0..n).fold(1.0, |acc, j| acc * (k - j) as f64)
}

fn ln_falling(k: u64, n: u64) -> f64 {
    (0..n).map(|j| ((k - j) as f64).ln()).sum()
}

fn pow_log(x: f64, n: u64) -> SignedLog {
    if n == 0 {
        return SignedLog::ONE;
    }
    if x == 0.0 {
        return SignedLog::ZERO;
    }
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    SignedLog { sign, ln_abs: n as f64 * x.abs().ln() }
}

fn powu(x: f64, n: u64) -> f64 {
    if n <= i32::MAX as u64 {
        x.powi(n as i32)
    } else {
        x.powf(n as f64)
    }
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite(n: u64, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..n {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Hermite polynomial in log space, rescaling the recurrence as it grows.
fn hermite_log(n: u64, x: f64) -> SignedLog {
    let (mut prev, mut cur, mut scale) = (0.0f64, 1.0f64, 0.0f64);
    for j in 0..n {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
        let m = cur.abs().max(prev.abs());
        if m > 1e150 {
            prev /= m;
            cur /= m;
            scale += m.ln();
        }
    }
    let mut v = SignedLog::from_f64(cur);
    if !v.is_zero() {
        v.ln_abs += scale;
    }
    v
}

/// Signed-log evaluation. Never overflows.
pub fn evaluate_log(family: &DualityFamily, p: &EvalPoint) -> Result<SignedLog> {
    family.validate()?;
    match (family, p) {
        (DualityFamily::Monomial, EvalPoint::Mixed { x, n }) => {
            ensure_len("counts", n.len(), x.len())?;
            Ok(x.iter().zip(n).fold(SignedLog::ONE, |acc, (&xi, &ni)| acc.mul(pow_log(xi, ni))))
        }
        (DualityFamily::ReflectedMonomial, EvalPoint::Mixed { x, n }) => {
            ensure_len("counts", n.len(), x.len())?;
            Ok(x
                .iter()
                .zip(n)
                .fold(SignedLog::ONE, |acc, (&xi, &ni)| acc.mul(pow_log(1.0 - xi, ni))))
        }
        (DualityFamily::Exponential, EvalPoint::Continuous { x, y }) => {
            ensure_len("y", y.len(), x.len())?;
            let e: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
            Ok(SignedLog { sign: 1.0, ln_abs: e })
        }
        (DualityFamily::HermiteWeighted, EvalPoint::Mixed { x, n }) => {
            ensure_len("x", x.len(), 1)?;
            ensure_len("n", n.len(), 1)?;
            let mut h = hermite_log(n[0], x[0]);
            if !h.is_zero() {
                h.ln_abs -= x[0] * x[0] / 2.0;
            }
            Ok(h)
        }
        (DualityFamily::HypergeometricFinite { n: big_n }, EvalPoint::Discrete { k, xi }) => {
            ensure_len("k", k.len(), 1)?;
            ensure_len("n", xi.len(), 1)?;
            let (k, n) = (k[0], xi[0]);
            if n > *big_n || k > *big_n {
                return Err(Error::Domain(format!("D_N(k={k}, n={n}) requires k, n <= N={big_n}")));
            }
            if n > k {
                return Ok(SignedLog::ZERO);
            }
            Ok(SignedLog { sign: 1.0, ln_abs: ln_falling(k, n) - ln_falling(*big_n, n) })
        }
        (DualityFamily::GammaWeighted { m }, EvalPoint::Mixed { x, n }) => {
            ensure_len("z", x.len(), 1)?;
            ensure_len("n", n.len(), 1)?;
            let half = m / 2.0;
            let mut v = pow_log(x[0], n[0]);
            if !v.is_zero() {
                v.ln_abs += ln_gamma(half) - ln_gamma(half + n[0] as f64);
            }
            Ok(v)
        }
        (DualityFamily::ProductGamma { theta, d }, EvalPoint::Mixed { x, n }) => {
            ensure_len("x", x.len(), *d)?;
            ensure_len("k", n.len(), *d)?;
            check_simplex(x)?;
            let s = shape_parameter(*theta, *d);
            Ok(x.iter().zip(n).fold(SignedLog::ONE, |acc, (&xi, &ki)| {
                let mut f = pow_log(xi, ki);
                if !f.is_zero() {
                    f.ln_abs -= ln_gamma(s + ki as f64);
                }
                acc.mul(f)
            }))
        }
        (DualityFamily::MoranSelfDual { n: big_n, theta, d }, EvalPoint::Discrete { k, xi }) => {
            ensure_len("k", k.len(), *d)?;
            ensure_len("xi", xi.len(), *d)?;
            let total: u64 = k.iter().sum();
            if total != *big_n {
                return Err(Error::Domain(format!("k sums to {total}, expected N={big_n}")));
            }
            let dual_total: u64 = xi.iter().sum();
            if dual_total > *big_n {
                return Err(Error::Domain(format!("xi sums to {dual_total} > N={big_n}")));
            }
            if k.iter().zip(xi).any(|(a, b)| b > a) {
                return Ok(SignedLog::ZERO);
            }
            let s = shape_parameter(*theta, *d);
            let ln_abs = k
                .iter()
                .zip(xi)
                .map(|(&ki, &xii)| {
                    ln_falling(ki, xii) + ln_gamma(s) - ln_gamma(s + xii as f64)
                })
                .sum();
            Ok(SignedLog { sign: 1.0, ln_abs })
        }
        (DualityFamily::LimitingSip, EvalPoint::Mixed { x, n }) => {
            ensure_len("xi", n.len(), x.len())?;
            Ok(x.iter().zip(n).filter(|(_, &ni)| ni >= 1).fold(
                SignedLog::ONE,
                |acc, (&xi, &ni)| {
                    let mut f = pow_log(xi, ni);
                    if !f.is_zero() {
                        f.ln_abs -= ln_factorial(ni - 1);
                    }
                    acc.mul(f)
                },
            ))
        }
        (DualityFamily::LimitingMoranSelfDual, EvalPoint::Discrete { k, xi }) => {
            ensure_len("xi", xi.len(), k.len())?;
            if k.iter().zip(xi).any(|(a, b)| b > a) {
                return Ok(SignedLog::ZERO);
            }
            let ln_abs = k
                .iter()
                .zip(xi)
                .filter(|(_, &x)| x >= 1)
                .map(|(&ki, &xii)| ln_falling(ki, xii) - ln_factorial(xii - 1))
                .sum();
            Ok(SignedLog { sign: 1.0, ln_abs })
        }
        _ => Err(wrong_point(family, p)),
    }
}

/// Plain floating-point evaluation. Callers should prefer [`evaluate`], which
/// falls back to log space when factors leave the safe range.
pub fn evaluate_direct(family: &DualityFamily, p: &EvalPoint) -> Result<f64> {
    family.validate()?;
    match (family, p) {
        (DualityFamily::Monomial, EvalPoint::Mixed { x, n }) => {
            ensure_len("counts", n.len(), x.len())?;
            Ok(x.iter().zip(n).map(|(&xi, &ni)| powu(xi, ni)).product())
        }
        (DualityFamily::ReflectedMonomial, EvalPoint::Mixed { x, n }) => {
            ensure_len("counts", n.len(), x.len())?;
            Ok(x.iter().zip(n).map(|(&xi, &ni)| powu(1.0 - xi, ni)).product())
        }
        (DualityFamily::Exponential, EvalPoint::Continuous { x, y }) => {
            ensure_len("y", y.len(), x.len())?;
            Ok(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().exp())
        }
        (DualityFamily::HermiteWeighted, EvalPoint::Mixed { x, n }) => {
            ensure_len("x", x.len(), 1)?;
            ensure_len("n", n.len(), 1)?;
            Ok((-x[0] * x[0] / 2.0).exp() * hermite(n[0], x[0]))
        }
        (DualityFamily::HypergeometricFinite { n: big_n }, EvalPoint::Discrete { k, xi }) => {
            ensure_len("k", k.len(), 1)?;
            ensure_len("n", xi.len(), 1)?;
            let (k, n) = (k[0], xi[0]);
            if n > *big_n || k > *big_n {
                return Err(Error::Domain(format!("D_N(k={k}, n={n}) requires k, n <= N={big_n}")));
            }
            if n > k {
                return Ok(0.0);
            }
            Ok((0..n).fold(1.0, |acc, j| acc * (k - j) as f64 / (big_n - j) as f64))
        }
        (DualityFamily::GammaWeighted { m }, EvalPoint::Mixed { x, n }) => {
            ensure_len("z", x.len(), 1)?;
            ensure_len("n", n.len(), 1)?;
            Ok(powu(x[0], n[0]) / rising(m / 2.0, n[0]))
        }
        (DualityFamily::ProductGamma { theta, d }, EvalPoint::Mixed { x, n }) => {
            ensure_len("x", x.len(), *d)?;
            ensure_len("k", n.len(), *d)?;
            check_simplex(x)?;
            let s = shape_parameter(*theta, *d);
            Ok(x.iter().zip(n).map(|(&xi, &ki)| product_gamma_factor(xi, ki, s)).product())
        }
        (DualityFamily::MoranSelfDual { n: big_n, theta, d }, EvalPoint::Discrete { k, xi }) => {
            ensure_len("k", k.len(), *d)?;
            ensure_len("xi", xi.len(), *d)?;
            let total: u64 = k.iter().sum();
            if total != *big_n {
                return Err(Error::Domain(format!("k sums to {total}, expected N={big_n}")));
            }
            if xi.iter().sum::<u64>() > *big_n {
                return Err(Error::Domain(format!("xi sums to more than N={big_n}")));
            }
            if k.iter().zip(xi).any(|(a, b)| b > a) {
                return Ok(0.0);
            }
            let s = shape_parameter(*theta, *d);
            Ok(k.iter().zip(xi).map(|(&ki, &xii)| falling(ki, xii) / rising(s, xii)).product())
        }
        (DualityFamily::LimitingSip, EvalPoint::Mixed { x, n }) => {
            ensure_len("xi", n.len(), x.len())?;
            Ok(x.iter()
                .zip(n)
                .filter(|(_, &ni)| ni >= 1)
                .map(|(&xi, &ni)| powu(xi, ni) / falling(ni - 1, ni - 1))
                .product())
        }
        (DualityFamily::LimitingMoranSelfDual, EvalPoint::Discrete { k, xi }) => {
            ensure_len("xi", xi.len(), k.len())?;
            if k.iter().zip(xi).any(|(a, b)| b > a) {
                return Ok(0.0);
            }
            Ok(k.iter()
                .zip(xi)
                .filter(|(_, &x)| x >= 1)
                .map(|(&ki, &xii)| falling(ki, xii) / falling(xii - 1, xii - 1))
                .product())
        }
        _ => Err(wrong_point(family, p)),
    }
}

/// One factor `x^k / Γ(s + k)` of the product-gamma family.
pub fn product_gamma_factor(x: f64, k: u64, s: f64) -> f64 {
    powu(x, k) / (gamma(s) * rising(s, k))
}

/// Number of occupied sites of a configuration.
pub fn occupied_sites(xi: &[u64]) -> usize {
    xi.iter().filter(|&&v| v >= 1).count()
}

/// `δ_{x,y}/μ(x)`: the diagonal self-duality function of a chain reversible
/// with respect to `mu`.
pub fn cheap_self_duality(mu: &[f64]) -> Result<DMatrix<f64>> {
    if mu.is_empty() {
        return Err(Error::InvalidParameter("empty probability vector".into()));
    }
    if let Some(v) = mu.iter().find(|&&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("mass must be strictly positive, got {v}")));
    }
    let s: f64 = mu.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_SUM {
        return Err(Error::InvalidParameter(format!("masses sum to {s}, not 1")));
    }
    Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        mu.len(),
        mu.iter().map(|v| 1.0 / v),
    )))
}

/// Applies a symmetry `S` to a duality matrix: returns `S·D`.
pub fn transform_by_symmetry(s: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if s.ncols() != d.nrows() {
        return Err(Error::dims(
            format!("S with {} columns", d.nrows()),
            format!("{}x{}", s.nrows(), s.ncols()),
        ));
    }
    Ok(s * d)
}

/// Per-coordinate factor `g(x)` with its first two derivatives.
#[derive(Clone, Copy)]
struct Factor {
    g: f64,
    dg: f64,
    d2g: f64,
}

fn power_factor(x: f64, k: u64) -> Factor {
    let kf = k as f64;
    Factor {
        g: powu(x, k),
        dg: if k >= 1 { kf * powu(x, k - 1) } else { 0.0 },
        d2g: if k >= 2 { kf * (kf - 1.0) * powu(x, k - 2) } else { 0.0 },
    }
}

fn product_partials(scale: f64, factors: &[Factor]) -> Partials {
    let d = factors.len();
    let others = |skip: &[usize]| -> f64 {
        factors
            .iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .map(|(_, f)| f.g)
            .product()
    };
    let value = scale * others(&[]);
    let grad = (0..d).map(|i| scale * factors[i].dg * others(&[i])).collect();
    let hess = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            scale * factors[i].d2g * others(&[i])
        } else {
            scale * factors[i].dg * factors[j].dg * others(&[i, j])
        }
    });
    Partials { value, grad, hess }
}

/// Analytic value, gradient and Hessian in the continuous argument `x`, for
/// families where these are available in closed form. Returns `None` for
/// families without analytic derivatives (callers fall back to finite
/// differences) and an error for families with no continuous argument.
pub fn partials_in_x(family: &DualityFamily, p: &EvalPoint) -> Result<Option<Partials>> {
    family.validate()?;
    match (family, p) {
        (DualityFamily::Monomial, EvalPoint::Mixed { x, n }) => {
            ensure_len("counts", n.len(), x.len())?;
            let f: Vec<_> = x.iter().zip(n).map(|(&a, &b)| power_factor(a, b)).collect();
            Ok(Some(product_partials(1.0, &f)))
        }
        (DualityFamily::ReflectedMonomial, EvalPoint::Mixed { x, n }) => {
            ensure_len("counts", n.len(), x.len())?;
            let f: Vec<_> = x
                .iter()
                .zip(n)
                .map(|(&a, &b)| {
                    let p = power_factor(1.0 - a, b);
                    Factor { g: p.g, dg: -p.dg, d2g: p.d2g }
                })
                .collect();
            Ok(Some(product_partials(1.0, &f)))
        }
        (DualityFamily::GammaWeighted { m }, EvalPoint::Mixed { x, n }) => {
            ensure_len("z", x.len(), 1)?;
            ensure_len("n", n.len(), 1)?;
            let scale = 1.0 / rising(m / 2.0, n[0]);
            Ok(Some(product_partials(scale, &[power_factor(x[0], n[0])])))
        }
        (DualityFamily::ProductGamma { theta, d }, EvalPoint::Mixed { x, n }) => {
            ensure_len("x", x.len(), *d)?;
            ensure_len("k", n.len(), *d)?;
            let s = shape_parameter(*theta, *d);
            let scale: f64 = n.iter().map(|&k| 1.0 / (gamma(s) * rising(s, k))).product();
            let f: Vec<_> = x.iter().zip(n).map(|(&a, &b)| power_factor(a, b)).collect();
            Ok(Some(product_partials(scale, &f)))
        }
        (DualityFamily::LimitingSip, EvalPoint::Mixed { x, n }) => {
            ensure_len("xi", n.len(), x.len())?;
            let scale: f64 = n
                .iter()
                .filter(|&&k| k >= 1)
                .map(|&k| 1.0 / falling(k - 1, k - 1))
                .product();
            let f: Vec<_> = x
                .iter()
                .zip(n)
                .map(|(&a, &b)| power_factor(a, b))
                .collect();
            Ok(Some(product_partials(scale, &f)))
        }
        (DualityFamily::HermiteWeighted, EvalPoint::Mixed { x, n }) => {
            ensure_len("x", x.len(), 1)?;
            ensure_len("n", n.len(), 1)?;
            let (x, n) = (x[0], n[0]);
            let w = (-x * x / 2.0).exp();
            let h = |j: i64| if j < 0 { 0.0 } else { hermite(j as u64, x) };
            let nf = n as f64;
            let ni = n as i64;
            let value = w * h(ni);
            let first = w * (-x * h(ni) + 2.0 * nf * h(ni - 1));
            let second = w
                * ((x * x - 1.0) * h(ni) - 4.0 * nf * x * h(ni - 1)
                    + 4.0 * nf * (nf - 1.0) * h(ni - 2));
            Ok(Some(Partials {
                value,
                grad: vec![first],
                hess: DMatrix::from_element(1, 1, second),
            }))
        }
        (DualityFamily::Exponential, EvalPoint::Continuous { x, y }) => {
            ensure_len("y", y.len(), x.len())?;
            let v = evaluate_direct(family, p)?;
            let d = x.len();
            Ok(Some(Partials {
                value: v,
                grad: y.iter().map(|yi| yi * v).collect(),
                hess: DMatrix::from_fn(d, d, |i, j| y[i] * y[j] * v),
            }))
        }
        (DualityFamily::HypergeometricFinite { .. }, _)
        | (DualityFamily::MoranSelfDual { .. }, _)
        | (DualityFamily::LimitingMoranSelfDual, _) => Err(Error::Unsupported(format!(
            "{} has no continuous argument",
            family.kind()
        ))),
        _ => Err(wrong_point(family, p)),
    }
}
