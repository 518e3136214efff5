//! Truncated matrix representations of the Heisenberg and SU(1,1) algebras.
//!
//! Continuous representations act on coefficient vectors in the monomial
//! basis `x^0, ..., x^M`: column `j` of an operator matrix holds the
//! coefficients of the operator applied to `x^j`. Discrete representations
//! act on function values `f(0), ..., f(M)`: row `n` gives `(K f)(n)`.
//! With these conventions an operator duality `K_l D = K̂_r D` reads
//! `K·D = D·K̂ᵀ` for every family.
//!
//! Raising operators push the top basis element out of the truncated space;
//! that overflow is dropped, so identities are only checked on the block of
//! indices `0..=M-2`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dualities::{evaluate, DualityFamily, EvalPoint};
use crate::error::{Error, Result};
use crate::rational::{binomial, dn_matrix_exact, int, RationalMatrix};
use num_rational::BigRational;
use statrs::distribution::{Binomial, Discrete};

use crate::numeric::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    /// Monomials `x^0..x^M`; vectors hold polynomial coefficients.
    MonomialInX,
    /// Indices `n = 0..M`; vectors hold function values.
    DiscreteIndexN,
    /// Points `k = 0..N` of a finite population, spanned by `D_N(·, n)`.
    FiniteDn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    pub kind: BasisKind,
    pub size: usize,
    /// Population size, only for [`BasisKind::FiniteDn`].
    pub population: Option<usize>,
}

impl Basis {
    pub fn monomial(order: usize) -> Result<Self> {
        Self::new(BasisKind::MonomialInX, order + 1, None)
    }

    pub fn discrete(order: usize) -> Result<Self> {
        Self::new(BasisKind::DiscreteIndexN, order + 1, None)
    }

    pub fn finite(population: usize) -> Result<Self> {
        Self::new(BasisKind::FiniteDn, population + 1, Some(population))
    }

    fn new(kind: BasisKind, size: usize, population: Option<usize>) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidParameter(format!("basis size must be >= 2, got {size}")));
        }
        if let Some(n) = population {
            if size != n + 1 {
                return Err(Error::InvalidParameter("finite basis must have size N+1".into()));
            }
        }
        Ok(Basis { kind, size, population })
    }

    /// Highest index `M`.
    pub fn order(&self) -> usize {
        self.size - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentationFamily {
    HeisenbergContinuous,
    HeisenbergDiscrete,
    HeisenbergFiniteN,
    Su11Continuous,
    Su11Discrete,
}

impl RepresentationFamily {
    pub const ALL: [RepresentationFamily; 5] = [
        RepresentationFamily::HeisenbergContinuous,
        RepresentationFamily::HeisenbergDiscrete,
        RepresentationFamily::HeisenbergFiniteN,
        RepresentationFamily::Su11Continuous,
        RepresentationFamily::Su11Discrete,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RepresentationFamily::HeisenbergContinuous => "heisenberg-continuous",
            RepresentationFamily::HeisenbergDiscrete => "heisenberg-discrete",
            RepresentationFamily::HeisenbergFiniteN => "heisenberg-finite-N",
            RepresentationFamily::Su11Continuous => "su11-continuous",
            RepresentationFamily::Su11Discrete => "su11-discrete",
        }
    }

    pub fn is_su11(&self) -> bool {
        matches!(self, RepresentationFamily::Su11Continuous | RepresentationFamily::Su11Discrete)
    }

    pub fn symbol(&self, ladder: Ladder) -> &'static str {
        use Ladder::*;
        use RepresentationFamily::*;
        match (self, ladder) {
            (HeisenbergContinuous, Lowering) => "A",
            (HeisenbergContinuous, Raising) => "A†",
            (HeisenbergDiscrete, Lowering) => "a",
            (HeisenbergDiscrete, Raising) => "a†",
            (HeisenbergFiniteN, Lowering) => "a_N",
            (HeisenbergFiniteN, Raising) => "a_N†",
            (Su11Continuous, Lowering) => "𝒦-",
            (Su11Continuous, Raising) => "𝒦+",
            (Su11Continuous, Neutral) => "𝒦0",
            (Su11Discrete, Lowering) => "K-",
            (Su11Discrete, Raising) => "K+",
            (Su11Discrete, Neutral) => "K0",
            (_, Neutral) => "I",
        }
    }
}

impl fmt::Display for RepresentationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ladder {
    Lowering,
    Raising,
    Neutral,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RepresentationParams {
    /// SU(1,1) ladder parameter.
    pub m: Option<f64>,
    /// Population size for the finite Heisenberg representation.
    pub population: Option<usize>,
}

impl RepresentationParams {
    pub fn su11(m: f64) -> Self {
        RepresentationParams { m: Some(m), population: None }
    }

    pub fn finite(population: usize) -> Self {
        RepresentationParams { m: None, population: Some(population) }
    }
}

/// Matrices realizing one representation on a truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    pub family: RepresentationFamily,
    pub params: RepresentationParams,
    pub basis: Basis,
    ops: BTreeMap<Ladder, DMatrix<f64>>,
}

impl OperatorSet {
    pub fn get(&self, ladder: Ladder) -> Option<&DMatrix<f64>> {
        self.ops.get(&ladder)
    }

    pub fn lowering(&self) -> &DMatrix<f64> {
        &self.ops[&Ladder::Lowering]
    }

    pub fn raising(&self) -> &DMatrix<f64> {
        &self.ops[&Ladder::Raising]
    }

    /// `K0`; only present for SU(1,1) families.
    pub fn neutral(&self) -> Option<&DMatrix<f64>> {
        self.ops.get(&Ladder::Neutral)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&'static str, &DMatrix<f64>)> + '_ {
        self.ops.iter().map(|(l, m)| (self.family.symbol(*l), m))
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }
}

/// Block of row and column indices over which an identity was checked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub rows: Range<usize>,
    pub cols: Range<usize>,
}

impl Block {
    pub fn square(upper: usize) -> Self {
        Block { rows: 0..upper, cols: 0..upper }
    }

    pub fn full(m: &DMatrix<f64>) -> Self {
        Block { rows: 0..m.nrows(), cols: 0..m.ncols() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity: String,
    pub max_abs_residual: f64,
    pub checked_block: Block,
}

impl ResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs_residual <= tol
    }
}

fn max_abs_on(m: &DMatrix<f64>, block: &Block) -> f64 {
    let mut worst = 0.0f64;
    for i in block.rows.clone() {
        for j in block.cols.clone() {
            let v = m[(i, j)].abs();
            if v.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(v);
        }
    }
    worst
}

/// Builds the representation `family` truncated at order `order` (basis size `order+1`).
pub fn build_representation(
    family: RepresentationFamily,
    params: RepresentationParams,
    order: usize,
) -> Result<OperatorSet> {
    use RepresentationFamily::*;
    if order < 1 {
        return Err(Error::InvalidParameter("truncation order must be >= 1".into()));
    }
    let m = if family.is_su11() {
        match params.m {
            Some(m) if m.is_finite() && m > 0.0 => Some(m),
            Some(m) => return Err(Error::InvalidParameter(format!("SU(1,1) requires m > 0, got {m}"))),
            None => return Err(Error::InvalidParameter("SU(1,1) family requires m".into())),
        }
    } else {
        if params.m.is_some() {
            return Err(Error::InvalidParameter(format!("{family} takes no m parameter")));
        }
        None
    };
    if family == HeisenbergFiniteN {
        match params.population {
            Some(n) if n == order => {}
            Some(n) => {
                return Err(Error::InvalidParameter(format!(
                    "heisenberg-finite-N requires order = N, got order {order} and N {n}"
                )))
            }
            None => return Err(Error::InvalidParameter("heisenberg-finite-N requires N".into())),
        }
    } else if params.population.is_some() {
        return Err(Error::InvalidParameter(format!("{family} takes no N parameter")));
    }

    let size = order + 1;
    let mut ops = BTreeMap::new();
    let basis = match family {
        HeisenbergContinuous => {
            ops.insert(Ladder::Lowering, derivative(size));
            ops.insert(Ladder::Raising, multiply_by_x(size));
            Basis::monomial(order)?
        }
        HeisenbergDiscrete => {
            // a f(n) = n f(n-1), a† f(n) = f(n+1)
            ops.insert(Ladder::Lowering, DMatrix::from_fn(size, size, |i, j| if j + 1 == i { i as f64 } else { 0.0 }));
            ops.insert(Ladder::Raising, DMatrix::from_fn(size, size, |i, j| if j == i + 1 { 1.0 } else { 0.0 }));
            Basis::discrete(order)?
        }
        HeisenbergFiniteN => {
            ops.insert(Ladder::Lowering, finite_lowering(order));
            ops.insert(Ladder::Raising, finite_raising(order));
            Basis::finite(order)?
        }
        Su11Continuous => {
            let half = m.unwrap() / 2.0;
            // 𝒦- z^j = j (j - 1 + m/2) z^{j-1}
            ops.insert(
                Ladder::Lowering,
                DMatrix::from_fn(size, size, |i, j| {
                    if i + 1 == j {
                        j as f64 * (j as f64 - 1.0 + half)
                    } else {
                        0.0
                    }
                }),
            );
            ops.insert(Ladder::Raising, multiply_by_x(size));
            ops.insert(Ladder::Neutral, diagonal(size, |j| j as f64 + half / 2.0));
            Basis::monomial(order)?
        }
        Su11Discrete => {
            let half = m.unwrap() / 2.0;
            ops.insert(Ladder::Raising, DMatrix::from_fn(size, size, |i, j| if j == i + 1 { half + i as f64 } else { 0.0 }));
            ops.insert(Ladder::Lowering, DMatrix::from_fn(size, size, |i, j| if j + 1 == i { i as f64 } else { 0.0 }));
            ops.insert(Ladder::Neutral, diagonal(size, |n| half / 2.0 + n as f64));
            Basis::discrete(order)?
        }
    };
    Ok(OperatorSet { family, params, basis, ops })
}

fn diagonal(size: usize, f: impl Fn(usize) -> f64) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(size, (0..size).map(f)))
}

/// d/dx on monomial coefficients.
fn derivative(size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| if i + 1 == j { j as f64 } else { 0.0 })
}

/// Multiplication by x on monomial coefficients, top overflow dropped.
fn multiply_by_x(size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| if i == j + 1 { 1.0 } else { 0.0 })
}

/// `a_N f(k) = (N-k) f(k+1) + (2k-N) f(k) - k f(k-1)` with `f(-1) = f(N+1) = 0`.
fn finite_lowering(n: usize) -> DMatrix<f64> {
    let nf = n as f64;
    DMatrix::from_fn(n + 1, n + 1, |k, j| {
        let kf = k as f64;
        if j == k + 1 {
            nf - kf
        } else if j == k {
            2.0 * kf - nf
        } else if j + 1 == k {
            -kf
        } else {
            0.0
        }
    })
}

/// `a_N† f(k) = Σ_{r<k} (-1)^{k-1-r} C(N,r)/C(N,k) f(r)`.
///
/// Binomial ratios come from running products of `(r+1)/(N-r)`, which keeps
/// every intermediate below one in magnitude.
fn finite_raising(n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n + 1, n + 1);
    for k in 1..=n {
        let mut ratio = 1.0;
        for r in (0..k).rev() {
            // C(N,r)/C(N,r+1) = (r+1)/(N-r)
            ratio *= (r + 1) as f64 / (n - r) as f64;
            let sign = if (k - 1 - r) % 2 == 0 { 1.0 } else { -1.0 };
            out[(k, r)] = sign * ratio;
        }
    }
    out
}

/// `PQ - QP`.
pub fn commutator(p: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !p.is_square() || p.shape() != q.shape() {
        return Err(Error::dims(
            format!("two square matrices of equal size, got {:?}", p.shape()),
            format!("{:?}", q.shape()),
        ));
    }
    Ok(p * q - q * p)
}

/// `P·Q` with every dot product evaluated in twice-working precision
/// (error-free transformations via fused multiply-add and two-sum).
pub fn accurate_product(p: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(p.ncols(), q.nrows(), "accurate_product: inner dimensions differ");
    DMatrix::from_fn(p.nrows(), q.ncols(), |i, j| {
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for l in 0..p.ncols() {
            let (a, b) = (p[(i, l)], q[(l, j)]);
            let prod = a * b;
            let prod_err = a.mul_add(b, -prod);
            let t = s + prod;
            let z = t - s;
            let sum_err = (s - (t - z)) + (prod - z);
            s = t;
            c += prod_err + sum_err;
        }
        s + c
    })
}

fn report(identity: String, residual: &DMatrix<f64>, block: Block) -> ResidualReport {
    ResidualReport { max_abs_residual: max_abs_on(residual, &block), identity, checked_block: block }
}

/// Residuals of every defining relation of the family's algebra.
///
/// Ladder families are checked on indices `0..=M-2`. The finite Heisenberg
/// family is checked on its action on `D_N(·, n)` for `n <= N-1`: the raising
/// operator annihilates `D_N(·, N)`, so the top degree is excluded exactly as
/// the binomial-transform correspondence excludes it.
pub fn check_commutation_relations(set: &OperatorSet) -> Vec<ResidualReport> {
    use RepresentationFamily::*;
    let f = set.family;
    let size = set.basis.size;
    let safe = Block::square(size - 1);
    let lo = set.lowering();
    let hi = set.raising();
    let id = DMatrix::<f64>::identity(size, size);
    let name = |s: &str| format!("{}: {}", f.name(), s);
    match f {
        HeisenbergContinuous => {
            let c = lo * hi - hi * lo - &id;
            vec![report(name("[A, A†] - I"), &c, safe)]
        }
        HeisenbergDiscrete => {
            let c = lo * hi - hi * lo + &id;
            vec![report(name("[a, a†] + I"), &c, safe)]
        }
        HeisenbergFiniteN => {
            // The entries of a_N† reach C(N, N/2) with alternating signs, so an
            // f64 residual is dominated by rounding of the entries themselves.
            // The operators are rational; check them exactly.
            let n = set.basis.order();
            let (lo, hi) = (finite_lowering_exact(n), finite_raising_exact(n));
            let dn = dn_matrix_exact(n).columns(0..n);
            let c = &(&(&lo * &hi) - &(&hi * &lo)) * &dn;
            let c = &c - &dn;
            vec![ResidualReport {
                identity: name("([a_N, a_N†] - I) D_N(·, n), n <= N-1, exact"),
                max_abs_residual: c.max_abs(),
                checked_block: Block { rows: 0..n + 1, cols: 0..n },
            }]
        }
        Su11Continuous | Su11Discrete => {
            let k0 = set.neutral().expect("SU(1,1) sets carry K0");
            // The discrete family realizes the dual algebra: every relation flips sign.
            let s = if f == Su11Continuous { 1.0 } else { -1.0 };
            let (p, m0, z) = if f == Su11Continuous { ("𝒦+", "𝒦-", "𝒦0") } else { ("K+", "K-", "K0") };
            let sign = |v: f64| if v > 0.0 { "-" } else { "+" };
            vec![
                report(
                    name(&format!("[{z}, {p}] {} {p}", sign(s))),
                    &(k0 * hi - hi * k0 - hi * s),
                    safe.clone(),
                ),
                report(
                    name(&format!("[{z}, {m0}] {} {m0}", sign(-s))),
                    &(k0 * lo - lo * k0 + lo * s),
                    safe.clone(),
                ),
                report(
                    name(&format!("[{m0}, {p}] {} 2{z}", sign(s))),
                    &(lo * hi - hi * lo - k0 * (2.0 * s)),
                    safe,
                ),
            ]
        }
    }
}

/// The ladder identities of the finite representation on the `D_N` basis,
/// `a_N D_N(·,n) = n D_N(·,n-1)` and `a_N† D_N(·,n) = D_N(·,n+1)`, checked
/// in exact arithmetic.
pub fn check_finite_ladder_action(population: usize) -> Result<Vec<ResidualReport>> {
    if population < 1 {
        return Err(Error::InvalidParameter("population must be >= 1".into()));
    }
    let n = population;
    let dn = dn_matrix_exact(n);
    // Right multiplication: column n of D·S collects Σ_j D(·, j) S(j, n).
    let shift_down = RationalMatrix::from_fn(n + 1, n + 1, |i, j| if j == i + 1 { int(j as i64) } else { int(0) });
    let shift_up = RationalMatrix::from_fn(n + 1, n + 1, |i, j| if i == j + 1 { int(1) } else { int(0) });
    let lowering = &(&finite_lowering_exact(n) * &dn) - &(&dn * &shift_down);
    let raising = &(&finite_raising_exact(n) * &dn) - &(&dn * &shift_up);
    let block = Block { rows: 0..n + 1, cols: 0..n + 1 };
    Ok(vec![
        ResidualReport {
            identity: format!("N={n}: a_N D_N(·,n) = n D_N(·,n-1)"),
            max_abs_residual: lowering.max_abs(),
            checked_block: block.clone(),
        },
        ResidualReport {
            identity: format!("N={n}: a_N† D_N(·,n) = D_N(·,n+1)"),
            max_abs_residual: raising.max_abs(),
            checked_block: block,
        },
    ])
}

/// Exact `a_N`.
pub fn finite_lowering_exact(n: usize) -> RationalMatrix {
    RationalMatrix::from_fn(n + 1, n + 1, |k, j| {
        let (k, j, n) = (k as i64, j as i64, n as i64);
        if j == k + 1 {
            int(n - k)
        } else if j == k {
            int(2 * k - n)
        } else if j + 1 == k {
            int(-k)
        } else {
            int(0)
        }
    })
}

/// Exact `a_N†`.
pub fn finite_raising_exact(n: usize) -> RationalMatrix {
    let big_n = n as u64;
    RationalMatrix::from_fn(n + 1, n + 1, |k, r| {
        if r >= k {
            return int(0);
        }
        let v = BigRational::new(binomial(big_n, r as u64), binomial(big_n, k as u64));
        if (k - 1 - r) % 2 == 0 {
            v
        } else {
            -v
        }
    })
}

impl ResidualReport {
    pub fn renamed(mut self, identity: impl Into<String>) -> Self {
        self.identity = identity.into();
        self
    }
}

/// `[D_N(k, n)]_{k,n}` for `k, n = 0..=N`.
pub fn dn_matrix(population: usize) -> DMatrix<f64> {
    let fam = DualityFamily::HypergeometricFinite { n: population as u64 };
    DMatrix::from_fn(population + 1, population + 1, |k, n| {
        evaluate(&fam, &EvalPoint::discrete([k as u64], [n as u64])).expect("indices within 0..=N")
    })
}

/// Matrix of a duality function between two bases: entry `(i, n)` is the
/// `i`-th coordinate (coefficient or value) of `D(·, n)` in the row basis.
pub fn duality_matrix(family: &DualityFamily, rows: &Basis, cols: &Basis) -> Result<DMatrix<f64>> {
    family.validate()?;
    if cols.kind == BasisKind::MonomialInX {
        return Err(Error::Inexpressible(format!(
            "{} columns must be indexed by a discrete variable",
            family.kind()
        )));
    }
    let (r, c) = (rows.size, cols.size);
    match (family, rows.kind) {
        (DualityFamily::Monomial, BasisKind::MonomialInX) => Ok(DMatrix::identity(r, c)),
        (DualityFamily::GammaWeighted { m }, BasisKind::MonomialInX) => {
            let half = m / 2.0;
            let mut coeff = 1.0;
            let mut out = DMatrix::zeros(r, c);
            for n in 0..r.min(c) {
                if n > 0 {
                    coeff /= half + (n - 1) as f64;
                }
                out[(n, n)] = coeff;
            }
            Ok(out)
        }
        (DualityFamily::HermiteWeighted, BasisKind::MonomialInX) => {
            // coefficients of H_n in x^i; the Gaussian weight is carried by the basis.
            if c > r {
                return Err(Error::Inexpressible(format!(
                    "H_{} needs degree {} but the row basis stops at {}",
                    c - 1,
                    c - 1,
                    r - 1
                )));
            }
            let mut out = DMatrix::zeros(r, c);
            out[(0, 0)] = 1.0;
            for n in 1..c {
                for i in 0..r {
                    let up = if i >= 1 { 2.0 * out[(i - 1, n - 1)] } else { 0.0 };
                    let down = if n >= 2 { 2.0 * (n - 1) as f64 * out[(i, n - 2)] } else { 0.0 };
                    out[(i, n)] = up - down;
                }
            }
            Ok(out)
        }
        (DualityFamily::HypergeometricFinite { n }, BasisKind::FiniteDn | BasisKind::DiscreteIndexN) => {
            let n = *n as usize;
            if r != n + 1 || c > n + 1 {
                return Err(Error::dims(
                    format!("rows 0..={n} and at most {} columns", n + 1),
                    format!("{r}x{c}"),
                ));
            }
            Ok(dn_matrix(n).columns(0, c).into_owned())
        }
        (DualityFamily::Exponential, _) => Err(Error::Inexpressible(
            "exp(xy) has no finite expansion in a truncated basis".into(),
        )),
        _ => Err(Error::Inexpressible(format!(
            "{} is not tabulated on a {:?} row basis",
            family.kind(),
            rows.kind
        ))),
    }
}

/// Max-abs entry of `K·D - D·K̂ᵀ` over the whole matrix.
pub fn check_intertwiner(k: &DMatrix<f64>, k_hat: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<ResidualReport> {
    let block = Block { rows: 0..d.nrows(), cols: 0..d.ncols() };
    check_intertwiner_on(k, k_hat, d, block)
}

/// Max-abs entry of `K·D - D·K̂ᵀ` restricted to `block`.
pub fn check_intertwiner_on(
    k: &DMatrix<f64>,
    k_hat: &DMatrix<f64>,
    d: &DMatrix<f64>,
    block: Block,
) -> Result<ResidualReport> {
    let residual = intertwiner_residual(k, k_hat, d)?;
    if block.rows.end > residual.nrows() || block.cols.end > residual.ncols() || block.rows.is_empty() || block.cols.is_empty() {
        return Err(Error::dims(format!("non-empty block inside {:?}", residual.shape()), format!("{block:?}")));
    }
    Ok(report("K·D - D·K̂ᵀ".to_string(), &residual, block))
}

/// Same as [`check_intertwiner`], with compensated products. Used where `K`
/// has alternating entries of widely different magnitudes.
pub fn check_intertwiner_accurate(k: &DMatrix<f64>, k_hat: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<ResidualReport> {
    intertwiner_residual(k, k_hat, d)?;
    let residual = accurate_product(k, d) - accurate_product(d, &k_hat.transpose());
    Ok(report("K·D - D·K̂ᵀ".to_string(), &residual, Block::full(d)))
}

/// `K·D - D·K̂ᵀ`.
pub fn intertwiner_residual(k: &DMatrix<f64>, k_hat: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !k.is_square() || !k_hat.is_square() || k.ncols() != d.nrows() || k_hat.nrows() != d.ncols() {
        return Err(Error::dims(
            format!("K {0}x{0}, K̂ {1}x{1}", d.nrows(), d.ncols()),
            format!("K {:?}, K̂ {:?}, D {:?}", k.shape(), k_hat.shape(), d.shape()),
        ));
    }
    Ok(k * d - d * k_hat.transpose())
}

/// Coefficients of `f` in the basis `D_N(·, r)`, by forward substitution
/// (`D_N(k, r) = 0` for `r > k`).
pub fn dn_expansion(f: &[f64], population: usize) -> Result<Vec<f64>> {
    if f.len() != population + 1 {
        return Err(Error::dims(format!("f of length {}", population + 1), f.len()));
    }
    if population == 0 {
        return Err(Error::InvalidParameter("population must be >= 1".into()));
    }
    let dn = dn_matrix(population);
    let mut c = vec![0.0; population + 1];
    for k in 0..=population {
        let partial: f64 = (0..k).map(|r| dn[(k, r)] * c[r]).sum();
        c[k] = (f[k] - partial) / dn[(k, k)];
    }
    Ok(c)
}

/// Binomial transform `(𝒯f)(ρ) = Σ_k f(k) C(N,k) ρ^k (1-ρ)^{N-k}`, returned as
/// power coefficients `c` with `(𝒯f)(ρ) = Σ_r c_r ρ^r`. These coincide with
/// the coordinates of `f` in the `D_N` basis.
pub fn binomial_transform(f: &[f64], population: usize) -> Result<Vec<f64>> {
    dn_expansion(f, population)
}

/// `(𝒯f)(ρ) = Σ_k f(k) ν_{N,ρ}(k)` by direct summation against the binomial law.
pub fn binomial_transform_at(f: &[f64], population: usize, rho: f64) -> Result<f64> {
    if f.len() != population + 1 {
        return Err(Error::dims(format!("f of length {}", population + 1), f.len()));
    }
    let law = Binomial::new(rho, population as u64).map_err(|e| Error::InvalidParameter(format!("rho={rho}: {e}")))?;
    Ok(compensated_sum(f.iter().enumerate().map(|(k, v)| v * law.pmf(k as u64))))
}

/// `max_n |Σ_k D_N(k,n) ν_{N,ρ}(k) - ρ^n|` over `n = 0..=N`.
pub fn check_binomial_duality(population: usize, rho: f64) -> Result<ResidualReport> {
    if population < 1 {
        return Err(Error::InvalidParameter("population must be >= 1".into()));
    }
    let dn = dn_matrix(population);
    let mut worst = 0.0f64;
    for n in 0..=population {
        let col: Vec<f64> = dn.column(n).iter().copied().collect();
        worst = worst.max((binomial_transform_at(&col, population, rho)? - rho.powi(n as i32)).abs());
    }
    Ok(ResidualReport {
        identity: format!("N={population}, rho={rho}: Σ_k D_N(k,n) ν(k) - rho^n"),
        max_abs_residual: worst,
        checked_block: Block { rows: 0..population + 1, cols: 0..1 },
    })
}

/// Evaluates a power series with coefficients `c` at `rho`.
pub fn polynomial_eval(c: &[f64], rho: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * rho + v)
}

/// Ladder pair `(𝐀, 𝐀†) = ((x + d/dx)/2, x - d/dx)` acting on coefficients
/// of `e^{-x²/2} p(x)` in the weighted monomials `e^{-x²/2} x^j`.
///
/// On that basis `𝐀 = (1/2) d/dx` and `𝐀† = 2x - d/dx`.
pub fn gaussian_ladder(order: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if order < 1 {
        return Err(Error::InvalidParameter("truncation order must be >= 1".into()));
    }
    let size = order + 1;
    let d = derivative(size);
    let lower = &d * 0.5;
    let raise = multiply_by_x(size) * 2.0 - d;
    Ok((lower, raise))
}

/// Ordering of a polynomial in ladder operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// `Σ_r α_r(R) L^r` (differential operators in normal form).
    CoefficientsFirst,
    /// `Σ_r L^r α_r(R)` (the dual, products reversed).
    LoweringFirst,
}

/// `Σ_r α_r(R) L^r` or `Σ_r L^r α_r(R)`, with `alphas[r]` holding the power
/// coefficients of the polynomial `α_r`.
pub fn ladder_polynomial(
    alphas: &[Vec<f64>],
    raise: &DMatrix<f64>,
    lower: &DMatrix<f64>,
    ordering: Ordering,
) -> Result<DMatrix<f64>> {
    if !raise.is_square() || raise.shape() != lower.shape() {
        return Err(Error::dims(format!("{:?}", raise.shape()), format!("{:?}", lower.shape())));
    }
    let size = raise.nrows();
    let mut out = DMatrix::zeros(size, size);
    let mut lower_power = DMatrix::identity(size, size);
    for alpha in alphas {
        let mut poly = DMatrix::zeros(size, size);
        let mut raise_power = DMatrix::identity(size, size);
        for &c in alpha {
            if c != 0.0 {
                poly += &raise_power * c;
            }
            raise_power = &raise_power * raise;
        }
        out += match ordering {
            Ordering::CoefficientsFirst => &poly * &lower_power,
            Ordering::LoweringFirst => &lower_power * &poly,
        };
        lower_power = &lower_power * lower;
    }
    Ok(out)
}

/// Coefficients of the Hermite polynomials (columns) against `x^i` (rows),
/// by repeated application of the weighted raising operator to the vacuum.
pub fn hermite_by_raising(order: usize) -> Result<DMatrix<f64>> {
    let (_, raise) = gaussian_ladder(order)?;
    let size = order + 1;
    let mut out = DMatrix::zeros(size, size);
    let mut v = DVector::zeros(size);
    v[0] = 1.0;
    for n in 0..size {
        out.set_column(n, &v);
        v = &raise * &v;
    }
    Ok(out)
}

/// Evaluates `H_n(x)` from a coefficient column.
pub fn hermite_from_coefficients(coeffs: &DMatrix<f64>, n: usize, x: f64) -> f64 {
    let col: Vec<f64> = coeffs.column(n).iter().copied().collect();
    polynomial_eval(&col, x)
}
