//! Exact reference values: matrix exponentials, duality checks on finite
//! state spaces, pointwise generator checks and the worked examples.

mod examples;
mod expm;
mod pointwise;
mod rational;

pub use examples::{limiting_oracle, paper_value, reproduce_example, ExampleId, ExampleParams, ExampleRecord};
pub use expm::expm;
pub use pointwise::{apply_side, check_pointwise_diffusion_duality, SideOperator};
pub use rational::{
    check_moran_kingman, check_moran_kingman_exact, moran_kingman_matrices, moran_ladder_form_exact, MoranTimeScale, PairCheck,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{check_intertwiner, ResidualReport};
use crate::error::{Error, Result};
use crate::dualities::{evaluate, DualityFamily, EvalPoint};
use crate::processes::{enumerate_states, generator_matrix, generator_on, EnumerationMode, GeneratorMatrix, ProcessSpec};

/// Which semigroup to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `e^{tQ} v`: `v` is a function, the result holds expectations.
    Functions,
    /// `e^{tQᵀ} v`: `v` is a distribution, the result is the law at time `t`.
    Distributions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MatrixExponential,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactExpectation {
    pub value: f64,
    pub method: Method,
    pub state_space_size: usize,
}

/// `e^{tQ} v` or `e^{tQᵀ} v`.
pub fn matrix_exponential_apply(q: &DMatrix<f64>, v: &DVector<f64>, t: f64, direction: Direction) -> Result<DVector<f64>> {
    if !q.is_square() || q.nrows() != v.len() {
        return Err(Error::dims(
            format!("square matrix matching a vector of length {}", v.len()),
            format!("{}x{}", q.nrows(), q.ncols()),
        ));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t must be finite and >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(v.clone());
    }
    let scaled = q * t;
    let e = match direction {
        Direction::Functions => expm(&scaled)?,
        Direction::Distributions => expm(&scaled.transpose())?,
    };
    Ok(e * v)
}

/// `E_{k0} f(X_t)` for the chain with generator `g`.
pub fn exact_expectation(g: &GeneratorMatrix, f: &[f64], k0: &[u64], t: f64) -> Result<ExactExpectation> {
    if f.len() != g.len() {
        return Err(Error::dims(format!("f with {} entries", g.len()), f.len()));
    }
    let i = g.index.require(k0)?;
    let u = matrix_exponential_apply(&g.q, &DVector::from_column_slice(f), t, Direction::Functions)?;
    let value = u[i];
    if !value.is_finite() {
        return Err(Error::Numerical(format!("expectation is not finite: {value}")));
    }
    Ok(ExactExpectation { value, method: Method::MatrixExponential, state_space_size: g.len() })
}

/// `K·D - D·K̂ᵀ` for two generators, labelled with the process names.
pub fn check_generator_duality(
    k: &DMatrix<f64>,
    k_hat: &DMatrix<f64>,
    d: &DMatrix<f64>,
    left: &str,
    right: &str,
) -> Result<ResidualReport> {
    Ok(check_intertwiner(k, k_hat, d)?.renamed(format!("{left} vs {right}: K·D - D·K̂ᵀ")))
}

/// `e^{tK}·D - D·e^{tK̂ᵀ}`, the semigroup form of a generator duality.
pub fn check_semigroup_duality(k: &DMatrix<f64>, k_hat: &DMatrix<f64>, d: &DMatrix<f64>, t: f64) -> Result<ResidualReport> {
    let ek = expm(&(k * t))?;
    let ek_hat = expm(&(k_hat * t))?;
    Ok(check_intertwiner(&ek, &ek_hat, d)?.renamed(format!("e^(tK)·D - D·e^(tK̂ᵀ), t={t}")))
}

/// Self-duality of SIP(m) on `d` sites with `N` particles (equivalently the
/// `d`-type Moran model at `θ = m(d-1)/4`).
///
/// Rows run over configurations with exactly `N` particles, columns over all
/// configurations with at most `N`, so `D` is not square; the dual generator
/// acts on the down-closed space, which SIP preserves level by level.
pub fn check_sip_self_duality(d: usize, m: f64, n: u64) -> Result<ResidualReport> {
    let (k, k_hat, dm) = sip_self_duality_matrices(d, m, n)?;
    Ok(check_intertwiner(&k, &k_hat, &dm)?.renamed(format!("SIP(m={m}) d={d} N={n} self-duality: K·D - D·K̂ᵀ")))
}

/// `(K, K̂, D)` for [`check_sip_self_duality`].
pub fn sip_self_duality_matrices(d: usize, m: f64, n: u64) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let theta = m * (d as f64 - 1.0) / 4.0;
    let family = DualityFamily::MoranSelfDual { n, theta, d };
    family.validate()?;
    let spec = ProcessSpec::Sip { d, m, n };
    let k = generator_matrix(&spec)?;
    let k_hat = generator_on(&spec, enumerate_states(d, n, EnumerationMode::DownClosed)?)?;
    let mut dm = DMatrix::zeros(k.len(), k_hat.len());
    for (i, row) in k.index.states().iter().enumerate() {
        for (j, col) in k_hat.index.states().iter().enumerate() {
            dm[(i, j)] = evaluate(&family, &EvalPoint::discrete(row.clone(), col.clone()))?;
        }
    }
    Ok((k.q, k_hat.q, dm))
}

/// Stationary law of a finite generator by a null-space solve of `Qᵀπ = 0`, `Σπ = 1`.
pub fn stationary_distribution(q: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = q.nrows();
    if !q.is_square() || n == 0 {
        return Err(Error::dims("non-empty square matrix", format!("{}x{}", q.nrows(), q.ncols())));
    }
    // Replace one balance equation by the normalisation.
    let mut a = q.transpose();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let pi = a.lu().solve(&rhs).ok_or_else(|| Error::Numerical("generator has no unique stationary law".into()))?;
    Ok(pi.iter().copied().collect())
}
