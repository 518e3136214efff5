//! Moran ↔ Kingman duality with `D_N`, in floating point and in exact
//! rational arithmetic.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{check_intertwiner, dn_matrix, finite_lowering_exact, finite_raising_exact, ResidualReport};
use crate::error::{Error, Result};
use crate::processes::{generator_matrix, ProcessSpec};
use crate::rational::{dn_matrix_exact, int, ratio, RationalMatrix};

/// Time scale of the two-type Moran chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoranTimeScale {
    /// `a_N†(1-a_N†)a_N²`: steps at rate `k(N-k)`, dual to coalescence at `n(n-1)`.
    Ladder,
    /// `(N²/2)(k/N)(1-k/N)`: steps at rate `k(N-k)/2`, dual to coalescence at `n(n-1)/2`.
    Printed,
}

impl MoranTimeScale {
    /// Multiplier relative to the ladder form.
    fn factor(self) -> (i64, i64) {
        match self {
            MoranTimeScale::Ladder => (1, 1),
            MoranTimeScale::Printed => (1, 2),
        }
    }

    pub fn prefactor(self, n: u64) -> f64 {
        let (p, q) = self.factor();
        (n * n) as f64 * p as f64 / q as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub n: u64,
    pub time_scale: MoranTimeScale,
    pub max_abs_residual: f64,
    pub exactly_zero: bool,
}

fn population(n: u64) -> Result<usize> {
    if n < 1 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    Ok(n as usize)
}

/// Moran generator, Kingman generator on `0..=N` (same time scale) and `D_N`.
pub fn moran_kingman_matrices(n: u64, scale: MoranTimeScale) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let size = population(n)?;
    let moran = generator_matrix(&ProcessSpec::MoranTwoType { n, prefactor: scale.prefactor(n) })?;
    let kingman = generator_matrix(&ProcessSpec::KingmanBlock { theta: 0.0, sigma: 0.0, n_max: n })?;
    let (p, q) = scale.factor();
    Ok((moran.q, kingman.q * (p as f64 / q as f64), dn_matrix(size)))
}

/// Floating-point residual of `K·D_N - D_N·K̂ᵀ`.
pub fn check_moran_kingman(n: u64, scale: MoranTimeScale) -> Result<ResidualReport> {
    let (k, k_hat, d) = moran_kingman_matrices(n, scale)?;
    Ok(check_intertwiner(&k, &k_hat, &d)?.renamed(format!("Moran N={n} ({scale:?}) vs Kingman: K·D_N - D_N·K̂ᵀ")))
}

fn moran_exact(n: usize, scale: MoranTimeScale) -> RationalMatrix {
    let (p, q) = scale.factor();
    RationalMatrix::from_fn(n + 1, n + 1, |i, j| {
        let r = (i * (n - i)) as i64;
        let v = if j + 1 == i || i + 1 == j {
            r
        } else if i == j {
            -2 * r
        } else {
            0
        };
        int(v) * ratio(p, q)
    })
}

fn kingman_exact(n: usize, scale: MoranTimeScale) -> RationalMatrix {
    let (p, q) = scale.factor();
    RationalMatrix::from_fn(n + 1, n + 1, |i, j| {
        let r = (i * i.saturating_sub(1)) as i64;
        let v = if j + 1 == i {
            r
        } else if i == j {
            -r
        } else {
            0
        };
        int(v) * ratio(p, q)
    })
}

/// Exact rational residual of `K·D_N - D_N·K̂ᵀ`.
pub fn check_moran_kingman_exact(n: u64, scale: MoranTimeScale) -> Result<PairCheck> {
    let size = population(n)?;
    let d = dn_matrix_exact(size);
    let k = moran_exact(size, scale);
    let k_hat = kingman_exact(size, scale);
    let residual = &(&k * &d) - &(&d * &k_hat.transpose());
    Ok(PairCheck { n, time_scale: scale, max_abs_residual: residual.max_abs(), exactly_zero: residual.is_zero() })
}

/// `a_N†(1 - a_N†) a_N²` in exact arithmetic.
pub fn moran_ladder_form_exact(n: u64) -> Result<RationalMatrix> {
    let size = population(n)?;
    let lo = finite_lowering_exact(size);
    let hi = finite_raising_exact(size);
    let one_minus = &RationalMatrix::identity(size + 1) - &hi;
    Ok(&(&(&hi * &one_minus) * &lo) * &lo)
}
