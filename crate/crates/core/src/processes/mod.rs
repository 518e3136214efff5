//! Process specifications, generators and path samplers.
//!
//! Jump processes are described by their transition rates; generator matrices
//! are assembled from those rates over an enumerated state space. Diffusions
//! are described by drift and diffusion coefficients with the convention
//! `L = ½ Σ a_ij ∂_i ∂_j + Σ b_i ∂_i`.

mod generator;
mod sampling;
mod state;

pub use generator::{
    drift_diffusion, generator_matrix, generator_on, transitions, wf_multitype_reduced, GeneratorMatrix,
};
pub use sampling::{sample_diffusion, sample_diffusion_with, sample_jump, NormalSource};
pub use state::{enumerate_states, state_count, EnumerationMode, StateIndex, MAX_STATES};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::ROW_SUM;

/// Default truncation of birth-death dual chains.
pub const DEFAULT_N_MAX: u64 = 200;

/// Largest site set accepted by the stepping-stone model.
pub const MAX_SITES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProcessSpec {
    /// `α(x) d²/dx² + β(x) d/dx` with `α(x) = Σ α_k x^k`, `β(x) = Σ β_k x^k`.
    /// `alpha[k]` holds `α_k` (so `alpha[0]` must be 0) and `beta[k]` holds `β_k`.
    WfGeneral1d { alpha: Vec<f64>, beta: Vec<f64> },
    /// `x(1-x) d²/dx² + σ x(1-x) d/dx`; dual to the selection chain with `(1-x)^n`.
    WfPositiveSelection { sigma: f64 },
    /// `d` types with symmetric parent-independent mutation at rate `θ`.
    WfMultitype { d: usize, theta: f64 },
    /// `d`-type Moran model with `n` individuals, rates written in the reduced
    /// coordinates `k_1..k_{d-1}`.
    MoranMultitype { n: u64, d: usize, theta: f64 },
    /// Two-type Moran chain on `k = 0..n`, stepping `±1` at rate
    /// `prefactor · (k/n)(1 - k/n)`. The displayed equation uses `prefactor = n²/2`;
    /// the ladder form `a_N†(1-a_N†)a_N²` corresponds to `prefactor = n²`.
    MoranTwoType { n: u64, prefactor: f64 },
    /// Inclusion process on the complete graph with `d` sites and `n` particles.
    Sip { d: usize, m: f64, n: u64 },
    /// Brownian energy process on the complete graph with `d` sites.
    Bep { d: usize, m: f64 },
    /// Block counting with coalescence `n(n-1)`, mutation `θn` (down) and
    /// selection `σn` (up, switched off at `n_max`).
    KingmanBlock { theta: f64, sigma: f64, n_max: u64 },
    /// The dual chain of a general one-dimensional diffusion, truncated at `n_max`.
    WfDualChain { alpha: Vec<f64>, beta: Vec<f64>, n_max: u64 },
    /// Stepping-stone diffusion on a finite site set with kernel `p`.
    SteppingStoneForward { kernel: Vec<Vec<f64>> },
    /// Its dual: lineages migrate and coalesce within sites; total at most `n_max`.
    SteppingStoneDual { kernel: Vec<Vec<f64>>, n_max: u64 },
}

/// A point of a process state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum State {
    Continuous(Vec<f64>),
    Discrete(Vec<u64>),
}

impl State {
    pub fn as_continuous(&self) -> Result<&[f64]> {
        match self {
            State::Continuous(x) => Ok(x),
            State::Discrete(_) => Err(Error::Domain("expected a continuous state".into())),
        }
    }

    pub fn as_discrete(&self) -> Result<&[u64]> {
        match self {
            State::Discrete(k) => Ok(k),
            State::Continuous(_) => Err(Error::Domain("expected a discrete state".into())),
        }
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")))
    }
}

fn types(d: usize) -> Result<()> {
    if d >= 2 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("d must be >= 2, got {d}")))
    }
}

/// Checks the sign and balance conditions on `α_k`, `β_k` that make the dual
/// of `α(x) d² + β(x) d` a Markov chain.
fn check_coefficients(alpha: &[f64], beta: &[f64]) -> Result<()> {
    if alpha.iter().chain(beta).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("coefficients must be finite".into()));
    }
    if alpha.first().is_some_and(|&a0| a0 != 0.0) {
        return Err(Error::InvalidParameter("α_0 must be 0 (α(x) starts at x¹)".into()));
    }
    let balance = |coeffs: &[f64], pivot: usize, name: &str| -> Result<()> {
        for (k, &c) in coeffs.iter().enumerate() {
            if k != pivot && c < 0.0 {
                return Err(Error::InvalidParameter(format!("{name}_{k} = {c} must be >= 0")));
            }
        }
        let rest: f64 = coeffs.iter().enumerate().filter(|(k, _)| *k != pivot).map(|(_, c)| c).sum();
        let own = coeffs.get(pivot).copied().unwrap_or(0.0);
        let scale = rest.abs().max(1.0);
        if (own + rest).abs() > ROW_SUM * scale {
            return Err(Error::InvalidParameter(format!(
                "{name}_{pivot} = {own} must equal -{rest} (minus the sum of the others)"
            )));
        }
        Ok(())
    };
    balance(alpha, 2, "α")?;
    balance(beta, 1, "β")
}

fn check_kernel(kernel: &[Vec<f64>]) -> Result<()> {
    let s = kernel.len();
    if !(2..=MAX_SITES).contains(&s) {
        return Err(Error::InvalidParameter(format!("site count must be in 2..={MAX_SITES}, got {s}")));
    }
    for (i, row) in kernel.iter().enumerate() {
        if row.len() != s {
            return Err(Error::dims(format!("kernel row of length {s}"), row.len()));
        }
        for (j, &p) in row.iter().enumerate() {
            if !p.is_finite() || (i != j && p < 0.0) {
                return Err(Error::InvalidParameter(format!("p({i},{j}) = {p} must be >= 0")));
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM * 10.0 {
            return Err(Error::InvalidParameter(format!("kernel row {i} sums to {sum}, not 1")));
        }
    }
    Ok(())
}

impl ProcessSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProcessSpec::WfGeneral1d { .. } => "wf-general-1d",
            ProcessSpec::WfPositiveSelection { .. } => "wf-positive-selection",
            ProcessSpec::WfMultitype { .. } => "wf-multitype",
            ProcessSpec::MoranMultitype { .. } => "moran-multitype",
            ProcessSpec::MoranTwoType { .. } => "moran-two-type",
            ProcessSpec::Sip { .. } => "sip",
            ProcessSpec::Bep { .. } => "bep",
            ProcessSpec::KingmanBlock { .. } => "kingman-block",
            ProcessSpec::WfDualChain { .. } => "wf-dual-chain",
            ProcessSpec::SteppingStoneForward { .. } => "stepping-stone-forward",
            ProcessSpec::SteppingStoneDual { .. } => "stepping-stone-dual",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::WfGeneral1d { alpha, beta } => check_coefficients(alpha, beta),
            ProcessSpec::WfDualChain { alpha, beta, n_max } => {
                check_coefficients(alpha, beta)?;
                if *n_max < 1 {
                    return Err(Error::InvalidParameter("n_max must be >= 1".into()));
                }
                Ok(())
            }
            ProcessSpec::WfPositiveSelection { sigma } => nonneg("sigma", *sigma),
            ProcessSpec::WfMultitype { d, theta } => {
                types(*d)?;
                nonneg("theta", *theta)
            }
            ProcessSpec::MoranMultitype { n, d, theta } => {
                types(*d)?;
                nonneg("theta", *theta)?;
                if *n < 1 {
                    return Err(Error::InvalidParameter("N must be >= 1".into()));
                }
                Ok(())
            }
            ProcessSpec::MoranTwoType { n, prefactor } => {
                if *n < 1 {
                    return Err(Error::InvalidParameter("N must be >= 1".into()));
                }
                nonneg("prefactor", *prefactor)
            }
            ProcessSpec::Sip { d, m, .. } | ProcessSpec::Bep { d, m } => {
                types(*d)?;
                nonneg("m", *m)
            }
            ProcessSpec::KingmanBlock { theta, sigma, n_max } => {
                nonneg("theta", *theta)?;
                nonneg("sigma", *sigma)?;
                if *n_max < 1 {
                    return Err(Error::InvalidParameter("n_max must be >= 1".into()));
                }
                Ok(())
            }
            ProcessSpec::SteppingStoneForward { kernel } => check_kernel(kernel),
            ProcessSpec::SteppingStoneDual { kernel, n_max } => {
                check_kernel(kernel)?;
                if *n_max < 1 {
                    return Err(Error::InvalidParameter("n_max must be >= 1".into()));
                }
                Ok(())
            }
        }
    }

    /// True for processes with continuous paths.
    pub fn is_diffusion(&self) -> bool {
        matches!(
            self,
            ProcessSpec::WfGeneral1d { .. }
                | ProcessSpec::WfPositiveSelection { .. }
                | ProcessSpec::WfMultitype { .. }
                | ProcessSpec::Bep { .. }
                | ProcessSpec::SteppingStoneForward { .. }
        )
    }

    pub fn is_jump(&self) -> bool {
        !self.is_diffusion()
    }

    /// The dual chain `n(n-1) Σ α_k (f(n+k-2) - f(n)) + n Σ β_k (f(n+k-1) - f(n))`
    /// of a general one-dimensional diffusion.
    pub fn dual_chain(&self, n_max: u64) -> Result<ProcessSpec> {
        match self {
            ProcessSpec::WfGeneral1d { alpha, beta } => {
                let spec = ProcessSpec::WfDualChain { alpha: alpha.clone(), beta: beta.clone(), n_max };
                spec.validate()?;
                Ok(spec)
            }
            ProcessSpec::WfPositiveSelection { sigma } => {
                let spec = ProcessSpec::KingmanBlock { theta: 0.0, sigma: *sigma, n_max };
                spec.validate()?;
                Ok(spec)
            }
            ProcessSpec::SteppingStoneForward { kernel } => {
                let spec = ProcessSpec::SteppingStoneDual { kernel: kernel.clone(), n_max };
                spec.validate()?;
                Ok(spec)
            }
            other => Err(Error::Unsupported(format!("{} has no coalescent-type dual chain", other.kind()))),
        }
    }

    /// `x(1-x) d²/dx²`.
    pub fn wf_neutral() -> Self {
        ProcessSpec::WfGeneral1d { alpha: vec![0.0, 1.0, -1.0], beta: vec![] }
    }

    /// `x(1-x) d²/dx² + θ(1-x) d/dx`.
    pub fn wf_mutation(theta: f64) -> Self {
        ProcessSpec::WfGeneral1d { alpha: vec![0.0, 1.0, -1.0], beta: vec![theta, -theta] }
    }

    /// `x(1-x) d²/dx² - σ x(1-x) d/dx`.
    pub fn wf_negative_selection(sigma: f64) -> Self {
        ProcessSpec::WfGeneral1d { alpha: vec![0.0, 1.0, -1.0], beta: vec![0.0, -sigma, sigma] }
    }
}
