//! Seeded Monte Carlo estimates of one side of a duality relation
//! `E_x D(X_t, x̂)` and statistical comparison against another estimate or an
//! exact value.
//!
//! Path `i` draws from the ChaCha8 stream `(seed, i)`, so results do not
//! depend on how paths are scheduled across threads. Path values are collected
//! in index order and summed with compensated summation.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dualities::{evaluate, occupied_sites, DualityFamily, EvalPoint};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::processes::{sample_diffusion_with, sample_jump, NormalSource, ProcessSpec, State};
use crate::tolerances::{DEFAULT_SE_MULTIPLIER, EULER_BIAS_PER_DT};

pub const MIN_PATHS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub n_paths: u64,
    pub seed: u64,
    /// Euler–Maruyama step, used only for diffusions.
    pub dt: f64,
    pub t: f64,
    /// Pair each diffusion path with its negated-noise partner; the pair
    /// average counts as one sample. Rejected for jump processes.
    pub antithetic: bool,
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < MIN_PATHS {
            return Err(Error::InvalidParameter(format!("n_paths must be >= {MIN_PATHS}, got {}", self.n_paths)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::InvalidParameter(format!("t must be finite and >= 0, got {}", self.t)));
        }
        Ok(())
    }

    /// Euler bias allowance `5·dt` for diffusion estimates.
    pub fn bias_budget(&self) -> f64 {
        EULER_BIAS_PER_DT * self.dt
    }
}

/// Sample mean with its standard error over `n` independent samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: u64,
}

impl Estimate {
    /// Mean and `sqrt(s²/n)` with the unbiased sample variance.
    pub fn from_samples(samples: &[f64]) -> Result<Estimate> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::InvalidParameter("no samples".into()));
        }
        let mean = compensated_sum(samples.iter().copied()) / n as f64;
        let se = if n > 1 {
            let ss = compensated_sum(samples.iter().map(|v| (v - mean) * (v - mean)));
            (ss / (n as f64 - 1.0) / n as f64).sqrt()
        } else {
            0.0
        };
        if !mean.is_finite() || !se.is_finite() {
            return Err(Error::Numerical(format!("non-finite estimate: mean {mean}, se {se}")));
        }
        Ok(Estimate { mean, se, n: n as u64 })
    }
}

/// Right-hand side of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Reference {
    Exact { value: f64 },
    Estimate(Estimate),
}

impl Reference {
    pub fn value(&self) -> f64 {
        match self {
            Reference::Exact { value } => *value,
            Reference::Estimate(e) => e.mean,
        }
    }

    fn se(&self) -> f64 {
        match self {
            Reference::Exact { .. } => 0.0,
            Reference::Estimate(e) => e.se,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub lhs: Estimate,
    pub rhs: Reference,
    pub combined_se: f64,
    /// `|Δ| / combined SE`; infinite when the SE is zero and `Δ ≠ 0`.
    pub z: f64,
    pub tolerance_multiplier: f64,
    pub bias_budget: f64,
    pub pass: bool,
    pub metadata: BTreeMap<String, String>,
}

impl ComparisonReport {
    pub fn with_metadata(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.insert(key.into(), value.to_string());
        self
    }
}

/// Passes iff `|lhs - rhs| ≤ multiplier · combined SE + bias_budget`.
pub fn compare(lhs: Estimate, rhs: Reference, tolerance_multiplier: f64, bias_budget: f64) -> ComparisonReport {
    let diff = (lhs.mean - rhs.value()).abs();
    let combined_se = lhs.se.hypot(rhs.se());
    let z = if diff == 0.0 {
        0.0
    } else if combined_se == 0.0 {
        f64::INFINITY
    } else {
        diff / combined_se
    };
    ComparisonReport {
        lhs,
        rhs,
        combined_se,
        z,
        tolerance_multiplier,
        bias_budget,
        pass: diff <= tolerance_multiplier * combined_se + bias_budget,
        metadata: BTreeMap::new(),
    }
}

/// `compare` with the default multiplier of 3.
pub fn compare_default(lhs: Estimate, rhs: Reference, bias_budget: f64) -> ComparisonReport {
    compare(lhs, rhs, DEFAULT_SE_MULTIPLIER, bias_budget)
}

/// Generator for path `index`: ChaCha8 seeded by `seed` on stream `index`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Where the simulated state goes in the duality function.
fn eval_point(family: &DualityFamily, state: &State, frozen: &State) -> Result<EvalPoint> {
    Ok(match (state, frozen) {
        (State::Continuous(x), State::Discrete(n)) => EvalPoint::mixed(x.clone(), n.clone()),
        (State::Discrete(n), State::Continuous(x)) => EvalPoint::mixed(x.clone(), n.clone()),
        (State::Continuous(x), State::Continuous(y)) => EvalPoint::continuous(x.clone(), y.clone()),
        (State::Discrete(k), State::Discrete(xi)) => EvalPoint::discrete(k.clone(), xi.clone()),
    })
    .and_then(|p| {
        let mixed = matches!(p, EvalPoint::Mixed { .. });
        if mixed != family.is_mixed() {
            Err(Error::Domain(format!("{} does not take the supplied argument types", family.kind())))
        } else {
            Ok(p)
        }
    })
}

/// Mean and SE of `D(X_t, frozen)` where `X` follows `spec` from `start`.
///
/// The simulated state fills whichever argument of `D` matches its type; for
/// two discrete arguments it is the first one. For the zero-mutation limiting
/// families the simulated chain must start with every site occupied, and
/// each path contributes `D · 1{all sites still occupied at t}`.
pub fn estimate_duality_side(
    spec: &ProcessSpec,
    family: &DualityFamily,
    start: &State,
    frozen: &State,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    spec.validate()?;
    family.validate()?;
    let value_at = |endpoint: &State| -> Result<f64> {
        let p = eval_point(family, endpoint, frozen)?;
        let v = evaluate(family, &p)
            .map_err(|e| Error::Domain(format!("duality function at sampled endpoint {endpoint:?}: {e}")))?;
        if family.is_limiting() {
            if let State::Discrete(k) = endpoint {
                if occupied_sites(k) < k.len() {
                    return Ok(0.0);
                }
            }
        }
        Ok(v)
    };
    if family.is_limiting() {
        for s in [start, frozen] {
            if let State::Discrete(k) = s {
                if occupied_sites(k) < k.len() {
                    return Err(Error::Domain(format!(
                        "limiting duality needs every site occupied, {k:?} occupies {} of {}",
                        occupied_sites(k),
                        k.len()
                    )));
                }
            }
        }
    }
    // Degenerate horizon: no randomness at all.
    if cfg.t == 0.0 {
        return Ok(Estimate { mean: value_at(start)?, se: 0.0, n: cfg.n_paths });
    }
    let samples: Vec<f64> = match start {
        State::Continuous(x0) => {
            if !spec.is_diffusion() {
                return Err(Error::Domain(format!("{} needs a discrete start", spec.kind())));
            }
            (0..cfg.n_paths)
                .into_par_iter()
                .map(|i| {
                    let mut rng = path_rng(cfg.seed, i);
                    if cfg.antithetic {
                        let mut twin = rng.clone();
                        let a = sample_diffusion_with(spec, x0, cfg.t, cfg.dt, &mut NormalSource::new(&mut rng, false))?;
                        let b = sample_diffusion_with(spec, x0, cfg.t, cfg.dt, &mut NormalSource::new(&mut twin, true))?;
                        Ok(0.5 * (value_at(&State::Continuous(a))? + value_at(&State::Continuous(b))?))
                    } else {
                        let a = sample_diffusion_with(spec, x0, cfg.t, cfg.dt, &mut NormalSource::new(&mut rng, false))?;
                        value_at(&State::Continuous(a))
                    }
                })
                .collect::<Result<_>>()?
        }
        State::Discrete(k0) => {
            if !spec.is_jump() {
                return Err(Error::Domain(format!("{} needs a continuous start", spec.kind())));
            }
            if cfg.antithetic {
                return Err(Error::InvalidParameter("antithetic variates apply to diffusions only".into()));
            }
            (0..cfg.n_paths)
                .into_par_iter()
                .map(|i| {
                    let mut rng = path_rng(cfg.seed, i);
                    value_at(&State::Discrete(sample_jump(spec, k0, cfg.t, &mut rng)?))
                })
                .collect::<Result<_>>()?
        }
    };
    Estimate::from_samples(&samples)
}
