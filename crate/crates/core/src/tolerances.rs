//! Pinned numerical thresholds.
//!
//! Every threshold used by the verification suites, the CLI and the acceptance
//! tests is defined here so the numbers cannot drift between call sites.

/// Commutation relations and exact intertwiners evaluated in `f64`.
pub const EXACT_RESIDUAL: f64 = 1e-10;

/// Pointwise generator dualities (analytic derivatives, small grids).
pub const POINTWISE_RESIDUAL: f64 = 1e-9;

/// Time-evolved duality `e^{tK} D = D e^{tK̂ᵀ}`.
pub const SEMIGROUP_RESIDUAL: f64 = 1e-8;

/// Identification lemmas (SIP = Moran, BEP = Wright-Fisher).
pub const IDENTIFICATION: f64 = 1e-12;

/// Generator rows must sum to zero within this tolerance (scaled by the
/// largest rate in the row when that exceeds one).
pub const ROW_SUM: f64 = 1e-12;

/// Simplex coordinates must sum to one within this tolerance.
pub const SIMPLEX_SUM: f64 = 1e-12;

/// Closed-form example values versus matrix-exponential oracles.
pub const EXAMPLE_MATCH: f64 = 1e-10;

/// Binomial-transform identity `Σ_k D_N(k,n) ν_{N,ρ}(k) = ρ^n`.
pub const BINOMIAL_TRANSFORM: f64 = 1e-10;

/// Relative agreement between log-space and direct duality evaluation.
pub const LOG_SPACE_RELATIVE: f64 = 1e-12;

/// Invertibility check of the D_N matrix via solve residuals.
pub const SOLVE_RESIDUAL: f64 = 1e-6;

/// Lower bound on entries of evolved probability vectors.
pub const PROBABILITY_FLOOR: f64 = -1e-12;

/// Default number of combined standard errors accepted by a comparison.
pub const DEFAULT_SE_MULTIPLIER: f64 = 3.0;

/// Bias allowance for Euler-Maruyama comparisons, in units of `dt`.
pub const EULER_BIAS_PER_DT: f64 = 5.0;

/// Euler-Maruyama default step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Distance to the boundary at which a neutral two-type path is absorbed.
pub const ABSORPTION_EPS: f64 = 1e-12;
