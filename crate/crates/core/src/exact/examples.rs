//! Moments of the neutral Wright-Fisher diffusion computed through the
//! zero-mutation limiting duality with the inclusion process.
//!
//! Each oracle value is `E_ξ[D(ξ_t, x) 1{ℛ(ξ_t) = d}]` on SIP(0), evaluated
//! with the matrix exponential; the closed forms stated alongside the
//! computations are reported next to it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::exact_expectation;
use crate::dualities::{evaluate, occupied_sites, DualityFamily, EvalPoint};
use crate::error::{Error, Result};
use crate::processes::{generator_matrix, ProcessSpec};
use crate::tolerances::SIMPLEX_SUM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleId {
    /// `E[x_t y_t]` for two types.
    Heterozygosity,
    /// `E[x_t² y_t]` for two types.
    X2yTwoType,
    /// `E[x_1(t)⋯x_d(t)]`.
    DTypeProduct,
    /// `E[x_1(t)² x_2(t)⋯x_d(t)]`.
    X2ProductDType,
}

impl ExampleId {
    pub const ALL: [ExampleId; 4] =
        [ExampleId::Heterozygosity, ExampleId::X2yTwoType, ExampleId::DTypeProduct, ExampleId::X2ProductDType];

    pub fn name(&self) -> &'static str {
        match self {
            ExampleId::Heterozygosity => "heterozygosity",
            ExampleId::X2yTwoType => "x2y-two-type",
            ExampleId::DTypeProduct => "d-type-product",
            ExampleId::X2ProductDType => "x2-product-d-type",
        }
    }

    /// Whether agreement between the stated formula and the oracle is expected.
    pub fn asserted(&self) -> bool {
        matches!(self, ExampleId::Heterozygosity | ExampleId::DTypeProduct)
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown example id {s:?}")))
    }
}

/// Inputs shared by the examples. Two-type examples use `(x, y)`; the
/// `d`-type examples use `xs`, or the uniform point when `xs` is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleParams {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub d: usize,
    pub xs: Option<Vec<f64>>,
}

impl Default for ExampleParams {
    fn default() -> Self {
        ExampleParams { x: 0.3, y: 0.7, t: 0.5, d: 3, xs: None }
    }
}

impl ExampleParams {
    fn simplex_point(&self) -> Result<Vec<f64>> {
        let xs = match &self.xs {
            Some(v) => v.clone(),
            None => vec![1.0 / self.d as f64; self.d],
        };
        if xs.len() != self.d {
            return Err(Error::dims(format!("{} coordinates", self.d), xs.len()));
        }
        check_simplex(&xs)?;
        Ok(xs)
    }

    fn pair(&self) -> Result<Vec<f64>> {
        let xs = vec![self.x, self.y];
        check_simplex(&xs)?;
        Ok(xs)
    }

    fn validate(&self) -> Result<()> {
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::InvalidParameter(format!("t must be finite and >= 0, got {}", self.t)));
        }
        if self.d < 2 {
            return Err(Error::InvalidParameter(format!("d must be >= 2, got {}", self.d)));
        }
        Ok(())
    }
}

fn check_simplex(xs: &[f64]) -> Result<()> {
    let s: f64 = xs.iter().sum();
    if xs.iter().any(|v| !(0.0..=1.0).contains(v)) || (s - 1.0).abs() > SIMPLEX_SUM {
        return Err(Error::Domain(format!("{xs:?} is not a point of the simplex")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub id: ExampleId,
    pub paper_formula_value: f64,
    pub oracle_value: f64,
    pub abs_diff: f64,
    /// True when the two values are expected to agree.
    pub asserted: bool,
}

/// `E_ξ[D(ξ_t, x) 1{ℛ(ξ_t) = d}]` on SIP(0) with `|ξ|` particles on `d = len(x)` sites.
pub fn limiting_oracle(xs: &[f64], start: &[u64], t: f64) -> Result<f64> {
    let d = xs.len();
    if start.len() != d || occupied_sites(start) != d {
        return Err(Error::Domain(format!("start {start:?} must occupy all {d} sites")));
    }
    let n: u64 = start.iter().sum();
    let g = generator_matrix(&ProcessSpec::Sip { d, m: 0.0, n })?;
    let f = g
        .index
        .states()
        .iter()
        .map(|xi| {
            if occupied_sites(xi) == d {
                evaluate(&DualityFamily::LimitingSip, &EvalPoint::mixed(xs.to_vec(), xi.clone()))
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(exact_expectation(&g, &f, start, t)?.value)
}

/// The closed form given with each computation.
///
/// For `x2-product-d-type` the probability is taken from the last displayed
/// line, `e^{-2dt} + (1/d)(1 - e^{-2dt})` for every site.
pub fn paper_value(id: ExampleId, params: &ExampleParams) -> Result<f64> {
    params.validate()?;
    let t = params.t;
    Ok(match id {
        ExampleId::Heterozygosity => {
            let p = params.pair()?;
            p[0] * p[1] * (-t).exp()
        }
        ExampleId::X2yTwoType => {
            let p = params.pair()?;
            let (x, y) = (p[0], p[1]);
            let e = (-2.0 * t).exp();
            e / 2.0 * (x * x * y * (1.0 + e) + x * y * y * (1.0 - e))
        }
        ExampleId::DTypeProduct => {
            let xs = params.simplex_point()?;
            xs.iter().product::<f64>() * (-(params.d as f64 - 1.0) * t).exp()
        }
        ExampleId::X2ProductDType => {
            let xs = params.simplex_point()?;
            let d = params.d as f64;
            let e = (-2.0 * d * t).exp();
            let all: f64 = xs.iter().product();
            (0..params.d)
                .map(|i| {
                    let delta = if i == 0 { 1.0 } else { 0.0 };
                    let prob = e + (1.0 / d) * (1.0 - e) * delta + (1.0 - delta) * (1.0 / d) * (1.0 - e);
                    all * xs[i] * prob
                })
                .sum()
        }
    })
}

/// Oracle value and stated value for one example.
pub fn reproduce_example(id: ExampleId, params: &ExampleParams) -> Result<ExampleRecord> {
    params.validate()?;
    let paper = paper_value(id, params)?;
    let oracle = match id {
        ExampleId::Heterozygosity => limiting_oracle(&params.pair()?, &[1, 1], params.t)?,
        ExampleId::X2yTwoType => limiting_oracle(&params.pair()?, &[2, 1], params.t)?,
        ExampleId::DTypeProduct => limiting_oracle(&params.simplex_point()?, &vec![1; params.d], params.t)?,
        ExampleId::X2ProductDType => {
            let mut start = vec![1; params.d];
            start[0] = 2;
            limiting_oracle(&params.simplex_point()?, &start, params.t)?
        }
    };
    Ok(ExampleRecord {
        id,
        paper_formula_value: paper,
        oracle_value: oracle,
        abs_diff: (paper - oracle).abs(),
        asserted: id.asserted(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heterozygosity_defaults() {
        let r = reproduce_example(ExampleId::Heterozygosity, &ExampleParams::default()).unwrap();
        assert!((r.paper_formula_value - 0.21 * (-0.5f64).exp()).abs() < 1e-15);
        assert!(r.abs_diff < 1e-10);
    }

    #[test]
    fn ids_parse() {
        for id in ExampleId::ALL {
            assert_eq!(id.name().parse::<ExampleId>().unwrap(), id);
        }
        assert!("nope".parse::<ExampleId>().is_err());
    }

    #[test]
    fn partially_occupied_starts_rejected() {
        assert!(limiting_oracle(&[0.5, 0.5], &[2, 0], 1.0).is_err());
        let bad = ExampleParams { x: 0.3, y: 0.3, ..ExampleParams::default() };
        assert!(reproduce_example(ExampleId::Heterozygosity, &bad).is_err());
    }
}
