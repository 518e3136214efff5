//! Pointwise generator dualities `(K D(·, y))(x) = (K̂ D(x, ·))(y)` on a grid.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{Block, ResidualReport};
use crate::dualities::{evaluate, partials_in_x, DualityFamily, EvalPoint, Partials};
use crate::error::{Error, Result};
use crate::numeric::poly_eval;
use crate::processes::{drift_diffusion, transitions, ProcessSpec};

/// An operator acting on one argument of a duality function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideOperator {
    /// The generator of a process (diffusion or jump).
    Process(ProcessSpec),
    /// `Σ_r α_r(x) dʳ/dxʳ` for `r ≤ 2` on a one-dimensional argument;
    /// `coefficients[r]` holds the power coefficients of `α_r`. `r = 0` gives
    /// a multiplication operator.
    Differential { coefficients: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    First,
    Second,
}

/// Max over `points` of `|K_l D - K̂_r D|`, where `left` acts on the first
/// argument of `D` and `right` on the second. Analytic derivatives are used
/// where the catalog provides them, central differences with step `h` otherwise.
pub fn check_pointwise_diffusion_duality(
    left: &SideOperator,
    right: &SideOperator,
    family: &DualityFamily,
    points: &[EvalPoint],
    h: f64,
) -> Result<ResidualReport> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("no sample points".into()));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("finite-difference step must be > 0, got {h}")));
    }
    let mut worst = 0.0f64;
    for p in points {
        let l = apply(left, family, p, Side::First, h)?;
        let r = apply(right, family, p, Side::Second, h)?;
        let diff = (l - r).abs();
        if diff.is_nan() {
            return Err(Error::Numerical(format!("NaN residual at {p:?}")));
        }
        worst = worst.max(diff);
    }
    Ok(ResidualReport {
        identity: format!("{} vs {} with {}", describe(left), describe(right), family.kind()),
        max_abs_residual: worst,
        checked_block: Block { rows: 0..points.len(), cols: 0..1 },
    })
}

/// `(K D)(p)` with `K` acting on the first (`second = false`) or second argument.
pub fn apply_side(op: &SideOperator, family: &DualityFamily, p: &EvalPoint, second: bool, h: f64) -> Result<f64> {
    apply(op, family, p, if second { Side::Second } else { Side::First }, h)
}

fn describe(op: &SideOperator) -> String {
    match op {
        SideOperator::Process(s) => s.kind().to_string(),
        SideOperator::Differential { .. } => "differential operator".to_string(),
    }
}

fn apply(op: &SideOperator, family: &DualityFamily, p: &EvalPoint, side: Side, h: f64) -> Result<f64> {
    match op {
        SideOperator::Process(spec) if spec.is_jump() => apply_jump(spec, family, p, side),
        SideOperator::Process(spec) => {
            let (arg, partials) = continuous_partials(family, p, side, h)?;
            let (b, a) = drift_diffusion(spec, &arg)?;
            let (grad, hess) = match spec {
                ProcessSpec::WfMultitype { .. } => reduce_to_simplex_chart(&partials),
                _ => (partials.grad.clone(), partials.hess.clone()),
            };
            if grad.len() != b.len() {
                return Err(Error::dims(format!("{} coordinates", b.len()), grad.len()));
            }
            let mut v = 0.0;
            for i in 0..b.len() {
                v += b[i] * grad[i];
                for j in 0..b.len() {
                    v += 0.5 * a[(i, j)] * hess[(i, j)];
                }
            }
            Ok(v)
        }
        SideOperator::Differential { coefficients } => {
            if coefficients.len() > 3 {
                return Err(Error::Unsupported("differential operators above second order".into()));
            }
            let (arg, partials) = continuous_partials(family, p, side, h)?;
            if arg.len() != 1 {
                return Err(Error::dims("a one-dimensional argument", arg.len()));
            }
            let x = arg[0];
            let derivs = [partials.value, partials.grad[0], partials.hess[(0, 0)]];
            Ok(coefficients.iter().zip(derivs).map(|(c, dv)| poly_eval(c, x) * dv).sum())
        }
    }
}

/// Gradient and Hessian in the reduced coordinates `x_1..x_{d-1}` of a
/// function of the full simplex point, with `x_d = 1 - Σ x_j`.
fn reduce_to_simplex_chart(p: &Partials) -> (Vec<f64>, DMatrix<f64>) {
    let d = p.grad.len();
    let r = d - 1;
    let grad = (0..r).map(|i| p.grad[i] - p.grad[r]).collect();
    let hess = DMatrix::from_fn(r, r, |i, j| p.hess[(i, j)] - p.hess[(i, r)] - p.hess[(r, j)] + p.hess[(r, r)]);
    (grad, hess)
}

type Rebuild<'a> = Box<dyn Fn(Vec<u64>) -> EvalPoint + 'a>;

fn apply_jump(spec: &ProcessSpec, family: &DualityFamily, p: &EvalPoint, side: Side) -> Result<f64> {
    let (current, rebuild): (&[u64], Rebuild) = match (p, side) {
        (EvalPoint::Mixed { x, n }, Side::Second) => {
            let x = x.clone();
            (n, Box::new(move |m| EvalPoint::Mixed { x: x.clone(), n: m }))
        }
        (EvalPoint::Discrete { k, xi }, Side::Second) => {
            let k = k.clone();
            (xi, Box::new(move |m| EvalPoint::Discrete { k: k.clone(), xi: m }))
        }
        (EvalPoint::Discrete { k, xi }, Side::First) => {
            let xi = xi.clone();
            (k, Box::new(move |m| EvalPoint::Discrete { k: m, xi: xi.clone() }))
        }
        _ => {
            return Err(Error::Domain(format!(
                "{} cannot act on a continuous argument of {}",
                spec.kind(),
                family.kind()
            )))
        }
    };
    let here = evaluate(family, p)?;
    let mut v = 0.0;
    for (target, rate) in transitions(spec, current)? {
        v += rate * (evaluate(family, &rebuild(target))? - here);
    }
    Ok(v)
}

/// The continuous argument acted on, with value, gradient and Hessian of `D`
/// in that argument.
fn continuous_partials(family: &DualityFamily, p: &EvalPoint, side: Side, h: f64) -> Result<(Vec<f64>, Partials)> {
    match (p, side) {
        (EvalPoint::Mixed { x, .. }, Side::First) | (EvalPoint::Continuous { x, .. }, Side::First) => {
            let partials = match partials_in_x(family, p)? {
                Some(pt) => pt,
                None => finite_differences(family, p, side, h)?,
            };
            Ok((x.clone(), partials))
        }
        (EvalPoint::Continuous { x, y }, Side::Second) => {
            let partials = if matches!(family, DualityFamily::Exponential) {
                // e^{x·y} is symmetric in its arguments.
                partials_in_x(family, &EvalPoint::continuous(y.clone(), x.clone()))?
                    .ok_or_else(|| Error::Numerical("missing analytic partials".into()))?
            } else {
                finite_differences(family, p, side, h)?
            };
            Ok((y.clone(), partials))
        }
        _ => Err(Error::Unsupported(format!(
            "{} has no continuous argument on the requested side",
            family.kind()
        ))),
    }
}

fn finite_differences(family: &DualityFamily, p: &EvalPoint, side: Side, h: f64) -> Result<Partials> {
    let arg = match (p, side) {
        (EvalPoint::Mixed { x, .. } | EvalPoint::Continuous { x, .. }, Side::First) => x.clone(),
        (EvalPoint::Continuous { y, .. }, Side::Second) => y.clone(),
        _ => return Err(Error::Unsupported(format!("{} is not differentiable here", family.kind()))),
    };
    let at = |v: &[f64]| -> Result<f64> {
        let q = match (p, side) {
            (EvalPoint::Mixed { n, .. }, _) => EvalPoint::Mixed { x: v.to_vec(), n: n.clone() },
            (EvalPoint::Continuous { y, .. }, Side::First) => EvalPoint::Continuous { x: v.to_vec(), y: y.clone() },
            (EvalPoint::Continuous { x, .. }, Side::Second) => EvalPoint::Continuous { x: x.clone(), y: v.to_vec() },
            _ => unreachable!("checked above"),
        };
        evaluate(family, &q)
    };
    let d = arg.len();
    let f0 = at(&arg)?;
    let shifted = |i: usize, si: f64, j: usize, sj: f64| -> Result<f64> {
        let mut v = arg.clone();
        v[i] += si * h;
        v[j] += sj * h;
        at(&v)
    };
    let mut grad = vec![0.0; d];
    let mut hess = DMatrix::zeros(d, d);
    for i in 0..d {
        let mut up = arg.clone();
        let mut dn = arg.clone();
        up[i] += h;
        dn[i] -= h;
        let (fu, fd) = (at(&up)?, at(&dn)?);
        grad[i] = (fu - fd) / (2.0 * h);
        hess[(i, i)] = (fu - 2.0 * f0 + fd) / (h * h);
        for j in 0..i {
            let v = (shifted(i, 1.0, j, 1.0)? - shifted(i, 1.0, j, -1.0)? - shifted(i, -1.0, j, 1.0)?
                + shifted(i, -1.0, j, -1.0)?)
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(Partials { value: f0, grad, hess })
}
