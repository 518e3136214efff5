use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::state::{enumerate_states, EnumerationMode, StateIndex};
use super::ProcessSpec;
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, poly_eval};
use crate::tolerances::{ROW_SUM, SIMPLEX_SUM};

/// Dense rate matrix over an enumerated state space.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    pub q: DMatrix<f64>,
    pub index: StateIndex,
    /// Name of a quantity every transition preserves, if any.
    pub conserved: Option<String>,
    pub process: String,
}

impl GeneratorMatrix {
    pub fn len(&self) -> usize {
        self.q.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.q.nrows() == 0
    }

    /// Largest absolute row sum.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.len())
            .map(|i| compensated_sum(self.q.row(i).iter().copied()).abs())
            .fold(0.0, f64::max)
    }

    /// Checks non-negative off-diagonals, zero row sums and, when a
    /// conservation law is declared, that no transition changes the total.
    pub fn verify(&self) -> Result<()> {
        for i in 0..self.len() {
            for j in 0..self.len() {
                let v = self.q[(i, j)];
                if !v.is_finite() || (i != j && v < 0.0) {
                    return Err(Error::Numerical(format!("rate q({i},{j}) = {v} is invalid")));
                }
                if i != j && v != 0.0 && self.conserved.is_some() {
                    let (a, b) = (self.index.state(i), self.index.state(j));
                    if a.iter().sum::<u64>() != b.iter().sum::<u64>() {
                        return Err(Error::Numerical(format!("transition {a:?} -> {b:?} breaks conservation")));
                    }
                }
            }
            let s = compensated_sum(self.q.row(i).iter().copied());
            if s.abs() > ROW_SUM {
                return Err(Error::Numerical(format!("row {i} sums to {s}")));
            }
        }
        Ok(())
    }
}

fn push(out: &mut Vec<(Vec<u64>, f64)>, target: Vec<u64>, rate: f64) {
    if rate > 0.0 {
        out.push((target, rate));
    }
}

fn expect_len(k: &[u64], d: usize) -> Result<()> {
    if k.len() == d {
        Ok(())
    } else {
        Err(Error::dims(format!("state of length {d}"), k.len()))
    }
}

fn moved(k: &[u64], from: usize, to: usize) -> Vec<u64> {
    let mut t = k.to_vec();
    t[from] -= 1;
    t[to] += 1;
    t
}

/// Outgoing transitions `(target, rate)` of a jump process from state `k`.
pub fn transitions(spec: &ProcessSpec, k: &[u64]) -> Result<Vec<(Vec<u64>, f64)>> {
    spec.validate()?;
    let mut out = Vec::new();
    match spec {
        ProcessSpec::Sip { d, m, .. } => {
            expect_len(k, *d)?;
            for a in 0..*d {
                for b in 0..*d {
                    if a != b && k[a] > 0 {
                        push(&mut out, moved(k, a, b), 0.5 * k[a] as f64 * (k[b] as f64 + m / 2.0));
                    }
                }
            }
        }
        ProcessSpec::MoranMultitype { n, d, theta } => {
            expect_len(k, *d)?;
            if k.iter().sum::<u64>() != *n {
                return Err(Error::Domain(format!("Moran state {k:?} does not sum to N={n}")));
            }
            moran_reduced(&mut out, &k[..d - 1], *n, 2.0 * theta / (*d as f64 - 1.0));
        }
        ProcessSpec::MoranTwoType { n, prefactor } => {
            expect_len(k, 1)?;
            let (kk, nn) = (k[0], *n);
            if kk > nn {
                return Err(Error::Domain(format!("k={kk} exceeds N={nn}")));
            }
            let x = kk as f64 / nn as f64;
            let rate = prefactor * x * (1.0 - x);
            if kk < nn {
                push(&mut out, vec![kk + 1], rate);
            }
            if kk > 0 {
                push(&mut out, vec![kk - 1], rate);
            }
        }
        ProcessSpec::KingmanBlock { theta, sigma, n_max } => {
            expect_len(k, 1)?;
            let n = k[0];
            if n > *n_max {
                return Err(Error::Domain(format!("n={n} exceeds the truncation n_max={n_max}")));
            }
            let nf = n as f64;
            if n > 0 {
                push(&mut out, vec![n - 1], nf * (nf - 1.0) + theta * nf);
            }
            if n < *n_max {
                push(&mut out, vec![n + 1], sigma * nf);
            }
        }
        ProcessSpec::WfDualChain { alpha, beta, n_max } => {
            expect_len(k, 1)?;
            let n = k[0];
            if n > *n_max {
                return Err(Error::Domain(format!("n={n} exceeds the truncation n_max={n_max}")));
            }
            let nf = n as f64;
            let mut jump = |shift: i64, rate: f64| {
                let target = n as i64 + shift;
                if shift != 0 && target >= 0 && target as u64 <= *n_max {
                    push(&mut out, vec![target as u64], rate);
                }
            };
            for (kk, &a) in alpha.iter().enumerate() {
                if kk != 2 {
                    jump(kk as i64 - 2, nf * (nf - 1.0) * a);
                }
            }
            for (kk, &b) in beta.iter().enumerate() {
                if kk != 1 {
                    jump(kk as i64 - 1, nf * b);
                }
            }
        }
        ProcessSpec::SteppingStoneDual { kernel, n_max } => {
            let s = kernel.len();
            expect_len(k, s)?;
            if k.iter().sum::<u64>() > *n_max {
                return Err(Error::Domain(format!("{k:?} exceeds the truncation n_max={n_max}")));
            }
            for a in 0..s {
                if k[a] == 0 {
                    continue;
                }
                let na = k[a] as f64;
                #[allow(clippy::needless_range_loop)]
                for b in 0..s {
                    if a != b {
                        // The drift Σ_j (p(k,j) + p(j,k))(x_j - x_k) moves one
                        // lineage from a to b at rate n_a (p(a,b) + p(b,a)).
                        push(&mut out, moved(k, a, b), na * (kernel[a][b] + kernel[b][a]));
                    }
                }
                let mut t = k.to_vec();
                t[a] -= 1;
                push(&mut out, t, na * (na - 1.0));
            }
        }
        other => {
            return Err(Error::Unsupported(format!("{} is not a jump process", other.kind())));
        }
    }
    Ok(out)
}

/// Moran rates in reduced coordinates `k_1..k_{d-1}`, with `k_d = N - Σk`
/// implicit; each target is written back as a full occupation vector.
fn moran_reduced(out: &mut Vec<(Vec<u64>, f64)>, k: &[u64], n: u64, s: f64) {
    let r = k.len();
    let rest = n - k.iter().sum::<u64>();
    let full = |v: Vec<u64>| {
        let mut f = v.clone();
        f.push(n - v.iter().sum::<u64>());
        f
    };
    for i in 0..r {
        for j in (i + 1)..r {
            if k[i] > 0 {
                let mut t = k.to_vec();
                t[i] -= 1;
                t[j] += 1;
                push(out, full(t), 0.5 * k[i] as f64 * (k[j] as f64 + s));
            }
            if k[j] > 0 {
                let mut t = k.to_vec();
                t[i] += 1;
                t[j] -= 1;
                push(out, full(t), 0.5 * k[j] as f64 * (k[i] as f64 + s));
            }
        }
    }
    for i in 0..r {
        if rest > 0 {
            let mut t = k.to_vec();
            t[i] += 1;
            push(out, full(t), 0.5 * rest as f64 * (k[i] as f64 + s));
        }
        if k[i] > 0 {
            let mut t = k.to_vec();
            t[i] -= 1;
            push(out, full(t), 0.5 * k[i] as f64 * (rest as f64 + s));
        }
    }
}

fn default_index(spec: &ProcessSpec) -> Result<(StateIndex, Option<String>)> {
    let conserved = Some("particle number".to_string());
    match spec {
        ProcessSpec::Sip { d, n, .. } => Ok((enumerate_states(*d, *n, EnumerationMode::Conserved)?, conserved)),
        ProcessSpec::MoranMultitype { n, d, .. } => {
            Ok((enumerate_states(*d, *n, EnumerationMode::Conserved)?, conserved))
        }
        ProcessSpec::MoranTwoType { n, .. } => Ok((enumerate_states(1, *n, EnumerationMode::DownClosed)?, None)),
        ProcessSpec::KingmanBlock { n_max, .. } | ProcessSpec::WfDualChain { n_max, .. } => {
            Ok((enumerate_states(1, *n_max, EnumerationMode::DownClosed)?, None))
        }
        ProcessSpec::SteppingStoneDual { kernel, n_max } => {
            Ok((enumerate_states(kernel.len(), *n_max, EnumerationMode::DownClosed)?, None))
        }
        other => Err(Error::Unsupported(format!("{} is not a jump process", other.kind()))),
    }
}

/// Generator matrix of a jump process over its natural state space: the
/// conserved simplex for SIP and Moran, `0..=n_max` (or `Σn ≤ n_max`) for
/// truncated chains.
pub fn generator_matrix(spec: &ProcessSpec) -> Result<GeneratorMatrix> {
    spec.validate()?;
    let (index, conserved) = default_index(spec)?;
    build(spec, index, conserved)
}

/// Generator matrix over a caller-supplied state space, which must be closed
/// under the dynamics.
pub fn generator_on(spec: &ProcessSpec, index: StateIndex) -> Result<GeneratorMatrix> {
    spec.validate()?;
    let conserved = matches!(spec, ProcessSpec::Sip { .. } | ProcessSpec::MoranMultitype { .. })
        .then(|| "particle number".to_string());
    build(spec, index, conserved)
}

fn build(spec: &ProcessSpec, index: StateIndex, conserved: Option<String>) -> Result<GeneratorMatrix> {
    let size = index.len();
    let mut q = DMatrix::zeros(size, size);
    for i in 0..size {
        let mut off = Vec::new();
        for (target, rate) in transitions(spec, index.state(i))? {
            let j = index.position(&target).ok_or_else(|| {
                Error::Domain(format!("transition {:?} -> {target:?} leaves the state space", index.state(i)))
            })?;
            q[(i, j)] += rate;
        }
        for j in 0..size {
            if j != i {
                off.push(q[(i, j)]);
            }
        }
        q[(i, i)] = -compensated_sum(off);
    }
    let g = GeneratorMatrix { q, index, conserved, process: spec.kind().to_string() };
    g.verify()?;
    Ok(g)
}

fn in_unit(v: f64) -> bool {
    (-SIMPLEX_SUM..=1.0 + SIMPLEX_SUM).contains(&v)
}

/// Drift `b(x)` and diffusion matrix `a(x)` with `L = ½ Σ a_ij ∂_i∂_j + Σ b_i ∂_i`.
///
/// `wf-multitype` takes the full simplex point `(x_1..x_d)` and returns
/// coefficients in the reduced coordinates `x_1..x_{d-1}`; `bep` works on all
/// `d` coordinates; one-dimensional kinds take `[x]`.
pub fn drift_diffusion(spec: &ProcessSpec, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
    spec.validate()?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite state {x:?}")));
    }
    let (b, a) = match spec {
        ProcessSpec::WfGeneral1d { alpha, beta } => {
            one_dim(x)?;
            (DVector::from_element(1, poly_eval(beta, x[0])), DMatrix::from_element(1, 1, 2.0 * poly_eval(alpha, x[0])))
        }
        ProcessSpec::WfPositiveSelection { sigma } => {
            one_dim(x)?;
            let h = x[0] * (1.0 - x[0]);
            (DVector::from_element(1, sigma * h), DMatrix::from_element(1, 1, 2.0 * h))
        }
        ProcessSpec::WfMultitype { d, theta } => wf_multitype_reduced(*d, *theta, x)?,
        ProcessSpec::Bep { d, m } => {
            if x.len() != *d {
                return Err(Error::dims(format!("state of length {d}"), x.len()));
            }
            if x.iter().any(|&v| v < -SIMPLEX_SUM) {
                return Err(Error::Domain(format!("BEP state {x:?} has a negative coordinate")));
            }
            let s: f64 = x.iter().sum();
            let a = DMatrix::from_fn(*d, *d, |i, j| if i == j { x[i] * (s - x[i]) } else { -x[i] * x[j] });
            let b = DVector::from_fn(*d, |k, _| m / 4.0 * (s - *d as f64 * x[k]));
            (b, a)
        }
        ProcessSpec::SteppingStoneForward { kernel } => {
            let s = kernel.len();
            if x.len() != s {
                return Err(Error::dims(format!("state of length {s}"), x.len()));
            }
            if !x.iter().all(|&v| in_unit(v)) {
                return Err(Error::Domain(format!("stepping-stone state {x:?} leaves [0,1]^S")));
            }
            let b = DVector::from_fn(s, |k, _| {
                compensated_sum((0..s).map(|j| (kernel[k][j] + kernel[j][k]) * (x[j] - x[k])))
            });
            let a = DMatrix::from_fn(s, s, |i, j| if i == j { 2.0 * x[i] * (1.0 - x[i]) } else { 0.0 });
            (b, a)
        }
        other => return Err(Error::Unsupported(format!("{} is not a diffusion", other.kind()))),
    };
    check_psd(&a, x)?;
    Ok((b, a))
}

fn one_dim(x: &[f64]) -> Result<()> {
    if x.len() != 1 {
        return Err(Error::dims("state of length 1", x.len()));
    }
    if !in_unit(x[0]) {
        return Err(Error::Domain(format!("x = {} is outside [0,1]", x[0])));
    }
    Ok(())
}

/// Multitype Wright-Fisher coefficients in reduced coordinates.
pub fn wf_multitype_reduced(d: usize, theta: f64, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if x.len() != d {
        return Err(Error::dims(format!("full simplex point of length {d}"), x.len()));
    }
    let s: f64 = x.iter().sum();
    if x.iter().any(|&v| v < -SIMPLEX_SUM) || (s - 1.0).abs() > SIMPLEX_SUM {
        return Err(Error::Domain(format!("{x:?} is not on the simplex")));
    }
    let r = d - 1;
    let a = DMatrix::from_fn(r, r, |i, j| if i == j { x[i] * (1.0 - x[i]) } else { -x[i] * x[j] });
    let b = DVector::from_fn(r, |i, _| theta / (d as f64 - 1.0) * (1.0 - d as f64 * x[i]));
    Ok((b, a))
}

fn check_psd(a: &DMatrix<f64>, x: &[f64]) -> Result<()> {
    let scale = a.amax().max(1.0);
    let min = if a.nrows() == 1 {
        a[(0, 0)]
    } else {
        SymmetricEigen::new(a.clone()).eigenvalues.min()
    };
    if min < -1e-12 * scale {
        return Err(Error::Domain(format!(
            "diffusion matrix is not positive semidefinite at {x:?} (eigenvalue {min})"
        )));
    }
    Ok(())
}
