use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use super::generator::{drift_diffusion, transitions};
use super::ProcessSpec;
use crate::error::{Error, Result};
use crate::tolerances::ABSORPTION_EPS;

/// Standard normal draws, optionally negated (the antithetic partner path).
pub struct NormalSource<'a, R: Rng> {
    rng: &'a mut R,
    negate: bool,
}

impl<'a, R: Rng> NormalSource<'a, R> {
    pub fn new(rng: &'a mut R, negate: bool) -> Self {
        NormalSource { rng, negate }
    }

    fn next(&mut self) -> f64 {
        let z: f64 = StandardNormal.sample(self.rng);
        if self.negate {
            -z
        } else {
            z
        }
    }
}

/// Exact continuous-time simulation of a jump process up to time `t`.
pub fn sample_jump<R: Rng>(spec: &ProcessSpec, k0: &[u64], t: f64, rng: &mut R) -> Result<Vec<u64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("horizon must be finite and >= 0, got {t}")));
    }
    let mut state = k0.to_vec();
    // Validates the start even for a zero horizon.
    let mut out = transitions(spec, &state)?;
    let mut clock = 0.0;
    loop {
        let total: f64 = out.iter().map(|(_, r)| r).sum();
        if !total.is_finite() {
            return Err(Error::Numerical(format!("exit rate from {state:?} is not finite")));
        }
        if total <= 0.0 {
            return Ok(state);
        }
        clock += Exp::new(total).map_err(|e| Error::Numerical(e.to_string()))?.sample(rng);
        if clock > t {
            return Ok(state);
        }
        let mut u = rng.random::<f64>() * total;
        let mut next = out.len() - 1;
        for (i, (_, r)) in out.iter().enumerate() {
            if u < *r {
                next = i;
                break;
            }
            u -= r;
        }
        state = out.swap_remove(next).0;
        out = transitions(spec, &state)?;
    }
}

/// Euler–Maruyama simulation of a diffusion up to time `t`.
pub fn sample_diffusion<R: Rng>(spec: &ProcessSpec, x0: &[f64], t: f64, dt: f64, rng: &mut R) -> Result<Vec<f64>> {
    sample_diffusion_with(spec, x0, t, dt, &mut NormalSource::new(rng, false))
}

/// Coordinates the scheme integrates, and how to map back.
enum Chart {
    /// One coordinate in `[0,1]`.
    Interval,
    /// Reduced simplex coordinates `x_1..x_{d-1}`.
    Simplex,
    /// Non-negative orthant, total preserved.
    Orthant(f64),
    /// Unit cube.
    Cube,
}

/// Euler–Maruyama with an explicit normal source. The number of steps is
/// `ceil(t/dt)` with uniform step `t / steps`. After each step coordinates are
/// clipped back into the domain (and renormalized on the simplex); in one
/// dimension a path within `1e-12` of an absorbing endpoint is frozen there.
pub fn sample_diffusion_with<R: Rng>(
    spec: &ProcessSpec,
    x0: &[f64],
    t: f64,
    dt: f64,
    normals: &mut NormalSource<'_, R>,
) -> Result<Vec<f64>> {
    if !spec.is_diffusion() {
        return Err(Error::Unsupported(format!("{} is not a diffusion", spec.kind())));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("horizon must be finite and >= 0, got {t}")));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    drift_diffusion(spec, x0)?;
    if t == 0.0 {
        return Ok(x0.to_vec());
    }
    if dt >= t {
        return Err(Error::InvalidParameter(format!("dt = {dt} must be smaller than t = {t}")));
    }
    let chart = match spec {
        ProcessSpec::WfGeneral1d { .. } | ProcessSpec::WfPositiveSelection { .. } => Chart::Interval,
        ProcessSpec::WfMultitype { .. } => Chart::Simplex,
        ProcessSpec::Bep { .. } => Chart::Orthant(x0.iter().sum()),
        _ => Chart::Cube,
    };
    let steps = (t / dt - 1e-9).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let sqrt_h = h.sqrt();
    let mut x = x0.to_vec();
    let one_dim = matches!(chart, Chart::Interval) || (matches!(chart, Chart::Simplex) && x.len() == 2);
    for _ in 0..steps {
        if one_dim {
            if let Some(frozen) = absorbed(spec, &x)? {
                return Ok(frozen);
            }
        }
        let (b, a) = drift_diffusion(spec, &x)?;
        let sigma = noise_factor(&a);
        let z = DVector::from_fn(a.nrows(), |_, _| normals.next());
        let dx = b * h + sigma * z * sqrt_h;
        match chart {
            Chart::Simplex => {
                let r = x.len() - 1;
                let mut y: Vec<f64> = (0..r).map(|i| x[i] + dx[i]).collect();
                y.push(1.0 - y.iter().sum::<f64>());
                x = project_simplex(y);
            }
            Chart::Orthant(total) => {
                let mut y: Vec<f64> = x.iter().zip(dx.iter()).map(|(v, d)| (v + d).max(0.0)).collect();
                let s: f64 = y.iter().sum();
                if s > 0.0 {
                    y.iter_mut().for_each(|v| *v *= total / s);
                }
                x = y;
            }
            Chart::Interval | Chart::Cube => {
                x = x.iter().zip(dx.iter()).map(|(v, d)| (v + d).clamp(0.0, 1.0)).collect();
            }
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::Numerical(format!("NaN in {} path", spec.kind())));
        }
    }
    Ok(x)
}

/// Clips to non-negative entries and rescales onto `Σ = 1`.
fn project_simplex(mut y: Vec<f64>) -> Vec<f64> {
    y.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    let s: f64 = y.iter().sum();
    y.iter_mut().for_each(|v| *v /= s);
    y
}

/// Returns the boundary point if `x` is within `ABSORPTION_EPS` of an
/// endpoint where both coefficients vanish.
fn absorbed(spec: &ProcessSpec, x: &[f64]) -> Result<Option<Vec<f64>>> {
    let v = x[0];
    for edge in [0.0, 1.0] {
        if (v - edge).abs() <= ABSORPTION_EPS {
            let point = if x.len() == 2 { vec![edge, 1.0 - edge] } else { vec![edge] };
            let (b, a) = drift_diffusion(spec, &point)?;
            if b[0] == 0.0 && a[(0, 0)] == 0.0 {
                return Ok(Some(point));
            }
        }
    }
    Ok(None)
}

/// Symmetric square root of a positive semidefinite matrix, negative
/// round-off eigenvalues clipped to zero.
fn noise_factor(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.nrows() == 1 {
        return DMatrix::from_element(1, 1, a[(0, 0)].max(0.0).sqrt());
    }
    if a.iter().all(|v| *v == 0.0) {
        return a.clone();
    }
    let eig = SymmetricEigen::new(a.clone());
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_horizon_returns_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k = sample_jump(&ProcessSpec::Sip { d: 2, m: 1.0, n: 3 }, &[1, 2], 0.0, &mut rng).unwrap();
        assert_eq!(k, vec![1, 2]);
        let x = sample_diffusion(&ProcessSpec::wf_neutral(), &[0.3], 0.0, 1e-3, &mut rng).unwrap();
        assert_eq!(x, vec![0.3]);
    }

    #[test]
    fn absorbing_states_stay_put() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = ProcessSpec::KingmanBlock { theta: 0.0, sigma: 0.0, n_max: 10 };
        for t in [0.1, 1.0, 100.0] {
            assert_eq!(sample_jump(&spec, &[1], t, &mut rng).unwrap(), vec![1]);
        }
        let wf = ProcessSpec::WfMultitype { d: 2, theta: 0.0 };
        assert_eq!(sample_diffusion(&wf, &[0.0, 1.0], 1.0, 1e-2, &mut rng).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn paths_stay_in_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let wf = ProcessSpec::WfMultitype { d: 3, theta: 0.2 };
        for _ in 0..200 {
            let x = sample_diffusion(&wf, &[0.2, 0.3, 0.5], 0.5, 1e-2, &mut rng).unwrap();
            assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
            assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let bep = ProcessSpec::Bep { d: 3, m: 1.0 };
        let y = sample_diffusion(&bep, &[1.0, 0.5, 0.5], 0.5, 1e-2, &mut rng).unwrap();
        assert!((y.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn jump_paths_conserve_particles() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = ProcessSpec::Sip { d: 3, m: 0.5, n: 5 };
        for _ in 0..100 {
            let k = sample_jump(&spec, &[2, 2, 1], 2.0, &mut rng).unwrap();
            assert_eq!(k.iter().sum::<u64>(), 5);
        }
    }

    #[test]
    fn invalid_steps_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let wf = ProcessSpec::wf_neutral();
        assert!(sample_diffusion(&wf, &[0.3], 0.01, 0.01, &mut rng).is_err());
        assert!(sample_diffusion(&wf, &[0.3], 1.0, 0.0, &mut rng).is_err());
        assert!(sample_diffusion(&ProcessSpec::Sip { d: 2, m: 0.0, n: 1 }, &[0.3], 1.0, 0.1, &mut rng).is_err());
    }

    #[test]
    fn antithetic_source_negates() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let (mut pa, mut pb) = (NormalSource::new(&mut a, false), NormalSource::new(&mut b, true));
        for _ in 0..10 {
            assert_eq!(pa.next(), -pb.next());
        }
    }

    #[test]
    fn noise_factor_squares_back() {
        let a = DMatrix::from_row_slice(2, 2, &[0.21, -0.06, -0.06, 0.16]);
        let s = noise_factor(&a);
        assert!((&s * &s - &a).amax() < 1e-14);
    }
}
