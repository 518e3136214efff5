//! Property tests of the structural invariants.

use duality_lab::algebra::{
    binomial_transform, build_representation, check_intertwiner, dn_matrix, RepresentationFamily, RepresentationParams,
};
use duality_lab::dualities::{
    evaluate, evaluate_direct, evaluate_log, transform_by_symmetry, DualityFamily, EvalPoint,
};
use duality_lab::montecarlo::{estimate_duality_side, path_rng, EstimatorConfig};
use duality_lab::processes::{generator_matrix, sample_jump, ProcessSpec, State};
use duality_lab::tolerances::{EXACT_RESIDUAL, LOG_SPACE_RELATIVE};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use statrs::function::gamma::gamma;

fn random_generator(rates: &[f64], size: usize) -> DMatrix<f64> {
    let mut q = DMatrix::from_fn(size, size, |i, j| if i == j { 0.0 } else { rates[i * size + j] });
    for i in 0..size {
        let s: f64 = q.row(i).sum();
        q[(i, i)] = -s;
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Under the binomial transform a_N becomes d/dρ and a_N† becomes
    /// multiplication by ρ, for f of D_N-degree at most N-1.
    #[test]
    fn binomial_transform_intertwines_ladders(n in 2usize..=16, seed in prop::collection::vec(-1.0f64..1.0, 17)) {
        let mut c = DVector::from_column_slice(&seed[..=n]);
        c[n] = 0.0;
        let f = dn_matrix(n) * &c;
        let set = build_representation(RepresentationFamily::HeisenbergFiniteN, RepresentationParams::finite(n), n).unwrap();
        let lowered = binomial_transform((set.lowering() * &f).as_slice(), n).unwrap();
        let raised = binomial_transform((set.raising() * &f).as_slice(), n).unwrap();
        let scale = f.amax().max(1.0) * 10f64.powi(n as i32 / 3);
        for r in 0..=n {
            let derivative = if r < n { (r + 1) as f64 * c[r + 1] } else { 0.0 };
            let shifted = if r > 0 { c[r - 1] } else { 0.0 };
            prop_assert!((lowered[r] - derivative).abs() <= EXACT_RESIDUAL * scale, "a_N, r={}: {} vs {}", r, lowered[r], derivative);
            prop_assert!((raised[r] - shifted).abs() <= EXACT_RESIDUAL * scale, "a_N†, r={}: {} vs {}", r, raised[r], shifted);
        }
    }

    /// With D invertible, every other duality function for the same pair is
    /// S·D with S commuting with K.
    #[test]
    fn dualities_differ_by_commuting_symmetries(
        rates in prop::collection::vec(0.0f64..2.0, 25),
        dseed in prop::collection::vec(-1.0f64..1.0, 25),
        poly in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let k = random_generator(&rates, 5);
        let d = DMatrix::from_row_slice(5, 5, &dseed) + DMatrix::identity(5, 5) * 3.0;
        let d_inv = d.clone().try_inverse().unwrap();
        let k_hat = (&d_inv * &k * &d).transpose();
        prop_assert!(check_intertwiner(&k, &k_hat, &d).unwrap().max_abs_residual <= EXACT_RESIDUAL);
        let s = DMatrix::identity(5, 5) * poly[0] + &k * poly[1] + &k * &k * poly[2];
        let d2 = transform_by_symmetry(&s, &d).unwrap();
        let scale = (&k * &d2).amax().max(1.0);
        prop_assert!(check_intertwiner(&k, &k_hat, &d2).unwrap().max_abs_residual <= EXACT_RESIDUAL * scale);
        let recovered = &d2 * &d_inv;
        prop_assert!((&recovered * &k - &k * &recovered).amax() <= EXACT_RESIDUAL * scale);
    }

    /// Log-space and direct evaluation agree where the direct form is finite.
    #[test]
    fn log_space_matches_direct(
        theta in 0.05f64..3.0,
        x in 0.01f64..1.0,
        k in prop::collection::vec(0u64..12, 3),
        xi in prop::collection::vec(0u64..6, 3),
    ) {
        let xs = vec![x / 2.0, x / 2.0, 1.0 - x];
        let n: u64 = k.iter().sum();
        let xi: Vec<u64> = xi.iter().zip(&k).map(|(&a, &b)| a.min(b)).collect();
        let cases = [
            (DualityFamily::ProductGamma { theta, d: 3 }, EvalPoint::mixed(xs.clone(), k.clone())),
            (DualityFamily::MoranSelfDual { n, theta, d: 3 }, EvalPoint::discrete(k.clone(), xi.clone())),
            (DualityFamily::GammaWeighted { m: 4.0 * theta }, EvalPoint::mixed([x], [k[0]])),
            (DualityFamily::LimitingSip, EvalPoint::mixed(xs, k.clone())),
        ];
        for (family, p) in cases {
            let direct = evaluate_direct(&family, &p).unwrap();
            let log = evaluate_log(&family, &p).unwrap().to_f64();
            if direct.is_finite() && direct != 0.0 {
                prop_assert!(((log - direct) / direct).abs() <= LOG_SPACE_RELATIVE, "{:?}: {} vs {}", family, log, direct);
            }
        }
    }

    /// A single product-gamma factor with s = m/2 is the gamma-weighted
    /// function up to the constant Γ(m/2).
    #[test]
    fn product_gamma_factor_is_gamma_weighted(m in 0.1f64..6.0, x in 0.0f64..1.0, k in 0u64..15) {
        // d = 2 and θ = m/4 give s = 2θ/(d-1) = m/2; the second factor is x_2^0 / Γ(s).
        let theta = m / 4.0;
        let pg = evaluate(&DualityFamily::ProductGamma { theta, d: 2 }, &EvalPoint::mixed([x, 1.0 - x], [k, 0])).unwrap();
        let gw = evaluate(&DualityFamily::GammaWeighted { m }, &EvalPoint::mixed([x], [k])).unwrap();
        let s = m / 2.0;
        let expected = gw / (gamma(s) * gamma(s));
        prop_assert!((pg - expected).abs() <= 1e-12 * expected.abs().max(1e-300), "{} vs {}", pg, expected);
    }

    /// SIP and Moran never connect states with different particle numbers.
    #[test]
    fn conserved_generators_stay_on_their_level(d in 2usize..=4, n in 1u64..=5, m in 0.0f64..3.0) {
        for spec in [ProcessSpec::Sip { d, m, n }, ProcessSpec::MoranMultitype { n, d, theta: m * (d as f64 - 1.0) / 4.0 }] {
            let g = generator_matrix(&spec).unwrap();
            g.verify().unwrap();
            for (i, a) in g.index.states().iter().enumerate() {
                for (j, b) in g.index.states().iter().enumerate() {
                    if g.q[(i, j)] != 0.0 {
                        prop_assert_eq!(a.iter().sum::<u64>(), b.iter().sum::<u64>());
                    }
                }
            }
        }
    }
}

#[test]
fn coefficient_conditions() {
    for spec in [ProcessSpec::wf_neutral(), ProcessSpec::wf_mutation(0.4), ProcessSpec::wf_negative_selection(1.2)] {
        spec.validate().unwrap();
    }
    let bad = ProcessSpec::WfGeneral1d { alpha: vec![0.0, -1.0, 1.0], beta: vec![] };
    assert!(bad.validate().is_err());
    let unbalanced = ProcessSpec::WfGeneral1d { alpha: vec![0.0, 1.0, -0.5], beta: vec![] };
    assert!(unbalanced.validate().is_err());
}

/// Path i depends only on (seed, i): simulating the paths in any order gives
/// the same endpoints.
#[test]
fn streams_do_not_depend_on_path_order() {
    let spec = ProcessSpec::MoranMultitype { n: 6, d: 3, theta: 0.7 };
    let forward: Vec<Vec<u64>> =
        (0..64).map(|i| sample_jump(&spec, &[2, 2, 2], 0.8, &mut path_rng(9, i)).unwrap()).collect();
    let mut reversed: Vec<Vec<u64>> =
        (0..64).rev().map(|i| sample_jump(&spec, &[2, 2, 2], 0.8, &mut path_rng(9, i)).unwrap()).collect();
    reversed.reverse();
    assert_eq!(forward, reversed);
}

#[test]
fn identical_configs_give_identical_estimates() {
    let cfg = EstimatorConfig { n_paths: 3_000, seed: 77, dt: 1e-2, t: 0.5, antithetic: true };
    let run = || {
        estimate_duality_side(
            &ProcessSpec::WfMultitype { d: 2, theta: 0.0 },
            &DualityFamily::LimitingSip,
            &State::Continuous(vec![0.3, 0.7]),
            &State::Discrete(vec![1, 1]),
            &cfg,
        )
        .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.se.to_bits(), b.se.to_bits());
}

/// Quadrupling the paths of the heterozygosity estimator halves its SE.
#[test]
fn heterozygosity_se_scaling() {
    let est = |n_paths| {
        let cfg = EstimatorConfig { n_paths, seed: 4, dt: 1e-2, t: 0.5, antithetic: false };
        estimate_duality_side(
            &ProcessSpec::WfMultitype { d: 2, theta: 0.0 },
            &DualityFamily::LimitingSip,
            &State::Continuous(vec![0.3, 0.7]),
            &State::Discrete(vec![1, 1]),
            &cfg,
        )
        .unwrap()
    };
    let ratio = est(5_000).se / est(20_000).se;
    assert!((ratio / 2.0 - 1.0).abs() <= 0.2, "SE ratio {ratio}");
}
