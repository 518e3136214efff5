//! Properties of the ladder representations and their intertwiners.

use duality_lab::algebra::{
    binomial_transform, binomial_transform_at, build_representation, check_intertwiner_on, dn_expansion, dn_matrix,
    duality_matrix, ladder_polynomial, polynomial_eval, Basis, Block, Ladder, Ordering, RepresentationFamily,
    RepresentationParams,
};
use duality_lab::dualities::DualityFamily;
use duality_lab::rational::dn_matrix_exact;
use duality_lab::tolerances::{BINOMIAL_TRANSFORM, EXACT_RESIDUAL, SOLVE_RESIDUAL};
use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use proptest::prelude::*;

const ORDER: usize = 24;

fn pair(family_a: RepresentationFamily, family_b: RepresentationFamily, m: f64) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
    let params = if family_a.is_su11() { RepresentationParams::su11(m) } else { RepresentationParams::default() };
    let a = build_representation(family_a, params, ORDER).unwrap();
    let b = build_representation(family_b, params, ORDER).unwrap();
    let ladders: &[Ladder] =
        if family_a.is_su11() { &[Ladder::Lowering, Ladder::Raising, Ladder::Neutral] } else { &[Ladder::Lowering, Ladder::Raising] };
    (
        ladders.iter().map(|&l| a.get(l).unwrap().clone()).collect(),
        ladders.iter().map(|&l| b.get(l).unwrap().clone()).collect(),
    )
}

fn word_product(ops: &[DMatrix<f64>], word: &[usize], reversed: bool) -> DMatrix<f64> {
    let size = ops[0].nrows();
    let mut out = DMatrix::identity(size, size);
    let letters: Vec<usize> = if reversed { word.iter().rev().copied().collect() } else { word.to_vec() };
    for i in letters {
        out *= &ops[i];
    }
    out
}

/// Relative size of the residual against the entries of both sides.
fn relative_residual(k: &DMatrix<f64>, k_hat: &DMatrix<f64>, d: &DMatrix<f64>, block: Block) -> f64 {
    let r = check_intertwiner_on(k, k_hat, d, block.clone()).unwrap().max_abs_residual;
    let scale = (k * d).view((0, 0), (block.rows.end, block.cols.end)).amax().max(1.0);
    r / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// A word in the continuous Heisenberg operators is dual under x^n to the
    /// reversed word in the discrete ones.
    #[test]
    fn heisenberg_words_reverse(word in prop::collection::vec(0usize..2, 1..6), coeff in -2.0f64..2.0) {
        let (cont, disc) = pair(RepresentationFamily::HeisenbergContinuous, RepresentationFamily::HeisenbergDiscrete, 0.0);
        let id = DMatrix::identity(ORDER + 1, ORDER + 1);
        let k = word_product(&cont, &word, false) * coeff + word_product(&cont, &[1, 0], false);
        let k_hat = word_product(&disc, &word, true) * coeff + word_product(&disc, &[1, 0], true);
        let block = Block::square(ORDER + 1 - word.len().max(2));
        prop_assert!(relative_residual(&k, &k_hat, &id, block) <= EXACT_RESIDUAL);
    }

    /// The same for SU(1,1) under the gamma-weighted duality, for any m > 0.
    #[test]
    fn su11_words_reverse(word in prop::collection::vec(0usize..3, 1..5), m in 0.2f64..5.0) {
        let (cont, disc) = pair(RepresentationFamily::Su11Continuous, RepresentationFamily::Su11Discrete, m);
        let d = duality_matrix(&DualityFamily::GammaWeighted { m }, &Basis::monomial(ORDER).unwrap(), &Basis::discrete(ORDER).unwrap()).unwrap();
        let k = word_product(&cont, &word, false);
        let k_hat = word_product(&disc, &word, true);
        let block = Block::square(ORDER + 1 - word.len());
        prop_assert!(relative_residual(&k, &k_hat, &d, block) <= EXACT_RESIDUAL);
    }

    /// Σ α_r(A†) A^r is dual to Σ a^r α_r(a†) for random polynomial coefficients.
    #[test]
    fn ladder_polynomials_intertwine(alphas in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 0..4), 1..4)) {
        let (cont, disc) = pair(RepresentationFamily::HeisenbergContinuous, RepresentationFamily::HeisenbergDiscrete, 0.0);
        let k = ladder_polynomial(&alphas, &cont[1], &cont[0], Ordering::CoefficientsFirst).unwrap();
        let k_hat = ladder_polynomial(&alphas, &disc[1], &disc[0], Ordering::LoweringFirst).unwrap();
        let id = DMatrix::identity(ORDER + 1, ORDER + 1);
        let depth = alphas.len() + alphas.iter().map(Vec::len).max().unwrap_or(0);
        let block = Block::square(ORDER + 1 - depth);
        prop_assert!(relative_residual(&k, &k_hat, &id, block) <= EXACT_RESIDUAL);
    }

    /// The power coefficients of the binomial transform evaluate to the
    /// direct sum against the binomial law.
    #[test]
    fn binomial_transform_two_ways(n in 1usize..=20, rho in 0.0f64..=1.0, seed in prop::collection::vec(-1.0f64..1.0, 21)) {
        let f = &seed[..=n];
        let c = binomial_transform(f, n).unwrap();
        let direct = binomial_transform_at(f, n, rho).unwrap();
        // Power coefficients of the transform grow like binomial coefficients
        // with alternating signs, so summing them loses digits as N grows.
        let scale = f.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!((polynomial_eval(&c, rho) - direct).abs() <= BINOMIAL_TRANSFORM * scale * 10f64.powi(n as i32 / 4));
    }

    /// D_N is invertible: expanding f in the D_N basis and summing back recovers f.
    #[test]
    fn dn_expansion_round_trips(n in 1usize..=20, seed in prop::collection::vec(-1.0f64..1.0, 21)) {
        let f = DVector::from_column_slice(&seed[..=n]);
        let c = DVector::from_vec(dn_expansion(f.as_slice(), n).unwrap());
        let back = dn_matrix(n) * c;
        prop_assert!((back - &f).amax() <= SOLVE_RESIDUAL);
    }
}

#[test]
fn dn_is_triangular_with_nonzero_diagonal() {
    for n in 1..=20 {
        let d = dn_matrix_exact(n);
        for k in 0..=n {
            assert!(!d.get(k, k).is_zero(), "N={n}: D_N({k},{k}) = 0");
            for r in k + 1..=n {
                assert!(d.get(k, r).is_zero(), "N={n}: D_N({k},{r}) != 0");
            }
        }
    }
}
