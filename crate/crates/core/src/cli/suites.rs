//! The verification suites behind each command.

use nalgebra::{DMatrix, DVector};

use super::config::ExperimentConfig;
use super::report::{Cell, Report};
use crate::algebra::{
    build_representation, check_binomial_duality, check_commutation_relations, check_finite_ladder_action,
    check_intertwiner_on, duality_matrix, gaussian_ladder, ladder_polynomial, Basis, Block, Ladder,
    Ordering, RepresentationFamily, RepresentationParams, ResidualReport,
};
use crate::dualities::{evaluate, DualityFamily, EvalPoint};
use crate::error::{Error, Result};
use crate::exact::{
    check_moran_kingman, check_moran_kingman_exact, check_pointwise_diffusion_duality, check_semigroup_duality,
    check_sip_self_duality, exact_expectation, expm, limiting_oracle, moran_kingman_matrices, reproduce_example,
    sip_self_duality_matrices, ExampleId, ExampleParams, MoranTimeScale, SideOperator,
};
use crate::montecarlo::{compare, estimate_duality_side, ComparisonReport, EstimatorConfig, Reference};
use crate::processes::{enumerate_states, generator_matrix, EnumerationMode, ProcessSpec, State};
use crate::tolerances::{EXACT_RESIDUAL, POINTWISE_RESIDUAL, SEMIGROUP_RESIDUAL};

const RESIDUAL_COLUMNS: [&str; 4] = ["check", "max_abs_residual", "tolerance", "pass"];

fn residual_report() -> Report {
    Report::new(RESIDUAL_COLUMNS.to_vec())
}

fn add(report: &mut Report, r: &ResidualReport, tol: f64) {
    let pass = r.max_abs_residual <= tol;
    report.ok &= pass;
    report.push(vec![r.identity.clone().into(), r.max_abs_residual.into(), tol.into(), pass.into()]);
}

pub fn check_algebra(cfg: &ExperimentConfig) -> Result<Report> {
    let order = cfg.usize("order")?;
    let m = cfg.f64("m")?;
    let population = cfg.usize("population")?;
    let hermite_order = cfg.usize("hermite_order")?;
    let rho = cfg.f64("rho")?;
    if order < 2 || hermite_order < 2 {
        return Err(Error::Config("order and hermite_order must be >= 2".into()));
    }
    let mut report = residual_report();
    for family in RepresentationFamily::ALL {
        let (params, size) = match family {
            RepresentationFamily::HeisenbergFiniteN => (RepresentationParams::finite(population), population),
            f if f.is_su11() => (RepresentationParams::su11(m), order),
            _ => (RepresentationParams::default(), order),
        };
        let set = build_representation(family, params, size)?;
        for r in check_commutation_relations(&set) {
            add(&mut report, &r, EXACT_RESIDUAL);
        }
    }
    for r in check_finite_ladder_action(population)? {
        add(&mut report, &r, EXACT_RESIDUAL);
    }

    let safe = Block::square(order - 1);
    let cont = build_representation(RepresentationFamily::HeisenbergContinuous, RepresentationParams::default(), order)?;
    let disc = build_representation(RepresentationFamily::HeisenbergDiscrete, RepresentationParams::default(), order)?;
    let id = DMatrix::identity(order + 1, order + 1);
    for (l, name) in [(Ladder::Lowering, "A vs a"), (Ladder::Raising, "A† vs a†")] {
        let r = check_intertwiner_on(cont.get(l).unwrap(), disc.get(l).unwrap(), &id, safe.clone())?;
        add(&mut report, &r.renamed(format!("D = x^n: {name}")), EXACT_RESIDUAL);
    }
    let alphas = vec![vec![], vec![], vec![0.0, 1.0, -1.0]];
    let wf = ladder_polynomial(&alphas, cont.raising(), cont.lowering(), Ordering::CoefficientsFirst)?;
    let kingman = ladder_polynomial(&alphas, disc.raising(), disc.lowering(), Ordering::LoweringFirst)?;
    let r = check_intertwiner_on(&wf, &kingman, &id, safe.clone())?;
    add(&mut report, &r.renamed("D = x^n: x(1-x)d²/dx² vs n(n-1)(f(n-1)-f(n))"), EXACT_RESIDUAL);

    let sc = build_representation(RepresentationFamily::Su11Continuous, RepresentationParams::su11(m), order)?;
    let sd = build_representation(RepresentationFamily::Su11Discrete, RepresentationParams::su11(m), order)?;
    let gamma = duality_matrix(&DualityFamily::GammaWeighted { m }, &Basis::monomial(order)?, &Basis::discrete(order)?)?;
    for l in [Ladder::Lowering, Ladder::Raising, Ladder::Neutral] {
        let r = check_intertwiner_on(sc.get(l).unwrap(), sd.get(l).unwrap(), &gamma, safe.clone())?;
        let label = format!("gamma-weighted m={m}: {} vs {}", sc.family.symbol(l), sd.family.symbol(l));
        add(&mut report, &r.renamed(label), EXACT_RESIDUAL);
    }

    let (lo, hi) = gaussian_ladder(hermite_order)?;
    let hd = build_representation(RepresentationFamily::HeisenbergDiscrete, RepresentationParams::default(), hermite_order)?;
    let herm = duality_matrix(&DualityFamily::HermiteWeighted, &Basis::monomial(hermite_order)?, &Basis::discrete(hermite_order)?)?;
    let hsafe = Block::square(hermite_order - 1);
    for (k, k_hat, name) in [(&lo, hd.lowering(), "(x + d/dx)/2 vs a"), (&hi, hd.raising(), "x - d/dx vs a†")] {
        let r = check_intertwiner_on(k, k_hat, &herm, hsafe.clone())?;
        add(&mut report, &r.renamed(format!("Hermite-weighted: {name}")), EXACT_RESIDUAL);
    }

    add(&mut report, &check_binomial_duality(population, rho)?, EXACT_RESIDUAL);
    Ok(report)
}

pub fn check_exact(cfg: &ExperimentConfig) -> Result<Report> {
    let n_max = cfg.u64("n_max")?;
    let float_n_max = cfg.u64("float_n_max")?;
    let d = cfg.usize("d")?;
    let m = cfg.f64("m")?;
    let population = cfg.u64("population")?;
    let t = cfg.f64("t")?;
    if n_max < 2 || float_n_max < 2 {
        return Err(Error::Config("n_max and float_n_max must be >= 2".into()));
    }
    let mut report = residual_report();
    for scale in [MoranTimeScale::Ladder, MoranTimeScale::Printed] {
        for n in 2..=n_max {
            let c = check_moran_kingman_exact(n, scale)?;
            let r = ResidualReport {
                identity: format!("Moran N={n} ({scale:?}) vs Kingman, rational"),
                max_abs_residual: c.max_abs_residual,
                checked_block: Block::square(n as usize + 1),
            };
            add(&mut report, &r, 0.0);
        }
        for n in 2..=float_n_max {
            add(&mut report, &check_moran_kingman(n, scale)?, EXACT_RESIDUAL);
        }
        let (k, k_hat, dm) = moran_kingman_matrices(n_max, scale)?;
        add(&mut report, &check_semigroup_duality(&k, &k_hat, &dm, t)?.renamed(format!("Moran N={n_max} ({scale:?}) vs Kingman, e^(tK), t={t}")), SEMIGROUP_RESIDUAL);
    }
    add(&mut report, &check_sip_self_duality(d, m, population)?, EXACT_RESIDUAL);
    let (k, k_hat, dm) = sip_self_duality_matrices(d, m, population)?;
    let r = check_semigroup_duality(&k, &k_hat, &dm, t)?;
    add(&mut report, &r.renamed(format!("SIP(m={m}) d={d} N={population} self-duality, e^(tK), t={t}")), SEMIGROUP_RESIDUAL);
    let ones = DVector::from_element(k.nrows(), 1.0);
    let stoch = (expm(&(&k * t))? * &ones - &ones).amax();
    let r = ResidualReport {
        identity: format!("SIP(m={m}) d={d} N={population}: e^(tQ)1 - 1, t={t}"),
        max_abs_residual: stoch,
        checked_block: Block { rows: 0..k.nrows(), cols: 0..1 },
    };
    add(&mut report, &r, EXACT_RESIDUAL);
    Ok(report)
}

pub fn check_pointwise(cfg: &ExperimentConfig) -> Result<Report> {
    let theta = cfg.f64("theta")?;
    let sigma = cfg.f64("sigma")?;
    let n_max = cfg.u64("n_max")?;
    let (c1, c2, c3) = (cfg.f64("c1")?, cfg.f64("c2")?, cfg.f64("c3")?);
    let h = cfg.f64("h")?;
    let mut report = residual_report();
    let mut run = |left: SideOperator, right: SideOperator, family: DualityFamily, pts: &[EvalPoint], label: String| -> Result<()> {
        let r = check_pointwise_diffusion_duality(&left, &right, &family, pts, h)?;
        add(&mut report, &r.renamed(label), POINTWISE_RESIDUAL);
        Ok(())
    };

    let grid = |xs: &[f64]| -> Vec<EvalPoint> {
        xs.iter().flat_map(|&x| xs.iter().map(move |&y| EvalPoint::continuous([x], [y]))).collect()
    };
    run(
        SideOperator::Differential { coefficients: vec![vec![], vec![], vec![0.5]] },
        SideOperator::Differential { coefficients: vec![vec![0.0, 0.0, 0.5]] },
        DualityFamily::Exponential,
        &grid(&[-1.0, 0.0, 1.0]),
        "e^(xy): (1/2)d²/dx² vs y²/2".into(),
    )?;
    if c1 <= 0.0 || c2 < 0.0 {
        return Err(Error::Config(format!("the e^(xy) pair needs c1 > 0 and c2 >= 0, got c1={c1}, c2={c2}")));
    }
    for c2 in [c2, 0.0] {
        run(
            SideOperator::Differential { coefficients: vec![vec![], vec![0.0, c3], vec![0.0, c2, c1]] },
            SideOperator::Differential { coefficients: vec![vec![], vec![0.0, c3, c2], vec![0.0, 0.0, c1]] },
            DualityFamily::Exponential,
            &grid(&[0.0, 0.5, 1.0, 1.5]),
            format!("e^(xy): (c1x²+c2x)d² + c3x d vs c1y²d² + (c2y²+c3y)d, c=({c1},{c2},{c3})"),
        )?;
    }

    let mixed: Vec<EvalPoint> =
        (1..=9).flat_map(|i| (0..=n_max).map(move |n| EvalPoint::mixed([i as f64 / 10.0], [n]))).collect();
    let king = |theta, sigma| SideOperator::Process(ProcessSpec::KingmanBlock { theta, sigma, n_max: n_max + 1 });
    let wf = |s: ProcessSpec| SideOperator::Process(s);
    run(wf(ProcessSpec::wf_neutral()), king(0.0, 0.0), DualityFamily::Monomial, &mixed, "x^n: WF neutral vs Kingman".into())?;
    run(
        wf(ProcessSpec::wf_mutation(theta)),
        king(theta, 0.0),
        DualityFamily::Monomial,
        &mixed,
        format!("x^n: WF mutation θ={theta} vs Kingman with mutation"),
    )?;
    run(
        wf(ProcessSpec::wf_negative_selection(sigma)),
        king(0.0, sigma),
        DualityFamily::Monomial,
        &mixed,
        format!("x^n: WF negative selection σ={sigma} vs branching-coalescing chain"),
    )?;
    run(
        wf(ProcessSpec::WfPositiveSelection { sigma }),
        king(0.0, sigma),
        DualityFamily::ReflectedMonomial,
        &mixed,
        format!("(1-x)^n: WF positive selection σ={sigma} vs branching-coalescing chain"),
    )?;

    for d in [2usize, 3] {
        let family = DualityFamily::ProductGamma { theta, d };
        let xs: Vec<Vec<f64>> =
            if d == 2 { vec![vec![0.3, 0.7], vec![0.5, 0.5]] } else { vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.1, 0.3]] };
        let mut worst: Option<ResidualReport> = None;
        for n in 1..=n_max {
            let moran = ProcessSpec::MoranMultitype { n, d, theta };
            let mut pts = Vec::new();
            for k in enumerate_states(d, n, EnumerationMode::Conserved)?.states() {
                pts.extend(xs.iter().map(|x| EvalPoint::mixed(x.clone(), k.clone())));
            }
            let r = check_pointwise_diffusion_duality(
                &wf(ProcessSpec::WfMultitype { d, theta }),
                &SideOperator::Process(moran),
                &family,
                &pts,
                h,
            )?;
            if worst.as_ref().is_none_or(|w| r.max_abs_residual > w.max_abs_residual) {
                worst = Some(r);
            }
        }
        if let Some(r) = worst {
            add(&mut report, &r.renamed(format!("product-gamma: WF d={d} θ={theta} vs Moran, N ≤ {n_max}")), POINTWISE_RESIDUAL);
        }
    }
    Ok(report)
}

pub fn run_mc(cfg: &ExperimentConfig) -> Result<Report> {
    let est = EstimatorConfig {
        n_paths: cfg.u64("n_paths")?,
        seed: cfg.u64("seed")?,
        dt: cfg.f64("dt")?,
        t: cfg.f64("t")?,
        antithetic: cfg.bool("antithetic")?,
    };
    est.validate().map_err(|e| Error::Config(e.to_string()))?;
    let theta = cfg.f64("theta")?;
    let population = cfg.u64("population")?;
    let k1 = cfg.u64("k1")?;
    let x0 = cfg.f64("x0")?;
    let multiplier = cfg.f64("multiplier")?;
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::Config(format!("x0 must lie in [0, 1], got {x0}")));
    }
    let pair = cfg.str("pair")?;
    let result = match pair {
        "wf-moran" | "wf-moran-mc" => {
            if k1 > population {
                return Err(Error::Config(format!("k1 = {k1} exceeds population = {population}")));
            }
            let family = DualityFamily::ProductGamma { theta, d: 2 };
            let x = vec![x0, 1.0 - x0];
            let k = vec![k1, population - k1];
            let wf = ProcessSpec::WfMultitype { d: 2, theta };
            let moran = ProcessSpec::MoranMultitype { n: population, d: 2, theta };
            let lhs = estimate_duality_side(&wf, &family, &State::Continuous(x.clone()), &State::Discrete(k.clone()), &est)?;
            let rhs = if pair == "wf-moran" {
                let g = generator_matrix(&moran)?;
                let f = g
                    .index
                    .states()
                    .iter()
                    .map(|s| evaluate(&family, &EvalPoint::mixed(x.clone(), s.clone())))
                    .collect::<Result<Vec<_>>>()?;
                Reference::Exact { value: exact_expectation(&g, &f, &k, est.t)?.value }
            } else {
                let jump = EstimatorConfig { antithetic: false, seed: est.seed.wrapping_add(1), ..est.clone() };
                Reference::Estimate(estimate_duality_side(&moran, &family, &State::Discrete(k), &State::Continuous(x), &jump)?)
            };
            compare(lhs, rhs, multiplier, est.bias_budget())
                .with_metadata("left", wf.kind())
                .with_metadata("right", moran.kind())
                .with_metadata("family", family.kind())
        }
        "heterozygosity" => {
            let x = vec![x0, 1.0 - x0];
            let wf = ProcessSpec::WfMultitype { d: 2, theta: 0.0 };
            let family = DualityFamily::LimitingSip;
            let lhs = estimate_duality_side(&wf, &family, &State::Continuous(x.clone()), &State::Discrete(vec![1, 1]), &est)?;
            let value = limiting_oracle(&x, &[1, 1], est.t)?;
            compare(lhs, Reference::Exact { value }, multiplier, est.bias_budget())
                .with_metadata("left", wf.kind())
                .with_metadata("right", "sip")
                .with_metadata("family", family.kind())
        }
        "wf-kingman" => {
            let wf = ProcessSpec::wf_neutral();
            let kingman = ProcessSpec::KingmanBlock { theta: 0.0, sigma: 0.0, n_max: k1.max(1) };
            let lhs =
                estimate_duality_side(&wf, &DualityFamily::Monomial, &State::Continuous(vec![x0]), &State::Discrete(vec![k1]), &est)?;
            let g = generator_matrix(&kingman)?;
            let f: Vec<f64> = g.index.states().iter().map(|s| x0.powi(s[0] as i32)).collect();
            let value = exact_expectation(&g, &f, &[k1], est.t)?.value;
            compare(lhs, Reference::Exact { value }, multiplier, est.bias_budget())
                .with_metadata("left", wf.kind())
                .with_metadata("right", kingman.kind())
                .with_metadata("family", DualityFamily::Monomial.kind())
        }
        other => {
            return Err(Error::Config(format!(
                "pair must be one of wf-moran, wf-moran-mc, heterozygosity, wf-kingman; got {other:?}"
            )))
        }
    };
    Ok(mc_report(pair, &result))
}

fn mc_report(pair: &str, c: &ComparisonReport) -> Report {
    let mut report = Report::new(vec![
        "check", "lhs_mean", "lhs_se", "n_paths", "rhs_value", "rhs_se", "z", "bias_budget", "pass",
    ]);
    let rhs_se = match c.rhs {
        Reference::Exact { .. } => 0.0,
        Reference::Estimate(e) => e.se,
    };
    let label = format!("{pair}: {} vs {} ({})", c.metadata["left"], c.metadata["right"], c.metadata["family"]);
    report.push(vec![
        label.into(),
        c.lhs.mean.into(),
        c.lhs.se.into(),
        c.lhs.n.into(),
        c.rhs.value().into(),
        rhs_se.into(),
        c.z.into(),
        c.bias_budget.into(),
        c.pass.into(),
    ]);
    report.ok = c.pass;
    report
}

pub fn reproduce_examples(cfg: &ExperimentConfig) -> Result<Report> {
    let params = ExampleParams { x: cfg.f64("x")?, y: cfg.f64("y")?, t: cfg.f64("t")?, d: cfg.usize("d")?, xs: None };
    let mut report = Report::new(vec!["id", "paper_value", "oracle_value", "abs_diff", "asserted"]);
    for id in ExampleId::ALL {
        let r = reproduce_example(id, &params)?;
        report.push(vec![
            Cell::from(id.name()),
            r.paper_formula_value.into(),
            r.oracle_value.into(),
            r.abs_diff.into(),
            r.asserted.into(),
        ]);
    }
    Ok(report)
}
