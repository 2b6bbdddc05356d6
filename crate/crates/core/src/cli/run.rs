//! Experiment execution.

use super::config::{ConfigError, ExperimentConfig, Kind, Resolved, Tolerances};
use super::report::{Check, Item, Report};
use crate::dtn::{assemble_r, bfk_check, direct_ratio, fredholm_ratio, lemma25_traces, screen_invertibility, BulkModel};
use crate::error::Error;
use crate::model::Involution;
use crate::scattering::{
    a_sigma_det_ratio, a_sigma_expansion_residual, lemma43_check, limit_fredholm_det, limit_kernel_block, operator_t,
    random_admissible_triple, theorem13_ratio,
};
use crate::spectrum::{cylinder_spectrum, CylinderProblem, EndCondition, ModeLabel, ScalarBc, ScalarMode, SpectrumFamily};
use crate::zeta::{cylinder_det_ratio, logdet_cylinder_terms, logdet_interval_mode, oracle, IntervalBc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

/// Smallest singular value of `C(0) - σ` accepted for random cases.
const CASE_FLOOR: f64 = 0.1;
/// Eigenvalues listed per item by `spectrum`.
const LISTED_EIGENVALUES: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(#[from] Error),
}

/// Validate, run and time an experiment. Items are evaluated in parallel and
/// reported in configuration order.
pub fn run(config: &ExperimentConfig) -> Result<Report, RunError> {
    let start = Instant::now();
    let resolved = config.resolve()?;
    let tol = config.tolerances;
    let inputs = serde_json::to_value(config).expect("config serializes");
    let (items, summary) = match resolved.kind {
        Kind::Spectrum => (per_r(&resolved, |r| spectrum_item(&resolved, r, config.truncation, tol))?, vec![]),
        Kind::Logdet => (per_r(&resolved, |r| logdet_item(&resolved, r, config.truncation, tol))?, vec![]),
        Kind::DetRatio => (per_r(&resolved, |r| det_ratio_item(&resolved, r, tol))?, vec![]),
        Kind::BfkCheck => (per_r(&resolved, |r| bfk_item(&resolved, r, tol))?, vec![]),
        Kind::Adiabatic => {
            let items = per_r(&resolved, |r| adiabatic_item(&resolved, r, tol))?;
            let summary = adiabatic_summary(&resolved, &items, tol)?;
            (items, summary)
        }
        Kind::Identities => (identities(&resolved, config, tol)?, vec![]),
    };
    let mut report = Report::new(resolved.kind, inputs, tol, items, summary);
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn per_r<F>(resolved: &Resolved, f: F) -> Result<Vec<Item>, Error>
where
    F: Fn(f64) -> Result<Item, Error> + Sync,
{
    resolved.rs.par_iter().map(|&r| f(r)).collect()
}

fn label(r: f64) -> String {
    format!("r={r}")
}

fn model(resolved: &Resolved) -> &std::sync::Arc<crate::model::BoundaryModel> {
    resolved.model.as_ref().expect("resolved model")
}

fn problem(resolved: &Resolved, r: f64) -> Result<CylinderProblem, Error> {
    CylinderProblem::new(
        model(resolved).clone(),
        r,
        resolved.left.clone().expect("left end"),
        resolved.right.clone().expect("right end"),
    )
}

fn c0(resolved: &Resolved) -> &Involution {
    match resolved.left.as_ref().expect("left end") {
        EndCondition::Aps(s) => s,
        EndCondition::Dirichlet => unreachable!("resolve requires an involution"),
    }
}

fn spectrum_item(resolved: &Resolved, r: f64, k: usize, tol: Tolerances) -> Result<Item, Error> {
    let spec = cylinder_spectrum(&problem(resolved, r)?, k.max(LISTED_EIGENVALUES))?;
    let mut item = Item::new(label(r));
    for (i, v) in spec.lowest(LISTED_EIGENVALUES).into_iter().enumerate() {
        item = item.value(format!("eigenvalue_{:02}", i + 1), v);
    }
    for (i, f) in spec.families.iter().enumerate() {
        if let SpectrumFamily::Roots { lambda, r, roots, .. } = f {
            let worst = roots
                .iter()
                .map(|&mu| {
                    let nu = (mu - lambda * lambda).sqrt();
                    (nu * (nu * r).cos() + lambda * (nu * r).sin()).abs() / nu.max(*lambda)
                })
                .fold(0.0, f64::max);
            item = item.check(Check::residual(format!("family_{i}_root_equation"), worst, tol.closed_form));
        }
    }
    Ok(item.value("families", spec.families.len() as f64))
}

/// Interval problem with a Dirichlet end, up to reflection.
fn interval_bc(mode: &ScalarMode) -> Option<IntervalBc> {
    use ScalarBc::*;
    match (mode.left, mode.right) {
        (Dirichlet, Dirichlet) => Some(IntervalBc::DirichletDirichlet),
        (Dirichlet, Neumann) | (Neumann, Dirichlet) => Some(IntervalBc::DirichletNeumann),
        (Dirichlet, Robin(_)) | (Robin(_), Dirichlet) => Some(IntervalBc::DirichletRobin),
        _ => None,
    }
}

fn logdet_item(resolved: &Resolved, r: f64, k: usize, tol: Tolerances) -> Result<Item, Error> {
    let p = problem(resolved, r)?;
    let terms = logdet_cylinder_terms(&p)?;
    let total = crate::linalg::compensated_sum(terms.iter().map(|t| t.value));
    let bound: f64 = terms.iter().map(|t| t.error_bound).sum();
    let mut item = Item::new(label(r)).value("log_det", total).value("error_bound", bound);
    let mut methods: Vec<String> = terms.iter().map(|t| serde_json::to_value(t.method).expect("tag").as_str().unwrap_or("").to_string()).collect();
    methods.sort();
    methods.dedup();
    item = item.method("log_det", methods.join("+"));
    for (i, mode) in p.scalar_modes().iter().enumerate() {
        let Some(bc) = interval_bc(mode) else { continue };
        let closed = logdet_interval_mode(mode.mass, r, bc)?;
        let check = oracle::truncated_zeta_logdet(mode.mass, r, bc, k)?;
        let name = match mode.label {
            ModeLabel::Nonzero { eigenvalue } => format!("mode_{i}_lambda_{eigenvalue}"),
            ModeLabel::Kernel => format!("mode_{i}_kernel"),
        };
        let residual = (closed.value - check.value).abs();
        item = item
            .value(format!("{name}_closed"), closed.value)
            .value(format!("{name}_oracle"), check.value)
            .check(Check::new(format!("{name}_oracle"), closed.value, Some(check.value), residual, tol.oracle + check.error_bound));
    }
    Ok(item)
}

fn det_ratio_item(resolved: &Resolved, r: f64, tol: Tolerances) -> Result<Item, Error> {
    let (s1, s2) = (resolved.sigma1.as_ref().expect("sigma1"), resolved.sigma2.as_ref().expect("sigma2"));
    let c0 = c0(resolved);
    let ratio = cylinder_det_ratio(model(resolved), r, c0, s1, s2)?;
    let reference = theorem13_ratio(c0, s1, s2)?;
    Ok(Item::new(label(r))
        .value("ratio", ratio)
        .method("ratio", "hurwitz-closed-form")
        .value("det_ratio_kernel", reference)
        .check(Check::relative("ratio_vs_kernel_determinants", ratio, reference, tol.closed_form)))
}

fn bulk(resolved: &Resolved) -> Result<BulkModel, Error> {
    BulkModel::new(model(resolved).clone(), resolved.bulk_length, resolved.left.clone().expect("left end"))
}

fn bfk_item(resolved: &Resolved, r: f64, tol: Tolerances) -> Result<Item, Error> {
    let sigma = resolved.sigma1.as_ref().expect("sigma");
    let b = bulk(resolved)?;
    screen_invertibility(&b, sigma)?;
    let t = bfk_check(&b, r, sigma)?;
    Ok(Item::new(label(r))
        .value("glued", t.glued)
        .value("bulk", t.bulk)
        .value("cylinder", t.cylinder)
        .value("constant", t.constant)
        .value("log_det_r", t.log_det_r)
        .method("glued", "hurwitz-closed-form+gy-closed-form")
        .check(Check::residual("gluing_residual", t.residual, tol.closed_form)))
}

fn adiabatic_item(resolved: &Resolved, r: f64, tol: Tolerances) -> Result<Item, Error> {
    let (s1, s2) = (resolved.sigma1.as_ref().expect("sigma1"), resolved.sigma2.as_ref().expect("sigma2"));
    let b = bulk(resolved)?;
    screen_invertibility(&b, s1)?;
    screen_invertibility(&b, s2)?;
    let r1 = assemble_r(&b, r, s1)?;
    let r2 = assemble_r(&b, r, s2)?;
    let fredholm = fredholm_ratio(&r2, s1, s2)?;
    let direct = direct_ratio(&r1, &r2)?;
    let (t1, t2) = lemma25_traces(&b, r, s1, s2)?;
    Ok(Item::new(label(r))
        .value("fredholm_ratio", fredholm)
        .value("direct_ratio", direct)
        .value("trace_derivative", t1)
        .value("trace_projected", t2)
        .check(Check::relative("fredholm_vs_direct", fredholm, direct, tol.closed_form))
        .check(Check::residual("trace_derivative", t1, tol.closed_form))
        .check(Check::residual("trace_projected", t2, tol.closed_form)))
}

fn adiabatic_summary(resolved: &Resolved, items: &[Item], tol: Tolerances) -> Result<Vec<Check>, Error> {
    let values: Vec<f64> = items.iter().map(|i| i.values["fredholm_ratio"]).collect();
    let first = values[0];
    let spread = values.iter().map(|v| (v - first).abs()).fold(0.0, f64::max) / first.abs().max(f64::MIN_POSITIVE);
    let (s1, s2) = (resolved.sigma1.as_ref().expect("sigma1"), resolved.sigma2.as_ref().expect("sigma2"));
    let limit = theorem13_ratio(c0(resolved), s1, s2)?;
    Ok(vec![
        Check::new("sweep_spread", first, None, spread, tol.oracle),
        Check::relative("limit_vs_kernel_determinants", first, limit, tol.oracle),
    ])
}

fn identities(resolved: &Resolved, config: &ExperimentConfig, tol: Tolerances) -> Result<Vec<Item>, Error> {
    let fixed_l = resolved.model.as_ref().map(|m| m.half_kernel_dim()).filter(|&l| l > 0);
    (0..config.cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            let l = fixed_l.unwrap_or(1 + i % 3);
            let (c0, s1, s2) = random_admissible_triple(l, CASE_FLOOR, &mut rng);
            identity_item(i, l, &c0, &s1, &s2, tol)
        })
        .collect()
}

fn identity_item(i: usize, l: usize, c0: &Involution, s1: &Involution, s2: &Involution, tol: Tolerances) -> Result<Item, Error> {
    let th = theorem13_ratio(c0, s1, s2)?;
    let lf = limit_fredholm_det(c0, s1, s2)?;
    let block = limit_kernel_block(c0, s2)?;
    let t = operator_t(c0, s2)?;
    let t_residual = t.residual_forms.max(t.residual_inverse).max(t.residual_sandwich);
    let lemma = lemma43_check(c0, s1)?.max().max(lemma43_check(c0, &s2.neg())?.max());
    let expansion = [0.1, 0.5, 0.9]
        .iter()
        .map(|&t| a_sigma_expansion_residual(c0, s1, s2, t))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let a_ratio = a_sigma_det_ratio(c0, s1, s2, 0.5)?;
    Ok(Item::new(format!("case={i} l={l}"))
        .value("det_ratio_kernel", th)
        .value("limit_fredholm", lf.value)
        .check(Check::residual("commutation_relations", lemma, tol.identity))
        .check(Check::residual("beta_anticommutes_left", lf.beta_left, tol.identity))
        .check(Check::residual("beta_commutes_right", lf.beta_right, tol.identity))
        .check(Check::residual("det_i_plus_beta", lf.det_i_plus_beta, tol.identity))
        .check(Check::residual("a_sigma_expansion", expansion, tol.identity))
        .check(Check::residual("t_operator_forms", t_residual, tol.identity))
        .check(Check::residual("limit_block_routes", block.max_residual(), tol.identity))
        .check(Check::relative("limit_fredholm_vs_ratio", lf.value, th, tol.closed_form))
        .check(Check::relative("a_sigma_det_vs_ratio", a_ratio, th, tol.oracle)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn det_ratio_example() {
        let rep = run(&cfg(r#"{"kind": "det-ratio", "model": {"type": "canonical", "l": 1, "positive_eigenvalues": [0.8]},
            "sigma1": {"type": "sigma_theta", "angles": [1.0471975511965976]},
            "sigma2": {"type": "sigma_theta", "angles": [0.5235987755982988]}, "r": [0.5, 2.0]}"#))
        .unwrap();
        assert!(rep.pass);
        for item in &rep.items {
            assert!((item.values["ratio"] - 3.0).abs() < 1e-10);
        }
        assert_eq!(rep.items[0].label, "r=0.5");
    }

    #[test]
    fn bfk_kernel_only() {
        let rep = run(&cfg(r#"{"kind": "bfk-check", "model": {"type": "canonical", "l": 2},
            "right": {"type": "sigma_theta", "angles": [0.4, 1.1]}, "bulk_length": 1.5, "r": 0.7}"#))
        .unwrap();
        assert!(rep.pass, "{:?}", rep.items);
    }

    #[test]
    fn adiabatic_sweep_is_constant() {
        let rep = run(&cfg(r#"{"kind": "adiabatic", "model": {"type": "canonical", "l": 1, "positive_eigenvalues": [0.6, 1.5]},
            "sigma1": {"type": "sigma_theta", "angles": [0.9]}, "sigma2": {"type": "random", "seed": 5},
            "r": [0.5, 1, 2, 5]}"#))
        .unwrap();
        assert!(rep.pass, "{:?} {:?}", rep.summary, rep.items);
    }

    #[test]
    fn logdet_and_spectrum_pass() {
        for kind in ["logdet", "spectrum"] {
            let rep = run(&cfg(&format!(
                r#"{{"kind": "{kind}", "model": {{"type": "canonical", "l": 1, "positive_eigenvalues": [0.5, 3.0]}},
                "left": {{"type": "dirichlet"}}, "right": {{"type": "tau"}}, "r": [0.3, 1.7]}}"#
            )))
            .unwrap();
            assert!(rep.pass, "{kind}: {:?}", rep.items);
        }
    }

    #[test]
    fn identities_are_reproducible() {
        let c = cfg(r#"{"kind": "identities", "cases": 12, "seed": 3}"#);
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert!(a.pass, "{:?}", a.items);
        assert_eq!(a.items, b.items);
    }

    #[test]
    fn singular_sigma_is_numeric_error() {
        let e = run(&cfg(r#"{"kind": "det-ratio", "model": {"type": "canonical", "l": 1},
            "sigma1": {"type": "tau"}, "sigma2": {"type": "sigma_theta", "angles": [0.5]}}"#))
        .unwrap_err();
        assert!(matches!(e, RunError::Numeric(_)), "{e}");
    }
}
