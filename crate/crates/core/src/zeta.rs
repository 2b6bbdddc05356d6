//! Zeta-regularised log-determinants of cylinder Laplacians.
//!
//! Arithmetic families `((a + kπ)/r)²` use the Hurwitz values at `s = 0`.
//! Massive interval modes use closed forms obtained from the homogeneous
//! solution with `y(0) = 0`, `y'(0) = 1`, normalised by a factor 2 so that
//! the massless Dirichlet interval gives `Det = 2r`:
//!
//! * Dirichlet-Dirichlet: `2 sinh(λr)/λ`
//! * Dirichlet-Neumann: `2 cosh(λr)`
//! * Dirichlet-Robin (`y' + λy = 0`): `2 e^{λr}`
//!
//! [`oracle`] recomputes the same values from the eigenvalues themselves.

use crate::error::{Error, Result};
use crate::linalg::compensated_sum;
use crate::model::{make_sigma_theta, make_tau, BoundaryModel, Involution};
use crate::spectrum::{cylinder_spectrum, CylinderProblem, EndCondition, SpectrumFamily};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::sync::Arc;

pub use crate::special::{hurwitz_zeta, hurwitz_zeta_at_zero, log_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    HurwitzClosedForm,
    GyClosedForm,
    TruncatedZetaOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogDet {
    pub value: f64,
    pub method: Method,
    pub error_bound: f64,
}

impl LogDet {
    fn closed(value: f64, method: Method) -> Self {
        Self {
            value,
            method,
            error_bound: 4.0 * f64::EPSILON * value.abs().max(1.0),
        }
    }

    pub fn scaled(self, m: usize) -> Self {
        Self {
            value: self.value * m as f64,
            error_bound: self.error_bound * m as f64,
            ..self
        }
    }

    /// Whether two evaluations agree within their combined bounds (plus
    /// `slack`).
    pub fn agrees_with(&self, other: &LogDet, slack: f64) -> bool {
        (self.value - other.value).abs() <= self.error_bound + other.error_bound + slack
    }
}

/// Endpoint conditions of a massive interval mode; the left end is always
/// Dirichlet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalBc {
    DirichletDirichlet,
    DirichletNeumann,
    /// `y'(r) + |λ| y(r) = 0`
    DirichletRobin,
}

/// `log Det` of `{((a + kπ)/r)², k ≥ 0}` with multiplicity `m`.
pub fn logdet_arithmetic_family(offset: f64, r: f64, m: usize) -> Result<LogDet> {
    if !(offset > 0.0 && offset <= PI * (1.0 + 1e-15)) {
        return Err(Error::OffsetOutOfRange(offset));
    }
    if !(r > 0.0) {
        return Err(Error::NonPositiveLength(r));
    }
    let v = crate::special::arithmetic_logdet(offset.min(PI), r)?;
    Ok(LogDet::closed(v, Method::HurwitzClosedForm).scaled(m))
}

/// `log(2 sinh(x)/a)` for `x = a r`, without overflow.
fn log_2sinh_over(a: f64, r: f64) -> f64 {
    let x = a * r;
    if x > 20.0 {
        x + (-(-2.0 * x).exp()).ln_1p() - a.ln()
    } else if x < 1e-4 {
        // sinh x / x = 1 + x²/6 + x⁴/120
        (2.0 * r).ln() + (x * x / 6.0 + x.powi(4) / 120.0).ln_1p()
    } else {
        (2.0 * x.sinh() / a).ln()
    }
}

/// `log Det (-∂_u² + λ²)` on `[0, r]` with the given endpoint conditions.
pub fn logdet_interval_mode(lambda: f64, r: f64, bc: IntervalBc) -> Result<LogDet> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveLength(r));
    }
    let a = lambda.abs();
    let v = match bc {
        IntervalBc::DirichletDirichlet => log_2sinh_over(a, r),
        IntervalBc::DirichletNeumann => {
            let x = a * r;
            x + (-2.0 * x).exp().ln_1p()
        }
        IntervalBc::DirichletRobin => LN_2 + a * r,
    };
    Ok(LogDet::closed(v, Method::GyClosedForm))
}

/// `log Det` of one spectral family, closed form (root lists are not used).
pub fn logdet_family(family: &SpectrumFamily) -> Result<LogDet> {
    match family {
        SpectrumFamily::Arithmetic {
            offset,
            r,
            mass_sq,
            multiplicity,
            ..
        } => {
            if *mass_sq == 0.0 {
                return logdet_arithmetic_family(*offset, *r, *multiplicity);
            }
            let lam = mass_sq.sqrt();
            let bc = if (*offset - PI).abs() < 1e-14 {
                IntervalBc::DirichletDirichlet
            } else if (*offset - FRAC_PI_2).abs() < 1e-14 {
                IntervalBc::DirichletNeumann
            } else {
                return Err(Error::UnsolvableMode(format!(
                    "no closed form for massive family with offset {offset}"
                )));
            };
            Ok(logdet_interval_mode(lam, *r, bc)?.scaled(*multiplicity))
        }
        SpectrumFamily::Roots {
            lambda, r, multiplicity, ..
        } => Ok(logdet_interval_mode(*lambda, *r, IntervalBc::DirichletRobin)?.scaled(*multiplicity)),
    }
}

fn combine(parts: &[LogDet]) -> LogDet {
    let value = compensated_sum(parts.iter().map(|p| p.value));
    let error_bound = parts.iter().map(|p| p.error_bound).sum::<f64>();
    let method = if parts.iter().any(|p| p.method == Method::GyClosedForm) {
        Method::GyClosedForm
    } else {
        Method::HurwitzClosedForm
    };
    LogDet {
        value,
        method,
        error_bound,
    }
}

/// Per-family log-determinants in the fixed family order.
pub fn logdet_cylinder_terms(problem: &CylinderProblem) -> Result<Vec<LogDet>> {
    cylinder_spectrum(problem, 0)?.families.iter().map(logdet_family).collect()
}

/// `log Det` of the cylinder problem: sum over all modes.
pub fn logdet_cylinder(problem: &CylinderProblem) -> Result<LogDet> {
    Ok(combine(&logdet_cylinder_terms(problem)?))
}

/// `Det(τ, σ_θ) / Det(τ, σ_φ)` on a cylinder of length `r`.
pub fn prop53_ratio(theta: &[f64], phi: &[f64], model: &Arc<BoundaryModel>, r: f64) -> Result<f64> {
    let tau = make_tau(model)?;
    cylinder_det_ratio(
        model,
        r,
        &tau,
        &make_sigma_theta(model, theta)?,
        &make_sigma_theta(model, phi)?,
    )
}

/// `Det(C, σ_1) / Det(C, σ_2)` on a cylinder of length `r` with `APS(C)` at
/// `u = 0`.
pub fn cylinder_det_ratio(
    model: &Arc<BoundaryModel>,
    r: f64,
    left: &Involution,
    sigma1: &Involution,
    sigma2: &Involution,
) -> Result<f64> {
    let make = |s: &Involution| {
        CylinderProblem::new(model.clone(), r, EndCondition::Aps(left.clone()), EndCondition::Aps(s.clone()))
    };
    let a = logdet_cylinder_terms(&make(sigma1)?)?;
    let b = logdet_cylinder_terms(&make(sigma2)?)?;
    // identical nonzero-mode terms cancel pairwise before summation
    let diff = compensated_sum(a.iter().zip(&b).map(|(x, y)| x.value - y.value));
    Ok(diff.exp())
}

/// `ζ_{B²}(0)`: the number of nonzero eigenvalues of `B`.
pub fn zeta_b2_at_zero(model: &BoundaryModel) -> usize {
    model.nonzero_count()
}

/// Independent evaluation from the eigenvalues.
///
/// For eigenvalues `μ_j` that approach `x_j² = ((j - 1 + α)π/r)²`,
/// `log Det = -∂_s ζ_x(0) + Σ_j log(μ_j / x_j²)`. The first term is a
/// Hurwitz value; the sum is taken exactly for `j ≤ K` and the tail from the
/// large-`x` expansion `log(μ/x²) = c_2 x^{-2} + c_4 x^{-4} + c_6 x^{-6} +
/// O(x^{-8})`, whose power sums are Hurwitz values `ζ(2m, K + α)`.
pub mod oracle {
    use super::*;
    use crate::spectrum::mixed_mode_nu;

    fn tail_coeffs(lambda: f64, r: f64, bc: IntervalBc) -> ([f64; 3], f64) {
        let l2 = lambda * lambda;
        match bc {
            IntervalBc::DirichletDirichlet | IntervalBc::DirichletNeumann => {
                ([l2, -l2 * l2 / 2.0, l2 * l2 * l2 / 3.0], l2.powi(4) / 4.0)
            }
            IntervalBc::DirichletRobin => {
                let (l, r2, r3, r4) = (lambda, r * r, r * r * r, r.powi(4));
                let c2 = l2 + 2.0 * l / r;
                let c4 = -l2 * l2 / 2.0 - 8.0 * l2 * l / (3.0 * r) - 3.0 * l2 / r2;
                let c6 = l2.powi(3) / 3.0 + 46.0 * l.powi(5) / (15.0 * r) + 25.0 * l2 * l2 / (3.0 * r2)
                    + 20.0 * l2 * l / (3.0 * r3);
                let c8 = l2.powi(4) / 4.0
                    + 352.0 * l.powi(7) / (105.0 * r)
                    + 686.0 * l2.powi(3) / (45.0 * r2)
                    + 28.0 * l.powi(5) / r3
                    + 35.0 * l2 * l2 / (2.0 * r4);
                ([c2, c4, c6], c8)
            }
        }
    }

    /// Truncated-zeta evaluation of [`logdet_interval_mode`] with `k`
    /// exact terms (raised if needed so the tail expansion converges).
    pub fn truncated_zeta_logdet(lambda: f64, r: f64, bc: IntervalBc, k: usize) -> Result<LogDet> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveLength(r));
        }
        let lambda = lambda.abs();
        let k = k.max((4.0 * lambda * r / PI).ceil() as usize).max(8);
        let alpha = match bc {
            IntervalBc::DirichletDirichlet => 1.0,
            _ => 0.5,
        };
        let x = |j: usize| (j as f64 - 1.0 + alpha) * PI / r;
        let base = crate::special::arithmetic_logdet(alpha * PI, r)?;
        let head: Vec<f64> = match bc {
            IntervalBc::DirichletDirichlet | IntervalBc::DirichletNeumann => {
                (1..=k).map(|j| (lambda / x(j)).powi(2).ln_1p()).collect()
            }
            IntervalBc::DirichletRobin => {
                if lambda == 0.0 {
                    return truncated_zeta_logdet(0.0, r, IntervalBc::DirichletNeumann, k);
                }
                mixed_mode_nu(lambda, r, k)?
                    .iter()
                    .enumerate()
                    .map(|(i, nu)| {
                        let xj = x(i + 1);
                        // log((λ² + ν²)/x²) with ν = x + δ
                        let d = (nu - xj) / xj;
                        ((lambda / xj).powi(2) + d * (2.0 + d)).ln_1p()
                    })
                    .collect()
            }
        };
        let (coeffs, next) = tail_coeffs(lambda, r, bc);
        let q = k as f64 + alpha;
        let scale = (r / PI).powi(2);
        let mut tail = Vec::with_capacity(3);
        for (m, c) in coeffs.iter().enumerate() {
            let s = 2.0 * (m + 1) as f64;
            tail.push(c * scale.powi(m as i32 + 1) * hurwitz_zeta(s, q)?);
        }
        let err_tail = next.abs() * scale.powi(4) * hurwitz_zeta(8.0, q)?;
        let terms = std::iter::once(base).chain(head.iter().copied()).chain(tail.iter().copied());
        let value = compensated_sum(terms);
        Ok(LogDet {
            value,
            method: Method::TruncatedZetaOracle,
            error_bound: 2.0 * err_tail + 1e-15 * (k as f64) + 4.0 * f64::EPSILON * value.abs(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::truncated_zeta_logdet;
    use super::*;
    use crate::model::canonical_model;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    #[test]
    fn arithmetic_examples() {
        let v = logdet_arithmetic_family(FRAC_PI_2, PI, 1).unwrap();
        assert_relative_eq!(v.value, LN_2, max_relative = 1e-14);
        assert_eq!(v.method, Method::HurwitzClosedForm);
        for r in [0.1, 1.0, 3.0, 40.0] {
            let v = logdet_arithmetic_family(PI, r, 1).unwrap();
            assert_relative_eq!(v.value, (2.0 * r).ln(), max_relative = 1e-13, epsilon = 1e-15);
        }
        let one = logdet_arithmetic_family(0.7, 1.3, 1).unwrap().value;
        let two = logdet_arithmetic_family(0.7, 1.3, 2).unwrap().value;
        assert_eq!(two, 2.0 * one);
        assert_eq!(logdet_arithmetic_family(0.0, 1.0, 1), Err(Error::OffsetOutOfRange(0.0)));
        assert!(logdet_arithmetic_family(4.0, 1.0, 1).is_err());
    }

    #[test]
    fn sine_product_from_pair() {
        // Det of the pair (θ, π - θ) is 4 sin²θ
        for t in [0.2, 0.7, 1.3] {
            let v = logdet_arithmetic_family(t, 1.7, 1).unwrap().value + logdet_arithmetic_family(PI - t, 1.7, 1).unwrap().value;
            assert_relative_eq!(v, (4.0 * t.sin().powi(2)).ln(), max_relative = 1e-13);
        }
    }

    #[test]
    fn interval_mode_values() {
        let dd = |l, r| logdet_interval_mode(l, r, IntervalBc::DirichletDirichlet).unwrap().value;
        assert_relative_eq!(dd(0.0, 1.5), 3f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(dd(1.0, 1.0), (2.0 * 1f64.sinh()).ln(), max_relative = 1e-15);
        assert_relative_eq!(dd(1e-6, 1.0), 2f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(dd(50.0, 2.0), 100.0 - 50f64.ln(), max_relative = 1e-15);
        let dr = logdet_interval_mode(3.0, 2.0, IntervalBc::DirichletRobin).unwrap().value;
        assert_relative_eq!(dr, LN_2 + 6.0, max_relative = 1e-15);
        let dn = logdet_interval_mode(0.5, 2.0, IntervalBc::DirichletNeumann).unwrap().value;
        assert_relative_eq!(dn, (2.0 * 1f64.cosh()).ln(), max_relative = 1e-15);
    }

    #[test]
    fn oracle_agrees_with_closed_forms() {
        for &bc in &[IntervalBc::DirichletDirichlet, IntervalBc::DirichletNeumann, IntervalBc::DirichletRobin] {
            for &(lam, r) in &[(0.5, 0.5), (1.0, 1.0), (2.0, 0.7), (0.3, 4.0), (5.0, 2.0)] {
                let closed = logdet_interval_mode(lam, r, bc).unwrap();
                let zeta = truncated_zeta_logdet(lam, r, bc, 200).unwrap();
                assert!(
                    (closed.value - zeta.value).abs() < 1e-8,
                    "{bc:?} λ = {lam} r = {r}: {} vs {}",
                    closed.value,
                    zeta.value
                );
                assert!(closed.agrees_with(&zeta, 1e-12));
            }
        }
    }

    #[test]
    fn oracle_dd_is_tight() {
        let closed = logdet_interval_mode(1.0, 1.0, IntervalBc::DirichletDirichlet).unwrap();
        let zeta = truncated_zeta_logdet(1.0, 1.0, IntervalBc::DirichletDirichlet, 50).unwrap();
        assert!((closed.value - zeta.value).abs() < 1e-12);
    }

    #[test]
    fn cylinder_examples() {
        let m = Arc::new(canonical_model(1, &[]).unwrap());
        let theta = 0.9;
        let p = CylinderProblem::new(
            m.clone(),
            1.0,
            EndCondition::Aps(make_tau(&m).unwrap()),
            EndCondition::Aps(make_sigma_theta(&m, &[theta]).unwrap()),
        )
        .unwrap();
        let want = logdet_arithmetic_family(theta, 1.0, 1).unwrap().value + logdet_arithmetic_family(PI - theta, 1.0, 1).unwrap().value;
        assert_relative_eq!(logdet_cylinder(&p).unwrap().value, want, max_relative = 1e-14);

        let m = Arc::new(canonical_model(0, &[1.0]).unwrap());
        let p = CylinderProblem::new(m, 1.0, EndCondition::Dirichlet, EndCondition::Dirichlet).unwrap();
        // two DD modes with |λ| = 1
        assert_relative_eq!(logdet_cylinder(&p).unwrap().value, 2.0 * (2.0 * 1f64.sinh()).ln(), max_relative = 1e-14);
    }

    #[test]
    fn dirichlet_aps_logdet_is_sigma_independent() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let m = Arc::new(canonical_model(2, &[0.3, 1.2]).unwrap());
        let a = crate::model::Involution::random(2, &mut rng);
        let b = crate::model::Involution::random(2, &mut rng);
        let p = CylinderProblem::new(m, 2.0, EndCondition::Dirichlet, EndCondition::Aps(a)).unwrap();
        let q = p.with_right(EndCondition::Aps(b)).unwrap();
        assert_eq!(logdet_cylinder(&p).unwrap().value, logdet_cylinder(&q).unwrap().value);
    }

    #[test]
    fn prop53_examples() {
        let m1 = Arc::new(canonical_model(1, &[0.5, 2.0]).unwrap());
        assert_eq!(prop53_ratio(&[0.4], &[0.4], &m1, 1.0).unwrap(), 1.0);
        assert_relative_eq!(prop53_ratio(&[FRAC_PI_3], &[FRAC_PI_6], &m1, 1.0).unwrap(), 3.0, max_relative = 1e-12);
        let m2 = Arc::new(canonical_model(2, &[1.0]).unwrap());
        let v = prop53_ratio(&[FRAC_PI_4, FRAC_PI_4], &[FRAC_PI_6, FRAC_PI_3], &m2, 2.5).unwrap();
        assert_relative_eq!(v, 4.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn zeta_b2_counts() {
        assert_eq!(zeta_b2_at_zero(&canonical_model(1, &[]).unwrap()), 0);
        assert_eq!(zeta_b2_at_zero(&canonical_model(0, &[1.0]).unwrap()), 2);
        let m = canonical_model(2, &[0.5, 2.0]).unwrap();
        assert_eq!(zeta_b2_at_zero(&m) + m.kernel_dim(), 8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn prop53_independent_of_r_and_spectrum(
            r in 0.2f64..8.0,
            eigs in proptest::collection::vec(0.1f64..6.0, 0..4),
            t in 0.1f64..1.4,
            p in 0.1f64..1.4,
        ) {
            let m = Arc::new(canonical_model(1, &eigs).unwrap());
            let v = prop53_ratio(&[t], &[p], &m, r).unwrap();
            let want = (t.sin() / p.sin()).powi(2);
            prop_assert!((v - want).abs() < 1e-10 * want);
        }
    }
}
