//! Scattering data at `λ = 0` and the adiabatic-limit algebra on `ker B`.
//!
//! All kernel matrices are `2l × 2l` in the kernel basis
//! `{f_1, G f_1, ..., f_l, G f_l}`.
//!
//! Generalised eigensections on the half-infinite cylinder are
//!
//! ```text
//! E(f, λ) = e^{-iλu}(f - iGf) + e^{iλu} C(λ)(f - iGf)
//!         + Σ_j a_j(λ) e^{-κ_j u} ((κ_j + μ_j) φ_{μ_j} + λ φ_{-μ_j}),
//! ```
//!
//! with `κ_j = sqrt(μ_j² - λ²)` and `φ_{-μ} = G φ_μ`; this is what
//! `G(∂_u + B) E = λ E` forces for an `L²` tail.

use crate::error::{Error, Result};
use crate::linalg::{self, c, C64, CMatrix, CVector, I};
use crate::model::{g_kernel, BoundaryModel, Involution};
use rand::Rng;
use serde::Serialize;

/// Minimum `|det|` of the restricted projections `P` and `K`.
pub const ADMISSIBILITY_THRESHOLD: f64 = 1e-10;

/// Amplitude `a_j(λ) = a0 + λ a1` of one positive mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Amplitude {
    pub a0: f64,
    pub a1: f64,
}

impl Amplitude {
    pub fn at(&self, lambda: f64) -> f64 {
        self.a0 + lambda * self.a1
    }
}

#[derive(Debug, Clone)]
pub struct ScatteringData {
    pub c0: Involution,
    pub c_prime0: Option<CMatrix>,
    pub amplitudes: Option<Vec<Amplitude>>,
}

impl ScatteringData {
    pub fn new(c0: Involution, c_prime0: Option<CMatrix>, amplitudes: Option<Vec<Amplitude>>) -> Result<Self> {
        if let Some(cp) = &c_prime0 {
            let k = c0.matrix().nrows();
            if cp.shape() != (k, k) {
                return Err(Error::Dimension(format!("C'(0) is {:?}, expected {k}x{k}", cp.shape())));
            }
            let g = g_kernel(c0.l());
            let residual = linalg::norm(&(cp * &g + &g * cp));
            if residual > 1e-12 {
                return Err(Error::NotGCommuting(residual));
            }
        }
        Ok(Self {
            c0,
            c_prime0,
            amplitudes,
        })
    }

    /// Seeded synthetic data: random `C'(0)` anticommuting with `G` and
    /// random amplitudes for every positive mode of `model`.
    pub fn synthetic<R: Rng + ?Sized>(model: &BoundaryModel, c0: Involution, rng: &mut R) -> Result<Self> {
        let k = c0.matrix().nrows();
        let g = g_kernel(c0.l());
        let mut x = CMatrix::zeros(k, k);
        for v in x.iter_mut() {
            *v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let cp = (&x + &g * &x * &g) * c(0.5);
        let amps = (0..model.positive_count())
            .map(|_| Amplitude {
                a0: rng.gen_range(-1.0..1.0),
                a1: rng.gen_range(-1.0..1.0),
            })
            .collect();
        Self::new(c0, Some(cp), Some(amps))
    }

    fn c_at(&self, lambda: f64) -> CMatrix {
        match &self.c_prime0 {
            Some(cp) => self.c0.matrix() + cp * c(lambda),
            None => self.c0.matrix().clone(),
        }
    }

    fn amplitude(&self, j: usize) -> Amplitude {
        self.amplitudes
            .as_ref()
            .and_then(|a| a.get(j).copied())
            .unwrap_or(Amplitude { a0: 0.0, a1: 0.0 })
    }
}

/// Scattering data of the half-infinite cylinder with `APS(τ)` at its end:
/// `C(λ) = τ` for all `λ`, no `L²` part.
pub fn cylinder_scattering(model: &BoundaryModel, tau: &Involution) -> ScatteringData {
    let k = tau.matrix().nrows();
    ScatteringData {
        c0: tau.clone(),
        c_prime0: Some(CMatrix::zeros(k, k)),
        amplitudes: Some(vec![Amplitude { a0: 0.0, a1: 0.0 }; model.positive_count()]),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigensectionSample {
    pub lambda: f64,
    pub grid: Vec<f64>,
    /// `E(f, λ)(u)` in the model's original coordinates.
    #[serde(skip)]
    pub values: Vec<CVector>,
    /// `max_u |G(∂_u + B)E - λE|`.
    pub residual: f64,
}

struct Section<'a> {
    model: &'a BoundaryModel,
    frame: CMatrix,
    v: CVector,
}

impl<'a> Section<'a> {
    fn new(model: &'a BoundaryModel, f: &CVector) -> Result<Self> {
        let k = model.kernel_dim();
        if f.len() != k {
            return Err(Error::Dimension(format!("f has {} entries, dim ker B = {k}", f.len())));
        }
        let g = g_kernel(model.half_kernel_dim());
        let v = f - &g * f * I;
        Ok(Self {
            model,
            frame: model.kernel_frame(),
            v,
        })
    }

    fn check_lambda(&self, lambda: f64) -> Result<()> {
        if let Some(mu1) = self.model.smallest_positive() {
            if lambda.abs() >= mu1 {
                return Err(Error::LambdaOutOfRange { lambda, mu1 });
            }
        }
        Ok(())
    }

    /// `(E, ∂_u E)` at `u`.
    fn eval(&self, data: &ScatteringData, lambda: f64, u: f64) -> (CVector, CVector) {
        let cv = data.c_at(lambda) * &self.v;
        let em = (-I * lambda * u).exp();
        let ep = (I * lambda * u).exp();
        let ker = &self.v * em + &cv * ep;
        let dker = &self.v * (-I * lambda * em) + &cv * (I * lambda * ep);
        let mut e = &self.frame * ker;
        let mut de = &self.frame * dker;
        let g = self.model.g();
        for (j, m) in self.model.mode_basis().positive_modes.iter().enumerate() {
            let a = data.amplitude(j).at(lambda);
            if a == 0.0 {
                continue;
            }
            let kappa = (m.mu * m.mu - lambda * lambda).sqrt();
            let decay = (-kappa * u).exp();
            let tail = (&m.phi * c(kappa + m.mu) + g * &m.phi * c(lambda)) * c(a * decay);
            de += &tail * c(-kappa);
            e += tail;
        }
        (e, de)
    }

    /// `(∂_λ E|_{λ=0}, ∂_u ∂_λ E|_{λ=0})` at `u`.
    fn eval_derivative(&self, data: &ScatteringData, u: f64) -> (CVector, CVector) {
        let kg = &self.frame * g_kernel(self.model.half_kernel_dim());
        let f = (&self.v + data.c0.matrix() * &self.v) * c(0.5);
        let cp = data.c_prime0.clone().unwrap_or_else(|| CMatrix::zeros(self.v.len(), self.v.len()));
        let mut e = &kg * &f * c(-2.0 * u) + &self.frame * (&cp * &self.v);
        let mut de = &kg * &f * c(-2.0);
        let g = self.model.g();
        for (j, m) in self.model.mode_basis().positive_modes.iter().enumerate() {
            let amp = data.amplitude(j);
            let decay = (-m.mu * u).exp();
            let tail = (&m.phi * c(2.0 * m.mu * amp.a1) + g * &m.phi * c(amp.a0)) * c(decay);
            de += &tail * c(-m.mu);
            e += tail;
        }
        (e, de)
    }
}

fn apply_d(model: &BoundaryModel, e: &CVector, de: &CVector) -> CVector {
    model.g() * (de + model.b() * e)
}

/// Evaluate `E(f, λ)` on `grid` and verify `D E = λ E` with exact
/// `u`-derivatives. `f` is given in kernel coordinates.
pub fn eigensection(
    model: &BoundaryModel,
    data: &ScatteringData,
    f: &CVector,
    lambda: f64,
    grid: &[f64],
) -> Result<EigensectionSample> {
    let s = Section::new(model, f)?;
    s.check_lambda(lambda)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut residual: f64 = 0.0;
    for &u in grid {
        let (e, de) = s.eval(data, lambda, u);
        let r = apply_d(model, &e, &de) - &e * c(lambda);
        residual = residual.max(linalg::vnorm(&r));
        values.push(e);
    }
    Ok(EigensectionSample {
        lambda,
        grid: grid.to_vec(),
        values,
        residual,
    })
}

/// `∂_λ E(f, λ)|_{λ=0}` on `grid` for `f ∈ ker(I - C(0))`:
///
/// ```text
/// -2uGf + C'(0)(f - iGf) + Σ_j (2μ_j a_j'(0) φ_{μ_j} + a_j(0) φ_{-μ_j}) e^{-μ_j u}
/// ```
///
/// Returns the values and `max_u |D(∂_λ E) - E(f, 0)|`.
pub fn eigensection_derivative(
    model: &BoundaryModel,
    data: &ScatteringData,
    f: &CVector,
    grid: &[f64],
) -> Result<(Vec<CVector>, f64)> {
    let s = Section::new(model, f)?;
    let fixed = linalg::vnorm(&(data.c0.matrix() * f - f));
    if fixed > 1e-12 * linalg::vnorm(f).max(1.0) {
        return Err(Error::Dimension(format!("f is not fixed by C(0): |C(0)f - f| = {fixed:e}")));
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut residual: f64 = 0.0;
    for &u in grid {
        let (d, dd) = s.eval_derivative(data, u);
        let (e0, _) = s.eval(data, 0.0, u);
        residual = residual.max(linalg::vnorm(&(apply_d(model, &d, &dd) - e0)));
        values.push(d);
    }
    Ok((values, residual))
}

/// Largest deviation of the `ker B` component of `E(f, 0)/2` from `f` on
/// the grid, for `f ∈ ker(I - C(0))`.
pub fn extended_solution_residual(model: &BoundaryModel, data: &ScatteringData, f: &CVector, grid: &[f64]) -> Result<f64> {
    let sample = eigensection(model, data, f, 0.0, grid)?;
    let frame = model.kernel_frame();
    let target = &frame * f;
    let proj = &frame * frame.adjoint();
    Ok(sample
        .values
        .iter()
        .map(|e| linalg::vnorm(&(&proj * e * c(0.5) - &target)))
        .fold(0.0, f64::max))
}

/// A projection restricted to `domain → codomain`, in orthonormal bases.
#[derive(Debug, Clone)]
pub struct RestrictedMap {
    pub matrix: CMatrix,
    pub inverse: CMatrix,
    /// `2l × l` orthonormal basis of the domain.
    pub domain: CMatrix,
    /// `2l × l` orthonormal basis of the codomain.
    pub codomain: CMatrix,
}

impl RestrictedMap {
    /// The inverse as a `2l × 2l` map, zero on the orthogonal complement of
    /// the codomain.
    pub fn inverse_full(&self) -> CMatrix {
        &self.domain * &self.inverse * self.codomain.adjoint()
    }
}

/// `|a - b|` relative to the size of the terms (at least 1).
fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    linalg::norm(&(a - b)) / linalg::norm(a).max(linalg::norm(b)).max(1.0)
}

fn basis(p: &CMatrix, l: usize) -> CMatrix {
    linalg::columns_to_matrix(&linalg::canonical_basis(p, l), p.nrows())
}

fn restrict(map: &CMatrix, domain: CMatrix, codomain: CMatrix, what: &str) -> Result<RestrictedMap> {
    let matrix = codomain.adjoint() * map * &domain;
    let d = linalg::det(&matrix).norm();
    if !(d >= ADMISSIBILITY_THRESHOLD) {
        return Err(Error::Inadmissible(format!("{what} has |det| = {d:e}")));
    }
    let inverse = linalg::inverse(&matrix).ok_or_else(|| Error::Inadmissible(format!("{what} is singular")))?;
    Ok(RestrictedMap {
        matrix,
        inverse,
        domain,
        codomain,
    })
}

fn check_pair(c0: &Involution, sigma: &Involution) -> Result<usize> {
    if c0.l() != sigma.l() {
        return Err(Error::Dimension(format!("C(0) has l = {}, σ has l = {}", c0.l(), sigma.l())));
    }
    Ok(c0.l())
}

/// `P = (I - C(0))/2 (I + σ₂)/2 : ker(I - σ₂) → ker(I + C(0))`.
pub fn projection_p(c0: &Involution, sigma2: &Involution) -> Result<RestrictedMap> {
    let l = check_pair(c0, sigma2)?;
    let map = c0.minus_projector() * sigma2.plus_projector();
    restrict(&map, basis(&sigma2.plus_projector(), l), basis(&c0.minus_projector(), l), "P")
}

/// `K = (I + C(0))/2 (I - σ₂)/2 : ker(I + σ₂) → ker(I - C(0))`.
pub fn projection_k(c0: &Involution, sigma2: &Involution) -> Result<RestrictedMap> {
    let l = check_pair(c0, sigma2)?;
    let map = c0.plus_projector() * sigma2.minus_projector();
    restrict(&map, basis(&sigma2.minus_projector(), l), basis(&c0.plus_projector(), l), "K")
}

fn difference_inverse(c0: &Involution, sigma: &Involution) -> Result<CMatrix> {
    let d = c0.matrix() - sigma.matrix();
    if d.nrows() > 0 && d.singular_values().min() < ADMISSIBILITY_THRESHOLD {
        return Err(Error::SingularDifference);
    }
    linalg::inverse(&d).ok_or(Error::SingularDifference)
}

#[derive(Debug, Clone)]
pub struct OperatorT {
    pub t: CMatrix,
    pub inverse: CMatrix,
    /// Largest disagreement among the three expressions for `T`.
    pub residual_forms: f64,
    /// `T⁻¹` against `2(C(0) - σ₂)⁻¹ C(0)`.
    pub residual_inverse: f64,
    /// `T⁻¹ C(0) T⁻¹` against `4(C(0) - σ₂)⁻² C(0)`.
    pub residual_sandwich: f64,
}

/// `T = ½(I - C(0)σ₂) = ½C(0)(C(0) - σ₂) = ½(σ₂ - C(0))σ₂`.
pub fn operator_t(c0: &Involution, sigma2: &Involution) -> Result<OperatorT> {
    check_pair(c0, sigma2)?;
    let (c0m, s) = (c0.matrix(), sigma2.matrix());
    let id = linalg::identity(c0m.nrows());
    let t = (&id - c0m * s) * c(0.5);
    let t2 = c0m * (c0m - s) * c(0.5);
    let t3 = (s - c0m) * s * c(0.5);
    let residual_forms = rel(&t, &t2).max(rel(&t, &t3));
    let dinv = difference_inverse(c0, sigma2).map_err(|_| Error::Inadmissible("C(0) - σ₂ is singular".into()))?;
    let inverse = linalg::inverse(&t).ok_or_else(|| Error::Inadmissible("T is singular".into()))?;
    let residual_inverse = rel(&inverse, &(&dinv * c0m * c(2.0)));
    let residual_sandwich = rel(&(&inverse * c0m * &inverse), &(&dinv * &dinv * c0m * c(4.0)));
    Ok(OperatorT {
        t,
        inverse,
        residual_forms,
        residual_inverse,
        residual_sandwich,
    })
}

#[derive(Debug, Clone)]
pub struct LimitBlock {
    /// `(C(0) - σ₂)⁻² C(0) (I + C(0))`.
    pub block: CMatrix,
    /// `½ T⁻¹ C(0) T⁻¹ (I + C(0))/2`.
    pub via_t: CMatrix,
    /// Sum of the `ker(I + σ₂)` and `ker(I - σ₂)` parts built from `P⁻¹`
    /// and `K⁻¹`.
    pub via_projections: CMatrix,
    /// Disagreement of the two expressions for the `ker(I - σ₂)` part.
    pub residual_k_forms: f64,
}

impl LimitBlock {
    pub fn max_residual(&self) -> f64 {
        rel(&self.block, &self.via_t)
            .max(rel(&self.block, &self.via_projections))
            .max(self.residual_k_forms)
    }
}

/// `lim_{r→∞} proj_{ker B} (1/2r) R⁻¹_{r,σ₂} proj_{ker B}`, by three routes.
pub fn limit_kernel_block(c0: &Involution, sigma2: &Involution) -> Result<LimitBlock> {
    let t = operator_t(c0, sigma2)?;
    let c0m = c0.matrix();
    let dinv = difference_inverse(c0, sigma2).map_err(|_| Error::Inadmissible("C(0) - σ₂ is singular".into()))?;
    let k = c0m.nrows();
    let id = linalg::identity(k);
    let block = &dinv * &dinv * c0m * (&id + c0m);
    let via_t = &t.inverse * c0m * &t.inverse * c0.plus_projector() * c(0.5);

    let pinv = projection_p(c0, sigma2)?.inverse_full();
    let kinv = projection_k(c0, sigma2)?.inverse_full();
    let left = (&id - &pinv * c0.minus_projector()) * sigma2.minus_projector() * c(0.5);
    let minus_part = &left;
    let plus_a = -(&left * (&id - &kinv * c0.plus_projector()) * sigma2.plus_projector());
    let plus_b = &left * &kinv * c0.plus_projector() * sigma2.plus_projector();
    let residual_k_forms = rel(&plus_a, &plus_b);
    let via_projections = minus_part + plus_b;
    Ok(LimitBlock {
        block,
        via_t,
        via_projections,
        residual_k_forms,
    })
}

fn real_det(m: &CMatrix) -> Result<f64> {
    let d = linalg::det(m);
    if d.im.abs() > 1e-12 * d.norm().max(1.0) {
        return Err(Error::Numeric(format!("determinant {d} is not real")));
    }
    Ok(d.re)
}

/// `det(C(0) - σ₁) / det(C(0) - σ₂)`.
pub fn theorem13_ratio(c0: &Involution, sigma1: &Involution, sigma2: &Involution) -> Result<f64> {
    check_pair(c0, sigma1)?;
    check_pair(c0, sigma2)?;
    difference_inverse(c0, sigma1)?;
    difference_inverse(c0, sigma2)?;
    let num = linalg::det(&(c0.matrix() - sigma1.matrix()));
    let den = linalg::det(&(c0.matrix() - sigma2.matrix()));
    let q = num / den;
    if q.im.abs() > 1e-12 * q.norm().max(1.0) {
        return Err(Error::Numeric(format!("ratio {q} is not real")));
    }
    Ok(q.re)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitFredholm {
    pub value: f64,
    /// `β` against `-σ₂β`.
    pub beta_left: f64,
    /// `β` against `βσ₂`.
    pub beta_right: f64,
    /// `|det(I + β) - 1|`.
    pub det_i_plus_beta: f64,
}

/// `det(I + (σ₂ - σ₁)(C(0) - σ₂)⁻²(I + C(0)))`, with the `β` checks.
pub fn limit_fredholm_det(c0: &Involution, sigma1: &Involution, sigma2: &Involution) -> Result<LimitFredholm> {
    check_pair(c0, sigma1)?;
    check_pair(c0, sigma2)?;
    let inadmissible = |_| Error::Inadmissible("C(0) - σ is singular".into());
    let d1 = difference_inverse(c0, sigma1).map_err(inadmissible)?;
    let d2 = difference_inverse(c0, sigma2).map_err(inadmissible)?;
    let (c0m, s1, s2) = (c0.matrix(), sigma1.matrix(), sigma2.matrix());
    let id = linalg::identity(c0m.nrows());
    let value = real_det(&(&id + (s2 - s1) * &d2 * &d2 * (&id + c0m)))?;
    let beta = &d2 * &d1 * (&id - s1) * (&id + s2);
    Ok(LimitFredholm {
        value,
        beta_left: rel(&beta, &-(s2 * &beta)),
        beta_right: rel(&beta, &(&beta * s2)),
        det_i_plus_beta: (linalg::det(&(&id + &beta)) - c(1.0)).norm(),
    })
}

/// Residuals relative to the size of the terms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Lemma43Residuals {
    /// `C(0)(C(0) - σ)⁻¹ = -(C(0) - σ)⁻¹σ`
    pub left: f64,
    /// `(C(0) - σ)⁻¹C(0) = -σ(C(0) - σ)⁻¹`
    pub right: f64,
    /// `C(0)(C(0) - σ)⁻² = (C(0) - σ)⁻²C(0)`
    pub square_c0: f64,
    /// `(C(0) - σ)⁻²σ = σ(C(0) - σ)⁻²`
    pub square_sigma: f64,
}

impl Lemma43Residuals {
    pub fn max(&self) -> f64 {
        self.left.max(self.right).max(self.square_c0).max(self.square_sigma)
    }
}

pub fn lemma43_check(c0: &Involution, sigma: &Involution) -> Result<Lemma43Residuals> {
    check_pair(c0, sigma)?;
    let d = difference_inverse(c0, sigma)?;
    let (c0m, s) = (c0.matrix(), sigma.matrix());
    let d2 = &d * &d;
    Ok(Lemma43Residuals {
        left: rel(&(c0m * &d), &-(&d * s)),
        right: rel(&(&d * c0m), &-(s * &d)),
        square_c0: rel(&(c0m * &d2), &(&d2 * c0m)),
        square_sigma: rel(&(&d2 * s), &(s * &d2)),
    })
}

/// `A_σ(t) = ½(I - C(0)) + (t/2)(I - σ)`.
pub fn a_sigma(c0: &Involution, sigma: &Involution, t: f64) -> CMatrix {
    c0.minus_projector() + sigma.minus_projector() * c(t)
}

/// `A_{σ₁}(t) A_{σ₂}(t)⁻¹` against
/// `I + (σ₂ - σ₁)(C(0) - σ₂)⁻²(C(0) + I) + t(I - σ₁)(C(0) - σ₂)⁻²(I + σ₂)`.
pub fn a_sigma_expansion_residual(c0: &Involution, sigma1: &Involution, sigma2: &Involution, t: f64) -> Result<f64> {
    check_pair(c0, sigma1)?;
    check_pair(c0, sigma2)?;
    let d2 = difference_inverse(c0, sigma2)?;
    let dd = &d2 * &d2;
    let (c0m, s1, s2) = (c0.matrix(), sigma1.matrix(), sigma2.matrix());
    let id = linalg::identity(c0m.nrows());
    let a2inv = linalg::inverse(&a_sigma(c0, sigma2, t)).ok_or(Error::SingularDifference)?;
    let lhs = a_sigma(c0, sigma1, t) * a2inv;
    let rhs = &id + (s2 - s1) * &dd * (c0m + &id) + (&id - s1) * &dd * (&id + s2) * c(t);
    Ok(rel(&lhs, &rhs))
}

/// `det(A_{σ₁}(t) A_{σ₂}(t)⁻¹)`, as `det A_{σ₁}(t) / det A_{σ₂}(t)`.
pub fn a_sigma_det_ratio(c0: &Involution, sigma1: &Involution, sigma2: &Involution, t: f64) -> Result<f64> {
    check_pair(c0, sigma1)?;
    check_pair(c0, sigma2)?;
    let den = linalg::det(&a_sigma(c0, sigma2, t));
    if den.norm() == 0.0 {
        return Err(Error::SingularDifference);
    }
    let q = linalg::det(&a_sigma(c0, sigma1, t)) / den;
    if q.im.abs() > 1e-9 * q.norm().max(1.0) {
        return Err(Error::Numeric(format!("ratio {q} is not real")));
    }
    Ok(q.re)
}

/// Random `(C(0), σ₁, σ₂)` with both differences invertible and the
/// smallest singular value of each at least `floor`.
pub fn random_admissible_triple<R: Rng + ?Sized>(l: usize, floor: f64, rng: &mut R) -> (Involution, Involution, Involution) {
    if l == 0 {
        return (Involution::empty(), Involution::empty(), Involution::empty());
    }
    let c0 = Involution::random(l, rng);
    let mut draw = || loop {
        let s = Involution::random(l, rng);
        if (c0.matrix() - s.matrix()).singular_values().min() >= floor {
            return s;
        }
    };
    let s1 = draw();
    let s2 = draw();
    (c0, s1, s2)
}

/// Kernel-coordinate vectors spanning `ker(I - C(0))`.
pub fn fixed_vectors(c0: &Involution) -> Vec<CVector> {
    linalg::canonical_basis(&c0.plus_projector(), c0.l())
}
