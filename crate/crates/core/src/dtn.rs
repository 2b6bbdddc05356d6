//! Dirichlet-to-Neumann operators for a bulk piece glued to a cylinder.
//!
//! The glued manifold is `[-L, r] × Y`, cut at `u = 0`. The bulk `[-L, 0]`
//! carries a far-end condition at `u = -L`, the cylinder `[0, r]` carries
//! `APS(σ)` at `u = r`. For interface data `f`, `R_{r,σ} f` is the sum of the
//! outward normal derivatives of the two harmonic extensions, so
//! `R = Q_1 + Q_cyl` with `Q_1 f = ∂_u φ_1(0)` and `Q_cyl f = -∂_u ψ(0)`.
//!
//! All operators act on mode coordinates: nonzero modes first (in the order
//! of [`BoundaryModel::modes`]), then `ker B` in the kernel basis.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::model::{BoundaryModel, Involution, ModeKind};
use crate::spectrum::{CylinderProblem, EndCondition};
use crate::zeta::logdet_cylinder;
use rand::Rng;
use serde::Serialize;
use std::f64::consts::LN_2;
use std::sync::Arc;

/// Smallest singular value below which `C(0) - σ` counts as singular.
pub const INVERTIBILITY_THRESHOLD: f64 = 1e-10;

/// Bulk piece `[-L, 0] × Y` realised as a cylinder with a far-end condition.
#[derive(Debug, Clone)]
pub struct BulkModel {
    length: f64,
    far_bc: EndCondition,
    model: Arc<BoundaryModel>,
}

/// Source of the bulk Neumann data `Q_1` as an `n × n` mode-coordinate
/// matrix.
pub trait Q1 {
    fn model(&self) -> &Arc<BoundaryModel>;
    fn q1_matrix(&self) -> Result<CMatrix>;
}

impl BulkModel {
    pub fn new(model: Arc<BoundaryModel>, length: f64, far_bc: EndCondition) -> Result<Self> {
        // reuse the cylinder validation for the far involution
        CylinderProblem::new(model.clone(), length, far_bc.clone(), EndCondition::Dirichlet)?;
        Ok(Self { length, far_bc, model })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn far_bc(&self) -> &EndCondition {
        &self.far_bc
    }

    /// The bulk as a Dirichlet-split problem on `[-L, 0]`.
    pub fn split_problem(&self) -> Result<CylinderProblem> {
        CylinderProblem::new(self.model.clone(), self.length, self.far_bc.clone(), EndCondition::Dirichlet)
    }

    /// The glued problem on `[-L, r]` with `APS(σ)` at `u = r`.
    pub fn glued_problem(&self, r: f64, sigma: &Involution) -> Result<CylinderProblem> {
        CylinderProblem::new(
            self.model.clone(),
            self.length + r,
            self.far_bc.clone(),
            EndCondition::Aps(sigma.clone()),
        )
    }
}

impl Q1 for BulkModel {
    fn model(&self) -> &Arc<BoundaryModel> {
        &self.model
    }

    fn q1_matrix(&self) -> Result<CMatrix> {
        let (scalars, kernel) = q1_coefficients(self)?;
        Ok(mode_matrix(&self.model, scalars.iter().map(|&(_, q)| q), &kernel))
    }
}

/// Synthetic bulk data: positive per-mode coefficients, a positive kernel
/// block and a coupling between kernel and nonzero modes.
#[derive(Debug, Clone)]
pub struct SyntheticBulk {
    model: Arc<BoundaryModel>,
    matrix: CMatrix,
}

impl SyntheticBulk {
    pub fn new(model: Arc<BoundaryModel>, matrix: CMatrix) -> Result<Self> {
        let n = model.dim();
        if matrix.shape() != (n, n) {
            return Err(Error::Dimension(format!("Q1 is {:?}, expected {n}x{n}", matrix.shape())));
        }
        let asym = linalg::norm(&(&matrix - matrix.adjoint()));
        if asym > 1e-12 * linalg::norm(&matrix).max(1.0) {
            return Err(Error::SymmetryViolation {
                relation: "Q1 = Q1*",
                residual: asym,
                tolerance: 1e-12,
            });
        }
        Ok(Self { model, matrix })
    }

    /// Random positive semidefinite data; `coupling` scales the kernel to
    /// nonzero-mode block.
    pub fn random<R: Rng + ?Sized>(model: Arc<BoundaryModel>, coupling: f64, rng: &mut R) -> Self {
        let n = model.dim();
        let k0 = model.kernel_offset();
        let mut m = CMatrix::zeros(n, n);
        for (i, mode) in model.modes().iter().enumerate() {
            if i < k0 {
                m[(i, i)] = c(mode.eigenvalue.abs() * rng.gen_range(0.5..2.0));
            }
        }
        let mut x = CMatrix::zeros(n, n);
        for v in x.iter_mut() {
            *v = linalg::C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        for i in 0..k0 {
            for j in 0..k0 {
                if i != j {
                    x[(i, j)] = linalg::ZERO;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if (i < k0) != (j < k0) {
                    x[(i, j)] *= coupling;
                }
            }
        }
        let matrix = m + &x * x.adjoint() * c(1.0 / n as f64);
        Self { model, matrix }
    }
}

impl Q1 for SyntheticBulk {
    fn model(&self) -> &Arc<BoundaryModel> {
        &self.model
    }

    fn q1_matrix(&self) -> Result<CMatrix> {
        Ok(self.matrix.clone())
    }
}

fn mode_matrix(model: &BoundaryModel, scalars: impl Iterator<Item = f64>, kernel: &CMatrix) -> CMatrix {
    let n = model.dim();
    let k0 = model.kernel_offset();
    let mut m = CMatrix::zeros(n, n);
    for (i, q) in scalars.enumerate() {
        m[(i, i)] = c(q);
    }
    m.view_mut((k0, k0), (kernel.nrows(), kernel.ncols())).copy_from(kernel);
    m
}

fn check_l(model: &BoundaryModel, sigma: &Involution) -> Result<()> {
    if sigma.l() != model.half_kernel_dim() {
        return Err(Error::Dimension(format!(
            "involution acts on C^{} but dim ker B = {}",
            2 * sigma.l(),
            model.kernel_dim()
        )));
    }
    Ok(())
}

/// Neumann data `∂_u φ(0)` of the harmonic extension into the bulk: one
/// `(λ, coefficient)` per nonzero mode and the `2l × 2l` kernel block.
///
/// Far-end conditions per mode follow from the left-end APS projector:
/// Dirichlet for `λ > 0`, `-y' + |λ| y = 0` for `λ < 0`, and on `ker B`
/// Dirichlet on `ker(I + τ)`, Neumann on `ker(I - τ)`.
pub fn q1_coefficients(bulk: &BulkModel) -> Result<(Vec<(f64, f64)>, CMatrix)> {
    let l = bulk.length;
    let model = &bulk.model;
    let mut scalars = Vec::with_capacity(model.nonzero_count());
    for mode in model.modes() {
        if matches!(mode.kind, ModeKind::Kernel(_)) {
            continue;
        }
        let lam = mode.eigenvalue;
        let a = lam.abs();
        let q = match (&bulk.far_bc, lam > 0.0) {
            (EndCondition::Aps(_), false) => a,
            _ => a / (a * l).tanh(),
        };
        if !q.is_finite() {
            return Err(Error::UnsolvableMode(format!("bulk mode λ = {lam}")));
        }
        scalars.push((lam, q));
    }
    let k = model.kernel_dim();
    let kernel = match &bulk.far_bc {
        EndCondition::Dirichlet => linalg::identity(k) * c(1.0 / l),
        EndCondition::Aps(tau) => tau.minus_projector() * c(1.0 / l),
    };
    Ok((scalars, kernel))
}

/// Cylinder part of `R_{r,σ}`: `|λ| coth(r|λ|)` for `λ < 0`, `|λ|` for
/// `λ > 0`, `(1/2r)(I - σ)` on `ker B`.
pub fn cylinder_part(model: &BoundaryModel, r: f64, sigma: &Involution) -> Result<CMatrix> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveLength(r));
    }
    check_l(model, sigma)?;
    let scalars = model
        .modes()
        .into_iter()
        .filter(|m| !matches!(m.kind, ModeKind::Kernel(_)))
        .map(|m| {
            let a = m.eigenvalue.abs();
            if m.eigenvalue > 0.0 {
                a
            } else {
                a / (a * r).tanh()
            }
        });
    Ok(mode_matrix(model, scalars, &(sigma.minus_projector() * c(1.0 / r))))
}

#[derive(Debug, Clone)]
pub struct DtnOperator {
    pub r: f64,
    pub sigma: Involution,
    /// `(λ, R_λ)` per nonzero mode (diagonal entries).
    pub nonzero_mode_coeffs: Vec<(f64, f64)>,
    /// `2l × 2l` restriction to `ker B`.
    pub kernel_block: CMatrix,
    /// Full `n × n` operator in mode coordinates.
    pub matrix: CMatrix,
    kernel_offset: usize,
}

impl DtnOperator {
    pub fn log_det(&self) -> Result<f64> {
        linalg::logdet_hpd(&self.matrix).ok_or(Error::SingularR)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        linalg::inverse(&self.matrix).ok_or(Error::SingularR)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.matrix).0
    }

    pub fn is_positive(&self) -> bool {
        self.eigenvalues().first().is_none_or(|&e| e > 0.0)
    }

    /// `2l × 2l` kernel block of `R^{-1}`.
    pub fn inverse_kernel_block(&self) -> Result<CMatrix> {
        let inv = self.inverse()?;
        let k = self.kernel_block.nrows();
        Ok(inv.view((self.kernel_offset, self.kernel_offset), (k, k)).into_owned())
    }

    /// Lift a `2l × 2l` kernel matrix to mode coordinates.
    pub fn lift(&self, m: &CMatrix) -> CMatrix {
        let n = self.matrix.nrows();
        let mut out = CMatrix::zeros(n, n);
        out.view_mut((self.kernel_offset, self.kernel_offset), (m.nrows(), m.ncols())).copy_from(m);
        out
    }
}

/// `R_{r,σ} = Q_1 + Q_cyl`.
pub fn assemble_r<Q: Q1 + ?Sized>(bulk: &Q, r: f64, sigma: &Involution) -> Result<DtnOperator> {
    let model = bulk.model();
    let matrix = bulk.q1_matrix()? + cylinder_part(model, r, sigma)?;
    let k0 = model.kernel_offset();
    let k = model.kernel_dim();
    let nonzero_mode_coeffs = model
        .modes()
        .iter()
        .take(k0)
        .enumerate()
        .map(|(i, m)| (m.eigenvalue, matrix[(i, i)].re))
        .collect();
    Ok(DtnOperator {
        r,
        sigma: sigma.clone(),
        nonzero_mode_coeffs,
        kernel_block: matrix.view((k0, k0), (k, k)).into_owned(),
        matrix,
        kernel_offset: k0,
    })
}

/// `∂_r R_{r,σ}`: `-λ²/sinh²(r|λ|)` on negative modes, 0 on positive modes,
/// `-(1/2r²)(I - σ)` on `ker B`.
pub fn dr_dr(model: &BoundaryModel, r: f64, sigma: &Involution) -> Result<CMatrix> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveLength(r));
    }
    check_l(model, sigma)?;
    let scalars = model
        .modes()
        .into_iter()
        .filter(|m| !matches!(m.kind, ModeKind::Kernel(_)))
        .map(|m| {
            if m.eigenvalue > 0.0 {
                0.0
            } else {
                let a = m.eigenvalue.abs();
                let s = 2.0 * (a * r).sinh();
                -4.0 * a * a / (s * s)
            }
        });
    Ok(mode_matrix(model, scalars, &(sigma.minus_projector() * c(-1.0 / (r * r)))))
}

/// The two trace terms of `∂_r [log det R_{r,σ₁} - log det R_{r,σ₂}]`:
///
/// * `(1/r²) Tr{R₂⁻¹ Π₋(σ₂) - R₁⁻¹ Π₋(σ₁)}` with `Π₋(σ) = (I - σ)/2`
/// * `(1/2r) Tr{(σ₂ - σ₁) R₁⁻¹ K_r P_< R₂⁻¹}` with `K_r = λ²/sinh²(r|λ|)`
pub fn lemma25_traces<Q: Q1 + ?Sized>(bulk: &Q, r: f64, sigma1: &Involution, sigma2: &Involution) -> Result<(f64, f64)> {
    let model = bulk.model();
    let r1 = assemble_r(bulk, r, sigma1)?;
    let r2 = assemble_r(bulk, r, sigma2)?;
    let i1 = r1.inverse()?;
    let i2 = r2.inverse()?;
    let p1 = r1.lift(&sigma1.minus_projector());
    let p2 = r2.lift(&sigma2.minus_projector());
    let t1 = ((&i2 * p2).trace() - (&i1 * p1).trace()) / c(r * r);
    // -∂_r R restricted to the nonzero modes is K_r P_<
    let mut k = -dr_dr(model, r, sigma1)?;
    let k0 = model.kernel_offset();
    let kd = model.kernel_dim();
    k.view_mut((k0, k0), (kd, kd)).fill(linalg::ZERO);
    let diff = r1.lift(&(sigma2.matrix() - sigma1.matrix()));
    let t2 = (diff * i1 * k * i2).trace() / c(2.0 * r);
    for t in [t1, t2] {
        if t.im.abs() > 1e-9 * t.norm().max(1.0) {
            return Err(Error::Numeric(format!("complex trace {t}")));
        }
    }
    Ok((t1.re, t2.re))
}

/// `det(I + (1/2r) [R₂⁻¹]_{ker} (σ₂ - σ₁))`, which equals
/// `det R_{r,σ₁} / det R_{r,σ₂}`.
pub fn fredholm_ratio(r2: &DtnOperator, sigma1: &Involution, sigma2: &Involution) -> Result<f64> {
    if sigma1.l() != sigma2.l() || 2 * sigma2.l() != r2.kernel_block.nrows() {
        return Err(Error::Dimension("involutions do not match the kernel block".into()));
    }
    let k = r2.kernel_block.nrows();
    let m = linalg::identity(k) + r2.inverse_kernel_block()? * (sigma2.matrix() - sigma1.matrix()) * c(0.5 / r2.r);
    let eig = linalg::eigenvalues(&m).ok_or_else(|| Error::Numeric("eigenvalues did not converge".into()))?;
    if let Some(z) = eig.iter().find(|z| z.re <= 0.0 || z.im.abs() > 1e-8 * z.norm()) {
        return Err(Error::NonPositiveSpectrum(format!("eigenvalue {z} of I + T")));
    }
    let d = linalg::det(&m);
    if d.im.abs() > 1e-10 * d.norm() {
        return Err(Error::Numeric(format!("complex Fredholm determinant {d}")));
    }
    Ok(d.re)
}

/// `det R₁ / det R₂` from the assembled matrices.
pub fn direct_ratio(r1: &DtnOperator, r2: &DtnOperator) -> Result<f64> {
    Ok((r1.log_det()? - r2.log_det()?).exp())
}

/// Rejects `σ` when `ker(I - σ) ∩ ker(I - C(0)) ≠ {0}`, with `C(0) = τ` for
/// an APS far end. A Dirichlet far end needs no screening.
pub fn screen_invertibility(bulk: &BulkModel, sigma: &Involution) -> Result<()> {
    if let EndCondition::Aps(tau) = &bulk.far_bc {
        let d = tau.matrix() - sigma.matrix();
        if d.nrows() == 0 {
            return Ok(());
        }
        let smallest = d.singular_values().min();
        if smallest < INVERTIBILITY_THRESHOLD {
            return Err(Error::NotInvertible(format!(
                "C(0) - σ has singular value {smallest:e}"
            )));
        }
    }
    Ok(())
}

/// `det R_{r,σ₁} / det R_{r,σ₂}` via the Fredholm form, after screening.
pub fn theorem12_ratio(bulk: &BulkModel, r: f64, sigma1: &Involution, sigma2: &Involution) -> Result<f64> {
    screen_invertibility(bulk, sigma1)?;
    screen_invertibility(bulk, sigma2)?;
    let r2 = assemble_r(bulk, r, sigma2)?;
    fredholm_ratio(&r2, sigma1, sigma2)
}

/// Terms of the gluing identity
/// `glued = bulk + cylinder + constant + log_det_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BfkTerms {
    pub glued: f64,
    pub bulk: f64,
    pub cylinder: f64,
    pub constant: f64,
    pub log_det_r: f64,
    pub residual: f64,
}

pub fn bfk_check(bulk: &BulkModel, r: f64, sigma: &Involution) -> Result<BfkTerms> {
    let glued = logdet_cylinder(&bulk.glued_problem(r, sigma)?)?.value;
    let split = logdet_cylinder(&bulk.split_problem()?)?.value;
    let cyl = CylinderProblem::new(bulk.model.clone(), r, EndCondition::Dirichlet, EndCondition::Aps(sigma.clone()))?;
    let cylinder = logdet_cylinder(&cyl)?.value;
    let n = crate::zeta::zeta_b2_at_zero(&bulk.model) + bulk.model.kernel_dim();
    let constant = -LN_2 * n as f64;
    let log_det_r = assemble_r(bulk, r, sigma)?.log_det()?;
    let residual = glued - linalg::compensated_sum([split, cylinder, constant, log_det_r]);
    Ok(BfkTerms {
        glued,
        bulk: split,
        cylinder,
        constant,
        log_det_r,
        residual,
    })
}
