//! Exact spectra of `-∂_u² + B²` on `[0, r] × Y`.
//!
//! Each boundary condition is reduced to scalar endpoint conditions mode by
//! mode. At either end an APS condition keeps the spectral half whose
//! eigenvalues are negative with respect to the outward normal, so with `λ`
//! the `B`-eigenvalue of a mode:
//!
//! | end       | `λ > 0`               | `λ < 0`                | kernel                          |
//! |-----------|-----------------------|------------------------|---------------------------------|
//! | `u = 0`   | `y = 0`               | `-y' + |λ| y = 0`      | `σ = -1`: `y = 0`, `σ = +1`: `y' = 0` |
//! | `u = r`   | `y' + |λ| y = 0`      | `y = 0`                | same                            |
//!
//! A Dirichlet end is `y = 0` for every mode. Two APS ends couple the kernel
//! components; the eigenvalues are then `((α_j/2 + kπ)/r)²` and
//! `((π - α_j/2 + kπ)/r)²`, where `e^{iα_j}` are the eigenvalues of
//! `U_R^* U_L` and `U_L, U_R` are the unitary parts of the two involutions.

pub mod fd;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{ApsProjector, BoundaryModel, Involution, Side};
use crate::roots::bracketed_root;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

pub const DEFAULT_TRUNCATION: usize = 200;
const ROOT_TOL: f64 = 1e-15;

#[derive(Debug, Clone)]
pub enum EndCondition {
    Dirichlet,
    Aps(Involution),
}

#[derive(Debug, Clone)]
pub struct CylinderProblem {
    model: Arc<BoundaryModel>,
    length: f64,
    left: EndCondition,
    right: EndCondition,
}

/// Scalar endpoint condition for one mode. `Robin(k)` means
/// `∂_n y + k y = 0` with `∂_n` the outward derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "coefficient", rename_all = "snake_case")]
pub enum ScalarBc {
    Dirichlet,
    Neumann,
    Robin(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeLabel {
    Nonzero { eigenvalue: f64 },
    Kernel,
}

/// Scalar two-point problem for one mode (or `multiplicity` identical ones).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarMode {
    pub label: ModeLabel,
    pub mass: f64,
    pub left: ScalarBc,
    pub right: ScalarBc,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SpectrumFamily {
    /// `mass_sq + ((offset + kπ)/r)²`, `k ≥ 0`, each with `multiplicity`.
    Arithmetic {
        offset: f64,
        r: f64,
        mass_sq: f64,
        multiplicity: usize,
        label: ModeLabel,
    },
    /// `λ² + ν_j²` with `ν_j cos(ν_j r) + λ sin(ν_j r) = 0`, `λ > 0`.
    Roots {
        lambda: f64,
        r: f64,
        roots: Vec<f64>,
        multiplicity: usize,
        label: ModeLabel,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub families: Vec<SpectrumFamily>,
    pub truncation: usize,
}

impl CylinderProblem {
    pub fn new(model: Arc<BoundaryModel>, length: f64, left: EndCondition, right: EndCondition) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::NonPositiveLength(length));
        }
        for end in [&left, &right] {
            if let EndCondition::Aps(s) = end {
                if s.l() != model.half_kernel_dim() {
                    return Err(Error::Dimension(format!(
                        "involution acts on C^{} but dim ker B = {}",
                        2 * s.l(),
                        model.kernel_dim()
                    )));
                }
            }
        }
        Ok(Self {
            model,
            length,
            left,
            right,
        })
    }

    pub fn model(&self) -> &BoundaryModel {
        &self.model
    }

    pub fn model_arc(&self) -> &Arc<BoundaryModel> {
        &self.model
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn left(&self) -> &EndCondition {
        &self.left
    }

    pub fn right(&self) -> &EndCondition {
        &self.right
    }

    pub fn with_right(&self, right: EndCondition) -> Result<Self> {
        Self::new(self.model.clone(), self.length, self.left.clone(), right)
    }

    /// Full-space APS projector at one end, if that end is APS.
    pub fn projector(&self, side: Side) -> Option<ApsProjector> {
        let end = match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        };
        match end {
            EndCondition::Dirichlet => None,
            EndCondition::Aps(s) => Some(ApsProjector::new(side, s.clone())),
        }
    }

    /// Scalar problems for the nonzero modes, in mode-coordinate order.
    pub fn nonzero_modes(&self) -> Vec<ScalarMode> {
        self.model
            .modes()
            .into_iter()
            .filter(|m| m.eigenvalue != 0.0)
            .map(|m| {
                let lam = m.eigenvalue;
                let a = lam.abs();
                let left = match (&self.left, lam > 0.0) {
                    (EndCondition::Aps(_), false) => ScalarBc::Robin(a),
                    _ => ScalarBc::Dirichlet,
                };
                let right = match (&self.right, lam > 0.0) {
                    (EndCondition::Aps(_), true) => ScalarBc::Robin(a),
                    _ => ScalarBc::Dirichlet,
                };
                ScalarMode {
                    label: ModeLabel::Nonzero { eigenvalue: lam },
                    mass: a,
                    left,
                    right,
                    multiplicity: 1,
                }
            })
            .collect()
    }

    /// Kernel spectrum as a list of `(offset, multiplicity)` pairs for the
    /// arithmetic families `((offset + kπ)/r)²`.
    pub fn kernel_offsets(&self) -> Result<Vec<(f64, usize)>> {
        let l = self.model.half_kernel_dim();
        if l == 0 {
            return Ok(Vec::new());
        }
        Ok(match (&self.left, &self.right) {
            (EndCondition::Dirichlet, EndCondition::Dirichlet) => vec![(PI, 2 * l)],
            (EndCondition::Dirichlet, EndCondition::Aps(_)) | (EndCondition::Aps(_), EndCondition::Dirichlet) => {
                vec![(PI, l), (FRAC_PI_2, l)]
            }
            (EndCondition::Aps(sl), EndCondition::Aps(sr)) => {
                let mut out = Vec::with_capacity(2 * l);
                for alpha in kernel_phases(sl, sr) {
                    if alpha < 1e-10 {
                        return Err(Error::NotInvertible(
                            "ker(I - σ_L) ∩ ker(I - σ_R) is nontrivial: constant kernel solution".into(),
                        ));
                    }
                    out.push((0.5 * alpha, 1));
                    out.push((PI - 0.5 * alpha, 1));
                }
                out
            }
        })
    }

    /// Scalar two-point problems for every mode that reduces to one. With two
    /// APS ends the kernel modes are coupled and excluded here.
    pub fn scalar_modes(&self) -> Vec<ScalarMode> {
        let mut out = self.nonzero_modes();
        let l = self.model.half_kernel_dim();
        if l == 0 {
            return out;
        }
        let kernel = |left, right, multiplicity| ScalarMode {
            label: ModeLabel::Kernel,
            mass: 0.0,
            left,
            right,
            multiplicity,
        };
        use ScalarBc::{Dirichlet as D, Neumann as N};
        match (&self.left, &self.right) {
            (EndCondition::Dirichlet, EndCondition::Dirichlet) => out.push(kernel(D, D, 2 * l)),
            (EndCondition::Dirichlet, EndCondition::Aps(_)) => {
                out.push(kernel(D, D, l));
                out.push(kernel(D, N, l));
            }
            (EndCondition::Aps(_), EndCondition::Dirichlet) => {
                out.push(kernel(D, D, l));
                out.push(kernel(N, D, l));
            }
            (EndCondition::Aps(_), EndCondition::Aps(_)) => {}
        }
        out
    }
}

/// Eigenphases `α_j ∈ [0, π]` of `U_R^* U_L`, ascending.
pub fn kernel_phases(left: &Involution, right: &Involution) -> Vec<f64> {
    let w = right.unitary_part().adjoint() * left.unitary_part();
    let mut out: Vec<f64> = match linalg::eigenvalues(&w) {
        Some(ev) => ev.iter().map(|z| z.arg().abs()).collect(),
        None => {
            // only cos α enters the spectrum, so the Hermitian part suffices
            let herm = (&w + w.adjoint()).map(|z| z * 0.5);
            linalg::hermitian_eigen(&herm).0.iter().map(|c| c.clamp(-1.0, 1.0).acos()).collect()
        }
    };
    out.sort_by(f64::total_cmp);
    out
}

/// First `k` roots `ν_j` of `ν cos(νr) + λ sin(νr) = 0`, one per bracket
/// `((j - 1/2)π/r, jπ/r)`.
pub fn mixed_mode_nu(lambda: f64, r: f64, k: usize) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveArgument(lambda));
    }
    if !(r > 0.0) {
        return Err(Error::NonPositiveLength(r));
    }
    let lr = lambda * r;
    (1..=k)
        .map(|j| {
            let lo = (j as f64 - 0.5) * PI;
            let hi = j as f64 * PI;
            // x = ν r; the endpoints have exact signs, the interior is smooth
            let x = bracketed_root(|x| x * x.cos() + lr * x.sin(), lo, hi, ROOT_TOL)?;
            Ok(x / r)
        })
        .collect()
}

/// Eigenvalues `μ_j = λ² + ν_j²` of the Dirichlet-Robin mode.
pub fn mixed_mode_roots(lambda: f64, r: f64, k: usize) -> Result<Vec<f64>> {
    Ok(mixed_mode_nu(lambda, r, k)?
        .into_iter()
        .map(|nu| lambda * lambda + nu * nu)
        .collect())
}

fn scalar_family(mode: &ScalarMode, r: f64, k: usize) -> Result<SpectrumFamily> {
    use ScalarBc::*;
    let arithmetic = |offset| SpectrumFamily::Arithmetic {
        offset,
        r,
        mass_sq: mode.mass * mode.mass,
        multiplicity: mode.multiplicity,
        label: mode.label,
    };
    match (mode.left, mode.right) {
        (Dirichlet, Dirichlet) => Ok(arithmetic(PI)),
        (Dirichlet, Neumann) | (Neumann, Dirichlet) => Ok(arithmetic(FRAC_PI_2)),
        (Dirichlet, Robin(a)) | (Robin(a), Dirichlet) if a == mode.mass && a > 0.0 => Ok(SpectrumFamily::Roots {
            lambda: a,
            r,
            roots: mixed_mode_roots(a, r, k)?,
            multiplicity: mode.multiplicity,
            label: mode.label,
        }),
        _ => Err(Error::UnsolvableMode(format!(
            "no closed-form spectrum for {:?}-{:?} with mass {}",
            mode.left, mode.right, mode.mass
        ))),
    }
}

/// All spectral families of the problem, truncated at `k` per root family.
pub fn cylinder_spectrum(problem: &CylinderProblem, k: usize) -> Result<Spectrum> {
    let r = problem.length;
    let mut families: Vec<SpectrumFamily> = problem
        .scalar_modes()
        .iter()
        .map(|m| scalar_family(m, r, k))
        .collect::<Result<_>>()?;
    if let (EndCondition::Aps(_), EndCondition::Aps(_)) = (&problem.left, &problem.right) {
        for (offset, multiplicity) in problem.kernel_offsets()? {
            families.push(SpectrumFamily::Arithmetic {
                offset,
                r,
                mass_sq: 0.0,
                multiplicity,
                label: ModeLabel::Kernel,
            });
        }
    }
    Ok(Spectrum {
        families,
        truncation: k,
    })
}

/// Spectrum with a Dirichlet condition at `u = 0` and APS at `u = r`.
pub fn dirichlet_aps_spectrum(problem: &CylinderProblem, k: usize) -> Result<Spectrum> {
    match (&problem.left, &problem.right) {
        (EndCondition::Dirichlet, EndCondition::Aps(_)) => cylinder_spectrum(problem, k),
        _ => Err(Error::Dimension("expected Dirichlet at u = 0 and APS at u = r".into())),
    }
}

/// Recover `θ` from a block-diagonal `σ_θ`, or fail with
/// `WrongInvolutionShape`.
pub fn sigma_theta_angles(s: &Involution) -> Result<Vec<f64>> {
    let m = s.matrix();
    let l = s.l();
    let tol = 1e-10;
    let mut theta = Vec::with_capacity(l);
    for i in 0..l {
        for j in 0..2 * l {
            for k in 0..2 * l {
                if j / 2 != k / 2 && m[(j, k)].norm() > tol {
                    return Err(Error::WrongInvolutionShape(format!("entry ({j}, {k}) couples two blocks")));
                }
            }
        }
        let b = m.view((2 * i, 2 * i), (2, 2));
        let (c2, s2) = (b[(0, 0)], b[(1, 0)]);
        if c2.im.abs() > tol || s2.im.abs() > tol || (b[(0, 1)] - s2).norm() > tol || (b[(1, 1)] + c2).norm() > tol {
            return Err(Error::WrongInvolutionShape(format!("block {i} is not [[c, s], [s, -c]]")));
        }
        let t = 0.5 * s2.re.atan2(c2.re);
        if !(t > 0.0 && t < FRAC_PI_2) {
            return Err(Error::WrongInvolutionShape(format!("block {i} has angle {t} outside (0, π/2)")));
        }
        theta.push(t);
    }
    Ok(theta)
}

/// Spectrum with `APS(τ)` at `u = 0` and `APS(σ_θ)` at `u = r`.
pub fn tau_aps_spectrum(problem: &CylinderProblem, k: usize) -> Result<Spectrum> {
    match (&problem.left, &problem.right) {
        (EndCondition::Aps(_), EndCondition::Aps(right)) => {
            let theta = sigma_theta_angles(right)?;
            let mut spec = cylinder_spectrum(problem, k)?;
            // report the kernel families in (θ_i, π - θ_i) order
            spec.families.retain(|f| !matches!(f, SpectrumFamily::Arithmetic { label: ModeLabel::Kernel, .. }));
            for t in theta {
                for offset in [t, PI - t] {
                    spec.families.push(SpectrumFamily::Arithmetic {
                        offset,
                        r: problem.length,
                        mass_sq: 0.0,
                        multiplicity: 1,
                        label: ModeLabel::Kernel,
                    });
                }
            }
            Ok(spec)
        }
        _ => Err(Error::Dimension("expected APS conditions at both ends".into())),
    }
}

impl SpectrumFamily {
    pub fn multiplicity(&self) -> usize {
        match self {
            Self::Arithmetic { multiplicity, .. } | Self::Roots { multiplicity, .. } => *multiplicity,
        }
    }

    /// `k`-th eigenvalue (0-based) without multiplicity.
    pub fn eigenvalue(&self, k: usize) -> Option<f64> {
        match self {
            Self::Arithmetic { offset, r, mass_sq, .. } => {
                let x = (offset + k as f64 * PI) / r;
                Some(mass_sq + x * x)
            }
            Self::Roots { roots, .. } => roots.get(k).copied(),
        }
    }

    /// First `count` distinct eigenvalues.
    pub fn leading(&self, count: usize) -> Vec<f64> {
        (0..count).map_while(|k| self.eigenvalue(k)).collect()
    }
}

impl Spectrum {
    /// Lowest `count` eigenvalues with multiplicity, merged over families.
    pub fn lowest(&self, count: usize) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .families
            .iter()
            .flat_map(|f| {
                let m = f.multiplicity();
                f.leading(count).into_iter().flat_map(move |v| std::iter::repeat_n(v, m))
            })
            .collect();
        all.sort_by(f64::total_cmp);
        all.truncate(count);
        all
    }

    pub fn kernel_families(&self) -> impl Iterator<Item = &SpectrumFamily> {
        self.families.iter().filter(|f| {
            matches!(
                f,
                SpectrumFamily::Arithmetic { label: ModeLabel::Kernel, .. } | SpectrumFamily::Roots { label: ModeLabel::Kernel, .. }
            )
        })
    }
}
