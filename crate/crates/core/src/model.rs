//! Finite-rank boundary models `(B, G)` and unitary involutions on `ker B`.
//!
//! A model is a Hermitian `B` together with a Clifford map `G` satisfying
//! `G* = -G`, `G^2 = -I` and `GB = -BG`. Everything downstream works in
//! *mode coordinates*: the columns of [`BoundaryModel::frame`] are the
//! positive eigenvectors `phi_j` (ascending eigenvalue), then their partners
//! `G phi_j`, then the kernel basis `{f_1, G f_1, ..., f_l, G f_l}`.
//! Matrices on `ker B` (involutions, scattering matrices) are always written
//! in that kernel basis, so `G` restricted to `ker B` is the fixed block
//! matrix `[[0, -1], [1, 0]]` repeated `l` times.

use crate::error::{Error, Result};
use crate::linalg::{self, c, C64, CMatrix, CVector, I, ONE, ZERO};
use std::f64::consts::FRAC_PI_2;

pub const DEFAULT_TOL: f64 = 1e-12;
/// Singular values below this fraction of `|B|` count as kernel.
pub const KERNEL_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PositiveMode {
    pub mu: f64,
    pub phi: CVector,
}

#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub positive_modes: Vec<PositiveMode>,
    /// `G phi_j`, in the same order as `positive_modes`.
    pub negative_modes: Vec<CVector>,
    /// `{f_1, G f_1, ..., f_l, G f_l}`.
    pub kernel_basis: Vec<CVector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Positive(usize),
    Negative(usize),
    Kernel(usize),
}

/// One column of the mode frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub kind: ModeKind,
    pub eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct BoundaryModel {
    b: CMatrix,
    g: CMatrix,
    basis: ModeBasis,
    frame: CMatrix,
    tol: f64,
}

fn check(relation: &'static str, residual: f64, tolerance: f64) -> Result<()> {
    if residual <= tolerance {
        Ok(())
    } else {
        Err(Error::SymmetryViolation {
            relation,
            residual,
            tolerance,
        })
    }
}

/// `G` on `ker B` in the kernel basis.
pub fn g_kernel(l: usize) -> CMatrix {
    let block = linalg::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    linalg::block_diag(&vec![block; l])
}

/// Orthonormal basis of `ker(G - i)` inside `ker B`, as a `2l x l` matrix in
/// kernel coordinates.
pub fn v_plus(l: usize) -> CMatrix {
    let s = 1.0 / 2f64.sqrt();
    let mut m = CMatrix::zeros(2 * l, l);
    for i in 0..l {
        m[(2 * i, i)] = c(s);
        m[(2 * i + 1, i)] = -I * s;
    }
    m
}

/// Orthonormal basis of `ker(G + i)` inside `ker B`.
pub fn v_minus(l: usize) -> CMatrix {
    v_plus(l).map(|z| z.conj())
}

pub fn build_model(b: CMatrix, g: CMatrix) -> Result<BoundaryModel> {
    build_model_with_tol(b, g, DEFAULT_TOL)
}

pub fn build_model_with_tol(b: CMatrix, g: CMatrix, tol: f64) -> Result<BoundaryModel> {
    let n = b.nrows();
    if n == 0 || b.ncols() != n || g.nrows() != n || g.ncols() != n {
        return Err(Error::Dimension(format!(
            "B is {}x{}, G is {}x{}",
            b.nrows(),
            b.ncols(),
            g.nrows(),
            g.ncols()
        )));
    }
    let id = linalg::identity(n);
    let b_scale = linalg::norm(&b).max(1.0);
    check("B* = B", linalg::norm(&(&b - b.adjoint())) / b_scale, tol)?;
    check("G* = -G", linalg::norm(&(&g + g.adjoint())), tol)?;
    check("G^2 = -I", linalg::norm(&(&g * &g + &id)), tol)?;
    check("G*G = I", linalg::norm(&(g.adjoint() * &g - &id)), tol)?;
    check("GB = -BG", linalg::norm(&(&g * &b + &b * &g)) / b_scale, tol)?;

    let (vals, vecs) = linalg::hermitian_eigen(&b);
    let spectral_norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = KERNEL_THRESHOLD * spectral_norm.max(f64::MIN_POSITIVE);

    let kernel_cols: Vec<CVector> = vals
        .iter()
        .zip(vecs.column_iter())
        .filter(|(v, _)| v.abs() <= cut)
        .map(|(_, col)| col.into_owned())
        .collect();
    let dim_ker = kernel_cols.len();
    if dim_ker % 2 == 1 {
        return Err(Error::OddKernel(dim_ker));
    }

    // positive eigenspaces, clustered so that degenerate eigenvalues get a
    // canonical basis instead of whatever the eigen-solver returned
    let positive: Vec<(f64, CVector)> = vals
        .iter()
        .zip(vecs.column_iter())
        .filter(|(v, _)| **v > cut)
        .map(|(v, col)| (*v, col.into_owned()))
        .collect();
    let mut positive_modes = Vec::new();
    let mut start = 0;
    while start < positive.len() {
        let mut end = start + 1;
        while end < positive.len()
            && (positive[end].0 - positive[start].0).abs() <= 1e-9 * positive[start].0.max(1.0)
        {
            end += 1;
        }
        let cols: Vec<CVector> = positive[start..end].iter().map(|(_, v)| v.clone()).collect();
        let proj = linalg::projector(&cols, n);
        for phi in linalg::canonical_basis(&proj, cols.len()) {
            let mu = (phi.adjoint() * &b * &phi)[(0, 0)].re;
            positive_modes.push(PositiveMode { mu, phi });
        }
        start = end;
    }
    let negative_modes: Vec<CVector> = positive_modes.iter().map(|m| &g * &m.phi).collect();

    let kernel_basis = if dim_ker == 0 {
        Vec::new()
    } else {
        let proj = linalg::projector(&kernel_cols, n);
        let half = CMatrix::from_fn(n, n, |i, j| if i == j { c(0.5) } else { ZERO });
        let p_plus = &proj * (&half - &g * (I * 0.5));
        let p_minus = &proj * (&half + &g * (I * 0.5));
        let plus = linalg::canonical_basis(&p_plus, dim_ker);
        let minus = linalg::canonical_basis(&p_minus, dim_ker);
        if plus.len() != minus.len() || plus.len() * 2 != dim_ker {
            return Err(Error::KernelImbalance {
                plus: plus.len(),
                minus: minus.len(),
            });
        }
        let s = c(1.0 / 2f64.sqrt());
        let mut basis = Vec::with_capacity(dim_ker);
        for (v, w) in plus.iter().zip(&minus) {
            let f = (v + w) * s;
            let gf = &g * &f;
            basis.push(f);
            basis.push(gf);
        }
        basis
    };

    let mut cols: Vec<CVector> = positive_modes.iter().map(|m| m.phi.clone()).collect();
    cols.extend(negative_modes.iter().cloned());
    cols.extend(kernel_basis.iter().cloned());
    if cols.len() != n {
        return Err(Error::Numeric(format!(
            "mode basis has {} vectors for dimension {n}",
            cols.len()
        )));
    }
    let frame = linalg::columns_to_matrix(&cols, n);
    let model = BoundaryModel {
        b,
        g,
        basis: ModeBasis {
            positive_modes,
            negative_modes,
            kernel_basis,
        },
        frame,
        tol,
    };
    model.check_mode_basis()?;
    Ok(model)
}

/// Block model: `l` kernel blocks with `B = 0`, then one block
/// `diag(mu, -mu)` per positive eigenvalue; `G` is `[[0, -1], [1, 0]]` on
/// every block.
pub fn canonical_model(l: usize, positive_eigs: &[f64]) -> Result<BoundaryModel> {
    for &mu in positive_eigs {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::NonPositiveEigenvalue(mu));
        }
    }
    if l == 0 && positive_eigs.is_empty() {
        return Err(Error::Dimension("model must have at least one block".into()));
    }
    let g_block = linalg::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let mut b_blocks = vec![CMatrix::zeros(2, 2); l];
    b_blocks.extend(
        positive_eigs
            .iter()
            .map(|&mu| linalg::from_real(2, 2, &[mu, 0.0, 0.0, -mu])),
    );
    let g_blocks = vec![g_block; b_blocks.len()];
    build_model(linalg::block_diag(&b_blocks), linalg::block_diag(&g_blocks))
}

impl BoundaryModel {
    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn g(&self) -> &CMatrix {
        &self.g
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn mode_basis(&self) -> &ModeBasis {
        &self.basis
    }

    /// Unitary whose columns are the mode vectors.
    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    pub fn kernel_dim(&self) -> usize {
        self.basis.kernel_basis.len()
    }

    /// `l = dim ker B / 2`.
    pub fn half_kernel_dim(&self) -> usize {
        self.kernel_dim() / 2
    }

    pub fn positive_count(&self) -> usize {
        self.basis.positive_modes.len()
    }

    pub fn nonzero_count(&self) -> usize {
        2 * self.positive_count()
    }

    /// Index of the first kernel column in mode coordinates.
    pub fn kernel_offset(&self) -> usize {
        self.nonzero_count()
    }

    pub fn positive_eigenvalues(&self) -> Vec<f64> {
        self.basis.positive_modes.iter().map(|m| m.mu).collect()
    }

    pub fn smallest_positive(&self) -> Option<f64> {
        self.basis.positive_modes.iter().map(|m| m.mu).reduce(f64::min)
    }

    /// Modes in mode-coordinate order.
    pub fn modes(&self) -> Vec<Mode> {
        let p = self.positive_count();
        let mut out = Vec::with_capacity(self.dim());
        for (j, m) in self.basis.positive_modes.iter().enumerate() {
            out.push(Mode {
                kind: ModeKind::Positive(j),
                eigenvalue: m.mu,
            });
        }
        for (j, m) in self.basis.positive_modes.iter().enumerate() {
            out.push(Mode {
                kind: ModeKind::Negative(j),
                eigenvalue: -m.mu,
            });
        }
        for i in 0..self.kernel_dim() {
            out.push(Mode {
                kind: ModeKind::Kernel(i),
                eigenvalue: 0.0,
            });
        }
        debug_assert_eq!(out.len(), 2 * p + self.kernel_dim());
        out
    }

    /// Kernel basis as an `n x 2l` matrix.
    pub fn kernel_frame(&self) -> CMatrix {
        linalg::columns_to_matrix(&self.basis.kernel_basis, self.dim())
    }

    /// Lift a `2l x 2l` kernel-coordinate matrix to the full space
    /// (original coordinates), acting as zero off `ker B`.
    pub fn lift_kernel(&self, m: &CMatrix) -> CMatrix {
        let k = self.kernel_frame();
        &k * m * k.adjoint()
    }

    /// Spectral projector onto the span of eigenvectors with negative (`P_<`)
    /// or positive (`P_>`) eigenvalue.
    pub fn spectral_projector(&self, half: SpectralHalf) -> CMatrix {
        let cols: Vec<CVector> = match half {
            SpectralHalf::Negative => self.basis.negative_modes.clone(),
            SpectralHalf::Positive => self.basis.positive_modes.iter().map(|m| m.phi.clone()).collect(),
        };
        linalg::projector(&cols, self.dim())
    }

    fn check_mode_basis(&self) -> Result<()> {
        let n = self.dim();
        let tol = 1e-10 * linalg::norm(&self.b).max(1.0);
        for m in &self.basis.positive_modes {
            let r = linalg::vnorm(&(&self.b * &m.phi - &m.phi * c(m.mu)));
            check("B phi = mu phi", r, tol)?;
        }
        for (m, neg) in self.basis.positive_modes.iter().zip(&self.basis.negative_modes) {
            let r = linalg::vnorm(&(&self.b * neg + neg * c(m.mu)));
            check("B G phi = -mu G phi", r, tol)?;
        }
        for f in &self.basis.kernel_basis {
            check("B f = 0", linalg::vnorm(&(&self.b * f)), tol)?;
        }
        let gram = self.frame.adjoint() * &self.frame;
        check(
            "mode basis orthonormal",
            linalg::norm(&(gram - linalg::identity(n))),
            1e-10,
        )
    }
}

/// Which half of the nonzero spectrum of `B` an APS projector keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralHalf {
    /// `P_<`
    Negative,
    /// `P_>`
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `u = 0` end of `[0, r]`; the outward normal is `-d/du`.
    Left,
    /// `u = r` end; the outward normal is `+d/du`.
    Right,
}

/// Unitary involution on `ker B` anticommuting with `G`, in kernel
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Involution {
    sigma: CMatrix,
}

impl Involution {
    pub fn new(sigma: CMatrix) -> Result<Self> {
        Self::with_tol(sigma, DEFAULT_TOL)
    }

    pub fn with_tol(sigma: CMatrix, tol: f64) -> Result<Self> {
        let n = sigma.nrows();
        if sigma.ncols() != n || n % 2 == 1 {
            return Err(Error::Dimension(format!(
                "involution must be 2l x 2l, got {}x{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        let id = linalg::identity(n);
        let g = g_kernel(n / 2);
        let checks = [
            ("sigma^2 = I", linalg::norm(&(&sigma * &sigma - &id))),
            ("sigma* = sigma", linalg::norm(&(&sigma - sigma.adjoint()))),
            ("sigma*sigma = I", linalg::norm(&(sigma.adjoint() * &sigma - &id))),
            ("sigma G = -G sigma", linalg::norm(&(&sigma * &g + &g * &sigma))),
        ];
        for (relation, residual) in checks {
            if residual > tol {
                return Err(Error::InvalidInvolution { relation, residual });
            }
        }
        Ok(Self { sigma })
    }

    /// Build `sigma` from the unitary `U : ker(G - i) -> ker(G + i)` it
    /// restricts to; every anticommuting involution arises this way.
    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        let l = u.nrows();
        let vp = v_plus(l);
        let vm = v_minus(l);
        let sigma = &vm * u * vp.adjoint() + &vp * u.adjoint() * vm.adjoint();
        Self::new(sigma)
    }

    /// The involution on a zero-dimensional kernel, for models with
    /// `ker B = 0` where APS reduces to the spectral projector.
    pub fn empty() -> Self {
        Self {
            sigma: CMatrix::zeros(0, 0),
        }
    }

    pub fn random<R: rand::Rng + ?Sized>(l: usize, rng: &mut R) -> Self {
        Self::from_unitary(&linalg::random_unitary(l, rng)).expect("random unitary yields an involution")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.sigma
    }

    pub fn l(&self) -> usize {
        self.sigma.nrows() / 2
    }

    /// The unitary `U = V_-^* sigma V_+`.
    pub fn unitary_part(&self) -> CMatrix {
        let l = self.l();
        v_minus(l).adjoint() * &self.sigma * v_plus(l)
    }

    /// `(I + sigma) / 2`, the projector onto `ker(I - sigma)`.
    pub fn plus_projector(&self) -> CMatrix {
        (linalg::identity(self.sigma.nrows()) + &self.sigma).map(|z| z * 0.5)
    }

    /// `(I - sigma) / 2`, the projector onto `ker(I + sigma)`.
    pub fn minus_projector(&self) -> CMatrix {
        (linalg::identity(self.sigma.nrows()) - &self.sigma).map(|z| z * 0.5)
    }

    pub fn neg(&self) -> Self {
        Self {
            sigma: -self.sigma.clone(),
        }
    }
}

fn require_kernel(model: &BoundaryModel) -> Result<usize> {
    match model.half_kernel_dim() {
        0 => Err(Error::EmptyKernel),
        l => Ok(l),
    }
}

/// `tau(f_i) = f_i`, `tau(G f_i) = -G f_i`.
pub fn make_tau(model: &BoundaryModel) -> Result<Involution> {
    let l = require_kernel(model)?;
    tau_matrix(l)
}

pub fn tau_matrix(l: usize) -> Result<Involution> {
    let e = linalg::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    Involution::new(linalg::block_diag(&vec![e; l]))
}

/// `sigma_theta` fixes `cos(theta_i) f_i + sin(theta_i) G f_i` and negates
/// its `G`-image.
pub fn make_sigma_theta(model: &BoundaryModel, theta: &[f64]) -> Result<Involution> {
    let l = require_kernel(model)?;
    if theta.len() != l {
        return Err(Error::AngleCount {
            expected: l,
            got: theta.len(),
        });
    }
    sigma_theta_matrix(theta)
}

pub fn sigma_theta_matrix(theta: &[f64]) -> Result<Involution> {
    if theta.is_empty() {
        return Err(Error::EmptyKernel);
    }
    let blocks: Vec<CMatrix> = theta
        .iter()
        .map(|&t| {
            if !(t > 0.0 && t < FRAC_PI_2) {
                return Err(Error::AngleOutOfRange(t));
            }
            let (s, c2) = (2.0 * t).sin_cos();
            Ok(linalg::from_real(2, 2, &[c2, s, s, -c2]))
        })
        .collect::<Result<_>>()?;
    Involution::new(linalg::block_diag(&blocks))
}

/// Determinant of `u` restricted to `ker(G - i)` inside `ker B`.
pub fn det_on_ker_g_minus_i(model: &BoundaryModel, u: &CMatrix) -> Result<C64> {
    let l = require_kernel(model)?;
    if u.nrows() != 2 * l || u.ncols() != 2 * l {
        return Err(Error::Dimension(format!("expected {0}x{0} matrix on ker B", 2 * l)));
    }
    let g = g_kernel(l);
    let comm = linalg::norm(&(u * &g - &g * u));
    if comm > 1e-10 {
        return Err(Error::NotGCommuting(comm));
    }
    let vp = v_plus(l);
    Ok(linalg::det(&(vp.adjoint() * u * vp)))
}

/// APS boundary projector `P_half + (I - sigma)/2` at one end of a cylinder.
#[derive(Debug, Clone)]
pub struct ApsProjector {
    pub side: Side,
    pub involution: Involution,
    pub sign_convention: SpectralHalf,
}

impl ApsProjector {
    /// Projector with the orientation used throughout the crate: `P_<` at
    /// the right end, `P_>` at the left end (both are `P_<` with respect to
    /// the outward normal).
    pub fn new(side: Side, involution: Involution) -> Self {
        let sign_convention = match side {
            Side::Right => SpectralHalf::Negative,
            Side::Left => SpectralHalf::Positive,
        };
        Self {
            side,
            involution,
            sign_convention,
        }
    }

    /// Full `n x n` projector in original coordinates.
    pub fn matrix(&self, model: &BoundaryModel) -> CMatrix {
        model.spectral_projector(self.sign_convention) + model.lift_kernel(&self.involution.minus_projector())
    }
}

impl PartialEq for ApsProjector {
    fn eq(&self, other: &Self) -> bool {
        self.side == other.side
            && self.sign_convention == other.sign_convention
            && self.involution == other.involution
    }
}

// Silence the unused-constant lint for ONE when only used in tests.
#[allow(dead_code)]
const _UNIT: C64 = ONE;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

    fn g2() -> CMatrix {
        linalg::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0])
    }

    #[test]
    fn smallest_nonkernel_model() {
        let b = linalg::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let m = build_model(b, g2()).unwrap();
        assert_eq!(m.half_kernel_dim(), 0);
        assert_eq!(m.positive_eigenvalues(), vec![1.0]);
    }

    #[test]
    fn zero_b_is_all_kernel() {
        let m = build_model(CMatrix::zeros(2, 2), g2()).unwrap();
        assert_eq!(m.half_kernel_dim(), 1);
    }

    #[test]
    fn commuting_b_is_rejected() {
        let b = linalg::from_real(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        match build_model(b, g2()) {
            Err(Error::SymmetryViolation { relation, residual, .. }) => {
                assert_eq!(relation, "GB = -BG");
                assert!(residual > 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn odd_kernel_is_rejected() {
        // G = i on a line: all relations hold but ker B is one-dimensional
        let g = CMatrix::from_element(1, 1, I);
        assert_eq!(build_model(CMatrix::zeros(1, 1), g).err(), Some(Error::OddKernel(1)));
    }

    #[test]
    fn unbalanced_kernel_is_rejected() {
        let g = CMatrix::from_diagonal(&CVector::from_vec(vec![I, I]));
        assert!(matches!(
            build_model(CMatrix::zeros(2, 2), g),
            Err(Error::KernelImbalance { plus: 2, minus: 0 })
        ));
    }

    #[test]
    fn canonical_model_shapes() {
        let m = canonical_model(1, &[]).unwrap();
        assert_eq!((m.dim(), m.half_kernel_dim()), (2, 1));
        let m = canonical_model(0, &[1.0]).unwrap();
        assert_eq!(m.dim(), 2);
        let eigs: Vec<f64> = m.modes().iter().map(|x| x.eigenvalue).collect();
        assert_eq!(eigs, vec![1.0, -1.0]);
        let m = canonical_model(2, &[0.5, 2.0]).unwrap();
        assert_eq!((m.dim(), m.half_kernel_dim()), (8, 2));
        assert!(matches!(canonical_model(1, &[0.0]), Err(Error::NonPositiveEigenvalue(_))));
    }

    #[test]
    fn canonical_kernel_basis_is_standard() {
        let m = canonical_model(2, &[1.0]).unwrap();
        let k = m.kernel_frame();
        let mut expect = CMatrix::zeros(6, 4);
        for i in 0..4 {
            expect[(i, i)] = ONE;
        }
        assert!(linalg::norm(&(k - expect)) < 1e-14);
    }

    #[test]
    fn degenerate_eigenvalues_get_paired_negative_modes() {
        let m = canonical_model(1, &[1.5, 1.5, 0.7]).unwrap();
        assert_eq!(m.positive_eigenvalues().len(), 3);
        let b = m.b();
        for (pm, neg) in m.mode_basis().positive_modes.iter().zip(&m.mode_basis().negative_modes) {
            assert!(linalg::vnorm(&(b * neg + neg * c(pm.mu))) < 1e-12);
            assert!(linalg::vnorm(&(m.g() * &pm.phi - neg)) == 0.0);
        }
    }

    #[test]
    fn tau_matches_block_display() {
        let m = canonical_model(1, &[]).unwrap();
        let tau = make_tau(&m).unwrap();
        assert_eq!(tau.matrix(), &linalg::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        let m2 = canonical_model(2, &[]).unwrap();
        let tau2 = make_tau(&m2).unwrap();
        let e = linalg::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(tau2.matrix(), &linalg::block_diag(&[e.clone(), e]));
        let m0 = canonical_model(0, &[1.0]).unwrap();
        assert_eq!(make_tau(&m0), Err(Error::EmptyKernel));
    }

    #[test]
    fn sigma_theta_values() {
        let m = canonical_model(1, &[]).unwrap();
        let s = make_sigma_theta(&m, &[FRAC_PI_4]).unwrap();
        let expect = linalg::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(linalg::norm(&(s.matrix() - expect)) < 1e-15);
        let s = make_sigma_theta(&m, &[FRAC_PI_3]).unwrap();
        let r3 = 3f64.sqrt() / 2.0;
        let expect = linalg::from_real(2, 2, &[-0.5, r3, r3, 0.5]);
        assert!(linalg::norm(&(s.matrix() - expect)) < 1e-15);
        assert_eq!(make_sigma_theta(&m, &[0.0]), Err(Error::AngleOutOfRange(0.0)));
        assert_eq!(
            make_sigma_theta(&m, &[FRAC_PI_2]),
            Err(Error::AngleOutOfRange(FRAC_PI_2))
        );
        assert!(matches!(
            make_sigma_theta(&m, &[0.3, 0.4]),
            Err(Error::AngleCount { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn det_on_ker_g_minus_i_cases() {
        let m = canonical_model(1, &[2.0]).unwrap();
        let id = linalg::identity(2);
        assert!((det_on_ker_g_minus_i(&m, &id).unwrap() - ONE).norm() < 1e-15);
        let s = make_sigma_theta(&m, &[0.4]).unwrap();
        let u = s.matrix() * s.matrix();
        assert!((det_on_ker_g_minus_i(&m, &u).unwrap() - ONE).norm() < 1e-14);

        // brute force: diagonalise G on ker B, project, take the determinant
        let tau = make_tau(&m).unwrap();
        let s = make_sigma_theta(&m, &[FRAC_PI_4]).unwrap();
        let u = tau.matrix() * s.matrix();
        let (vals, vecs) = linalg::hermitian_eigen(&(g_kernel(1) * (-I)));
        // -iG has eigenvalue +1 exactly on ker(G - i)
        let idx = vals.iter().position(|v| (v - 1.0).abs() < 1e-12).unwrap();
        let v = vecs.column(idx).into_owned();
        let brute = (v.adjoint() * &u * &v)[(0, 0)];
        let got = det_on_ker_g_minus_i(&m, &u).unwrap();
        assert!((got - brute).norm() < 1e-14);
        assert!((got.norm() - 1.0).abs() < 1e-10);

        let not_commuting = tau.matrix().clone();
        assert!(matches!(det_on_ker_g_minus_i(&m, &not_commuting), Err(Error::NotGCommuting(_))));
    }

    #[test]
    fn sigma_theta_unitary_part_is_phase() {
        let s = sigma_theta_matrix(&[0.3]).unwrap();
        let u = s.unitary_part();
        assert!((u[(0, 0)] - C64::from_polar(1.0, -0.6)).norm() < 1e-15);
        let back = Involution::from_unitary(&u).unwrap();
        assert!(linalg::norm(&(back.matrix() - s.matrix())) < 1e-15);
    }

    #[test]
    fn aps_projector_is_idempotent() {
        let m = canonical_model(1, &[0.8, 1.3]).unwrap();
        let s = make_sigma_theta(&m, &[0.7]).unwrap();
        for side in [Side::Left, Side::Right] {
            let p = ApsProjector::new(side, s.clone()).matrix(&m);
            assert!(linalg::norm(&(&p * &p - &p)) < 1e-13);
        }
    }

    #[test]
    fn g_maps_plus_space_onto_minus_space() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for l in 1..4 {
            let s = Involution::random(l, &mut rng);
            let g = g_kernel(l);
            let plus = linalg::canonical_basis(&s.plus_projector(), l);
            assert_eq!(plus.len(), l);
            let images: Vec<CVector> = plus.iter().map(|v| &g * v).collect();
            for w in &images {
                assert!(linalg::vnorm(&(s.matrix() * w + w)) < 1e-12);
            }
            let gram = {
                let m = linalg::columns_to_matrix(&images, 2 * l);
                m.adjoint() * m
            };
            assert!(linalg::norm(&(gram - linalg::identity(l))) < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn canonical_models_satisfy_relations(l in 0usize..4, eigs in proptest::collection::vec(0.05f64..20.0, 0..4)) {
            prop_assume!(l > 0 || !eigs.is_empty());
            let m = canonical_model(l, &eigs).unwrap();
            let (b, g) = (m.b(), m.g());
            let id = linalg::identity(m.dim());
            prop_assert!(linalg::norm(&(b - b.adjoint())) < 1e-12);
            prop_assert!(linalg::norm(&(g + g.adjoint())) < 1e-12);
            prop_assert!(linalg::norm(&(g * g + &id)) < 1e-12);
            prop_assert!(linalg::norm(&(g * b + b * g)) < 1e-12);
            prop_assert_eq!(m.half_kernel_dim(), l);
        }

        #[test]
        fn tau_and_sigma_theta_anticommute_with_g(theta in proptest::collection::vec(0.01f64..(FRAC_PI_2 - 0.01), 1..4)) {
            let l = theta.len();
            let g = g_kernel(l);
            let tau = tau_matrix(l).unwrap();
            let s = sigma_theta_matrix(&theta).unwrap();
            prop_assert!(linalg::norm(&(tau.matrix() * &g + &g * tau.matrix())) < 1e-12);
            prop_assert!(linalg::norm(&(s.matrix() * &g + &g * s.matrix())) < 1e-12);
            // det(tau - sigma_theta) = prod(-4 sin^2 theta_i)
            let d = linalg::det(&(tau.matrix() - s.matrix()));
            let closed: f64 = theta.iter().map(|t| -4.0 * t.sin().powi(2)).product();
            prop_assert!((d - c(closed)).norm() < 1e-12 * closed.abs().max(1.0));
        }
    }

    #[test]
    fn rotated_model_recovers_structure() {
        // conjugating a canonical model by a unitary keeps every relation
        let base = canonical_model(1, &[0.9, 0.9]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let w = linalg::random_unitary(base.dim(), &mut rng);
        let b = &w * base.b() * w.adjoint();
        let g = &w * base.g() * w.adjoint();
        let m = build_model(b, g).unwrap();
        assert_eq!(m.half_kernel_dim(), 1);
        assert!((m.positive_eigenvalues()[0] - 0.9).abs() < 1e-12);
        let _ = PI;
    }
}
