//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Frobenius norm.
pub fn norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vnorm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x)))
}

pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (m + m.adjoint()).map(|z| z * 0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMatrix::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Orthogonal projector onto the span of the given orthonormal columns.
pub fn projector(cols: &[CVector], n: usize) -> CMatrix {
    let mut p = CMatrix::zeros(n, n);
    for v in cols {
        p += v * v.adjoint();
    }
    p
}

/// Gram-Schmidt over the images `proj * e_k` of the standard basis, in order,
/// keeping at most `max` vectors. The result does not depend on how `proj`
/// was obtained, only on the subspace it projects onto.
pub fn canonical_basis(proj: &CMatrix, max: usize) -> Vec<CVector> {
    let n = proj.nrows();
    let mut out: Vec<CVector> = Vec::new();
    for k in 0..n {
        if out.len() == max {
            break;
        }
        let mut v: CVector = proj.column(k).into_owned();
        // two passes for stability
        for _ in 0..2 {
            for q in &out {
                let coeff = q.dotc(&v);
                v -= q * coeff;
            }
        }
        let nv = vnorm(&v);
        if nv > 1e-8 {
            out.push(v / c(nv));
        }
    }
    out
}

pub fn columns_to_matrix(cols: &[CVector], n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, cols.len());
    for (j, v) in cols.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

pub fn det(m: &CMatrix) -> C64 {
    if m.nrows() == 0 {
        return ONE;
    }
    m.clone().lu().determinant()
}

pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    if m.nrows() == 0 {
        return Some(m.clone());
    }
    let inv = m.clone().lu().try_inverse()?;
    if inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(inv)
    } else {
        None
    }
}

/// Log-determinant of a Hermitian positive definite matrix, `None` if the
/// Cholesky factorisation fails.
pub fn logdet_hpd(m: &CMatrix) -> Option<f64> {
    if m.nrows() == 0 {
        return Some(0.0);
    }
    let herm = (m + m.adjoint()).map(|z| z * 0.5);
    let chol = herm.cholesky()?;
    let l = chol.l();
    Some(2.0 * (0..l.nrows()).map(|k| l[(k, k)].re.ln()).sum::<f64>())
}

/// Eigenvalues of a general complex square matrix via the Schur form.
pub fn eigenvalues(m: &CMatrix) -> Option<Vec<C64>> {
    if m.nrows() == 0 {
        return Some(Vec::new());
    }
    let schur = m.clone().schur();
    schur.eigenvalues().map(|v| v.iter().copied().collect())
}

/// Random unitary matrix from the QR factorisation of a complex Gaussian
/// matrix, with the phases of `R`'s diagonal absorbed into `Q`.
pub fn random_unitary<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let z = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / c(d.norm()) } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
