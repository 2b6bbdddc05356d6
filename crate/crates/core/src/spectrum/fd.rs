//! Second-order finite differences for the one-dimensional mode problems.
//!
//! The operator `-∂_u² + m²` is discretised with the lumped linear-element
//! scheme (identical to centred differences with ghost points at Neumann and
//! Robin ends) and symmetrised into a real symmetric tridiagonal matrix. Its
//! lowest eigenvalues are found by Sturm-sequence bisection.

use super::{ScalarBc, ScalarMode};
use crate::error::{Error, Result};
use std::f64::consts::SQRT_2;

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut rad = 0.0;
            if i > 0 {
                rad += self.off[i - 1].abs();
            }
            if i + 1 < n {
                rad += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - rad);
            hi = hi.max(self.diag[i] + rad);
        }
        (lo, hi)
    }

    /// Eigenvalue number `k` (0-based, ascending).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn lowest(&self, m: usize) -> Vec<f64> {
        (0..m.min(self.len())).map(|k| self.eigenvalue(k)).collect()
    }
}

fn check_grid(r: f64, h: f64, m: usize) -> Result<usize> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveLength(r));
    }
    if !(h > 0.0) || h > r {
        return Err(Error::GridTooCoarse(format!("step {h} on an interval of length {r}")));
    }
    let n = (r / h).round() as usize;
    if (n as f64 * h - r).abs() > 1e-9 * r {
        return Err(Error::GridTooCoarse(format!("step {h} does not divide length {r}")));
    }
    // at least eight points per half-wavelength of the highest mode
    if n < 8 * (m + 1) {
        return Err(Error::GridTooCoarse(format!("{n} intervals cannot resolve {m} eigenvalues")));
    }
    Ok(n)
}

/// Diagonal entry of a Neumann/Robin end node, `None` for an eliminated
/// Dirichlet node.
fn end_diag(bc: ScalarBc, h: f64) -> Option<f64> {
    match bc {
        ScalarBc::Dirichlet => None,
        ScalarBc::Neumann => Some(2.0 / (h * h)),
        ScalarBc::Robin(k) => Some((2.0 + 2.0 * h * k) / (h * h)),
    }
}

/// Discretisation of `-∂_u² + mass²` on `[0, r]` with `n` intervals.
pub fn scalar_operator(mass: f64, left: ScalarBc, right: ScalarBc, r: f64, n: usize) -> Tridiagonal {
    let h = r / n as f64;
    let h2 = h * h;
    let m2 = mass * mass;
    let first = if left == ScalarBc::Dirichlet { 1 } else { 0 };
    let last = if right == ScalarBc::Dirichlet { n - 1 } else { n };
    let diag: Vec<f64> = (first..=last)
        .map(|i| {
            let d = match i {
                0 => end_diag(left, h),
                i if i == n => end_diag(right, h),
                _ => None,
            };
            d.unwrap_or(2.0 / h2) + m2
        })
        .collect();
    // the half-weight end nodes pick up a factor sqrt(2) on their coupling
    let off: Vec<f64> = (first..last)
        .map(|i| if i == 0 || i + 1 == n && last == n { -SQRT_2 / h2 } else { -1.0 / h2 })
        .collect();
    Tridiagonal { diag, off }
}

/// Lowest `m` eigenvalues of one scalar mode problem on a grid of step `h`.
pub fn fd_oracle_eigenvalues(mode: &ScalarMode, r: f64, h: f64, m: usize) -> Result<Vec<f64>> {
    let n = check_grid(r, h, m)?;
    Ok(scalar_operator(mode.mass, mode.left, mode.right, r, n).lowest(m))
}

/// Kernel block of one `(τ, σ_θ)` pair: components `y_1` (Neumann at 0) and
/// `y_2` (Dirichlet at 0) joined at `u = r` by `y(r) ∥ (cos θ, sin θ)` and
/// `cos θ y_1'(r) + sin θ y_2'(r) = 0`. The two components form a path graph
/// through the junction value `c`, with `y(r) = c (cos θ, sin θ)`.
pub fn kernel_pair_operator(theta: f64, r: f64, n: usize) -> Tridiagonal {
    let h2 = (r / n as f64).powi(2);
    // order: y2_1 .. y2_{n-1}, c, y1_{n-1} .. y1_0
    let size = 2 * n;
    let diag = vec![2.0 / h2; size];
    let mut off = vec![-1.0 / h2; size - 1];
    off[n - 2] = -SQRT_2 * theta.sin() / h2;
    off[n - 1] = -SQRT_2 * theta.cos() / h2;
    off[size - 2] = -SQRT_2 / h2;
    Tridiagonal { diag, off }
}

pub fn kernel_pair_eigenvalues(theta: f64, r: f64, h: f64, m: usize) -> Result<Vec<f64>> {
    let n = check_grid(r, h, m)?;
    Ok(kernel_pair_operator(theta, r, n).lowest(m))
}

/// Slope `y'(0)` of the solution of `-y'' + mass² y = 0` on `[-length, 0]`
/// with `y(0) = 1` and the given condition at `u = -length` (outward
/// derivative `-∂_u`), on `n` intervals.
pub fn harmonic_extension_slope(mass: f64, far: ScalarBc, length: f64, n: usize) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::NonPositiveLength(length));
    }
    if n < 4 {
        return Err(Error::GridTooCoarse(format!("{n} intervals")));
    }
    let h = length / n as f64;
    let m2 = mass * mass;
    // unknowns y_0 .. y_{n-1} (unscaled rows of the ghost-point scheme)
    let lower = vec![-1.0; n];
    let mut diag = vec![2.0 + h * h * m2; n];
    let mut upper = vec![-1.0; n];
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let start = match far {
        ScalarBc::Dirichlet => 1,
        ScalarBc::Neumann => {
            upper[0] = -2.0;
            0
        }
        ScalarBc::Robin(k) => {
            diag[0] += 2.0 * h * k;
            upper[0] = -2.0;
            0
        }
    };
    // Thomas algorithm on rows start..n
    for i in start + 1..n {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut y = vec![0.0; n + 1];
    y[n] = 1.0;
    y[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (start..n - 1).rev() {
        y[i] = (rhs[i] - upper[i] * y[i + 1]) / diag[i];
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::UnsolvableMode(format!("far condition {far:?} with mass {mass}")));
    }
    // y'(0) = (y_n - y_{n-1})/h + (h/2) y''(0), and y'' = mass² y
    Ok((y[n] - y[n - 1]) / h + 0.5 * h * m2 * y[n])
}

/// Observed order `log2(e_h / e_{h/2})`.
pub fn convergence_order(err_h: f64, err_half: f64) -> f64 {
    (err_h.abs() / err_half.abs()).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{mixed_mode_roots, ModeLabel};
    use std::f64::consts::PI;

    fn mode(mass: f64, left: ScalarBc, right: ScalarBc) -> ScalarMode {
        ScalarMode {
            label: ModeLabel::Kernel,
            mass,
            left,
            right,
            multiplicity: 1,
        }
    }

    #[test]
    fn dirichlet_converges_quadratically() {
        let m = mode(0.0, ScalarBc::Dirichlet, ScalarBc::Dirichlet);
        let a = fd_oracle_eigenvalues(&m, 1.0, 1.0 / 200.0, 10).unwrap();
        let b = fd_oracle_eigenvalues(&m, 1.0, 1.0 / 400.0, 10).unwrap();
        for k in 0..10 {
            let exact = ((k + 1) as f64 * PI).powi(2);
            let p = convergence_order(a[k] - exact, b[k] - exact);
            assert!((p - 2.0).abs() < 0.1, "k = {k}, order {p}");
        }
    }

    #[test]
    fn dirichlet_neumann_is_half_integer() {
        let m = mode(0.0, ScalarBc::Dirichlet, ScalarBc::Neumann);
        let a = fd_oracle_eigenvalues(&m, 2.0, 2.0 / 800.0, 5).unwrap();
        for (k, v) in a.iter().enumerate() {
            let exact = ((k as f64 + 0.5) * PI / 2.0).powi(2);
            assert!((v - exact).abs() < 1e-3 * exact);
        }
    }

    #[test]
    fn robin_matches_roots() {
        let m = mode(1.0, ScalarBc::Dirichlet, ScalarBc::Robin(1.0));
        let exact = mixed_mode_roots(1.0, 1.0, 10).unwrap();
        let a = fd_oracle_eigenvalues(&m, 1.0, 1.0 / 400.0, 10).unwrap();
        let b = fd_oracle_eigenvalues(&m, 1.0, 1.0 / 800.0, 10).unwrap();
        for k in 0..10 {
            let p = convergence_order(a[k] - exact[k], b[k] - exact[k]);
            assert!((p - 2.0).abs() < 0.1, "k = {k}, order {p}");
            // Richardson extrapolation lands much closer
            let rich = (4.0 * b[k] - a[k]) / 3.0;
            assert!((rich - exact[k]).abs() < 1e-3 * (b[k] - exact[k]).abs().max(1e-12) + 1e-9 * exact[k]);
        }
    }

    #[test]
    fn left_robin_mirrors_right_robin() {
        let a = fd_oracle_eigenvalues(&mode(2.0, ScalarBc::Robin(2.0), ScalarBc::Dirichlet), 1.0, 0.005, 6).unwrap();
        let b = fd_oracle_eigenvalues(&mode(2.0, ScalarBc::Dirichlet, ScalarBc::Robin(2.0)), 1.0, 0.005, 6).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9 * x);
        }
    }

    #[test]
    fn kernel_pair_converges() {
        let theta = 0.6;
        let r = 1.5;
        let mut exact: Vec<f64> = (0..10)
            .flat_map(|k| [(theta + k as f64 * PI) / r, (PI - theta + k as f64 * PI) / r])
            .map(|x| x * x)
            .collect();
        exact.sort_by(f64::total_cmp);
        let a = kernel_pair_eigenvalues(theta, r, r / 400.0, 10).unwrap();
        let b = kernel_pair_eigenvalues(theta, r, r / 800.0, 10).unwrap();
        for k in 0..10 {
            let p = convergence_order(a[k] - exact[k], b[k] - exact[k]);
            assert!((p - 2.0).abs() < 0.1, "k = {k}, order {p}");
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let m = mode(0.0, ScalarBc::Dirichlet, ScalarBc::Dirichlet);
        assert!(matches!(fd_oracle_eigenvalues(&m, 1.0, 0.1, 10), Err(Error::GridTooCoarse(_))));
        assert!(matches!(fd_oracle_eigenvalues(&m, 1.0, 0.3, 1), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn harmonic_slopes() {
        let l = 1.3f64;
        for mass in [0.5f64, 1.0, 2.0] {
            let exact = mass / (mass * l).tanh();
            let a = harmonic_extension_slope(mass, ScalarBc::Dirichlet, l, 400).unwrap();
            let b = harmonic_extension_slope(mass, ScalarBc::Dirichlet, l, 800).unwrap();
            let p = convergence_order(a - exact, b - exact);
            assert!((p - 2.0).abs() < 0.1, "order {p}");
            // Robin with k = mass is the decaying exponential: slope = mass
            let c = harmonic_extension_slope(mass, ScalarBc::Robin(mass), l, 800).unwrap();
            assert!((c - mass).abs() < 1e-5);
        }
        let n = harmonic_extension_slope(0.0, ScalarBc::Neumann, l, 100).unwrap();
        assert!(n.abs() < 1e-12);
        let d = harmonic_extension_slope(0.0, ScalarBc::Dirichlet, l, 100).unwrap();
        assert!((d - 1.0 / l).abs() < 1e-12);
    }
}
