//! The displacement coupling generator `Γ` of the Hermite–Gaussian basis and its
//! orthogonal normal form.
//!
//! `Γ_mn = √m δ_{m−1,n} − √(m+1) δ_{m+1,n}` is real, skew-symmetric and
//! tridiagonal. An orthogonal `T` brings it to
//! `T Γ Tᵀ = ⊕_k λ_k [[0, 1], [−1, 0]]`, turning the coupled interferometer
//! chain into independent mode pairs with phases `2 λ_k d̃`.
//!
//! The `λ_k` are the positive eigenvalues of the symmetric tridiagonal matrix
//! with off-diagonals `√n`, whose characteristic polynomial is proportional to
//! the Hermite polynomial `H_M(λ / √2)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::tridiag::SymTridiagonal;

/// Smallest admissible spacing between eigenvalues of the symmetrized generator.
pub const MIN_EIGEN_GAP: f64 = 1e-12;

/// Tolerance for classifying the single null eigenvalue of odd-dimensional `Γ`.
const NULL_EIGEN_TOL: f64 = 1e-9;

/// The skew-symmetric coupling matrix `Γ` for `M` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    entries: DMatrix<f64>,
}

/// Analytic `Γ(M)`.
pub fn build_gamma(m: usize) -> Result<CouplingMatrix> {
    if m < 2 {
        return Err(domain(format!("coupling matrix needs at least 2 modes, got {m}")));
    }
    let mut entries = DMatrix::zeros(m, m);
    for n in 1..m {
        let c = (n as f64).sqrt();
        entries[(n, n - 1)] = c;
        entries[(n - 1, n)] = -c;
    }
    Ok(CouplingMatrix { entries })
}

impl CouplingMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Subdiagonal couplings `Γ[n+1][n]`.
    pub fn subdiagonal(&self) -> Vec<f64> {
        (0..self.dim() - 1).map(|n| self.entries[(n + 1, n)]).collect()
    }

    /// The symmetric tridiagonal companion `Γ̃` sharing the spectrum `{±λ_k}`.
    pub fn symmetrized(&self) -> SymTridiagonal {
        SymTridiagonal::new(vec![0.0; self.dim()], self.subdiagonal())
            .expect("coupling matrix entries are finite")
    }

    /// Row-major nested copy, convenient for serialization.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.entries)
    }
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

/// Orthogonal normal form of `Γ`.
#[derive(Debug, Clone)]
pub struct NormalForm {
    /// Orthogonal `T` with rows `(2k, 2k+1)` spanning the `k`-th pair; for odd
    /// `M` the last row spans the null space.
    pub transform: DMatrix<f64>,
    /// `λ_k > 0`, strictly descending; the null eigenvalue of odd `M` is dropped.
    pub eigenvalues: Vec<f64>,
}

impl NormalForm {
    pub fn dim(&self) -> usize {
        self.transform.nrows()
    }

    /// `⊕_k λ_k [[0, 1], [−1, 0]]`, padded with a zero row and column for odd `M`.
    pub fn block_form(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.dim(), self.dim());
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            b[(2 * k, 2 * k + 1)] = lam;
            b[(2 * k + 1, 2 * k)] = -lam;
        }
        b
    }

    /// `‖T Γ Tᵀ − B‖_F`.
    pub fn block_residual(&self, gamma: &CouplingMatrix) -> f64 {
        let t = &self.transform;
        (t * gamma.entries() * t.transpose() - self.block_form()).norm()
    }

    /// `‖Tᵀ T − I‖_F`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.dim();
        (self.transform.transpose() * &self.transform - DMatrix::identity(n, n)).norm()
    }

    /// `A = Σλ_k² / Σλ_k`.
    pub fn coupling_ratio(&self) -> f64 {
        coupling_ratio(&self.eigenvalues)
    }
}

/// Positive eigenvalues `λ_k` of `Γ(M)` in descending order, without vectors.
pub fn gamma_eigenvalues(m: usize) -> Result<Vec<f64>> {
    let gamma = build_gamma(m)?;
    let spectrum = gamma.symmetrized().eigenvalues()?;
    check_simple(&spectrum)?;
    let mut positive: Vec<f64> = spectrum.into_iter().filter(|&v| v > NULL_EIGEN_TOL).collect();
    positive.reverse();
    if positive.len() != m / 2 {
        return Err(Error::Eigen(format!(
            "expected {} positive eigenvalues for M = {m}, found {}",
            m / 2,
            positive.len()
        )));
    }
    Ok(positive)
}

fn check_simple(ascending: &[f64]) -> Result<()> {
    if let Some(gap) = ascending
        .windows(2)
        .map(|w| w[1] - w[0])
        .min_by(f64::total_cmp)
    {
        if gap < MIN_EIGEN_GAP {
            return Err(Error::Eigen(format!(
                "degenerate spectrum: minimum eigenvalue gap {gap:.3e}"
            )));
        }
    }
    Ok(())
}

/// Computes `T` and `{λ_k}` from the eigenvectors of `Γ̃`.
///
/// With `D = diag(iⁿ)`, `Γ = D (−i Γ̃) D⁻¹`, so every eigenvector `v` of `Γ̃`
/// with eigenvalue `λ > 0` yields `D v = x + i y` with `Γ x = λ y` and
/// `Γ y = −λ x`. The normalized rows `(y, x)` form the `k`-th block.
pub fn normal_form(g: &CouplingMatrix) -> Result<NormalForm> {
    let m = g.dim();
    if (g.entries() + g.entries().transpose()).amax() != 0.0 {
        return Err(domain("normal form requires a skew-symmetric matrix"));
    }
    let eig = g.symmetrized().eigen()?;
    check_simple(&eig.values)?;

    let pairs = m / 2;
    let mut transform = DMatrix::zeros(m, m);
    let mut eigenvalues = Vec::with_capacity(pairs);
    for k in 0..pairs {
        let col = m - 1 - k;
        let lam = eig.values[col];
        if lam <= NULL_EIGEN_TOL {
            return Err(Error::Eigen(format!("eigenvalue {k} is not positive: {lam:.3e}")));
        }
        let v = eig.vectors.column(col);
        let (x, y) = split_phases(v.iter().copied());
        let (nx, ny) = (norm(&x), norm(&y));
        for n in 0..m {
            transform[(2 * k, n)] = y[n] / ny;
            transform[(2 * k + 1, n)] = x[n] / nx;
        }
        eigenvalues.push(lam);
    }
    if m % 2 == 1 {
        let mid = m / 2;
        let lam = eig.values[mid];
        if lam.abs() > NULL_EIGEN_TOL {
            return Err(Error::Eigen(format!("odd M = {m} but no null eigenvalue ({lam:.3e})")));
        }
        let (x, _) = split_phases(eig.vectors.column(mid).iter().copied());
        let nx = norm(&x);
        for n in 0..m {
            transform[(m - 1, n)] = x[n] / nx;
        }
    }

    reorthonormalize_rows(&mut transform);
    Ok(NormalForm { transform, eigenvalues })
}

/// Real and imaginary parts of `D v` with `D = diag(iⁿ)`.
fn split_phases(v: impl Iterator<Item = f64>) -> (Vec<f64>, Vec<f64>) {
    let mut re = Vec::new();
    let mut im = Vec::new();
    for (n, vn) in v.enumerate() {
        let (r, i) = match n % 4 {
            0 => (vn, 0.0),
            1 => (0.0, vn),
            2 => (-vn, 0.0),
            _ => (0.0, -vn),
        };
        re.push(r);
        im.push(i);
    }
    (re, im)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Modified Gram–Schmidt over rows.
fn reorthonormalize_rows(t: &mut DMatrix<f64>) {
    let n = t.nrows();
    for i in 0..n {
        for j in 0..i {
            let dot = t.row(i).dot(&t.row(j));
            for c in 0..t.ncols() {
                let v = t[(j, c)];
                t[(i, c)] -= dot * v;
            }
        }
        let nrm = t.row(i).norm();
        t.row_mut(i).scale_mut(1.0 / nrm);
    }
}

/// `Σλ_k` and `Σλ_k²`; each equals half the corresponding Schatten power of `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchattenSums {
    pub sum_lambda: f64,
    pub sum_lambda_sq: f64,
}

impl SchattenSums {
    /// `‖Γ‖_1 = 2 Σλ_k`.
    pub fn trace_norm(&self) -> f64 {
        2.0 * self.sum_lambda
    }

    /// `‖Γ‖_2 = √(2 Σλ_k²)`.
    pub fn frobenius_norm(&self) -> f64 {
        (2.0 * self.sum_lambda_sq).sqrt()
    }
}

pub fn schatten_sums(nf: &NormalForm) -> SchattenSums {
    sums_of(&nf.eigenvalues)
}

pub(crate) fn sums_of(eigenvalues: &[f64]) -> SchattenSums {
    SchattenSums {
        sum_lambda: eigenvalues.iter().sum(),
        sum_lambda_sq: eigenvalues.iter().map(|l| l * l).sum(),
    }
}

/// `A = Σλ_k² / Σλ_k`; zero for an empty list.
pub fn coupling_ratio(eigenvalues: &[f64]) -> f64 {
    let s = sums_of(eigenvalues);
    if s.sum_lambda == 0.0 {
        0.0
    } else {
        s.sum_lambda_sq / s.sum_lambda
    }
}

/// Photon weights `c_k = λ_k / Σλ_k` maximizing `Σ λ_k c_k`.
pub fn photon_allocation(nf: &NormalForm) -> Result<Vec<f64>> {
    allocation_of(&nf.eigenvalues)
}

pub(crate) fn allocation_of(eigenvalues: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = eigenvalues.iter().sum();
    if !(total > 0.0) || eigenvalues.iter().any(|&l| l < 0.0) {
        return Err(domain("photon allocation needs non-negative eigenvalues with positive sum"));
    }
    Ok(eigenvalues.iter().map(|l| l / total).collect())
}
