//! Symmetric tridiagonal eigensolver (implicit QL with Wilkinson-type shifts).
//!
//! Both the coupling-matrix normal form and the Gauss–Hermite node computation
//! reduce to a real symmetric tridiagonal matrix, so a dedicated O(n²) solver
//! (O(n³) with vectors) is used instead of a dense one.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// A real symmetric tridiagonal matrix stored by its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

/// Eigenvalues in ascending order, with eigenvectors stored column-wise.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymTridiagonal {
    /// `off[i]` couples rows `i` and `i + 1`, so `off.len() + 1 == diag.len()`.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Domain("empty tridiagonal matrix".into()));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::Domain(format!(
                "off-diagonal length {} does not match dimension {}",
                off.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(off.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite tridiagonal entry".into()));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &v) in self.off.iter().enumerate() {
            m[(i, i + 1)] = v;
            m[(i + 1, i)] = v;
        }
        m
    }

    /// Eigenvalues only, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = self.shifted_off();
        ql_implicit(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Full eigendecomposition, ascending eigenvalues.
    pub fn eigen(&self) -> Result<TridiagEigen> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = self.shifted_off();
        let mut z = DMatrix::identity(n, n);
        ql_implicit(&mut d, &mut e, Some(&mut z))?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let values = order.iter().map(|&i| d[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| z[(r, order[c])]);
        Ok(TridiagEigen { values, vectors })
    }

    fn shifted_off(&self) -> Vec<f64> {
        let mut e = self.off.clone();
        e.push(0.0);
        e
    }
}

/// EISPACK `tql2` recurrence. `e[i]` couples `i` and `i + 1` and `e[n - 1] == 0`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut DMatrix<f64>>) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::Eigen(format!(
                        "QL iteration did not converge for eigenvalue {l} (|e| = {:.3e})",
                        e[l].abs()
                    )));
                }

                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(z) = z.as_deref_mut() {
                        let (mut left, mut right) = z.columns_range_pair_mut(i, i + 1);
                        for k in 0..n {
                            let hk = right[k];
                            right[k] = s * left[k] + c * hk;
                            left[k] = c * left[k] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
