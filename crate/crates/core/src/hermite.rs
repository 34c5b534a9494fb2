//! Hermite functions, Hermite–Gaussian receiver modes and displacement overlaps.
//!
//! Lengths are measured in units of the mode waist (the receiver aperture
//! radius), so a basis built with `waist = 1` works directly with the
//! dimensionless displacement `d / r_R`.
//!
//! The Hermite-Gaussian mode of order `n` is
//! `Φ_n(x) = (2 / w²)^{1/4} ψ_n(√2 x / w)` where
//! `ψ_n(x) = (2ⁿ n! √π)^{-1/2} e^{-x²/2} H_n(x)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};
use crate::tridiag::SymTridiagonal;

/// Mantissa threshold for rescaling the three-term recurrence.
const RESCALE: f64 = 1e150;

/// Residual above which two quadrature rules are considered to disagree.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// Values `ψ_0(x) ..= ψ_max_order(x)` from the normalized three-term recurrence.
///
/// The Gaussian factor is carried as a separate logarithmic scale so that
/// neither the polynomial part nor the envelope overflows for large `|x|`.
pub fn hermite_functions(max_order: usize, x: f64) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(domain(format!("hermite function argument must be finite, got {x}")));
    }
    let mut out = Vec::with_capacity(max_order + 1);
    let mut log_scale = -0.5 * x * x;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    out.push(scaled(cur, log_scale));
    for k in 0..max_order {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
        out.push(scaled(cur, log_scale));
    }
    Ok(out)
}

fn scaled(mantissa: f64, log_scale: f64) -> f64 {
    if mantissa == 0.0 {
        return 0.0;
    }
    mantissa.signum() * (mantissa.abs().ln() + log_scale).exp()
}

/// The Hermite function `ψ_order(x)`.
pub fn eval_hermite_function(order: usize, x: f64) -> Result<f64> {
    Ok(hermite_functions(order, x)?[order])
}

/// `ψ'_m(x) = √(m/2) ψ_{m-1}(x) − √((m+1)/2) ψ_{m+1}(x)`.
pub fn hermite_function_derivative(order: usize, x: f64) -> Result<f64> {
    let psi = hermite_functions(order + 1, x)?;
    let m = order as f64;
    let lower = if order == 0 { 0.0 } else { (m / 2.0).sqrt() * psi[order - 1] };
    Ok(lower - ((m + 1.0) / 2.0).sqrt() * psi[order + 1])
}

/// Gauss–Hermite rule for the weight `e^{-x²}`.
///
/// `scaled_weights[i] = weights[i] · e^{nodes[i]²}`, which lets integrands
/// built from Hermite *functions* be summed without under- or overflow.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

impl GaussHermite {
    /// Nodes from the Jacobi matrix (Golub–Welsch), polished by Newton steps,
    /// weights from the Christoffel function.
    pub fn new(points: usize) -> Result<Self> {
        if points == 0 {
            return Err(domain("Gauss-Hermite rule needs at least one node"));
        }
        let off = (1..points).map(|k| (k as f64 / 2.0).sqrt()).collect();
        let jacobi = SymTridiagonal::new(vec![0.0; points], off)?;
        let mut nodes = jacobi.eigenvalues()?;

        let n = points as f64;
        for x in nodes.iter_mut() {
            for _ in 0..2 {
                // ψ'_n(x) = √(2n) ψ_{n-1}(x) − x ψ_n(x)
                let psi = hermite_functions(points, *x)?;
                let f = psi[points];
                let fp = (2.0 * n).sqrt() * psi[points - 1] - *x * f;
                if fp != 0.0 {
                    *x -= f / fp;
                }
            }
        }

        let mut scaled_weights = Vec::with_capacity(points);
        let mut weights = Vec::with_capacity(points);
        for &x in &nodes {
            let psi = hermite_functions(points - 1, x)?;
            let christoffel: f64 = psi.iter().map(|v| v * v).sum();
            let w_scaled = if christoffel > 0.0 { 1.0 / christoffel } else { 0.0 };
            scaled_weights.push(w_scaled);
            weights.push(w_scaled * (-x * x).exp());
        }
        Ok(Self { nodes, weights, scaled_weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Truncated Hermite–Gaussian receiver basis with modes `0..max_order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteBasis {
    max_order: usize,
    waist: f64,
}

impl HermiteBasis {
    pub fn new(max_order: usize, waist: f64) -> Result<Self> {
        if max_order < 2 {
            return Err(domain(format!("basis needs at least 2 modes, got {max_order}")));
        }
        if !(waist > 0.0 && waist.is_finite()) {
            return Err(domain(format!("waist must be positive and finite, got {waist}")));
        }
        Ok(Self { max_order, waist })
    }

    /// Basis in units of the aperture radius (`waist = 1`).
    pub fn unit(max_order: usize) -> Result<Self> {
        Self::new(max_order, 1.0)
    }

    /// Number of modes `M`.
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    /// Gauss–Hermite node count used for overlaps: `4M + 16`.
    pub fn quadrature_points(&self) -> usize {
        4 * self.max_order + 16
    }

    /// All mode profiles `Φ_0(x) .. Φ_{M-1}(x)`.
    pub fn modes(&self, x: f64) -> Result<Vec<f64>> {
        let scale = (2.0 / (self.waist * self.waist)).powf(0.25);
        let mut psi = hermite_functions(self.max_order - 1, 2f64.sqrt() * x / self.waist)?;
        psi.iter_mut().for_each(|v| *v *= scale);
        Ok(psi)
    }

    /// `Φ_n(x)`.
    pub fn mode(&self, order: usize, x: f64) -> Result<f64> {
        let scale = (2.0 / (self.waist * self.waist)).powf(0.25);
        Ok(scale * eval_hermite_function(order, 2f64.sqrt() * x / self.waist)?)
    }

    /// Gram matrix `⟨Φ_m, Φ_n⟩` by quadrature; the identity for a correct basis.
    pub fn gram(&self) -> Result<DMatrix<f64>> {
        overlap_with_rule(self, 0.0, &GaussHermite::new(self.quadrature_points())?)
    }
}

/// Overlap matrix `S_mn(d) = ∫ Φ_m(x − d) Φ_n(x) dx` of the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    pub displacement: f64,
    pub entries: DMatrix<f64>,
}

impl OverlapMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Computes `S(d)`.
///
/// After the substitution `u = √2 x / w` and centring on the midpoint of the
/// two Gaussian envelopes, each integrand is `e^{-y²}` times a polynomial of
/// degree below `2M`, so the rule is exact up to rounding. The result is
/// cross-checked against a rule with eight more nodes.
pub fn overlap_matrix(basis: &HermiteBasis, d: f64) -> Result<OverlapMatrix> {
    if !d.is_finite() {
        return Err(domain(format!("displacement must be finite, got {d}")));
    }
    let points = basis.quadrature_points();
    let primary = overlap_with_rule(basis, d, &GaussHermite::new(points)?)?;
    let check = overlap_with_rule(basis, d, &GaussHermite::new(points + 8)?)?;
    let residual = (&primary - &check).amax();
    if !(residual <= QUADRATURE_TOLERANCE) {
        return Err(Error::Accuracy {
            what: "overlap quadrature did not converge",
            residual,
            tolerance: QUADRATURE_TOLERANCE,
        });
    }
    Ok(OverlapMatrix { displacement: d, entries: primary })
}

fn overlap_with_rule(basis: &HermiteBasis, d: f64, rule: &GaussHermite) -> Result<DMatrix<f64>> {
    let m = basis.max_order();
    let shift = 2f64.sqrt() * d / basis.waist();
    let half = 0.5 * shift;
    let mut s = DMatrix::zeros(m, m);
    for (&y, &w) in rule.nodes.iter().zip(&rule.scaled_weights) {
        if w == 0.0 {
            continue;
        }
        let moved = hermite_functions(m - 1, y - half)?;
        let fixed = hermite_functions(m - 1, y + half)?;
        for i in 0..m {
            let wi = w * moved[i];
            for j in 0..m {
                s[(i, j)] += wi * fixed[j];
            }
        }
    }
    Ok(s)
}

/// Central-difference estimate of the coupling generator,
/// `Γ ≈ −w (S(h) − S(−h)) / (2h)`, dimensionless in units of the waist.
pub fn numeric_coupling(basis: &HermiteBasis, step: f64) -> Result<DMatrix<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(domain(format!("finite-difference step must be positive, got {step}")));
    }
    let plus = overlap_matrix(basis, step)?;
    let minus = overlap_matrix(basis, -step)?;
    Ok((plus.entries - minus.entries) * (-basis.waist() / (2.0 * step)))
}
