//! Exact finite-dimensional oracle for the decoupled interferometer pairs.
//!
//! A mode pair holding `N` photons is a spin-`N/2` system (Schwinger map). In
//! the normal-form basis the generator is `H = Σ_k 2 λ_k Ŝ_y^{(k)}`, acting
//! block-wise on the tensor product of the pair spaces. States are stored in
//! the `Ŝ_z` eigenbasis ordered from `m = +N/2` (all photons in the first mode
//! of the pair, `|N, 0⟩`) down to `m = −N/2` (`|0, N⟩`).

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::tridiag::SymTridiagonal;

/// Largest tensor-product dimension built by [`optimal_probe`].
pub const MAX_STATE_DIM: usize = 1_000_000;
/// Largest single-block dimension for the exact spin rotation.
pub const MAX_BLOCK_DIM: usize = 1_001;

const NORM_TOL: f64 = 1e-12;

/// One decoupled pair: `N_k` photons, interferometer gradient `λ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinBlock {
    pub pair_index: usize,
    pub photon_number: usize,
    pub lambda: f64,
}

impl SpinBlock {
    pub fn new(pair_index: usize, photon_number: usize, lambda: f64) -> Result<Self> {
        if photon_number < 1 {
            return Err(domain("spin block needs at least one photon"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(domain(format!("block gradient must be non-negative, got {lambda}")));
        }
        Ok(Self { pair_index, photon_number, lambda })
    }

    /// Hilbert-space dimension `N_k + 1`.
    pub fn dim(&self) -> usize {
        self.photon_number + 1
    }

    /// Extreme eigenvalue `s_max = λ_k N_k` of `2 λ_k Ŝ_y`.
    pub fn s_max(&self) -> f64 {
        self.lambda * self.photon_number as f64
    }
}

/// Normalized state of a single block in the `Ŝ_z` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    pub amplitudes: Vec<Complex64>,
}

impl BlockState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm_sqr(&amplitudes).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(domain(format!("block state norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes })
    }

    /// `|N, 0⟩`, all photons in the first mode (`m = +N/2`).
    pub fn top(n_photons: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_photons + 1];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// `|0, N⟩` (`m = −N/2`).
    pub fn bottom(n_photons: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_photons + 1];
        amplitudes[n_photons] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }
}

/// State on the tensor product of several blocks, first block most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorState {
    pub dims: Vec<usize>,
    pub amplitudes: Vec<Complex64>,
}

impl TensorState {
    pub fn product(blocks: &[BlockState]) -> Result<Self> {
        let dims: Vec<usize> = blocks.iter().map(|b| b.amplitudes.len()).collect();
        let total = checked_dim(&dims)?;
        let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
        amplitudes.reserve(total);
        for b in blocks {
            amplitudes = amplitudes
                .iter()
                .flat_map(|a| b.amplitudes.iter().map(move |c| a * c))
                .collect();
        }
        Ok(Self { dims, amplitudes })
    }

    /// Haar-like random state: i.i.d. complex Gaussian amplitudes, normalized.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Self> {
        let total = checked_dim(dims)?;
        let mut amplitudes: Vec<Complex64> = (0..total)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let n = norm_sqr(&amplitudes).sqrt();
        amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(Self { dims: dims.to_vec(), amplitudes })
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn checked_dim(dims: &[usize]) -> Result<usize> {
    let mut total: usize = 1;
    for &d in dims {
        total = total.saturating_mul(d);
    }
    if total > MAX_STATE_DIM {
        return Err(Error::Capacity { dimension: total, limit: MAX_STATE_DIM });
    }
    Ok(total)
}

/// `⟨m+1| Ŝ_+ |m⟩ = √(j(j+1) − m(m+1))` for basis index `i + 1 → i`.
fn ladder(n_photons: usize) -> Vec<f64> {
    let j = n_photons as f64 / 2.0;
    (1..=n_photons)
        .map(|i| {
            let m = j - i as f64;
            (j * (j + 1.0) - m * (m + 1.0)).sqrt()
        })
        .collect()
}

/// `Ŝ_y` for spin `N/2` in the `Ŝ_z` basis.
pub fn build_sy(n_photons: usize) -> Result<DMatrix<Complex64>> {
    if n_photons < 1 {
        return Err(domain("spin operator needs at least one photon"));
    }
    let c = ladder(n_photons);
    let mut sy = DMatrix::zeros(n_photons + 1, n_photons + 1);
    for (i, &ci) in c.iter().enumerate() {
        sy[(i, i + 1)] = Complex64::new(0.0, -0.5 * ci);
        sy[(i + 1, i)] = Complex64::new(0.0, 0.5 * ci);
    }
    Ok(sy)
}

/// `Ŝ_x` for spin `N/2`; real symmetric tridiagonal.
pub fn build_sx(n_photons: usize) -> Result<SymTridiagonal> {
    if n_photons < 1 {
        return Err(domain("spin operator needs at least one photon"));
    }
    SymTridiagonal::new(vec![0.0; n_photons + 1], ladder(n_photons).iter().map(|c| 0.5 * c).collect())
}

/// `exp(−i θ Ŝ_x)` from the exact eigendecomposition of `Ŝ_x`.
pub fn rotation_x(n_photons: usize, angle: f64) -> Result<DMatrix<Complex64>> {
    if n_photons + 1 > MAX_BLOCK_DIM {
        return Err(Error::Capacity { dimension: n_photons + 1, limit: MAX_BLOCK_DIM });
    }
    let eig = build_sx(n_photons)?.eigen()?;
    let d = n_photons + 1;
    let v = &eig.vectors;
    let phases: Vec<Complex64> = eig.values.iter().map(|&mu| Complex64::from_polar(1.0, -angle * mu)).collect();
    Ok(DMatrix::from_fn(d, d, |r, c| {
        (0..d).map(|k| phases[k] * (v[(r, k)] * v[(c, k)])).sum()
    }))
}

/// `Δ H ≤ Σ_k (s_max − s_min)/2 = Σ_k λ_k N_k`.
pub fn variance_bound(blocks: &[SpinBlock]) -> Result<f64> {
    if blocks.is_empty() {
        return Err(domain("variance bound needs at least one block"));
    }
    Ok(blocks.iter().map(SpinBlock::s_max).sum())
}

/// Optimal entangled probe and its two branches.
#[derive(Debug, Clone)]
pub struct OptimalProbe {
    /// `R_x(π/2) |N_k, 0⟩` for each block.
    pub plus: Vec<BlockState>,
    /// `R_x(π/2) |0, N_k⟩` for each block.
    pub minus: Vec<BlockState>,
    /// `(|+⟩ + |−⟩)/√2` with the first nonzero amplitude real and positive.
    pub state: TensorState,
}

/// Builds `(⊗_k R_x(π/2)|N_k,0⟩ + ⊗_k R_x(π/2)|0,N_k⟩)/√2`.
///
/// Each branch is an extreme eigenvector of every `Ŝ_y^{(k)}`, with opposite
/// signs, so the superposition saturates [`variance_bound`].
pub fn optimal_probe(blocks: &[SpinBlock]) -> Result<OptimalProbe> {
    if blocks.is_empty() {
        return Err(domain("optimal probe needs at least one block"));
    }
    checked_dim(&blocks.iter().map(SpinBlock::dim).collect::<Vec<_>>())?;

    let mut plus = Vec::with_capacity(blocks.len());
    let mut minus = Vec::with_capacity(blocks.len());
    for b in blocks {
        let r = rotation_x(b.photon_number, FRAC_PI_2)?;
        let n = b.photon_number;
        plus.push(BlockState { amplitudes: r.column(0).iter().copied().collect() });
        minus.push(BlockState { amplitudes: r.column(n).iter().copied().collect() });
    }
    let p = TensorState::product(&plus)?;
    let m = TensorState::product(&minus)?;
    let mut amplitudes: Vec<Complex64> =
        p.amplitudes.iter().zip(&m.amplitudes).map(|(a, b)| a + b).collect();
    let n = norm_sqr(&amplitudes).sqrt();
    let lead = amplitudes.iter().position(|a| a.norm() > 1e-14).unwrap_or(0);
    let phase = amplitudes[lead].conj() / amplitudes[lead].norm();
    amplitudes.iter_mut().for_each(|a| *a = *a * phase / n);
    amplitudes[lead].im = 0.0;
    Ok(OptimalProbe { plus, minus, state: TensorState { dims: p.dims, amplitudes } })
}

/// `H |ψ⟩` for `H = Σ_k 2 λ_k Ŝ_y^{(k)}`.
pub fn apply_hamiltonian(state: &TensorState, blocks: &[SpinBlock]) -> Result<Vec<Complex64>> {
    let dims: Vec<usize> = blocks.iter().map(SpinBlock::dim).collect();
    if dims != state.dims {
        return Err(domain(format!("state dims {:?} do not match blocks {:?}", state.dims, dims)));
    }
    let total = state.amplitudes.len();
    let mut out = vec![Complex64::new(0.0, 0.0); total];
    let mut inner = total;
    for b in blocks {
        let d = b.dim();
        inner /= d;
        let outer = total / (inner * d);
        let c = ladder(b.photon_number);
        // 2λ Ŝ_y: (i,i+1) → −iλ c_i, (i+1,i) → +iλ c_i
        for o in 0..outer {
            for r in 0..inner {
                let idx = |i: usize| (o * d + i) * inner + r;
                for (i, &ci) in c.iter().enumerate() {
                    let w = b.lambda * ci;
                    let lo = state.amplitudes[idx(i)];
                    let hi = state.amplitudes[idx(i + 1)];
                    out[idx(i)] += Complex64::new(0.0, -w) * hi;
                    out[idx(i + 1)] += Complex64::new(0.0, w) * lo;
                }
            }
        }
    }
    Ok(out)
}

/// `(⟨H⟩, ⟨H²⟩ − ⟨H⟩²)` for a normalized state.
pub fn variance_of(state: &TensorState, blocks: &[SpinBlock]) -> Result<(f64, f64)> {
    if (state.norm() - 1.0).abs() > 1e-10 {
        return Err(domain(format!("state is not normalized (norm {})", state.norm())));
    }
    let h_psi = apply_hamiltonian(state, blocks)?;
    let mean: Complex64 = state.amplitudes.iter().zip(&h_psi).map(|(a, b)| a.conj() * b).sum();
    let second = norm_sqr(&h_psi);
    Ok((mean.re, second - mean.re * mean.re))
}

/// `F_Q = 4 Var(H) / r_R²` for a pure state.
pub fn qfi_of(state: &TensorState, blocks: &[SpinBlock], aperture_radius: f64) -> Result<f64> {
    let (_, var) = variance_of(state, blocks)?;
    Ok(4.0 * var / (aperture_radius * aperture_radius))
}
