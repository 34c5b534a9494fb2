//! Gaussian-state simulation of the squeezed-light transceiver.
//!
//! Quadratures are `x = a + a†`, `p = −i(a − a†)`, so the vacuum has unit
//! variance and `a = (x + i p)/2`. Vectors are interleaved
//! `(x₀, p₀, x₁, p₁, …)`. Mode layout for `K = M_S M_T / 2` pairs: modes
//! `0..K` are the signal ports `γ^s_k`, modes `K..2K` the coherent ports `γ^c_k`.
//!
//! Transverse displacement is handled in the scaled units `d̃ = d / r_R`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{allocation_of, coupling_ratio, gamma_eigenvalues};
use crate::error::{domain, Error, Result};
use crate::fisher::gaussian_homodyne_error;

/// Largest `|λ_max d̃|` accepted by the linearized interferometer.
pub const LINEARIZED_PHASE_LIMIT: f64 = 0.05;
/// Samples drawn per parallel batch; fixed so results do not depend on thread count.
pub const BATCH_SIZE: usize = 4096;
const PHYSICALITY_TOL: f64 = 1e-9;

/// Real symplectic form `Ω = ⊕ [[0, 1], [−1, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

/// `‖S Ω Sᵀ − Ω‖_max`.
pub fn symplectic_residual(s: &DMatrix<f64>) -> f64 {
    let w = symplectic_form(s.nrows() / 2);
    (s * &w * s.transpose() - w).amax()
}

pub fn is_symplectic(s: &DMatrix<f64>, tol: f64) -> bool {
    s.is_square() && s.nrows().is_multiple_of(2) && symplectic_residual(s) <= tol
}

/// Real quadrature action of `a ↦ U a` for complex `U = R + i I`.
pub fn passive_symplectic(u: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = u.nrows();
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = u[(r, c)];
            s[(2 * r, 2 * c)] = z.re;
            s[(2 * r, 2 * c + 1)] = -z.im;
            s[(2 * r + 1, 2 * c)] = z.im;
            s[(2 * r + 1, 2 * c + 1)] = z.re;
        }
    }
    s
}

/// Which quadrature of the signal mode is squeezed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    Position,
    Momentum,
}

/// Mean vector and covariance matrix of a Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn vacuum(modes: usize) -> Self {
        Self { mean: DVector::zeros(2 * modes), cov: DMatrix::identity(2 * modes, 2 * modes) }
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    /// Complex amplitude `⟨a_k⟩`.
    pub fn amplitude(&self, mode: usize) -> Complex64 {
        Complex64::new(self.mean[2 * mode], self.mean[2 * mode + 1]) / 2.0
    }

    pub fn mean_photons(&self, mode: usize) -> f64 {
        let (x, p) = (2 * mode, 2 * mode + 1);
        (self.cov[(x, x)] + self.cov[(p, p)] + self.mean[x].powi(2) + self.mean[p].powi(2) - 2.0) / 4.0
    }

    pub fn total_photons(&self) -> f64 {
        (0..self.modes()).map(|k| self.mean_photons(k)).sum()
    }

    /// Smallest eigenvalue of `V + iΩ`; non-negative for a physical state.
    pub fn uncertainty_margin(&self) -> f64 {
        // real embedding [[V, −Ω], [Ω, V]] of the Hermitian matrix V + iΩ
        let n = self.cov.nrows();
        let w = symplectic_form(self.modes());
        let mut big = DMatrix::zeros(2 * n, 2 * n);
        big.view_mut((0, 0), (n, n)).copy_from(&self.cov);
        big.view_mut((n, n), (n, n)).copy_from(&self.cov);
        big.view_mut((0, n), (n, n)).copy_from(&(-&w));
        big.view_mut((n, 0), (n, n)).copy_from(&w);
        SymmetricEigen::new(big).eigenvalues.min()
    }

    pub fn check_physical(&self) -> Result<()> {
        let asym = (&self.cov - self.cov.transpose()).amax();
        if asym > PHYSICALITY_TOL {
            return Err(Error::Consistency(format!("covariance asymmetric by {asym:e}")));
        }
        let margin = self.uncertainty_margin();
        if margin < -PHYSICALITY_TOL {
            return Err(Error::Consistency(format!("uncertainty relation violated by {:e}", -margin)));
        }
        Ok(())
    }

    /// `r̄ ↦ S r̄`, `V ↦ S V Sᵀ`; `S` need not be symplectic.
    pub fn transform(&mut self, s: &DMatrix<f64>) -> Result<()> {
        if s.nrows() != self.mean.len() || !s.is_square() {
            return Err(domain(format!(
                "map of size {}x{} on a {}-mode state",
                s.nrows(),
                s.ncols(),
                self.modes()
            )));
        }
        self.mean = s * &self.mean;
        self.cov = s * &self.cov * s.transpose();
        Ok(())
    }

    /// Single-mode squeezing with `e^{−2r}` variance on `quadrature`.
    pub fn squeeze(&mut self, mode: usize, r: f64, quadrature: Quadrature) -> Result<()> {
        let mut s = DMatrix::identity(self.mean.len(), self.mean.len());
        let (sx, sp) = match quadrature {
            Quadrature::Position => ((-r).exp(), r.exp()),
            Quadrature::Momentum => (r.exp(), (-r).exp()),
        };
        s[(2 * mode, 2 * mode)] = sx;
        s[(2 * mode + 1, 2 * mode + 1)] = sp;
        self.transform(&s)
    }

    pub fn displace(&mut self, mode: usize, alpha: Complex64) {
        self.mean[2 * mode] += 2.0 * alpha.re;
        self.mean[2 * mode + 1] += 2.0 * alpha.im;
    }
}

/// Parameters of one simulated transceiver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransceiverConfig {
    pub spatial_modes: usize,
    pub temporal_modes: usize,
    pub total_photons: f64,
    pub squeezed_fraction: f64,
    /// Scaled displacement `d̃ = d / r_R`.
    pub displacement_true: f64,
    pub seed: u64,
}

impl TransceiverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.spatial_modes < 2 || !self.spatial_modes.is_multiple_of(2) {
            return Err(domain(format!(
                "transceiver needs an even M_S >= 2, got {}",
                self.spatial_modes
            )));
        }
        if self.temporal_modes < 1 {
            return Err(domain("M_T must be at least 1"));
        }
        if !(self.total_photons > 0.0 && self.total_photons.is_finite()) {
            return Err(domain(format!("total photon number must be positive, got {}", self.total_photons)));
        }
        if !(0.0..1.0).contains(&self.squeezed_fraction) {
            return Err(domain(format!(
                "squeezed fraction must lie in [0, 1), got {}",
                self.squeezed_fraction
            )));
        }
        if !self.displacement_true.is_finite() {
            return Err(domain("displacement must be finite"));
        }
        Ok(())
    }

    pub fn pairs(&self) -> usize {
        self.spatial_modes * self.temporal_modes / 2
    }

    pub fn squeezed_photons(&self) -> f64 {
        self.squeezed_fraction * self.total_photons
    }

    pub fn coherent_photons(&self) -> f64 {
        self.total_photons - self.squeezed_photons()
    }

    /// `r` with `sinh² r = N_s`.
    pub fn squeezing(&self) -> f64 {
        self.squeezed_photons().sqrt().asinh()
    }
}

/// Interferometer gradients and photon weights across all pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSpectrum {
    pub lambdas: Vec<f64>,
    pub allocation: Vec<f64>,
    pub coupling_ratio: f64,
}

impl PairSpectrum {
    pub fn pairs(&self) -> usize {
        self.lambdas.len()
    }
}

/// Positive eigenvalues of `Γ(M_S)` repeated for each of the `M_T` slots.
pub fn spatio_temporal_extend(cfg: &TransceiverConfig) -> Result<PairSpectrum> {
    cfg.validate()?;
    let base = gamma_eigenvalues(cfg.spatial_modes)?;
    let lambdas: Vec<f64> = (0..cfg.temporal_modes).flat_map(|_| base.iter().copied()).collect();
    let allocation = allocation_of(&lambdas)?;
    Ok(PairSpectrum { coupling_ratio: coupling_ratio(&lambdas), lambdas, allocation })
}

/// Orthogonal `K×K` matrix with first row `√c`; the remaining rows come from
/// Gram–Schmidt on the standard basis.
pub fn beamsplitter_array(allocation: &[f64]) -> Result<DMatrix<f64>> {
    let k = allocation.len();
    let total: f64 = allocation.iter().sum();
    if k == 0 || allocation.iter().any(|&c| !(c >= 0.0)) || (total - 1.0).abs() > 1e-12 {
        return Err(domain("allocation must be non-negative and sum to 1"));
    }
    let mut rows: Vec<DVector<f64>> = vec![DVector::from_iterator(k, allocation.iter().map(|c| c.sqrt()))];
    for e in 0..k {
        if rows.len() == k {
            break;
        }
        let mut v = DVector::zeros(k);
        v[e] = 1.0;
        for _ in 0..2 {
            for r in &rows {
                let dot = r.dot(&v);
                v.axpy(-dot, r, 1.0);
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            rows.push(v / n);
        }
    }
    if rows.len() != k {
        return Err(Error::Consistency("beamsplitter completion lost rank".into()));
    }
    Ok(DMatrix::from_fn(k, k, |r, c| rows[r][c]))
}

/// Block-diagonal complex unitary acting on modes `offset..offset+K` of `total` modes.
fn embed(u: &DMatrix<f64>, offset: usize, total: usize) -> DMatrix<Complex64> {
    let mut full = DMatrix::identity(total, total);
    for r in 0..u.nrows() {
        for c in 0..u.ncols() {
            full[(offset + r, offset + c)] = Complex64::new(u[(r, c)], 0.0);
        }
    }
    full
}

/// Squeezed vacuum on `a′₀` spread over the signal ports by `Bᵀ`, coherent
/// amplitudes `√(c_k N_c)` on the coherent ports.
pub fn prepare_probe_with(
    cfg: &TransceiverConfig,
    allocation: &[f64],
    quadrature: Quadrature,
) -> Result<GaussianState> {
    cfg.validate()?;
    let k = cfg.pairs();
    if allocation.len() != k {
        return Err(domain(format!("allocation has {} weights for {k} pairs", allocation.len())));
    }
    let b = beamsplitter_array(allocation)?;
    let mut state = GaussianState::vacuum(2 * k);
    state.squeeze(0, cfg.squeezing(), quadrature)?;
    state.transform(&passive_symplectic(&embed(&b.transpose(), 0, 2 * k)))?;
    let nc = cfg.coherent_photons();
    for (j, c) in allocation.iter().enumerate() {
        state.displace(k + j, Complex64::new((c * nc).sqrt(), 0.0));
    }
    Ok(state)
}

/// Readout variance of `p` on `b′₀` with no displacement applied.
fn readout_variance(state: &GaussianState, b: &DMatrix<f64>) -> Result<f64> {
    let mut s = state.clone();
    let k = b.nrows();
    s.transform(&passive_symplectic(&embed(b, 0, 2 * k)))?;
    Ok(s.cov[(1, 1)])
}

/// [`prepare_probe_with`] on whichever squeezed quadrature gives the smaller
/// closed-form estimator variance.
pub fn prepare_probe(cfg: &TransceiverConfig, allocation: &[f64]) -> Result<GaussianState> {
    let b = beamsplitter_array(allocation)?;
    let mut best: Option<(f64, GaussianState)> = None;
    for q in [Quadrature::Position, Quadrature::Momentum] {
        let s = prepare_probe_with(cfg, allocation, q)?;
        let v = readout_variance(&s, &b)?;
        if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
            best = Some((v, s));
        }
    }
    Ok(best.expect("two candidates").1)
}

/// Interferometer model used by [`encode_displacement`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// First order in `λ_k d̃`: `[[1 − iθ, iθ], [iθ, 1 − iθ]]` per pair.
    Linearized,
    /// Beamsplitter, phase `e^{−2iθ}` on the difference arm, beamsplitter.
    ExactMzi,
}

/// `θ`-dependent 2×2 complex map on `(γ^s_k, γ^c_k)`.
pub fn pair_map(theta: f64, encoding: Encoding) -> DMatrix<Complex64> {
    let i = Complex64::i();
    match encoding {
        Encoding::Linearized => {
            let d = Complex64::new(1.0, 0.0) - i * theta;
            let o = i * theta;
            DMatrix::from_row_slice(2, 2, &[d, o, o, d])
        }
        Encoding::ExactMzi => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let bs = DMatrix::from_row_slice(2, 2, &[h, h, h, -h]).map(|v| Complex64::new(v, 0.0));
            let mut phase = DMatrix::identity(2, 2);
            phase[(1, 1)] = Complex64::from_polar(1.0, -2.0 * theta);
            &bs * phase * &bs
        }
    }
}

/// Applies the per-pair interferometers for displacement `d̃`.
pub fn encode_displacement(
    state: &GaussianState,
    spectrum: &PairSpectrum,
    d_scaled: f64,
    encoding: Encoding,
) -> Result<GaussianState> {
    let k = spectrum.pairs();
    if state.modes() != 2 * k {
        return Err(domain(format!("state has {} modes, expected {}", state.modes(), 2 * k)));
    }
    let lmax = spectrum.lambdas.iter().copied().fold(0.0, f64::max);
    if encoding == Encoding::Linearized && (lmax * d_scaled).abs() > LINEARIZED_PHASE_LIMIT {
        return Err(domain(format!(
            "|lambda_max * d| = {:.3e} exceeds {LINEARIZED_PHASE_LIMIT}; use the exact interferometer",
            (lmax * d_scaled).abs()
        )));
    }
    let mut u = DMatrix::identity(2 * k, 2 * k);
    for (j, &lam) in spectrum.lambdas.iter().enumerate() {
        let m = pair_map(lam * d_scaled, encoding);
        let idx = [j, k + j];
        for r in 0..2 {
            for c in 0..2 {
                u[(idx[r], idx[c])] = m[(r, c)];
            }
        }
    }
    let mut out = state.clone();
    out.transform(&passive_symplectic(&u))?;
    Ok(out)
}

/// Outcome of a Monte-Carlo homodyne run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub d_true: f64,
    pub estimate_mean: f64,
    pub estimate_std: f64,
    /// `e^{−r}/(2 A √N_c)`, the `d̃ → 0` value for this configuration.
    pub predicted_std: f64,
    /// Estimator spread implied by the measured state itself.
    pub closed_form_std: f64,
    pub trials: usize,
    pub standard_error: f64,
}

/// Mean and variance of the estimator `d̂ = p(b′₀) / (2 A √N_c)`.
pub fn estimator_moments(
    state: &GaussianState,
    cfg: &TransceiverConfig,
    spectrum: &PairSpectrum,
) -> Result<(f64, f64)> {
    let k = spectrum.pairs();
    let b = beamsplitter_array(&spectrum.allocation)?;
    let mut s = state.clone();
    s.transform(&passive_symplectic(&embed(&b, 0, 2 * k)))?;
    let var = s.cov[(1, 1)];
    if !(var > 0.0) {
        return Err(Error::Consistency(format!("readout variance {var} is not positive")));
    }
    let scale = 2.0 * spectrum.coupling_ratio * cfg.coherent_photons().sqrt();
    if !(scale > 0.0) {
        return Err(domain("estimator needs coherent photons"));
    }
    Ok((s.mean[1] / scale, var / (scale * scale)))
}

#[derive(Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * o.n / n,
            m2: self.m2 + o.m2 + delta * delta * self.n * o.n / n,
        }
    }
}

/// Homodyne readout of `Im(b′₀)` repeated `trials` times.
///
/// Batches of [`BATCH_SIZE`] use ChaCha8 stream `batch` of `cfg.seed` and are
/// merged in batch order, so the result is independent of the thread count.
pub fn measure_and_estimate(
    state: &GaussianState,
    cfg: &TransceiverConfig,
    spectrum: &PairSpectrum,
    trials: usize,
) -> Result<EstimationReport> {
    cfg.validate()?;
    if trials < 2 {
        return Err(domain("need at least two trials"));
    }
    let (mu, var) = estimator_moments(state, cfg, spectrum)?;
    let sigma = var.sqrt();
    let normal = Normal::new(mu, sigma).map_err(|e| Error::Consistency(e.to_string()))?;
    let batches = trials.div_ceil(BATCH_SIZE);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64);
            let len = BATCH_SIZE.min(trials - b * BATCH_SIZE);
            let mut m = Moments { n: 0.0, mean: 0.0, m2: 0.0 };
            for _ in 0..len {
                let x = normal.sample(&mut rng);
                m.n += 1.0;
                let delta = x - m.mean;
                m.mean += delta / m.n;
                m.m2 += delta * (x - m.mean);
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments { n: 0.0, mean: 0.0, m2: 0.0 }, Moments::merge);
    let std = (total.m2 / (total.n - 1.0)).sqrt();
    Ok(EstimationReport {
        d_true: cfg.displacement_true,
        estimate_mean: total.mean,
        estimate_std: std,
        predicted_std: gaussian_homodyne_error(spectrum.coupling_ratio, cfg.total_photons, cfg.squeezed_fraction)?,
        closed_form_std: sigma,
        trials,
        standard_error: std / (trials as f64).sqrt(),
    })
}

/// Full pipeline: spectrum, probe, interferometers, readout.
pub fn simulate(cfg: &TransceiverConfig, encoding: Encoding, trials: usize) -> Result<EstimationReport> {
    let spectrum = spatio_temporal_extend(cfg)?;
    let probe = prepare_probe(cfg, &spectrum.allocation)?;
    let encoded = encode_displacement(&probe, &spectrum, cfg.displacement_true, encoding)?;
    measure_and_estimate(&encoded, cfg, &spectrum, trials)
}
