//! Quantum Fisher information and minimum displacement error for each probe family.
//!
//! All errors are single-shot quantum Cramér–Rao values, `δd = 1/√F_Q`, in the
//! length unit of the aperture radius `r_R`.
//!
//! | family                     | `δd`                                     |
//! |----------------------------|------------------------------------------|
//! | single mode `j`            | `r_R / (2 √(j N_S))`                     |
//! | classical (coherent)       | `r_R / (2 M_S √(M_T n̄))`                 |
//! | spatially entangled        | `r_R / (2 A √M_T N_S)`                   |
//! | spatio-temporally entangled| `r_R / (2 A N)`                          |
//! | Gaussian squeezed          | `r_R √2 / (A √N (√(N_s+1) + √N_s))`      |
//!
//! with `N_S = n̄ M_S`, `N = n̄ M_S M_T` and `A = Σλ_k² / Σλ_k` over the
//! normal-form eigenvalues of `Γ(M_S)`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{coupling_ratio, gamma_eigenvalues, NormalForm};
use crate::error::{domain, Error, Result};

/// Probe families with closed-form precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProbeFamily {
    /// All photons in Hermite–Gaussian mode `mode`, other modes in vacuum.
    SingleMode { mode: usize },
    Classical,
    SpatialEntangled,
    SpatioTemporalEntangled,
    GaussianSqueezed,
}

impl ProbeFamily {
    pub fn name(&self) -> String {
        match self {
            ProbeFamily::SingleMode { mode } => format!("single_mode_{mode}"),
            ProbeFamily::Classical => "classical".into(),
            ProbeFamily::SpatialEntangled => "spatial_entangled".into(),
            ProbeFamily::SpatioTemporalEntangled => "spatio_temporal_entangled".into(),
            ProbeFamily::GaussianSqueezed => "gaussian_squeezed".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub family: ProbeFamily,
    pub spatial_modes: usize,
    pub temporal_modes: usize,
    pub mean_photons_per_mode: f64,
    pub aperture_radius: f64,
}

impl ProbeSpec {
    pub fn new(
        family: ProbeFamily,
        spatial_modes: usize,
        temporal_modes: usize,
        mean_photons_per_mode: f64,
        aperture_radius: f64,
    ) -> Result<Self> {
        let spec = Self {
            family,
            spatial_modes,
            temporal_modes,
            mean_photons_per_mode,
            aperture_radius,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.spatial_modes < 2 {
            return Err(domain(format!("M_S must be at least 2, got {}", self.spatial_modes)));
        }
        if self.temporal_modes < 1 {
            return Err(domain("M_T must be at least 1"));
        }
        if !(self.mean_photons_per_mode > 0.0 && self.mean_photons_per_mode.is_finite()) {
            return Err(domain(format!(
                "mean photon number per mode must be positive, got {}",
                self.mean_photons_per_mode
            )));
        }
        if !(self.aperture_radius > 0.0 && self.aperture_radius.is_finite()) {
            return Err(domain(format!(
                "aperture radius must be positive, got {}",
                self.aperture_radius
            )));
        }
        if let ProbeFamily::SingleMode { mode } = self.family {
            if mode + 2 > self.spatial_modes {
                return Err(domain(format!(
                    "single-mode index {mode} outside [0, {}]",
                    self.spatial_modes - 2
                )));
            }
        }
        Ok(())
    }

    /// `N_S = n̄ M_S`, photons per temporal slot.
    pub fn photons_per_slot(&self) -> f64 {
        self.mean_photons_per_mode * self.spatial_modes as f64
    }

    /// `N = n̄ M_S M_T`.
    pub fn total_photons(&self) -> f64 {
        self.photons_per_slot() * self.temporal_modes as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionResult {
    /// `F_Q` in inverse squared length units.
    #[serde(with = "crate::float_serde")]
    pub qfi: f64,
    /// `1/√F_Q`; `+inf` when the probe carries no information.
    #[serde(with = "crate::float_serde")]
    pub delta_d: f64,
}

impl PrecisionResult {
    pub fn from_qfi(qfi: f64) -> Self {
        let delta_d = if qfi > 0.0 { qfi.sqrt().recip() } else { f64::INFINITY };
        Self { qfi, delta_d }
    }

    pub fn from_delta(delta_d: f64) -> Self {
        Self { qfi: delta_d.powi(-2), delta_d }
    }
}

fn expect_family(spec: &ProbeSpec, ok: bool, want: &str) -> Result<()> {
    spec.validate()?;
    if ok {
        Ok(())
    } else {
        Err(domain(format!("expected a {want} probe, got {}", spec.family.name())))
    }
}

/// Single-mode probe with `photons` mean photons in mode `j`:
/// `F_Q = 4 j N_S / r_R²`.
pub fn qfi_single_mode(spec: &ProbeSpec, photons: f64) -> Result<PrecisionResult> {
    let ProbeFamily::SingleMode { mode } = spec.family else {
        return Err(domain(format!("expected a single-mode probe, got {}", spec.family.name())));
    };
    spec.validate()?;
    if !(photons >= 0.0 && photons.is_finite()) {
        return Err(domain(format!("photon number must be non-negative, got {photons}")));
    }
    let r = spec.aperture_radius;
    Ok(PrecisionResult::from_qfi(4.0 * mode as f64 * photons / (r * r)))
}

/// Coherent state in the highest-order mode, `M_S` used in place of `M_S − 1`.
pub fn error_classical(spec: &ProbeSpec) -> Result<PrecisionResult> {
    expect_family(spec, spec.family == ProbeFamily::Classical, "classical")?;
    let ms = spec.spatial_modes as f64;
    let mt = spec.temporal_modes as f64;
    let delta = spec.aperture_radius / (2.0 * ms * (mt * spec.mean_photons_per_mode).sqrt());
    Ok(PrecisionResult::from_delta(delta))
}

fn ratio_for(spec: &ProbeSpec, nf: &NormalForm) -> Result<f64> {
    if nf.dim() != spec.spatial_modes {
        return Err(domain(format!(
            "normal form has dimension {} but M_S = {}",
            nf.dim(),
            spec.spatial_modes
        )));
    }
    Ok(nf.coupling_ratio())
}

/// Optimal entangled probe, `F_Q = (4 N² / r_R²) A²` with the appropriate budget.
pub fn error_entangled(spec: &ProbeSpec, nf: &NormalForm) -> Result<PrecisionResult> {
    let a = ratio_for(spec, nf)?;
    error_entangled_with_ratio(spec, a)
}

/// [`error_entangled`] from a precomputed `A`.
pub fn error_entangled_with_ratio(spec: &ProbeSpec, a: f64) -> Result<PrecisionResult> {
    expect_family(
        spec,
        matches!(
            spec.family,
            ProbeFamily::SpatialEntangled | ProbeFamily::SpatioTemporalEntangled
        ),
        "entangled",
    )?;
    let r = spec.aperture_radius;
    let per_slot = 4.0 * (spec.photons_per_slot() * a / r).powi(2);
    let qfi = match spec.family {
        // independent temporal slots add their information
        ProbeFamily::SpatialEntangled => spec.temporal_modes as f64 * per_slot,
        _ => 4.0 * (spec.total_photons() * a / r).powi(2),
    };
    Ok(PrecisionResult::from_qfi(qfi))
}

/// Gaussian squeezed-light transceiver with an even photon split `N_s = N_c = N/2`.
pub fn error_gaussian(spec: &ProbeSpec, nf: &NormalForm) -> Result<PrecisionResult> {
    let a = ratio_for(spec, nf)?;
    error_gaussian_with_ratio(spec, a)
}

/// [`error_gaussian`] from a precomputed `A`.
pub fn error_gaussian_with_ratio(spec: &ProbeSpec, a: f64) -> Result<PrecisionResult> {
    expect_family(spec, spec.family == ProbeFamily::GaussianSqueezed, "gaussian_squeezed")?;
    let n = spec.total_photons();
    let scaled = gaussian_error_scaled(a, n, n / 2.0)?;
    Ok(PrecisionResult::from_delta(spec.aperture_radius * scaled))
}

/// Dimensionless `δd̃ = √2 / (A √N) · 1 / (√(N_s + 1) + √N_s)`.
///
/// `n_squeezed = 0` gives the coherent-only value `√2 / (A √N)`.
pub fn gaussian_error_scaled(a: f64, n_total: f64, n_squeezed: f64) -> Result<f64> {
    if !(a > 0.0 && n_total > 0.0) || !(0.0..=n_total).contains(&n_squeezed) {
        return Err(domain(format!(
            "invalid Gaussian error arguments: A = {a}, N = {n_total}, N_s = {n_squeezed}"
        )));
    }
    Ok(2f64.sqrt() / (a * n_total.sqrt()) / ((n_squeezed + 1.0).sqrt() + n_squeezed.sqrt()))
}

/// Homodyne estimator standard deviation at `d̃ → 0` under the unit-vacuum
/// quadrature convention used by [`crate::gaussian`]:
/// `e^{−r} / (2 A √N_c)` with `sinh² r = N_s`, `N_s = f N`, `N_c = (1 − f) N`.
pub fn gaussian_homodyne_error(a: f64, n_total: f64, squeezed_fraction: f64) -> Result<f64> {
    if !(a > 0.0 && n_total > 0.0) || !(0.0..1.0).contains(&squeezed_fraction) {
        return Err(domain(format!(
            "invalid homodyne error arguments: A = {a}, N = {n_total}, f = {squeezed_fraction}"
        )));
    }
    let ns = squeezed_fraction * n_total;
    let nc = n_total - ns;
    let anti = (ns + 1.0).sqrt() + ns.sqrt(); // e^{r}
    Ok(1.0 / (2.0 * a * nc.sqrt() * anti))
}

/// Ratio of [`gaussian_error_scaled`] to [`gaussian_homodyne_error`] at an even split.
///
/// Independent of `A` and `N`: the homodyne readout of `Im(b̂′₀)` has vacuum
/// variance `1/4`, half the variance implied by the closed-form prefactor.
pub const GAUSSIAN_PREFACTOR_RATIO: f64 = 2.0;

/// Any-family dispatch; entangled and Gaussian families use `A` of `Γ(M_S)`.
pub fn precision(spec: &ProbeSpec) -> Result<PrecisionResult> {
    spec.validate()?;
    match spec.family {
        ProbeFamily::SingleMode { .. } => qfi_single_mode(spec, spec.total_photons()),
        ProbeFamily::Classical => error_classical(spec),
        ProbeFamily::SpatialEntangled | ProbeFamily::SpatioTemporalEntangled => {
            error_entangled_with_ratio(spec, coupling_ratio(&gamma_eigenvalues(spec.spatial_modes)?))
        }
        ProbeFamily::GaussianSqueezed => {
            error_gaussian_with_ratio(spec, coupling_ratio(&gamma_eigenvalues(spec.spatial_modes)?))
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Parameter grid for [`scaling_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub spatial_modes: Vec<usize>,
    pub temporal_modes: Vec<usize>,
    pub photons_per_mode: Vec<f64>,
    pub aperture_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SpatialModes,
    TemporalModes,
    PhotonsPerMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: String,
    pub spatial_modes: usize,
    pub temporal_modes: usize,
    pub n_bar: f64,
    pub aperture_radius: f64,
    #[serde(with = "crate::float_serde")]
    pub qfi: f64,
    #[serde(with = "crate::float_serde")]
    pub delta_d: f64,
    /// Set when the point violates the family's preconditions.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub family: ProbeFamily,
    pub rows: Vec<SweepRow>,
    /// Fitted `d ln δd / d ln x` along each axis with more than one value,
    /// holding the other parameters at their first grid value.
    pub exponents: BTreeMap<SweepAxis, f64>,
}

/// Evaluates `family` on the Cartesian product `M_S × M_T × n̄` (in that
/// nesting order) and fits per-axis log-log exponents.
pub fn scaling_sweep(family: ProbeFamily, grid: &SweepGrid) -> Result<SweepTable> {
    if grid.spatial_modes.is_empty() || grid.temporal_modes.is_empty() || grid.photons_per_mode.is_empty() {
        return Err(domain("sweep ranges must be nonempty"));
    }
    let points: Vec<(usize, usize, f64)> = grid
        .spatial_modes
        .iter()
        .flat_map(|&ms| {
            grid.temporal_modes.iter().flat_map(move |&mt| {
                grid.photons_per_mode.iter().map(move |&nb| (ms, mt, nb))
            })
        })
        .collect();

    let mut spatial: Vec<usize> = grid.spatial_modes.iter().copied().filter(|&m| m >= 2).collect();
    spatial.sort_unstable();
    spatial.dedup();
    let ratios: BTreeMap<usize, Result<f64>> = spatial
        .par_iter()
        .map(|&m| (m, gamma_eigenvalues(m).map(|l| coupling_ratio(&l))))
        .collect();

    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(ms, mt, nb)| {
            let outcome = ProbeSpec::new(family, ms, mt, nb, grid.aperture_radius).and_then(|spec| {
                match family {
                    ProbeFamily::SingleMode { .. } => qfi_single_mode(&spec, spec.total_photons()),
                    ProbeFamily::Classical => error_classical(&spec),
                    ProbeFamily::SpatialEntangled | ProbeFamily::SpatioTemporalEntangled => {
                        error_entangled_with_ratio(&spec, lookup(&ratios, ms)?)
                    }
                    ProbeFamily::GaussianSqueezed => {
                        error_gaussian_with_ratio(&spec, lookup(&ratios, ms)?)
                    }
                }
            });
            let (qfi, delta_d, error) = match outcome {
                Ok(p) => (p.qfi, p.delta_d, None),
                Err(e) => (f64::NAN, f64::NAN, Some(e.to_string())),
            };
            SweepRow {
                family: family.name(),
                spatial_modes: ms,
                temporal_modes: mt,
                n_bar: nb,
                aperture_radius: grid.aperture_radius,
                qfi,
                delta_d,
                error,
            }
        })
        .collect();

    let (ms0, mt0, nb0) = (grid.spatial_modes[0], grid.temporal_modes[0], grid.photons_per_mode[0]);
    let mut exponents = BTreeMap::new();
    let mut fit = |axis: SweepAxis, select: &dyn Fn(&SweepRow) -> Option<f64>| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.error.is_none())
            .filter_map(|r| select(r).map(|x| (x, r.delta_d)))
            .unzip();
        if let Some(slope) = loglog_slope(&xs, &ys) {
            exponents.insert(axis, slope);
        }
    };
    if grid.spatial_modes.len() > 1 {
        fit(SweepAxis::SpatialModes, &|r| {
            (r.temporal_modes == mt0 && r.n_bar == nb0).then_some(r.spatial_modes as f64)
        });
    }
    if grid.temporal_modes.len() > 1 {
        fit(SweepAxis::TemporalModes, &|r| {
            (r.spatial_modes == ms0 && r.n_bar == nb0).then_some(r.temporal_modes as f64)
        });
    }
    if grid.photons_per_mode.len() > 1 {
        fit(SweepAxis::PhotonsPerMode, &|r| {
            (r.spatial_modes == ms0 && r.temporal_modes == mt0).then_some(r.n_bar)
        });
    }
    Ok(SweepTable { family, rows, exponents })
}

fn lookup(ratios: &BTreeMap<usize, Result<f64>>, ms: usize) -> Result<f64> {
    match ratios.get(&ms) {
        Some(Ok(a)) => Ok(*a),
        Some(Err(e)) => Err(e.clone()),
        None => Err(Error::Consistency(format!("no coupling ratio cached for M_S = {ms}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{build_gamma, normal_form};

    fn spec(family: ProbeFamily, ms: usize, mt: usize, nb: f64, r: f64) -> ProbeSpec {
        ProbeSpec::new(family, ms, mt, nb, r).unwrap()
    }

    #[test]
    fn single_mode_values() {
        let s = spec(ProbeFamily::SingleMode { mode: 1 }, 3, 1, 1.0, 1.0);
        assert!((qfi_single_mode(&s, 4.0).unwrap().delta_d - 0.25).abs() < 1e-15);
        let s = spec(ProbeFamily::SingleMode { mode: 3 }, 5, 1, 1.0, 2.0);
        assert!((qfi_single_mode(&s, 3.0).unwrap().delta_d - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_mode_zero_index_has_no_information() {
        let s = spec(ProbeFamily::SingleMode { mode: 0 }, 2, 1, 1.0, 1.0);
        let p = qfi_single_mode(&s, 10.0).unwrap();
        assert_eq!(p.qfi, 0.0);
        assert_eq!(p.delta_d, f64::INFINITY);
    }

    #[test]
    fn single_mode_index_out_of_range() {
        let r = ProbeSpec::new(ProbeFamily::SingleMode { mode: 3 }, 4, 1, 1.0, 1.0);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(ProbeSpec::new(ProbeFamily::Classical, 1, 1, 1.0, 1.0).is_err());
        assert!(ProbeSpec::new(ProbeFamily::Classical, 2, 0, 1.0, 1.0).is_err());
        assert!(ProbeSpec::new(ProbeFamily::Classical, 2, 1, 0.0, 1.0).is_err());
        assert!(ProbeSpec::new(ProbeFamily::Classical, 2, 1, 1.0, -1.0).is_err());
    }

    #[test]
    fn classical_value_and_scaling() {
        let base = error_classical(&spec(ProbeFamily::Classical, 2, 1, 1.0, 1.0)).unwrap();
        assert!((base.delta_d - 0.25).abs() < 1e-15);
        let mt2 = error_classical(&spec(ProbeFamily::Classical, 2, 2, 1.0, 1.0)).unwrap();
        assert!((mt2.delta_d / base.delta_d - 0.5f64.sqrt()).abs() < 1e-15);
        let ms2 = error_classical(&spec(ProbeFamily::Classical, 4, 1, 1.0, 1.0)).unwrap();
        assert!((ms2.delta_d / base.delta_d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wrong_family_is_rejected() {
        let s = spec(ProbeFamily::Classical, 2, 1, 1.0, 1.0);
        let nf = normal_form(&build_gamma(2).unwrap()).unwrap();
        assert!(error_entangled(&s, &nf).is_err());
        assert!(error_gaussian(&s, &nf).is_err());
        assert!(qfi_single_mode(&s, 1.0).is_err());
        let e = spec(ProbeFamily::SpatialEntangled, 2, 1, 1.0, 1.0);
        assert!(error_classical(&e).is_err());
    }

    #[test]
    fn entangled_two_modes() {
        let nf = normal_form(&build_gamma(2).unwrap()).unwrap();
        let s = spec(ProbeFamily::SpatialEntangled, 2, 1, 2.0, 1.0);
        let p = error_entangled(&s, &nf).unwrap();
        assert!((p.delta_d - 0.125).abs() < 1e-15);
        assert!((p.qfi - 64.0).abs() < 1e-12);
    }

    #[test]
    fn entangled_dimension_mismatch() {
        let nf = normal_form(&build_gamma(4).unwrap()).unwrap();
        let s = spec(ProbeFamily::SpatialEntangled, 2, 1, 2.0, 1.0);
        assert!(error_entangled(&s, &nf).is_err());
    }

    #[test]
    fn gaussian_two_modes() {
        let nf = normal_form(&build_gamma(2).unwrap()).unwrap();
        let s = spec(ProbeFamily::GaussianSqueezed, 2, 1, 1.0, 1.0);
        let p = error_gaussian(&s, &nf).unwrap();
        assert!((p.delta_d - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_coherent_only_limit() {
        let v = gaussian_error_scaled(1.7, 9.0, 0.0).unwrap();
        assert!((v - 2f64.sqrt() / (1.7 * 3.0)).abs() < 1e-15);
        assert!(gaussian_error_scaled(1.0, 4.0, 5.0).is_err());
    }

    #[test]
    fn gaussian_prefactor_ratio() {
        for (a, n) in [(1.0, 2.0), (3.3, 17.0), (9.0, 1e4)] {
            let scaled = gaussian_error_scaled(a, n, n / 2.0).unwrap();
            let homodyne = gaussian_homodyne_error(a, n, 0.5).unwrap();
            assert!((scaled / homodyne - GAUSSIAN_PREFACTOR_RATIO).abs() < 1e-12);
        }
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = (1..6).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.25)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 1.25).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn sweep_marks_invalid_rows() {
        let grid = SweepGrid {
            spatial_modes: vec![1, 2, 4],
            temporal_modes: vec![1],
            photons_per_mode: vec![1.0],
            aperture_radius: 1.0,
        };
        let t = scaling_sweep(ProbeFamily::Classical, &grid).unwrap();
        assert!(t.rows[0].error.is_some());
        assert!(t.rows[1].error.is_none());
        assert!((t.exponents[&SweepAxis::SpatialModes] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_rejects_empty_ranges() {
        let grid = SweepGrid {
            spatial_modes: vec![],
            temporal_modes: vec![1],
            photons_per_mode: vec![1.0],
            aperture_radius: 1.0,
        };
        assert!(scaling_sweep(ProbeFamily::Classical, &grid).is_err());
    }
}
