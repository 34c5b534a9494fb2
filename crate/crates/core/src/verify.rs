//! Self-check suites run by `qpointing verify`.
//!
//! Each check compares a computed quantity against an independent value and
//! reports the worst residual. These are quick build sanity checks; the full
//! oracle tests live in the test targets.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coupling::{build_gamma, gamma_eigenvalues, normal_form, schatten_sums};
use crate::error::{domain, Error, Result};
use crate::gaussian::{
    beamsplitter_array, estimator_moments, pair_map, passive_symplectic, prepare_probe, simulate,
    spatio_temporal_extend, symplectic_residual, Encoding, TransceiverConfig,
};
use crate::hermite::{hermite_functions, numeric_coupling, overlap_matrix, HermiteBasis};
use crate::fisher::gaussian_homodyne_error;
use crate::spin::{optimal_probe, variance_bound, variance_of, BlockState, SpinBlock, TensorState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Hermite,
    Coupling,
    Spin,
    Gaussian,
    All,
}

impl Suite {
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Hermite, Suite::Coupling, Suite::Spin, Suite::Gaussian],
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Hermite => "hermite",
            Suite::Coupling => "coupling",
            Suite::Spin => "spin",
            Suite::Gaussian => "gaussian",
            Suite::All => "all",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hermite" => Ok(Suite::Hermite),
            "coupling" => Ok(Suite::Coupling),
            "spin" => Ok(Suite::Spin),
            "gaussian" => Ok(Suite::Gaussian),
            "all" => Ok(Suite::All),
            other => Err(domain(format!("unknown suite {other:?}"))),
        }
    }
}

/// One line of the pass/fail table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub suite: String,
    pub check: String,
    pub passed: bool,
    #[serde(with = "crate::float_serde")]
    pub residual: f64,
    #[serde(with = "crate::float_serde")]
    pub tolerance: f64,
    pub detail: String,
}

struct Recorder {
    suite: Suite,
    rows: Vec<CheckRow>,
}

impl Recorder {
    fn push(&mut self, check: &str, outcome: Result<f64>, tolerance: f64) {
        let (passed, residual, detail) = match outcome {
            Ok(r) => (r <= tolerance, r, String::new()),
            Err(e) => (false, f64::NAN, e.to_string()),
        };
        self.rows.push(CheckRow {
            suite: self.suite.to_string(),
            check: check.to_string(),
            passed,
            residual,
            tolerance,
            detail,
        });
    }
}

/// Runs `suite` (all four for [`Suite::All`]) and returns one row per check.
pub fn run_suite(suite: Suite) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    for s in suite.expand() {
        let mut rec = Recorder { suite: s, rows: Vec::new() };
        match s {
            Suite::Hermite => hermite_checks(&mut rec),
            Suite::Coupling => coupling_checks(&mut rec),
            Suite::Spin => spin_checks(&mut rec),
            Suite::Gaussian => gaussian_checks(&mut rec),
            Suite::All => unreachable!(),
        }
        rows.extend(rec.rows);
    }
    rows
}

fn max_over<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    let mut worst = 0.0f64;
    for r in it {
        worst = worst.max(r?);
    }
    Ok(worst)
}

fn hermite_checks(rec: &mut Recorder) {
    rec.push(
        "gram_identity_m16",
        HermiteBasis::unit(16)
            .and_then(|b| b.gram())
            .map(|g| (g - nalgebra::DMatrix::identity(16, 16)).amax()),
        1e-12,
    );
    rec.push(
        "overlap_at_zero_is_identity",
        HermiteBasis::unit(12)
            .and_then(|b| overlap_matrix(&b, 0.0))
            .map(|s| (s.entries - nalgebra::DMatrix::identity(12, 12)).amax()),
        1e-12,
    );
    rec.push(
        "finite_difference_coupling_m2_to_10",
        max_over((2..=10).map(|m| {
            let numeric = numeric_coupling(&HermiteBasis::unit(m)?, 1e-4)?;
            Ok((numeric - build_gamma(m)?.entries()).amax())
        })),
        1e-6,
    );
    // ψ_0 at the origin is π^{-1/4}
    rec.push(
        "psi0_at_origin",
        hermite_functions(0, 0.0).map(|v| (v[0] - std::f64::consts::PI.powf(-0.25)).abs()),
        1e-15,
    );
}

fn coupling_checks(rec: &mut Recorder) {
    rec.push(
        "normal_form_block_residual_m2_to_64",
        max_over((2..=64).map(|m| {
            let g = build_gamma(m)?;
            Ok(normal_form(&g)?.block_residual(&g))
        })),
        1e-10,
    );
    rec.push(
        "normal_form_orthogonality_m2_to_64",
        max_over((2..=64).map(|m| Ok(normal_form(&build_gamma(m)?)?.orthogonality_residual()))),
        1e-12,
    );
    rec.push(
        "quadratic_sum_m_m_minus_1_over_2",
        max_over((2..=128).map(|m| {
            let s = schatten_sums(&normal_form(&build_gamma(m)?)?);
            let want = (m * (m - 1)) as f64 / 2.0;
            Ok((s.sum_lambda_sq - want).abs() / want)
        })),
        1e-9,
    );
    // λ/√2 must be a zero of ψ_M, i.e. of H_M
    rec.push(
        "eigenvalues_are_hermite_roots_m2_to_20",
        max_over((2..=20).map(|m| {
            let lam = gamma_eigenvalues(m)?;
            max_over(lam.iter().map(|l| {
                let x = l / std::f64::consts::SQRT_2;
                let psi = hermite_functions(m, x)?;
                let scale = psi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                Ok(psi[m].abs() / scale)
            }))
        })),
        1e-9,
    );
}

fn spin_configs() -> Vec<Vec<(usize, f64)>> {
    vec![
        vec![(1, 1.0)],
        vec![(4, 0.7)],
        vec![(1, 1.0), (1, 3f64.sqrt())],
        vec![(3, 1.2), (2, 0.4), (5, 2.1)],
        vec![(2, 1.0), (2, 1.0), (2, 1.0), (2, 1.0)],
    ]
}

fn blocks_of(cfg: &[(usize, f64)]) -> Result<Vec<SpinBlock>> {
    cfg.iter().enumerate().map(|(k, &(n, l))| SpinBlock::new(k + 1, n, l)).collect()
}

fn spin_checks(rec: &mut Recorder) {
    rec.push(
        "optimal_probe_saturates_bound",
        max_over(spin_configs().iter().map(|c| {
            let blocks = blocks_of(c)?;
            let bound = variance_bound(&blocks)?;
            let (_, var) = variance_of(&optimal_probe(&blocks)?.state, &blocks)?;
            Ok((var - bound * bound).abs() / (bound * bound))
        })),
        1e-10,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    rec.push(
        "random_states_within_bound",
        max_over(spin_configs().iter().map(|c| {
            let blocks = blocks_of(c)?;
            let bound = variance_bound(&blocks)?;
            let dims: Vec<usize> = blocks.iter().map(SpinBlock::dim).collect();
            max_over((0..100).map(|_| {
                let s = TensorState::random(&dims, &mut rng)?;
                Ok((variance_of(&s, &blocks)?.1 - bound * bound).max(0.0))
            }))
        })),
        1e-9,
    );
    rec.push(
        "coherent_analog_variance_j_times_n",
        max_over((1..=6).flat_map(|j| (1..=8).map(move |n| (j, n))).map(|(j, n)| {
            let blocks = [SpinBlock::new(j, n, (j as f64).sqrt())?];
            let s = TensorState::product(&[BlockState::top(n)])?;
            Ok((variance_of(&s, &blocks)?.1 - (j * n) as f64).abs())
        })),
        1e-9,
    );
}

fn gaussian_cfg(ms: usize, n: f64, f: f64, d: f64) -> TransceiverConfig {
    TransceiverConfig {
        spatial_modes: ms,
        temporal_modes: 1,
        total_photons: n,
        squeezed_fraction: f,
        displacement_true: d,
        seed: 5,
    }
}

fn gaussian_checks(rec: &mut Recorder) {
    rec.push(
        "passive_maps_symplectic",
        max_over([2usize, 4, 8].iter().map(|&ms| {
            let sp = spatio_temporal_extend(&gaussian_cfg(ms, 10.0, 0.5, 0.0))?;
            let b = beamsplitter_array(&sp.allocation)?;
            let cb = b.map(|v| num_complex::Complex64::new(v, 0.0));
            let mzi = passive_symplectic(&pair_map(0.37, Encoding::ExactMzi));
            Ok(symplectic_residual(&passive_symplectic(&cb))
                .max(symplectic_residual(&passive_symplectic(&cb.transpose())))
                .max(symplectic_residual(&mzi)))
        })),
        1e-12,
    );
    rec.push(
        "photon_budget",
        max_over([2usize, 4, 8].iter().map(|&ms| {
            let c = gaussian_cfg(ms, 16.0, 0.5, 0.0);
            let sp = spatio_temporal_extend(&c)?;
            Ok((prepare_probe(&c, &sp.allocation)?.total_photons() - 16.0).abs())
        })),
        1e-9,
    );
    rec.push(
        "closed_form_matches_homodyne_formula",
        max_over([2usize, 4, 8].iter().map(|&ms| {
            let c = gaussian_cfg(ms, 20.0, 0.5, 0.0);
            let sp = spatio_temporal_extend(&c)?;
            let (_, var) = estimator_moments(&prepare_probe(&c, &sp.allocation)?, &c, &sp)?;
            let want = gaussian_homodyne_error(sp.coupling_ratio, 20.0, 0.5)?;
            Ok((var.sqrt() / want - 1.0).abs())
        })),
        1e-12,
    );
    rec.push(
        "extension_keeps_coupling_ratio",
        max_over((1..=16).map(|mt| {
            let mut c = gaussian_cfg(6, 10.0, 0.5, 0.0);
            let base = spatio_temporal_extend(&c)?.coupling_ratio;
            c.temporal_modes = mt;
            Ok((spatio_temporal_extend(&c)?.coupling_ratio - base).abs())
        })),
        1e-12,
    );
    // z-score of the Monte Carlo mean; 4 standard errors allowed
    rec.push(
        "estimator_unbiased_z",
        max_over([0.0, 1e-3, 1e-2].iter().map(|&d| {
            let r = simulate(&gaussian_cfg(4, 20.0, 0.5, d), Encoding::Linearized, 20_000)?;
            Ok((r.estimate_mean - d).abs() / r.standard_error)
        })),
        4.0,
    );
}
