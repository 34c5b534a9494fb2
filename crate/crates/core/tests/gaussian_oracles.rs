use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qpointing_core::gaussian::{
    beamsplitter_array, encode_displacement, estimator_moments, measure_and_estimate, pair_map,
    passive_symplectic, prepare_probe, prepare_probe_with, spatio_temporal_extend,
    symplectic_residual, Quadrature, LINEARIZED_PHASE_LIMIT,
};
use qpointing_core::{simulate, Encoding, EstimationReport, GaussianState, TransceiverConfig};

fn cfg(ms: usize, mt: usize, n: f64, f: f64, d: f64) -> TransceiverConfig {
    TransceiverConfig {
        spatial_modes: ms,
        temporal_modes: mt,
        total_photons: n,
        squeezed_fraction: f,
        displacement_true: d,
        seed: 2024,
    }
}

/// Exact MZI on a pair as a closed 2×2 complex matrix.
fn mzi_closed(theta: f64) -> DMatrix<Complex64> {
    let p = Complex64::from_polar(1.0, -2.0 * theta);
    let one = Complex64::new(1.0, 0.0);
    DMatrix::from_row_slice(2, 2, &[(one + p) / 2.0, (one - p) / 2.0, (one - p) / 2.0, (one + p) / 2.0])
}

#[test]
fn exact_mzi_matches_closed_form() {
    for theta in [0.0, 1e-3, 0.2, 1.3] {
        let a = pair_map(theta, Encoding::ExactMzi);
        assert!((a - mzi_closed(theta)).camax() < 1e-15);
    }
}

#[test]
fn extension_examples() {
    let sp = spatio_temporal_extend(&cfg(2, 3, 1.0, 0.5, 0.0)).unwrap();
    assert_eq!(sp.pairs(), 3);
    assert!(sp.lambdas.iter().all(|l| (l - 1.0).abs() < 1e-14));
    assert!(sp.allocation.iter().all(|c| (c - 1.0 / 3.0).abs() < 1e-15));
    assert!((sp.coupling_ratio - 1.0).abs() < 1e-14);
    let one = spatio_temporal_extend(&cfg(4, 1, 1.0, 0.5, 0.0)).unwrap();
    let two = spatio_temporal_extend(&cfg(4, 2, 1.0, 0.5, 0.0)).unwrap();
    assert!((one.coupling_ratio - two.coupling_ratio).abs() < 1e-12);
    assert!((two.allocation.iter().sum::<f64>() - 1.0).abs() < 1e-14);
}

#[test]
fn one_photon_squeezing() {
    let c = cfg(2, 1, 2.0, 0.5, 0.0);
    let sp = spatio_temporal_extend(&c).unwrap();
    let s = prepare_probe_with(&c, &sp.allocation, Quadrature::Position).unwrap();
    let r = (1.0 + 2f64.sqrt()).ln();
    assert!((s.cov[(0, 0)] - (-2.0 * r).exp()).abs() < 1e-12);
    assert!((s.cov[(1, 1)] - (2.0 * r).exp()).abs() < 1e-12);
    let auto = prepare_probe(&c, &sp.allocation).unwrap();
    // the signal sits in p, so calibration squeezes p
    assert!((auto.cov[(1, 1)] - (-2.0 * r).exp()).abs() < 1e-12);
}

#[test]
fn allocation_validation() {
    let c = cfg(4, 1, 2.0, 0.5, 0.0);
    assert!(prepare_probe(&c, &[0.5, 0.6]).is_err());
    assert!(prepare_probe(&c, &[1.0]).is_err());
    assert!(prepare_probe(&c, &[1.2, -0.2]).is_err());
}

#[test]
fn zero_displacement_is_identity() {
    let c = cfg(6, 2, 9.0, 0.5, 0.0);
    let sp = spatio_temporal_extend(&c).unwrap();
    let s = prepare_probe(&c, &sp.allocation).unwrap();
    for enc in [Encoding::Linearized, Encoding::ExactMzi] {
        let out = encode_displacement(&s, &sp, 0.0, enc).unwrap();
        assert!((&out.mean - &s.mean).amax() < 1e-15);
        assert!((&out.cov - &s.cov).amax() < 1e-14);
    }
}

#[test]
fn signal_mean_per_pair() {
    let c = cfg(8, 1, 20.0, 0.5, 4e-3);
    let sp = spatio_temporal_extend(&c).unwrap();
    let s = prepare_probe(&c, &sp.allocation).unwrap();
    let out = encode_displacement(&s, &sp, 4e-3, Encoding::Linearized).unwrap();
    let nc = c.coherent_photons();
    for (k, (&lam, &ck)) in sp.lambdas.iter().zip(&sp.allocation).enumerate() {
        let want = lam * (ck * nc).sqrt() * 4e-3;
        let got = out.amplitude(k);
        assert!((got.im - want).abs() < 1e-14 && got.re.abs() < 1e-14, "k={k}");
    }
}

#[test]
fn linearization_error_is_second_order() {
    let c = cfg(4, 1, 10.0, 0.5, 0.0);
    let sp = spatio_temporal_extend(&c).unwrap();
    let s = prepare_probe(&c, &sp.allocation).unwrap();
    let gap = |d: f64| {
        let a = encode_displacement(&s, &sp, d, Encoding::Linearized).unwrap();
        let b = encode_displacement(&s, &sp, d, Encoding::ExactMzi).unwrap();
        (a.mean - b.mean).norm()
    };
    let ratio = gap(1e-2) / gap(1e-3);
    assert!((ratio - 100.0).abs() < 5.0, "ratio {ratio}");
}

#[test]
fn exact_mzi_needs_no_guard() {
    let c = cfg(8, 1, 10.0, 0.5, 0.2);
    let sp = spatio_temporal_extend(&c).unwrap();
    let s = prepare_probe(&c, &sp.allocation).unwrap();
    let lmax = sp.lambdas[0];
    assert!(lmax * 0.2 > LINEARIZED_PHASE_LIMIT);
    let err = encode_displacement(&s, &sp, 0.2, Encoding::Linearized).unwrap_err();
    assert!(err.to_string().contains("exact"));
    let out = encode_displacement(&s, &sp, 0.2, Encoding::ExactMzi).unwrap();
    out.check_physical().unwrap();
    assert!((out.total_photons() - 10.0).abs() < 1e-9);
}

#[test]
fn squeezing_benefit_ratio() {
    let n = 40.0;
    let squeezed = simulate(&cfg(4, 1, n, 0.5, 1e-3), Encoding::Linearized, 100_000).unwrap();
    let plain = simulate(&cfg(4, 1, n, 0.0, 1e-3), Encoding::Linearized, 100_000).unwrap();
    let ns: f64 = n / 2.0;
    let want = 2f64.sqrt() / ((ns + 1.0).sqrt() + ns.sqrt());
    let got = squeezed.estimate_std / plain.estimate_std;
    assert!((got / want - 1.0).abs() < 0.05, "{got} vs {want}");
}

#[test]
fn report_invariants_and_round_trip() {
    let r = simulate(&cfg(2, 1, 2.0, 0.5, 0.01), Encoding::Linearized, 100_000).unwrap();
    assert_eq!(r.trials, 100_000);
    assert!((r.standard_error - r.estimate_std / (r.trials as f64).sqrt()).abs() < 1e-18);
    assert!((r.estimate_mean - 0.01).abs() < 4.0 * r.standard_error);
    let json = serde_json::to_string(&r).unwrap();
    let back: EstimationReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
}

#[test]
fn seed_changes_samples() {
    let a = simulate(&cfg(4, 1, 8.0, 0.5, 0.0), Encoding::Linearized, 5_000).unwrap();
    let mut c = cfg(4, 1, 8.0, 0.5, 0.0);
    c.seed += 1;
    let b = simulate(&c, Encoding::Linearized, 5_000).unwrap();
    assert_ne!(a.estimate_mean, b.estimate_mean);
    assert_eq!(a.closed_form_std, b.closed_form_std);
}

#[test]
fn trials_validation() {
    let c = cfg(2, 1, 2.0, 0.5, 0.0);
    assert!(simulate(&c, Encoding::Linearized, 1).is_err());
    let sp = spatio_temporal_extend(&c).unwrap();
    let s = GaussianState::vacuum(3);
    assert!(measure_and_estimate(&s, &c, &sp, 100).is_err());
}

#[test]
fn uncertainty_relation_detects_violation() {
    let mut s = GaussianState::vacuum(2);
    s.cov[(2, 2)] = 0.1;
    s.cov[(3, 3)] = 0.1;
    assert!(s.check_physical().is_err());
    let mut t = GaussianState::vacuum(1);
    t.cov[(0, 1)] = 0.3;
    assert!(t.check_physical().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn passive_maps_are_symplectic(
        ms in (1usize..=8).prop_map(|k| 2 * k),
        mt in 1usize..=3,
        theta in -3.0f64..3.0,
    ) {
        let sp = spatio_temporal_extend(&cfg(ms, mt, 5.0, 0.5, 0.0)).unwrap();
        let b = beamsplitter_array(&sp.allocation).unwrap().map(|v| Complex64::new(v, 0.0));
        prop_assert!(symplectic_residual(&passive_symplectic(&b)) < 1e-12);
        prop_assert!(symplectic_residual(&passive_symplectic(&b.transpose())) < 1e-12);
        prop_assert!(symplectic_residual(&passive_symplectic(&pair_map(theta, Encoding::ExactMzi))) < 1e-12);
    }

    #[test]
    fn probe_is_physical_with_exact_budget(
        ms in (1usize..=6).prop_map(|k| 2 * k),
        mt in 1usize..=3,
        n in 0.5f64..200.0,
        f in 0.0f64..0.95,
    ) {
        let c = cfg(ms, mt, n, f, 0.0);
        let sp = spatio_temporal_extend(&c).unwrap();
        let s = prepare_probe(&c, &sp.allocation).unwrap();
        prop_assert!((s.total_photons() - n).abs() < 1e-9 * n.max(1.0));
        prop_assert!(s.check_physical().is_ok());
        prop_assert!((&s.cov - s.cov.transpose()).amax() < 1e-12);
    }

    #[test]
    fn mean_estimator_is_exactly_linear(
        ms in (1usize..=4).prop_map(|k| 2 * k),
        n in 1.0f64..100.0,
        d in -5e-3f64..5e-3,
    ) {
        let c = cfg(ms, 1, n, 0.5, d);
        let sp = spatio_temporal_extend(&c).unwrap();
        let s = prepare_probe(&c, &sp.allocation).unwrap();
        let out = encode_displacement(&s, &sp, d, Encoding::Linearized).unwrap();
        let (mu, _) = estimator_moments(&out, &c, &sp).unwrap();
        prop_assert!((mu - d).abs() < 1e-14);
    }
}
