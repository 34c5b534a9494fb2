//! Quantum limits on transverse beam-pointing estimation with Hermite-Gaussian
//! mode probes.
//!
//! The crate covers the mode overlap and coupling matrices, the normal form
//! that decouples displacement into independent interferometers, analytic
//! Fisher-information bounds for several probe families, an exact spin
//! oracle for the entangled bound, and a Gaussian-state simulator for the
//! squeezed-light transceiver.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod error;
pub mod fisher;
pub mod float_serde;
pub mod gaussian;
pub mod hermite;
pub mod spin;
pub mod tridiag;
pub mod verify;

pub use coupling::{
    build_gamma, coupling_ratio, gamma_eigenvalues, normal_form, photon_allocation, schatten_sums,
    CouplingMatrix, NormalForm, SchattenSums,
};
pub use error::{Error, Result};
pub use fisher::{
    precision, scaling_sweep, PrecisionResult, ProbeFamily, ProbeSpec, SweepAxis, SweepGrid, SweepRow,
    SweepTable,
};
pub use gaussian::{
    simulate, Encoding, EstimationReport, GaussianState, PairSpectrum, TransceiverConfig,
};
pub use hermite::{GaussHermite, HermiteBasis, OverlapMatrix};
pub use spin::{BlockState, SpinBlock, TensorState};
pub use tridiag::SymTridiagonal;
pub use verify::{run_suite, CheckRow, Suite};
