//! Simulation of a neutron polarimetry measurement of the Pancharatnam phase
//! for pure and partially polarized spin states.
//!
//! A beam polarized to degree `r0` along `+z` passes a π/2 turner, a guide
//! field precession, a spin-rotator coil implementing `U₀(ξ, δ, ζ)`, a second
//! precession and a second turner before an analyzer selects spin-up. Scanning
//! the precession angle `η` gives an intensity curve whose extrema fix the
//! phase. Flipper-on and flipper-off scans are combined to emulate any
//! polarization between 0 and `r0`.
//!
//! ```
//! use polariphase::{mixed_state_phase, Su2Params};
//!
//! let p = Su2Params::new(1.71, 0.38, -1.46);
//! let phi = mixed_state_phase(0.976, &p).unwrap().phi;
//! assert!((phi.abs() - 0.3717).abs() < 1e-4);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod beamline;
pub mod constants;
pub mod counting;
pub mod spin;

pub use analysis::{
    fit_harmonic, mix_scans, normalize_counts, phase_from_extrema_mixed, phase_from_extrema_pure, run_pipeline,
    AnalysisError, CountMode, ExtremaEstimate, FitMode, FitResult, IntensityScan, MixingSpec, PhaseFlag, PhaseResult,
    PipelineOptions, PipelineReport,
};
pub use beamline::{
    analytic_extrema, mixed_intensity, observed_intensity, propagate, propagate_second_order, pure_intensity, Beamline,
    BeamlineConfig, BeamlineError, CoilSpec, Order, ScanPlan,
};
pub use counting::{expectation_scan, simulate_scan, Channel, CountingError, CountingPlan, ScanRecord};
pub use spin::{
    axis_angle_to_matrix, bloch_apply, mixed_state_phase, pancharatnam_phase, params_from_matrix, su2_from_params,
    AxisAngle, BlochState, Operator2, SpinError, Spinor, Su2Params,
};
