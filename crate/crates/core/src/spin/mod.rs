//! Exact spin-1/2 algebra: spinors, 2×2 operators, SU(2) parameterizations,
//! density matrices and the closed-form phase formulas.
//!
//! Everything here is an immutable value type over `f64`; tolerances are
//! absolute.

mod operator;
mod phase;
mod state;
mod su2;

use thiserror::Error;

pub use operator::Operator2;
pub use phase::{mixed_state_phase, pancharatnam_phase, MixedStatePhase, ORTHOGONALITY_TOL};
pub use state::{bloch_apply, BlochState, Spinor};
pub use su2::{
    axis_angle_to_matrix, params_from_matrix, su2_from_params, wrap_half_pi, wrap_pi, AxisAngle, Degeneracy,
    Su2Inverse, Su2Params, DEGENERACY_TOL, SU2_INPUT_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("matrix is not special unitary (|U†U − 1| = {unitarity_defect:.3e}, |det U − 1| = {det_defect:.3e})")]
    NotSpecialUnitary { unitarity_defect: f64, det_defect: f64 },
    #[error("rotation axis has zero length but the angle is nonzero")]
    ZeroAxis,
    #[error("spinor has zero norm")]
    ZeroNorm,
    #[error("non-finite input")]
    NonFinite,
    #[error("polarization degree {0} is outside [0, 1]")]
    PolarizationOutOfRange(f64),
    #[error("cos ξ vanishes at ξ = {0}; the relative phase is undefined")]
    DegenerateCosXi(f64),
}
