use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use super::state::norm3;
use super::{Operator2, SpinError};

/// Tolerance used when deciding that `sin ξ` or `cos ξ` vanishes.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Tolerance on `U†U = 1` and `det U = 1` accepted by the inverse maps.
pub const SU2_INPUT_TOL: f64 = 1e-9;

/// Wraps an angle into `(−π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Wraps an angle into `(−π/2, π/2]`.
pub fn wrap_half_pi(x: f64) -> f64 {
    let y = x.rem_euclid(PI);
    if y > FRAC_PI_2 {
        y - PI
    } else {
        y
    }
}

/// The three-angle SU(2) parameterization
///
/// ```text
/// U₀(ξ, δ, ζ) = [ e^{iδ} cos ξ   −e^{−iζ} sin ξ ]
///               [ e^{iζ} sin ξ    e^{−iδ} cos ξ ]
/// ```
///
/// The canonical ranges produced by [`Su2Params::from_matrix`] are
/// `ξ ∈ [0, π]`, `δ ∈ (−π/2, π/2]`, `ζ ∈ (−π, π]`. Restricting `δ` to a
/// half-open interval of length π is what makes the inverse single-valued:
/// `(ξ, δ)` and `(π − ξ, δ + π)` give the same matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2Params {
    pub xi: f64,
    pub delta: f64,
    pub zeta: f64,
}

/// Which angles are undetermined by the matrix, and what was assumed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degeneracy {
    None,
    /// `sin ξ = 0`: only `δ` is defined, `ζ` set to 0.
    DeltaOnly,
    /// `cos ξ = 0`: only `ζ` is defined, `δ` set to 0.
    ZetaOnly,
}

/// Result of inverting an SU(2) matrix into [`Su2Params`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2Inverse {
    pub params: Su2Params,
    pub degeneracy: Degeneracy,
}

impl Su2Params {
    pub const fn new(xi: f64, delta: f64, zeta: f64) -> Self {
        Self { xi, delta, zeta }
    }

    pub fn to_matrix(&self) -> Operator2 {
        let (s, c) = self.xi.sin_cos();
        Operator2::new([
            [
                Complex64::from_polar(c, self.delta),
                -Complex64::from_polar(s, -self.zeta),
            ],
            [
                Complex64::from_polar(s, self.zeta),
                Complex64::from_polar(c, -self.delta),
            ],
        ])
    }

    /// Inverts [`Su2Params::to_matrix`] into canonical ranges.
    pub fn from_matrix(u: &Operator2) -> Result<Su2Inverse, SpinError> {
        u.ensure_special_unitary(SU2_INPUT_TOL)?;
        let a = u.entry(0, 0);
        let c = u.entry(1, 0);
        let (abs_a, abs_c) = (a.norm(), c.norm());

        if abs_a < DEGENERACY_TOL {
            return Ok(Su2Inverse {
                params: Su2Params::new(FRAC_PI_2, 0.0, wrap_pi(c.arg())),
                degeneracy: Degeneracy::ZetaOnly,
            });
        }

        let theta = a.arg();
        let delta = wrap_half_pi(theta);
        // theta − delta is a multiple of π; an odd multiple means cos ξ < 0.
        let turns = ((theta - delta) / PI).round() as i64;
        let cos_xi = if turns.rem_euclid(2) == 0 { abs_a } else { -abs_a };

        if abs_c < DEGENERACY_TOL {
            let xi = if cos_xi > 0.0 { 0.0 } else { PI };
            return Ok(Su2Inverse {
                params: Su2Params::new(xi, delta, 0.0),
                degeneracy: Degeneracy::DeltaOnly,
            });
        }

        Ok(Su2Inverse {
            params: Su2Params::new(abs_c.atan2(cos_xi), delta, wrap_pi(c.arg())),
            degeneracy: Degeneracy::None,
        })
    }

    /// Same transformation expressed in canonical ranges.
    pub fn canonical(&self) -> Su2Params {
        Self::from_matrix(&self.to_matrix())
            .expect("to_matrix is special unitary")
            .params
    }

    /// `arg cos ξ`: 0 for `cos ξ > 0`, π for `cos ξ < 0`.
    pub fn arg_cos_xi(&self) -> Result<f64, SpinError> {
        let c = self.xi.cos();
        if c.abs() < DEGENERACY_TOL {
            Err(SpinError::DegenerateCosXi(self.xi))
        } else if c > 0.0 {
            Ok(0.0)
        } else {
            Ok(PI)
        }
    }
}

/// `U₀(ξ, δ, ζ)` as a matrix.
pub fn su2_from_params(p: &Su2Params) -> Operator2 {
    p.to_matrix()
}

/// Canonical `(ξ, δ, ζ)` of a special-unitary matrix.
pub fn params_from_matrix(u: &Operator2) -> Result<Su2Inverse, SpinError> {
    Su2Params::from_matrix(u)
}

/// Rotation `exp(−i α n̂·σ/2)` given by a unit axis and an angle.
///
/// Under `ρ → UρU†` this turns the Bloch vector right-handedly about `+n̂`
/// through `+α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisAngle {
    axis: [f64; 3],
    angle: f64,
}

impl AxisAngle {
    pub const X: [f64; 3] = [1.0, 0.0, 0.0];
    pub const Y: [f64; 3] = [0.0, 1.0, 0.0];
    pub const Z: [f64; 3] = [0.0, 0.0, 1.0];

    /// Normalizes `axis`. A zero axis is only accepted together with a zero
    /// angle, in which case `+z` is stored.
    pub fn new(axis: [f64; 3], angle: f64) -> Result<Self, SpinError> {
        let n = norm3(axis);
        if !angle.is_finite() || !n.is_finite() {
            return Err(SpinError::NonFinite);
        }
        if n < 1e-12 {
            if angle == 0.0 {
                return Ok(Self { axis: Self::Z, angle });
            }
            return Err(SpinError::ZeroAxis);
        }
        Ok(Self {
            axis: axis.map(|v| v / n),
            angle,
        })
    }

    /// Builds a rotation from its rotation vector `α⃗ = α n̂`.
    pub fn from_rotation_vector(v: [f64; 3]) -> Self {
        let a = norm3(v);
        if a < 1e-300 {
            Self {
                axis: Self::Z,
                angle: 0.0,
            }
        } else {
            Self {
                axis: v.map(|c| c / a),
                angle: a,
            }
        }
    }

    pub fn about(axis: [f64; 3], angle: f64) -> Self {
        Self::new(axis, angle).expect("fixed nonzero axis")
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Same rotation with the angle scaled by `k` about the same axis.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            axis: self.axis,
            angle: self.angle * k,
        }
    }

    /// Equivalent SU(2) element with `α ∈ [0, 2π]`; the axis is flipped when
    /// the angle is reduced from `(2π, 4π)`. `α = 2π` is kept for `−1`.
    pub fn normalized(&self) -> Self {
        let a = self.angle.rem_euclid(2.0 * TAU);
        if a > TAU {
            Self {
                axis: self.axis.map(|v| -v),
                angle: 2.0 * TAU - a,
            }
        } else {
            Self {
                axis: self.axis,
                angle: a,
            }
        }
    }

    pub fn to_matrix(&self) -> Operator2 {
        let (s, c) = (self.angle / 2.0).sin_cos();
        Operator2::IDENTITY.scale(Complex64::new(c, 0.0))
            + Operator2::pauli_dot(self.axis).scale(Complex64::new(0.0, -s))
    }

    /// Principal logarithm of an SU(2) element: `α` from the trace, axis from
    /// the traceless part. Returns `α ∈ [0, 2π]`, with axis `+z` at `±1`.
    pub fn from_matrix(u: &Operator2) -> Result<Self, SpinError> {
        u.ensure_special_unitary(SU2_INPUT_TOL)?;
        let cos_half = (u.trace().re / 2.0).clamp(-1.0, 1.0);
        // tr(U σ_k) = −2i sin(α/2) n_k
        let v = Operator2::PAULI.map(|s| -(*u * s).trace().im / 2.0);
        let sin_half = norm3(v);
        let angle = 2.0 * sin_half.atan2(cos_half);
        if sin_half < 1e-15 {
            return Ok(Self { axis: Self::Z, angle });
        }
        Ok(Self {
            axis: v.map(|c| c / sin_half),
            angle,
        })
    }
}

/// `cos(α/2)·1 − i sin(α/2)·n̂·σ`.
pub fn axis_angle_to_matrix(aa: &AxisAngle) -> Operator2 {
    aa.to_matrix()
}
