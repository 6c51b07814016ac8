//! Closed-form relative phases.

use super::su2::{wrap_half_pi, wrap_pi};
use super::{SpinError, Spinor, Su2Params};

/// Overlap modulus below which two states count as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

/// `arg⟨ψ₀|ψ⟩ ∈ (−π, π]`, or `None` for orthogonal states, where the phase
/// is undefined.
pub fn pancharatnam_phase(psi0: &Spinor, psi: &Spinor) -> Option<f64> {
    let overlap = psi0.inner(psi);
    if overlap.norm() < ORTHOGONALITY_TOL {
        None
    } else {
        Some(wrap_pi(overlap.arg()))
    }
}

/// Signed mixed-state relative phase and whether it was taken at the
/// `tan → ∞` singularity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedStatePhase {
    /// `Φ ∈ (−π/2, π/2]`.
    pub phi: f64,
    /// `δ + arg cos ξ ≡ π/2 (mod π)`; `phi` is then the `±π/2` limit.
    pub singular: bool,
}

/// `Φ = arctan[r tan(δ + arg cos ξ)]` for a state polarized to degree `r`
/// along `+z` and transformed by `U₀(p)`.
///
/// Evaluated as `atan2(r sin θ, cos θ)` reduced to `(−π/2, π/2]`, which is
/// the same branch as the arctangent and continuous through `cos θ = 0`.
pub fn mixed_state_phase(r: f64, p: &Su2Params) -> Result<MixedStatePhase, SpinError> {
    if !(0.0..=1.0).contains(&r) {
        return Err(SpinError::PolarizationOutOfRange(r));
    }
    let theta = p.delta + p.arg_cos_xi()?;
    let (s, c) = theta.sin_cos();
    let singular = r > 0.0 && c.abs() < 1e-12;
    Ok(MixedStatePhase {
        phi: wrap_half_pi((r * s).atan2(c)),
        singular,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;

    #[test]
    fn pure_phase_examples() {
        let up = Spinor::plus_z();
        assert_eq!(pancharatnam_phase(&up, &up), Some(0.0));
        assert_eq!(pancharatnam_phase(&up, &Spinor::minus_z()), None);

        let p = Su2Params::new(1.71, 0.38, -1.46);
        let psi = p.to_matrix().apply(&up);
        // cos 1.71 < 0, so the overlap is e^{i(0.38+π)}|cos ξ|.
        let phase = pancharatnam_phase(&up, &psi).unwrap();
        assert!((phase - (0.38 - PI)).abs() < 1e-12);
    }

    #[test]
    fn published_theory_values() {
        let a = Su2Params::new(1.71, 0.38, -1.46);
        let b = Su2Params::new(1.06, 0.17, -1.40);
        let round2 = |x: f64| (x * 100.0).round() / 100.0;
        let phi = |r, p| mixed_state_phase(r, p).unwrap().phi.abs();
        assert_eq!(round2(phi(0.976, &a)), 0.37);
        assert_eq!(round2(phi(0.981, &b)), 0.17);
        assert_eq!(round2(phi(0.8, &a)), 0.31);
        assert_eq!(round2(phi(0.6, &a)), 0.24);
        assert_eq!(round2(phi(0.3, &a)), 0.12);
        assert_eq!(round2(phi(0.8, &b)), 0.14);
        assert_eq!(round2(phi(0.6, &b)), 0.10);
        assert_eq!(round2(phi(0.3, &b)), 0.05);
    }

    #[test]
    fn zero_polarization_has_zero_phase() {
        for p in [Su2Params::new(1.71, 0.38, -1.46), Su2Params::new(0.2, -1.2, 0.5)] {
            assert_eq!(mixed_state_phase(0.0, &p).unwrap().phi, 0.0);
        }
    }

    #[test]
    fn singular_limit() {
        let p = Su2Params::new(0.4, FRAC_PI_2, 0.0);
        let m = mixed_state_phase(0.5, &p).unwrap();
        assert!(m.singular);
        assert!((m.phi - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cos_xi() {
        let p = Su2Params::new(FRAC_PI_2, 0.3, 0.0);
        assert!(matches!(mixed_state_phase(0.5, &p), Err(SpinError::DegenerateCosXi(_))));
        assert!(mixed_state_phase(1.5, &Su2Params::new(0.1, 0.1, 0.1)).is_err());
    }
}
