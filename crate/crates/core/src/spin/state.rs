use num_complex::Complex64;

use super::{Operator2, SpinError};

/// Normalized spin-1/2 state `a₊|+z⟩ + a₋|−z⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spinor {
    up: Complex64,
    down: Complex64,
}

impl Spinor {
    /// Builds a spinor from unnormalized amplitudes.
    pub fn new(up: Complex64, down: Complex64) -> Result<Self, SpinError> {
        let norm = (up.norm_sqr() + down.norm_sqr()).sqrt();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(SpinError::ZeroNorm);
        }
        Ok(Self {
            up: up / norm,
            down: down / norm,
        })
    }

    pub(crate) fn from_raw(up: Complex64, down: Complex64) -> Self {
        Self { up, down }
    }

    pub fn plus_z() -> Self {
        Self::from_raw(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn minus_z() -> Self {
        Self::from_raw(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn components(&self) -> [Complex64; 2] {
        [self.up, self.down]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Spinor) -> Complex64 {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    /// Bloch vector `⟨σ⟩` of the pure state.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let cross = self.up.conj() * self.down;
        [
            2.0 * cross.re,
            2.0 * cross.im,
            self.up.norm_sqr() - self.down.norm_sqr(),
        ]
    }
}

/// Spin-1/2 density matrix `ρ = ½(1 + b·σ)` stored as its Bloch vector.
///
/// The length of `b` is the polarization degree `r ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochState {
    bloch: [f64; 3],
}

impl BlochState {
    pub fn new(bloch: [f64; 3]) -> Result<Self, SpinError> {
        let r = norm3(bloch);
        if !r.is_finite() || r > 1.0 + 1e-12 {
            return Err(SpinError::PolarizationOutOfRange(r));
        }
        Ok(Self { bloch })
    }

    /// State polarized to degree `r` along `+z`.
    pub fn polarized_z(r: f64) -> Result<Self, SpinError> {
        if !(0.0..=1.0).contains(&r) {
            return Err(SpinError::PolarizationOutOfRange(r));
        }
        Ok(Self { bloch: [0.0, 0.0, r] })
    }

    pub fn maximally_mixed() -> Self {
        Self { bloch: [0.0; 3] }
    }

    pub fn from_spinor(s: &Spinor) -> Self {
        Self {
            bloch: s.bloch_vector(),
        }
    }

    /// Reads `b_k = tr(ρ σ_k)` off a density matrix. Only the Hermitian part
    /// is meaningful; no positivity check is made.
    pub fn from_density(rho: &Operator2) -> Self {
        let b = Operator2::PAULI.map(|s| (*rho * s).trace().re);
        Self { bloch: b }
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    pub fn polarization(&self) -> f64 {
        norm3(self.bloch)
    }

    pub fn density_matrix(&self) -> Operator2 {
        (Operator2::IDENTITY + Operator2::pauli_dot(self.bloch)).scale(Complex64::new(0.5, 0.0))
    }

    /// Eigenvalues of `ρ`, ascending: `(1 ∓ r)/2`.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let r = self.polarization();
        [(1.0 - r) / 2.0, (1.0 + r) / 2.0]
    }

    /// `ρ → UρU†`.
    pub fn apply(&self, u: &Operator2) -> Self {
        let rho = *u * self.density_matrix() * u.adjoint();
        Self::from_density(&rho)
    }

    /// Detection probability `⟨+z|ρ|+z⟩` behind an ideal `+z` analyzer.
    pub fn population_up(&self) -> f64 {
        0.5 * (1.0 + self.bloch[2])
    }
}

/// `UρU†` on a Bloch state.
pub fn bloch_apply(u: &Operator2, s: &BlochState) -> BlochState {
    s.apply(u)
}

pub(crate) fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}
