//! Physical constants (CODATA 2018) in SI units.

/// Planck constant `h` [J s].
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant `ħ` [J s].
pub const HBAR: f64 = 1.054_571_817e-34;

/// Neutron mass `m_n` [kg].
pub const NEUTRON_MASS: f64 = 1.674_927_498_04e-27;

/// Magnitude of the neutron magnetic moment `|μ_n|` [J/T].
pub const NEUTRON_MAGNETIC_MOMENT: f64 = 9.662_365_1e-27;

/// Larmor factor `2|μ_n|/ħ` [rad s⁻¹ T⁻¹], about 1.83247e8.
pub const NEUTRON_GYROMAGNETIC: f64 = 2.0 * NEUTRON_MAGNETIC_MOMENT / HBAR;

pub const GAUSS_TO_TESLA: f64 = 1e-4;
pub const ANGSTROM_TO_METRE: f64 = 1e-10;
pub const CM_TO_METRE: f64 = 1e-2;

/// Neutron velocity `h/(m_n λ)` [m/s] for a wavelength in ångström.
pub fn neutron_velocity(wavelength_angstrom: f64) -> f64 {
    PLANCK / (NEUTRON_MASS * wavelength_angstrom * ANGSTROM_TO_METRE)
}

/// Larmor angular frequency `ω = 2|μ|B/ħ` [rad/s] for a field in gauss.
pub fn larmor_frequency(field_gauss: f64) -> f64 {
    NEUTRON_GYROMAGNETIC * field_gauss * GAUSS_TO_TESLA
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_values() {
        assert!((NEUTRON_GYROMAGNETIC / 1.832_47e8 - 1.0).abs() < 1e-5);
        // λ = 1.99 Å → v ≈ 1988 m/s
        assert!((neutron_velocity(1.99) - 1987.957).abs() < 1e-3);
    }
}
