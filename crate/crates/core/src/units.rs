//! Atomic-unit constants and conversions (ħ = mₑ = e = 4πε₀ = 1).

/// One atomic unit of time in seconds.
pub const AU_TIME_S: f64 = 2.418_884_326_5e-17;

/// One atomic unit of time in nanoseconds.
pub const AU_TIME_NS: f64 = AU_TIME_S * 1e9;

/// Speed of light in atomic units.
pub const SPEED_OF_LIGHT: f64 = 137.035_999;

/// One atomic unit of angular frequency in rad/s.
pub const AU_ANGULAR_FREQUENCY_RAD_S: f64 = 4.134_137e16;

/// Unified atomic mass unit in electron masses.
pub const DALTON: f64 = 1_822.888_486;

/// Atomic masses of the isotopes used by the built-in presets, in daltons.
pub const MASS_K39: f64 = 38.963_706_49;
pub const MASS_RB87: f64 = 86.909_180_53;

/// Reduced mass of two atoms given in daltons, returned in electron masses.
pub fn reduced_mass(m1_da: f64, m2_da: f64) -> f64 {
    m1_da * m2_da / (m1_da + m2_da) * DALTON
}

/// Reduced mass of ³⁹K⁸⁷Rb in electron masses.
pub fn krb_reduced_mass() -> f64 {
    reduced_mass(MASS_K39, MASS_RB87)
}

pub fn au_time_to_ns(t: f64) -> f64 {
    t * AU_TIME_NS
}

/// Angular frequency in atomic units to rad/s.
pub fn au_frequency_to_rad_per_s(omega: f64) -> f64 {
    omega * AU_ANGULAR_FREQUENCY_RAD_S
}

/// Angular frequency in atomic units to the ordinary frequency ν = ω/2π in Hz.
pub fn au_frequency_to_hz(omega: f64) -> f64 {
    au_frequency_to_rad_per_s(omega) / (2.0 * std::f64::consts::PI)
}
