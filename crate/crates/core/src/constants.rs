//! Physical constants (SI, CODATA 2018 exact values where defined).

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * core::f64::consts::PI);

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub const TAU: f64 = core::f64::consts::TAU;
