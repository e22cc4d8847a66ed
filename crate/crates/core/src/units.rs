//! Conversions between angular rates (rad/s, used internally) and the
//! ordinary-frequency values (Hz) used in files and on the command line.

use crate::constants::TAU;

#[inline]
pub fn hz(rate: f64) -> f64 {
    rate / TAU
}

#[inline]
pub fn from_hz(f: f64) -> f64 {
    f * TAU
}

#[inline]
pub fn from_khz(f: f64) -> f64 {
    f * 1e3 * TAU
}

#[inline]
pub fn from_mhz(f: f64) -> f64 {
    f * 1e6 * TAU
}

#[inline]
pub fn from_ghz(f: f64) -> f64 {
    f * 1e9 * TAU
}

#[inline]
pub fn deg(x: f64) -> f64 {
    x.to_radians()
}
