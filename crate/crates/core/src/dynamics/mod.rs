//! Driven-dissipative dynamics of the atom: Bloch steady states and
//! power-broadened transmission, resonance fluorescence, Rabi traces, a
//! Lindblad steady-state solver and the three-level e–f model.

mod bloch;
mod lindblad;
mod mollow;
mod rabi;
mod three_level;

pub use bloch::{bloch_steady_state, rabi_from_power, transmission_strong, BlochState, DriveSpec};
pub use lindblad::{
    bloch_vector, lindblad_steady_state, liouvillian, thermal_dissipators, two_level_model, SteadyState,
};
pub use mollow::{mollow_psd, mollow_psd_at, MollowParams};
pub use rabi::{rabi_trace, ring_down, ring_down_integral, RabiTrace, RingDown};
pub use three_level::{ef_rates, three_level_steady_state, two_tone_trace, ThreeLevelPorts};
