//! Simulation and analysis toolkit for a chiral artificial atom coupled to a
//! one-dimensional waveguide at two parametrically modulated points.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation: closed-form coupling rates, a small SLH algebra, Bloch and
//! Lindblad dynamics, the sideband coupled-mode model of the tunable coupler,
//! resonance fitting and directionality statistics. File formats and the
//! command line live in the companion `chiral-qed-cli` crate.
//!
//! Rates are angular frequencies (rad/s) throughout. Conversion to ordinary
//! frequency happens at the I/O boundary, see [`units`].

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cmt;
pub mod constants;
pub mod coupling;
pub mod dynamics;
mod error;
pub mod fit;
pub mod linalg;
pub mod quad;
pub mod slh;
pub mod special;
pub mod spectrum;
pub mod thermal;
pub mod units;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;
