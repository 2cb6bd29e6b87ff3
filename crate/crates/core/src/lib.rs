//! Physics core for estimating how strongly a trapped charge couples to
//! electrical and mechanical resonators.
//!
//! Everything in here is `no_std` with `alloc`. Frequencies are angular
//! (rad/s) throughout; convert with [`physcore::angular`] and
//! [`physcore::hertz`] at the edges.

#![no_std]

extern crate alloc;

pub mod circuits;
pub mod error;
pub mod etrap;
pub mod heatex;
pub mod loading;
pub mod mech;
pub mod ode;
pub mod physcore;
pub mod piezo;
pub mod quad;
pub mod scatter;

pub use error::{Error, Result};
pub use physcore::{Environment, Particle};
