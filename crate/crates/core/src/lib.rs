//! Gradient-free training of recurrent spiking policies whose weights are
//! binary connectivities drawn from independent Bernoulli distributions.
//!
//! The crate covers the full loop: sampling and scoring connectivities
//! ([`bernoulli`]), rank-based fitness shaping and the population gradient
//! estimate ([`shaping`]), the update rules ([`optim`]), packed-bit spike
//! integration ([`bitset`]), a LIF network built on it ([`rsnn`]), a few
//! control tasks ([`env`]), the training driver ([`runner`]) and an
//! analytical energy estimate ([`energy`]).

pub mod bernoulli;
pub mod bitset;
pub mod dense;
pub mod energy;
pub mod env;
pub mod error;
pub mod optim;
pub mod rng;
pub mod rsnn;
pub mod runner;
pub mod shaping;

pub use error::{Error, Result};
