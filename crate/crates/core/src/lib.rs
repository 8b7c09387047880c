//! Behavioral simulator and training library for restricted Boltzmann machines
//! hosted on an augmented analog Ising-machine substrate.
//!
//! The crate is organized around the exact model mathematics ([`rbm`]), a
//! behavioral model of the analog hardware and its nonidealities ([`hw`]),
//! the three training procedures ([`train`]), evaluation machinery including
//! annealed importance sampling and the KL bias benchmark ([`eval`]), and
//! dataset / results I/O ([`data`]).

pub mod data;
pub mod eval;
pub mod hw;
pub mod rbm;
pub mod rng;
pub mod train;
