//! Metastability of the asymmetric three-state Potts model on a torus.
//!
//! * [`spin`] — geometry, exact integer energies, droplets, reference paths
//!   and closed-form barriers.
//! * [`landscape`] — exhaustive landscape analysis: communication heights,
//!   stability levels, cycles, tubes and gates.
//! * [`dynamics`] — Metropolis dynamics by uniformization and by rejection-free
//!   kinetic Monte Carlo, with replica statistics.
//! * [`potential`] — Gibbs measure, equilibrium potentials, capacities, mean
//!   hitting times and trace-process rates.
//! * [`io`] — experiment configuration, JSON reports and the subcommand driver.
//! * [`verify`] — the acceptance checks shared by the CLI and the test suite.
//!
//! Energies are `i64` multiples of `10^-d`, so every landscape comparison is
//! exact; floating point appears only once `β` does.

pub mod dynamics;
pub mod error;
pub mod io;
pub mod landscape;
pub mod potential;
pub mod spin;
pub mod verify;

pub use error::{Error, Result};
