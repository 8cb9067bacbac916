//! Finite-rate gas-surface chemistry for carbon ablators, with a hybrid
//! physics/data-driven enrichment of a reduced mechanism.
//!
//! The crate is organised bottom-up:
//!
//! * [`chem`] holds constants, species, reaction tables and the four
//!   rate-coefficient laws (adsorption, desorption, Eley-Rideal,
//!   Langmuir-Hinshelwood).
//! * [`surface`] solves the steady surface state of the 20-reaction
//!   air-carbon mechanism, its 6-reaction reduction and the enriched
//!   reduction with a placeholder species and a pseudo-reaction.
//! * [`scenario`] converts flow-field densities into model inputs and reads
//!   and writes scenario and result files.
//! * [`calib`] fits the pseudo-reaction rate pointwise, selects features,
//!   detrends and trains a Gaussian process on the residual log-rate.
//! * [`uq`] propagates Gaussian-process draws to the cumulative CO flux ratio.

pub mod calib;
pub mod chem;
pub mod error;
pub mod scenario;
pub mod surface;
pub mod uq;

pub use error::{Error, Result};
