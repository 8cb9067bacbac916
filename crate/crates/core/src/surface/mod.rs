//! Steady-state surface chemistry for the high-fidelity, reduced and
//! enriched mechanisms.
//!
//! Every adsorbed species obeys a balance of the form
//! `A s^2 + B s - D theta - C theta^2 = 0` in the free-site concentration `s`,
//! whose positive root gives the coverage `theta(s)` in closed form. The only
//! unknown left is `s`, fixed by site conservation and found by bisection on
//! `[0, B]`. [`transient`] integrates the raw kinetics instead and serves as
//! an independent check.

mod bisection;
mod gas;
mod models;
mod steady;
pub mod transient;

pub use bisection::{bisect_decreasing, BisectionOutcome};
pub use gas::{incoming_flux, molar_concentration, Gas, GasState};
pub use models::{
    co_flux, solve_enriched, solve_enriched_with, solve_hifi, solve_hifi_with, solve_lofi,
    solve_lofi_with, AcaRates, Coverages, EnrichmentRates, Fluxes, SolverSettings,
    SurfaceModel, SurfaceSolution,
};
pub use steady::{CoverageTerms, SteadyCoefficients};
