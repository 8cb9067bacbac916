//! Physical constants, species, reaction tables and rate-coefficient laws.

mod constants;
mod rates;
mod reaction;
mod species;

pub use constants::{
    PhysicalConstants, SiteDensity, AVOGADRO, BOLTZMANN, CODATA_2018, DEFAULT_SITE_DENSITY,
    GAS_CONSTANT, PLANCK,
};
pub use rates::{
    arrhenius_factor, quarter_thermal_speed, rate_adsorption, rate_coefficient, rate_desorption,
    rate_eley_rideal, rate_langmuir_hinshelwood, surface_thermal_speed, EXP_ARGUMENT_FLOOR,
};
pub use reaction::{Reaction, ReactionKind, ReactionSet, REACTION_SET_HEADER};
pub use species::Species;
