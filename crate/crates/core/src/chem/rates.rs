//! Rate-coefficient laws for the four elementary reaction types.
//!
//! All laws share the Arrhenius factor `exp(-E/(R T))`, written here with the
//! activation temperature `E/R` taken straight from the reaction tables.
//! Units follow from a site density in mol/m^2 and gas concentrations in
//! mol/m^3, so every rate term `k [G] [X(s)]` comes out in mol/(m^2 s).

use std::f64::consts::PI;

use super::constants::{AVOGADRO, BOLTZMANN, PLANCK};
use super::reaction::{Reaction, ReactionKind};
use super::species::Species;
use super::SiteDensity;
use crate::error::{Error, Result};

/// Exponent arguments below this value return exactly zero.
pub const EXP_ARGUMENT_FLOOR: f64 = -700.0;

#[inline]
pub fn arrhenius_factor(e_over_r: f64, temperature: f64) -> f64 {
    let arg = -e_over_r / temperature;
    if arg < EXP_ARGUMENT_FLOOR {
        0.0
    } else {
        arg.exp()
    }
}

/// One quarter of the mean thermal speed, `sqrt(8 k_b T / (pi m)) / 4`, m/s.
pub fn quarter_thermal_speed(species: Species, temperature: f64) -> f64 {
    let m = particle_mass(species);
    0.25 * (8.0 * BOLTZMANN * temperature / (PI * m)).sqrt()
}

/// Mean thermal speed of an adsorbed particle on the surface,
/// `sqrt(pi k_b T / (2 m))`, m/s.
pub fn surface_thermal_speed(species: Species, temperature: f64) -> f64 {
    let m = particle_mass(species);
    (PI * BOLTZMANN * temperature / (2.0 * m)).sqrt()
}

fn particle_mass(species: Species) -> f64 {
    species
        .particle_mass()
        .unwrap_or_else(|| panic!("{species} has no particle mass"))
}

fn check(reaction: &Reaction, expected: ReactionKind, temperature: f64) -> Result<()> {
    if reaction.kind() != expected {
        return Err(Error::KindMismatch {
            id: reaction.id().to_string(),
            expected,
            actual: reaction.kind(),
        });
    }
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::Domain {
            what: "temperature",
            value: temperature,
        });
    }
    Ok(())
}

// Validated at construction for every non-pseudo reaction.
fn params(reaction: &Reaction) -> (f64, f64, Species) {
    (
        reaction.s_or_gamma().expect("non-pseudo reaction has a prefactor"),
        reaction.e_over_r().expect("non-pseudo reaction has E/R"),
        reaction.rate_species().expect("non-pseudo reaction has a rate species"),
    )
}

/// `F_G / B^k * S * exp(-E/(R T))`, with `k` the reaction's site order.
pub fn rate_adsorption(reaction: &Reaction, temperature: f64, site_density: SiteDensity) -> Result<f64> {
    check(reaction, ReactionKind::Adsorption, temperature)?;
    let (s, e_over_r, gas) = params(reaction);
    let b = site_density.value().powi(i32::from(reaction.site_order()));
    Ok(quarter_thermal_speed(gas, temperature) / b * s * arrhenius_factor(e_over_r, temperature))
}

/// `2 pi m k_b^2 T^2 / (A_v B h^3) * exp(-E/(R T))`, 1/s.
pub fn rate_desorption(reaction: &Reaction, temperature: f64, site_density: SiteDensity) -> Result<f64> {
    check(reaction, ReactionKind::Desorption, temperature)?;
    let (_, e_over_r, gas) = params(reaction);
    let m = particle_mass(gas);
    let prefactor = 2.0 * PI * m * BOLTZMANN * BOLTZMANN * temperature * temperature
        / (AVOGADRO * site_density.value() * PLANCK.powi(3));
    Ok(prefactor * arrhenius_factor(e_over_r, temperature))
}

/// `F_G / B * gamma * exp(-E/(R T))`. A lumped row returns
/// `gamma * exp(-E/(R T))` in 1/s.
pub fn rate_eley_rideal(reaction: &Reaction, temperature: f64, site_density: SiteDensity) -> Result<f64> {
    check(reaction, ReactionKind::EleyRideal, temperature)?;
    let gamma = reaction.s_or_gamma().expect("non-pseudo reaction has a prefactor");
    let e_over_r = reaction.e_over_r().expect("non-pseudo reaction has E/R");
    let arrhenius = arrhenius_factor(e_over_r, temperature);
    if reaction.is_lumped() {
        return Ok(gamma * arrhenius);
    }
    let gas = reaction.rate_species().expect("Eley-Rideal row has a gas reactant");
    Ok(quarter_thermal_speed(gas, temperature) / site_density.value() * gamma * arrhenius)
}

/// `sqrt(A_v / B) * F_2D * gamma * exp(-E/(R T))`.
pub fn rate_langmuir_hinshelwood(
    reaction: &Reaction,
    temperature: f64,
    site_density: SiteDensity,
) -> Result<f64> {
    check(reaction, ReactionKind::LangmuirHinshelwood, temperature)?;
    let (gamma, e_over_r, gas) = params(reaction);
    Ok((AVOGADRO / site_density.value()).sqrt()
        * surface_thermal_speed(gas, temperature)
        * gamma
        * arrhenius_factor(e_over_r, temperature))
}

/// Dispatches on the reaction kind. Pseudo reactions have no law.
pub fn rate_coefficient(reaction: &Reaction, temperature: f64, site_density: SiteDensity) -> Result<f64> {
    match reaction.kind() {
        ReactionKind::Adsorption => rate_adsorption(reaction, temperature, site_density),
        ReactionKind::Desorption => rate_desorption(reaction, temperature, site_density),
        ReactionKind::EleyRideal => rate_eley_rideal(reaction, temperature, site_density),
        ReactionKind::LangmuirHinshelwood => {
            rate_langmuir_hinshelwood(reaction, temperature, site_density)
        }
        ReactionKind::Pseudo => Err(Error::InvalidReaction {
            id: reaction.id().to_string(),
            reason: "pseudo-reaction rates are supplied externally".into(),
        }),
    }
}
