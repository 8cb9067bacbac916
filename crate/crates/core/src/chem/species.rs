use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::constants::AVOGADRO;
use crate::error::Error;

/// Gas-phase and surface species appearing in the air-carbon mechanisms.
///
/// `O_s` and `Ostar_s` are weakly and strongly bonded oxygen, `N_s` bonded
/// nitrogen, `P_s` the placeholder compartment of the enriched model and
/// `FreeSite` an empty surface site.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Species {
    O,
    N,
    O2,
    N2,
    NO,
    CO,
    CO2,
    CN,
    O_s,
    Ostar_s,
    N_s,
    P_s,
    FreeSite,
}

impl Species {
    pub const ALL: [Species; 13] = [
        Species::O,
        Species::N,
        Species::O2,
        Species::N2,
        Species::NO,
        Species::CO,
        Species::CO2,
        Species::CN,
        Species::O_s,
        Species::Ostar_s,
        Species::N_s,
        Species::P_s,
        Species::FreeSite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Species::O => "O",
            Species::N => "N",
            Species::O2 => "O2",
            Species::N2 => "N2",
            Species::NO => "NO",
            Species::CO => "CO",
            Species::CO2 => "CO2",
            Species::CN => "CN",
            Species::O_s => "O_s",
            Species::Ostar_s => "Ostar_s",
            Species::N_s => "N_s",
            Species::P_s => "P_s",
            Species::FreeSite => "FreeSite",
        }
    }

    pub fn is_surface(self) -> bool {
        matches!(
            self,
            Species::O_s | Species::Ostar_s | Species::N_s | Species::P_s | Species::FreeSite
        )
    }

    /// Molar mass in kg/mol. Surface species have none.
    pub fn molar_mass(self) -> Option<f64> {
        let m = match self {
            Species::O => 15.999e-3,
            Species::N => 14.007e-3,
            Species::O2 => 31.998e-3,
            Species::N2 => 28.014e-3,
            Species::NO => 30.006e-3,
            Species::CO => 28.010e-3,
            Species::CO2 => 44.009e-3,
            Species::CN => 26.017e-3,
            _ => return None,
        };
        Some(m)
    }

    /// Mass of one particle in kg.
    pub fn particle_mass(self) -> Option<f64> {
        self.molar_mass().map(|m| m / AVOGADRO)
    }

    /// Gas species an adsorbed species desorbs to (and whose mass sets its
    /// surface mobility).
    pub fn gas_counterpart(self) -> Option<Species> {
        match self {
            Species::O_s | Species::Ostar_s => Some(Species::O),
            Species::N_s => Some(Species::N),
            s if !s.is_surface() => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Species {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Species::ALL
            .into_iter()
            .find(|sp| sp.name() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown species `{s}`")))
    }
}
