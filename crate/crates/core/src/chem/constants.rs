use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Avogadro constant, 1/mol (CODATA 2018, exact).
pub const AVOGADRO: f64 = 6.022_140_76e23;
/// Boltzmann constant, J/K (CODATA 2018, exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Planck constant, J s (CODATA 2018, exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Molar gas constant, J/(K mol). Equal to `AVOGADRO * BOLTZMANN`.
pub const GAS_CONSTANT: f64 = 8.314_462_618_153_24;

/// Total active site density used for every scenario, mol/m^2.
pub const DEFAULT_SITE_DENSITY: f64 = 1.0e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub avogadro: f64,
    pub boltzmann: f64,
    pub planck: f64,
    pub gas_constant: f64,
}

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    avogadro: AVOGADRO,
    boltzmann: BOLTZMANN,
    planck: PLANCK,
    gas_constant: GAS_CONSTANT,
};

/// Total active site density `B` of the carbon surface, mol/m^2.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SiteDensity(f64);

impl SiteDensity {
    pub fn new(total_sites: f64) -> Result<Self> {
        if total_sites.is_finite() && total_sites > 0.0 {
            Ok(Self(total_sites))
        } else {
            Err(Error::Domain {
                what: "site density",
                value: total_sites,
            })
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for SiteDensity {
    fn default() -> Self {
        Self(DEFAULT_SITE_DENSITY)
    }
}

impl TryFrom<f64> for SiteDensity {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<SiteDensity> for f64 {
    fn from(value: SiteDensity) -> f64 {
        value.0
    }
}
