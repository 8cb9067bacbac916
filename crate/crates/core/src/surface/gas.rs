use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chem::{Species, AVOGADRO, BOLTZMANN, GAS_CONSTANT};
use crate::error::{Error, Result};

/// Reactive gas species the surface models consume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gas {
    O,
    N,
    O2,
}

impl Gas {
    pub const ALL: [Gas; 3] = [Gas::O, Gas::N, Gas::O2];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn species(self) -> Species {
        match self {
            Gas::O => Species::O,
            Gas::N => Species::N,
            Gas::O2 => Species::O2,
        }
    }
}

/// Incoming molar flux `P / (A_v sqrt(2 pi m k_b T))`, mol/(m^2 s).
///
/// This is the single implementation shared by input preparation and the
/// source terms of the gas-phase production rates.
#[inline]
pub fn incoming_flux(partial_pressure: f64, gas: Gas, temperature: f64) -> f64 {
    let m = gas.species().particle_mass().expect("gas species has mass");
    partial_pressure / (AVOGADRO * (2.0 * PI * m * BOLTZMANN * temperature).sqrt())
}

/// Ideal-gas molar concentration `P / (R T)`, mol/m^3.
#[inline]
pub fn molar_concentration(partial_pressure: f64, temperature: f64) -> f64 {
    partial_pressure / (GAS_CONSTANT * temperature)
}

/// Gas environment at one surface point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasState {
    pub temperature: f64,
    pub total_pressure: f64,
    /// Indexed by [`Gas::index`].
    pub partial_pressure: [f64; 3],
    pub incoming_flux: [f64; 3],
    pub molar_conc: [f64; 3],
}

impl GasState {
    /// Derives fluxes and concentrations from partial pressures at `temperature`.
    pub fn from_partial_pressures(
        temperature: f64,
        total_pressure: f64,
        partial_pressure: [f64; 3],
    ) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::Domain {
                what: "temperature",
                value: temperature,
            });
        }
        if !(total_pressure.is_finite() && total_pressure >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "total pressure must be finite and >= 0, got {total_pressure}"
            )));
        }
        for (gas, p) in Gas::ALL.iter().zip(partial_pressure) {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "partial pressure of {:?} must be finite and >= 0, got {p}",
                    gas
                )));
            }
            // Allow rounding from the mole-fraction conversion.
            if p > total_pressure * (1.0 + 1e-12) {
                return Err(Error::InvalidArgument(format!(
                    "partial pressure of {gas:?} ({p}) exceeds total pressure ({total_pressure})"
                )));
            }
        }
        let mut flux = [0.0; 3];
        let mut conc = [0.0; 3];
        for gas in Gas::ALL {
            let p = partial_pressure[gas.index()];
            flux[gas.index()] = incoming_flux(p, gas, temperature);
            conc[gas.index()] = molar_concentration(p, temperature);
        }
        Ok(Self {
            temperature,
            total_pressure,
            partial_pressure,
            incoming_flux: flux,
            molar_conc: conc,
        })
    }

    /// An environment with no reactive gas.
    pub fn empty(temperature: f64) -> Result<Self> {
        Self::from_partial_pressures(temperature, 0.0, [0.0; 3])
    }

    #[inline]
    pub fn conc(&self, gas: Gas) -> f64 {
        self.molar_conc[gas.index()]
    }

    #[inline]
    pub fn flux(&self, gas: Gas) -> f64 {
        self.incoming_flux[gas.index()]
    }

    #[inline]
    pub fn pressure(&self, gas: Gas) -> f64 {
        self.partial_pressure[gas.index()]
    }
}
