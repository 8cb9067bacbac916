//! Flow-field points, their conversion to model inputs, a synthetic scenario
//! generator and the on-disk formats.

mod generate;
pub mod io;

use serde::{Deserialize, Serialize};

use crate::chem::Species;
use crate::error::{Error, Result};
use crate::surface::{Gas, GasState};

pub use generate::{generate_synthetic_scenarios, synthetic_scenario};

/// Points per scenario along the arc length.
pub const POINTS_PER_SCENARIO: usize = 72;
/// Arc length covered by a scenario, m.
pub const ARC_LENGTH: f64 = 0.25;
/// Subtracted from every flow-field temperature before it enters the models, K.
pub const TEMPERATURE_SHIFT: f64 = 1000.0;

/// Species carried by flow-field points, in file column order.
pub const MIXTURE: [Species; 5] = [Species::O, Species::O2, Species::N, Species::N2, Species::NO];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPoint {
    pub altitude_km: f64,
    pub x_m: f64,
    pub raw_temperature: f64,
    pub total_pressure: f64,
    /// kg/m^3, ordered as [`MIXTURE`].
    pub density: [f64; 5],
}

impl ScenarioPoint {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(0.0..=ARC_LENGTH).contains(&self.x_m) {
            return bad(format!("x = {} m outside [0, {ARC_LENGTH}]", self.x_m));
        }
        if !(self.raw_temperature.is_finite() && self.raw_temperature > TEMPERATURE_SHIFT) {
            return bad(format!(
                "raw temperature {} K must exceed {TEMPERATURE_SHIFT} K",
                self.raw_temperature
            ));
        }
        if !(self.total_pressure.is_finite() && self.total_pressure > 0.0) {
            return bad(format!("total pressure {} Pa must be positive", self.total_pressure));
        }
        for (sp, rho) in MIXTURE.iter().zip(self.density) {
            if !(rho.is_finite() && rho >= 0.0) {
                return bad(format!("density of {sp} must be finite and >= 0, got {rho}"));
            }
        }
        Ok(())
    }

    pub fn shifted_temperature(&self) -> f64 {
        self.raw_temperature - TEMPERATURE_SHIFT
    }

    pub fn has_gas(&self) -> bool {
        self.density.iter().any(|&r| r > 0.0)
    }
}

/// Mole fractions and partial pressures (Pa) of the mixture, ordered as
/// [`MIXTURE`].
pub fn densities_to_partial_pressures(point: &ScenarioPoint) -> Result<[f64; 5]> {
    Ok(mole_fractions(point)?.map(|chi| chi * point.total_pressure))
}

pub fn mole_fractions(point: &ScenarioPoint) -> Result<[f64; 5]> {
    let mut moles = [0.0; 5];
    for (i, sp) in MIXTURE.iter().enumerate() {
        moles[i] = point.density[i] / sp.molar_mass().expect("gas species");
    }
    let total: f64 = moles.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateMixture);
    }
    Ok(moles.map(|c| c / total))
}

/// Model inputs at a point, evaluated at the shifted temperature.
///
/// A point with no gas at all is treated as vacuum rather than rejected,
/// so that empty scenarios still simulate (to zero fluxes).
pub fn build_gas_state(point: &ScenarioPoint) -> Result<GasState> {
    let t = point.shifted_temperature();
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain {
            what: "shifted temperature",
            value: t,
        });
    }
    if !point.has_gas() {
        return GasState::from_partial_pressures(t, point.total_pressure, [0.0; 3]);
    }
    let p = densities_to_partial_pressures(point)?;
    GasState::from_partial_pressures(t, point.total_pressure, [p[0], p[2], p[1]])
}

/// The ten-component model input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputVector {
    pub altitude_km: f64,
    pub x_m: f64,
    /// Shifted temperature, K.
    pub temperature: f64,
    pub total_pressure: f64,
    /// Indexed by [`Gas::index`].
    pub flux: [f64; 3],
    pub conc: [f64; 3],
}

impl InputVector {
    pub const NAMES: [&'static str; 10] =
        ["altitude", "x", "T", "P_total", "f_O", "f_N", "f_O2", "c_O", "c_N", "c_O2"];

    pub fn new(point: &ScenarioPoint, gas: &GasState) -> Self {
        Self {
            altitude_km: point.altitude_km,
            x_m: point.x_m,
            temperature: gas.temperature,
            total_pressure: gas.total_pressure,
            flux: gas.incoming_flux,
            conc: gas.molar_conc,
        }
    }

    pub fn from_point(point: &ScenarioPoint) -> Result<Self> {
        Ok(Self::new(point, &build_gas_state(point)?))
    }

    pub fn as_array(&self) -> [f64; 10] {
        [
            self.altitude_km,
            self.x_m,
            self.temperature,
            self.total_pressure,
            self.flux[0],
            self.flux[1],
            self.flux[2],
            self.conc[0],
            self.conc[1],
            self.conc[2],
        ]
    }

    pub fn from_array(v: [f64; 10]) -> Self {
        Self {
            altitude_km: v[0],
            x_m: v[1],
            temperature: v[2],
            total_pressure: v[3],
            flux: [v[4], v[5], v[6]],
            conc: [v[7], v[8], v[9]],
        }
    }

    pub fn c_n(&self) -> f64 {
        self.conc[Gas::N.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioLabel {
    Calibration,
    Validation,
}

impl std::fmt::Display for ScenarioLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScenarioLabel::Calibration => "calibration",
            ScenarioLabel::Validation => "validation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub altitude_km: f64,
    pub label: ScenarioLabel,
    pub seed: Option<u64>,
    points: Vec<ScenarioPoint>,
}

impl Scenario {
    pub fn new(
        altitude_km: f64,
        label: ScenarioLabel,
        seed: Option<u64>,
        points: Vec<ScenarioPoint>,
    ) -> Result<Self> {
        if points.len() != POINTS_PER_SCENARIO {
            return Err(Error::LengthMismatch {
                what: "scenario points",
                expected: POINTS_PER_SCENARIO,
                got: points.len(),
            });
        }
        for (i, p) in points.iter().enumerate() {
            p.validate()
                .map_err(|e| Error::InvalidArgument(format!("point {i}: {e}")))?;
            if p.altitude_km != altitude_km {
                return Err(Error::InvalidArgument(format!(
                    "point {i} has altitude {} km in a {altitude_km} km scenario",
                    p.altitude_km
                )));
            }
            if i > 0 && !(p.x_m > points[i - 1].x_m) {
                return Err(Error::InvalidArgument(format!(
                    "x must be strictly increasing (point {i})"
                )));
            }
        }
        Ok(Self {
            altitude_km,
            label,
            seed,
            points,
        })
    }

    pub fn points(&self) -> &[ScenarioPoint] {
        &self.points
    }

    pub fn gas_states(&self) -> Result<Vec<GasState>> {
        self.points.iter().map(build_gas_state).collect()
    }

    pub fn inputs(&self) -> Result<Vec<InputVector>> {
        self.points.iter().map(InputVector::from_point).collect()
    }

    /// File stem used for this scenario's files.
    pub fn stem(&self) -> String {
        format!("scenario_{}km", self.altitude_km)
    }
}
