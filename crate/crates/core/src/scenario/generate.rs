//! Smooth parametric stand-in for flow-field data around a blunted cone.
//!
//! Temperature peaks at the stagnation point and relaxes to a plateau along
//! the arc; pressure drops faster. Hotter flow carries more atomic oxygen and
//! higher, more rarefied flow more atomic nitrogen. A seed perturbs the peak
//! temperature, stagnation pressure and nitrogen level by up to 2%.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Scenario, ScenarioLabel, ScenarioPoint, ARC_LENGTH, MIXTURE, POINTS_PER_SCENARIO};
use crate::chem::GAS_CONSTANT;
use crate::error::{Error, Result};

const REFERENCE_ALTITUDE: f64 = 20.0;
const ALTITUDE_SPAN: f64 = 20.0;
const PERTURBATION: f64 = 0.02;

pub fn generate_synthetic_scenarios(seed: u64, altitudes: &[f64]) -> Result<Vec<Scenario>> {
    if altitudes.is_empty() {
        return Err(Error::InvalidArgument("no altitudes requested".into()));
    }
    altitudes
        .iter()
        .map(|&a| synthetic_scenario(seed, a, ScenarioLabel::Calibration))
        .collect()
}

pub fn synthetic_scenario(seed: u64, altitude_km: f64, label: ScenarioLabel) -> Result<Scenario> {
    if !altitude_km.is_finite() {
        return Err(Error::InvalidArgument(format!("altitude {altitude_km} km")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ altitude_km.to_bits().rotate_left(17));
    let mut jitter = || 1.0 + PERTURBATION * (2.0 * rng.gen::<f64>() - 1.0);
    let (jt, jp, jn) = (jitter(), jitter(), jitter());

    let u = ((altitude_km - REFERENCE_ALTITUDE) / ALTITUDE_SPAN).clamp(0.0, 1.0);
    let peak_t = (3300.0 - 700.0 * u) * jt;
    let stagnation_p = 1e5 * (-(altitude_km - REFERENCE_ALTITUDE) / 6.5).exp() * jp;
    let n_level = (0.0003 + 0.08 / (1.0 + (-(altitude_km - 27.5) / 2.0).exp())) * jn;

    let points = (0..POINTS_PER_SCENARIO)
        .map(|i| {
            let x = ARC_LENGTH * i as f64 / (POINTS_PER_SCENARIO - 1) as f64;
            let t_raw = peak_t * (0.72 + 0.28 * (-x / 0.06).exp());
            let p = stagnation_p * (0.08 + 0.92 * (-x / 0.02).exp());
            let t_model = t_raw - 1000.0;
            let x_o = 0.12 + 0.10 * ((t_model - 900.0) / 1600.0).clamp(0.0, 1.0);
            let x_o2 = 0.21 - 0.95 * x_o;
            let x_n = n_level * (0.5 + 0.5 * (-x / 0.08).exp());
            let x_no = 0.01;
            let x_n2 = 1.0 - x_o - x_o2 - x_n - x_no;
            let fractions = [x_o, x_o2, x_n, x_n2, x_no];
            let total = p / (GAS_CONSTANT * t_raw);
            let mut density = [0.0; 5];
            for (k, sp) in MIXTURE.iter().enumerate() {
                density[k] = fractions[k] * total * sp.molar_mass().expect("gas species");
            }
            ScenarioPoint {
                altitude_km,
                x_m: x,
                raw_temperature: t_raw,
                total_pressure: p,
                density,
            }
        })
        .collect();
    Scenario::new(altitude_km, label, Some(seed), points)
}
