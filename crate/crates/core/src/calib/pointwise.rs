//! Per-point fit of the pseudo-reaction rate against the high-fidelity CO flux.

use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead, NelderMeadSettings};
use crate::chem::SiteDensity;
use crate::error::{Error, Result};
use crate::scenario::InputVector;
use crate::surface::{AcaRates, EnrichmentRates, GasState, SolverSettings, SurfaceModel};

/// Likelihood width as a fraction of the reference flux.
pub const SIGMA_FRACTION: f64 = 0.05;
/// Starting simplex in `ln k3p`.
pub const INITIAL_SIMPLEX: [f64; 2] = [5.0, 10.0];

/// Gaussian negative log-likelihood (up to a constant) of observing `f_hi`
/// when the model predicts `f_en`, with width `0.05 f_hi`.
pub fn gaussian_nll(f_hi: f64, f_en: f64) -> Result<f64> {
    if !(f_hi > 0.0 && f_hi.is_finite()) {
        return Err(Error::DegenerateSigma(f_hi));
    }
    let sigma = SIGMA_FRACTION * f_hi;
    let d = f_hi - f_en;
    Ok(d * d / (2.0 * sigma * sigma))
}

/// The enriched model at one point, with everything but `k3p` fixed.
#[derive(Debug, Clone)]
pub struct PointwiseProblem {
    gas: GasState,
    rates: AcaRates,
    base: EnrichmentRates,
    hifi_co: f64,
    site_density: SiteDensity,
    solver: SolverSettings,
}

impl PointwiseProblem {
    pub fn new(gas: GasState, hifi_co: f64, site_density: SiteDensity) -> Result<Self> {
        if !(hifi_co > 0.0 && hifi_co.is_finite()) {
            return Err(Error::DegenerateSigma(hifi_co));
        }
        Ok(Self {
            rates: AcaRates::lofi(gas.temperature, site_density)?,
            base: EnrichmentRates::physical(gas.temperature, site_density, 0.0)?,
            gas,
            hifi_co,
            site_density,
            solver: SolverSettings::default(),
        })
    }

    pub fn hifi_co(&self) -> f64 {
        self.hifi_co
    }

    pub fn enrichment(&self, log_k3p: f64) -> EnrichmentRates {
        self.base.with_k3p(log_k3p.exp())
    }

    pub fn enriched_co(&self, log_k3p: f64) -> Result<f64> {
        let model = SurfaceModel::Enriched(self.enrichment(log_k3p));
        Ok(model.solve(&self.rates, &self.gas, self.site_density, &self.solver)?.flux.co)
    }

    pub fn loss(&self, log_k3p: f64) -> Result<f64> {
        gaussian_nll(self.hifi_co, self.enriched_co(log_k3p)?)
    }
}

pub fn pointwise_loss(log_k3p: f64, gas: &GasState, hifi_co: f64, site_density: SiteDensity) -> Result<f64> {
    PointwiseProblem::new(*gas, hifi_co, site_density)?.loss(log_k3p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseFit {
    pub input: InputVector,
    pub hifi_co: f64,
    pub log_k3p_opt: f64,
    pub loss_at_opt: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl PointwiseProblem {
    pub fn fit(&self, input: InputVector, settings: &NelderMeadSettings) -> PointwiseFit {
        let objective = |x: &[f64]| self.loss(x[0]).unwrap_or(f64::INFINITY);
        let r = nelder_mead(
            objective,
            INITIAL_SIMPLEX.iter().map(|&v| vec![v]).collect(),
            settings,
        );
        PointwiseFit {
            input,
            hifi_co: self.hifi_co,
            log_k3p_opt: r.x[0],
            loss_at_opt: r.value,
            converged: r.converged && r.value.is_finite(),
            evaluations: r.evaluations,
        }
    }
}

pub fn fit_pointwise(
    input: InputVector,
    gas: &GasState,
    hifi_co: f64,
    site_density: SiteDensity,
    settings: &NelderMeadSettings,
) -> Result<PointwiseFit> {
    Ok(PointwiseProblem::new(*gas, hifi_co, site_density)?.fit(input, settings))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_is_zero_at_match_and_half_one_sigma_off() {
        assert_eq!(gaussian_nll(2.0, 2.0).unwrap(), 0.0);
        assert!((gaussian_nll(2.0, 2.1).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(gaussian_nll(0.0, 1.0), Err(Error::DegenerateSigma(_))));
        assert!(matches!(gaussian_nll(-1.0, 1.0), Err(Error::DegenerateSigma(_))));
    }
}
