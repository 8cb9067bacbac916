//! Staged enrichment: pointwise pseudo-rate fits, feature selection, linear
//! detrending and a Gaussian process on the residual log-rate.

mod detrend;
mod features;
mod gp;
mod nelder_mead;
mod pointwise;

use serde::{Deserialize, Serialize};

pub use detrend::{fit_detrend, least_squares, DetrendModel, DETREND_FEATURES};
pub use features::{
    candidate_features, lambda_max, lasso, lasso_from, lasso_objective, select_features, Feature,
    FeatureSelection, LassoFit, LassoSettings, PathPoint,
};
pub use gp::{
    factorize, log_marginal_likelihood, train_gp, training_digest, GpArtifact, GpModel, GpSettings,
    Standardizer, WHITE_NOISE,
};
pub use nelder_mead::{nelder_mead, NelderMeadResult, NelderMeadSettings};
pub use pointwise::{
    fit_pointwise, gaussian_nll, pointwise_loss, PointwiseFit, PointwiseProblem, INITIAL_SIMPLEX,
    SIGMA_FRACTION,
};

use crate::error::{Error, Result};
use crate::scenario::InputVector;

/// Coordinates the Gaussian process works in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GpInputs {
    /// Features kept by the LASSO.
    #[default]
    Lasso,
    /// The detrend regressors `(ln T, ln P_total, c_N)`.
    Detrend,
}

impl GpInputs {
    pub fn detrend_features() -> Vec<Feature> {
        vec![Feature::Log(2), Feature::Log(3), Feature::Raw(8)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSettings {
    pub lasso: LassoSettings,
    pub gp: GpSettings,
    pub gp_inputs: GpInputs,
    /// Fraction of pointwise fits that must converge.
    pub min_converged: f64,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            lasso: LassoSettings::default(),
            gp: GpSettings::default(),
            gp_inputs: GpInputs::Lasso,
            min_converged: 0.95,
        }
    }
}

/// How many targets fall inside the central 95% predictive band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandCoverage {
    pub inside: usize,
    pub total: usize,
}

impl BandCoverage {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.inside as f64 / self.total as f64
        }
    }
}

pub const BAND_Z: f64 = 1.96;

pub fn band_coverage(gp: &GpModel, inputs: &[InputVector], targets: &[f64]) -> BandCoverage {
    let inside = inputs
        .iter()
        .zip(targets)
        .filter(|(x, t)| {
            let (m, s) = gp.predict(x);
            (*t - m).abs() <= BAND_Z * s
        })
        .count();
    BandCoverage {
        inside,
        total: inputs.len(),
    }
}

#[derive(Debug, Clone)]
pub struct Calibration {
    pub selection: FeatureSelection,
    pub detrend: DetrendModel,
    pub gp: GpModel,
    /// Band coverage of the training targets.
    pub coverage: BandCoverage,
    /// Indices of pointwise fits left out because they did not converge.
    pub excluded: Vec<usize>,
}

/// Runs selection, detrending and GP training on converged pointwise fits.
pub fn train_enrichment(fits: &[PointwiseFit], settings: &CalibrationSettings) -> Result<Calibration> {
    let excluded: Vec<usize> = fits
        .iter()
        .enumerate()
        .filter(|(_, f)| !f.converged)
        .map(|(i, _)| i)
        .collect();
    let used: Vec<&PointwiseFit> = fits.iter().filter(|f| f.converged).collect();
    if (used.len() as f64) < settings.min_converged * fits.len() as f64 {
        return Err(Error::InsufficientData {
            what: "converged pointwise fits",
            needed: (settings.min_converged * fits.len() as f64).ceil() as usize,
            got: used.len(),
        });
    }
    let inputs: Vec<InputVector> = used.iter().map(|f| f.input).collect();
    let targets: Vec<f64> = used.iter().map(|f| f.log_k3p_opt).collect();

    let selection = select_features(&inputs, &targets, &candidate_features(&inputs), &settings.lasso)?;
    let (detrend, residuals) = fit_detrend(&inputs, &targets)?;
    let features = match settings.gp_inputs {
        GpInputs::Lasso => selection.selected.clone(),
        GpInputs::Detrend => GpInputs::detrend_features(),
    };
    let gp = train_gp(&inputs, &residuals, &features, detrend.clone(), &settings.gp)?;
    let coverage = band_coverage(&gp, &inputs, &targets);
    Ok(Calibration {
        selection,
        detrend,
        gp,
        coverage,
        excluded,
    })
}
