//! Linear trend of the pointwise log-rate in `(ln T, ln P_total, c_N)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::InputVector;

pub const DETREND_FEATURES: [&str; 3] = ["log_T", "log_P_total", "c_N"];

/// Least squares by Householder QR. Fails on a rank-deficient design,
/// naming the first column that is (numerically) a combination of earlier ones.
pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<DVector<f64>> {
    let (n, p) = x.shape();
    if n < p {
        return Err(Error::InsufficientData {
            what: "least-squares rows",
            needed: p,
            got: n,
        });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..p {
        // the part of column j not explained by columns 0..j
        if r[(j, j)].abs() <= 1e-10 * x.column(j).norm() || x.column(j).norm() == 0.0 {
            return Err(Error::RankDeficient {
                column: names[j].clone(),
                others: names[..j].to_vec(),
            });
        }
    }
    let qty = qr.q().transpose() * y;
    r.solve_upper_triangular(&qty)
        .ok_or_else(|| Error::InvalidArgument("triangular solve failed".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetrendModel {
    pub intercept: f64,
    /// Ordered as [`DETREND_FEATURES`].
    pub coefficients: [f64; 3],
}

impl DetrendModel {
    pub fn features(input: &InputVector) -> [f64; 3] {
        [input.temperature.ln(), input.total_pressure.ln(), input.c_n()]
    }

    pub fn predict(&self, input: &InputVector) -> f64 {
        let f = Self::features(input);
        self.intercept + self.coefficients[0] * f[0] + self.coefficients[1] * f[1] + self.coefficients[2] * f[2]
    }

    pub fn residuals(&self, inputs: &[InputVector], targets: &[f64]) -> Vec<f64> {
        inputs.iter().zip(targets).map(|(x, t)| t - self.predict(x)).collect()
    }
}

/// Fits the trend; returns it with the residuals of the targets.
pub fn fit_detrend(inputs: &[InputVector], targets: &[f64]) -> Result<(DetrendModel, Vec<f64>)> {
    if inputs.len() != targets.len() {
        return Err(Error::LengthMismatch {
            what: "detrend targets",
            expected: inputs.len(),
            got: targets.len(),
        });
    }
    if inputs.len() < 4 {
        return Err(Error::InsufficientData {
            what: "detrend fit",
            needed: 4,
            got: inputs.len(),
        });
    }
    let x = DMatrix::from_fn(inputs.len(), 4, |i, j| {
        if j == 0 {
            1.0
        } else {
            DetrendModel::features(&inputs[i])[j - 1]
        }
    });
    let names: Vec<String> = std::iter::once("intercept")
        .chain(DETREND_FEATURES)
        .map(str::to_owned)
        .collect();
    let beta = least_squares(&x, &DVector::from_column_slice(targets), &names)?;
    let model = DetrendModel {
        intercept: beta[0],
        coefficients: [beta[1], beta[2], beta[3]],
    };
    let residuals = model.residuals(inputs, targets);
    Ok((model, residuals))
}
