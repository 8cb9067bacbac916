//! Candidate features and LASSO selection by coordinate descent.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::InputVector;

/// A transform of one input component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "transform", content = "component", rename_all = "lowercase")]
pub enum Feature {
    Raw(usize),
    Log(usize),
}

impl Feature {
    pub fn name(&self) -> String {
        match *self {
            Feature::Raw(i) => InputVector::NAMES[i].to_owned(),
            Feature::Log(i) => format!("log_{}", InputVector::NAMES[i]),
        }
    }

    pub fn eval(&self, input: &InputVector) -> f64 {
        let v = input.as_array();
        match *self {
            Feature::Raw(i) => v[i],
            Feature::Log(i) => v[i].ln(),
        }
    }

    pub fn eval_all(features: &[Feature], input: &InputVector) -> Vec<f64> {
        features.iter().map(|f| f.eval(input)).collect()
    }
}

/// Raw components plus the logarithm of every component that is strictly
/// positive across `inputs`.
pub fn candidate_features(inputs: &[InputVector]) -> Vec<Feature> {
    let mut out: Vec<Feature> = (0..10).map(Feature::Raw).collect();
    for i in 0..10 {
        if !inputs.is_empty() && inputs.iter().all(|x| x.as_array()[i] > 0.0) {
            out.push(Feature::Log(i));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoSettings {
    pub max_sweeps: usize,
    /// Stop once no coefficient moves by more than this in a sweep.
    pub tolerance: f64,
    pub folds: usize,
    pub path_length: usize,
    /// Smallest lambda on the path as a fraction of `lambda_max`.
    pub path_ratio: f64,
}

impl Default for LassoSettings {
    fn default() -> Self {
        Self {
            max_sweeps: 100_000,
            tolerance: 1e-13,
            folds: 5,
            path_length: 50,
            path_ratio: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub coefficients: Vec<f64>,
    pub sweeps: usize,
    /// Objective after each sweep.
    pub objective_trace: Vec<f64>,
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// `(1/2n) ||y - X b||^2 + lambda ||b||_1`.
pub fn lasso_objective(x: &DMatrix<f64>, y: &DVector<f64>, b: &[f64], lambda: f64) -> f64 {
    let r = y - x * DVector::from_column_slice(b);
    r.norm_squared() / (2.0 * x.nrows() as f64) + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
}

/// Cyclic coordinate descent for the LASSO without intercept.
pub fn lasso(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, settings: &LassoSettings) -> LassoFit {
    lasso_from(x, y, lambda, settings, None)
}

/// [`lasso`] started from `init` (warm start along a lambda path).
///
/// Works on the Gram matrix `X^T X / n`, so a sweep costs `O(p^2)`.
pub fn lasso_from(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    settings: &LassoSettings,
    init: Option<&[f64]>,
) -> LassoFit {
    let (n, p) = x.shape();
    let nf = n as f64;
    let gram = x.transpose() * x / nf;
    let xty = x.transpose() * y / nf;
    let yy = y.norm_squared() / nf;
    let mut b = DVector::from_column_slice(&init.map_or_else(|| vec![0.0; p], <[f64]>::to_vec));
    // c = X^T (y - X b) / n
    let mut c = &xty - &gram * &b;
    let objective = |b: &DVector<f64>| {
        0.5 * yy - b.dot(&xty) + 0.5 * b.dot(&(&gram * b)) + lambda * b.lp_norm(1)
    };
    let mut trace = Vec::new();
    let mut sweeps = 0;
    while sweeps < settings.max_sweeps {
        sweeps += 1;
        let mut max_step: f64 = 0.0;
        for j in 0..p {
            let gjj = gram[(j, j)];
            if gjj == 0.0 {
                continue;
            }
            let rho = c[j] + gjj * b[j];
            let new = soft_threshold(rho, lambda) / gjj;
            let step = new - b[j];
            if step != 0.0 {
                c.axpy(-step, &gram.column(j), 1.0);
                b[j] = new;
                max_step = max_step.max(step.abs());
            }
        }
        trace.push(objective(&b));
        if max_step <= settings.tolerance {
            break;
        }
    }
    LassoFit {
        coefficients: b.iter().copied().collect(),
        sweeps,
        objective_trace: trace,
    }
}

/// Largest useful penalty: every coefficient is zero at or above it.
pub fn lambda_max(x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    (x.transpose() * y).amax() / x.nrows() as f64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub coefficients: Vec<f64>,
    pub cv_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSelection {
    /// Candidates that entered the regression (constant columns removed).
    pub candidates: Vec<Feature>,
    pub dropped: Vec<Feature>,
    pub selected: Vec<Feature>,
    pub lambda: f64,
    pub lambda_max: f64,
    /// Coefficients on standardized features at the chosen lambda.
    pub coefficients: Vec<f64>,
    pub path: Vec<PathPoint>,
}

impl FeatureSelection {
    pub fn selected_names(&self) -> Vec<String> {
        self.selected.iter().map(Feature::name).collect()
    }
}

fn standardize_columns(x: &mut DMatrix<f64>) {
    let n = x.nrows() as f64;
    for mut col in x.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
        let sd = (col.norm_squared() / n).sqrt();
        if sd > 0.0 {
            col /= sd;
        }
    }
}

fn centered(y: &DVector<f64>) -> DVector<f64> {
    let mean = y.mean();
    y.add_scalar(-mean)
}

/// LASSO over standardized `candidates` with lambda from k-fold
/// cross-validation (fold of row `i` is `i % k`).
pub fn select_features(
    inputs: &[InputVector],
    targets: &[f64],
    candidates: &[Feature],
    settings: &LassoSettings,
) -> Result<FeatureSelection> {
    if inputs.len() != targets.len() {
        return Err(Error::LengthMismatch {
            what: "feature-selection targets",
            expected: inputs.len(),
            got: targets.len(),
        });
    }
    if inputs.len() < 10 {
        return Err(Error::InsufficientData {
            what: "feature selection",
            needed: 10,
            got: inputs.len(),
        });
    }
    let n = inputs.len();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for f in candidates {
        let col: Vec<f64> = inputs.iter().map(|x| f.eval(x)).collect();
        let finite = col.iter().all(|v| v.is_finite());
        let constant = col.iter().all(|&v| v == col[0]);
        if !finite || constant {
            warn!("dropping feature {} ({})", f.name(), if finite { "constant" } else { "non-finite" });
            dropped.push(*f);
        } else {
            kept.push(*f);
        }
    }
    if kept.is_empty() {
        return Err(Error::InvalidArgument("every candidate feature is constant".into()));
    }
    let mut x = DMatrix::from_fn(n, kept.len(), |i, j| kept[j].eval(&inputs[i]));
    standardize_columns(&mut x);
    let y = centered(&DVector::from_column_slice(targets));

    let lmax = lambda_max(&x, &y);
    let path_len = settings.path_length.max(2);
    let lambdas: Vec<f64> = (0..path_len)
        .map(|k| lmax * settings.path_ratio.powf(k as f64 / (path_len - 1) as f64))
        .collect();

    let folds = settings.folds.clamp(2, n);
    let mut cv_error = vec![0.0; path_len];
    for fold in 0..folds {
        let train: Vec<usize> = (0..n).filter(|i| i % folds != fold).collect();
        let test: Vec<usize> = (0..n).filter(|i| i % folds == fold).collect();
        let mut xt = x.select_rows(&train);
        let col_means: Vec<f64> = xt.column_iter().map(|c| c.mean()).collect();
        for (j, mut c) in xt.column_iter_mut().enumerate() {
            c.add_scalar_mut(-col_means[j]);
        }
        let yt_raw = y.select_rows(&train);
        let y_mean = yt_raw.mean();
        let yt = yt_raw.add_scalar(-y_mean);
        let mut warm: Option<Vec<f64>> = None;
        for (k, &lambda) in lambdas.iter().enumerate() {
            let b = lasso_from(&xt, &yt, lambda, settings, warm.as_deref()).coefficients;
            for &i in &test {
                let mut pred = y_mean;
                for j in 0..b.len() {
                    pred += b[j] * (x[(i, j)] - col_means[j]);
                }
                cv_error[k] += (y[i] - pred).powi(2) / n as f64;
            }
            warm = Some(b);
        }
    }

    let mut path: Vec<PathPoint> = Vec::with_capacity(path_len);
    for (&lambda, &cv) in lambdas.iter().zip(&cv_error) {
        let init = path.last().map(|p: &PathPoint| p.coefficients.clone());
        path.push(PathPoint {
            lambda,
            coefficients: lasso_from(&x, &y, lambda, settings, init.as_deref()).coefficients,
            cv_error: cv,
        });
    }
    let best = (0..path_len)
        .min_by(|&a, &b| cv_error[a].total_cmp(&cv_error[b]))
        .expect("nonempty path");
    let chosen = if path[best].coefficients.iter().any(|&c| c != 0.0) {
        best
    } else {
        // the largest lambda that keeps at least one feature
        match path.iter().position(|p| p.coefficients.iter().any(|&c| c != 0.0)) {
            Some(k) => k,
            None => {
                return Err(Error::InvalidArgument(
                    "LASSO selected no feature anywhere on the path".into(),
                ))
            }
        }
    };
    let coefficients = path[chosen].coefficients.clone();
    let selected = kept
        .iter()
        .zip(&coefficients)
        .filter(|(_, &c)| c != 0.0)
        .map(|(f, _)| *f)
        .collect();
    Ok(FeatureSelection {
        candidates: kept,
        dropped,
        selected,
        lambda: path[chosen].lambda,
        lambda_max: lmax,
        coefficients,
        path,
    })
}
