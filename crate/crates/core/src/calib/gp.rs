//! Gaussian-process regression of the detrended log-rate.
//!
//! Kernel: `s2 exp(-0.5 sum_d (x_d - x'_d)^2 / l_d^2) + noise * delta`, on
//! standardized inputs. `s2` is frozen at the empirical variance of the
//! targets and `noise` at its configured value; only the lengthscales are
//! fitted, by maximizing the log marginal likelihood.

use log::{debug, warn};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::detrend::DetrendModel;
use super::features::Feature;
use crate::error::{Error, Result};
use crate::scenario::io::SCHEMA_VERSION;
use crate::scenario::InputVector;

/// White-noise variance, squared log-rate units.
pub const WHITE_NOISE: f64 = 0.005;

const LOG_LENGTHSCALE_BOUNDS: (f64, f64) = (-4.605_170_185_988_091, 6.907_755_278_982_137);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Column means and population standard deviations; a constant column
    /// keeps scale 1.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; d];
        for r in rows {
            for j in 0..d {
                scale[j] += (r[j] - mean[j]).powi(2) / n;
            }
        }
        for s in &mut scale {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        Self { mean, scale }
    }

    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }

    pub fn destandardize(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| v * s + m).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpSettings {
    pub noise: f64,
    /// Overrides the empirical target variance when set.
    pub signal_variance: Option<f64>,
    pub starts: usize,
    /// Seeds the random restarts of the lengthscale search.
    pub seed: u64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl Default for GpSettings {
    fn default() -> Self {
        Self {
            noise: WHITE_NOISE,
            signal_variance: None,
            starts: 5,
            seed: 0,
            max_iterations: 200,
            gradient_tolerance: 1e-7,
        }
    }
}

fn rbf(a: &[f64], b: &[f64], lengthscales: &[f64], variance: f64) -> f64 {
    let mut q = 0.0;
    for d in 0..a.len() {
        let r = (a[d] - b[d]) / lengthscales[d];
        q += r * r;
    }
    variance * (-0.5 * q).exp()
}

fn kernel_matrix(x: &[Vec<f64>], lengthscales: &[f64], variance: f64, noise: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = rbf(&x[i], &x[j], lengthscales, variance);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] += noise;
    }
    k
}

/// Cholesky factor of `k`, adding diagonal jitter (logged) if needed.
pub fn factorize(mut k: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = k.clone().cholesky() {
        return Ok(c);
    }
    let n = k.nrows();
    let base = (k.trace() / n.max(1) as f64).abs().max(f64::MIN_POSITIVE);
    let mut jitter = 1e-12 * base;
    let mut added = 0.0;
    while jitter <= 1e-4 * base {
        for i in 0..n {
            k[(i, i)] += jitter - added;
        }
        added = jitter;
        warn!("Cholesky failed; retrying with diagonal jitter {jitter:e}");
        if let Some(c) = k.clone().cholesky() {
            return Ok(c);
        }
        jitter *= 10.0;
    }
    Err(Error::Factorization { max_jitter: added })
}

/// Log marginal likelihood and its gradient with respect to each lengthscale.
pub fn log_marginal_likelihood(
    x: &[Vec<f64>],
    y: &[f64],
    lengthscales: &[f64],
    variance: f64,
    noise: f64,
) -> Result<(f64, Vec<f64>)> {
    let n = x.len();
    let k = kernel_matrix(x, lengthscales, variance, noise);
    let chol = factorize(k)?;
    let yv = DVector::from_column_slice(y);
    let alpha = chol.solve(&yv);
    let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let lml = -0.5 * yv.dot(&alpha) - 0.5 * log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();

    let kinv = chol.inverse();
    let d = lengthscales.len();
    let mut grad = vec![0.0; d];
    for i in 0..n {
        for j in 0..n {
            let w = alpha[i] * alpha[j] - kinv[(i, j)];
            if w == 0.0 {
                continue;
            }
            let kf = rbf(&x[i], &x[j], lengthscales, variance);
            for (g, dd) in grad.iter_mut().zip(0..d) {
                let r = x[i][dd] - x[j][dd];
                *g += w * kf * r * r / lengthscales[dd].powi(3);
            }
        }
    }
    for g in &mut grad {
        *g *= 0.5;
    }
    Ok((lml, grad))
}

/// BFGS on `-lml` in log-lengthscale space, within fixed bounds.
fn maximize_lml(
    x: &[Vec<f64>],
    y: &[f64],
    start: &[f64],
    variance: f64,
    noise: f64,
    settings: &GpSettings,
) -> (Vec<f64>, f64) {
    let (lo, hi) = LOG_LENGTHSCALE_BOUNDS;
    let objective = |theta: &[f64]| -> Option<(f64, Vec<f64>)> {
        let ls: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
        let (lml, g) = log_marginal_likelihood(x, y, &ls, variance, noise).ok()?;
        lml.is_finite()
            .then(|| (-lml, g.iter().zip(&ls).map(|(gi, l)| -gi * l).collect()))
    };
    let d = start.len();
    let mut theta: Vec<f64> = start.iter().map(|l| l.ln().clamp(lo, hi)).collect();
    let Some((mut f, mut g)) = objective(&theta) else {
        return (start.to_vec(), f64::NEG_INFINITY);
    };
    let mut h = DMatrix::<f64>::identity(d, d);
    for _ in 0..settings.max_iterations {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < settings.gradient_tolerance {
            break;
        }
        let gv = DVector::from_column_slice(&g);
        let mut dir = -(&h * &gv);
        if dir.dot(&gv) >= 0.0 {
            h = DMatrix::identity(d, d);
            dir = -gv.clone();
        }
        let slope = dir.dot(&gv);
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-10 {
            let trial: Vec<f64> = (0..d).map(|i| (theta[i] + t * dir[i]).clamp(lo, hi)).collect();
            if let Some((ft, gt)) = objective(&trial) {
                if ft <= f + 1e-4 * t * slope.min(0.0) && ft <= f {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((next, fn_, gn)) = accepted else { break };
        let s = DVector::from_iterator(d, (0..d).map(|i| next[i] - theta[i]));
        let yv = DVector::from_iterator(d, (0..d).map(|i| gn[i] - g[i]));
        let sy = s.dot(&yv);
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(d, d);
            let a = &i - rho * &s * yv.transpose();
            let b = &i - rho * &yv * s.transpose();
            h = &a * &h * &b + rho * &s * s.transpose();
        } else {
            h = DMatrix::identity(d, d);
        }
        let improvement = f - fn_;
        theta = next;
        f = fn_;
        g = gn;
        if improvement <= 1e-12 * (1.0 + f.abs()) {
            break;
        }
    }
    (theta.iter().map(|t| t.exp()).collect(), -f)
}

#[derive(Debug, Clone)]
pub struct GpModel {
    pub features: Vec<Feature>,
    pub standardizer: Standardizer,
    pub detrend: DetrendModel,
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub noise: f64,
    pub log_marginal_likelihood: f64,
    train_x: Vec<Vec<f64>>,
    train_y: Vec<f64>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

/// Fits a GP to `residuals` at `inputs` (after `detrend`), using `features`
/// of the inputs as coordinates.
pub fn train_gp(
    inputs: &[InputVector],
    residuals: &[f64],
    features: &[Feature],
    detrend: DetrendModel,
    settings: &GpSettings,
) -> Result<GpModel> {
    if inputs.len() != residuals.len() {
        return Err(Error::LengthMismatch {
            what: "GP targets",
            expected: inputs.len(),
            got: residuals.len(),
        });
    }
    if features.is_empty() {
        return Err(Error::InvalidArgument("GP needs at least one input feature".into()));
    }
    let raw: Vec<Vec<f64>> = inputs.iter().map(|x| Feature::eval_all(features, x)).collect();
    let standardizer = Standardizer::fit(&raw);
    let x: Vec<Vec<f64>> = raw.iter().map(|r| standardizer.standardize(r)).collect();
    GpModel::fit(features.to_vec(), standardizer, detrend, x, residuals.to_vec(), settings)
}

impl GpModel {
    /// Fits lengthscales on already standardized coordinates.
    pub fn fit(
        features: Vec<Feature>,
        standardizer: Standardizer,
        detrend: DetrendModel,
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        settings: &GpSettings,
    ) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InsufficientData {
                what: "GP training",
                needed: 1,
                got: 0,
            });
        }
        let d = features.len();
        let variance = match settings.signal_variance {
            Some(v) => v,
            None => {
                let n = y.len() as f64;
                let m = y.iter().sum::<f64>() / n;
                let v = y.iter().map(|t| (t - m).powi(2)).sum::<f64>() / n;
                if v > 0.0 {
                    v
                } else {
                    warn!("GP targets have zero variance; using unit signal variance");
                    1.0
                }
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        let mut best: Option<(Vec<f64>, f64)> = None;
        for start in 0..settings.starts.max(1) {
            let init: Vec<f64> = if start == 0 {
                vec![1.0; d]
            } else {
                (0..d).map(|_| 10f64.powf(rng.gen_range(-1.0..1.0))).collect()
            };
            let (ls, lml) = maximize_lml(&x, &y, &init, variance, settings.noise, settings);
            debug!("GP start {start}: lml {lml} at {ls:?}");
            if best.as_ref().map_or(true, |(_, b)| lml > *b) {
                best = Some((ls, lml));
            }
        }
        let (lengthscales, _) = best.expect("at least one start");
        Self::assemble(features, standardizer, detrend, x, y, lengthscales, variance, settings.noise)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        features: Vec<Feature>,
        standardizer: Standardizer,
        detrend: DetrendModel,
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        lengthscales: Vec<f64>,
        signal_variance: f64,
        noise: f64,
    ) -> Result<Self> {
        let (lml, _) = log_marginal_likelihood(&x, &y, &lengthscales, signal_variance, noise)?;
        let chol = factorize(kernel_matrix(&x, &lengthscales, signal_variance, noise))?;
        let alpha = chol.solve(&DVector::from_column_slice(&y));
        Ok(Self {
            features,
            standardizer,
            detrend,
            lengthscales,
            signal_variance,
            noise,
            log_marginal_likelihood: lml,
            train_x: x,
            train_y: y,
            chol,
            alpha,
        })
    }

    pub fn training_inputs(&self) -> &[Vec<f64>] {
        &self.train_x
    }

    pub fn training_targets(&self) -> &[f64] {
        &self.train_y
    }

    pub fn coordinates(&self, input: &InputVector) -> Vec<f64> {
        self.standardizer.standardize(&Feature::eval_all(&self.features, input))
    }

    fn cross(&self, z: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.train_x.len(),
            self.train_x.iter().map(|t| rbf(t, z, &self.lengthscales, self.signal_variance)),
        )
    }

    /// Posterior mean and latent variance (without noise) of the residual at
    /// standardized coordinates `z`.
    pub fn residual_posterior(&self, z: &[f64]) -> (f64, f64) {
        let ks = self.cross(z);
        let mean = ks.dot(&self.alpha);
        let v = self.chol.l_dirty().solve_lower_triangular(&ks).expect("nonsingular factor");
        let var = (self.signal_variance - v.norm_squared()).max(0.0);
        (mean, var)
    }

    /// Predicted `ln k3p` at `input`: trend plus GP mean, and the predictive
    /// standard deviation including the white-noise term.
    pub fn predict(&self, input: &InputVector) -> (f64, f64) {
        let (m, v) = self.residual_posterior(&self.coordinates(input));
        (self.detrend.predict(input) + m, (v + self.noise).sqrt())
    }

    /// Joint posterior draws of `ln k3p` over `inputs` (white noise
    /// included); `count` rows of `inputs.len()` values.
    pub fn sample(&self, inputs: &[InputVector], count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        if count == 0 {
            return Err(Error::InvalidArgument("sample count must be >= 1".into()));
        }
        let m = inputs.len();
        let z: Vec<Vec<f64>> = inputs.iter().map(|x| self.coordinates(x)).collect();
        let mut mean = DVector::zeros(m);
        for (i, x) in inputs.iter().enumerate() {
            mean[i] = self.detrend.predict(x) + self.cross(&z[i]).dot(&self.alpha);
        }
        let kss = kernel_matrix(&z, &self.lengthscales, self.signal_variance, self.noise);
        let ks = DMatrix::from_fn(self.train_x.len(), m, |i, j| {
            rbf(&self.train_x[i], &z[j], &self.lengthscales, self.signal_variance)
        });
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&ks)
            .expect("nonsingular factor");
        let mut cov = kss - v.transpose() * v;
        cov = (&cov + cov.transpose()) * 0.5;
        let l = factorize(cov)?.unpack();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let e = DVector::from_iterator(m, (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let draw = &mean + &l * e;
            out.push(draw.iter().copied().collect());
        }
        Ok(out)
    }

    pub fn training_digest(&self) -> String {
        training_digest(&self.train_x, &self.train_y)
    }

    pub fn to_artifact(&self) -> GpArtifact {
        GpArtifact {
            schema_version: SCHEMA_VERSION,
            features: self.features.clone(),
            feature_names: self.features.iter().map(Feature::name).collect(),
            standardizer: self.standardizer.clone(),
            detrend: self.detrend.clone(),
            lengthscales: self.lengthscales.clone(),
            signal_variance: self.signal_variance,
            noise: self.noise,
            log_marginal_likelihood: self.log_marginal_likelihood,
            training_inputs: self.train_x.clone(),
            training_targets: self.train_y.clone(),
            training_digest: self.training_digest(),
        }
    }

    /// Rebuilds a model from its artifact, refactorizing the kernel matrix.
    pub fn from_artifact(a: GpArtifact) -> Result<Self> {
        let digest = training_digest(&a.training_inputs, &a.training_targets);
        if digest != a.training_digest {
            return Err(Error::InvalidArgument(format!(
                "training data digest mismatch: stored {}, computed {digest}",
                a.training_digest
            )));
        }
        if a.lengthscales.len() != a.features.len() || a.lengthscales.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::InvalidArgument("artifact lengthscales are invalid".into()));
        }
        Self::assemble(
            a.features,
            a.standardizer,
            a.detrend,
            a.training_inputs,
            a.training_targets,
            a.lengthscales,
            a.signal_variance,
            a.noise,
        )
    }
}

/// SHA-256 over the little-endian bytes of the training set.
pub fn training_digest(x: &[Vec<f64>], y: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update((x.len() as u64).to_le_bytes());
    for row in x {
        h.update((row.len() as u64).to_le_bytes());
        for v in row {
            h.update(v.to_le_bytes());
        }
    }
    for v in y {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Serialized form of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpArtifact {
    pub schema_version: u32,
    pub features: Vec<Feature>,
    pub feature_names: Vec<String>,
    pub standardizer: Standardizer,
    pub detrend: DetrendModel,
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub noise: f64,
    pub log_marginal_likelihood: f64,
    /// Standardized coordinates.
    pub training_inputs: Vec<Vec<f64>>,
    pub training_targets: Vec<f64>,
    pub training_digest: String,
}
