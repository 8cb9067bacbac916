//! Propagation of pseudo-rate draws to the cumulative CO flux ratio.

use serde::{Deserialize, Serialize};

use crate::calib::GpModel;
use crate::chem::SiteDensity;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::surface::{solve_enriched, solve_lofi, EnrichmentRates};

/// `sum(model) / sum(hifi)`, summed in index order.
pub fn flux_ratio(model: &[f64], hifi: &[f64]) -> Result<f64> {
    if model.len() != hifi.len() {
        return Err(Error::LengthMismatch {
            what: "model fluxes",
            expected: hifi.len(),
            got: model.len(),
        });
    }
    let den: f64 = hifi.iter().sum();
    if !(den > 0.0) || !den.is_finite() {
        return Err(Error::DegenerateQoi);
    }
    Ok(model.iter().sum::<f64>() / den)
}

/// Quantile of sorted data by linear interpolation between order statistics
/// (position `(n - 1) p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= sorted.len() || frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Most extreme samples within 1.5 IQR of the quartiles, never inside the box.
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(samples: &[f64]) -> Result<BoxSummary> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData {
            what: "box summary",
            needed: 2,
            got: samples.len(),
        });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("samples must be finite".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&s, 0.25);
    let median = quantile_sorted(&s, 0.5);
    let q3 = quantile_sorted(&s, 0.75);
    let iqr = q3 - q1;
    let (fence_lo, fence_hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    // extreme samples inside the fences, never inside the box (small samples
    // can leave no data point between an interpolated quartile and its fence)
    let whisker_lo = s.iter().copied().find(|&v| v >= fence_lo).map_or(q1, |v| v.min(q1));
    let whisker_hi = s.iter().rev().copied().find(|&v| v <= fence_hi).map_or(q3, |v| v.max(q3));
    Ok(BoxSummary {
        median,
        q1,
        q3,
        whisker_lo,
        whisker_hi,
        min: s[0],
        max: s[s.len() - 1],
    })
}

/// Spread of the enriched CO flux at one point across the draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointBand {
    pub mean: f64,
    pub q05: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxRatioResult {
    pub altitude_km: f64,
    pub ratio_lofi: f64,
    /// One ratio per successful draw, in draw order.
    pub samples: Vec<f64>,
    pub summary: Option<BoxSummary>,
    /// Draws dropped because a point failed to solve.
    pub failed: usize,
    pub points: Vec<PointBand>,
}

/// Draws `count` joint realizations of `ln k3p` over the scenario, solves
/// the enriched model at every point for each, and reduces each draw to a
/// flux ratio against `hifi_co`.
pub fn propagate(
    scenario: &Scenario,
    gp: &GpModel,
    hifi_co: &[f64],
    count: usize,
    seed: u64,
    site_density: SiteDensity,
) -> Result<FluxRatioResult> {
    let gases = scenario.gas_states()?;
    let inputs = scenario.inputs()?;
    if hifi_co.len() != gases.len() {
        return Err(Error::LengthMismatch {
            what: "reference fluxes",
            expected: gases.len(),
            got: hifi_co.len(),
        });
    }
    let lofi: Vec<f64> = gases
        .iter()
        .map(|g| solve_lofi(g, site_density).map(|s| s.flux.co))
        .collect::<Result<_>>()?;
    let ratio_lofi = flux_ratio(&lofi, hifi_co)?;

    let base: Vec<EnrichmentRates> = gases
        .iter()
        .map(|g| EnrichmentRates::physical(g.temperature, site_density, 0.0))
        .collect::<Result<_>>()?;
    let draws = gp.sample(&inputs, count, seed)?;
    let mut samples = Vec::with_capacity(count);
    let mut per_point: Vec<Vec<f64>> = vec![Vec::with_capacity(count); gases.len()];
    let mut failed = 0;
    for draw in &draws {
        let fluxes: Result<Vec<f64>> = gases
            .iter()
            .zip(&base)
            .zip(draw)
            .map(|((g, b), lk)| solve_enriched(g, site_density, b.with_k3p(lk.exp())).map(|s| s.flux.co))
            .collect();
        match fluxes.and_then(|f| flux_ratio(&f, hifi_co).map(|r| (f, r))) {
            Ok((f, r)) if r.is_finite() && r > 0.0 => {
                samples.push(r);
                for (acc, v) in per_point.iter_mut().zip(f) {
                    acc.push(v);
                }
            }
            _ => failed += 1,
        }
    }
    let summary = if samples.len() >= 2 { Some(summarize(&samples)?) } else { None };
    let points = per_point
        .into_iter()
        .map(|mut v| {
            if v.is_empty() {
                return PointBand {
                    mean: f64::NAN,
                    q05: f64::NAN,
                    q95: f64::NAN,
                };
            }
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.sort_by(f64::total_cmp);
            PointBand {
                mean,
                q05: quantile_sorted(&v, 0.05),
                q95: quantile_sorted(&v, 0.95),
            }
        })
        .collect();
    Ok(FluxRatioResult {
        altitude_km: scenario.altitude_km,
        ratio_lofi,
        samples,
        summary,
        failed,
        points,
    })
}
