//! Implicit time integration of the raw surface kinetics.
//!
//! The surface ODEs are stiff (rate constants range over more than ten
//! decades), so the state is marched from a bare surface with backward Euler
//! and a growing time step until the net production of every adsorbed
//! species vanishes. The free-site concentration is eliminated through site
//! conservation. Nothing here reuses the closed-form coverage expressions.

use nalgebra::{Matrix4, Vector4};

use super::gas::{Gas, GasState};
use super::models::{AcaRates, Coverages, SurfaceModel, SurfaceSolution};
use crate::chem::SiteDensity;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientSettings {
    pub initial_dt: f64,
    pub max_dt: f64,
    pub growth: f64,
    /// Steady when every net rate is below `rate_tolerance * B` per second
    /// (or within rounding of its gross production).
    pub rate_tolerance: f64,
    pub max_steps: usize,
    pub newton_iterations: usize,
}

impl Default for TransientSettings {
    fn default() -> Self {
        Self {
            initial_dt: 1e-12,
            max_dt: 1e12,
            growth: 2.0,
            rate_tolerance: 1e-8,
            max_steps: 20_000,
            newton_iterations: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientSolution {
    pub coverage: Coverages,
    pub free_sites: f64,
    pub steps: usize,
    pub time: f64,
    /// Largest net rate of change at the end, mol/(m^2 s).
    pub max_rate: f64,
}

/// Net and gross rates of change of `[O(s), O*(s), N(s), P(s)]`.
///
/// Written term by term from the reaction list: each reaction contributes
/// its rate times the stoichiometric change of the adsorbed species.
pub fn surface_rates(
    model: &SurfaceModel,
    k: &AcaRates,
    gas: &GasState,
    site_density: SiteDensity,
    y: &[f64; 4],
) -> ([f64; 4], [f64; 4]) {
    let o = gas.conc(Gas::O);
    let n = gas.conc(Gas::N);
    let o2 = gas.conc(Gas::O2);
    let e = model.enrichment();
    let [os, ost, ns, ps] = *y;
    let s = site_density.value() - os - ost - ns - ps;

    let r = |i: usize| k.k(i);
    // reaction rates, mol/(m^2 s)
    let w1 = r(1) * o * s;
    let w2 = r(2) * os;
    let w3 = r(3) * o * os;
    let w4 = r(4) * o * os;
    let w5 = r(5) * o * s;
    let w6 = r(6) * ost;
    let w7 = r(7) * o * ost;
    let w8 = r(8) * ost * ost;
    let w9 = r(9) * os * os;
    let w10 = r(10) * n * s;
    let w11 = r(11) * ns;
    let w12 = r(12) * n * ns;
    let w13 = r(13) * n * ns;
    let w14 = r(14) * ns * ns;
    let w15 = r(15) * ns;
    let w16 = r(16) * o2 * s * s;
    let w17 = r(17) * o2 * os;
    let w18 = r(18) * o2 * os;
    let w19 = r(19) * o2 * s * s;
    let w20 = r(20) * o2 * ost;
    let wp1 = e.k1p * o * s;
    let wp2 = e.k2p * n * s;
    let wp3 = e.k3p * ps;

    // O(s): made by 1, 16 (x2); lost by 2, 3, 4, 9 (x2), 17, 18
    let d_os_gain = w1 + 2.0 * w16;
    let d_os_loss = w2 + w3 + w4 + 2.0 * w9 + w17 + w18;
    // O*(s): made by 5, 19 (x2); lost by 6, 7, 8 (x2), 20
    let d_ost_gain = w5 + 2.0 * w19;
    let d_ost_loss = w6 + w7 + 2.0 * w8 + w20;
    // N(s): made by 10; lost by 11, 12, 13, 14 (x2), 15
    let d_ns_gain = w10;
    let d_ns_loss = w11 + w12 + w13 + 2.0 * w14 + w15;
    // P(s): made by 1p, 2p; lost by 3p
    let d_ps_gain = wp1 + wp2;
    let d_ps_loss = wp3;

    (
        [
            d_os_gain - d_os_loss,
            d_ost_gain - d_ost_loss,
            d_ns_gain - d_ns_loss,
            d_ps_gain - d_ps_loss,
        ],
        [
            d_os_gain + d_os_loss,
            d_ost_gain + d_ost_loss,
            d_ns_gain + d_ns_loss,
            d_ps_gain + d_ps_loss,
        ],
    )
}

/// March `model` from a bare surface to steady state.
pub fn integrate_to_steady(
    model: &SurfaceModel,
    gas: &GasState,
    site_density: SiteDensity,
    settings: &TransientSettings,
) -> Result<TransientSolution> {
    let k = model.rates(gas.temperature, site_density)?;
    let b = site_density.value();
    let f = |y: &[f64; 4]| surface_rates(model, &k, gas, site_density, y);

    // A species with no production on a bare surface is never produced.
    let (_, gain) = f(&[0.0; 4]);
    let active = gain.map(|g| g > 0.0);

    let mut y = [0.0f64; 4];
    let mut dt = settings.initial_dt;
    let mut time = 0.0;
    for step in 1..=settings.max_steps {
        match backward_euler_step(&f, &y, dt, b, &active, settings.newton_iterations) {
            Some(next) => {
                let change = (0..4)
                    .map(|i| (next[i] - y[i]).abs() / (next[i].abs().max(1e-20 * b)))
                    .fold(0.0, f64::max);
                y = next;
                time += dt;
                let (net, gross) = f(&y);
                let steady = (0..4).all(|i| {
                    net[i].abs() <= settings.rate_tolerance * b + 1e-12 * gross[i]
                });
                if steady && dt >= settings.max_dt && change <= 1e-10 {
                    let max_rate = net.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    return Ok(TransientSolution {
                        coverage: Coverages {
                            o_s: y[0],
                            ostar_s: y[1],
                            n_s: y[2],
                            p_s: y[3],
                        },
                        free_sites: b - y[0] - y[1] - y[2] - y[3],
                        steps: step,
                        time,
                        max_rate,
                    });
                }
                dt = (dt * settings.growth).min(settings.max_dt);
            }
            None => {
                dt *= 0.25;
                if dt < 1e-30 {
                    return Err(Error::TransientFailure(format!(
                        "time step collapsed after {step} steps at t = {time:e} s"
                    )));
                }
            }
        }
    }
    let (net, gross) = f(&y);
    Err(Error::TransientFailure(format!(
        "no steady state within {} steps (t = {time:e} s, y = {y:?}, net = {net:?}, gross = {gross:?})",
        settings.max_steps
    )))
}

/// Largest relative difference between closed-form and integrated
/// coverages (free sites included). Exact zeros on both sides count as equal.
pub fn max_relative_deviation(closed: &SurfaceSolution, ode: &TransientSolution) -> f64 {
    let mut a = closed.coverage.as_array().to_vec();
    a.push(closed.free_sites);
    let mut b = ode.coverage.as_array().to_vec();
    b.push(ode.free_sites);
    a.iter()
        .zip(&b)
        .map(|(x, y)| {
            let den = x.abs().max(y.abs());
            if den == 0.0 {
                0.0
            } else {
                (x - y).abs() / den
            }
        })
        .fold(0.0, f64::max)
}

type Rates<'a> = dyn Fn(&[f64; 4]) -> ([f64; 4], [f64; 4]) + 'a;

fn backward_euler_step(
    f: &Rates<'_>,
    y0: &[f64; 4],
    dt: f64,
    b: f64,
    active: &[bool; 4],
    max_iterations: usize,
) -> Option<[f64; 4]> {
    let mut y = *y0;
    for _ in 0..max_iterations {
        let (fy, _) = f(&y);
        let g = Vector4::from_fn(|i, _| if active[i] { y[i] - y0[i] - dt * fy[i] } else { 0.0 });
        let mut jac = Matrix4::<f64>::identity();
        for j in (0..4).filter(|&j| active[j]) {
            let h = 1e-7 * y[j].abs().max(1e-9 * b);
            let mut up = y;
            let mut dn = y;
            up[j] += h;
            dn[j] -= h;
            let (fu, _) = f(&up);
            let (fd, _) = f(&dn);
            for i in (0..4).filter(|&i| active[i]) {
                jac[(i, j)] -= dt * (fu[i] - fd[i]) / (2.0 * h);
            }
        }
        let delta = jac.lu().solve(&g)?;
        let mut done = true;
        for i in 0..4 {
            let next = (y[i] - delta[i]).clamp(0.0, b);
            if (next - y[i]).abs() > 1e-14 * next.abs() + 1e-28 * b {
                done = false;
            }
            y[i] = next;
        }
        if !y.iter().all(|v| v.is_finite()) {
            return None;
        }
        if done {
            return Some(y);
        }
    }
    // Accept a step whose Newton iterate stalled at rounding level.
    let (fy, _) = f(&y);
    let ok = (0..4).all(|i| {
        let r = y[i] - y0[i] - dt * fy[i];
        r.abs() <= 1e-10 * (y[i].abs() + b * 1e-12)
    });
    ok.then_some(y)
}
