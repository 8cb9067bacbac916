use serde::{Deserialize, Serialize};

use super::bisection::bisect_decreasing;
use super::gas::{Gas, GasState};
use super::steady::{CoverageTerms, SteadyCoefficients};
use crate::chem::{rate_coefficient, ReactionSet, SiteDensity};
use crate::error::{Error, Result};

/// Rate coefficients of the air-carbon mechanism indexed by reaction number.
/// Rows absent from the generating reaction set are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcaRates {
    k: [f64; 21],
}

impl AcaRates {
    pub fn from_set(set: &ReactionSet, temperature: f64, site_density: SiteDensity) -> Result<Self> {
        let mut k = [0.0; 21];
        for (i, slot) in k.iter_mut().enumerate().skip(1) {
            if let Some(r) = set.get(&i.to_string()) {
                *slot = rate_coefficient(r, temperature, site_density)?;
            }
        }
        Ok(Self { k })
    }

    /// Full 20-reaction mechanism.
    pub fn hifi(temperature: f64, site_density: SiteDensity) -> Result<Self> {
        Self::from_set(ReactionSet::aca(), temperature, site_density)
    }

    /// Reduced mechanism: only reactions 5, 6, 7, 8, 19, 20 are nonzero.
    pub fn lofi(temperature: f64, site_density: SiteDensity) -> Result<Self> {
        Self::from_set(ReactionSet::reduced(), temperature, site_density)
    }

    /// Coefficient of reaction `i` (1-based).
    #[inline]
    pub fn k(&self, i: usize) -> f64 {
        self.k[i]
    }
}

/// Rates of the three enrichment reactions: placeholder adsorption of O
/// (`k1p`) and N (`k2p`), and the pseudo-reaction `P(s) + C(b) -> CO + (s)`
/// (`k3p`, 1/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnrichmentRates {
    pub k1p: f64,
    pub k2p: f64,
    pub k3p: f64,
}

impl EnrichmentRates {
    /// Placeholder adsorption from the enriched reaction table at `temperature`.
    pub fn physical(temperature: f64, site_density: SiteDensity, k3p: f64) -> Result<Self> {
        let set = ReactionSet::enriched();
        Ok(Self {
            k1p: rate_coefficient(set.require("1p")?, temperature, site_density)?,
            k2p: rate_coefficient(set.require("2p")?, temperature, site_density)?,
            k3p,
        })
    }

    /// Placeholder decoupled from the gas phase.
    pub fn decoupled(k3p: f64) -> Self {
        Self {
            k1p: 0.0,
            k2p: 0.0,
            k3p,
        }
    }

    pub fn with_k3p(self, k3p: f64) -> Self {
        Self { k3p, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SurfaceModel {
    Hifi,
    Lofi,
    Enriched(EnrichmentRates),
}

impl SurfaceModel {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceModel::Hifi => "hifi",
            SurfaceModel::Lofi => "lofi",
            SurfaceModel::Enriched(_) => "enriched",
        }
    }

    /// Rate coefficients of the mechanism underlying this model.
    pub fn rates(&self, temperature: f64, site_density: SiteDensity) -> Result<AcaRates> {
        match self {
            SurfaceModel::Hifi => AcaRates::hifi(temperature, site_density),
            SurfaceModel::Lofi | SurfaceModel::Enriched(_) => AcaRates::lofi(temperature, site_density),
        }
    }

    pub fn enrichment(&self) -> EnrichmentRates {
        match self {
            SurfaceModel::Enriched(e) => *e,
            _ => EnrichmentRates::decoupled(0.0),
        }
    }

    /// Groups rate constants and concentrations into closed-form coefficients.
    pub fn coefficients(&self, k: &AcaRates, gas: &GasState) -> SteadyCoefficients {
        let o = gas.conc(Gas::O);
        let n = gas.conc(Gas::N);
        let o2 = gas.conc(Gas::O2);
        let e = self.enrichment();
        SteadyCoefficients {
            weak_o: CoverageTerms {
                a: 2.0 * k.k(16) * o2,
                b: k.k(1) * o,
                c: 2.0 * k.k(9),
                d: k.k(2) + (k.k(3) + k.k(4)) * o + (k.k(17) + k.k(18)) * o2,
            },
            strong_o: CoverageTerms {
                a: 2.0 * k.k(19) * o2,
                b: k.k(5) * o,
                c: 2.0 * k.k(8),
                d: k.k(6) + k.k(7) * o + k.k(20) * o2,
            },
            nitrogen: CoverageTerms {
                a: 0.0,
                b: k.k(10) * n,
                c: 2.0 * k.k(14),
                d: k.k(11) + k.k(15) + (k.k(12) + k.k(13)) * n,
            },
            placeholder: CoverageTerms {
                a: 0.0,
                b: e.k1p * o + e.k2p * n,
                c: 0.0,
                d: e.k3p,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Bisection bracket width as a fraction of `B`.
    pub relative_tolerance: f64,
    pub max_iterations: usize,
    /// Log-spaced subintervals searched when `[0, B]` does not bracket.
    pub scan_intervals: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-14,
            max_iterations: 200,
            scan_intervals: 64,
        }
    }
}

/// Surface concentrations of adsorbed species, mol/m^2.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Coverages {
    pub o_s: f64,
    pub ostar_s: f64,
    pub n_s: f64,
    pub p_s: f64,
}

impl Coverages {
    pub fn total(&self) -> f64 {
        self.o_s + self.ostar_s + self.n_s + self.p_s
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.o_s, self.ostar_s, self.n_s, self.p_s]
    }
}

/// Net production rates of gas-phase species, mol/(m^2 s).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Fluxes {
    pub co: f64,
    pub co2: f64,
    pub o: f64,
    pub o2: f64,
    pub cn: f64,
    pub n: f64,
    pub n2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSolution {
    pub coverage: Coverages,
    pub free_sites: f64,
    pub flux: Fluxes,
    /// Site-balance residual `B - [(s)] - sum(coverages)` at the root, mol/m^2.
    pub residual: f64,
    pub iterations: usize,
}

impl SurfaceSolution {
    /// Absolute conservation error `|sum(coverages) + [(s)] - B|`.
    pub fn conservation_error(&self, site_density: SiteDensity) -> f64 {
        (self.coverage.total() + self.free_sites - site_density.value()).abs()
    }
}

/// CO production rate of a solved surface state.
pub fn co_flux(solution: &SurfaceSolution) -> f64 {
    solution.flux.co
}

pub fn solve_hifi(gas: &GasState, site_density: SiteDensity) -> Result<SurfaceSolution> {
    solve_hifi_with(gas, site_density, &SolverSettings::default())
}

pub fn solve_hifi_with(
    gas: &GasState,
    site_density: SiteDensity,
    settings: &SolverSettings,
) -> Result<SurfaceSolution> {
    let k = AcaRates::hifi(gas.temperature, site_density)?;
    solve_steady(&SurfaceModel::Hifi, &k, gas, site_density, settings)
}

pub fn solve_lofi(gas: &GasState, site_density: SiteDensity) -> Result<SurfaceSolution> {
    solve_lofi_with(gas, site_density, &SolverSettings::default())
}

pub fn solve_lofi_with(
    gas: &GasState,
    site_density: SiteDensity,
    settings: &SolverSettings,
) -> Result<SurfaceSolution> {
    let k = AcaRates::lofi(gas.temperature, site_density)?;
    solve_steady(&SurfaceModel::Lofi, &k, gas, site_density, settings)
}

pub fn solve_enriched(
    gas: &GasState,
    site_density: SiteDensity,
    rates: EnrichmentRates,
) -> Result<SurfaceSolution> {
    solve_enriched_with(gas, site_density, rates, &SolverSettings::default())
}

pub fn solve_enriched_with(
    gas: &GasState,
    site_density: SiteDensity,
    rates: EnrichmentRates,
    settings: &SolverSettings,
) -> Result<SurfaceSolution> {
    let k = AcaRates::lofi(gas.temperature, site_density)?;
    solve_steady(&SurfaceModel::Enriched(rates), &k, gas, site_density, settings)
}

impl SurfaceModel {
    /// Steady state with precomputed rate coefficients; callers that solve
    /// the same point repeatedly (calibration) reuse `k`.
    pub fn solve(
        &self,
        k: &AcaRates,
        gas: &GasState,
        site_density: SiteDensity,
        settings: &SolverSettings,
    ) -> Result<SurfaceSolution> {
        solve_steady(self, k, gas, site_density, settings)
    }
}

fn solve_steady(
    model: &SurfaceModel,
    k: &AcaRates,
    gas: &GasState,
    site_density: SiteDensity,
    settings: &SolverSettings,
) -> Result<SurfaceSolution> {
    let e = model.enrichment();
    for (name, v) in [("k1p", e.k1p), ("k2p", e.k2p), ("k3p", e.k3p)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    let coeffs = model.coefficients(k, gas);
    if coeffs.placeholder.b > 0.0 && coeffs.placeholder.d == 0.0 {
        return Err(Error::SingularPlaceholder);
    }

    let b = site_density.value();
    let balance = |s: f64| {
        b - s
            - coeffs.weak_o.coverage(s)
            - coeffs.strong_o.coverage(s)
            - coeffs.nitrogen.coverage(s)
            - coeffs.placeholder.coverage(s)
    };
    let root = bisect_decreasing(
        balance,
        0.0,
        b,
        settings.relative_tolerance,
        settings.max_iterations,
        settings.scan_intervals,
    )?;
    let s = root.root;
    let coverage = Coverages {
        o_s: coeffs.weak_o.coverage(s),
        ostar_s: coeffs.strong_o.coverage(s),
        n_s: coeffs.nitrogen.coverage(s),
        p_s: coeffs.placeholder.coverage(s),
    };
    let flux = fluxes(model, k, gas, s, &coverage);
    Ok(SurfaceSolution {
        coverage,
        free_sites: s,
        flux,
        residual: root.residual,
        iterations: root.iterations,
    })
}

/// Gas-phase production rates at a surface state. Reactions absent from the
/// model have zero coefficients, so one expression serves all three models.
fn fluxes(model: &SurfaceModel, k: &AcaRates, gas: &GasState, s: f64, c: &Coverages) -> Fluxes {
    let o = gas.conc(Gas::O);
    let n = gas.conc(Gas::N);
    let o2 = gas.conc(Gas::O2);
    let e = model.enrichment();
    let (os, ost, ns, ps) = (c.o_s, c.ostar_s, c.n_s, c.p_s);

    let co = k.k(3) * o * os + k.k(7) * o * ost + k.k(17) * o2 * os + k.k(20) * o2 * ost + e.k3p * ps;
    let co2 = k.k(4) * o * os + k.k(18) * o2 * os;
    let f_o = gas.flux(Gas::O) - k.k(1) * o * s + k.k(2) * os - k.k(4) * o * os - k.k(5) * o * s
        + k.k(6) * ost
        + k.k(18) * o2 * os
        - e.k1p * o * s;
    let f_o2 = gas.flux(Gas::O2) + k.k(8) * ost * ost + k.k(9) * os * os
        - k.k(16) * o2 * s * s
        - k.k(18) * o2 * os
        - k.k(19) * o2 * s * s;
    let cn = k.k(12) * n * ns + k.k(15) * ns;
    let f_n = match model {
        SurfaceModel::Hifi => {
            gas.flux(Gas::N) - k.k(10) * n * s + k.k(11) * ns - k.k(13) * n * ns
        }
        // Placeholder adsorption consumes atomic nitrogen.
        _ => 0.0 - e.k2p * n * s,
    };
    let n2 = k.k(13) * n * ns + k.k(14) * ns * ns;

    Fluxes {
        co,
        co2,
        o: f_o,
        o2: f_o2,
        cn,
        n: f_n,
        n2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> SiteDensity {
        SiteDensity::default()
    }

    fn gas(t: f64, p: f64, x: [f64; 3]) -> GasState {
        GasState::from_partial_pressures(t, p, [x[0] * p, x[1] * p, x[2] * p]).unwrap()
    }

    #[test]
    fn empty_environment_leaves_surface_free() {
        let g = GasState::empty(1500.0).unwrap();
        for sol in [
            solve_hifi(&g, b()).unwrap(),
            solve_lofi(&g, b()).unwrap(),
            solve_enriched(&g, b(), EnrichmentRates::physical(1500.0, b(), 1e5).unwrap()).unwrap(),
        ] {
            assert_eq!(sol.free_sites, 1e-5);
            assert_eq!(sol.coverage, Coverages::default());
            assert_eq!(co_flux(&sol), 0.0);
            assert_eq!(sol.flux.o, 0.0);
            assert_eq!(sol.flux.o2, 0.0);
        }
    }

    #[test]
    fn nitrogen_free_gas_has_no_bonded_nitrogen() {
        let sol = solve_hifi(&gas(2100.0, 2e4, [0.2, 0.0, 0.05]), b()).unwrap();
        assert_eq!(sol.coverage.n_s, 0.0);
        assert_eq!(sol.flux.cn, 0.0);
    }

    #[test]
    fn decoupled_placeholder_reproduces_lofi_exactly() {
        for (t, p) in [(900.0, 300.0), (1700.0, 2e4), (3100.0, 9e4)] {
            let g = gas(t, p, [0.15, 0.03, 0.04]);
            let lo = solve_lofi(&g, b()).unwrap();
            for k3p in [1e-3, 1.0, 1e9] {
                let en = solve_enriched(&g, b(), EnrichmentRates::decoupled(k3p)).unwrap();
                assert_eq!(en, lo);
            }
        }
    }

    #[test]
    fn zero_pseudo_rate_with_active_placeholder_is_singular() {
        let g = gas(1500.0, 1e4, [0.2, 0.01, 0.0]);
        let rates = EnrichmentRates::physical(1500.0, b(), 0.0).unwrap();
        assert!(matches!(solve_enriched(&g, b(), rates), Err(Error::SingularPlaceholder)));
        // no placeholder adsorption -> nothing to balance
        let g0 = gas(1500.0, 1e4, [0.0, 0.0, 0.2]);
        assert!(solve_enriched(&g0, b(), rates).is_ok());
    }

    #[test]
    fn fast_pseudo_reaction_passes_adsorption_straight_to_co() {
        let t = 1900.0;
        let g = gas(t, 3e4, [0.18, 0.02, 0.03]);
        let rates = EnrichmentRates::physical(t, b(), 1e12).unwrap();
        let en = solve_enriched(&g, b(), rates).unwrap();
        let lo = solve_lofi(&g, b()).unwrap();
        let adsorption = (rates.k1p * g.conc(Gas::O) + rates.k2p * g.conc(Gas::N)) * en.free_sites;
        assert!(en.coverage.p_s / 1e-5 < 1e-4);
        let pseudo_flux = rates.k3p * en.coverage.p_s;
        assert!((pseudo_flux - adsorption).abs() / adsorption < 1e-12);
        let expected = lo.flux.co + adsorption;
        assert!((en.flux.co - expected).abs() / expected < 1e-3);
    }

    #[test]
    fn conservation_holds_for_each_model() {
        let g = gas(1300.0, 5e3, [0.12, 0.05, 0.08]);
        let rates = EnrichmentRates::physical(1300.0, b(), 3e5).unwrap();
        for sol in [
            solve_hifi(&g, b()).unwrap(),
            solve_lofi(&g, b()).unwrap(),
            solve_enriched(&g, b(), rates).unwrap(),
        ] {
            assert!(sol.conservation_error(b()) <= 1e-10 * 1e-5);
            assert!(sol.residual.abs() <= 1e-10 * 1e-5);
            assert!(sol.iterations <= 200);
            for v in sol.coverage.as_array() {
                assert!((0.0..=1e-5).contains(&v));
            }
        }
    }

    #[test]
    fn lofi_holds_more_strong_oxygen_than_hifi() {
        for t in [850.0, 1400.0, 2000.0, 2700.0, 3400.0] {
            for p in [1e2, 3e3, 1e5] {
                for x in [[0.2, 0.0, 0.01], [0.1, 0.1, 0.05], [0.02, 0.01, 0.2]] {
                    let g = gas(t, p, x);
                    let hi = solve_hifi(&g, b()).unwrap();
                    let lo = solve_lofi(&g, b()).unwrap();
                    assert!(lo.free_sites >= hi.free_sites);
                    assert!(lo.coverage.ostar_s >= hi.coverage.ostar_s * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn negative_pseudo_rate_is_rejected() {
        let g = gas(1500.0, 1e4, [0.2, 0.01, 0.0]);
        assert!(solve_enriched(&g, b(), EnrichmentRates::decoupled(-1.0)).is_err());
    }
}
