use ablation_core::calib::{gaussian_nll, Standardizer};
use ablation_core::chem::{rate_coefficient, ReactionSet, SiteDensity, AVOGADRO, BOLTZMANN, GAS_CONSTANT};
use ablation_core::scenario::{densities_to_partial_pressures, mole_fractions, ScenarioPoint};
use ablation_core::surface::*;
use ablation_core::uq::{flux_ratio, summarize};
use proptest::prelude::*;

fn gas_state() -> impl Strategy<Value = GasState> {
    (800.0..3500.0f64, 2.0..5.0f64, 0.0..0.3f64, 0.0..0.1f64, 0.0..0.3f64).prop_map(|(t, lp, xo, xn, xo2)| {
        let p = 10f64.powf(lp);
        GasState::from_partial_pressures(t, p, [xo * p, xn * p, xo2 * p]).unwrap()
    })
}

fn with_pressures(g: &GasState, pressures: [f64; 3]) -> GasState {
    GasState::from_partial_pressures(g.temperature, g.total_pressure.max(pressures.iter().sum()), pressures).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn coverages_are_bounded_and_conserve_sites(g in gas_state(), log_k3p in 0.0..25.0f64) {
        let b = SiteDensity::default();
        let en = EnrichmentRates::physical(g.temperature, b, log_k3p.exp()).unwrap();
        for sol in [solve_hifi(&g, b).unwrap(), solve_lofi(&g, b).unwrap(), solve_enriched(&g, b, en).unwrap()] {
            for c in sol.coverage.as_array() {
                prop_assert!((0.0..=b.value()).contains(&c));
            }
            prop_assert!((0.0..=b.value()).contains(&sol.free_sites));
            prop_assert!(sol.conservation_error(b) <= 1e-10 * b.value());
            prop_assert!(sol.flux.co >= 0.0);
        }
    }

    #[test]
    fn free_sites_fall_as_atomic_gas_rises(g in gas_state(), factor in 1.0..10.0f64, which in 0usize..2) {
        let b = SiteDensity::default();
        let mut p = g.partial_pressure;
        p[which] *= factor;
        let richer = with_pressures(&g, p);
        for (a, c) in [
            (solve_hifi(&g, b).unwrap(), solve_hifi(&richer, b).unwrap()),
            (solve_lofi(&g, b).unwrap(), solve_lofi(&richer, b).unwrap()),
        ] {
            prop_assert!(c.free_sites <= a.free_sites * (1.0 + 1e-12));
        }
    }

    #[test]
    fn mole_fractions_sum_to_one(rho in prop::array::uniform5(0.0..1.0f64), t in 1900.0..4500.0f64) {
        prop_assume!(rho.iter().sum::<f64>() > 1e-6);
        let point = ScenarioPoint {
            altitude_km: 30.0,
            x_m: 0.0,
            raw_temperature: t,
            total_pressure: 1e4,
            density: rho,
        };
        let x = mole_fractions(&point).unwrap();
        prop_assert!((x.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let p = densities_to_partial_pressures(&point).unwrap();
        for v in p {
            prop_assert!(v >= 0.0 && v <= point.total_pressure * (1.0 + 1e-12));
        }
    }

    #[test]
    fn standardization_round_trips(rows in prop::collection::vec(prop::array::uniform3(-1e3..1e3f64), 2..30)) {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        let s = Standardizer::fit(&rows);
        for r in &rows {
            let back = s.destandardize(&s.standardize(r));
            for (a, b) in r.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn pointwise_loss_is_nonnegative(f_hi in 1e-6..1e6f64, rel in 0.0..3.0f64) {
        prop_assert!(gaussian_nll(f_hi, f_hi * rel).unwrap() >= 0.0);
    }

    #[test]
    fn box_summary_is_ordered(samples in prop::collection::vec(-50.0..50.0f64, 2..200)) {
        let s = summarize(&samples).unwrap();
        prop_assert!(s.min <= s.whisker_lo && s.whisker_lo <= s.q1);
        prop_assert!(s.q1 <= s.median && s.median <= s.q3);
        prop_assert!(s.q3 <= s.whisker_hi && s.whisker_hi <= s.max);
    }

    #[test]
    fn flux_ratio_is_positive_and_one_for_itself(v in prop::collection::vec(1e-3..1e3f64, 1..80)) {
        prop_assert_eq!(flux_ratio(&v, &v).unwrap(), 1.0);
        let half: Vec<f64> = v.iter().map(|x| x * 0.5).collect();
        prop_assert!(flux_ratio(&half, &v).unwrap() > 0.0);
    }

    #[test]
    fn rate_coefficients_are_nonnegative(t in 300.0..5000.0f64) {
        let b = SiteDensity::default();
        for set in [ReactionSet::aca(), ReactionSet::reduced(), ReactionSet::enriched()] {
            for r in set.reactions() {
                if r.s_or_gamma().is_none() {
                    continue;
                }
                let k = rate_coefficient(r, t, b).unwrap();
                prop_assert!(k >= 0.0 && k.is_finite(), "{} at {t}: {k}", r.id());
            }
        }
    }
}

#[test]
fn gas_constant_is_avogadro_times_boltzmann() {
    assert!((GAS_CONSTANT / (AVOGADRO * BOLTZMANN) - 1.0).abs() <= 1e-10);
}

#[test]
fn only_oxygen_adsorption_uses_two_sites() {
    for set in [ReactionSet::aca(), ReactionSet::reduced(), ReactionSet::enriched()] {
        for r in set.reactions() {
            if r.site_order() == 2 {
                assert_eq!(r.gas_reactant(), Some(ablation_core::chem::Species::O2), "{}", r.id());
            }
        }
    }
}
