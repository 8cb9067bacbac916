use std::fs;

use ablation_core::chem::SiteDensity;
use ablation_core::scenario::io::*;
use ablation_core::scenario::*;
use ablation_core::surface::{solve_hifi, solve_lofi};
use ablation_core::Error;

fn scenarios() -> Vec<Scenario> {
    generate_synthetic_scenarios(11, &[20.0, 35.0]).unwrap()
}

#[test]
fn scenario_files_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let original = scenarios();
    let manifest = write_scenarios(dir.path(), &original).unwrap();
    for from in [dir.path().to_owned(), manifest] {
        let back = read_scenarios(&from).unwrap();
        assert_eq!(back, original);
    }
    let single = read_scenarios(&dir.path().join("scenario_35km.json")).unwrap();
    assert_eq!(single, vec![original[1].clone()]);
}

#[test]
fn missing_column_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let sidecar = write_scenario(dir.path(), &scenarios()[0]).unwrap();
    let csv = dir.path().join("scenario_20km.csv");
    let text = fs::read_to_string(&csv).unwrap().replacen("rho_N2", "rho_X", 1);
    fs::write(&csv, text).unwrap();
    match read_scenario(&sidecar) {
        Err(Error::Schema { message, .. }) => assert!(message.contains("rho_N2"), "{message}"),
        other => panic!("expected a schema error, got {other:?}"),
    }
}

#[test]
fn sidecar_without_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let sidecar = write_scenario(dir.path(), &scenarios()[0]).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sidecar).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("schema_version");
    fs::write(&sidecar, v.to_string()).unwrap();
    match read_scenario(&sidecar) {
        Err(Error::Schema { message, .. }) => assert!(message.contains("legacy"), "{message}"),
        other => panic!("expected a schema error, got {other:?}"),
    }
}

#[test]
fn future_schema_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let sidecar = write_scenario(dir.path(), &scenarios()[0]).unwrap();
    let text = fs::read_to_string(&sidecar)
        .unwrap()
        .replace("\"schema_version\": 1", "\"schema_version\": 2");
    fs::write(&sidecar, text).unwrap();
    assert!(matches!(read_scenario(&sidecar), Err(Error::Schema { .. })));
}

#[test]
fn bad_number_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let sidecar = write_scenario(dir.path(), &scenarios()[0]).unwrap();
    let csv = dir.path().join("scenario_20km.csv");
    let mut lines: Vec<String> = fs::read_to_string(&csv).unwrap().lines().map(str::to_owned).collect();
    // third data row, pressure column
    let mut cells: Vec<String> = lines[3].split(',').map(str::to_owned).collect();
    cells[3] = "abc".into();
    lines[3] = cells.join(",");
    fs::write(&csv, lines.join("\n") + "\n").unwrap();
    match read_scenario(&sidecar) {
        Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (4, 4)),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn truncated_scenario_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let sidecar = write_scenario(dir.path(), &scenarios()[0]).unwrap();
    let csv = dir.path().join("scenario_20km.csv");
    let text = fs::read_to_string(&csv).unwrap();
    let kept: Vec<&str> = text.lines().take(40).collect();
    fs::write(&csv, kept.join("\n") + "\n").unwrap();
    assert!(matches!(read_scenario(&sidecar), Err(Error::Schema { .. })));
}

#[test]
fn table_schema_line_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    write_table(&path, Some("thing v1"), &["a", "b"], &[vec!["1".to_string(), "2".to_string()]]).unwrap();
    let t = Table::read(&path, Some("thing v1"), &["a", "b"]).unwrap();
    assert_eq!(t.f64(0, "b").unwrap(), 2.0);
    assert!(matches!(Table::read(&path, Some("thing v2"), &[]), Err(Error::Schema { .. })));
    write_table(&path, None, &["a", "b"], &[vec!["1".to_string(), "2".to_string()]]).unwrap();
    assert!(matches!(Table::read(&path, Some("thing v1"), &[]), Err(Error::Schema { .. })));
}

#[test]
fn simulation_records_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = &scenarios()[0];
    let b = SiteDensity::default();
    let records: Vec<SimulationRecord> = s
        .points()
        .iter()
        .zip(s.gas_states().unwrap())
        .map(|(p, g)| SimulationRecord {
            altitude_km: p.altitude_km,
            x_m: p.x_m,
            model: "hifi".into(),
            solution: solve_hifi(&g, b).unwrap(),
        })
        .collect();
    let path = dir.path().join("sim.csv");
    write_simulation(&path, &records).unwrap();
    assert_eq!(read_simulation(&path).unwrap(), records);
}

#[test]
fn result_rows_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = &scenarios()[1];
    let b = SiteDensity::default();
    let rows: Vec<ResultRow> = s
        .points()
        .iter()
        .zip(s.gas_states().unwrap())
        .map(|(p, g)| {
            let h = solve_hifi(&g, b).unwrap();
            let l = solve_lofi(&g, b).unwrap();
            ResultRow {
                altitude_km: p.altitude_km,
                x_m: p.x_m,
                f_co_hifi: h.flux.co,
                f_co_lofi: l.flux.co,
                f_co_enriched_mean: h.flux.co / 3.0,
                f_co_enriched_q05: 0.1,
                f_co_enriched_q95: std::f64::consts::PI,
                hifi: h.coverage,
                free_sites_hifi: h.free_sites,
                lofi: l.coverage,
                free_sites_lofi: l.free_sites,
            }
        })
        .collect();
    let path = dir.path().join("results.csv");
    write_results(&path, &rows).unwrap();
    assert_eq!(read_results(&path).unwrap(), rows);
}

#[test]
fn zero_density_point_is_a_vacuum() {
    let p = ScenarioPoint {
        altitude_km: 30.0,
        x_m: 0.0,
        raw_temperature: 2500.0,
        total_pressure: 0.0,
        density: [0.0; 5],
    };
    assert!(matches!(densities_to_partial_pressures(&p), Err(Error::DegenerateMixture)));
    let g = build_gas_state(&p).unwrap();
    let sol = solve_hifi(&g, SiteDensity::default()).unwrap();
    assert_eq!(sol.flux.co, 0.0);
}
