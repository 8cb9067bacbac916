//! Scenario files (CSV plus JSON sidecar), manifests and result tables.
//!
//! Floats are written in shortest round-trip exponent form, so a write/read
//! cycle reproduces values bit for bit and reruns produce identical bytes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Scenario, ScenarioLabel, ScenarioPoint};
use crate::error::{Error, Result};
use crate::surface::{Coverages, Fluxes, SurfaceSolution};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

pub const SCENARIO_COLUMNS: [&str; 9] = [
    "altitude_km",
    "x_m",
    "T_raw_K",
    "P_total_Pa",
    "rho_O",
    "rho_O2",
    "rho_N",
    "rho_N2",
    "rho_NO",
];

/// Lossless text form of a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn schema_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Schema {
        path: display(path),
        message: message.into(),
    }
}

/// Writes a CSV table, optionally preceded by a `#schema` comment line.
pub fn write_table<S: AsRef<str>>(
    path: &Path,
    schema: Option<&str>,
    header: &[S],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = String::new();
    if let Some(s) = schema {
        writeln!(out, "#schema {s}").unwrap();
    }
    let head: Vec<&str> = header.iter().map(|h| h.as_ref()).collect();
    out.push_str(&head.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), head.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// A parsed CSV table with line numbers kept for error reporting.
#[derive(Debug, Clone)]
pub struct Table {
    path: PathBuf,
    columns: HashMap<String, usize>,
    header: Vec<String>,
    rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    /// Reads `path`. When `schema` is given the first line must be
    /// `#schema <schema>`. Every name in `required` must be a column.
    pub fn read(path: &Path, schema: Option<&str>, required: &[&str]) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut body = text.as_str();
        let mut offset = 0u64;
        if let Some(expected) = schema {
            let first = text.lines().next().unwrap_or("");
            match first.strip_prefix("#schema ") {
                Some(found) if found.trim() == expected => {}
                Some(found) => {
                    return Err(schema_err(
                        path,
                        format!("unsupported schema `{}` (expected `{expected}`)", found.trim()),
                    ))
                }
                None => {
                    return Err(schema_err(
                        path,
                        format!("missing `#schema {expected}` line; files without a schema version are not accepted"),
                    ))
                }
            }
            body = &text[first.len()..];
            body = body.strip_prefix('\n').unwrap_or(body);
            offset = 1;
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let parse_err = |line: u64, column: usize, message: String| Error::Parse {
            path: display(path),
            line,
            column,
            message,
        };
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| parse_err(offset + 1, 1, e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        let columns: HashMap<String, usize> =
            header.iter().enumerate().map(|(i, h)| (h.clone(), i)).collect();
        for name in required {
            if !columns.contains_key(*name) {
                return Err(schema_err(path, format!("missing column `{name}`")));
            }
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line()) + offset;
                parse_err(line, 1, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line()) + offset;
            rows.push((line, rec.iter().map(str::to_owned).collect()));
        }
        Ok(Self {
            path: path.to_owned(),
            columns,
            header,
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn str(&self, row: usize, column: &str) -> Result<&str> {
        let &col = self
            .columns
            .get(column)
            .ok_or_else(|| schema_err(&self.path, format!("missing column `{column}`")))?;
        Ok(&self.rows[row].1[col])
    }

    pub fn f64(&self, row: usize, column: &str) -> Result<f64> {
        let text = self.str(row, column)?;
        text.parse::<f64>().map_err(|_| Error::Parse {
            path: display(&self.path),
            line: self.rows[row].0,
            column: self.columns[column] + 1,
            message: format!("`{text}` in column `{column}` is not a number"),
        })
    }

    pub fn u64(&self, row: usize, column: &str) -> Result<u64> {
        let text = self.str(row, column)?;
        text.parse::<u64>().map_err(|_| Error::Parse {
            path: display(&self.path),
            line: self.rows[row].0,
            column: self.columns[column] + 1,
            message: format!("`{text}` in column `{column}` is not an unsigned integer"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSidecar {
    pub schema_version: u32,
    pub altitude_km: f64,
    pub label: ScenarioLabel,
    pub seed: Option<u64>,
    pub points: usize,
    pub csv: String,
}

fn read_versioned_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: display(path),
        line: e.line() as u64,
        column: e.column(),
        message: e.to_string(),
    })?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        None => {
            return Err(schema_err(
                path,
                "no `schema_version` field; legacy files are not supported, regenerate them",
            ))
        }
        Some(v) if v != u64::from(SCHEMA_VERSION) => {
            return Err(schema_err(
                path,
                format!("schema_version {v} is not supported (expected {SCHEMA_VERSION})"),
            ))
        }
        Some(_) => {}
    }
    serde_json::from_value(value).map_err(|e| schema_err(path, e.to_string()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns the sidecar path.
pub fn write_scenario(dir: &Path, scenario: &Scenario) -> Result<PathBuf> {
    let stem = scenario.stem();
    let csv_name = format!("{stem}.csv");
    let rows: Vec<Vec<String>> = scenario
        .points()
        .iter()
        .map(|p| {
            let mut row = vec![
                fmt_f64(p.altitude_km),
                fmt_f64(p.x_m),
                fmt_f64(p.raw_temperature),
                fmt_f64(p.total_pressure),
            ];
            row.extend(p.density.iter().map(|&d| fmt_f64(d)));
            row
        })
        .collect();
    write_table(&dir.join(&csv_name), None, &SCENARIO_COLUMNS, &rows)?;
    let sidecar = ScenarioSidecar {
        schema_version: SCHEMA_VERSION,
        altitude_km: scenario.altitude_km,
        label: scenario.label,
        seed: scenario.seed,
        points: scenario.points().len(),
        csv: csv_name,
    };
    let path = dir.join(format!("{stem}.json"));
    write_json(&path, &sidecar)?;
    Ok(path)
}

/// Reads a scenario from its JSON sidecar.
pub fn read_scenario(sidecar_path: &Path) -> Result<Scenario> {
    let meta: ScenarioSidecar = read_versioned_json(sidecar_path)?;
    let dir = sidecar_path.parent().unwrap_or(Path::new("."));
    let csv_path = dir.join(&meta.csv);
    let table = Table::read(&csv_path, None, &SCENARIO_COLUMNS)?;
    if table.len() != meta.points {
        return Err(schema_err(
            &csv_path,
            format!("{} rows but the sidecar declares {}", table.len(), meta.points),
        ));
    }
    let mut points = Vec::with_capacity(table.len());
    for r in 0..table.len() {
        let mut density = [0.0; 5];
        for (k, col) in SCENARIO_COLUMNS[4..].iter().enumerate() {
            density[k] = table.f64(r, col)?;
        }
        points.push(ScenarioPoint {
            altitude_km: table.f64(r, "altitude_km")?,
            x_m: table.f64(r, "x_m")?,
            raw_temperature: table.f64(r, "T_raw_K")?,
            total_pressure: table.f64(r, "P_total_Pa")?,
            density,
        });
    }
    Scenario::new(meta.altitude_km, meta.label, meta.seed, points)
        .map_err(|e| schema_err(&csv_path, e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    /// Sidecar file names, relative to the manifest.
    pub scenarios: Vec<String>,
}

/// Writes every scenario and a manifest listing them; returns the manifest path.
pub fn write_scenarios(dir: &Path, scenarios: &[Scenario]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut names = Vec::with_capacity(scenarios.len());
    for s in scenarios {
        let p = write_scenario(dir, s)?;
        names.push(p.file_name().unwrap().to_string_lossy().into_owned());
    }
    let path = dir.join(MANIFEST_NAME);
    write_json(
        &path,
        &Manifest {
            schema_version: SCHEMA_VERSION,
            scenarios: names,
        },
    )?;
    Ok(path)
}

/// Reads scenarios from a directory (via its manifest), a manifest file or
/// a single sidecar.
pub fn read_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    let manifest_path = if path.is_dir() {
        path.join(MANIFEST_NAME)
    } else {
        path.to_owned()
    };
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest_path)?)
        .map_err(|e| Error::Parse {
            path: display(&manifest_path),
            line: e.line() as u64,
            column: e.column(),
            message: e.to_string(),
        })?;
    if value.get("scenarios").is_none() {
        return Ok(vec![read_scenario(&manifest_path)?]);
    }
    let manifest: Manifest = read_versioned_json(&manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    manifest.scenarios.iter().map(|n| read_scenario(&dir.join(n))).collect()
}

pub const SIMULATION_SCHEMA: &str = "simulation v1";
pub const SIMULATION_COLUMNS: [&str; 17] = [
    "altitude_km",
    "x_m",
    "model",
    "f_CO",
    "f_CO2",
    "f_O",
    "f_O2",
    "f_CN",
    "f_N",
    "f_N2",
    "O_s",
    "Ostar_s",
    "N_s",
    "P_s",
    "free_sites",
    "residual",
    "iterations",
];

/// One solved point of a simulation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub altitude_km: f64,
    pub x_m: f64,
    pub model: String,
    pub solution: SurfaceSolution,
}

pub fn write_simulation(path: &Path, records: &[SimulationRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            let s = &r.solution;
            let f = &s.flux;
            let c = &s.coverage;
            vec![
                fmt_f64(r.altitude_km),
                fmt_f64(r.x_m),
                r.model.clone(),
                fmt_f64(f.co),
                fmt_f64(f.co2),
                fmt_f64(f.o),
                fmt_f64(f.o2),
                fmt_f64(f.cn),
                fmt_f64(f.n),
                fmt_f64(f.n2),
                fmt_f64(c.o_s),
                fmt_f64(c.ostar_s),
                fmt_f64(c.n_s),
                fmt_f64(c.p_s),
                fmt_f64(s.free_sites),
                fmt_f64(s.residual),
                s.iterations.to_string(),
            ]
        })
        .collect();
    write_table(path, Some(SIMULATION_SCHEMA), &SIMULATION_COLUMNS, &rows)
}

pub fn read_simulation(path: &Path) -> Result<Vec<SimulationRecord>> {
    let t = Table::read(path, Some(SIMULATION_SCHEMA), &SIMULATION_COLUMNS)?;
    (0..t.len())
        .map(|r| {
            Ok(SimulationRecord {
                altitude_km: t.f64(r, "altitude_km")?,
                x_m: t.f64(r, "x_m")?,
                model: t.str(r, "model")?.to_owned(),
                solution: SurfaceSolution {
                    coverage: Coverages {
                        o_s: t.f64(r, "O_s")?,
                        ostar_s: t.f64(r, "Ostar_s")?,
                        n_s: t.f64(r, "N_s")?,
                        p_s: t.f64(r, "P_s")?,
                    },
                    free_sites: t.f64(r, "free_sites")?,
                    flux: Fluxes {
                        co: t.f64(r, "f_CO")?,
                        co2: t.f64(r, "f_CO2")?,
                        o: t.f64(r, "f_O")?,
                        o2: t.f64(r, "f_O2")?,
                        cn: t.f64(r, "f_CN")?,
                        n: t.f64(r, "f_N")?,
                        n2: t.f64(r, "f_N2")?,
                    },
                    residual: t.f64(r, "residual")?,
                    iterations: t.u64(r, "iterations")? as usize,
                },
            })
        })
        .collect()
}

pub const RESULTS_SCHEMA: &str = "results v1";
pub const RESULTS_COLUMNS: [&str; 13] = [
    "altitude_km",
    "x_m",
    "f_CO_hifi",
    "f_CO_lofi",
    "f_CO_enriched_mean",
    "f_CO_enriched_q05",
    "f_CO_enriched_q95",
    "O_s_hifi",
    "Ostar_s_hifi",
    "N_s_hifi",
    "free_sites_hifi",
    "Ostar_s_lofi",
    "free_sites_lofi",
];

/// Per-point comparison of the three models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub altitude_km: f64,
    pub x_m: f64,
    pub f_co_hifi: f64,
    pub f_co_lofi: f64,
    pub f_co_enriched_mean: f64,
    pub f_co_enriched_q05: f64,
    pub f_co_enriched_q95: f64,
    pub hifi: Coverages,
    pub free_sites_hifi: f64,
    pub lofi: Coverages,
    pub free_sites_lofi: f64,
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            [
                r.altitude_km,
                r.x_m,
                r.f_co_hifi,
                r.f_co_lofi,
                r.f_co_enriched_mean,
                r.f_co_enriched_q05,
                r.f_co_enriched_q95,
                r.hifi.o_s,
                r.hifi.ostar_s,
                r.hifi.n_s,
                r.free_sites_hifi,
                r.lofi.ostar_s,
                r.free_sites_lofi,
            ]
            .iter()
            .map(|&v| fmt_f64(v))
            .collect()
        })
        .collect();
    write_table(path, Some(RESULTS_SCHEMA), &RESULTS_COLUMNS, &rows)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let t = Table::read(path, Some(RESULTS_SCHEMA), &RESULTS_COLUMNS)?;
    (0..t.len())
        .map(|r| {
            Ok(ResultRow {
                altitude_km: t.f64(r, "altitude_km")?,
                x_m: t.f64(r, "x_m")?,
                f_co_hifi: t.f64(r, "f_CO_hifi")?,
                f_co_lofi: t.f64(r, "f_CO_lofi")?,
                f_co_enriched_mean: t.f64(r, "f_CO_enriched_mean")?,
                f_co_enriched_q05: t.f64(r, "f_CO_enriched_q05")?,
                f_co_enriched_q95: t.f64(r, "f_CO_enriched_q95")?,
                hifi: Coverages {
                    o_s: t.f64(r, "O_s_hifi")?,
                    ostar_s: t.f64(r, "Ostar_s_hifi")?,
                    n_s: t.f64(r, "N_s_hifi")?,
                    p_s: 0.0,
                },
                free_sites_hifi: t.f64(r, "free_sites_hifi")?,
                lofi: Coverages {
                    ostar_s: t.f64(r, "Ostar_s_lofi")?,
                    ..Coverages::default()
                },
                free_sites_lofi: t.f64(r, "free_sites_lofi")?,
            })
        })
        .collect()
}

/// Serializes `value` as versioned pretty JSON.
pub fn write_versioned_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json(path, value)
}

/// Reads JSON that must carry `schema_version == 1`.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    read_versioned_json(path)
}
