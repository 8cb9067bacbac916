use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ablation_core::calib::{
    band_coverage, train_enrichment, BandCoverage, GpArtifact, GpModel, PointwiseFit, PointwiseProblem,
};
use ablation_core::scenario::io::{
    fmt_f64, read_json, read_scenarios, read_simulation, write_results, write_scenarios, write_simulation,
    write_table, write_versioned_json, ResultRow, SimulationRecord, Table, SCHEMA_VERSION,
};
use ablation_core::scenario::{synthetic_scenario, InputVector, Scenario, ScenarioLabel};
use ablation_core::surface::transient::{integrate_to_steady, max_relative_deviation, TransientSettings};
use ablation_core::surface::{AcaRates, EnrichmentRates, GasState, SurfaceModel, SurfaceSolution};
use ablation_core::uq::{propagate as propagate_scenario, BoxSummary, FluxRatioResult};

use crate::config::PipelineConfig;
use crate::{Failure, FailureKind};

/// Largest closed-form vs. integration discrepancy `--verify` accepts.
pub const VERIFY_TOLERANCE: f64 = 1e-6;

fn io_err(context: impl std::fmt::Display) -> impl FnOnce(std::io::Error) -> Failure {
    move |e| Failure::io(format!("{context}: {e}"))
}

fn core_err(fallback: FailureKind) -> impl Fn(ablation_core::Error) -> Failure {
    move |e| Failure::from_core(e, fallback)
}

fn refuse_overwrite(paths: &[PathBuf], force: bool) -> Result<(), Failure> {
    if force {
        return Ok(());
    }
    if let Some(p) = paths.iter().find(|p| p.exists()) {
        return Err(Failure::io(format!(
            "{} already exists; pass --force to overwrite",
            p.display()
        )));
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(io_err(format!("cannot create {}", dir.display())))
}

fn pool() -> Result<rayon::ThreadPool, Failure> {
    let n = crate::worker_count()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Failure::io(format!("cannot start {n} worker threads: {e}")))
}

fn load_scenarios(cfg: &PipelineConfig) -> Result<Vec<Scenario>, Failure> {
    let dir = cfg.scenario_dir();
    if !dir.join("manifest.json").exists() {
        return Err(Failure::io(format!(
            "no scenarios at {}; run `ablation generate` first",
            dir.display()
        )));
    }
    read_scenarios(&dir).map_err(core_err(FailureKind::Io))
}

fn simulation_path(cfg: &PipelineConfig, model: &str, altitude: f64) -> PathBuf {
    cfg.results_dir().join(format!("simulation_{model}_{altitude}km.csv"))
}

/// Seed for per-scenario randomness, stable under reordering of scenarios.
pub fn scenario_seed(seed: u64, altitude: f64) -> u64 {
    let mut z = seed ^ altitude.to_bits();
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------- generate

#[derive(Debug, Clone, Default)]
pub struct GenerateArgs {
    pub seed: Option<u64>,
    pub altitudes: Option<Vec<f64>>,
    pub force: bool,
}

pub fn generate(cfg: &PipelineConfig, args: &GenerateArgs) -> Result<(), Failure> {
    let seed = args.seed.or(cfg.scenarios.generator_seed).unwrap_or(cfg.seed);
    let altitudes = args.altitudes.clone().unwrap_or_else(|| cfg.split.all());
    if altitudes.is_empty() {
        return Err(Failure::io("no altitudes to generate"));
    }
    let dir = cfg.scenario_dir();
    refuse_overwrite(&[dir.join("manifest.json")], args.force)?;
    let scenarios = altitudes
        .iter()
        .map(|&a| {
            let label = if cfg.split.validation.contains(&a) {
                ScenarioLabel::Validation
            } else {
                ScenarioLabel::Calibration
            };
            synthetic_scenario(seed, a, label)
        })
        .collect::<ablation_core::Result<Vec<_>>>()
        .map_err(core_err(FailureKind::Io))?;
    let manifest = write_scenarios(&dir, &scenarios).map_err(core_err(FailureKind::Io))?;
    println!(
        "generated {} scenarios (seed {seed}) -> {}",
        scenarios.len(),
        manifest.display()
    );
    Ok(())
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Hifi,
    Lofi,
    Enriched,
}

impl ModelChoice {
    pub fn name(self) -> &'static str {
        match self {
            ModelChoice::Hifi => "hifi",
            ModelChoice::Lofi => "lofi",
            ModelChoice::Enriched => "enriched",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub model: ModelChoice,
    /// Constant pseudo-reaction rate, 1/s.
    pub k3p: Option<f64>,
    /// Placeholder adsorption of O and N (off reduces enriched to lofi).
    pub placeholder: bool,
    pub artifact: Option<PathBuf>,
    pub verify: bool,
    pub force: bool,
}

impl Default for SimulateArgs {
    fn default() -> Self {
        Self {
            model: ModelChoice::Hifi,
            k3p: None,
            placeholder: true,
            artifact: None,
            verify: false,
            force: false,
        }
    }
}

enum RateSource {
    None,
    Constant(f64),
    Gp(Box<GpModel>),
}

fn load_artifact(path: &Path) -> Result<GpModel, Failure> {
    if !path.exists() {
        return Err(Failure::io(format!(
            "no trained model at {}; run `ablation calibrate` first",
            path.display()
        )));
    }
    let artifact: GpArtifact = read_json(path).map_err(core_err(FailureKind::Io))?;
    GpModel::from_artifact(artifact).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn point_model(
    choice: ModelChoice,
    source: &RateSource,
    placeholder: bool,
    gas: &GasState,
    input: &InputVector,
    cfg: &PipelineConfig,
) -> ablation_core::Result<SurfaceModel> {
    Ok(match choice {
        ModelChoice::Hifi => SurfaceModel::Hifi,
        ModelChoice::Lofi => SurfaceModel::Lofi,
        ModelChoice::Enriched => {
            let k3p = match source {
                RateSource::Constant(k) => *k,
                RateSource::Gp(gp) => gp.predict(input).0.exp(),
                RateSource::None => unreachable!("checked by caller"),
            };
            let rates = if placeholder {
                EnrichmentRates::physical(gas.temperature, cfg.site_density(), k3p)?
            } else {
                EnrichmentRates::decoupled(k3p)
            };
            SurfaceModel::Enriched(rates)
        }
    })
}

struct PointOutcome {
    solution: ablation_core::Result<SurfaceSolution>,
    deviation: Option<ablation_core::Result<f64>>,
}

pub fn simulate(cfg: &PipelineConfig, args: &SimulateArgs) -> Result<(), Failure> {
    let source = match (args.model, args.k3p, &args.artifact) {
        (ModelChoice::Enriched, Some(_), Some(_)) => {
            return Err(Failure::io("give either --k3p or --model-artifact, not both"))
        }
        (ModelChoice::Enriched, Some(k), None) => {
            if !(k.is_finite() && k >= 0.0) {
                return Err(Failure::io(format!("--k3p must be finite and >= 0, got {k}")));
            }
            RateSource::Constant(k)
        }
        (ModelChoice::Enriched, None, path) => {
            let path = path.clone().unwrap_or_else(|| cfg.artifact_path());
            RateSource::Gp(Box::new(load_artifact(&path)?))
        }
        (_, None, None) => RateSource::None,
        _ => return Err(Failure::io("--k3p and --model-artifact apply to the enriched model only")),
    };
    let scenarios = load_scenarios(cfg)?;
    let outputs: Vec<PathBuf> = scenarios
        .iter()
        .map(|s| simulation_path(cfg, args.model.name(), s.altitude_km))
        .collect();
    refuse_overwrite(&outputs, args.force)?;
    ensure_dir(&cfg.results_dir())?;
    let pool = pool()?;
    let b = cfg.site_density();
    let solver = cfg.solver();

    let mut failures = 0usize;
    let mut worst_deviation: f64 = 0.0;
    for (scenario, out) in scenarios.iter().zip(&outputs) {
        let gases = scenario.gas_states().map_err(core_err(FailureKind::Io))?;
        let inputs = scenario.inputs().map_err(core_err(FailureKind::Io))?;
        let outcomes: Vec<PointOutcome> = pool.install(|| {
            gases
                .par_iter()
                .zip(inputs.par_iter())
                .map(|(gas, input)| {
                    let model = match point_model(args.model, &source, args.placeholder, gas, input, cfg) {
                        Ok(m) => m,
                        Err(e) => {
                            return PointOutcome {
                                solution: Err(e),
                                deviation: None,
                            }
                        }
                    };
                    let solution = model
                        .rates(gas.temperature, b)
                        .and_then(|k: AcaRates| model.solve(&k, gas, b, &solver));
                    let deviation = match (&solution, args.verify) {
                        (Ok(sol), true) => Some(
                            integrate_to_steady(&model, gas, b, &TransientSettings::default())
                                .map(|ode| max_relative_deviation(sol, &ode)),
                        ),
                        _ => None,
                    };
                    PointOutcome { solution, deviation }
                })
                .collect()
        });

        let mut records = Vec::with_capacity(outcomes.len());
        for (i, (o, point)) in outcomes.into_iter().zip(scenario.points()).enumerate() {
            match o.solution {
                Ok(solution) => records.push(SimulationRecord {
                    altitude_km: point.altitude_km,
                    x_m: point.x_m,
                    model: args.model.name().to_owned(),
                    solution,
                }),
                Err(e) => {
                    failures += 1;
                    eprintln!("{} km, point {i} (x = {} m): {e}", scenario.altitude_km, point.x_m);
                }
            }
            match o.deviation {
                Some(Ok(d)) => worst_deviation = worst_deviation.max(d),
                Some(Err(e)) => {
                    failures += 1;
                    eprintln!("{} km, point {i}: oracle failed: {e}", scenario.altitude_km);
                }
                None => {}
            }
        }
        if records.len() == scenario.points().len() {
            write_simulation(out, &records).map_err(core_err(FailureKind::Io))?;
            info!("wrote {}", out.display());
        }
    }
    if args.verify {
        println!("max relative deviation from transient oracle: {worst_deviation:e}");
    }
    if failures > 0 {
        return Err(Failure::solver(format!("{failures} point solve(s) failed")));
    }
    if args.verify && worst_deviation > VERIFY_TOLERANCE {
        return Err(Failure::solver(format!(
            "closed form deviates from the transient oracle by {worst_deviation:e} (> {VERIFY_TOLERANCE:e})"
        )));
    }
    println!(
        "simulated {} model on {} scenarios -> {}",
        args.model.name(),
        scenarios.len(),
        cfg.results_dir().display()
    );
    Ok(())
}

// --------------------------------------------------------------- calibrate

/// Scenario data joined with its high-fidelity reference.
struct Reference {
    scenario: Scenario,
    gases: Vec<GasState>,
    inputs: Vec<InputVector>,
    hifi: Vec<SimulationRecord>,
}

fn load_reference(cfg: &PipelineConfig, scenario: Scenario) -> Result<Reference, Failure> {
    let path = simulation_path(cfg, "hifi", scenario.altitude_km);
    if !path.exists() {
        return Err(Failure::io(format!(
            "high-fidelity results for {} km not found at {}; run `ablation simulate --model hifi` first",
            scenario.altitude_km,
            path.display()
        )));
    }
    let hifi = read_simulation(&path).map_err(core_err(FailureKind::Io))?;
    let matches = hifi.len() == scenario.points().len()
        && hifi.iter().zip(scenario.points()).all(|(r, p)| r.x_m == p.x_m && r.model == "hifi");
    if !matches {
        return Err(Failure::io(format!(
            "{} does not match the {} km scenario",
            path.display(),
            scenario.altitude_km
        )));
    }
    Ok(Reference {
        gases: scenario.gas_states().map_err(core_err(FailureKind::Io))?,
        inputs: scenario.inputs().map_err(core_err(FailureKind::Io))?,
        scenario,
        hifi,
    })
}

fn fit_reference(
    pool: &rayon::ThreadPool,
    cfg: &PipelineConfig,
    r: &Reference,
) -> Result<Vec<PointwiseFit>, Failure> {
    let b = cfg.site_density();
    let nm = cfg.nelder_mead();
    pool.install(|| {
        (0..r.gases.len())
            .into_par_iter()
            .map(|i| {
                PointwiseProblem::new(r.gases[i], r.hifi[i].solution.flux.co, b)
                    .map(|p| p.fit(r.inputs[i], &nm))
            })
            .collect::<ablation_core::Result<Vec<_>>>()
    })
    .map_err(core_err(FailureKind::Calibration))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub schema_version: u32,
    pub calibration_altitudes: Vec<f64>,
    pub validation_altitudes: Vec<f64>,
    pub pointwise_fits: usize,
    pub converged: usize,
    /// `(altitude_km, x_m)` of fits left out of training.
    pub not_converged: Vec<(f64, f64)>,
    pub calibration_band: BandCoverage,
    pub validation_band: Option<BandCoverage>,
    pub selected_features: Vec<String>,
    pub lasso_lambda: f64,
    pub gp_features: Vec<String>,
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub noise: f64,
    pub log_marginal_likelihood: f64,
    pub training_digest: String,
}

const FIT_COLUMNS: [&str; 12] = [
    "altitude_km",
    "x_m",
    "role",
    "f_CO_hifi",
    "log_k3p_opt",
    "loss",
    "converged",
    "evaluations",
    "gp_mean",
    "gp_std",
    "inside_band",
    "used_in_training",
];

#[derive(Debug, Clone, Default)]
pub struct CalibrateArgs {
    pub force: bool,
}

pub fn calibrate(cfg: &PipelineConfig, args: &CalibrateArgs) -> Result<(), Failure> {
    let dir = cfg.calibration_dir();
    let artifact_path = cfg.artifact_path();
    let fits_path = dir.join("pointwise_fits.csv");
    let diag_path = dir.join("diagnostics.json");
    let selection_path = dir.join("feature_selection.json");
    refuse_overwrite(
        &[artifact_path.clone(), fits_path.clone(), diag_path.clone(), selection_path.clone()],
        args.force,
    )?;
    let scenarios = load_scenarios(cfg)?;
    let find = |a: f64| scenarios.iter().find(|s| s.altitude_km == a).cloned();

    let mut calibration = Vec::new();
    for &a in &cfg.split.calibration {
        let s = find(a).ok_or_else(|| Failure::io(format!("no scenario for calibration altitude {a} km")))?;
        calibration.push(load_reference(cfg, s)?);
    }
    let mut validation = Vec::new();
    for &a in &cfg.split.validation {
        match find(a) {
            Some(s) => match load_reference(cfg, s) {
                Ok(r) => validation.push(r),
                Err(e) => warn!("skipping validation altitude {a} km: {e}"),
            },
            None => warn!("no scenario for validation altitude {a} km"),
        }
    }

    let pool = pool()?;
    let mut cal_fits = Vec::new();
    for r in &calibration {
        cal_fits.extend(fit_reference(&pool, cfg, r)?);
    }
    let mut val_fits = Vec::new();
    for r in &validation {
        val_fits.extend(fit_reference(&pool, cfg, r)?);
    }
    let not_converged: Vec<(f64, f64)> = cal_fits
        .iter()
        .filter(|f| !f.converged)
        .map(|f| (f.input.altitude_km, f.input.x_m))
        .collect();
    for (a, x) in &not_converged {
        eprintln!("pointwise fit did not converge at {a} km, x = {x} m");
    }

    let cal = train_enrichment(&cal_fits, &cfg.calibration()).map_err(|e| Failure::calibration(e.to_string()))?;
    let val_band = (!val_fits.is_empty()).then(|| {
        let inputs: Vec<InputVector> = val_fits.iter().map(|f| f.input).collect();
        let targets: Vec<f64> = val_fits.iter().map(|f| f.log_k3p_opt).collect();
        band_coverage(&cal.gp, &inputs, &targets)
    });

    ensure_dir(&dir)?;
    let rows: Vec<Vec<String>> = cal_fits
        .iter()
        .map(|f| (f, "calibration"))
        .chain(val_fits.iter().map(|f| (f, "validation")))
        .map(|(f, role)| {
            let (m, s) = cal.gp.predict(&f.input);
            let inside = (f.log_k3p_opt - m).abs() <= ablation_core::calib::BAND_Z * s;
            vec![
                fmt_f64(f.input.altitude_km),
                fmt_f64(f.input.x_m),
                role.to_owned(),
                fmt_f64(f.hifi_co),
                fmt_f64(f.log_k3p_opt),
                fmt_f64(f.loss_at_opt),
                f.converged.to_string(),
                f.evaluations.to_string(),
                fmt_f64(m),
                fmt_f64(s),
                inside.to_string(),
                (role == "calibration" && f.converged).to_string(),
            ]
        })
        .collect();
    write_table(&fits_path, Some("pointwise-fits v1"), &FIT_COLUMNS, &rows).map_err(core_err(FailureKind::Io))?;
    let artifact = cal.gp.to_artifact();
    write_versioned_json(&artifact_path, &artifact).map_err(core_err(FailureKind::Io))?;
    #[derive(Serialize)]
    struct Versioned<'a, T> {
        schema_version: u32,
        #[serde(flatten)]
        inner: &'a T,
    }
    write_versioned_json(
        &selection_path,
        &Versioned {
            schema_version: SCHEMA_VERSION,
            inner: &cal.selection,
        },
    )
    .map_err(core_err(FailureKind::Io))?;
    let diagnostics = Diagnostics {
        schema_version: SCHEMA_VERSION,
        calibration_altitudes: cfg.split.calibration.clone(),
        validation_altitudes: validation.iter().map(|r| r.scenario.altitude_km).collect(),
        pointwise_fits: cal_fits.len(),
        converged: cal_fits.len() - not_converged.len(),
        not_converged,
        calibration_band: cal.coverage,
        validation_band: val_band,
        selected_features: cal.selection.selected_names(),
        lasso_lambda: cal.selection.lambda,
        gp_features: artifact.feature_names.clone(),
        lengthscales: artifact.lengthscales.clone(),
        signal_variance: artifact.signal_variance,
        noise: artifact.noise,
        log_marginal_likelihood: artifact.log_marginal_likelihood,
        training_digest: artifact.training_digest.clone(),
    };
    write_versioned_json(&diag_path, &diagnostics).map_err(core_err(FailureKind::Io))?;

    println!(
        "calibration targets inside 95% band: {}/{} ({:.1}%)",
        cal.coverage.inside,
        cal.coverage.total,
        100.0 * cal.coverage.fraction()
    );
    if let Some(v) = val_band {
        println!(
            "validation targets inside 95% band:  {}/{} ({:.1}%)",
            v.inside,
            v.total,
            100.0 * v.fraction()
        );
    }
    println!("selected features: {}", diagnostics.selected_features.join(", "));
    println!("model artifact: {} (digest {})", artifact_path.display(), artifact.training_digest);
    Ok(())
}

// --------------------------------------------------------------- propagate

#[derive(Debug, Clone, Default)]
pub struct PropagateArgs {
    pub samples: Option<usize>,
    pub artifact: Option<PathBuf>,
    pub force: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioFile {
    pub schema_version: u32,
    pub label: ScenarioLabel,
    pub seed: u64,
    #[serde(flatten)]
    pub result: FluxRatioResult,
}

pub const SUMMARY_SCHEMA: &str = "ratio-summary v1";
pub const SUMMARY_COLUMNS: [&str; 13] = [
    "altitude_km",
    "label",
    "ratio_lofi",
    "median",
    "q1",
    "q3",
    "whisker_lo",
    "whisker_hi",
    "min",
    "max",
    "samples",
    "failed",
    "ratio_hifi",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub altitude_km: f64,
    pub label: String,
    pub ratio_lofi: f64,
    pub summary: BoxSummary,
    pub samples: usize,
    pub failed: usize,
    pub ratio_hifi: f64,
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>, Failure> {
    let t = Table::read(path, Some(SUMMARY_SCHEMA), &SUMMARY_COLUMNS).map_err(core_err(FailureKind::Io))?;
    (0..t.len())
        .map(|r| {
            Ok(SummaryRow {
                altitude_km: t.f64(r, "altitude_km")?,
                label: t.str(r, "label")?.to_owned(),
                ratio_lofi: t.f64(r, "ratio_lofi")?,
                summary: BoxSummary {
                    median: t.f64(r, "median")?,
                    q1: t.f64(r, "q1")?,
                    q3: t.f64(r, "q3")?,
                    whisker_lo: t.f64(r, "whisker_lo")?,
                    whisker_hi: t.f64(r, "whisker_hi")?,
                    min: t.f64(r, "min")?,
                    max: t.f64(r, "max")?,
                },
                samples: t.u64(r, "samples")? as usize,
                failed: t.u64(r, "failed")? as usize,
                ratio_hifi: t.f64(r, "ratio_hifi")?,
            })
        })
        .collect::<ablation_core::Result<Vec<_>>>()
        .map_err(core_err(FailureKind::Io))
}

pub fn propagate(cfg: &PipelineConfig, args: &PropagateArgs) -> Result<(), Failure> {
    let count = args.samples.unwrap_or(cfg.propagation.samples);
    if count < 2 {
        return Err(Failure::io("at least 2 samples are needed for box statistics"));
    }
    let gp = load_artifact(&args.artifact.clone().unwrap_or_else(|| cfg.artifact_path()))?;
    let scenarios = load_scenarios(cfg)?;
    let dir = cfg.propagation_dir();
    let summary_path = dir.join("summary.csv");
    let mut outputs = vec![summary_path.clone()];
    for s in &scenarios {
        outputs.push(dir.join(format!("ratio_{}km.json", s.altitude_km)));
        outputs.push(cfg.results_dir().join(format!("results_{}km.csv", s.altitude_km)));
    }
    refuse_overwrite(&outputs, args.force)?;
    let references = scenarios
        .into_iter()
        .map(|s| load_reference(cfg, s))
        .collect::<Result<Vec<_>, _>>()?;

    let pool = pool()?;
    let b = cfg.site_density();
    let results: Vec<ablation_core::Result<(FluxRatioResult, Vec<SurfaceSolution>, u64)>> = pool.install(|| {
        references
            .par_iter()
            .map(|r| {
                let hifi: Vec<f64> = r.hifi.iter().map(|h| h.solution.flux.co).collect();
                let seed = scenario_seed(cfg.seed, r.scenario.altitude_km);
                let result = propagate_scenario(&r.scenario, &gp, &hifi, count, seed, b)?;
                let lofi = r
                    .gases
                    .iter()
                    .map(|g| ablation_core::surface::solve_lofi(g, b))
                    .collect::<ablation_core::Result<Vec<_>>>()?;
                Ok((result, lofi, seed))
            })
            .collect()
    });

    ensure_dir(&dir)?;
    ensure_dir(&cfg.results_dir())?;
    let mut summary_rows = Vec::new();
    let mut table = String::new();
    writeln!(table, "{:>8} {:>11} {:>9} {:>9} {:>9} {:>7}", "alt_km", "label", "R(lofi)", "R(en) med", "IQR", "failed").unwrap();
    for (r, res) in references.iter().zip(results) {
        let (result, lofi, seed) = res.map_err(core_err(FailureKind::Solver))?;
        let alt = r.scenario.altitude_km;
        let hifi: Vec<f64> = r.hifi.iter().map(|h| h.solution.flux.co).collect();
        let ratio_hifi = ablation_core::uq::flux_ratio(&hifi, &hifi).map_err(core_err(FailureKind::Solver))?;
        let summary = result.summary.ok_or_else(|| {
            Failure::solver(format!("{alt} km: fewer than 2 successful samples ({} failed)", result.failed))
        })?;
        if result.failed > 0 {
            warn!("{alt} km: {} of {count} samples failed", result.failed);
        }
        let rows: Vec<ResultRow> = r
            .hifi
            .iter()
            .zip(&lofi)
            .zip(&result.points)
            .map(|((h, l), band)| ResultRow {
                altitude_km: alt,
                x_m: h.x_m,
                f_co_hifi: h.solution.flux.co,
                f_co_lofi: l.flux.co,
                f_co_enriched_mean: band.mean,
                f_co_enriched_q05: band.q05,
                f_co_enriched_q95: band.q95,
                hifi: h.solution.coverage,
                free_sites_hifi: h.solution.free_sites,
                lofi: l.coverage,
                free_sites_lofi: l.free_sites,
            })
            .collect();
        write_results(&cfg.results_dir().join(format!("results_{alt}km.csv")), &rows)
            .map_err(core_err(FailureKind::Io))?;
        let sample_rows: Vec<Vec<String>> = result
            .samples
            .iter()
            .enumerate()
            .map(|(i, v)| vec![i.to_string(), fmt_f64(*v)])
            .collect();
        write_table(
            &dir.join(format!("samples_{alt}km.csv")),
            Some("ratio-samples v1"),
            &["sample", "ratio_enriched"],
            &sample_rows,
        )
        .map_err(core_err(FailureKind::Io))?;
        writeln!(
            table,
            "{:>8} {:>11} {:>9.4} {:>9.4} {:>9.4} {:>7}",
            alt,
            r.scenario.label.to_string(),
            result.ratio_lofi,
            summary.median,
            summary.q3 - summary.q1,
            result.failed
        )
        .unwrap();
        summary_rows.push(vec![
            fmt_f64(alt),
            r.scenario.label.to_string(),
            fmt_f64(result.ratio_lofi),
            fmt_f64(summary.median),
            fmt_f64(summary.q1),
            fmt_f64(summary.q3),
            fmt_f64(summary.whisker_lo),
            fmt_f64(summary.whisker_hi),
            fmt_f64(summary.min),
            fmt_f64(summary.max),
            result.samples.len().to_string(),
            result.failed.to_string(),
            fmt_f64(ratio_hifi),
        ]);
        write_versioned_json(
            &dir.join(format!("ratio_{alt}km.json")),
            &RatioFile {
                schema_version: SCHEMA_VERSION,
                label: r.scenario.label,
                seed,
                result,
            },
        )
        .map_err(core_err(FailureKind::Io))?;
    }
    write_table(&summary_path, Some(SUMMARY_SCHEMA), &SUMMARY_COLUMNS, &summary_rows)
        .map_err(core_err(FailureKind::Io))?;
    print!("{table}");
    println!("propagated {count} samples per scenario -> {}", dir.display());
    Ok(())
}

// ------------------------------------------------------------------ report

pub fn report(cfg: &PipelineConfig) -> Result<(), Failure> {
    let summary_path = cfg.propagation_dir().join("summary.csv");
    if !summary_path.exists() {
        return Err(Failure::io(format!(
            "no propagation summary at {}; run `ablation propagate` first",
            summary_path.display()
        )));
    }
    let rows = read_summary(&summary_path)?;
    let diag_path = cfg.calibration_dir().join("diagnostics.json");
    let diagnostics: Option<Diagnostics> = if diag_path.exists() {
        Some(read_json(&diag_path).map_err(core_err(FailureKind::Io))?)
    } else {
        None
    };

    let mut out = String::new();
    writeln!(out, "# Enrichment report\n").unwrap();
    if let Some(d) = &diagnostics {
        writeln!(out, "## Calibration\n").unwrap();
        writeln!(
            out,
            "- pointwise fits converged: {}/{}",
            d.converged, d.pointwise_fits
        )
        .unwrap();
        writeln!(
            out,
            "- calibration targets in 95% band: {}/{}",
            d.calibration_band.inside, d.calibration_band.total
        )
        .unwrap();
        if let Some(v) = d.validation_band {
            writeln!(out, "- validation targets in 95% band: {}/{}", v.inside, v.total).unwrap();
        }
        writeln!(out, "- LASSO-selected features: {}", d.selected_features.join(", ")).unwrap();
        writeln!(out, "- GP inputs: {}", d.gp_features.join(", ")).unwrap();
        writeln!(out, "- training digest: `{}`\n", d.training_digest).unwrap();
    }
    writeln!(out, "## CO flux ratio\n").unwrap();
    writeln!(
        out,
        "| altitude (km) | set | R(lofi) | R(en) median | R(en) q1 | R(en) q3 | whiskers | enriched closer to 1 |"
    )
    .unwrap();
    writeln!(out, "|---|---|---|---|---|---|---|---|").unwrap();
    for r in &rows {
        let s = &r.summary;
        let closer = (s.median - 1.0).abs() < (r.ratio_lofi - 1.0).abs();
        writeln!(
            out,
            "| {} | {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} to {:.4} | {} |",
            r.altitude_km,
            r.label,
            r.ratio_lofi,
            s.median,
            s.q1,
            s.q3,
            s.whisker_lo,
            s.whisker_hi,
            if closer { "yes" } else { "no" }
        )
        .unwrap();
    }
    let path = cfg.workdir.join("report.md");
    fs::write(&path, &out).map_err(io_err(format!("cannot write {}", path.display())))?;
    print!("{out}");
    Ok(())
}
