use ablation_core::calib::*;
use ablation_core::scenario::InputVector;
use ablation_core::uq::{quantile_sorted, summarize};
use ablation_core::Error;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(r: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| r.sample::<f64, _>(StandardNormal))
}

// ------------------------------------------------------------------ LASSO

fn soft(z: f64, g: f64) -> f64 {
    z.signum() * (z.abs() - g).max(0.0)
}

fn tight() -> LassoSettings {
    LassoSettings {
        tolerance: 1e-15,
        ..LassoSettings::default()
    }
}

#[test]
fn lasso_on_orthonormal_design_is_soft_thresholded_ols() {
    let mut r = rng(3);
    let (n, p) = (40, 6);
    // columns with X^T X = n I, so the objective decouples per coordinate
    let q = random_matrix(&mut r, n, p).qr().q() * (n as f64).sqrt();
    let y = DVector::from_fn(n, |_, _| r.sample::<f64, _>(StandardNormal));
    let ols = q.transpose() * &y / n as f64;
    for lambda in [0.0, 0.01, 0.05, 0.1, 0.3, 1.0] {
        let fit = lasso(&q, &y, lambda, &tight());
        for j in 0..p {
            let expected = soft(ols[j], lambda);
            assert!(
                (fit.coefficients[j] - expected).abs() <= 1e-8,
                "lambda {lambda}, j {j}: {} vs {expected}",
                fit.coefficients[j]
            );
        }
    }
}

#[test]
fn lasso_without_penalty_is_least_squares() {
    let mut r = rng(5);
    let x = random_matrix(&mut r, 60, 4);
    let y = DVector::from_fn(60, |_, _| r.sample::<f64, _>(StandardNormal));
    let fit = lasso(&x, &y, 0.0, &tight());
    let ols = (x.transpose() * &x).lu().solve(&(x.transpose() * &y)).unwrap();
    for j in 0..4 {
        assert!((fit.coefficients[j] - ols[j]).abs() <= 1e-9, "{j}");
    }
}

#[test]
fn lasso_is_zero_at_lambda_max() {
    let mut r = rng(8);
    let x = random_matrix(&mut r, 30, 5);
    let y = DVector::from_fn(30, |_, _| r.sample::<f64, _>(StandardNormal));
    let lmax = lambda_max(&x, &y);
    for scale in [1.0, 1.5, 10.0] {
        let fit = lasso(&x, &y, lmax * scale, &tight());
        assert!(fit.coefficients.iter().all(|&b| b == 0.0));
    }
    let below = lasso(&x, &y, lmax * 0.99, &tight());
    assert!(below.coefficients.iter().any(|&b| b != 0.0));
}

#[test]
fn lasso_satisfies_kkt_and_descends_monotonically() {
    let mut r = rng(13);
    let (n, p) = (50, 8);
    let mut x = random_matrix(&mut r, n, p);
    // make two columns strongly correlated
    let c0 = x.column(0).clone_owned();
    x.set_column(1, &(c0 * 0.9 + x.column(1) * 0.1));
    let beta = DVector::from_vec(vec![1.5, 0.0, -2.0, 0.0, 0.0, 0.7, 0.0, 0.0]);
    let y = &x * &beta + DVector::from_fn(n, |_, _| 0.1 * r.sample::<f64, _>(StandardNormal));
    let lambda = 0.05;
    let fit = lasso(&x, &y, lambda, &tight());
    let b = DVector::from_column_slice(&fit.coefficients);
    let grad = x.transpose() * (&y - &x * &b) / n as f64;
    for j in 0..p {
        if b[j] != 0.0 {
            assert!((grad[j] - lambda * b[j].signum()).abs() <= 1e-9, "active {j}");
        } else {
            assert!(grad[j].abs() <= lambda + 1e-9, "inactive {j}");
        }
    }
    // the trace is evaluated in Gram form, exact up to rounding of y^T y / n
    let scale = y.norm_squared() / n as f64;
    for w in fit.objective_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-14 * scale);
    }
    let last = *fit.objective_trace.last().unwrap();
    assert!((last - lasso_objective(&x, &y, &fit.coefficients, lambda)).abs() <= 1e-12 * last.abs());
}

// --------------------------------------------------------- least squares

fn names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("x{j}")).collect()
}

#[test]
fn least_squares_matches_normal_equations() {
    let mut r = rng(21);
    let (n, p) = (30, 4);
    let mut x = random_matrix(&mut r, n, p);
    x.set_column(0, &DVector::from_element(n, 1.0));
    let y = DVector::from_fn(n, |_, _| r.sample::<f64, _>(StandardNormal));
    let b = least_squares(&x, &y, &names(p)).unwrap();
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let normal = xtx.cholesky().unwrap().solve(&xty);
    for j in 0..p {
        assert!((b[j] - normal[j]).abs() <= 1e-10, "{j}: {} vs {}", b[j], normal[j]);
    }
}

#[test]
fn least_squares_recovers_an_exact_linear_relation() {
    let mut r = rng(22);
    let n = 20;
    let mut x = random_matrix(&mut r, n, 3);
    x.set_column(0, &DVector::from_element(n, 1.0));
    let truth = DVector::from_vec(vec![-3.0, 0.25, 7.5]);
    let y = &x * &truth;
    let b = least_squares(&x, &y, &names(3)).unwrap();
    assert!((b - truth).amax() <= 1e-12);
}

#[test]
fn least_squares_names_the_collinear_column() {
    let mut r = rng(23);
    let n = 15;
    let mut x = random_matrix(&mut r, n, 4);
    let combo = x.column(0) * 2.0 - x.column(1);
    x.set_column(2, &combo);
    match least_squares(&x, &DVector::zeros(n), &names(4)) {
        Err(Error::RankDeficient { column, others }) => {
            assert_eq!(column, "x2");
            assert_eq!(others, vec!["x0".to_string(), "x1".to_string()]);
        }
        other => panic!("expected rank deficiency, got {other:?}"),
    }
}

fn input(t: f64, p: f64, c_n: f64, altitude: f64) -> InputVector {
    InputVector::from_array([altitude, 0.1, t, p, 100.0, 10.0, 50.0, 0.01, c_n, 0.02])
}

#[test]
fn detrend_shift_moves_only_the_intercept() {
    let mut r = rng(24);
    let inputs: Vec<InputVector> = (0..40)
        .map(|_| input(r.gen_range(800.0..3500.0), 10f64.powf(r.gen_range(2.0..5.0)), r.gen_range(0.0..1e-2), 30.0))
        .collect();
    let targets: Vec<f64> = inputs.iter().map(|_| r.gen_range(2.0..15.0)).collect();
    let (a, res_a) = fit_detrend(&inputs, &targets).unwrap();
    let shifted: Vec<f64> = targets.iter().map(|t| t + 4.0).collect();
    let (b, res_b) = fit_detrend(&inputs, &shifted).unwrap();
    assert!((b.intercept - a.intercept - 4.0).abs() <= 1e-9);
    for k in 0..3 {
        assert!((b.coefficients[k] - a.coefficients[k]).abs() <= 1e-9 * (1.0 + a.coefficients[k].abs()));
    }
    for (u, v) in res_a.iter().zip(&res_b) {
        assert!((u - v).abs() <= 1e-9);
    }
    // residuals of a least-squares fit are orthogonal to the constant column
    assert!(res_a.iter().sum::<f64>().abs() <= 1e-9);
}

#[test]
fn detrend_with_constant_nitrogen_is_rank_deficient() {
    let inputs: Vec<InputVector> = (0..10).map(|i| input(1000.0 + 100.0 * i as f64, 1e3 * (1 + i) as f64, 0.0, 30.0)).collect();
    let targets = vec![1.0; 10];
    match fit_detrend(&inputs, &targets) {
        Err(Error::RankDeficient { column, .. }) => assert_eq!(column, "c_N"),
        other => panic!("expected rank deficiency, got {other:?}"),
    }
}

// -------------------------------------------------------------------- GP

fn toy_data(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = rng(seed);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.gen_range(-2.0..2.0)).collect()).collect();
    let y = x.iter().map(|p| (1.3 * p[0]).sin() + 0.3 * p[d - 1] * p[d - 1]).collect();
    (x, y)
}

fn flat_detrend() -> DetrendModel {
    DetrendModel {
        intercept: 0.0,
        coefficients: [0.0; 3],
    }
}

fn toy_model(x: Vec<Vec<f64>>, y: Vec<f64>, settings: &GpSettings) -> GpModel {
    let d = x[0].len();
    GpModel::fit(
        (0..d).map(Feature::Raw).collect(),
        Standardizer {
            mean: vec![0.0; d],
            scale: vec![1.0; d],
        },
        flat_detrend(),
        x,
        y,
        settings,
    )
    .unwrap()
}

#[test]
fn marginal_likelihood_gradient_matches_finite_differences() {
    let (x, y) = toy_data(31, 25, 3);
    let model = toy_model(x.clone(), y.clone(), &GpSettings::default());
    let var = model.signal_variance;
    for factor in [0.7, 1.3, 2.0] {
        let ls: Vec<f64> = model.lengthscales.iter().map(|l| l * factor).collect();
        let (_, grad) = log_marginal_likelihood(&x, &y, &ls, var, WHITE_NOISE).unwrap();
        let norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        for d in 0..ls.len() {
            let h = 1e-5 * ls[d];
            let mut up = ls.clone();
            let mut dn = ls.clone();
            up[d] += h;
            dn[d] -= h;
            let fu = log_marginal_likelihood(&x, &y, &up, var, WHITE_NOISE).unwrap().0;
            let fd = log_marginal_likelihood(&x, &y, &dn, var, WHITE_NOISE).unwrap().0;
            let numeric = (fu - fd) / (2.0 * h);
            // relative to the gradient's largest component: a near-zero
            // component (irrelevant input) is below finite-difference resolution
            let rel = (grad[d] - numeric).abs() / norm;
            assert!(rel <= 1e-5, "factor {factor}, dim {d}: {} vs {numeric} ({rel:e})", grad[d]);
        }
    }
}

#[test]
fn optimized_likelihood_beats_unit_lengthscales() {
    let (x, y) = toy_data(32, 30, 2);
    let model = toy_model(x.clone(), y.clone(), &GpSettings::default());
    let start = log_marginal_likelihood(&x, &y, &[1.0, 1.0], model.signal_variance, WHITE_NOISE).unwrap().0;
    assert!(model.log_marginal_likelihood >= start);
    assert!(model.lengthscales.iter().all(|&l| (0.01..=1000.0).contains(&l)));
    assert_eq!(model.noise, WHITE_NOISE);
}

#[test]
fn single_point_posterior_is_shrunk_target() {
    for (var, target) in [(1.0, 0.8), (0.3, -2.0), (4.0, 5.0)] {
        let settings = GpSettings {
            signal_variance: Some(var),
            ..GpSettings::default()
        };
        let model = toy_model(vec![vec![0.4]], vec![target], &settings);
        let (mean, latent) = model.residual_posterior(&[0.4]);
        let expected = var / (var + WHITE_NOISE) * target;
        assert!((mean - expected).abs() <= 1e-12 * expected.abs(), "{mean} vs {expected}");
        let expected_var = var - var * var / (var + WHITE_NOISE);
        assert!((latent - expected_var).abs() <= 1e-12 * var);
    }
}

#[test]
fn posterior_reverts_to_prior_far_from_data() {
    let (x, y) = toy_data(33, 20, 2);
    let model = toy_model(x, y, &GpSettings::default());
    let (mean, var) = model.residual_posterior(&[1e4, -1e4]);
    assert!(mean.abs() < 1e-12);
    assert!((var - model.signal_variance).abs() <= 1e-12 * model.signal_variance);
}

fn trained_gp() -> (GpModel, Vec<InputVector>) {
    let mut r = rng(40);
    let inputs: Vec<InputVector> = (0..40)
        .map(|_| input(r.gen_range(900.0..3000.0), 10f64.powf(r.gen_range(2.5..4.5)), r.gen_range(1e-4..1e-2), 30.0))
        .collect();
    let targets: Vec<f64> = inputs
        .iter()
        .map(|i| 12.0 - 2e-3 * i.temperature + 0.5 * i.total_pressure.ln() + 0.1 * (i.temperature / 300.0).sin())
        .collect();
    let (detrend, residuals) = fit_detrend(&inputs, &targets).unwrap();
    let features = vec![Feature::Log(2), Feature::Log(3), Feature::Raw(8)];
    let gp = train_gp(&inputs, &residuals, &features, detrend, &GpSettings::default()).unwrap();
    (gp, inputs)
}

#[test]
fn draws_are_deterministic_per_seed() {
    let (gp, inputs) = trained_gp();
    let a = gp.sample(&inputs[..5], 20, 9).unwrap();
    let b = gp.sample(&inputs[..5], 20, 9).unwrap();
    let c = gp.sample(&inputs[..5], 20, 10).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn monte_carlo_mean_and_spread_match_prediction() {
    let (gp, inputs) = trained_gp();
    let probe = input(2000.0, 3e3, 5e-3, 30.0);
    let (mean, std) = gp.predict(&probe);
    assert!(std * std >= WHITE_NOISE);
    let n = 10_000;
    let draws = gp.sample(&[probe], n, 77).unwrap();
    let values: Vec<f64> = draws.iter().map(|d| d[0]).collect();
    let m = values.iter().sum::<f64>() / n as f64;
    let v = values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((m - mean).abs() <= 3.0 * std / (n as f64).sqrt(), "{m} vs {mean}");
    assert!((v.sqrt() / std - 1.0).abs() < 0.05);
    for x in &inputs {
        assert!(gp.predict(x).1 >= WHITE_NOISE.sqrt());
    }
}

#[test]
fn artifact_round_trip_preserves_predictions() {
    let (gp, inputs) = trained_gp();
    let text = serde_json::to_string(&gp.to_artifact()).unwrap();
    let back = GpModel::from_artifact(serde_json::from_str(&text).unwrap()).unwrap();
    for x in &inputs {
        assert_eq!(gp.predict(x), back.predict(x));
    }
    let mut tampered: GpArtifact = serde_json::from_str(&text).unwrap();
    tampered.training_targets[0] += 1e-9;
    assert!(GpModel::from_artifact(tampered).is_err());
}

// ----------------------------------------------------------- Nelder-Mead

#[test]
fn nelder_mead_finds_rosenbrock_minimum() {
    let res = nelder_mead(
        |p| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2),
        vec![vec![-1.2, 1.0], vec![-1.0, 1.0], vec![-1.2, 1.2]],
        &NelderMeadSettings {
            max_evaluations: 5000,
            tolerance: 1e-10,
        },
    );
    assert!(res.converged);
    assert!((res.x[0] - 1.0).abs() < 1e-6 && (res.x[1] - 1.0).abs() < 1e-6);
}

#[test]
fn nelder_mead_respects_the_evaluation_budget() {
    let mut calls = 0;
    let res = nelder_mead(
        |p| {
            calls += 1;
            -p[0]
        },
        vec![vec![0.0], vec![1.0]],
        &NelderMeadSettings {
            max_evaluations: 50,
            tolerance: 1e-8,
        },
    );
    assert!(!res.converged);
    assert!(calls <= 50 && res.evaluations == calls);
}

// ------------------------------------------------------------- quantiles

/// k-th order statistic by repeated minimum extraction (no sorting).
fn order_statistic(data: &[f64], k: usize) -> f64 {
    let mut pool = data.to_vec();
    for _ in 0..k {
        let (i, _) = pool.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        pool.swap_remove(i);
    }
    *pool.iter().min_by(|a, b| a.total_cmp(b)).unwrap()
}

fn oracle_quantile(data: &[f64], p: f64) -> f64 {
    let h = (data.len() - 1) as f64 * p;
    let k = h.floor() as usize;
    let lo = order_statistic(data, k);
    if h == k as f64 {
        return lo;
    }
    let hi = order_statistic(data, k + 1);
    lo + (h - k as f64) * (hi - lo)
}

#[test]
fn quantiles_match_order_statistic_oracle_exactly() {
    let mut r = rng(50);
    let data: Vec<f64> = (0..100).map(|_| r.sample(StandardNormal)).collect();
    let mut sorted = data.clone();
    sorted.sort_by(f64::total_cmp);
    for p in [0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0, 0.333] {
        assert_eq!(quantile_sorted(&sorted, p), oracle_quantile(&data, p), "p = {p}");
    }
    let s = summarize(&data).unwrap();
    assert_eq!(s.q1, oracle_quantile(&data, 0.25));
    assert_eq!(s.median, oracle_quantile(&data, 0.5));
    assert_eq!(s.q3, oracle_quantile(&data, 0.75));
}
