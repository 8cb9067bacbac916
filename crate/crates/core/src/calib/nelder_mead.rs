//! Derivative-free simplex minimization.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadSettings {
    pub max_evaluations: usize,
    /// Converged once the largest vertex-to-vertex distance drops below this.
    pub tolerance: f64,
}

impl Default for NelderMeadSettings {
    fn default() -> Self {
        Self {
            max_evaluations: 500,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in simplex.iter().enumerate() {
        for b in &simplex[i + 1..] {
            let dist = a.0.iter().zip(&b.0).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            d = d.max(dist);
        }
    }
    d
}

/// Minimizes `f` from the `n + 1` vertices of `simplex`. Non-finite values
/// count as `+inf`. Returns the best vertex found even without convergence.
pub fn nelder_mead<F>(mut f: F, simplex: Vec<Vec<f64>>, settings: &NelderMeadSettings) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = simplex.len().saturating_sub(1);
    assert!(n >= 1 && simplex.iter().all(|v| v.len() == n), "simplex needs n + 1 vertices of length n");
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut s: Vec<(Vec<f64>, f64)> = simplex
        .into_iter()
        .map(|x| {
            let v = eval(&x, &mut evaluations);
            (x, v)
        })
        .collect();
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect()
    };

    let mut converged = false;
    loop {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter(&s) < settings.tolerance {
            converged = true;
            break;
        }
        if evaluations >= settings.max_evaluations {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &s[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = s[n].clone();
        let reflected = lerp(&centroid, &worst.0, -1.0);
        let fr = eval(&reflected, &mut evaluations);
        if fr < s[0].1 {
            let expanded = lerp(&centroid, &worst.0, -2.0);
            let fe = eval(&expanded, &mut evaluations);
            s[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < s[n - 1].1 {
            s[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc, accept) = if fr < worst.1 {
            let c = lerp(&centroid, &reflected, 0.5);
            let fc = eval(&c, &mut evaluations);
            (c, fc, fc <= fr)
        } else {
            let c = lerp(&centroid, &worst.0, 0.5);
            let fc = eval(&c, &mut evaluations);
            (c, fc, fc < worst.1)
        };
        if accept {
            s[n] = (contracted, fc);
            continue;
        }
        let best = s[0].0.clone();
        for vertex in s.iter_mut().skip(1) {
            let x = lerp(&best, &vertex.0, 0.5);
            let v = eval(&x, &mut evaluations);
            *vertex = (x, v);
        }
    }
    let (x, value) = s.swap_remove(0);
    NelderMeadResult {
        x,
        value,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_parabola() {
        let r = nelder_mead(|x| (x[0] - 12.3).powi(2), vec![vec![5.0], vec![10.0]], &Default::default());
        assert!(r.converged);
        assert!((r.x[0] - 12.3).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock() {
        let settings = NelderMeadSettings {
            max_evaluations: 5000,
            tolerance: 1e-10,
        };
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(f, vec![vec![-1.2, 1.0], vec![-1.0, 1.0], vec![-1.2, 1.2]], &settings);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn budget_exhaustion_returns_best_so_far() {
        let settings = NelderMeadSettings {
            max_evaluations: 6,
            tolerance: 1e-12,
        };
        let r = nelder_mead(|x| (x[0] - 100.0).abs(), vec![vec![0.0], vec![1.0]], &settings);
        assert!(!r.converged);
        assert!(r.evaluations >= 6);
        assert!(r.value < 100.0);
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 1.0).powi(2) };
        let r = nelder_mead(f, vec![vec![-3.0], vec![4.0]], &Default::default());
        assert!((r.x[0] - 1.0).abs() < 1e-7);
    }
}
