use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionOutcome {
    pub root: f64,
    pub iterations: usize,
    /// Residual at `root`.
    pub residual: f64,
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `relative_tolerance` times its
/// larger endpoint magnitude (so small roots are resolved to the same
/// relative precision as large ones), when the midpoint no longer differs
/// from an endpoint, after `max_iterations` halvings, or on an exact zero. If the endpoints do not
/// bracket a root, `scan_intervals` log-spaced subintervals anchored at `lo`
/// are searched for one before giving up.
pub fn bisect_decreasing<F>(
    f: F,
    lo: f64,
    hi: f64,
    relative_tolerance: f64,
    max_iterations: usize,
    scan_intervals: usize,
) -> Result<BisectionOutcome>
where
    F: Fn(f64) -> f64,
{
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(BisectionOutcome {
            root: lo,
            iterations: 0,
            residual: 0.0,
        });
    }
    if f_hi == 0.0 {
        return Ok(BisectionOutcome {
            root: hi,
            iterations: 0,
            residual: 0.0,
        });
    }

    let (mut a, mut b, mut f_a) = if brackets(f_lo, f_hi) {
        (lo, hi, f_lo)
    } else {
        scan(&f, lo, hi, scan_intervals).ok_or(Error::SolverFailure {
            lo,
            hi,
            residual_lo: f_lo,
            residual_hi: f_hi,
        })?
    };

    let mut iterations = 0;
    while iterations < max_iterations && (b - a) > relative_tolerance * a.abs().max(b.abs()) {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let f_mid = f(mid);
        iterations += 1;
        if f_mid == 0.0 {
            return Ok(BisectionOutcome {
                root: mid,
                iterations,
                residual: 0.0,
            });
        }
        if (f_mid > 0.0) == (f_a > 0.0) {
            a = mid;
            f_a = f_mid;
        } else {
            b = mid;
        }
    }
    let root = 0.5 * (a + b);
    Ok(BisectionOutcome {
        root,
        iterations,
        residual: f(root),
    })
}

fn brackets(f_a: f64, f_b: f64) -> bool {
    f_a.is_finite() && f_b.is_finite() && (f_a > 0.0) != (f_b > 0.0)
}

fn scan<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, intervals: usize) -> Option<(f64, f64, f64)> {
    if intervals == 0 {
        return None;
    }
    let width = hi - lo;
    let point = |i: usize| {
        if i == 0 {
            lo
        } else {
            // 1e-16 .. 1 of the width
            let frac = 10f64.powf(-16.0 * (1.0 - (i as f64) / (intervals as f64)));
            lo + width * frac
        }
    };
    let mut prev = (point(0), f(point(0)));
    for i in 1..=intervals {
        let x = point(i);
        let fx = f(x);
        if brackets(prev.1, fx) {
            return Some((prev.0, x, prev.1));
        }
        prev = (x, fx);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_root() {
        let out = bisect_decreasing(|x| 2.0 - x * x, 0.0, 2.0, 1e-14, 200, 64).unwrap();
        assert!((out.root - 2f64.sqrt()).abs() < 1e-14);
        assert!(out.iterations <= 200);
    }

    #[test]
    fn small_roots_keep_relative_precision() {
        let r = 3.7e-17;
        let out = bisect_decreasing(|x| r - x, 0.0, 1.0, 1e-14, 200, 64).unwrap();
        assert!((out.root - r).abs() <= 1e-14 * r);
    }

    #[test]
    fn exact_endpoint_root() {
        let out = bisect_decreasing(|x| 1.0 - x, 0.0, 1.0, 1e-14, 200, 64).unwrap();
        assert_eq!(out.root, 1.0);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn scan_recovers_from_a_non_finite_endpoint() {
        let f = |x: f64| if x == 0.0 { f64::NAN } else { 1e-3 - x };
        let out = bisect_decreasing(f, 0.0, 1.0, 1e-14, 200, 64).unwrap();
        assert!((out.root - 1e-3).abs() < 1e-13);
    }

    #[test]
    fn failure_reports_endpoint_residuals() {
        match bisect_decreasing(|x| 1.0 + x, 0.0, 1.0, 1e-14, 200, 64) {
            Err(Error::SolverFailure {
                residual_lo,
                residual_hi,
                ..
            }) => {
                assert_eq!(residual_lo, 1.0);
                assert_eq!(residual_hi, 2.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
