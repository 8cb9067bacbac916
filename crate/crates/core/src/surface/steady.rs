use serde::{Deserialize, Serialize};

/// Coefficients of one adsorbed species' steady balance
/// `a s^2 + b s = d theta + c theta^2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageTerms {
    /// Two-site (O2) adsorption.
    pub a: f64,
    /// One-site adsorption.
    pub b: f64,
    /// Second-order (Langmuir-Hinshelwood) removal.
    pub c: f64,
    /// First-order removal: desorption plus Eley-Rideal.
    pub d: f64,
}

impl CoverageTerms {
    /// Nonnegative root `theta(s) = 2q / (d + sqrt(d^2 + 4 c q))`, `q = a s^2 + b s`.
    ///
    /// The rationalised form avoids cancellation when `c q` is small against `d^2`.
    #[inline]
    pub fn coverage(&self, free_sites: f64) -> f64 {
        let q = (self.a * free_sites + self.b) * free_sites;
        if q == 0.0 {
            return 0.0;
        }
        if self.a == 0.0 && self.c == 0.0 {
            return self.b * free_sites / self.d;
        }
        2.0 * q / (self.d + (self.d * self.d + 4.0 * self.c * q).sqrt())
    }

    pub fn is_inactive(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }
}

/// Closed-form coefficient groups of every model; unused groups stay zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SteadyCoefficients {
    /// Weakly bonded oxygen O(s).
    pub weak_o: CoverageTerms,
    /// Strongly bonded oxygen O*(s).
    pub strong_o: CoverageTerms,
    /// Bonded nitrogen N(s).
    pub nitrogen: CoverageTerms,
    /// Placeholder P(s).
    pub placeholder: CoverageTerms,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_solves_its_balance() {
        let t = CoverageTerms {
            a: 3.0e9,
            b: 2.0e6,
            c: 4.0e11,
            d: 5.0e7,
        };
        for s in [1e-9, 1e-7, 5e-6, 1e-5] {
            let theta = t.coverage(s);
            let lhs = t.a * s * s + t.b * s;
            let rhs = t.d * theta + t.c * theta * theta;
            assert!(((lhs - rhs) / lhs).abs() < 1e-13, "s = {s}");
            assert!(theta >= 0.0);
        }
    }

    #[test]
    fn linear_case_is_a_plain_ratio() {
        let t = CoverageTerms {
            a: 0.0,
            b: 3.0,
            c: 0.0,
            d: 7.0,
        };
        assert_eq!(t.coverage(2.0), 3.0 * 2.0 / 7.0);
        assert_eq!(CoverageTerms::default().coverage(1.0), 0.0);
    }
}
