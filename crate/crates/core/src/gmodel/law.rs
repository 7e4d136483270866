use serde::{Deserialize, Serialize};

use super::GModelError;

/// Number of coefficients summed explicitly before switching to integral
/// bounds for power-law tails.
const EXPLICIT_TERMS: usize = 1 << 14;

/// Coefficient law `k ↦ a_k` (k ≥ 1) of the long-range linear family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum CoefficientLaw {
    /// `a_k = c · k^(-p)`, needs `p > 1`.
    Power { c: f64, p: f64 },
    /// `a_k = c · r^k`, needs `0 < r < 1`.
    Exponential { c: f64, r: f64 },
}

impl CoefficientLaw {
    /// Power law scaled so that `Σ_k a_k = total` when `p = 2`
    /// (`c = total · 6/π²`).
    pub fn power_normalized_p2(total: f64) -> Self {
        CoefficientLaw::Power {
            c: total * 6.0 / (std::f64::consts::PI * std::f64::consts::PI),
            p: 2.0,
        }
    }

    pub fn coefficient(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match *self {
            CoefficientLaw::Power { c, p } => c * (k as f64).powf(-p),
            CoefficientLaw::Exponential { c, r } => c * r.powi(k as i32),
        }
    }

    pub(crate) fn validate(&self) -> Result<(), GModelError> {
        let bad = |m: &str| Err(GModelError::InvalidParameter(m.to_string()));
        match *self {
            CoefficientLaw::Power { c, p } => {
                if !(c > 0.0 && c.is_finite()) {
                    return bad("power-law scale c must be positive");
                }
                if !(p > 1.0 && p.is_finite()) {
                    return bad("power-law exponent p must exceed 1");
                }
            }
            CoefficientLaw::Exponential { c, r } => {
                if !(c > 0.0 && c.is_finite()) {
                    return bad("exponential scale c must be positive");
                }
                if !(r > 0.0 && r < 1.0) {
                    return bad("exponential rate r must lie in (0, 1)");
                }
            }
        }
        Ok(())
    }
}

/// Precomputed coefficients with two-sided bounds on tail sums
/// `T_n = Σ_{k>n} a_k`.
#[derive(Debug, Clone)]
pub(crate) struct Coefficients {
    law: CoefficientLaw,
    /// `a[k]` for `k = 0..=EXPLICIT_TERMS`; `a[0] = 0`.
    a: Vec<f64>,
    /// `partial[k] = Σ_{j=k+1}^{EXPLICIT_TERMS} a_j`.
    partial: Vec<f64>,
    remainder: (f64, f64),
}

impl Coefficients {
    pub fn new(law: CoefficientLaw) -> Self {
        let n = EXPLICIT_TERMS;
        let mut a = vec![0.0; n + 1];
        for (k, slot) in a.iter_mut().enumerate().skip(1) {
            *slot = law.coefficient(k);
        }
        let mut partial = vec![0.0; n + 1];
        for k in (0..n).rev() {
            partial[k] = partial[k + 1] + a[k + 1];
        }
        let remainder = match law {
            CoefficientLaw::Power { .. } => power_tail(law, n),
            CoefficientLaw::Exponential { c, r } => {
                let t = c * r.powi(n as i32 + 1) / (1.0 - r);
                (t, t)
            }
        };
        Self {
            law,
            a,
            partial,
            remainder,
        }
    }

    pub fn law(&self) -> CoefficientLaw {
        self.law
    }

    pub fn a(&self, k: usize) -> f64 {
        if k < self.a.len() {
            self.a[k]
        } else {
            self.law.coefficient(k)
        }
    }

    /// `(lower, upper)` bounds on `Σ_{k>n} a_k`.
    pub fn tail(&self, n: usize) -> (f64, f64) {
        match self.law {
            CoefficientLaw::Exponential { c, r } => {
                let t = c * r.powi(n as i32 + 1) / (1.0 - r);
                (t, t)
            }
            CoefficientLaw::Power { .. } => {
                if n < self.partial.len() {
                    let s = self.partial[n];
                    (s + self.remainder.0, s + self.remainder.1)
                } else {
                    power_tail(self.law, n)
                }
            }
        }
    }

    pub fn tail_upper(&self, n: usize) -> f64 {
        self.tail(n).1
    }

    /// `(lower, upper)` bounds on `Σ_{k≥1} a_k`.
    pub fn total(&self) -> (f64, f64) {
        self.tail(0)
    }
}

/// Integral comparison: `∫_{n+1}^∞ ≤ Σ_{k>n} ≤ ∫_n^∞` for decreasing `k^(-p)`.
fn power_tail(law: CoefficientLaw, n: usize) -> (f64, f64) {
    let CoefficientLaw::Power { c, p } = law else {
        unreachable!("power_tail on a non-power law")
    };
    let lower = c * ((n + 1) as f64).powf(1.0 - p) / (p - 1.0);
    let upper = if n == 0 {
        // ∫_0^∞ diverges; use a_1 + ∫_1^∞.
        c + c / (p - 1.0)
    } else {
        c * (n as f64).powf(1.0 - p) / (p - 1.0)
    };
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_power_law_sums_to_target() {
        let coeffs = Coefficients::new(CoefficientLaw::power_normalized_p2(0.5));
        let (lo, hi) = coeffs.total();
        assert!(lo <= 0.5 && 0.5 <= hi, "{lo} {hi}");
        assert!(hi - lo < 1e-8);
    }

    #[test]
    fn power_tail_brackets_brute_force_sum() {
        let law = CoefficientLaw::Power { c: 1.0, p: 2.5 };
        let coeffs = Coefficients::new(law);
        for n in [0usize, 1, 5, 100, 20_000, 100_000] {
            // truncated remainder is below 1e-9 for these n
            let brute: f64 = (n + 1..n + 2_000_000).map(|k| law.coefficient(k)).sum();
            let (lo, hi) = coeffs.tail(n);
            assert!(lo <= brute + 1e-9 && brute <= hi + 1e-12, "n={n}: {lo} {brute} {hi}");
        }
    }

    #[test]
    fn exponential_tail_is_closed_form() {
        let law = CoefficientLaw::Exponential { c: 0.4, r: 0.5 };
        let coeffs = Coefficients::new(law);
        let brute: f64 = (4..200).map(|k| law.coefficient(k)).sum();
        let (lo, hi) = coeffs.tail(3);
        assert!((lo - brute).abs() < 1e-15 && lo == hi);
    }

    #[test]
    fn validation() {
        assert!(CoefficientLaw::Power { c: 1.0, p: 1.0 }.validate().is_err());
        assert!(CoefficientLaw::Exponential { c: 1.0, r: 1.0 }.validate().is_err());
        assert!(CoefficientLaw::Power { c: -1.0, p: 2.0 }.validate().is_err());
        assert!(CoefficientLaw::Exponential { c: 0.2, r: 0.3 }.validate().is_ok());
    }
}
