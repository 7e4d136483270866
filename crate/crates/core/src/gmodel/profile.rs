use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    Exact,
    UpperBound,
}

/// Closed-form continuation of a variation profile past its tabulated range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tail", rename_all = "snake_case")]
pub enum TailModel {
    /// Variation vanishes from `memory` onward.
    ZeroBeyond { memory: usize },
    /// `var_n ≤ scale · n^(-exponent)` for `n ≥ 1`.
    PowerLaw { scale: f64, exponent: f64 },
    /// `var_n ≤ scale · rate^n`.
    Exponential { scale: f64, rate: f64 },
}

impl TailModel {
    pub fn value(&self, n: usize) -> f64 {
        match *self {
            TailModel::ZeroBeyond { memory } => {
                if n >= memory {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            TailModel::PowerLaw { scale, exponent } => scale * (n.max(1) as f64).powf(-exponent),
            TailModel::Exponential { scale, rate } => scale * rate.powi(n as i32),
        }
    }

    /// Upper bound on `Σ_{j≥start} var_j^power` (`power ≥ 1`), or `None`
    /// when the series is not known to converge.
    pub fn power_sum_from(&self, start: usize, power: f64) -> Option<f64> {
        match *self {
            TailModel::ZeroBeyond { memory } => (start >= memory).then_some(0.0),
            TailModel::PowerLaw { scale, exponent } => {
                let s = exponent * power;
                if s <= 1.0 {
                    return None;
                }
                let n = start.max(1) as f64;
                // first term plus ∫_n^∞ x^(-s) dx
                let head = if start == 0 { 1.0 } else { 0.0 };
                Some(scale.powf(power) * (head + n.powf(-s) + n.powf(1.0 - s) / (s - 1.0)))
            }
            TailModel::Exponential { scale, rate } => {
                let q = rate.powf(power);
                Some(scale.powf(power) * q.powi(start as i32) / (1.0 - q))
            }
        }
    }
}

/// Per-`n` values (or upper bounds) of `var_[0,n](log g) = log ρ_[0,n](g)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationProfile {
    pub kind: ProfileKind,
    pub values: Vec<f64>,
    pub tail: Option<TailModel>,
}

impl VariationProfile {
    pub fn horizon(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Tabulated value, else the tail model (capped by the last tabulated
    /// value so the result stays non-increasing).
    pub fn value(&self, n: usize) -> Option<f64> {
        if let Some(&v) = self.values.get(n) {
            return Some(v);
        }
        let tail = self.tail?.value(n);
        Some(match self.values.last() {
            Some(&last) => tail.min(last),
            None => tail,
        })
    }

    pub fn rho(&self, n: usize) -> Option<f64> {
        self.value(n).map(f64::exp)
    }

    pub fn is_non_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_sum_bounds_brute_force() {
        let tail = TailModel::PowerLaw {
            scale: 0.7,
            exponent: 1.0,
        };
        for start in [1usize, 3, 40] {
            let brute: f64 = (start..200_000).map(|j| tail.value(j).powi(2)).sum();
            let bound = tail.power_sum_from(start, 2.0).unwrap();
            assert!(brute <= bound, "{start}: {brute} > {bound}");
            assert!(bound - brute < 0.5 * 0.49 / start as f64 + 1e-5);
        }
        assert!(tail.power_sum_from(1, 1.0).is_none());
    }

    #[test]
    fn tabulated_values_take_precedence() {
        let p = VariationProfile {
            kind: ProfileKind::Exact,
            values: vec![0.5, 0.2, 0.0],
            tail: Some(TailModel::ZeroBeyond { memory: 2 }),
        };
        assert_eq!(p.value(1), Some(0.2));
        assert_eq!(p.value(10), Some(0.0));
        assert_eq!(p.rho(0), Some(0.5f64.exp()));
        assert!(p.is_non_increasing());
    }
}
