use rand::Rng;

use super::CouplingError;
use crate::gmodel::Interval;

/// Tolerance on `Σ p = 1` for [`FiniteDist`].
pub const SUM_TOL: f64 = 1e-12;

/// What the outcomes of a [`FiniteDist`] index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// Plain outcomes `0..n`.
    Points(usize),
    /// Words on an interval, lexicographic with the leftmost coordinate most
    /// significant.
    Cylinders {
        interval: Interval,
        alphabet_size: usize,
    },
}

impl Support {
    pub fn size(&self) -> usize {
        match *self {
            Support::Points(n) => n,
            Support::Cylinders {
                interval,
                alphabet_size,
            } => alphabet_size.pow(interval.len() as u32),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDist {
    support: Support,
    probs: Vec<f64>,
}

impl FiniteDist {
    pub fn new(probs: Vec<f64>) -> Result<Self, CouplingError> {
        Self::with_support(Support::Points(probs.len()), probs)
    }

    pub fn on_interval(
        interval: Interval,
        alphabet_size: usize,
        probs: Vec<f64>,
    ) -> Result<Self, CouplingError> {
        Self::with_support(
            Support::Cylinders {
                interval,
                alphabet_size,
            },
            probs,
        )
    }

    pub fn with_support(support: Support, probs: Vec<f64>) -> Result<Self, CouplingError> {
        if probs.len() != support.size() {
            return Err(CouplingError::InvalidDistribution(format!(
                "{} probabilities for a support of size {}",
                probs.len(),
                support.size()
            )));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(CouplingError::InvalidDistribution(
                "negative or NaN probability".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(CouplingError::InvalidDistribution(format!(
                "probabilities sum to {sum}"
            )));
        }
        Ok(Self { support, probs })
    }

    /// Rescales non-negative weights to sum to one.
    pub fn normalized(support: Support, mut weights: Vec<f64>) -> Result<Self, CouplingError> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(CouplingError::InvalidDistribution("zero total weight".into()));
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        Self::with_support(support, weights)
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// `½ Σ |μ - ν|`.
pub fn total_variation(mu: &[f64], nu: &[f64]) -> f64 {
    0.5 * mu.iter().zip(nu).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Joint law of a pair, stored densely (row = first coordinate).
#[derive(Debug, Clone)]
pub struct CouplingTable {
    pub joint: Vec<f64>,
    pub first: FiniteDist,
    pub second: FiniteDist,
}

impl CouplingTable {
    pub fn size(&self) -> usize {
        self.first.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.joint[i * self.size() + j]
    }

    pub fn diagonal_mass(&self) -> f64 {
        (0..self.size()).map(|i| self.get(i, i)).sum()
    }

    /// `P(Δ^c)`: mass off the diagonal.
    pub fn disagreement(&self) -> f64 {
        let n = self.size();
        (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.joint.chunks(self.size()).map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let n = self.size();
        (0..n).map(|j| (0..n).map(|i| self.get(i, j)).sum()).collect()
    }
}

/// Maximal coupling: `P(ζ, ζ) = min(μ(ζ), ν(ζ))`, and off the diagonal the
/// product of the two defects divided by the disagreement mass (zero when
/// `μ = ν`).
pub fn maximal_coupling(mu: &FiniteDist, nu: &FiniteDist) -> Result<CouplingTable, CouplingError> {
    let plan = MaximalCoupling::new(mu, nu)?;
    let n = mu.len();
    let mut joint = vec![0.0; n * n];
    for i in 0..n {
        joint[i * n + i] = plan.common[i];
    }
    if plan.defect > 0.0 {
        for i in 0..n {
            if plan.excess_first[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if j != i {
                    joint[i * n + j] = plan.excess_first[i] * plan.excess_second[j] / plan.defect;
                }
            }
        }
    }
    Ok(CouplingTable {
        joint,
        first: mu.clone(),
        second: nu.clone(),
    })
}

/// Sampler for the maximal coupling without materializing the table.
#[derive(Debug, Clone)]
pub struct MaximalCoupling {
    common: Vec<f64>,
    excess_first: Vec<f64>,
    excess_second: Vec<f64>,
    common_mass: f64,
    defect: f64,
}

impl MaximalCoupling {
    pub fn new(mu: &FiniteDist, nu: &FiniteDist) -> Result<Self, CouplingError> {
        if mu.support() != nu.support() {
            return Err(CouplingError::SupportMismatch);
        }
        Ok(Self::from_weights(mu.probs(), nu.probs()))
    }

    /// Same construction on raw probability vectors of equal length.
    pub(crate) fn from_weights(mu: &[f64], nu: &[f64]) -> Self {
        let common: Vec<f64> = mu.iter().zip(nu).map(|(a, b)| a.min(*b)).collect();
        let excess_first: Vec<f64> = mu.iter().zip(&common).map(|(a, c)| a - c).collect();
        let excess_second: Vec<f64> = nu.iter().zip(&common).map(|(b, c)| b - c).collect();
        let common_mass = common.iter().sum();
        let defect = excess_second.iter().sum();
        Self {
            common,
            excess_first,
            excess_second,
            common_mass,
            defect,
        }
    }

    /// Disagreement probability `½ Σ |μ - ν|`.
    pub fn disagreement(&self) -> f64 {
        self.defect
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let u: f64 = rng.gen::<f64>() * (self.common_mass + self.defect);
        if u < self.common_mass || self.defect <= 0.0 {
            let i = pick(&self.common, self.common_mass, rng);
            (i, i)
        } else {
            let total_first: f64 = self.excess_first.iter().sum();
            let i = pick(&self.excess_first, total_first, rng);
            let j = pick(&self.excess_second, self.defect, rng);
            (i, j)
        }
    }
}

fn pick<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use proptest::prelude::*;

    fn dist(p: &[f64]) -> FiniteDist {
        FiniteDist::new(p.to_vec()).unwrap()
    }

    #[test]
    fn identical_marginals_never_disagree() {
        let mu = dist(&[0.2, 0.3, 0.5]);
        let t = maximal_coupling(&mu, &mu).unwrap();
        assert_eq!(t.disagreement(), 0.0);
        assert!((t.diagonal_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hand_example() {
        let t = maximal_coupling(&dist(&[0.5, 0.5]), &dist(&[0.75, 0.25])).unwrap();
        assert_eq!(t.get(0, 0), 0.5);
        assert_eq!(t.get(1, 1), 0.25);
        assert_eq!(t.get(1, 0), 0.25);
        assert_eq!(t.get(0, 1), 0.0);
        assert_eq!(t.disagreement(), 0.25);
    }

    #[test]
    fn disjoint_supports() {
        let t = maximal_coupling(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap();
        assert_eq!(t.disagreement(), 1.0);
        assert_eq!(t.get(0, 1), 1.0);
    }

    #[test]
    fn support_mismatch() {
        let a = FiniteDist::on_interval(Interval::new(0, 0), 2, vec![0.5, 0.5]).unwrap();
        let b = FiniteDist::on_interval(Interval::new(-1, -1), 2, vec![0.5, 0.5]).unwrap();
        assert!(matches!(maximal_coupling(&a, &b), Err(CouplingError::SupportMismatch)));
        assert!(matches!(
            maximal_coupling(&dist(&[1.0]), &dist(&[0.5, 0.5])),
            Err(CouplingError::SupportMismatch)
        ));
    }

    #[test]
    fn invalid_distributions() {
        assert!(FiniteDist::new(vec![0.5, 0.6]).is_err());
        assert!(FiniteDist::new(vec![-0.1, 1.1]).is_err());
        assert!(FiniteDist::on_interval(Interval::new(0, 1), 2, vec![1.0]).is_err());
        let d = FiniteDist::normalized(Support::Points(2), vec![2.0, 6.0]).unwrap();
        assert_eq!(d.probs(), &[0.25, 0.75]);
    }

    #[test]
    fn sampler_reproduces_table() {
        let mu = dist(&[0.1, 0.4, 0.2, 0.3]);
        let nu = dist(&[0.3, 0.1, 0.4, 0.2]);
        let table = maximal_coupling(&mu, &nu).unwrap();
        let plan = MaximalCoupling::new(&mu, &nu).unwrap();
        let mut rng = stream_rng(5, 0);
        let n = 400_000;
        let mut counts = vec![0usize; 16];
        for _ in 0..n {
            let (i, j) = plan.sample(&mut rng);
            counts[i * 4 + j] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            let p = table.joint[k];
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - p).abs() <= 5.0 * sd + 1e-12, "cell {k}");
        }
    }

    fn weights(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1..=max_len).prop_flat_map(|n| {
            (
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(0.0f64..1.0, n),
            )
        })
    }

    fn normalize(mut w: Vec<f64>) -> Vec<f64> {
        let s: f64 = w.iter().sum();
        if s == 0.0 {
            w[0] = 1.0;
            return w;
        }
        w.iter_mut().for_each(|v| *v /= s);
        w
    }

    proptest! {
        #[test]
        fn disagreement_equals_total_variation((a, b) in weights(64)) {
            let mu = FiniteDist::new(normalize(a)).unwrap();
            let nu = FiniteDist::new(normalize(b)).unwrap();
            let t = maximal_coupling(&mu, &nu).unwrap();
            let tv = total_variation(mu.probs(), nu.probs());
            prop_assert!((t.disagreement() - tv).abs() < 1e-12);
            for (r, p) in t.row_sums().iter().zip(mu.probs()) {
                prop_assert!((r - p).abs() < 1e-12);
            }
            for (c, p) in t.column_sums().iter().zip(nu.probs()) {
                prop_assert!((c - p).abs() < 1e-12);
            }
            prop_assert!(t.joint.iter().all(|&v| v >= 0.0));
            let diag: f64 = mu.probs().iter().zip(nu.probs()).map(|(x, y)| x.min(*y)).sum();
            prop_assert!((t.diagonal_mass() - diag).abs() < 1e-12);
        }
    }
}
