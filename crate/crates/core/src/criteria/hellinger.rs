use super::CriteriaError;

/// `(1 + √2)²`: largest per-site ratio for which the factor
/// `1 - ½(√ρ - 1)²` stays non-negative.
pub const RG2_RHO_MAX: f64 = 5.828_427_124_746_19;

/// Certified constant for [`as1_floor`] with `λ = 2`.
///
/// `K(λ) = sup_{0 < ℓ ≤ log λ} q(ℓ)` with
/// `q(ℓ) = [1 - (1 - u/2)² - ℓ²/4] / ℓ³` and `u = (e^{ℓ/2} - 1)²`.
/// `q` rises from `1/8` at `0` to its global maximum `0.1326663` near
/// `ℓ = 0.606 < log 2` and decreases afterwards, so `K(2)` is the global
/// supremum rounded up. See the `as1_constant_certificate` test.
pub const AS1_K_LAMBDA_2: f64 = 0.1327;

/// Single-site bound `½ Σ_s |g(sx) - g(sy)| ≤ ρ - 1` for pairs agreeing on
/// the coordinates that `ρ` controls.
pub fn d1_from_rho(rho: f64) -> f64 {
    (rho - 1.0).max(0.0)
}

/// `1 - ½(√ρ - 1)²`, a lower bound on `Σ √(μν)` when every ratio
/// `μ/ν`, `ν/μ` is at most `ρ`.
pub fn hellinger_floor(rho: f64) -> Result<f64, CriteriaError> {
    if !(rho >= 1.0) || !rho.is_finite() {
        return Err(CriteriaError::OutOfDomain(format!("ratio {rho} below 1")));
    }
    Ok(1.0 - 0.5 * (rho.sqrt() - 1.0).powi(2))
}

/// `sqrt(1 - Π(1 - ½(√ρ_i - 1)²)²)`: TV bound for two measures on a block
/// whose site-wise conditional ratios are bounded by `ρ_i`.
pub fn tv_upper_rg2(rhos: &[f64]) -> Result<f64, CriteriaError> {
    let mut prod = 1.0;
    for &rho in rhos {
        if rho > RG2_RHO_MAX {
            return Err(CriteriaError::OutOfDomain(format!(
                "ratio {rho} exceeds (1+√2)²"
            )));
        }
        prod *= hellinger_floor(rho)?;
    }
    Ok((1.0 - prod * prod).max(0.0).sqrt())
}

fn as1_q(l: f64) -> f64 {
    let e = (0.5 * l).exp_m1();
    let u = e * e;
    // 1 - (1 - u/2)² - ℓ²/4 = (u - ℓ²/4) - u²/4, with u - ℓ²/4 = (e - ℓ/2)(e + ℓ/2)
    ((e - 0.5 * l) * (e + 0.5 * l) - 0.25 * u * u) / (l * l * l)
}

/// `q` is increasing on `(0, 0.6]`; its maximizer lies just above.
const AS1_INCREASING_UP_TO: f64 = 0.6;

/// Constant `K(λ)` for [`as1_floor`], valid for `1 < λ < (1+√2)²`.
///
/// For `log λ ≥ 0.6` the global supremum [`AS1_K_LAMBDA_2`] is used;
/// below, `q` is increasing and `K(λ) = q(log λ)` padded by `1e-9`.
pub fn as1_constant(lambda: f64) -> Result<f64, CriteriaError> {
    if !(lambda > 1.0 && lambda < RG2_RHO_MAX) {
        return Err(CriteriaError::OutOfDomain(format!(
            "λ = {lambda} outside (1, (1+√2)²)"
        )));
    }
    let l = lambda.ln();
    if l >= AS1_INCREASING_UP_TO {
        Ok(AS1_K_LAMBDA_2)
    } else {
        Ok(as1_q(l) + 1e-9)
    }
}

/// `1 - Σ((log ρ_i)²/4 + K(λ)(log ρ_i)³)`, a lower bound on
/// `Π(1 - ½(√ρ_i - 1)²)²` for `1 ≤ ρ_i ≤ λ`.
pub fn as1_floor(rhos: &[f64], lambda: f64) -> Result<f64, CriteriaError> {
    let k = as1_constant(lambda)?;
    let mut sum = 0.0;
    for &rho in rhos {
        if !(1.0..=lambda).contains(&rho) {
            return Err(CriteriaError::OutOfDomain(format!(
                "ratio {rho} outside [1, {lambda}]"
            )));
        }
        let l = rho.ln();
        sum += 0.25 * l * l + k * l * l * l;
    }
    Ok(1.0 - sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    #[test]
    fn rho_max_constant() {
        assert!((RG2_RHO_MAX - (1.0 + 2f64.sqrt()).powi(2)).abs() < 1e-12);
        assert!(hellinger_floor(RG2_RHO_MAX).unwrap().abs() < 1e-12);
    }

    #[test]
    fn floor_examples() {
        assert_eq!(hellinger_floor(1.0).unwrap(), 1.0);
        assert_eq!(hellinger_floor(4.0).unwrap(), 0.5);
        assert!(hellinger_floor(0.9).is_err());
        assert_eq!(d1_from_rho(1.0), 0.0);
        assert_eq!(d1_from_rho(1.5), 0.5);
    }

    #[test]
    fn rg2_examples() {
        assert_eq!(tv_upper_rg2(&[1.0, 1.0]).unwrap(), 0.0);
        assert!((tv_upper_rg2(&[4.0]).unwrap() - 0.75f64.sqrt()).abs() < 1e-15);
        assert!(tv_upper_rg2(&[6.0]).is_err());
    }

    #[test]
    fn as1_constant_certificate() {
        // Dense grid over (0, log((1+√2)²)) padded by twice the largest
        // observed slope times the grid step.
        let top = RG2_RHO_MAX.ln();
        let n = 400_000;
        let h = top / n as f64;
        let mut best = (0.0, 0.0);
        let mut lip: f64 = 0.0;
        for j in 1..=n {
            let l = j as f64 * h;
            let q = as1_q(l);
            if q > best.0 {
                best = (q, l);
            }
            if j < n {
                lip = lip.max(((as1_q(l + h) - q) / h).abs());
            }
        }
        assert!(lip < 1.0, "slope {lip}");
        assert!(best.0 + 2.0 * lip * h <= AS1_K_LAMBDA_2, "sup {best:?}");
        assert!(AS1_K_LAMBDA_2 - best.0 < 1e-4);
        assert!(best.1 > AS1_INCREASING_UP_TO && best.1 < 0.7);
        assert!((as1_q(1e-4) - 0.125).abs() < 1e-4);
        let mut prev = 0.0;
        for j in 1..=1000 {
            let q = as1_q(AS1_INCREASING_UP_TO * j as f64 / 1000.0);
            assert!(q >= prev);
            prev = q;
        }
        assert_eq!(as1_constant(2.0).unwrap(), AS1_K_LAMBDA_2);
    }

    #[test]
    fn as1_per_factor_inequality() {
        for lambda in [1.2, 1.5, 2.0, 4.0, 5.8] {
            let k = as1_constant(lambda).unwrap();
            for j in 0..=10_000 {
                let rho = 1.0 + (lambda - 1.0) * j as f64 / 10_000.0;
                let l: f64 = rho.ln();
                let exact = (1.0 - 0.5 * (rho.sqrt() - 1.0).powi(2)).powi(2);
                assert!(exact >= 1.0 - 0.25 * l * l - k * l * l * l - 1e-15, "{lambda} {rho}");
            }
        }
    }

    #[test]
    fn as1_floor_below_product() {
        let mut rng = stream_rng(21, 0);
        for _ in 0..2000 {
            let n = rng.gen_range(1..10);
            let rhos: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..=2.0)).collect();
            let exact: f64 = rhos
                .iter()
                .map(|r| hellinger_floor(*r).unwrap().powi(2))
                .product();
            assert!(as1_floor(&rhos, 2.0).unwrap() <= exact + 1e-15);
        }
        assert_eq!(as1_floor(&[1.0, 1.0], 2.0).unwrap(), 1.0);
        assert!(as1_floor(&[2.5], 2.0).is_err());
        assert!(as1_constant(6.0).is_err());
    }

    #[test]
    fn hellinger_floor_on_random_pairs() {
        let mut rng = stream_rng(22, 0);
        for _ in 0..2000 {
            let n = rng.gen_range(2..=16);
            let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let nu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let (sm, sn): (f64, f64) = (mu.iter().sum(), nu.iter().sum());
            let (mu, nu): (Vec<f64>, Vec<f64>) = (
                mu.iter().map(|v| v / sm).collect(),
                nu.iter().map(|v| v / sn).collect(),
            );
            let rho = mu
                .iter()
                .zip(&nu)
                .map(|(a, b)| (a / b).max(b / a))
                .fold(1.0, f64::max);
            let affinity: f64 = mu.iter().zip(&nu).map(|(a, b)| (a * b).sqrt()).sum();
            assert!(affinity >= hellinger_floor(rho).unwrap() - 1e-14);
        }
    }
}
