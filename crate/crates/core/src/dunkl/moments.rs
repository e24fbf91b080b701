//! Joint moments of Gaussian β corners and of Dyson Brownian motion as
//! degree-zero parts of nested power-sum operators.

use super::profile::{apply_power_sum_pruned, restrict_rows, EngineLimits, OperatorSpec, ProfileSum};
use crate::error::{arg, Result};
use crate::scalar::{to_f64, Rational};
use num::{BigInt, One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub enum MomentMode {
    /// Top row size `n`, nonincreasing rows `N_1 ≥ … ≥ N_m`, top-row variance.
    Corners { n: usize, rows: Vec<usize>, variance: Rational },
    /// `n` particles started at zero, nondecreasing times.
    Dbm { n: usize, times: Vec<Rational> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentQuery {
    pub powers: Vec<u32>,
    pub beta: Rational,
    pub mode: MomentMode,
}

impl MomentQuery {
    pub fn corners(n: usize, rows: Vec<usize>, powers: Vec<u32>, beta: Rational, variance: Rational) -> Self {
        Self { powers, beta, mode: MomentMode::Corners { n, rows, variance } }
    }

    pub fn dbm(n: usize, times: Vec<Rational>, powers: Vec<u32>, beta: Rational) -> Self {
        Self { powers, beta, mode: MomentMode::Dbm { n, times } }
    }

    pub fn m(&self) -> usize {
        self.powers.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.powers.is_empty() {
            return arg("need at least one power");
        }
        if self.powers.iter().any(|&k| k == 0) {
            return arg("powers must be positive");
        }
        if self.beta <= Rational::zero() {
            return arg("beta must be positive");
        }
        match &self.mode {
            MomentMode::Corners { n, rows, variance } => {
                if rows.len() != self.powers.len() {
                    return arg("rows and powers differ in length");
                }
                if *variance < Rational::zero() {
                    return arg("variance must be nonnegative");
                }
                let mut prev = *n;
                for &r in rows {
                    if r == 0 || r > prev {
                        return arg(format!("rows must satisfy N ≥ N_1 ≥ … ≥ N_m ≥ 1, got N={n}, rows={rows:?}"));
                    }
                    prev = r;
                }
            }
            MomentMode::Dbm { n, times } => {
                if *n == 0 {
                    return arg("N must be positive");
                }
                if times.len() != self.powers.len() {
                    return arg("times and powers differ in length");
                }
                let mut prev = Rational::zero();
                for t in times {
                    if *t < prev {
                        return arg("times must satisfy 0 ≤ τ_1 ≤ … ≤ τ_m");
                    }
                    prev = t.clone();
                }
            }
        }
        Ok(())
    }
}

/// Moment of the corners process: `E ∏_ℓ Σ_{i ≤ N_ℓ} (y_i^{N_ℓ})^{k_ℓ}`.
pub fn corners_moment(q: &MomentQuery) -> Result<Rational> {
    corners_moment_with(q, &EngineLimits::default())
}

pub fn corners_moment_with(q: &MomentQuery, limits: &EngineLimits) -> Result<Rational> {
    q.validate()?;
    let MomentMode::Corners { n, rows, variance } = &q.mode else {
        return arg("corners_moment needs a corners-mode query");
    };
    let total: u32 = q.powers.iter().sum();
    if total % 2 == 1 {
        return Ok(Rational::zero());
    }
    let mut state = ProfileSum::one();
    let mut active = *n;
    let mut left = total;
    for (l, &k) in q.powers.iter().enumerate() {
        state = restrict_rows(&state, active, rows[l])?;
        active = rows[l];
        left -= k;
        let spec = OperatorSpec { n: active, tau: variance.clone(), beta: q.beta.clone(), k };
        state = apply_power_sum_pruned(&state, &spec, Some(left), limits)?;
    }
    Ok(state.degree_zero())
}

/// Moment of Dyson Brownian motion from zero: `E ∏_ℓ Σ_i Y_i(τ_ℓ)^{k_ℓ}`.
pub fn dbm_moment(q: &MomentQuery) -> Result<Rational> {
    dbm_moment_with(q, &EngineLimits::default())
}

pub fn dbm_moment_with(q: &MomentQuery, limits: &EngineLimits) -> Result<Rational> {
    q.validate()?;
    let MomentMode::Dbm { n, times } = &q.mode else {
        return arg("dbm_moment needs a DBM-mode query");
    };
    let total: u32 = q.powers.iter().sum();
    if total % 2 == 1 {
        return Ok(Rational::zero());
    }
    let mut state = ProfileSum::one();
    let mut left = total;
    for (l, &k) in q.powers.iter().enumerate() {
        left -= k;
        let spec = OperatorSpec { n: *n, tau: times[l].clone(), beta: q.beta.clone(), k };
        state = apply_power_sum_pruned(&state, &spec, Some(left), limits)?;
    }
    Ok(state.degree_zero())
}

/// One of the `2^m` exact terms of the edge moment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeTerm {
    /// `b_ℓ ∈ {0,1}`: whether stage ℓ uses `k_ℓ + 1`
    pub shifts: Vec<u32>,
    /// exact `𝔓̂_{k+b} ⋯ [1]` at variance `2N/β`, as `"num/den"`
    pub exact: String,
    /// the term divided by `∏ (2√(N_ℓ N))^{k_ℓ+b_ℓ}`
    pub scaled: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeMoment {
    pub n: usize,
    pub powers: Vec<u32>,
    pub rows: Vec<usize>,
    pub value: f64,
    /// `Some` when every scaling constant is rational
    pub exact_value: Option<String>,
    pub terms: Vec<EdgeTerm>,
}

/// `2^{−m} ∏_ℓ (𝔓̂_{k_ℓ}/(2√(N_ℓN))^{k_ℓ} + 𝔓̂_{k_ℓ+1}/(2√(N_ℓN))^{k_ℓ+1})[1]`
/// at variance `2N/β`, with `k_ℓ = round(𝐤_ℓ N^{2/3})` and
/// `N_ℓ = round(N − 𝛕_ℓ N^{2/3})`.
pub fn scaled_edge_moment(n: usize, kappa: &[f64], taus: &[f64], beta: &Rational) -> Result<EdgeMoment> {
    scaled_edge_moment_with(n, kappa, taus, beta, &EngineLimits::default())
}

pub fn scaled_edge_moment_with(
    n: usize,
    kappa: &[f64],
    taus: &[f64],
    beta: &Rational,
    limits: &EngineLimits,
) -> Result<EdgeMoment> {
    if kappa.is_empty() || kappa.len() != taus.len() {
        return arg("kappa and taus must be nonempty and of equal length");
    }
    if taus.windows(2).any(|w| w[1] < w[0]) {
        return arg("taus must be nondecreasing");
    }
    let scale = (n as f64).powf(2.0 / 3.0);
    let powers: Vec<u32> = kappa.iter().map(|&k| (k * scale).round().max(0.0) as u32).collect();
    let rows: Vec<usize> = taus.iter().map(|&t| (n as f64 - t * scale).round() as i64).map(|r| r.max(0) as usize).collect();
    if powers.iter().any(|&k| k == 0) {
        return arg(format!("N = {n} too small: some k_ℓ rounds to 0"));
    }
    if rows.iter().any(|&r| r == 0 || r > n) {
        return arg(format!("N = {n} too small or taus out of range: rows {rows:?}"));
    }
    let m = kappa.len();
    let variance = Rational::from_integer(BigInt::from(2 * n)) / beta;
    let mut value = 0.0;
    let mut exact_sum = Some(Rational::zero());
    let mut terms = Vec::new();
    for bits in 0..(1u32 << m) {
        let shifts: Vec<u32> = (0..m).map(|l| (bits >> l) & 1).collect();
        let pw: Vec<u32> = powers.iter().zip(&shifts).map(|(k, b)| k + b).collect();
        let v = corners_moment_with(&MomentQuery::corners(n, rows.clone(), pw.clone(), beta.clone(), variance.clone()), limits)?;
        // divide by (4 N_ℓ N)^{⌊p/2⌋} exactly; an odd power leaves one factor
        // 2√(N_ℓ N), which is rational only for perfect squares
        let mut exact = v.clone();
        let mut leftover = Rational::one();
        let mut leftover_f = 1.0;
        let mut rational = true;
        for (l, &p) in pw.iter().enumerate() {
            let nn = rows[l] * n;
            exact /= num::pow(Rational::from_integer(BigInt::from(4 * nn)), (p / 2) as usize);
            if p % 2 == 1 {
                let r = (nn as f64).sqrt().round() as usize;
                if r * r == nn {
                    leftover /= Rational::from_integer(BigInt::from(2 * r));
                } else {
                    rational = false;
                }
                leftover_f /= 2.0 * (nn as f64).sqrt();
            }
        }
        let scaled = to_f64(&exact) * leftover_f;
        value += scaled;
        if !v.is_zero() {
            match (rational, exact_sum.as_mut()) {
                (true, Some(acc)) => *acc += exact * leftover,
                _ => exact_sum = None,
            }
        }
        terms.push(EdgeTerm { shifts, exact: crate::scalar::format_rational(&v), scaled });
    }
    let norm = 2f64.powi(m as i32);
    let exact_value = exact_sum.map(|s| crate::scalar::format_rational(&(s / Rational::from_integer(BigInt::from(1u64 << m)))));
    Ok(EdgeMoment { n, powers, rows, value: value / norm, exact_value, terms })
}

/// `τ(N + βN(N−1)/2)`: the exact second moment sum of GβE with variance τ.
pub fn gbe_second_moment(n: usize, beta: &Rational, tau: &Rational) -> Rational {
    let n_r = Rational::from_integer(BigInt::from(n));
    tau * (&n_r + beta * &n_r * (&n_r - Rational::one()) / Rational::from_integer(2.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn single_gaussian_variance() {
        let q = MomentQuery::corners(1, vec![1], vec![2], int(3), ratio(5, 7));
        assert_eq!(corners_moment(&q).unwrap(), ratio(5, 7));
    }

    #[test]
    fn two_by_two_beta_two() {
        let q = MomentQuery::corners(2, vec![2], vec![2], int(2), int(1));
        assert_eq!(corners_moment(&q).unwrap(), int(4));
    }

    #[test]
    fn quadrature_oracle_two_by_two() {
        // E[λ1²+λ2²] under |λ1−λ2|² e^{−(λ1²+λ2²)/2}, by a plain grid sum
        let (h, lim) = (0.02, 9.0);
        let n = (2.0 * lim / h) as i32;
        let (mut z, mut s) = (0.0, 0.0);
        for a in 0..=n {
            for b in 0..=n {
                let (x, y) = (-lim + a as f64 * h, -lim + b as f64 * h);
                let w = (x - y).powi(2) * (-(x * x + y * y) / 2.0).exp();
                z += w;
                s += w * (x * x + y * y);
            }
        }
        let exact = to_f64(&corners_moment(&MomentQuery::corners(2, vec![2], vec![2], int(2), int(1))).unwrap());
        assert!((s / z - exact).abs() < 1e-6, "{} vs {exact}", s / z);
    }

    #[test]
    fn odd_total_power_vanishes() {
        for k in [1, 3, 5] {
            let q = MomentQuery::corners(3, vec![3], vec![k], ratio(3, 2), int(1));
            assert!(corners_moment(&q).unwrap().is_zero());
        }
        let q = MomentQuery::corners(3, vec![3, 2], vec![2, 3], ratio(3, 2), int(1));
        assert!(corners_moment(&q).unwrap().is_zero());
    }

    #[test]
    fn second_moment_closed_form() {
        for n in 1..=5 {
            for beta in [ratio(1, 2), int(1), ratio(7, 3), int(4)] {
                let tau = ratio(3, 5);
                let q = MomentQuery::corners(n, vec![n], vec![2], beta.clone(), tau.clone());
                assert_eq!(corners_moment(&q).unwrap(), gbe_second_moment(n, &beta, &tau));
            }
        }
    }

    #[test]
    fn corners_and_dbm_agree_for_one_time() {
        for n in 1..=4 {
            for k in 1..=6 {
                let beta = ratio(5, 2);
                let tau = ratio(2, 3);
                let a = corners_moment(&MomentQuery::corners(n, vec![n], vec![k], beta.clone(), tau.clone())).unwrap();
                let b = dbm_moment(&MomentQuery::dbm(n, vec![tau], vec![k], beta)).unwrap();
                assert_eq!(a, b, "N={n} k={k}");
            }
        }
    }

    #[test]
    fn brownian_covariance() {
        let q = MomentQuery::dbm(1, vec![ratio(1, 3), int(2)], vec![1, 1], int(2));
        assert_eq!(dbm_moment(&q).unwrap(), ratio(1, 3));
        let q = MomentQuery::dbm(1, vec![ratio(5, 4)], vec![2], int(2));
        assert_eq!(dbm_moment(&q).unwrap(), ratio(5, 4));
    }

    #[test]
    fn gaussian_fourth_moment_one_variable() {
        // E[g^4] = 3τ² for a single Gaussian
        let q = MomentQuery::corners(1, vec![1], vec![4], int(1), ratio(1, 2));
        assert_eq!(corners_moment(&q).unwrap(), ratio(3, 4));
    }

    #[test]
    fn corner_row_marginal_is_smaller_gbe() {
        // the (N−1)-row of GβE corners is GβE_{N−1} with the same variance
        for k in [2, 4, 6] {
            let beta = ratio(3, 2);
            let a = corners_moment(&MomentQuery::corners(4, vec![3], vec![k], beta.clone(), int(1))).unwrap();
            let b = corners_moment(&MomentQuery::corners(3, vec![3], vec![k], beta, int(1))).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rows_must_be_nonincreasing() {
        let q = MomentQuery::corners(3, vec![2, 3], vec![2, 2], int(1), int(1));
        assert!(corners_moment(&q).is_err());
        let q = MomentQuery::dbm(3, vec![int(2), int(1)], vec![2, 2], int(1));
        assert!(dbm_moment(&q).is_err());
    }

    #[test]
    fn ordering_of_profiles_does_not_matter() {
        // computing with a huge profile cap and a tight one gives the same value
        let q = MomentQuery::corners(4, vec![4, 2], vec![4, 2], ratio(7, 3), int(1));
        let a = corners_moment(&q).unwrap();
        let b = corners_moment_with(&q, &EngineLimits { max_degree: 12, max_profiles: 100_000 }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_moment_terms_positive_and_trend() {
        let beta = int(2);
        let vals: Vec<f64> = [16usize, 32, 64]
            .iter()
            .map(|&n| {
                let e = scaled_edge_moment(n, &[1.0], &[0.0], &beta).unwrap();
                assert!(e.terms.iter().all(|t| t.scaled >= 0.0));
                assert!(e.terms[0].scaled > 0.0);
                assert!(e.exact_value.is_some());
                e.value
            })
            .collect();
        assert!(vals.iter().all(|v| v.is_finite() && *v > 0.0));
        // one-point Laplace transform of the Airy_2 edge at κ = 1
        let limit = (1.0f64 / 96.0).exp() / (2.0 * std::f64::consts::PI.sqrt() * 0.5f64.powf(1.5));
        let gaps: Vec<f64> = vals.iter().map(|v| (limit - v).abs()).collect();
        assert!(gaps[2] < gaps[1] && gaps[1] < gaps[0], "{vals:?}");
    }
}
