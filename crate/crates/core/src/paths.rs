//! Counts and weighted sums over ±1 lattice paths that stay above a floor,
//! with a brute-force oracle and the comparison against continuum kernels.

use crate::bridges::{f00_kernel, f0_kernel, f_kernel, i00_mc, i0_mc, i_mc, McOptions};
use crate::error::{arg, resource, Result};
use crate::scalar::{big_times_pow2, Rational};
use num::{BigInt, BigUint, One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloorMode {
    Nonnegative,
    /// `F ≥ H` throughout; only meaningful when `H ≤ G`
    StayAboveStart,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCountQuery {
    pub x: u32,
    pub h: u32,
    pub g: u32,
    pub floor_mode: FloorMode,
}

impl PathCountQuery {
    pub fn new(x: u32, h: u32, g: u32) -> Self {
        PathCountQuery { x, h, g, floor_mode: FloorMode::Nonnegative }
    }

    pub fn above_start(x: u32, h: u32, g: u32) -> Self {
        PathCountQuery { x, h, g, floor_mode: FloorMode::StayAboveStart }
    }

    pub fn parity_valid(&self) -> bool {
        (self.x + self.h + self.g) % 2 == 0
    }

    pub fn floor(&self) -> u32 {
        match self.floor_mode {
            FloorMode::Nonnegative => 0,
            FloorMode::StayAboveStart => self.h,
        }
    }

    /// the query admits no path at all
    fn empty(&self) -> bool {
        !self.parity_valid() || self.h.abs_diff(self.g) > self.x || self.g < self.floor()
    }

    pub fn downs(&self) -> u32 {
        (self.x + self.h - self.g.min(self.x + self.h)) / 2
    }
}

fn binom(n: u32, k: i64) -> BigUint {
    if k < 0 || k > n as i64 {
        BigUint::zero()
    } else {
        num::integer::binomial(BigUint::from(n), BigUint::from(k as u64))
    }
}

fn reflection(q: &PathCountQuery, choose: impl Fn(u32, i64) -> BigUint) -> BigUint {
    if q.empty() {
        return BigUint::zero();
    }
    let (x, h, g, f) = (q.x as i64, q.h as i64, q.g as i64, q.floor() as i64);
    let all = choose(q.x, (x + h - g) / 2);
    // paths touching f − 1, reflected through it
    let bad = choose(q.x, (x + h + g - 2 * f) / 2 + 1);
    all - bad
}

/// Reflection-principle count of the paths in the query.
pub fn count_paths(q: &PathCountQuery) -> BigUint {
    reflection(q, binom)
}

pub const BRUTE_FORCE_MAX_X: u32 = 24;

/// Enumerates all `2^X` step sequences.
pub fn count_paths_bruteforce(q: &PathCountQuery) -> Result<BigUint> {
    if q.x > BRUTE_FORCE_MAX_X {
        return resource(format!("brute force is capped at X = {BRUTE_FORCE_MAX_X}, got {}", q.x));
    }
    let floor = q.floor() as i64;
    let mut count = 0u64;
    'paths: for mask in 0u32..(1u32 << q.x) {
        let mut y = q.h as i64;
        for t in 0..q.x {
            y += if mask >> t & 1 == 1 { 1 } else { -1 };
            if y < floor {
                continue 'paths;
            }
        }
        if y == q.g as i64 {
            count += 1;
        }
    }
    Ok(BigUint::from(count))
}

/// The Catalan number `C_{X/2}`; zero for odd `X`.
pub fn catalan_count(x: u32) -> BigUint {
    if x % 2 == 1 {
        return BigUint::zero();
    }
    let n = x / 2;
    binom(x, n as i64) / BigUint::from(n + 1)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WeightedPathQuery {
    pub query: PathCountQuery,
    /// `f64::INFINITY` makes every factor 1
    pub beta: f64,
    pub n: u64,
}

/// Float transfer-matrix evaluation of `I` (or `I⁺`). Each step carries its
/// factor ½ so that long paths do not underflow.
pub fn weighted_sum_i(wq: &WeightedPathQuery) -> Result<f64> {
    let q = &wq.query;
    if !(wq.beta > 0.0) || wq.n == 0 {
        return arg("beta and N must be positive");
    }
    if q.empty() {
        return Ok(0.0);
    }
    let c = if wq.beta.is_infinite() { 0.0 } else { 2.0 / (wq.beta * wq.n as f64) };
    let (x, g, floor) = (q.x as i64, q.g as i64, q.floor() as i64);
    let cap = (q.h + q.x) as usize;
    let mut cur = vec![0.0f64; cap + 2];
    let mut next = vec![0.0f64; cap + 2];
    cur[q.h as usize] = 1.0;
    let (mut lo, mut hi) = (q.h as i64, q.h as i64);
    for t in 0..x {
        let left = x - t - 1;
        let nlo = (lo - 1).max(floor).max(g - left);
        let nhi = (hi + 1).min(g + left);
        for y in nlo..=nhi {
            let mut v = 0.0;
            if y - 1 >= lo && y - 1 <= hi {
                v += cur[(y - 1) as usize];
            }
            if y + 1 >= lo && y + 1 <= hi {
                v += cur[(y + 1) as usize] * (1.0 + c * y as f64);
            }
            next[y as usize] = 0.5 * v;
        }
        for y in lo..=hi {
            if y < nlo || y > nhi {
                cur[y as usize] = 0.0;
            }
        }
        std::mem::swap(&mut cur, &mut next);
        lo = nlo;
        hi = nhi;
    }
    Ok(0.5 * cur[q.g as usize])
}

/// Exact integer transfer matrix from height `h` with the given floor; the
/// down step landing at `y` multiplies by `factor(y)`. `on_row(t, row)`
/// sees every time slice, `row[y]` being the weighted count ending at `y`.
pub fn exact_rows(x_max: u32, h: u32, floor: u32, factor: impl Fn(u32) -> BigUint, mut on_row: impl FnMut(u32, &[BigUint])) {
    let cap = (h + x_max) as usize;
    let mut cur = vec![BigUint::zero(); cap + 2];
    cur[h as usize] = BigUint::one();
    on_row(0, &cur);
    let floor = floor as usize;
    for t in 1..=x_max {
        let mut next = vec![BigUint::zero(); cap + 2];
        let hi = (h + t) as usize;
        let lo = (h as usize).saturating_sub(t as usize).max(floor);
        for y in lo..=hi.min(cap) {
            let mut v = BigUint::zero();
            if y >= 1 && !cur[y - 1].is_zero() {
                v += &cur[y - 1];
            }
            if !cur[y + 1].is_zero() {
                v += &cur[y + 1] * factor(y as u32);
            }
            next[y] = v;
        }
        cur = next;
        on_row(t, &cur);
    }
}

/// Exact `I` (or `I⁺`); `beta = None` is β = ∞.
pub fn weighted_sum_i_exact(q: &PathCountQuery, beta: Option<&Rational>, n: u64) -> Result<Rational> {
    if n == 0 {
        return arg("N must be positive");
    }
    if q.empty() {
        return Ok(Rational::zero());
    }
    let mut total = BigUint::zero();
    let mut denom = BigInt::one() << (q.x as usize + 1);
    match beta {
        None => exact_rows(q.x, q.h, q.floor(), |_| BigUint::one(), |t, row| {
            if t == q.x {
                total = row[q.g as usize].clone();
            }
        }),
        Some(b) => {
            if *b <= Rational::zero() {
                return arg("beta must be positive");
            }
            // 1 + 2F/(βN) = (pN + 2qF)/(pN) for β = p/q
            let p = b.numer().to_biguint().unwrap();
            let qq = b.denom().to_biguint().unwrap();
            let pn = &p * BigUint::from(n);
            exact_rows(q.x, q.h, q.floor(), |y| &pn + &qq * BigUint::from(2 * y as u64), |t, row| {
                if t == q.x {
                    total = row[q.g as usize].clone();
                }
            });
            denom *= num::pow(BigInt::from(pn), q.downs() as usize);
        }
    }
    Ok(Rational::new(BigInt::from(total), denom))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub x_max: u32,
    pub checked: u64,
    pub mismatches: Vec<(u32, u32, u32, FloorMode)>,
}

/// At β = ∞ every factor is 1, so `2^{X+1}·I(X;H,G)` must be the path count.
/// One exact transfer-matrix run per start height covers every `(X, G)`.
pub fn beta_infinity_degeneracy(x_max: u32) -> DegeneracyReport {
    let mut pascal: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
    for n in 1..=x_max as usize {
        let prev = &pascal[n - 1];
        let mut row = vec![BigUint::one(); n + 1];
        for k in 1..n {
            row[k] = &prev[k - 1] + &prev[k];
        }
        pascal.push(row);
    }
    let choose = |n: u32, k: i64| {
        if k < 0 || k > n as i64 {
            BigUint::zero()
        } else {
            pascal[n as usize][k as usize].clone()
        }
    };
    let mut report = DegeneracyReport { x_max, checked: 0, mismatches: vec![] };
    for mode in [FloorMode::Nonnegative, FloorMode::StayAboveStart] {
        for h in 0..=x_max {
            let floor = if mode == FloorMode::Nonnegative { 0 } else { h };
            exact_rows(x_max, h, floor, |_| BigUint::one(), |t, row| {
                for g in 0..=x_max {
                    let q = PathCountQuery { x: t, h, g, floor_mode: mode };
                    let dp = row.get(g as usize).cloned().unwrap_or_default();
                    report.checked += 1;
                    if dp != reflection(&q, &choose) {
                        report.mismatches.push((t, h, g, mode));
                    }
                }
            });
        }
    }
    report
}

/// Nearest lattice point to `(xN^{2/3}, hN^{1/3}, gN^{1/3})`, moving `X`
/// by one when the parity is wrong.
pub fn lattice_point(x: f64, h: f64, g: f64, n: u64) -> (u32, u32, u32) {
    let s = (n as f64).cbrt();
    let xs = x * s * s;
    let hh = (h * s).round() as u32;
    let gg = (g * s).round() as u32;
    let mut xx = xs.round() as u32;
    if (xx + hh + gg) % 2 == 1 {
        xx = if (xx as f64) < xs || xx == 0 { xx + 1 } else { xx - 1 };
    }
    (xx, hh, gg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountKernel {
    /// `2^{−X−1}N^{1/3}|ℱ(X;H,G)|` against `𝐅(x;h,g)`
    Full,
    /// `2^{−X−1}N^{2/3}|ℱ(X;H,0)|` against `𝐅₀(x;h)`
    ToZero,
    /// `2^{−X−1}N|ℱ(X;0,0)|` against `𝐅₀₀(x)`
    Catalan,
}

/// Multiple of the error budget tolerated before a check is flagged. The
/// constants of the asymptotic bounds are not explicit; this one is empirical.
pub const EMPIRICAL_CONSTANT: f64 = 10.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub kernel: CountKernel,
    pub lattice: (u32, u32, u32),
    pub scaled_count: f64,
    pub continuum: f64,
    pub rel_error: f64,
    pub budget: f64,
    pub violated: bool,
}

fn window(x: f64, h: f64, g: f64, n: u64, kernel: CountKernel) -> Result<()> {
    let nf = n as f64;
    if !(x > nf.powf(-2.0 / 3.0)) || x > 10.0 {
        return arg(format!("x = {x} is outside (N^(-2/3), 10]"));
    }
    let ok = |v: f64| v > nf.powf(-1.0 / 3.0) && v < 10.0 * nf.powf(0.01);
    match kernel {
        CountKernel::Full if !(ok(h) && ok(g)) => arg(format!("h = {h}, g = {g} outside the admissible window")),
        CountKernel::ToZero if !ok(h) => arg(format!("h = {h} outside the admissible window")),
        _ => Ok(()),
    }
}

pub fn asymptotic_count_check(kernel: CountKernel, x: f64, h: f64, g: f64, n: u64) -> Result<AsymptoticReport> {
    let (h, g) = match kernel {
        CountKernel::Full => (h, g),
        CountKernel::ToZero => (h, 0.0),
        CountKernel::Catalan => (0.0, 0.0),
    };
    window(x, h, g, n, kernel)?;
    let nf = n as f64;
    let lattice = lattice_point(x, h, g, n);
    let (xx, hh, gg) = lattice;
    let count = BigInt::from(count_paths(&PathCountQuery::new(xx, hh, gg)));
    let base = big_times_pow2(&count, -(xx as i64) - 1);
    let third = nf.powf(-1.0 / 3.0);
    let lemma = (nf.powf(-0.6) / x.powi(3) + nf.powf(-0.1)).min(1.0);
    let (scaled_count, continuum, budget) = match kernel {
        CountKernel::Full => (base * nf.cbrt(), f_kernel(x, h, g)?, (lemma + third / h + third / g).min(1.0)),
        CountKernel::ToZero => (base * nf.cbrt().powi(2), f0_kernel(x, h)?, (lemma + third / h).min(1.0)),
        CountKernel::Catalan => (base * nf, f00_kernel(x)?, nf.powf(-2.0 / 3.0) / x),
    };
    let rel_error = (scaled_count - continuum).abs() / continuum;
    Ok(AsymptoticReport {
        kernel,
        lattice,
        scaled_count,
        continuum,
        rel_error,
        budget,
        violated: rel_error > EMPIRICAL_CONSTANT * budget,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingCase {
    /// `N^{1/3}I(X;H,G)` against `𝐈(x;h,g)`
    Bridge = 1,
    /// `N^{2/3}I(X;H,0)` against `𝐈₀(x;h)`
    ToZero = 2,
    /// `N^{2/3}I⁺(X;H,G)` against `e^{xh/β}𝐈₀(x;g−h)`
    AboveStart = 3,
    /// `N·I⁺(X;H,H)` against `e^{xh/β}𝐈₀₀(x)`
    Return = 4,
}

impl ScalingCase {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(ScalingCase::Bridge),
            2 => Ok(ScalingCase::ToZero),
            3 => Ok(ScalingCase::AboveStart),
            4 => Ok(ScalingCase::Return),
            _ => arg(format!("scaling case must be 1..=4, got {i}")),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingReport {
    pub case: ScalingCase,
    pub lattice: (u32, u32, u32),
    pub discrete: f64,
    pub continuum: f64,
    pub stderr: f64,
    /// continuum estimate at twice the mesh, when computed
    pub continuum_fine: Option<f64>,
    pub difference: f64,
    /// `rel_tol·|continuum| + 3·stderr`
    pub tolerance: f64,
    pub agree: bool,
    /// Monte Carlo noise alone uses more than the relative allowance
    pub mc_noise_dominates: bool,
}

/// Compares a discrete kernel against its continuum limit; the continuum side
/// is a Monte Carlo estimate. The `e^{xh/β}` factor in cases 3 and 4 is the
/// drift picked up from the weights `1 + 2H/(βN)` along roughly `X/2` down steps.
pub fn kernel_scaling_check(
    case: ScalingCase,
    x: f64,
    h: f64,
    g: f64,
    beta: f64,
    n: u64,
    rel_tol: f64,
    opts: &McOptions,
) -> Result<ScalingReport> {
    if !(beta > 0.0) {
        return arg("beta must be positive");
    }
    let nf = n as f64;
    let inv_beta = if beta.is_infinite() { 0.0 } else { 1.0 / beta };
    let (query, scale, est, prefactor) = match case {
        ScalingCase::Bridge => {
            let (xx, hh, gg) = lattice_point(x, h, g, n);
            (PathCountQuery::new(xx, hh, gg), nf.cbrt(), i_mc(x, h, g, beta, opts)?, 1.0)
        }
        ScalingCase::ToZero => {
            let (xx, hh, gg) = lattice_point(x, h, 0.0, n);
            (PathCountQuery::new(xx, hh, gg), nf.cbrt().powi(2), i0_mc(x, h, beta, opts)?, 1.0)
        }
        ScalingCase::AboveStart => {
            if g < h {
                return arg("case 3 needs g ≥ h");
            }
            let (xx, hh, gg) = lattice_point(x, h, g, n);
            let pre = (inv_beta * x * h).exp();
            (PathCountQuery::above_start(xx, hh, gg), nf.cbrt().powi(2), i0_mc(x, g - h, beta, opts)?, pre)
        }
        ScalingCase::Return => {
            let (xx, hh, _) = lattice_point(x, h, h, n);
            let pre = (inv_beta * x * h).exp();
            (PathCountQuery::above_start(xx, hh, hh), nf, i00_mc(x, beta, opts)?, pre)
        }
    };
    let discrete = scale * weighted_sum_i(&WeightedPathQuery { query, beta, n })?;
    let best = est.best();
    let continuum = prefactor * best.mean;
    let stderr = prefactor * best.stderr;
    let continuum_fine = est.fine.as_ref().map(|f| prefactor * f.mean);
    let difference = (discrete - continuum).abs();
    let tolerance = rel_tol * continuum.abs() + 3.0 * stderr;
    Ok(ScalingReport {
        case,
        lattice: (query.x, query.h, query.g),
        discrete,
        continuum,
        stderr,
        continuum_fine,
        difference,
        tolerance,
        agree: difference <= tolerance,
        mc_noise_dominates: 3.0 * stderr > rel_tol * continuum.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio, to_f64};

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_paths(&PathCountQuery::new(4, 0, 0)), big(2));
        assert_eq!(count_paths(&PathCountQuery::new(4, 1, 1)), big(5));
        assert_eq!(count_paths(&PathCountQuery::new(3, 0, 1)), big(2));
        assert_eq!(count_paths(&PathCountQuery::new(5, 0, 0)), big(0));
        assert_eq!(count_paths(&PathCountQuery::new(2, 0, 6)), big(0));
        assert_eq!(count_paths_bruteforce(&PathCountQuery::new(4, 1, 1)).unwrap(), big(5));
        assert_eq!(count_paths_bruteforce(&PathCountQuery::new(5, 0, 0)).unwrap(), big(0));
        // F ≥ H: from 1 to 1 in 4 steps means two Dyck paths shifted up
        assert_eq!(count_paths(&PathCountQuery::above_start(4, 1, 1)), big(2));
        assert_eq!(count_paths(&PathCountQuery::above_start(4, 3, 1)), big(0));
    }

    #[test]
    fn catalan_numbers() {
        assert_eq!(catalan_count(2), big(1));
        assert_eq!(catalan_count(4), big(2));
        assert_eq!(catalan_count(12), big(132));
        assert_eq!(catalan_count(7), big(0));
        for x in (0..20).step_by(2) {
            assert_eq!(catalan_count(x), count_paths(&PathCountQuery::new(x, 0, 0)));
        }
    }

    #[test]
    fn brute_force_agrees_up_to_fourteen() {
        for x in 0..=14 {
            for h in 0..=x {
                for g in 0..=x {
                    for q in [PathCountQuery::new(x, h, g), PathCountQuery::above_start(x, h, g)] {
                        assert_eq!(count_paths(&q), count_paths_bruteforce(&q).unwrap(), "{q:?}");
                    }
                }
            }
        }
        let e = count_paths_bruteforce(&PathCountQuery::new(25, 1, 0)).unwrap_err();
        assert!(matches!(e, crate::LabError::Resource(_)));
    }

    #[test]
    fn counts_decrease_towards_the_floor() {
        for x in 0..=16 {
            for h in 0..=x {
                for g in 2..=h {
                    let a = count_paths(&PathCountQuery::new(x, h, g));
                    let b = count_paths(&PathCountQuery::new(x, h, g - 2));
                    assert!(b <= a, "{x} {h} {g}");
                }
            }
        }
    }

    #[test]
    fn weighted_sums() {
        // one path 0 → 1 → 0, the down step lands at 0
        let q = PathCountQuery::new(2, 0, 0);
        assert_eq!(weighted_sum_i_exact(&q, Some(&int(2)), 10).unwrap(), ratio(1, 8));
        // 1→2→1 and 1→0→1: factors (1 + 2/(βN)) and 1
        let q = PathCountQuery::new(2, 1, 1);
        let v = weighted_sum_i_exact(&q, Some(&ratio(3, 2)), 4).unwrap();
        assert_eq!(v, (int(1) + ratio(2, 6) + int(1)) / int(8));
        let f = weighted_sum_i(&WeightedPathQuery { query: q, beta: 1.5, n: 4 }).unwrap();
        assert!((f - to_f64(&v)).abs() < 1e-15);
        for x in 0..=10 {
            for h in 0..=5 {
                for g in 0..=6 {
                    let q = PathCountQuery::new(x, h, g);
                    let e = to_f64(&weighted_sum_i_exact(&q, Some(&ratio(7, 3)), 5).unwrap());
                    let f = weighted_sum_i(&WeightedPathQuery { query: q, beta: 7.0 / 3.0, n: 5 }).unwrap();
                    assert!((e - f).abs() <= 1e-14 * e.max(1e-300), "{q:?} {e} {f}");
                    if g >= h {
                        let p = PathCountQuery::above_start(x, h, g);
                        let ep = weighted_sum_i_exact(&p, Some(&ratio(7, 3)), 5).unwrap();
                        assert!(ep <= weighted_sum_i_exact(&PathCountQuery::new(x, h, g), Some(&ratio(7, 3)), 5).unwrap());
                    }
                    let inf = weighted_sum_i_exact(&q, None, 5).unwrap() * Rational::from_integer(BigInt::one() << (x as usize + 1));
                    assert_eq!(inf, Rational::from_integer(count_paths(&q).into()));
                    let finf = weighted_sum_i(&WeightedPathQuery { query: q, beta: f64::INFINITY, n: 5 }).unwrap();
                    assert!((finf * 2f64.powi(x as i32 + 1) - to_f64(&inf)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn degeneracy_on_a_small_grid() {
        let r = beta_infinity_degeneracy(30);
        assert!(r.mismatches.is_empty(), "{:?}", &r.mismatches[..r.mismatches.len().min(5)]);
        assert_eq!(r.checked, 2 * 31 * 31 * 31);
    }

    #[test]
    fn lattice_rounding() {
        assert_eq!(lattice_point(1.0, 1.0, 1.0, 1_000_000), (10_000, 100, 100));
        let (x, h, g) = lattice_point(1.0, 1.0, 0.5, 1000);
        assert_eq!((x + h + g) % 2, 0);
        assert!(x.abs_diff(100) <= 1);
    }

    #[test]
    fn asymptotic_counts() {
        let r = asymptotic_count_check(CountKernel::Full, 1.0, 1.0, 1.0, 1_000_000).unwrap();
        assert!(r.rel_error < 5e-2 && !r.violated, "{r:?}");
        let r = asymptotic_count_check(CountKernel::ToZero, 1.0, 1.0, 0.0, 1_000_000).unwrap();
        assert!(r.rel_error < 5e-2 && !r.violated, "{r:?}");
        let r = asymptotic_count_check(CountKernel::Catalan, 1.0, 0.0, 0.0, 1_000_000).unwrap();
        assert!(r.rel_error < EMPIRICAL_CONSTANT * r.budget, "{r:?}");
        let errs: Vec<f64> = [10_000u64, 100_000, 1_000_000]
            .iter()
            .map(|&n| asymptotic_count_check(CountKernel::Full, 1.0, 1.0, 1.0, n).unwrap().rel_error)
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(asymptotic_count_check(CountKernel::Full, 1e-6, 1.0, 1.0, 1000).is_err());
        assert!(asymptotic_count_check(CountKernel::Full, 1.0, 0.0, 1.0, 1000).is_err());
    }

    #[test]
    fn infinite_beta_scaling_is_the_count_check() {
        let opts = McOptions { budget: 1000, seed: 1, mesh: 16, refine: false };
        let s = kernel_scaling_check(ScalingCase::Bridge, 1.0, 1.0, 1.0, f64::INFINITY, 1_000_000, 0.05, &opts).unwrap();
        let a = asymptotic_count_check(CountKernel::Full, 1.0, 1.0, 1.0, 1_000_000).unwrap();
        assert!((s.discrete - a.scaled_count).abs() < 1e-12 * a.scaled_count);
        assert_eq!(s.continuum, a.continuum);
        assert_eq!(s.stderr, 0.0);
    }

    #[test]
    fn scaling_cases_at_moderate_n() {
        let opts = McOptions { budget: 20_000, seed: 7, mesh: 32, refine: false };
        for (case, h, g) in [
            (ScalingCase::Bridge, 1.0, 1.0),
            (ScalingCase::ToZero, 1.0, 0.0),
            (ScalingCase::AboveStart, 0.5, 1.5),
            (ScalingCase::Return, 0.5, 0.5),
            (ScalingCase::Return, 0.0, 0.0),
        ] {
            let r = kernel_scaling_check(case, 1.0, h, g, 2.0, 1_000_000, 0.05, &opts).unwrap();
            assert!(r.agree, "{r:?}");
        }
    }
}
