//! Samplers for GβE, β-corners and Dyson Brownian motion, Monte Carlo joint
//! moments and edge-rescaled observables.
//!
//! GβE with variance τ means the density ∝ ∏|λ_i−λ_j|^β exp(−Σλ_i²/(2τ)).
//! The tridiagonal model realizing it has `N(0, τ)` on the diagonal and
//! `√(τ/2)·χ_{β(N−i)}` off it; then `E Tr H² = Nτ + τβN(N−1)/2`.

use crate::bridges::FunctionalEstimate;
use crate::dunkl::moments::{MomentMode, MomentQuery};
use crate::error::{arg, resource, Result};
use crate::scalar::to_f64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum {
    /// strictly decreasing
    pub values: Vec<f64>,
    pub beta: f64,
    pub variance: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CornersArray {
    /// `rows[n-1]` is level `n`, decreasing
    pub rows: Vec<Vec<f64>>,
    pub beta: f64,
    pub variance: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DbmPath {
    pub times: Vec<f64>,
    /// decreasing particle positions at each stored time
    pub states: Vec<Vec<f64>>,
    pub beta: f64,
    pub dt: f64,
    pub seed: u64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return arg(format!("beta must be positive and finite, got {beta}"));
    }
    Ok(())
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        q = diag[i] - x - if i == 0 { 0.0 } else { off2[i - 1] / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest `count` eigenvalues, decreasing, by Sturm bisection.
pub fn tridiagonal_top(diag: &[f64], off: &[f64], count: usize) -> Vec<f64> {
    let n = diag.len();
    let off2: Vec<f64> = off.iter().map(|b| b * b).collect();
    let radius = |i: usize| (if i > 0 { off[i - 1].abs() } else { 0.0 }) + (if i + 1 < n { off[i].abs() } else { 0.0 });
    let lo0 = (0..n).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min) - 1e-12;
    let hi0 = (0..n).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max) + 1e-12;
    (0..count.min(n))
        .map(|r| {
            // eigenvalue with exactly n-1-r eigenvalues below it
            let target = n - 1 - r;
            let (mut lo, mut hi) = (lo0, hi0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if sturm_count(diag, &off2, mid) > target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

fn chi<R: Rng>(rng: &mut R, k: f64) -> f64 {
    (2.0 * Gamma::new(k / 2.0, 1.0).unwrap().sample(rng)).sqrt()
}

fn tridiagonal<R: Rng>(rng: &mut R, n: usize, beta: f64, tau: f64) -> (Vec<f64>, Vec<f64>) {
    let diag = (0..n).map(|_| tau.sqrt() * rng.sample::<f64, _>(StandardNormal)).collect();
    let off = (1..n).map(|i| (tau / 2.0).sqrt() * chi(rng, beta * (n - i) as f64)).collect();
    (diag, off)
}

fn check_gbe(n: usize, beta: f64, tau: f64) -> Result<()> {
    check_beta(beta)?;
    if n == 0 {
        return arg("N must be at least 1");
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return arg(format!("variance must be positive, got {tau}"));
    }
    Ok(())
}

fn gbe_with<R: Rng>(rng: &mut R, n: usize, beta: f64, tau: f64, top: usize) -> Result<Vec<f64>> {
    let (d, o) = tridiagonal(rng, n, beta, tau);
    let v = tridiagonal_top(&d, &o, top);
    if v.windows(2).any(|w| w[0] <= w[1]) {
        return resource("tied eigenvalues; resample with another seed");
    }
    Ok(v)
}

/// GβE eigenvalues with variance `tau`.
pub fn sample_gbe(n: usize, beta: f64, tau: f64, seed: u64) -> Result<Spectrum> {
    check_gbe(n, beta, tau)?;
    let values = gbe_with(&mut rng_for(seed, 0), n, beta, tau, n)?;
    Ok(Spectrum { values, beta, variance: tau, seed })
}

/// The largest `top` GβE eigenvalues for `count` independent seeds streams.
pub fn sample_gbe_top(n: usize, beta: f64, tau: f64, top: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_gbe(n, beta, tau)?;
    (0..count as u64).into_par_iter().map(|s| gbe_with(&mut rng_for(seed, s), n, beta, tau, top)).collect()
}

/// One level down in the β-corners process: the roots of
/// `Σ_b w_b/(z−λ_b)` with `(w_b)` Dirichlet(β/2, …, β/2), one per gap.
pub fn corners_level_down<R: Rng>(lambda: &[f64], beta: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_beta(beta)?;
    if lambda.windows(2).any(|w| !(w[0] > w[1])) {
        return arg("row must be strictly decreasing");
    }
    let n = lambda.len();
    if n <= 1 {
        return Ok(vec![]);
    }
    let g = Gamma::new(beta / 2.0, 1.0).unwrap();
    let mut w: Vec<f64> = (0..n).map(|_| g.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    if !(s > 0.0) {
        return resource("all Dirichlet weights underflowed");
    }
    w.iter_mut().for_each(|v| *v /= s);
    let f = |z: f64| -> f64 { w.iter().zip(lambda).map(|(wb, lb)| wb / (z - lb)).sum() };
    let mut out = Vec::with_capacity(n - 1);
    for b in 0..n - 1 {
        // f decreases from +∞ to −∞ across (λ_{b+1}, λ_b)
        let (mut lo, mut hi) = (lambda[b + 1], lambda[b]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        if !(root > lambda[b + 1] && root < lambda[b]) {
            return resource(format!("no interior root in gap {b}; the row is too tightly spaced"));
        }
        out.push(root);
    }
    Ok(out)
}

fn corners_with<R: Rng>(rng: &mut R, n: usize, beta: f64, tau: f64, down_to: usize) -> Result<Vec<Vec<f64>>> {
    let top = gbe_with(rng, n, beta, tau, n)?;
    let mut rows = vec![vec![]; n];
    rows[n - 1] = top;
    for k in (down_to.max(1)..n).rev() {
        rows[k - 1] = corners_level_down(&rows[k], beta, rng)?;
    }
    Ok(rows)
}

pub fn sample_gbe_corners(n: usize, beta: f64, tau: f64, seed: u64) -> Result<CornersArray> {
    check_gbe(n, beta, tau)?;
    let rows = corners_with(&mut rng_for(seed, 0), n, beta, tau, 1)?;
    Ok(CornersArray { rows, beta, variance: tau, seed })
}

/// Rejected proposals tolerated within one step before giving up.
const MAX_RETRIES: u32 = 64;

fn min_gap(y: &[f64]) -> f64 {
    y.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
}

/// Advances `y` (decreasing) by `h` with Euler–Maruyama. Substeps shrink to
/// `gap²/10` when the minimal gap is under `√h`; a substep that breaks the
/// order is redrawn at a quarter of its size.
fn dbm_advance<R: Rng>(y: &mut [f64], beta: f64, h: f64, rng: &mut R, scratch: &mut Vec<f64>) -> Result<()> {
    let n = y.len();
    let mut left = h;
    while left > 0.0 {
        let g = min_gap(y);
        let mut step = left.min(0.1 * g * g);
        let mut retries = 0;
        loop {
            scratch.clear();
            let sd = step.sqrt();
            for i in 0..n {
                let drift: f64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (y[i] - y[j])).sum();
                scratch.push(y[i] + 0.5 * beta * drift * step + sd * rng.sample::<f64, _>(StandardNormal));
            }
            if scratch.windows(2).all(|w| w[0] > w[1]) {
                break;
            }
            retries += 1;
            if retries > MAX_RETRIES || step < 1e-300 {
                return resource("step-size failure: particles kept colliding; lower dt");
            }
            step /= 4.0;
        }
        y.copy_from_slice(scratch);
        left -= step;
        if left < 1e-15 * h {
            break;
        }
    }
    Ok(())
}

fn check_dbm(n: usize, beta: f64, dt: f64) -> Result<()> {
    check_beta(beta)?;
    if beta < 1.0 {
        return arg("DBM needs beta ≥ 1: below it particles collide and the equation stops describing the process");
    }
    if n == 0 {
        return arg("N must be at least 1");
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return arg("dt must be positive");
    }
    Ok(())
}

/// Positions at each of the nondecreasing `times`, started from zero. The
/// first `dt` is taken exactly: the law at time `dt` is GβE with variance
/// `dt`. After that, Euler–Maruyama steps of size `dt`.
fn dbm_snapshots<R: Rng>(rng: &mut R, n: usize, beta: f64, times: &[f64], dt: f64) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut y = vec![0.0; n];
    let mut scratch = Vec::with_capacity(n);
    for &target in times {
        if target > 0.0 && t == 0.0 {
            let t0 = dt.min(target);
            y = if n == 1 { vec![t0.sqrt() * rng.sample::<f64, _>(StandardNormal)] } else { gbe_with(rng, n, beta, t0, n)? };
            t = t0;
        }
        while target - t > 1e-12 * target.max(1.0) {
            let h = dt.min(target - t);
            dbm_advance(&mut y, beta, h, rng, &mut scratch)?;
            t += h;
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// One path stored on the grid `0, dt, 2dt, …, T`.
pub fn simulate_dbm(n: usize, beta: f64, t_end: f64, dt: f64, seed: u64) -> Result<DbmPath> {
    check_dbm(n, beta, dt)?;
    if !(t_end > 0.0) {
        return arg("T must be positive");
    }
    let steps = (t_end / dt).ceil() as usize;
    let times: Vec<f64> = (0..=steps).map(|i| (i as f64 * dt).min(t_end)).collect();
    let states = dbm_snapshots(&mut rng_for(seed, 0), n, beta, &times, dt)?;
    Ok(DbmPath { times, states, beta, dt, seed })
}

/// Independent samples, stored only at the rows or times the estimators need.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum SampleSet {
    /// `values[s][r]` is row `rows[r]` of sample `s`
    Corners { n: usize, beta: f64, variance: f64, rows: Vec<usize>, values: Vec<Vec<Vec<f64>>> },
    /// `values[s][t]` is the state at `times[t]`
    Dbm { n: usize, beta: f64, dt: f64, times: Vec<f64>, values: Vec<Vec<Vec<f64>>> },
}

impl SampleSet {
    pub fn len(&self) -> usize {
        match self {
            SampleSet::Corners { values, .. } | SampleSet::Dbm { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n(&self) -> usize {
        match self {
            SampleSet::Corners { n, .. } | SampleSet::Dbm { n, .. } => *n,
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            SampleSet::Corners { beta, .. } | SampleSet::Dbm { beta, .. } => *beta,
        }
    }
}

/// `count` corners samples keeping the listed rows.
pub fn corners_samples(n: usize, beta: f64, variance: f64, rows: &[usize], count: usize, seed: u64) -> Result<SampleSet> {
    check_gbe(n, beta, variance)?;
    if rows.iter().any(|&r| r == 0 || r > n) {
        return arg(format!("rows must lie in 1..={n}"));
    }
    let lowest = rows.iter().copied().min().unwrap_or(n);
    let values = (0..count as u64)
        .into_par_iter()
        .map(|s| {
            let all = corners_with(&mut rng_for(seed, s), n, beta, variance, lowest)?;
            Ok(rows.iter().map(|&r| all[r - 1].clone()).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleSet::Corners { n, beta, variance, rows: rows.to_vec(), values })
}

/// `count` DBM samples at the listed nondecreasing times.
pub fn dbm_samples(n: usize, beta: f64, times: &[f64], dt: f64, count: usize, seed: u64) -> Result<SampleSet> {
    check_dbm(n, beta, dt)?;
    if times.windows(2).any(|w| w[0] > w[1]) || times.iter().any(|&t| !(t >= 0.0)) {
        return arg("times must be nonnegative and nondecreasing");
    }
    let values = (0..count as u64)
        .into_par_iter()
        .map(|s| dbm_snapshots(&mut rng_for(seed, s), n, beta, times, dt))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleSet::Dbm { n, beta, dt, times: times.to_vec(), values })
}

pub fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn estimate(v: &[f64]) -> FunctionalEstimate {
    let (mean, stderr) = mean_and_stderr(v);
    FunctionalEstimate { mean, stderr, n_samples: v.len() as u64, n_rejected: 0, mesh: 0 }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Empirical `E ∏_ℓ Σ_i v_i^{k_ℓ}` for a moment query in the samples' mode.
pub fn mc_joint_moment(samples: &SampleSet, q: &MomentQuery) -> Result<FunctionalEstimate> {
    q.validate()?;
    if samples.is_empty() {
        return arg("no samples");
    }
    if !close(to_f64(&q.beta), samples.beta()) {
        return arg("beta of the query and of the samples differ");
    }
    // index into each sample for every stage
    let slots: Vec<usize> = match (&q.mode, samples) {
        (MomentMode::Corners { n, rows, variance }, SampleSet::Corners { n: sn, variance: sv, rows: srows, .. }) => {
            if n != sn || !close(to_f64(variance), *sv) {
                return arg("N or variance of the query and of the samples differ");
            }
            rows.iter()
                .map(|r| srows.iter().position(|s| s == r).ok_or(()))
                .collect::<std::result::Result<_, _>>()
                .or_else(|_| arg("a queried row was not stored"))?
        }
        (MomentMode::Dbm { n, times }, SampleSet::Dbm { n: sn, times: st, .. }) => {
            if n != sn {
                return arg("N of the query and of the samples differ");
            }
            times
                .iter()
                .map(|t| st.iter().position(|s| close(*s, to_f64(t))).ok_or(()))
                .collect::<std::result::Result<_, _>>()
                .or_else(|_| arg("a queried time was not stored"))?
        }
        _ => return arg("the query and the samples are in different modes"),
    };
    let values = match samples {
        SampleSet::Corners { values, .. } | SampleSet::Dbm { values, .. } => values,
    };
    let prods: Vec<f64> = values
        .iter()
        .map(|s| slots.iter().zip(&q.powers).map(|(&r, &k)| s[r].iter().map(|v| v.powi(k as i32)).sum::<f64>()).product())
        .collect();
    Ok(estimate(&prods))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMode {
    Corners,
    Dbm,
}

/// Row for corners at `𝛕`: `round(N − 𝛕N^{2/3})`.
pub fn corners_row(n: usize, tau: f64) -> usize {
    (n as f64 - tau * (n as f64).powf(2.0 / 3.0)).round().max(0.0) as usize
}

/// DBM time at `𝛕`: `2N/β + 2𝛕N^{2/3}/β`.
pub fn dbm_time(n: usize, beta: f64, tau: f64) -> f64 {
    2.0 * (n as f64 + tau * (n as f64).powf(2.0 / 3.0)) / beta
}

/// Rescaled particles at one `𝛕`, largest first.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeObservable {
    pub mode: EdgeMode,
    pub tau: f64,
    /// `values[s]` for sample `s`
    pub values: Vec<Vec<f64>>,
}

/// Ratio `v / edge` so that the rescaled particle is `2N^{2/3}(ratio − 1)`.
fn edge_ratio(samples: &SampleSet, stage: usize, tau: f64) -> Result<Box<dyn Fn(f64) -> f64>> {
    let n = samples.n() as f64;
    match samples {
        SampleSet::Corners { beta, variance, rows, .. } => {
            let r = corners_row(samples.n(), tau);
            if rows.get(stage) != Some(&r) {
                return arg(format!("stage {stage} must hold row {r}"));
            }
            let scale = (2.0 * beta * variance * r as f64).sqrt();
            Ok(Box::new(move |v| v / scale))
        }
        SampleSet::Dbm { beta, times, .. } => {
            let t = dbm_time(samples.n(), *beta, tau);
            if !times.get(stage).is_some_and(|s| close(*s, t)) {
                return arg(format!("stage {stage} must hold time {t}"));
            }
            let scale = 2.0 * ((n + tau * n.powf(2.0 / 3.0)) * n).sqrt();
            Ok(Box::new(move |v| v / scale))
        }
    }
}

/// Top `count` rescaled particles at each stage.
pub fn edge_rescale(samples: &SampleSet, taus: &[f64], count: usize) -> Result<Vec<EdgeObservable>> {
    let mode = match samples {
        SampleSet::Corners { .. } => EdgeMode::Corners,
        SampleSet::Dbm { .. } => EdgeMode::Dbm,
    };
    let values = match samples {
        SampleSet::Corners { values, .. } | SampleSet::Dbm { values, .. } => values,
    };
    let s23 = 2.0 * (samples.n() as f64).powf(2.0 / 3.0);
    taus.iter()
        .enumerate()
        .map(|(l, &tau)| {
            let ratio = edge_ratio(samples, l, tau)?;
            if values.iter().any(|s| s[l].len() < count) {
                return arg("fewer particles than requested");
            }
            let v = values.iter().map(|s| s[l][..count].iter().map(|&x| s23 * (ratio(x) - 1.0)).collect()).collect();
            Ok(EdgeObservable { mode, tau, values: v })
        })
        .collect()
}

/// Monte Carlo `E ∏_ℓ ½ Σ_i (r_i^{k_ℓ} + r_i^{k_ℓ+1})` with `r_i = 1 + x_i/(2N^{2/3})`
/// and `k_ℓ = round(𝐤_ℓ N^{2/3})`; it converges to `𝐋_β`.
pub fn laplace_proxy(samples: &SampleSet, kappa: &[f64], taus: &[f64]) -> Result<FunctionalEstimate> {
    if kappa.len() != taus.len() || kappa.is_empty() {
        return arg("kappa and taus must be nonempty and of equal length");
    }
    let scale = (samples.n() as f64).powf(2.0 / 3.0);
    let ks: Vec<i32> = kappa.iter().map(|&k| (k * scale).round() as i32).collect();
    if ks.iter().any(|&k| k <= 0) {
        return arg("some k_ℓ rounds to 0");
    }
    let ratios = taus.iter().enumerate().map(|(l, &t)| edge_ratio(samples, l, t)).collect::<Result<Vec<_>>>()?;
    let values = match samples {
        SampleSet::Corners { values, .. } | SampleSet::Dbm { values, .. } => values,
    };
    let prods: Vec<f64> = values
        .iter()
        .map(|s| {
            (0..ks.len())
                .map(|l| {
                    0.5 * s[l].iter().map(|&v| {
                        let r = ratios[l](v);
                        r.powi(ks[l]) + r.powi(ks[l] + 1)
                    }).sum::<f64>()
                })
                .product()
        })
        .collect();
    Ok(estimate(&prods))
}

/// Mean of the GUE Tracy–Widom law, used only as a sanity beacon.
pub const TRACY_WIDOM_2_MEAN: f64 = -1.771_086_8;

/// `2N^{2/3}(λ_1/√(2βN) − 1)` for GβE with variance 1.
pub fn top_edge_scaled(lambda1: f64, n: usize, beta: f64) -> f64 {
    let n = n as f64;
    2.0 * n.powf(2.0 / 3.0) * (lambda1 / (2.0 * beta * n).sqrt() - 1.0)
}

/// Kolmogorov–Smirnov distance of `data` to a continuous CDF, with the
/// asymptotic p-value.
pub fn ks_test(data: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut v = data.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let lam = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p = if lam < 0.2 {
        1.0
    } else {
        (2.0 * (1..=100).map(|k| (-1f64).powi(k - 1) * (-2.0 * (k * k) as f64 * lam * lam).exp()).sum::<f64>()).clamp(0.0, 1.0)
    };
    (d, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dunkl::moments::{corners_moment, dbm_moment, gbe_second_moment};
    use crate::scalar::{int, ratio};
    use statrs::distribution::{Beta, ContinuousCDF};

    fn within(est: &FunctionalEstimate, exact: f64, k: f64) -> bool {
        (est.mean - exact).abs() <= k * est.stderr
    }

    #[test]
    fn gbe_basics() {
        let s = sample_gbe(1, 2.0, 3.0, 0).unwrap();
        assert_eq!(s.values.len(), 1);
        let ones: Vec<f64> = (0..4000).map(|i| sample_gbe(1, 1.0, 1.0, i).unwrap().values[0]).collect();
        let (_, p) = ks_test(&ones, |x| statrs::distribution::Normal::new(0.0, 1.0).unwrap().cdf(x));
        assert!(p > 1e-3);

        let set = corners_samples(3, 1.5, 1.0, &[3], 60_000, 5).unwrap();
        let m2 = mc_joint_moment(&set, &MomentQuery::corners(3, vec![3], vec![2], ratio(3, 2), int(1))).unwrap();
        assert!(within(&m2, 7.5, 4.0), "{m2:?}");
        assert!((to_f64(&gbe_second_moment(3, &ratio(3, 2), &int(1))) - 7.5).abs() < 1e-12);
        let m3 = mc_joint_moment(&set, &MomentQuery::corners(3, vec![3], vec![3], ratio(3, 2), int(1))).unwrap();
        assert!(within(&m3, 0.0, 4.0));
        assert_eq!(sample_gbe(5, 2.0, 1.0, 7).unwrap().values, sample_gbe(5, 2.0, 1.0, 7).unwrap().values);
    }

    #[test]
    fn sturm_matches_a_known_spectrum() {
        // tridiag(1; 2; 1) of size 4 has eigenvalues 2 + 2cos(kπ/5)
        let v = tridiagonal_top(&[2.0; 4], &[1.0; 3], 4);
        for (k, x) in v.iter().enumerate() {
            let want = 2.0 + 2.0 * ((k + 1) as f64 * std::f64::consts::PI / 5.0).cos();
            assert!((x - want).abs() < 1e-12);
        }
    }

    #[test]
    fn level_down_two_to_one_is_beta_distributed() {
        let lam = [1.3, -0.4];
        for beta in [1.0, 2.0, 3.0] {
            let mut rng = rng_for(11, beta as u64);
            let ys: Vec<f64> = (0..4000).map(|_| corners_level_down(&lam, beta, &mut rng).unwrap()[0]).collect();
            let b = Beta::new(beta / 2.0, beta / 2.0).unwrap();
            let (_, p) = ks_test(&ys, |y| b.cdf((y - lam[1]) / (lam[0] - lam[1])));
            assert!(p > 1e-3, "beta {beta}: p = {p}");
        }
    }

    #[test]
    fn corners_interlace_and_are_consistent() {
        for seed in 0..200 {
            let c = sample_gbe_corners(6, 1.3, 2.0, seed).unwrap();
            for n in 1..6 {
                for i in 0..n {
                    assert!(c.rows[n][i] > c.rows[n - 1][i] && c.rows[n - 1][i] > c.rows[n][i + 1]);
                }
            }
        }
        let set = corners_samples(4, 1.5, 1.0, &[3], 40_000, 2).unwrap();
        let e = mc_joint_moment(&set, &MomentQuery::corners(4, vec![3], vec![2], ratio(3, 2), int(1))).unwrap();
        assert!(within(&e, to_f64(&gbe_second_moment(3, &ratio(3, 2), &int(1))), 4.0));
    }

    #[test]
    fn corners_moments_match_exact() {
        let beta = ratio(3, 2);
        let set = corners_samples(3, 1.5, 1.0, &[3, 2], 100_000, 8).unwrap();
        let q = MomentQuery::corners(3, vec![3], vec![4], beta.clone(), int(1));
        let e = mc_joint_moment(&set, &q).unwrap();
        assert!(within(&e, to_f64(&corners_moment(&q).unwrap()), 4.0), "{e:?}");
        let q = MomentQuery::corners(3, vec![3, 2], vec![2, 2], beta.clone(), int(1));
        let e = mc_joint_moment(&set, &q).unwrap();
        assert!(within(&e, to_f64(&corners_moment(&q).unwrap()), 4.0), "{e:?}");
        let bad = MomentQuery::dbm(3, vec![int(1)], vec![2], beta);
        assert!(mc_joint_moment(&set, &bad).is_err());
    }

    #[test]
    fn dbm_marginals() {
        assert!(simulate_dbm(3, 0.5, 1.0, 0.01, 0).is_err());
        let p = simulate_dbm(3, 2.0, 0.5, 0.01, 1).unwrap();
        assert!(p.states.iter().skip(1).all(|s| s.windows(2).all(|w| w[0] > w[1])));
        let one = dbm_samples(1, 1.0, &[1.0], 0.01, 20_000, 3).unwrap();
        let e = mc_joint_moment(&one, &MomentQuery::dbm(1, vec![int(1)], vec![2], int(1))).unwrap();
        assert!(within(&e, 1.0, 4.0));

        let set = dbm_samples(4, 2.0, &[0.5, 1.0], 1e-3, 4000, 4).unwrap();
        let e = mc_joint_moment(&set, &MomentQuery::dbm(4, vec![int(1)], vec![2], int(2))).unwrap();
        let exact = to_f64(&gbe_second_moment(4, &int(2), &int(1)));
        assert!((e.mean - exact).abs() < 4.0 * e.stderr + 0.02 * exact, "{e:?} vs {exact}");
        let q = MomentQuery::dbm(4, vec![ratio(1, 2), int(1)], vec![1, 1], int(2));
        let e = mc_joint_moment(&set, &q).unwrap();
        let exact = to_f64(&dbm_moment(&q).unwrap());
        assert!((e.mean - exact).abs() < 4.0 * e.stderr + 0.02 * exact.abs().max(1.0), "{e:?} vs {exact}");
    }

    #[test]
    fn edge_observables() {
        let n = 64;
        let beta = 2.0;
        let set = corners_samples(n, beta, 2.0 * n as f64 / beta, &[n], 3000, 6).unwrap();
        let proxy = laplace_proxy(&set, &[1.0], &[0.0]).unwrap();
        let exact = crate::dunkl::moments::scaled_edge_moment(n, &[1.0], &[0.0], &int(2)).unwrap().value;
        assert!(within(&proxy, exact, 4.0), "{proxy:?} vs {exact}");
        let obs = edge_rescale(&set, &[0.0], 2).unwrap();
        assert!(obs[0].values.iter().all(|v| v[0] > v[1]));
        assert!(edge_rescale(&set, &[0.5], 1).is_err());

        let d = dbm_samples(8, 2.0, &[dbm_time(8, 2.0, 0.0)], 2e-3, 1500, 7).unwrap();
        let c = corners_samples(8, 2.0, 8.0, &[8], 1500, 7).unwrap();
        let (a, b) = (laplace_proxy(&d, &[1.0], &[0.0]).unwrap(), laplace_proxy(&c, &[1.0], &[0.0]).unwrap());
        assert!((a.mean - b.mean).abs() < 4.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt() + 0.02 * b.mean);
    }
}
