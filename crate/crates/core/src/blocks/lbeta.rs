//! `𝐋_β(𝐤, 𝛕)` by stratified importance sampling over `𝒦_ε[𝐤]`, truncated at
//! `𝛅 ≤ delta_max`, and the ε → 0 extrapolation.
//!
//! A stratum fixes `𝐮`, every `𝛅_{j,ℓ}` and which virtual blocks are present.
//! Inside a stratum one draw goes as follows.
//!
//! * The points of each interval `(𝐐_{ℓ−1}+ε, 𝐐_ℓ)` get Dirichlet(½,…,½)
//!   gaps; the virtual point, when present, is the leftmost one and the jump
//!   labels are a uniform arrangement of the stratum's multiset.
//! * A sweep from `𝐐_m` leftwards fixes `𝐇 − 𝐩⁰` at each point from the
//!   kernel of the segment to its right: Rayleigh when that segment ends on
//!   the floor, the Bessel-3 transition density otherwise. Block levels left
//!   of a jump are uniform on the interval the height rules allow; a main
//!   block's last level is uniform under the height at the next point.
//! * The weight is the integrand times the `𝛕` factor divided by the
//!   proposal density.

use super::{prepare, validate_blocks, xi_partition, BlockFunction, BlockProcess, Blocks, PointKind};
use crate::bridges::{f_raw, FunctionalEstimate};
use crate::error::{arg, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LQuery {
    pub kappa: Vec<f64>,
    pub tau: Vec<f64>,
    pub beta: f64,
    pub epsilon: f64,
    pub delta_max: usize,
    /// draws per stratum
    pub mc_budget: u64,
    pub seed: u64,
    /// bridge steps per unit time
    pub mesh: usize,
}

impl LQuery {
    pub fn new(kappa: Vec<f64>, tau: Vec<f64>, beta: f64, epsilon: f64) -> Self {
        LQuery { kappa, tau, beta, epsilon, delta_max: 2, mc_budget: 20_000, seed: 0, mesh: 32 }
    }

    fn check(&self) -> Result<()> {
        let m = self.kappa.len();
        if m == 0 || self.kappa.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
            return arg("kappa needs at least one positive entry");
        }
        if self.tau.len() != m {
            return arg("tau must have one entry per kappa");
        }
        if self.tau.windows(2).any(|w| w[0] > w[1]) {
            return arg("tau must be nondecreasing");
        }
        if !(self.beta > 0.0) {
            return arg("beta must be positive");
        }
        if !(self.epsilon > 0.0) || self.kappa.iter().all(|&k| k <= self.epsilon) {
            return arg("epsilon must be positive and below some k_ℓ");
        }
        if self.delta_max > 3 {
            return arg("delta_max above 3 is not supported");
        }
        if self.mc_budget < 100 {
            return arg("mc_budget must be at least 100 per stratum");
        }
        if self.mesh < 4 {
            return arg("mesh must be at least 4");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stratum {
    pub u: usize,
    /// `delta_pattern[j][ℓ]` jumps of block `j` in interval `ℓ` (both 0-based)
    pub delta_pattern: Vec<Vec<usize>>,
    pub virtual_mask: Vec<bool>,
}

impl Stratum {
    pub fn delta(&self) -> usize {
        self.delta_pattern.iter().flatten().sum()
    }

    pub fn n_virtual(&self) -> usize {
        self.virtual_mask.iter().filter(|&&v| v).count()
    }

    /// Number of Lebesgue coordinates: positions, levels, virtual offsets and
    /// free heights.
    pub fn dimension(&self) -> usize {
        3 * self.delta() - 2 * self.u + self.n_virtual()
    }
}

fn compositions(slots: usize, max_total: usize) -> Vec<Vec<usize>> {
    if slots == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for first in 0..=max_total {
        for mut rest in compositions(slots - 1, max_total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every stratum with `𝛅 ≤ delta_max`.
pub fn strata(m: usize, delta_max: usize) -> Vec<Stratum> {
    let mut out = vec![];
    for u in 0..=delta_max / 2 {
        // main block j may jump only in intervals before its own drop at 𝐐_j
        let mut slots: Vec<(usize, usize)> = (0..m).flat_map(|j| (0..j).map(move |l| (j, l))).collect();
        slots.extend((m..m + u).flat_map(|j| (0..m).map(move |l| (j, l))));
        for c in compositions(slots.len(), delta_max) {
            let mut pattern = vec![vec![0; m]; m + u];
            for (&(j, l), &n) in slots.iter().zip(&c) {
                pattern[j][l] = n;
            }
            if pattern[m..].iter().any(|row| row.iter().sum::<usize>() < 2) {
                continue;
            }
            let eligible: Vec<usize> = (1..m).filter(|&j| pattern[j].iter().sum::<usize>() > 0).collect();
            for bits in 0..1usize << eligible.len() {
                let mut mask = vec![false; m];
                for (i, &j) in eligible.iter().enumerate() {
                    mask[j] = bits >> i & 1 == 1;
                }
                out.push(Stratum { u, delta_pattern: pattern.clone(), virtual_mask: mask });
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StratumEstimate {
    pub stratum: Stratum,
    pub delta: usize,
    pub dimension: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
    /// draws landing on blocks with a nonzero weight
    pub nonzero: u64,
    /// draws the validator rejected; nonzero means a sampler bug
    pub invalid: u64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LEstimate {
    pub query: LQuery,
    pub total: f64,
    pub stderr: f64,
    pub strata: Vec<StratumEstimate>,
}

impl LEstimate {
    pub fn as_functional(&self) -> FunctionalEstimate {
        FunctionalEstimate {
            mean: self.total,
            stderr: self.stderr,
            n_samples: self.strata.iter().map(|s| s.n).sum(),
            n_rejected: self.strata.iter().map(|s| s.n - s.nonzero).sum(),
            mesh: self.query.mesh,
        }
    }
}

enum Draw {
    Zero,
    Invalid,
    Value(f64),
}

struct Sampler<'a> {
    q: &'a LQuery,
    qs: Vec<f64>,
    inv_beta: f64,
    half: Gamma<f64>,
}

fn bes3_density(h: f64, g: f64, t: f64) -> f64 {
    h / g * f_raw(t, g, h)
}

impl Sampler<'_> {
    fn new(q: &LQuery) -> Sampler<'_> {
        let mut qs = vec![0.0];
        for k in &q.kappa {
            qs.push(qs.last().unwrap() + k);
        }
        let inv_beta = if q.beta.is_infinite() { 0.0 } else { 1.0 / q.beta };
        Sampler { q, qs, inv_beta, half: Gamma::new(0.5, 1.0).unwrap() }
    }

    /// Height above the floor at the left end of a segment of length `t`,
    /// drawn from the segment's own kernel; returns `(h, ln density)`.
    fn height<R: Rng>(&self, rng: &mut R, t: f64, ends_on_floor: bool, g: f64) -> Option<(f64, f64)> {
        if ends_on_floor {
            let u: f64 = 1.0 - rng.gen::<f64>();
            let h = (-2.0 * t * u.ln()).sqrt();
            (h > 0.0).then(|| (h, (h / t).ln() - h * h / (2.0 * t)))
        } else {
            if !(g > 0.0) {
                return None;
            }
            let s = t.sqrt();
            let z: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            let h = ((g + s * z[0]).powi(2) + (s * z[1]).powi(2) + (s * z[2]).powi(2)).sqrt();
            let d = bes3_density(h, g, t);
            (d > 0.0).then(|| (h, d.ln()))
        }
    }

    /// One blocks triple of the stratum with `ln` of its proposal density and
    /// the `𝛕` exponent; `None` when the draw carries zero weight.
    fn build<R: Rng>(&self, st: &Stratum, rng: &mut R) -> Option<(Blocks, f64, f64)> {
        let (qs, eps) = (&self.qs, self.q.epsilon);
        let m = qs.len() - 1;
        let nb = m + st.u;
        let mut ln_q = 0.0;
        let mut pts: Vec<(f64, PointKind)> = (0..=m).map(|l| (qs[l], PointKind::Time(l))).collect();
        let mut upsilon = vec![None; m];
        let mut jumps_of: Vec<Vec<f64>> = vec![vec![]; nb];
        for l in 0..m {
            let mut labels: Vec<usize> = (0..nb).flat_map(|j| std::iter::repeat(j).take(st.delta_pattern[j][l])).collect();
            let virt = st.virtual_mask[l];
            let n = labels.len() + virt as usize;
            if n == 0 {
                continue;
            }
            let len = qs[l + 1] - qs[l] - eps;
            if len <= 0.0 {
                return None;
            }
            let g: Vec<f64> = (0..=n).map(|_| self.half.sample(rng)).collect();
            let s: f64 = g.iter().sum();
            if g.iter().any(|&v| !(v > 0.0)) {
                return None;
            }
            let a = (n + 1) as f64 / 2.0;
            ln_q += ln_gamma(a) - a * PI.ln() - 0.5 * g.iter().map(|v| (v / s).ln()).sum::<f64>() - n as f64 * len.ln();
            labels.shuffle(rng);
            let mut ln_multi = ln_gamma(labels.len() as f64 + 1.0);
            for j in 0..nb {
                ln_multi -= ln_gamma(st.delta_pattern[j][l] as f64 + 1.0);
            }
            ln_q -= ln_multi;
            let mut x = qs[l] + eps;
            for (i, gi) in g[..n].iter().enumerate() {
                x += len * gi / s;
                if virt && i == 0 {
                    upsilon[l] = Some(x - qs[l]);
                    pts.push((x, PointKind::Virtual(l + 1)));
                } else {
                    let j = labels[i - virt as usize];
                    jumps_of[j].push(x);
                    pts.push((x, PointKind::Jump(j)));
                }
            }
        }
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for j in 0..nb {
            jumps_of[j].sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        let firsts: Vec<f64> = jumps_of[m..].iter().map(|v| v[0]).collect();
        if firsts.windows(2).any(|w| w[0] >= w[1]) {
            return None;
        }
        let is_end = |k: usize| match pts[k].1 {
            PointKind::Time(l) => l >= 1,
            PointKind::Virtual(_) => true,
            PointKind::Jump(j) => j >= m && jumps_of[j].last() == Some(&pts[k].0),
        };

        let np = pts.len();
        let mut hval = vec![0.0; np];
        let mut level = vec![0.0; nb];
        let mut after: Vec<Vec<f64>> = jumps_of.iter().map(|v| vec![0.0; v.len()]).collect();
        let mut pending = vec![0.0; m];
        for k in (0..np - 1).rev() {
            let (x, kind) = pts[k];
            let t = pts[k + 1].0 - x;
            let p0x: f64 = level.iter().sum();
            let end_y = is_end(k + 1);
            let g = hval[k + 1] - p0x;
            match kind {
                PointKind::Jump(j) => {
                    let Some((h, lq)) = self.height(rng, t, end_y, g) else { return None };
                    ln_q += lq;
                    hval[k] = p0x + h;
                    let idx = jumps_of[j].iter().position(|&p| p == x).unwrap();
                    let v_r = level[j];
                    let v_l = if j >= m && idx + 1 == jumps_of[j].len() {
                        h
                    } else if idx == 0 {
                        0.0
                    } else {
                        let lo = h.min(v_r);
                        if !(lo > 0.0) {
                            return None;
                        }
                        ln_q -= (2.0 * lo).ln();
                        let w = rng.gen::<f64>() * 2.0 * lo;
                        if w < lo {
                            w
                        } else {
                            h.max(v_r) + w - lo
                        }
                    };
                    after[j][idx] = v_r;
                    level[j] = v_l;
                }
                PointKind::Virtual(l) => {
                    let Some((h, lq)) = self.height(rng, t, end_y, g) else { return None };
                    ln_q += lq;
                    hval[k] = p0x + h;
                    pending[l - 1] = h;
                }
                PointKind::Time(0) => {}
                PointKind::Time(l) => {
                    let c = if jumps_of[l].is_empty() {
                        0.0
                    } else if st.virtual_mask[l] {
                        pending[l]
                    } else if end_y || !(g > 0.0) {
                        return None;
                    } else {
                        ln_q -= g.ln();
                        rng.gen::<f64>() * g
                    };
                    hval[k] = p0x + c;
                    level[l] = c;
                }
            }
        }

        let p = (0..nb)
            .map(|j| {
                let mut pairs: Vec<(f64, f64)> = jumps_of[j].iter().copied().zip(after[j].iter().copied()).collect();
                if j < m && !pairs.is_empty() {
                    pairs.push((qs[j], 0.0));
                }
                BlockFunction::steps(&pairs)
            })
            .collect();
        let blocks = Blocks {
            process: BlockProcess { kappa: self.q.kappa.clone(), p },
            upsilon,
            height: pts.iter().zip(&hval).map(|(p, &h)| (p.0, h)).collect(),
        };
        let tilt: f64 = (1..m).map(|l| (self.q.tau[l - 1] - self.q.tau[l]) * blocks.h(qs[l]).unwrap() / 2.0).sum();
        Some((blocks, ln_q, tilt))
    }

    fn draw<R: Rng>(&self, st: &Stratum, rng: &mut R, buf: &mut Vec<f64>) -> Draw {
        let Some((blocks, ln_q, tilt)) = self.build(st, rng) else { return Draw::Zero };
        if !validate_blocks(&blocks).is_empty() {
            return Draw::Invalid;
        }
        let prep = prepare(&blocks, &xi_partition(&blocks), self.inv_beta);
        if prep.factor == 0.0 {
            return Draw::Zero;
        }
        let v = prep.sample(self.inv_beta, self.q.mesh, rng, buf) * (tilt - ln_q).exp();
        if v.is_finite() {
            Draw::Value(v)
        } else {
            Draw::Invalid
        }
    }
}

/// One blocks triple from a stratum's proposal, or `None` when the draw has
/// zero weight.
pub fn sample_blocks(q: &LQuery, st: &Stratum, seed: u64) -> Result<Option<Blocks>> {
    q.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Sampler::new(q).build(st, &mut rng).map(|b| b.0))
}

const CHUNK: u64 = 1024;

/// `𝐋_β` restricted to `𝒦_ε` and to strata with `𝛅 ≤ delta_max`.
pub fn l_beta_truncated(q: &LQuery) -> Result<LEstimate> {
    q.check()?;
    let s = Sampler::new(q);
    let all = strata(q.kappa.len(), q.delta_max);
    let chunks = q.mc_budget.div_ceil(CHUNK);
    let jobs: Vec<(usize, u64)> = (0..all.len()).flat_map(|i| (0..chunks).map(move |c| (i, c))).collect();
    let parts: Vec<(usize, [f64; 2], u64, u64)> = jobs
        .par_iter()
        .map(|&(i, c)| {
            let mut rng = ChaCha8Rng::seed_from_u64(q.seed);
            rng.set_stream(((i as u64) << 32) | c);
            let mut buf = vec![];
            let (mut sum, mut nonzero, mut invalid) = ([0.0; 2], 0, 0);
            for _ in 0..CHUNK.min(q.mc_budget - c * CHUNK) {
                match s.draw(&all[i], &mut rng, &mut buf) {
                    Draw::Zero => {}
                    Draw::Invalid => invalid += 1,
                    Draw::Value(v) => {
                        nonzero += 1;
                        sum[0] += v;
                        sum[1] += v * v;
                    }
                }
            }
            (i, sum, nonzero, invalid)
        })
        .collect();
    let n = q.mc_budget as f64;
    let mut table = vec![];
    for (i, st) in all.into_iter().enumerate() {
        let (mut s1, mut s2, mut nz, mut inv) = (0.0, 0.0, 0, 0);
        for p in parts.iter().filter(|p| p.0 == i) {
            s1 += p.1[0];
            s2 += p.1[1];
            nz += p.2;
            inv += p.3;
        }
        let mean = s1 / n;
        let se = (((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0) / n).sqrt();
        let flagged = inv > 0 || (nz > 0 && nz < 50) || (mean != 0.0 && se > 0.2 * mean.abs());
        table.push(StratumEstimate {
            delta: st.delta(),
            dimension: st.dimension(),
            stratum: st,
            estimate: mean,
            stderr: se,
            n: q.mc_budget,
            nonzero: nz,
            invalid: inv,
            flagged,
        });
    }
    let total = table.iter().map(|s| s.estimate).sum();
    let stderr = table.iter().map(|s| s.stderr * s.stderr).sum::<f64>().sqrt();
    Ok(LEstimate { query: q.clone(), total, stderr, strata: table })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Extrapolation {
    pub value: f64,
    pub stderr: f64,
    /// coefficient of `√ε`
    pub slope: f64,
    pub monotone: bool,
}

/// Fits `a + b√ε` by weighted least squares to `(ε, value, stderr)` triples
/// and returns `a`. The uncertainty is inflated by the residual scatter. A
/// non-monotone sequence returns the smallest-ε value with its uncertainty
/// widened to cover the spread.
pub fn epsilon_extrapolate(points: &[(f64, f64, f64)]) -> Result<Extrapolation> {
    if points.len() < 2 {
        return arg("need estimates at two or more epsilon values");
    }
    if points.iter().any(|p| !(p.0 > 0.0) || !p.1.is_finite() || !(p.2 >= 0.0)) {
        return arg("epsilon must be positive, values finite, stderrs nonnegative");
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let diffs: Vec<f64> = pts.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let monotone = diffs.iter().all(|&d| d >= 0.0) || diffs.iter().all(|&d| d <= 0.0);
    if !monotone {
        let last = pts.last().unwrap();
        let lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        return Ok(Extrapolation { value: last.1, stderr: last.2.max(hi - lo), slope: 0.0, monotone });
    }
    let weighted = pts.iter().all(|p| p.2 > 0.0);
    let w: Vec<f64> = pts.iter().map(|p| if weighted { p.2.powi(-2) } else { 1.0 }).collect();
    let s: Vec<f64> = pts.iter().map(|p| p.0.sqrt()).collect();
    let (mut sw, mut sws, mut swss, mut swy, mut swsy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..pts.len() {
        sw += w[i];
        sws += w[i] * s[i];
        swss += w[i] * s[i] * s[i];
        swy += w[i] * pts[i].1;
        swsy += w[i] * s[i] * pts[i].1;
    }
    let det = sw * swss - sws * sws;
    if !(det > 0.0) {
        return arg("epsilon values must differ");
    }
    let a = (swss * swy - sws * swsy) / det;
    let b = (sw * swsy - sws * swy) / det;
    let dof = pts.len() as f64 - 2.0;
    let chi2: f64 = (0..pts.len()).map(|i| w[i] * (pts[i].1 - a - b * s[i]).powi(2)).sum();
    let var_a = swss / det;
    let stderr = if weighted {
        (var_a * if dof > 0.0 { (chi2 / dof).max(1.0) } else { 1.0 }).sqrt()
    } else if dof > 0.0 {
        (var_a * chi2 / dof).sqrt()
    } else {
        0.0
    };
    Ok(Extrapolation { value: a, stderr, slope: b, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::in_k_epsilon;
    use crate::bridges::f00_kernel;

    #[test]
    fn strata_counts() {
        let s = strata(1, 2);
        assert_eq!(s.len(), 2); // empty and one extra block with two jumps
        assert!(s.iter().all(|x| x.virtual_mask == vec![false]));
        let s = strata(2, 1);
        // main block 2 may jump once in interval 1, with or without a virtual block
        assert_eq!(s.len(), 3);
        let s = strata(3, 3);
        assert!(s.iter().all(|x| x.delta() <= 3 && x.u <= 1));
        assert!(s.iter().any(|x| x.n_virtual() == 2));
    }

    #[test]
    fn empty_stratum_is_the_excursion_kernel() {
        let mut q = LQuery::new(vec![1.3], vec![0.0], f64::INFINITY, 0.2);
        q.delta_max = 0;
        q.mc_budget = 100;
        let r = l_beta_truncated(&q).unwrap();
        assert_eq!(r.strata.len(), 1);
        assert!((r.total - f00_kernel(1.3).unwrap()).abs() < 1e-14);
        assert_eq!(r.stderr, 0.0);
    }

    #[test]
    fn sampled_blocks_are_valid() {
        for (kappa, dm) in [(vec![1.0], 2), (vec![1.0, 0.8], 2), (vec![0.7, 0.6, 0.9], 3)] {
            let m = kappa.len();
            let mut q = LQuery::new(kappa, vec![0.0; m], 2.0, 0.1);
            q.delta_max = dm;
            q.mc_budget = 300;
            q.mesh = 8;
            let r = l_beta_truncated(&q).unwrap();
            for s in &r.strata {
                assert_eq!(s.invalid, 0, "{:?}", s.stratum);
            }
            for s in strata(m, dm) {
                for seed in 0..20 {
                    if let Some(b) = sample_blocks(&q, &s, seed).unwrap() {
                        assert!(validate_blocks(&b).is_empty());
                        assert!(in_k_epsilon(&b, q.epsilon));
                    }
                }
            }
        }
    }

    #[test]
    fn tau_shift_invariance_and_budget_stability() {
        let mut q = LQuery::new(vec![1.0], vec![0.0], 2.0, 0.2);
        q.mc_budget = 4000;
        q.mesh = 16;
        let a = l_beta_truncated(&q).unwrap();
        q.tau = vec![3.5];
        let b = l_beta_truncated(&q).unwrap();
        assert_eq!(a.total, b.total);
        q.mc_budget = 8000;
        q.seed = 9;
        let c = l_beta_truncated(&q).unwrap();
        assert!((a.total - c.total).abs() < 2.0 * (a.stderr.powi(2) + c.stderr.powi(2)).sqrt() + 1e-12);
        assert!(a.strata[0].estimate > 0.0);
    }

    #[test]
    fn two_levels_use_the_tau_tilt() {
        let mut q = LQuery::new(vec![0.8, 0.8], vec![0.0, 0.0], f64::INFINITY, 0.2);
        q.delta_max = 1;
        q.mc_budget = 2000;
        let flat = l_beta_truncated(&q).unwrap();
        q.tau = vec![-1.0, 0.0];
        let tilted = l_beta_truncated(&q).unwrap();
        // with no jumps H(Q_1) = 0, so only strata with a jump feel the tilt
        assert_eq!(flat.strata[0].estimate, tilted.strata[0].estimate);
        assert!(tilted.total != flat.total);
    }

    #[test]
    fn one_extra_block_matches_quadrature() {
        // m = 1, k = 1, β = ∞: −¼∫ F₀(x₁; v+h)F₀(x₂−x₁; h)F₀(1−x₂; v) over ε < x₁ < x₂ < 1,
        // v, h > 0, from a 150-point Gauss–Legendre product rule
        for (eps, want) in [(0.4, -0.156_617_5), (0.2, -0.214_405_4), (0.1, -0.236_989_0)] {
            let mut q = LQuery::new(vec![1.0], vec![0.0], f64::INFINITY, eps);
            q.mc_budget = 20_000;
            let r = l_beta_truncated(&q).unwrap();
            let s = &r.strata[1];
            assert_eq!((s.stratum.u, s.delta, s.dimension), (1, 2, 4));
            assert!((s.estimate - want).abs() < 4.0 * s.stderr, "{eps}: {} ± {}", s.estimate, s.stderr);
        }
    }

    #[test]
    fn extrapolation() {
        let c = epsilon_extrapolate(&[(0.4, 2.0, 0.1), (0.2, 2.0, 0.1), (0.1, 2.0, 0.1)]).unwrap();
        assert!((c.value - 2.0).abs() < 1e-12);
        let f = |e: f64| 1.5 - 0.7 * e.sqrt();
        let e = epsilon_extrapolate(&[(0.4, f(0.4), 0.0), (0.1, f(0.1), 0.0)]).unwrap();
        assert!((e.value - 1.5).abs() < 1e-12 && (e.slope + 0.7).abs() < 1e-12);
        let n = epsilon_extrapolate(&[(0.4, 1.0, 0.01), (0.2, 1.2, 0.01), (0.1, 1.1, 0.01)]).unwrap();
        assert!(!n.monotone && n.value == 1.1 && n.stderr >= 0.2 - 1e-12);
        assert!(epsilon_extrapolate(&[(0.4, 1.0, 0.0)]).is_err());
    }
}
