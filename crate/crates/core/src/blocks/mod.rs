//! Blocks `(𝐩, 𝛖, 𝐇)`: step-function data model, a validator that names every
//! violated condition, the Ξ partition of the mandated points and the integrand
//! `𝐈_{β,𝐤}`.

pub mod lbeta;

use crate::bridges::{area, bessel3_bridge, f0_raw, f_raw, FunctionalEstimate};
use crate::error::{arg, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const TOL: f64 = 1e-9;

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Right-continuous step function; `levels[i]` holds on
/// `[breakpoints[i], breakpoints[i+1])` and the function is 0 before the
/// first breakpoint.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockFunction {
    pub breakpoints: Vec<f64>,
    pub levels: Vec<f64>,
}

impl BlockFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    /// From `(breakpoint, level)` pairs.
    pub fn steps(pairs: &[(f64, f64)]) -> Self {
        BlockFunction { breakpoints: pairs.iter().map(|p| p.0).collect(), levels: pairs.iter().map(|p| p.1).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.levels.iter().all(|&v| v == 0.0)
    }

    pub fn at(&self, t: f64) -> f64 {
        match self.breakpoints.iter().rposition(|&b| b <= t) {
            Some(i) => self.levels[i],
            None => 0.0,
        }
    }

    /// `f(t−)`
    pub fn left(&self, t: f64) -> f64 {
        match self.breakpoints.iter().rposition(|&b| b < t) {
            Some(i) => self.levels[i],
            None => 0.0,
        }
    }

    /// `(position, value before, value after)` for every breakpoint.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.breakpoints.len()).map(move |i| {
            let before = if i == 0 { 0.0 } else { self.levels[i - 1] };
            (self.breakpoints[i], before, self.levels[i])
        })
    }

    /// last breakpoint, where a nonzero block returns to 0
    pub fn support_end(&self) -> Option<f64> {
        self.breakpoints.last().copied()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockProcess {
    /// `𝐤`; `m` is its length
    pub kappa: Vec<f64>,
    /// `𝐩_1, …, 𝐩_{m+𝐮}`
    pub p: Vec<BlockFunction>,
}

impl BlockProcess {
    pub fn m(&self) -> usize {
        self.kappa.len()
    }

    pub fn u(&self) -> usize {
        self.p.len().saturating_sub(self.m())
    }

    /// `𝐐_ℓ`
    pub fn q(&self, l: usize) -> f64 {
        self.kappa[..l].iter().sum()
    }

    pub fn qs(&self) -> Vec<f64> {
        (0..=self.m()).map(|l| self.q(l)).collect()
    }

    pub fn p0(&self, t: f64) -> f64 {
        self.p.iter().map(|f| f.at(t)).sum()
    }

    pub fn p0_left(&self, t: f64) -> f64 {
        self.p.iter().map(|f| f.left(t)).sum()
    }

    /// Interval index `ℓ` (1-based) of a point strictly inside some
    /// `(𝐐_{ℓ−1}, 𝐐_ℓ)`.
    pub fn interval_of(&self, t: f64) -> Option<usize> {
        let qs = self.qs();
        (1..qs.len()).find(|&l| qs[l - 1] < t && t < qs[l])
    }

    /// `𝚫` as `(position, block index j (0-based), interval ℓ (1-based))`, sorted.
    pub fn delta_points(&self) -> Vec<(f64, usize, usize)> {
        let mut out = vec![];
        for (j, f) in self.p.iter().enumerate() {
            for &b in &f.breakpoints {
                if let Some(l) = self.interval_of(b) {
                    out.push((b, j, l));
                }
            }
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out
    }

    pub fn delta(&self) -> usize {
        self.delta_points().len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Blocks {
    pub process: BlockProcess,
    /// `𝛖_1, …, 𝛖_m`
    pub upsilon: Vec<Option<f64>>,
    /// `𝐇` as `(point, value)` pairs
    pub height: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointKind {
    /// `𝐐_ℓ`
    Time(usize),
    /// `𝐐_{ℓ−1} + 𝛖_ℓ`
    Virtual(usize),
    /// discontinuity of `𝐩_j` (0-based `j`)
    Jump(usize),
}

impl Blocks {
    pub fn h(&self, t: f64) -> Option<f64> {
        self.height.iter().find(|p| same(p.0, t)).map(|p| p.1)
    }

    pub fn n_virtual(&self) -> usize {
        self.upsilon.iter().filter(|v| v.is_some()).count()
    }

    /// The domain of `𝐇`, sorted, with what each point is.
    pub fn mandated_points(&self) -> Vec<(f64, PointKind)> {
        let bp = &self.process;
        let mut pts: Vec<(f64, PointKind)> = (0..=bp.m()).map(|l| (bp.q(l), PointKind::Time(l))).collect();
        for (l, v) in self.upsilon.iter().enumerate() {
            if let Some(v) = v {
                pts.push((bp.q(l) + v, PointKind::Virtual(l + 1)));
            }
        }
        for (x, j, _) in bp.delta_points() {
            pts.push((x, PointKind::Jump(j)));
        }
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pts
    }
}

/// One violated condition; `rule` names the condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

/// Every rule name `validate_blocks` can report.
pub const RULES: &[&str] = &[
    "times.positive",
    "block.domain",
    "block.nonnegative",
    "block.vanishing_end",
    "block.connected",
    "block.canonical",
    "process.main_support",
    "process.extra_nonzero",
    "process.left_continuity",
    "process.disjoint",
    "process.order",
    "virtual.position",
    "virtual.empty",
    "height.domain",
    "height.nonnegative",
    "height.boundary",
    "height.virtual",
    "height.domination",
    "height.jump_sign",
    "height.no_virtual_floor",
];

fn block_function_checks(j: usize, f: &BlockFunction, end: f64, out: &mut Vec<Violation>) {
    let mut push = |rule, detail: String| out.push(Violation { rule, detail: format!("p_{}: {detail}", j + 1) });
    if f.breakpoints.len() != f.levels.len() {
        push("block.domain", "breakpoints and levels differ in length".into());
        return;
    }
    if f.breakpoints.windows(2).any(|w| w[0] >= w[1]) || f.breakpoints.iter().any(|&b| !(b > 0.0 && b < end)) {
        push("block.domain", format!("breakpoints must increase inside (0, {end})"));
    }
    if f.levels.iter().any(|&v| !(v >= 0.0)) {
        push("block.nonnegative", "negative level".into());
    }
    if f.levels.last().is_some_and(|&v| v != 0.0) {
        push("block.vanishing_end", "does not return to 0 before the right end".into());
    }
    let nz: Vec<usize> = (0..f.levels.len()).filter(|&i| f.levels[i] > 0.0).collect();
    if let (Some(&a), Some(&b)) = (nz.first(), nz.last()) {
        if b - a + 1 != nz.len() {
            push("block.connected", "support is not an interval".into());
        }
    }
    if f.jumps().any(|(_, before, after)| before == after) {
        push("block.canonical", "breakpoint without a jump".into());
    }
}

/// Lists every violated condition; an empty list means the triple is a member
/// of `𝒦[𝐤]`.
pub fn validate_blocks(b: &Blocks) -> Vec<Violation> {
    let mut out = vec![];
    let bp = &b.process;
    let m = bp.m();
    if m == 0 || bp.kappa.iter().any(|&k| !(k > 0.0)) {
        out.push(Violation { rule: "times.positive", detail: "need m ≥ 1 and every k_ℓ > 0".into() });
        return out;
    }
    if bp.p.len() < m {
        out.push(Violation { rule: "process.main_support", detail: format!("need at least m = {m} block functions") });
        return out;
    }
    let qs = bp.qs();
    let end = qs[m];
    for (j, f) in bp.p.iter().enumerate() {
        block_function_checks(j, f, end, &mut out);
    }
    if !out.is_empty() {
        return out;
    }
    let mut v = |rule: &'static str, detail: String| out.push(Violation { rule, detail });
    for l in 0..m {
        let f = &bp.p[l];
        if f.at(qs[l]) != 0.0 || f.breakpoints.iter().any(|&x| x > qs[l]) {
            v("process.main_support", format!("p_{} is not 0 on [Q_{}, Q_m]", l + 1, l));
        }
    }
    for j in m..bp.p.len() {
        if bp.p[j].is_zero() {
            v("process.extra_nonzero", format!("p_{} vanishes identically", j + 1));
        }
    }
    for (j, f) in bp.p.iter().enumerate() {
        for l in 1..m {
            if l != j && f.breakpoints.iter().any(|&x| x == qs[l]) {
                v("process.left_continuity", format!("p_{} jumps at Q_{l}", j + 1));
            }
        }
    }
    let delta = bp.delta_points();
    for w in delta.windows(2) {
        if w[0].0 == w[1].0 {
            v("process.disjoint", format!("p_{} and p_{} jump together at {}", w[0].1 + 1, w[1].1 + 1, w[0].0));
        }
    }
    let firsts: Vec<f64> = (m..bp.p.len()).map(|j| bp.p[j].breakpoints.first().copied().unwrap_or(f64::INFINITY)).collect();
    if firsts.windows(2).any(|w| w[0] >= w[1]) {
        v("process.order", "extra blocks are not ordered by their first jump".into());
    }
    if b.upsilon.len() != m {
        v("virtual.position", format!("need {m} virtual entries"));
        return out;
    }
    let first_in = |l: usize| -> f64 {
        delta.iter().filter(|d| d.2 == l).map(|d| d.0).fold(qs[l], f64::min)
    };
    for l in 1..=m {
        if let Some(u) = b.upsilon[l - 1] {
            if !(u > 0.0) || qs[l - 1] + u >= first_in(l) {
                v("virtual.position", format!("Q_{} + υ_{l} must lie before every jump of interval {l} and Q_{l}", l - 1));
            }
            if l == 1 || bp.p[l - 1].left(qs[l - 1]) == 0.0 {
                v("virtual.empty", format!("υ_{l} must be empty"));
            }
        }
    }
    // heights
    let pts = b.mandated_points();
    let mut domain_ok = pts.len() == b.height.len();
    let mut sorted_h = b.height.clone();
    sorted_h.sort_by(|a, c| a.0.partial_cmp(&c.0).unwrap());
    if domain_ok {
        domain_ok = pts.iter().zip(&sorted_h).all(|(p, h)| same(p.0, h.0));
    }
    if !domain_ok {
        v("height.domain", "H must be defined exactly on Δ, the Q_ℓ and the virtual points".into());
        return out;
    }
    let h = |t: f64| b.h(t).unwrap();
    for &(x, hv) in &b.height {
        if !(hv >= 0.0) {
            v("height.nonnegative", format!("H({x}) = {hv}"));
        }
    }
    if h(0.0).abs() > TOL {
        v("height.boundary", "H(0) must be 0".into());
    }
    for l in 1..=m {
        if (h(qs[l]) - bp.p0_left(qs[l])).abs() > TOL {
            v("height.boundary", format!("H(Q_{l}) must equal p⁰(Q_{l}−)"));
        }
        if let Some(u) = b.upsilon[l - 1] {
            if (h(qs[l - 1] + u) - bp.p0_left(qs[l - 1])).abs() > TOL {
                v("height.virtual", format!("H(Q_{} + υ_{l}) must equal p⁰(Q_{}−)", l - 1, l - 1));
            }
        }
    }
    for &(x, j, _) in &delta {
        let hx = h(x);
        if hx < bp.p0(x).max(bp.p0_left(x)) - TOL {
            v("height.domination", format!("H({x}) lies below p⁰"));
        }
        let jump = bp.p[j].at(x) - bp.p[j].left(x);
        let gap = hx - bp.p0_left(x) - bp.p[j].at(x);
        if (jump > 0.0 && gap < -TOL) || (jump < 0.0 && gap > TOL) {
            v("height.jump_sign", format!("at {x} the jump of p_{} and H − p⁰(x−) − p_j disagree in sign", j + 1));
        }
    }
    for l in 1..=m {
        if b.upsilon[l - 1].is_none() && h(first_in(l)) < h(qs[l - 1]) - TOL {
            v("height.no_virtual_floor", format!("H drops below H(Q_{}) at the first point of interval {l}", l - 1));
        }
    }
    out
}

/// `𝒦_ε` membership: `p⁰` constant on each `(𝐐_{ℓ−1}, 𝐐_{ℓ−1}+ε)` and every
/// nonempty `𝛖_ℓ > ε`.
pub fn in_k_epsilon(b: &Blocks, eps: f64) -> bool {
    let bp = &b.process;
    let qs = bp.qs();
    let quiet = bp.delta_points().iter().all(|&(x, _, l)| x >= qs[l - 1] + eps);
    quiet && b.upsilon.iter().all(|u| u.map_or(true, |u| u > eps))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum XiClass {
    Xi1 = 1,
    Xi2 = 2,
    Xi3 = 3,
    Xi4 = 4,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XiInterval {
    pub x: f64,
    pub y: f64,
    pub class: XiClass,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XiPartition {
    pub intervals: Vec<XiInterval>,
}

impl XiPartition {
    pub fn count(&self, c: XiClass) -> usize {
        self.intervals.iter().filter(|i| i.class == c).count()
    }

    pub fn classes(&self) -> Vec<u8> {
        self.intervals.iter().map(|i| i.class as u8).collect()
    }
}

/// Classifies each pair of adjacent mandated points: the left end either is
/// one of `𝐐_0..𝐐_{m−1}` or not, and the right end either pins `𝐇` to the
/// floor (`𝐐_ℓ`, a virtual point, the end of an extra block) or sits at a
/// free jump.
pub fn xi_partition(b: &Blocks) -> XiPartition {
    let bp = &b.process;
    let m = bp.m();
    let pts = b.mandated_points();
    let extra_ends: Vec<f64> = (m..bp.p.len()).filter_map(|j| bp.p[j].support_end()).collect();
    let is_end = |p: &(f64, PointKind)| match p.1 {
        PointKind::Time(l) => l >= 1,
        PointKind::Virtual(_) => true,
        PointKind::Jump(_) => extra_ends.contains(&p.0),
    };
    let intervals = pts
        .windows(2)
        .map(|w| {
            let start = matches!(w[0].1, PointKind::Time(l) if l < m);
            let class = match (start, is_end(&w[1])) {
                (true, true) => XiClass::Xi1,
                (true, false) => XiClass::Xi2,
                (false, true) => XiClass::Xi3,
                (false, false) => XiClass::Xi4,
            };
            XiInterval { x: w[0].0, y: w[1].0, class }
        })
        .collect();
    XiPartition { intervals }
}

/// The integrand split into its deterministic factor and the Bessel-3 bridges
/// whose exponentiated areas multiply it: `(duration, start, end)` per bridge.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub factor: f64,
    pub bridges: Vec<(f64, f64, f64)>,
}

fn f00_raw(x: f64) -> f64 {
    2.0 / (2.0 * PI * x.powi(3)).sqrt()
}

/// `2^{−𝛅−#{𝛖≠∅}} ∏ 𝐈_β[x,y]` with every Brownian expectation left open.
pub fn prepare(b: &Blocks, xi: &XiPartition, inv_beta: f64) -> Prepared {
    let bp = &b.process;
    let h = |t: f64| b.h(t).unwrap_or(f64::NAN);
    let mut factor = 0.5f64.powi((bp.delta() + b.n_virtual()) as i32);
    let mut bridges = vec![];
    for iv in &xi.intervals {
        let (x, y) = (iv.x, iv.y);
        let tau = y - x;
        let sign = if bp.p0(x) < bp.p0_left(x) { -1.0 } else { 1.0 };
        let lift = (inv_beta * tau * (h(x) - bp.p0(x))).exp();
        let (k, a, c) = match iv.class {
            XiClass::Xi1 => (lift * f00_raw(tau), 0.0, 0.0),
            XiClass::Xi2 => {
                let d = h(y) - h(x);
                (lift * f0_raw(tau, d.max(0.0)), 0.0, d)
            }
            XiClass::Xi3 => {
                let d = h(x) - h(y);
                (sign * f0_raw(tau, d.max(0.0)), 0.0, d)
            }
            XiClass::Xi4 => {
                let (s, e) = (h(x) - bp.p0(x), h(y) - bp.p0_left(y));
                (sign * f_raw(tau, s.max(0.0), e.max(0.0)), s, e)
            }
        };
        factor *= k;
        bridges.push((tau, a.max(0.0), c.max(0.0)));
    }
    Prepared { factor, bridges }
}

impl Prepared {
    /// One draw of `factor · ∏ exp(β⁻¹ ∫ B)`.
    pub fn sample<R: Rng>(&self, inv_beta: f64, mesh: usize, rng: &mut R, buf: &mut Vec<f64>) -> f64 {
        if self.factor == 0.0 || inv_beta == 0.0 {
            return self.factor;
        }
        let mut total = 0.0;
        for &(tau, a, c) in &self.bridges {
            let n = ((mesh as f64 * tau).ceil() as usize).max(2);
            let dt = tau / n as f64;
            bessel3_bridge(rng, a, c, n, dt, buf);
            total += area(buf, dt);
        }
        self.factor * (inv_beta * total).exp()
    }
}

pub const DEFAULT_MESH: usize = 64;

/// `𝐈_{β,𝐤}` at one blocks triple, with its Brownian expectations estimated
/// from `mc_budget` draws. β = ∞ needs no draws.
pub fn integrand(b: &Blocks, beta: f64, mc_budget: u64, seed: u64) -> Result<FunctionalEstimate> {
    let bad = validate_blocks(b);
    if !bad.is_empty() {
        return arg(format!("invalid blocks: {}", bad.iter().map(|v| v.rule).collect::<Vec<_>>().join(", ")));
    }
    if !(beta > 0.0) {
        return arg("beta must be positive");
    }
    let ib = if beta.is_infinite() { 0.0 } else { 1.0 / beta };
    let prep = prepare(b, &xi_partition(b), ib);
    if ib == 0.0 || prep.factor == 0.0 {
        return Ok(FunctionalEstimate { mean: prep.factor, stderr: 0.0, n_samples: 1, n_rejected: 0, mesh: 0 });
    }
    if mc_budget < 2 {
        return arg("mc_budget must be at least 2");
    }
    const CHUNK: u64 = 2048;
    let chunks = mc_budget.div_ceil(CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut buf = vec![];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..CHUNK.min(mc_budget - c * CHUNK) {
                let v = prep.sample(ib, DEFAULT_MESH, &mut rng, &mut buf);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let n = mc_budget as f64;
    let mean = s / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(FunctionalEstimate { mean, stderr: (var / n).sqrt(), n_samples: mc_budget, n_rejected: 0, mesh: DEFAULT_MESH })
}

/// Hand-made blocks used by tests, the command line and the self-test.
pub mod examples {
    use super::*;

    /// `m = 1`, nothing but `𝐩_1 ≡ 0`.
    pub fn trivial(k: f64) -> Blocks {
        Blocks {
            process: BlockProcess { kappa: vec![k], p: vec![BlockFunction::zero()] },
            upsilon: vec![None],
            height: vec![(0.0, 0.0), (k, 0.0)],
        }
    }

    /// Three levels `𝐤 = (9, 8, 11)`, one extra block, `𝛅 = 5` and two
    /// virtual blocks.
    pub fn three_level() -> Blocks {
        Blocks {
            process: BlockProcess {
                kappa: vec![9.0, 8.0, 11.0],
                p: vec![
                    BlockFunction::zero(),
                    BlockFunction::steps(&[(6.0, 2.0), (9.0, 0.0)]),
                    BlockFunction::steps(&[(3.0, 1.5), (12.0, 1.0), (17.0, 0.0)]),
                    BlockFunction::steps(&[(15.0, 1.7), (24.0, 0.0)]),
                ],
            },
            upsilon: vec![None, Some(2.0), Some(1.5)],
            height: vec![
                (0.0, 0.0),
                (3.0, 2.7),
                (6.0, 5.6),
                (9.0, 3.5),
                (11.0, 3.5),
                (12.0, 1.9),
                (15.0, 4.1),
                (17.0, 2.7),
                (18.5, 2.7),
                (24.0, 1.7),
                (28.0, 0.0),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;
    use crate::bridges::{f00_kernel, i00_mc, McOptions};

    fn rules(b: &Blocks) -> Vec<&'static str> {
        validate_blocks(b).iter().map(|v| v.rule).collect()
    }

    #[test]
    fn trivial_blocks() {
        let b = trivial(1.0);
        assert!(validate_blocks(&b).is_empty());
        let xi = xi_partition(&b);
        assert_eq!(xi.classes(), vec![1]);
        let e = integrand(&b, f64::INFINITY, 1, 0).unwrap();
        assert_eq!(e.mean, f00_kernel(1.0).unwrap());
        let e = integrand(&b, 2.0, 20_000, 3).unwrap();
        let r = i00_mc(1.0, 2.0, &McOptions { budget: 20_000, seed: 4, mesh: 64, refine: false }).unwrap().coarse;
        assert!((e.mean - r.mean).abs() < 4.0 * (e.stderr.powi(2) + r.stderr.powi(2)).sqrt());
    }

    #[test]
    fn three_level_example() {
        let b = three_level();
        assert!(validate_blocks(&b).is_empty(), "{:?}", validate_blocks(&b));
        assert_eq!(b.process.delta(), 5);
        assert_eq!(b.process.u(), 1);
        let xi = xi_partition(&b);
        assert_eq!(xi.classes(), vec![2, 4, 3, 1, 4, 4, 3, 1, 3, 3]);
        assert_eq!(xi.count(XiClass::Xi1) + xi.count(XiClass::Xi2), b.process.m());
        assert_eq!(xi.intervals.len(), b.process.delta() + b.process.m() + b.n_virtual());
        assert!(in_k_epsilon(&b, 1.0));
        assert!(!in_k_epsilon(&b, 3.5));
    }

    #[test]
    fn violations_are_named() {
        let mut b = trivial(1.0);
        b.upsilon = vec![Some(0.5)];
        assert!(rules(&b).contains(&"virtual.empty"));

        let mut b = three_level();
        b.height[2].1 = 2.0; // below p⁰ at the jump of p_2
        let r = rules(&b);
        assert!(r.contains(&"height.domination") && r.contains(&"height.jump_sign"), "{r:?}");

        let mut b = three_level();
        b.upsilon[1] = Some(3.5); // lands after the jump at 12
        let r = rules(&b);
        assert!(r.contains(&"virtual.position"), "{r:?}");

        let mut b = three_level();
        b.process.p[3] = BlockFunction::steps(&[(12.0, 1.7), (24.0, 0.0)]);
        assert!(rules(&b).contains(&"process.disjoint"));

        let mut b = three_level();
        b.process.p[1] = BlockFunction::steps(&[(6.0, 2.0), (10.0, 0.0)]);
        assert!(rules(&b).contains(&"process.main_support"));

        let mut b = three_level();
        b.process.p[3] = BlockFunction::steps(&[(15.0, 1.7), (17.0, 1.0), (24.0, 0.0)]);
        assert!(rules(&b).contains(&"process.left_continuity"));

        let mut b = three_level();
        b.process.p.push(BlockFunction::zero());
        assert!(rules(&b).contains(&"process.extra_nonzero"));

        let mut b = three_level();
        b.process.p.push(BlockFunction::steps(&[(2.0, 1.0), (4.0, 0.0)]));
        assert!(rules(&b).contains(&"process.order"));

        let mut b = three_level();
        b.process.p[3] = BlockFunction::steps(&[(15.0, 1.7), (20.0, 0.0), (22.0, 1.0), (24.0, 0.0)]);
        assert!(rules(&b).contains(&"block.connected"));

        let mut b = three_level();
        b.height[7].1 = 3.0;
        assert_eq!(rules(&b), vec!["height.boundary"]);

        let mut b = three_level();
        b.height[4].1 = 3.0;
        assert_eq!(rules(&b), vec!["height.virtual"]);

        let mut b = three_level();
        b.height.pop();
        assert_eq!(rules(&b), vec!["height.domain"]);

        // without υ_2 the first point after Q_1 is the jump at 12 with H = 1.9 < H(Q_1)
        let mut b = three_level();
        b.upsilon[1] = None;
        b.height.retain(|p| p.0 != 11.0);
        assert_eq!(rules(&b), vec!["height.no_virtual_floor"]);

        for r in RULES {
            assert!(r.contains('.'));
        }
    }

    #[test]
    fn sign_and_prefactors() {
        // m = 1 with one extra block; the last segment starts where p⁰ drops
        let b = Blocks {
            process: BlockProcess {
                kappa: vec![4.0],
                p: vec![BlockFunction::zero(), BlockFunction::steps(&[(1.0, 1.0), (2.0, 0.0)])],
            },
            upsilon: vec![None],
            height: vec![(0.0, 0.0), (1.0, 1.5), (2.0, 1.0), (4.0, 0.0)],
        };
        assert!(validate_blocks(&b).is_empty(), "{:?}", validate_blocks(&b));
        let xi = xi_partition(&b);
        assert_eq!(xi.classes(), vec![2, 3, 3]);
        let p = prepare(&b, &xi, 0.0);
        let want = -0.25 * f0_raw(1.0, 1.5) * f0_raw(1.0, 0.5) * f0_raw(2.0, 1.0);
        assert!((p.factor - want).abs() < 1e-15);
        let e = integrand(&b, f64::INFINITY, 1, 0).unwrap();
        assert_eq!((e.mean, e.stderr), (p.factor, 0.0));
        let e = integrand(&b, 1.0, 4000, 1).unwrap();
        assert!(e.mean < 0.0);

        let big = three_level();
        assert!(prepare(&big, &xi_partition(&big), 0.0).factor > 0.0);
    }
}
