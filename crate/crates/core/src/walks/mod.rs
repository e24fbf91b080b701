//! Walks: the degree trajectories that index the terms of an expanded
//! product `(𝔇̂_{i_m}^{N_m})^{k_m} ⋯ (𝔇̂_{i_1}^{N_1})^{k_1}`, with their weights
//! and jump data.

pub mod discrete;

use crate::dunkl::raw::{constant, constant_term, RawDunkl};
use crate::dunkl::{corners_moment, dbm_moment, MomentQuery};
use crate::error::{arg, resource, Result};
use crate::scalar::{powi, Rational};
use num::{BigInt, One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Which operator product a walk belongs to. Indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkShape {
    pub n: usize,
    pub marked: Vec<usize>,
    pub powers: Vec<u32>,
    pub rows: Vec<usize>,
}

impl WalkShape {
    pub fn new(n: usize, marked: Vec<usize>, powers: Vec<u32>, rows: Vec<usize>) -> Result<Self> {
        let m = powers.len();
        if m == 0 || marked.len() != m || rows.len() != m {
            return arg("marked, powers and rows must be nonempty and of equal length");
        }
        if powers.iter().any(|&k| k == 0) {
            return arg("powers must be positive");
        }
        let mut prev = n;
        for &r in &rows {
            if r == 0 || r > prev {
                return arg(format!("rows must satisfy N ≥ N_1 ≥ … ≥ N_m ≥ 1, got N={n}, rows={rows:?}"));
            }
            prev = r;
        }
        for (l, (&i, &r)) in marked.iter().zip(&rows).enumerate() {
            if i == 0 || i > r {
                return arg(format!("marked index i_{} = {i} outside ⟦1, {r}⟧", l + 1));
            }
        }
        Ok(Self { n, marked, powers, rows })
    }

    /// Same-size shape with every row equal to `n`.
    pub fn full(n: usize, marked: Vec<usize>, powers: Vec<u32>) -> Result<Self> {
        let rows = vec![n; powers.len()];
        Self::new(n, marked, powers, rows)
    }

    pub fn m(&self) -> usize {
        self.powers.len()
    }

    /// `Q_l = k_1 + … + k_l`
    pub fn q(&self, l: usize) -> usize {
        self.powers[..l].iter().map(|&k| k as usize).sum()
    }

    pub fn total(&self) -> usize {
        self.q(self.m())
    }

    /// Stage `ℓ ∈ 1..=m` containing the step `t ∈ 1..=Q_m`.
    pub fn stage_of(&self, t: usize) -> usize {
        let mut acc = 0;
        for (l, &k) in self.powers.iter().enumerate() {
            acc += k as usize;
            if t <= acc {
                return l + 1;
            }
        }
        self.m()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Step {
    /// `r_i` up by one (case 1)
    Up,
    /// `r_i` down by one (case 2)
    Down,
    /// another variable `j` moves to `to` (cases 3(a) and 3(b))
    Jump { j: usize, to: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Walk {
    pub shape: WalkShape,
    /// `r_j` on `⟦0, Q_m⟧` for each `j` that is not identically zero
    pub traj: BTreeMap<usize, Vec<u32>>,
}

impl Walk {
    /// Drops identically-zero trajectories and checks the walk rules.
    pub fn new(shape: WalkShape, traj: BTreeMap<usize, Vec<u32>>) -> Result<Self> {
        let traj = traj.into_iter().filter(|(_, v)| v.iter().any(|&x| x > 0)).collect();
        let w = Self { shape, traj };
        if let Err(e) = validate_walk(&w) {
            return arg(format!("not a walk: {e}"));
        }
        Ok(w)
    }

    pub fn r(&self, j: usize, t: usize) -> u32 {
        self.traj.get(&j).map_or(0, |v| v[t])
    }

    pub fn height(&self, t: usize) -> u32 {
        self.traj.values().map(|v| v[t]).sum()
    }

    pub fn heights(&self) -> Vec<u32> {
        (0..=self.shape.total()).map(|t| self.height(t)).collect()
    }

    fn changed(&self, t: usize) -> Vec<usize> {
        self.traj.iter().filter(|(_, v)| v[t] != v[t - 1]).map(|(&j, _)| j).collect()
    }

    /// Step descriptors `O(t)` for `t = 1..=Q_m`.
    pub fn steps(&self) -> Vec<Step> {
        (1..=self.shape.total())
            .map(|t| {
                let i = self.shape.marked[self.shape.stage_of(t) - 1];
                match self.changed(t).into_iter().find(|&j| j != i) {
                    Some(j) => Step::Jump { j, to: self.r(j, t) },
                    None if self.r(i, t) > self.r(i, t - 1) => Step::Up,
                    None => Step::Down,
                }
            })
            .collect()
    }
}

/// Checks every condition of the walk definition; the error names the first
/// violated one.
pub fn validate_walk(w: &Walk) -> std::result::Result<(), String> {
    let s = &w.shape;
    let q = s.total();
    for (&j, v) in &w.traj {
        if j == 0 || j > s.n {
            return Err(format!("variable index {j} outside ⟦1, {}⟧", s.n));
        }
        if v.len() != q + 1 {
            return Err(format!("r_{j} has {} values, expected {}", v.len(), q + 1));
        }
    }
    if w.height(0) != 0 || w.height(q) != 0 {
        return Err("height must start and end at 0".into());
    }
    for t in 1..=q {
        let l = s.stage_of(t);
        let i = s.marked[l - 1];
        let (h0, h1) = (w.height(t - 1) as i64, w.height(t) as i64);
        if (h1 - h0).abs() != 1 {
            return Err(format!("t={t}: height moves by {}", h1 - h0));
        }
        let others: Vec<usize> = w.changed(t).into_iter().filter(|&j| j != i).collect();
        match others.as_slice() {
            [] => {}
            [j] => {
                let j = *j;
                if h1 != h0 - 1 {
                    return Err(format!("t={t}: jump of r_{j} must lower the height"));
                }
                if j > s.rows[l - 1] {
                    return Err(format!("t={t}: jumping variable {j} exceeds N_{l} = {}", s.rows[l - 1]));
                }
                let (a, b) = (w.r(j, t - 1) as i64, w.r(j, t) as i64);
                let ri = w.r(i, t - 1) as i64;
                // r_j(t) − r_j(t−1) and r_j(t) − r_i(t−1) + 1/2 have opposite signs
                let ok = if b > a { 2 * (b - ri) + 1 < 0 } else { 2 * (b - ri) + 1 > 0 };
                if !ok {
                    return Err(format!("t={t}: jump of r_{j} from {a} to {b} violates the sign rule (r_i = {ri})"));
                }
            }
            _ => return Err(format!("t={t}: more than one non-marked variable moves")),
        }
    }
    Ok(())
}

/// Enumerates walks in lexicographic order of their step sequences, calling
/// `f` on each. Fails with a resource error once more than `budget` walks
/// have been produced.
pub fn for_each_walk(shape: &WalkShape, budget: usize, mut f: impl FnMut(&Walk)) -> Result<usize> {
    let q = shape.total();
    let mut r = vec![0u32; shape.n + 1];
    let mut hist: Vec<Vec<u32>> = vec![r.clone()];
    let mut count = 0usize;
    dfs(shape, q, &mut r, &mut hist, &mut count, budget, &mut f)?;
    Ok(count)
}

fn dfs(
    shape: &WalkShape,
    q: usize,
    r: &mut Vec<u32>,
    hist: &mut Vec<Vec<u32>>,
    count: &mut usize,
    budget: usize,
    f: &mut dyn FnMut(&Walk),
) -> Result<()> {
    let t = hist.len(); // next step index
    let h: u32 = r.iter().sum();
    if t > q {
        if h == 0 {
            *count += 1;
            if *count > budget {
                return resource(format!("walk budget {budget} exceeded after {} walks", *count - 1));
            }
            let mut traj = BTreeMap::new();
            for j in 1..=shape.n {
                if hist.iter().any(|v| v[j] > 0) {
                    traj.insert(j, hist.iter().map(|v| v[j]).collect());
                }
            }
            f(&Walk { shape: shape.clone(), traj });
        }
        return Ok(());
    }
    let l = shape.stage_of(t);
    let nl = shape.rows[l - 1];
    if t == shape.q(l - 1) + 1 && r[nl + 1..].iter().any(|&x| x > 0) {
        return Ok(()); // variables beyond N_ℓ are frozen from here on
    }
    let i = shape.marked[l - 1];
    let left = (q - t) as u32;
    let mut go = |r: &mut Vec<u32>, hist: &mut Vec<Vec<u32>>, count: &mut usize| -> Result<()> {
        if r.iter().sum::<u32>() <= left {
            hist.push(r.clone());
            dfs(shape, q, r, hist, count, budget, f)?;
            hist.pop();
        }
        Ok(())
    };
    // +
    r[i] += 1;
    go(r, hist, count)?;
    r[i] -= 1;
    // −
    if r[i] > 0 {
        r[i] -= 1;
        go(r, hist, count)?;
        r[i] += 1;
    }
    // jumps, by variable then target value
    let ri = r[i];
    for j in 1..=nl {
        if j == i {
            continue;
        }
        let rj = r[j];
        let targets: Vec<u32> = (ri.min(rj)..rj).chain(rj + 1..ri).collect();
        for v in targets {
            // r_i absorbs the change so that the height drops by one
            let new_ri = ri as i64 - (v as i64 - rj as i64) - 1;
            if new_ri < 0 {
                continue;
            }
            r[j] = v;
            r[i] = new_ri as u32;
            go(r, hist, count)?;
            r[j] = rj;
            r[i] = ri;
        }
    }
    Ok(())
}

pub fn enumerate_walks(shape: &WalkShape, budget: usize) -> Result<Vec<Walk>> {
    let mut out = Vec::new();
    for_each_walk(shape, budget, |w| out.push(w.clone()))?;
    Ok(out)
}

/// Variance parameter of the `+` steps.
#[derive(Clone, Debug, PartialEq)]
pub enum TauMode {
    /// `τ = 2N/β` in every stage (edge scaling of the corners process)
    Edge,
    /// one fixed `τ` in every stage
    Fixed(Rational),
    /// stage `ℓ` uses `τ_ℓ` (Dyson Brownian motion, all rows equal `N`)
    Dbm(Vec<Rational>),
}

impl TauMode {
    fn stage_tau(&self, shape: &WalkShape, beta: &Rational, l: usize) -> Rational {
        match self {
            TauMode::Edge => Rational::from_integer(BigInt::from(2 * shape.n)) / beta,
            TauMode::Fixed(t) => t.clone(),
            TauMode::Dbm(v) => v[l - 1].clone(),
        }
    }

    fn check(&self, shape: &WalkShape) -> Result<()> {
        if let TauMode::Dbm(v) = self {
            if v.len() != shape.m() {
                return arg("one τ per stage required");
            }
            if shape.rows.iter().any(|&r| r != shape.n) {
                return arg("Dyson Brownian motion walks need every row equal to N");
            }
        }
        Ok(())
    }
}

fn nat(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// `P(Q_m)`: the product of the per-step factors of the expansion cases.
pub fn walk_weight(w: &Walk, beta: &Rational, mode: &TauMode) -> Result<Rational> {
    let s = &w.shape;
    mode.check(s)?;
    let half_beta = beta / nat(2);
    let mut wt = Rational::one();
    for (t, step) in (1..).zip(w.steps()) {
        let l = s.stage_of(t);
        let i = s.marked[l - 1];
        match step {
            Step::Up => wt *= mode.stage_tau(s, beta, l),
            Step::Down => {
                let d = w.r(i, t - 1);
                let nl = s.rows[l - 1];
                // R = #{j ≤ N_ℓ : r_j(t−1) < d}; unstored variables are 0 < d
                let at_least = w.traj.iter().filter(|(&j, v)| j <= nl && v[t - 1] >= d).count();
                wt *= nat(d) + &half_beta * nat((nl - at_least) as u64);
            }
            Step::Jump { j, to } => {
                if to > w.r(j, t - 1) {
                    wt *= &half_beta;
                } else {
                    wt *= -&half_beta;
                }
            }
        }
    }
    Ok(wt)
}

/// Counts used by the closed-form weights.
struct StageCounts {
    ups: i64,
    downs: i64,
    jumps: i64,
    down_jumps: i64,
}

fn stage_counts(w: &Walk) -> Vec<StageCounts> {
    let s = &w.shape;
    let mut out: Vec<StageCounts> = (0..s.m()).map(|_| StageCounts { ups: 0, downs: 0, jumps: 0, down_jumps: 0 }).collect();
    for (t, step) in (1..).zip(w.steps()) {
        let c = &mut out[s.stage_of(t) - 1];
        match step {
            Step::Up => c.ups += 1,
            Step::Down => c.downs += 1,
            Step::Jump { j, to } => {
                c.downs += 1;
                c.jumps += 1;
                if to < w.r(j, t - 1) {
                    c.down_jumps += 1;
                }
            }
        }
    }
    out
}

/// The weight through the rescaled closed form: the edge formula with
/// `τ = 2N/β` and row-dependent powers, or the Dyson Brownian motion formula
/// with stage times. Per-stage powers of `√N` are collected into one integer
/// power, which keeps the value rational.
pub fn walk_weight_closed(w: &Walk, beta: &Rational, mode: &TauMode) -> Result<Rational> {
    let s = &w.shape;
    mode.check(s)?;
    let counts = stage_counts(w);
    let q = s.total() as i64;
    let n = nat(s.n as u64);
    let (dbm, taus): (bool, Vec<Rational>) = match mode {
        TauMode::Edge => (false, vec![]),
        TauMode::Dbm(v) => (true, v.clone()),
        TauMode::Fixed(t) if s.rows.iter().all(|&r| r == s.n) => (true, vec![t.clone(); s.m()]),
        TauMode::Fixed(_) => return arg("closed form needs τ = 2N/β or all rows equal to N"),
    };
    let down_jumps: i64 = counts.iter().map(|c| c.down_jumps).sum();
    let mut wt = if down_jumps % 2 == 1 { -Rational::one() } else { Rational::one() };
    let delta: i64 = counts.iter().map(|c| c.jumps).sum();
    if dbm {
        wt *= powi(&n, q / 2 - delta);
        for (c, tau) in counts.iter().zip(&taus) {
            wt *= powi(&(beta * tau / nat(2)), c.ups);
        }
    } else {
        wt *= powi(&n, q / 2);
        for (c, &nl) in counts.iter().zip(&s.rows) {
            wt *= powi(&nat(nl as u64), c.downs - c.jumps);
        }
    }
    for (t, step) in (1..).zip(w.steps()) {
        if step != Step::Down {
            continue;
        }
        let l = s.stage_of(t);
        let d = w.r(s.marked[l - 1], t - 1);
        let nl = if dbm { s.n } else { s.rows[l - 1] };
        let nl_r = nat(nl as u64);
        let c = w.traj.values().filter(|v| v[t - 1] >= d).count();
        wt *= Rational::one() + nat(2 * d) / (beta * &nl_r) - nat(c as u64) / &nl_r;
    }
    Ok(wt)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpData {
    /// `Δ`, sorted
    pub delta_set: Vec<usize>,
    /// `Δ_{j,ℓ}` keyed by `(j, ℓ)`, only nonempty sets
    pub delta_jl: BTreeMap<(usize, usize), Vec<usize>>,
    pub delta: usize,
}

impl JumpData {
    pub fn delta_jl_count(&self, j: usize, l: usize) -> usize {
        self.delta_jl.get(&(j, l)).map_or(0, |v| v.len())
    }

    /// `δ_j`
    pub fn delta_j(&self, j: usize) -> usize {
        self.delta_jl.iter().filter(|((jj, _), _)| *jj == j).map(|(_, v)| v.len()).sum()
    }
}

pub fn jump_data(w: &Walk) -> JumpData {
    let s = &w.shape;
    let mut delta_jl: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut set = BTreeSet::new();
    for (t, step) in (1..).zip(w.steps()) {
        if let Step::Jump { j, .. } = step {
            delta_jl.entry((j, s.stage_of(t))).or_default().push(t);
            set.insert(t);
        }
    }
    JumpData { delta: set.len(), delta_set: set.into_iter().collect(), delta_jl }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionCheck {
    pub walk_sum: Rational,
    pub operator_value: Rational,
    pub equal: bool,
    pub walks: usize,
}

/// Sum of walk weights against the degree-zero part of the operator product
/// applied to 1, computed by the literal polynomial engine.
pub fn expansion_check(shape: &WalkShape, beta: &Rational, mode: &TauMode, budget: usize) -> Result<ExpansionCheck> {
    mode.check(shape)?;
    let mut walk_sum = Rational::zero();
    let mut err = None;
    let walks = for_each_walk(shape, budget, |w| match walk_weight(w, beta, mode) {
        Ok(x) => walk_sum += x,
        Err(e) => err = Some(e),
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let mut p = constant(shape.n, Rational::one());
    let q = shape.total();
    for l in 1..=shape.m() {
        let op = RawDunkl::new(shape.rows[l - 1], mode.stage_tau(shape, beta, l), beta.clone());
        let after = (q - shape.q(l)) as u32;
        p = op.apply_pow_pruned(&p, shape.marked[l - 1] - 1, shape.powers[l - 1], after);
    }
    let operator_value = constant_term(&p);
    Ok(ExpansionCheck { equal: walk_sum == operator_value, walk_sum, operator_value, walks })
}

/// Both sides of the full expansion identity: the walk sums over all marked
/// index tuples, and the nested power-sum moment from the profile engine.
pub fn full_expansion_check(n: usize, rows: &[usize], powers: &[u32], beta: &Rational, mode: &TauMode, budget: usize) -> Result<(Rational, Rational)> {
    let m = powers.len();
    let probe = WalkShape::new(n, vec![1; m], powers.to_vec(), rows.to_vec())?;
    mode.check(&probe)?;
    let mut total = Rational::zero();
    let mut idx = vec![1usize; m];
    loop {
        let shape = WalkShape::new(n, idx.clone(), powers.to_vec(), rows.to_vec())?;
        for w in enumerate_walks(&shape, budget)? {
            total += walk_weight(&w, beta, mode)?;
        }
        // odometer over ∏ ⟦1, N_ℓ⟧
        let mut l = 0;
        loop {
            if l == m {
                let exact = match mode {
                    TauMode::Dbm(taus) => dbm_moment(&MomentQuery::dbm(n, taus.clone(), powers.to_vec(), beta.clone()))?,
                    _ => {
                        let tau = mode.stage_tau(&probe, beta, 1);
                        corners_moment(&MomentQuery::corners(n, rows.to_vec(), powers.to_vec(), beta.clone(), tau))?
                    }
                };
                return Ok((total, exact));
            }
            idx[l] += 1;
            if idx[l] <= rows[l] {
                break;
            }
            idx[l] = 1;
            l += 1;
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    fn seg(parts: &[(u32, usize)]) -> Vec<u32> {
        parts.iter().flat_map(|&(v, c)| std::iter::repeat(v).take(c)).collect()
    }

    /// The three-stage example walk with one auxiliary variable (index 9).
    pub fn three_stage_walk(n: usize) -> Walk {
        let shape = WalkShape::new(n, vec![1, 2, 3], vec![17, 17, 22], vec![n; 3]).unwrap();
        let mut r1 = vec![0, 1, 2, 3, 4, 0, 1, 2, 3, 4, 5, 6, 3, 2, 3, 2, 1, 0];
        r1.resize(57, 0);
        let mut r2 = seg(&[(0, 12), (2, 6)]);
        r2.extend([3, 2, 3, 2, 1, 2, 2, 3, 4, 5, 6, 7, 2, 3, 2, 1, 0]);
        r2.resize(57, 0);
        let mut r3 = seg(&[(0, 5), (3, 19), (2, 11)]);
        r3.extend([3, 4, 3, 2, 1, 0, 1, 2, 1, 0, 1, 0, 3, 4, 3, 2, 1, 2, 3, 2, 1, 0]);
        let r9 = seg(&[(0, 30), (4, 17), (0, 10)]);
        let traj = BTreeMap::from([(1, r1), (2, r2), (3, r3), (9, r9)]);
        Walk::new(shape, traj).unwrap()
    }

    /// One stage of length 14 with a plateau in a second variable.
    pub fn plateau_walk(n: usize) -> Walk {
        let shape = WalkShape::new(n, vec![1], vec![14], vec![n]).unwrap();
        let r1 = vec![0, 1, 2, 3, 4, 1, 2, 3, 2, 1, 0, 1, 2, 1, 0];
        let r2 = vec![0, 0, 0, 0, 0, 2, 2, 2, 2, 2, 2, 0, 0, 0, 0];
        Walk::new(shape, BTreeMap::from([(1, r1), (2, r2)])).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::dunkl::raw::Poly;
    use crate::scalar::{int, ratio};
    use std::collections::HashMap;

    const BUDGET: usize = 1_000_000;

    fn one_stage(n: usize, k: u32) -> WalkShape {
        WalkShape::new(n, vec![1], vec![k], vec![n]).unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_walks(&one_stage(1, 2), BUDGET).unwrap().len(), 1);
        assert_eq!(enumerate_walks(&one_stage(1, 4), BUDGET).unwrap().len(), 2);
        let n2 = enumerate_walks(&one_stage(2, 4), BUDGET).unwrap();
        assert!(n2.len() > 2);
        // regression value
        assert_eq!(n2.len(), 3);
        assert!(n2.iter().all(|w| validate_walk(w).is_ok()));
    }

    #[test]
    fn budget_is_a_resource_error() {
        let e = enumerate_walks(&one_stage(3, 8), 5).unwrap_err();
        assert!(matches!(e, crate::error::LabError::Resource(_)));
    }

    #[test]
    fn enumeration_is_deterministic_and_lexicographic() {
        let shape = WalkShape::new(3, vec![2, 1], vec![3, 3], vec![3, 2]).unwrap();
        let a = enumerate_walks(&shape, BUDGET).unwrap();
        let b = enumerate_walks(&shape, BUDGET).unwrap();
        assert_eq!(a, b);
        let steps: Vec<Vec<Step>> = a.iter().map(|w| w.steps()).collect();
        assert!(steps.windows(2).all(|p| p[0] < p[1]));
    }

    /// Number of (operation, monomial) sequences of the raw expansion that
    /// end at a constant: each input monomial contributes one term per
    /// distinct output monomial.
    fn raw_term_count(shape: &WalkShape) -> u64 {
        let mut cur: HashMap<Vec<u32>, u64> = HashMap::from([(vec![0; shape.n], 1)]);
        for l in 1..=shape.m() {
            let op = RawDunkl::new(shape.rows[l - 1], int(1), int(2));
            for _ in 0..shape.powers[l - 1] {
                let mut next: HashMap<Vec<u32>, u64> = HashMap::new();
                for (m, c) in &cur {
                    let mut img = Poly::new();
                    op.apply_monomial(m, shape.marked[l - 1] - 1, &mut img, &Rational::one());
                    for mm in img.keys() {
                        *next.entry(mm.clone()).or_default() += c;
                    }
                }
                cur = next;
            }
        }
        cur.get(&vec![0; shape.n]).copied().unwrap_or(0)
    }

    #[test]
    fn walks_biject_with_expansion_terms() {
        for n in 1..=3 {
            for k in 1..=6 {
                let s = one_stage(n, k);
                assert_eq!(enumerate_walks(&s, BUDGET).unwrap().len() as u64, raw_term_count(&s), "n={n} k={k}");
            }
        }
        let s = WalkShape::new(3, vec![1, 2], vec![3, 3], vec![3, 2]).unwrap();
        assert_eq!(enumerate_walks(&s, BUDGET).unwrap().len() as u64, raw_term_count(&s));
    }

    #[test]
    fn expansion_examples() {
        let b = ratio(7, 3);
        let s = one_stage(1, 2);
        assert!(expansion_check(&s, &b, &TauMode::Fixed(int(1)), BUDGET).unwrap().equal);
        let s = WalkShape::new(2, vec![1, 2], vec![2, 2], vec![2, 2]).unwrap();
        assert!(expansion_check(&s, &b, &TauMode::Edge, BUDGET).unwrap().equal);
        let s = one_stage(3, 4);
        let c = expansion_check(&s, &int(2), &TauMode::Edge, BUDGET).unwrap();
        assert!(c.equal);
        assert!(!c.walk_sum.is_zero());
    }

    #[test]
    fn full_identity_matches_corners_and_dbm() {
        let b = ratio(7, 3);
        let (walks, exact) = full_expansion_check(3, &[3, 2], &[2, 2], &b, &TauMode::Edge, BUDGET).unwrap();
        assert_eq!(walks, exact);
        let (walks, exact) = full_expansion_check(2, &[2, 2], &[1, 3], &b, &TauMode::Dbm(vec![ratio(1, 2), int(3)]), BUDGET).unwrap();
        assert_eq!(walks, exact);
    }

    #[test]
    fn two_step_weight_by_hand() {
        // up then down with N = 1, β = 2: τ · (1 + (β/2)·0) = 2N/β = 1
        let w = &enumerate_walks(&one_stage(1, 2), BUDGET).unwrap()[0];
        assert_eq!(walk_weight(w, &int(2), &TauMode::Edge).unwrap(), int(1));
        assert_eq!(walk_weight_closed(w, &int(2), &TauMode::Edge).unwrap(), int(1));
    }

    #[test]
    fn closed_forms_agree_with_direct_product() {
        for beta in [int(1), ratio(7, 3)] {
            let s = WalkShape::new(3, vec![2, 1], vec![4, 4], vec![3, 2]).unwrap();
            for w in enumerate_walks(&s, BUDGET).unwrap() {
                assert_eq!(walk_weight(&w, &beta, &TauMode::Edge).unwrap(), walk_weight_closed(&w, &beta, &TauMode::Edge).unwrap());
            }
            let s = WalkShape::full(3, vec![3, 1], vec![3, 5]).unwrap();
            let mode = TauMode::Dbm(vec![ratio(1, 3), ratio(5, 2)]);
            for w in enumerate_walks(&s, BUDGET).unwrap() {
                assert_eq!(walk_weight(&w, &beta, &mode).unwrap(), walk_weight_closed(&w, &beta, &mode).unwrap());
            }
        }
    }

    #[test]
    fn sign_counts_down_jumps() {
        let s = WalkShape::new(3, vec![1, 2], vec![4, 4], vec![3, 3]).unwrap();
        for w in enumerate_walks(&s, BUDGET).unwrap() {
            let downs = w
                .steps()
                .iter()
                .enumerate()
                .filter(|(t, st)| matches!(st, Step::Jump { j, to } if *to < w.r(*j, *t)))
                .count();
            let wt = walk_weight(&w, &int(2), &TauMode::Edge).unwrap();
            assert_eq!(wt < Rational::zero(), downs % 2 == 1);
        }
    }

    #[test]
    fn large_beta_factor_is_finite() {
        // the down-step factor tends to 1 − |{…}|/N_ℓ
        let w = &enumerate_walks(&one_stage(2, 2), BUDGET).unwrap()[0];
        let big = int(10).pow(30);
        let v = walk_weight_closed(w, &big, &TauMode::Edge).unwrap();
        let lim = int(4) * (int(1) - ratio(1, 2));
        assert!((crate::scalar::to_f64(&(v - lim))).abs() < 1e-20);
    }

    #[test]
    fn jump_counts() {
        let dyck = &enumerate_walks(&one_stage(1, 6), BUDGET).unwrap()[0];
        assert_eq!(jump_data(dyck).delta, 0);
        let w = plateau_walk(2);
        let jd = jump_data(&w);
        assert_eq!(jd.delta, 2);
        assert_eq!(jd.delta_jl_count(2, 1), 2);
        assert_eq!(jd.delta_set, vec![5, 11]);
    }

    #[test]
    fn three_stage_walk_jumps() {
        let w = three_stage_walk(9);
        let jd = jump_data(&w);
        assert_eq!(jd.delta_set, vec![5, 12, 24, 30, 47]);
        assert_eq!(jd.delta, 5);
        assert_eq!(jd.delta_j(9), 2);
        let h = w.heights();
        for (t, v) in [(0, 0), (4, 4), (5, 3), (11, 9), (12, 8), (17, 5), (22, 4), (29, 9), (30, 8), (39, 5), (47, 3), (56, 0)] {
            assert_eq!(h[t], v, "t={t}");
        }
        assert!(Walk::new(WalkShape::new(9, vec![1, 2, 3], vec![17, 17, 22], vec![9, 9, 8]).unwrap(), w.traj.clone()).is_err());
    }
}
