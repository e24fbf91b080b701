//! Dunkl operators on symmetry-reduced polynomial states.
//!
//! A profile keeps the degrees of a few marked variables explicitly and the
//! degrees of every other active variable as a multiset. The stored
//! coefficient is the *orbit mass*: the sum of the coefficients of all
//! monomials obtained by permuting the anonymous variables. With this
//! convention a transition out of an anonymous class of multiplicity `c` just
//! multiplies the mass by `c`, and merging orbits is plain addition.

use crate::error::{arg, resource, Result};
use crate::scalar::Rational;
use num::{One, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Profile {
    pub marked: Vec<u32>,
    /// nonzero degrees of the anonymous variables, sorted decreasingly
    pub anon: Vec<u32>,
}

impl Profile {
    pub fn empty() -> Self {
        Self { marked: Vec::new(), anon: Vec::new() }
    }

    pub fn total_degree(&self) -> u32 {
        self.marked.iter().sum::<u32>() + self.anon.iter().sum::<u32>()
    }

    /// Number of anonymous variables of degree zero among `n` active ones.
    pub fn zero_count(&self, n: usize) -> usize {
        n - self.marked.len() - self.anon.len()
    }

    fn replace_anon(&self, from: u32, to: u32) -> Vec<u32> {
        let mut v = self.anon.clone();
        if from > 0 {
            let pos = v.iter().position(|&e| e == from).expect("degree present");
            v.remove(pos);
        }
        if to > 0 {
            v.push(to);
        }
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

/// Linear combination of profiles.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProfileSum {
    pub terms: BTreeMap<Profile, Rational>,
}

impl ProfileSum {
    pub fn one() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Profile::empty(), Rational::one());
        Self { terms }
    }

    pub fn single(p: Profile, c: Rational) -> Self {
        let mut s = Self::default();
        s.add(p, c);
        s
    }

    pub fn add(&mut self, p: Profile, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(p) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the constant profile with no marked variables.
    pub fn degree_zero(&self) -> Rational {
        self.terms
            .iter()
            .find(|(p, _)| p.total_degree() == 0)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    fn prune(&mut self, max_degree: u32) {
        self.terms.retain(|p, _| p.total_degree() <= max_degree);
    }
}

/// The data of a single `𝔇̂^{N,τ}` family: `n` active variables.
#[derive(Clone, Debug)]
pub struct OperatorSpec {
    pub n: usize,
    pub tau: Rational,
    pub beta: Rational,
    pub k: u32,
}

impl OperatorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return arg("operator needs N ≥ 1");
        }
        if self.beta <= Rational::zero() {
            return arg("beta must be positive");
        }
        if self.tau < Rational::zero() {
            return arg("tau must be nonnegative");
        }
        Ok(())
    }
}

/// Guards against runaway state growth.
#[derive(Clone, Copy, Debug)]
pub struct EngineLimits {
    pub max_degree: u32,
    pub max_profiles: usize,
}

impl Default for EngineLimits {
    fn default() -> Self {
        Self { max_degree: 512, max_profiles: 4_000_000 }
    }
}

fn check_state(state: &ProfileSum, n: usize, limits: &EngineLimits) -> Result<()> {
    if state.len() > limits.max_profiles {
        return resource(format!("{} profiles exceed the cap {}", state.len(), limits.max_profiles));
    }
    for p in state.terms.keys() {
        if p.marked.len() + p.anon.len() > n {
            return arg(format!("profile uses {} variables but N = {n}", p.marked.len() + p.anon.len()));
        }
        if p.total_degree() > limits.max_degree {
            return resource(format!("total degree {} exceeds the cap {}", p.total_degree(), limits.max_degree));
        }
    }
    Ok(())
}

/// Image of one profile under `𝔇̂` on marked slot `slot`, pushed into `out`
/// with an extra factor `scale`.
fn dunkl_profile(p: &Profile, slot: usize, n: usize, tau: &Rational, beta: &Rational, scale: &Rational, out: &mut ProfileSum) {
    let d = p.marked[slot];
    let half = beta / Rational::from_integer(2.into());
    if !tau.is_zero() {
        let mut q = p.clone();
        q.marked[slot] += 1;
        out.add(q, scale * tau);
    }
    let zeros = p.zero_count(n);
    if d > 0 {
        let mut r = zeros;
        r += p.marked.iter().enumerate().filter(|&(s, &e)| s != slot && e < d).count();
        r += p.anon.iter().filter(|&&e| e < d).count();
        let mut q = p.clone();
        q.marked[slot] -= 1;
        let c = Rational::from_integer(d.into()) + &half * Rational::from_integer(r.into());
        out.add(q, scale * c);
    }
    // pairwise terms against marked partners
    for (s, &e) in p.marked.iter().enumerate() {
        if s == slot {
            continue;
        }
        for (di, ej, sign) in pair_moves(d, e) {
            let mut q = p.clone();
            q.marked[slot] = di;
            q.marked[s] = ej;
            out.add(q, scale * &half * Rational::from_integer(sign.into()));
        }
    }
    // pairwise terms against anonymous classes, weighted by class size
    let mut classes: Vec<(u32, usize)> = Vec::new();
    for &e in &p.anon {
        match classes.last_mut() {
            Some((v, c)) if *v == e => *c += 1,
            _ => classes.push((e, 1)),
        }
    }
    if zeros > 0 {
        classes.push((0, zeros));
    }
    for (e, mult) in classes {
        for (di, ej, sign) in pair_moves(d, e) {
            let mut q = Profile { marked: p.marked.clone(), anon: p.replace_anon(e, ej) };
            q.marked[slot] = di;
            let c = scale * &half * Rational::from_integer((sign * mult as i64).into());
            out.add(q, c);
        }
    }
}

/// New degrees `(d_i, d_j)` and sign for the divided-difference terms between
/// the operator variable (degree `d`) and a partner (degree `e`).
fn pair_moves(d: u32, e: u32) -> Vec<(u32, u32, i64)> {
    let mut v = Vec::new();
    if e + 2 <= d {
        for g in 2..=(d - e) {
            v.push((d - g, e + g - 1, 1));
        }
    } else if e > d {
        for g in 1..=(e - d) {
            v.push((d + g - 1, e - g, -1));
        }
    }
    v
}

/// Applies `𝔇̂_i^{N,τ}` once, where `i` is the marked slot `slot`.
pub fn apply_dunkl(state: &ProfileSum, slot: usize, spec: &OperatorSpec, limits: &EngineLimits) -> Result<ProfileSum> {
    spec.validate()?;
    check_state(state, spec.n, limits)?;
    let mut out = ProfileSum::default();
    for (p, c) in &state.terms {
        if slot >= p.marked.len() {
            return arg(format!("marked slot {slot} not present in profile with {} marked", p.marked.len()));
        }
        dunkl_profile(p, slot, spec.n, &spec.tau, &spec.beta, c, &mut out);
    }
    check_state(&out, spec.n, limits)?;
    Ok(out)
}

/// `𝔓̂_k = Σ_i 𝔇̂_i^k` with symmetry over anonymous variables.
pub fn apply_power_sum(state: &ProfileSum, spec: &OperatorSpec, limits: &EngineLimits) -> Result<ProfileSum> {
    apply_power_sum_pruned(state, spec, None, limits)
}

/// As [`apply_power_sum`], discarding profiles whose total degree exceeds the
/// number of steps still to come (`steps_after` further operator steps after
/// this power sum), since each step moves the degree by exactly one.
pub fn apply_power_sum_pruned(
    state: &ProfileSum,
    spec: &OperatorSpec,
    steps_after: Option<u32>,
    limits: &EngineLimits,
) -> Result<ProfileSum> {
    spec.validate()?;
    check_state(state, spec.n, limits)?;
    let n = spec.n;
    let k = spec.k;
    let mut result = ProfileSum::default();
    let budget = |s: u32| steps_after.map(|a| a + k - s - 1);

    // marked variables act directly
    let nmarked = state.terms.keys().map(|p| p.marked.len()).max().unwrap_or(0);
    for slot in 0..nmarked {
        let mut cur = state.clone();
        for s in 0..k {
            let mut next = ProfileSum::default();
            for (p, c) in &cur.terms {
                dunkl_profile(p, slot, n, &spec.tau, &spec.beta, c, &mut next);
            }
            if let Some(b) = budget(s) {
                next.prune(b);
            }
            check_state(&next, n, limits)?;
            cur = next;
        }
        for (p, c) in cur.terms {
            result.add(p, c);
        }
    }

    // anonymous variables: promote one with weight equal to its class size,
    // act, and demote back
    let mut cur = ProfileSum::default();
    for (p, c) in &state.terms {
        let mut classes: Vec<(u32, usize)> = Vec::new();
        for &e in &p.anon {
            match classes.last_mut() {
                Some((v, m)) if *v == e => *m += 1,
                _ => classes.push((e, 1)),
            }
        }
        let z = p.zero_count(n);
        if z > 0 {
            classes.push((0, z));
        }
        for (e, mult) in classes {
            let mut marked = p.marked.clone();
            marked.push(e);
            let q = Profile { marked, anon: p.replace_anon(e, 0) };
            cur.add(q, c * Rational::from_integer(mult.into()));
        }
    }
    for s in 0..k {
        let mut next = ProfileSum::default();
        for (p, c) in &cur.terms {
            let slot = p.marked.len() - 1;
            dunkl_profile(p, slot, n, &spec.tau, &spec.beta, c, &mut next);
        }
        if let Some(b) = budget(s) {
            next.prune(b);
        }
        check_state(&next, n, limits)?;
        cur = next;
    }
    for (mut p, c) in cur.terms {
        let e = p.marked.pop().expect("promoted variable");
        if e > 0 {
            p.anon.push(e);
            p.anon.sort_unstable_by(|a, b| b.cmp(a));
        }
        result.add(p, c);
    }
    Ok(result)
}

/// Restricts a state symmetric in `from` active variables (all others zero)
/// to the first `to ≤ from` of them, keeping the orbit-mass convention.
pub fn restrict_rows(state: &ProfileSum, from: usize, to: usize) -> Result<ProfileSum> {
    if to > from {
        return arg(format!("row restriction must not grow ({from} → {to})"));
    }
    let mut out = ProfileSum::default();
    for (p, c) in &state.terms {
        if !p.marked.is_empty() {
            return arg("row restriction needs a fully symmetric state");
        }
        let len = p.anon.len();
        if len > to {
            continue;
        }
        // fraction of the orbit whose nonzero positions all lie in the first `to`
        let mut f = Rational::one();
        for t in 0..len {
            f *= Rational::new(((to - t) as i64).into(), ((from - t) as i64).into());
        }
        out.add(p.clone(), c * f);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dunkl::raw::{monomial, Poly, RawDunkl};
    use crate::scalar::{int, ratio};

    /// Orbit masses of a raw polynomial given which variables are marked.
    fn aggregate(p: &Poly, marked: &[usize]) -> ProfileSum {
        let mut s = ProfileSum::default();
        for (m, c) in p {
            let mk: Vec<u32> = marked.iter().map(|&i| m[i]).collect();
            let mut an: Vec<u32> = m
                .iter()
                .enumerate()
                .filter(|(i, &e)| !marked.contains(i) && e > 0)
                .map(|(_, &e)| e)
                .collect();
            an.sort_unstable_by(|a, b| b.cmp(a));
            s.add(Profile { marked: mk, anon: an }, c.clone());
        }
        s
    }

    #[test]
    fn matches_raw_operator_on_worked_example() {
        let beta = ratio(3, 2);
        let tau = ratio(10, 1) / &beta;
        let raw = RawDunkl::new(5, tau.clone(), beta.clone()).apply(&monomial(&[5, 2, 0, 1, 0]), 1);
        let spec = OperatorSpec { n: 5, tau, beta, k: 1 };
        let st = ProfileSum::single(Profile { marked: vec![2], anon: vec![5, 1] }, int(1));
        let got = apply_dunkl(&st, 0, &spec, &EngineLimits::default()).unwrap();
        assert_eq!(got, aggregate(&raw, &[1]));
    }

    #[test]
    fn power_sum_matches_raw_on_symmetric_input() {
        // symmetrize x1^2 x2 over three variables and compare P̂_3 images
        let n = 3;
        let (tau, beta) = (ratio(1, 2), ratio(7, 3));
        let raw = RawDunkl::new(n, tau.clone(), beta.clone());
        let mut sym = Poly::new();
        for perm in [[2, 1, 0], [2, 0, 1], [1, 2, 0], [0, 2, 1], [1, 0, 2], [0, 1, 2]] {
            crate::dunkl::raw::add_term(&mut sym, perm.to_vec(), int(1));
        }
        let img = raw.power_sum(&sym, 3);
        let spec = OperatorSpec { n, tau, beta, k: 3 };
        let st = ProfileSum::single(Profile { marked: vec![], anon: vec![2, 1] }, int(6));
        let got = apply_power_sum(&st, &spec, &EngineLimits::default()).unwrap();
        assert_eq!(got, aggregate(&img, &[]));
    }

    #[test]
    fn restriction_keeps_symmetric_coefficients() {
        // e_1 = x1+x2+x3 restricted to two variables is x1+x2: mass 3 → 2
        let st = ProfileSum::single(Profile { marked: vec![], anon: vec![1] }, int(3));
        let r = restrict_rows(&st, 3, 2).unwrap();
        assert_eq!(r.terms[&Profile { marked: vec![], anon: vec![1] }], int(2));
    }

    #[test]
    fn degree_cap_is_a_resource_error() {
        let spec = OperatorSpec { n: 1, tau: int(1), beta: int(1), k: 1 };
        let lim = EngineLimits { max_degree: 3, max_profiles: 10 };
        let st = ProfileSum::single(Profile { marked: vec![3], anon: vec![] }, int(1));
        assert!(matches!(apply_dunkl(&st, 0, &spec, &lim), Err(crate::error::LabError::Resource(_))));
    }

    #[test]
    fn bad_slot_is_an_argument_error() {
        let spec = OperatorSpec { n: 2, tau: int(1), beta: int(1), k: 1 };
        assert!(matches!(
            apply_dunkl(&ProfileSum::one(), 0, &spec, &EngineLimits::default()),
            Err(crate::error::LabError::Argument(_))
        ));
    }
}
