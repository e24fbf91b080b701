//! Literal Dunkl operators on sparse polynomials.
//!
//! Every monomial is stored explicitly and the difference part is computed as
//! an actual divided difference, with no reference to the case analysis used
//! by the profile engine. This makes it a slow but independent oracle.

use crate::scalar::Rational;
use num::{One, Zero};
use std::collections::{BTreeMap, HashMap};

pub type Monomial = Vec<u32>;
pub type Poly = BTreeMap<Monomial, Rational>;

pub fn monomial(exps: &[u32]) -> Poly {
    let mut p = Poly::new();
    p.insert(exps.to_vec(), Rational::one());
    p
}

pub fn constant(nvars: usize, c: Rational) -> Poly {
    let mut p = Poly::new();
    if !c.is_zero() {
        p.insert(vec![0; nvars], c);
    }
    p
}

pub fn add_term(p: &mut Poly, m: Monomial, c: Rational) {
    if c.is_zero() {
        return;
    }
    match p.entry(m) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

pub fn add_assign(p: &mut Poly, q: &Poly, scale: &Rational) {
    for (m, c) in q {
        add_term(p, m.clone(), c * scale);
    }
}

pub fn sub(p: &Poly, q: &Poly) -> Poly {
    let mut r = p.clone();
    add_assign(&mut r, q, &-Rational::one());
    r
}

pub fn degree(m: &Monomial) -> u32 {
    m.iter().sum()
}

/// Constant term.
pub fn constant_term(p: &Poly) -> Rational {
    p.iter()
        .find(|(m, _)| m.iter().all(|&e| e == 0))
        .map(|(_, c)| c.clone())
        .unwrap_or_else(Rational::zero)
}

/// `∂_i + τ x_i + (β/2) Σ_{j≠i, j≤active} (1 − σ_ij)/(x_i − x_j)` acting on
/// polynomials in `nvars ≥ active` variables (0-based indices).
#[derive(Clone, Debug)]
pub struct RawDunkl {
    pub active: usize,
    pub tau: Rational,
    pub beta: Rational,
}

impl RawDunkl {
    pub fn new(active: usize, tau: Rational, beta: Rational) -> Self {
        Self { active, tau, beta }
    }

    pub fn apply_monomial(&self, m: &Monomial, i: usize, out: &mut Poly, scale: &Rational) {
        let half_beta = &self.beta / Rational::from_integer(2.into());
        let a = m[i];
        if a > 0 {
            let mut mm = m.clone();
            mm[i] -= 1;
            add_term(out, mm, scale * Rational::from_integer(a.into()));
        }
        if !self.tau.is_zero() {
            let mut mm = m.clone();
            mm[i] += 1;
            add_term(out, mm, scale * &self.tau);
        }
        for j in 0..self.active {
            if j == i {
                continue;
            }
            let b = m[j];
            if a == b {
                continue;
            }
            // (x_i^a x_j^b − x_i^b x_j^a)/(x_i − x_j)
            let (lo, hi, sign) = if a > b { (b, a, 1) } else { (a, b, -1) };
            let c = scale * &half_beta * Rational::from_integer(sign.into());
            for s in 0..(hi - lo) {
                let mut mm = m.clone();
                mm[i] = lo + s;
                mm[j] = lo + (hi - lo - 1 - s);
                add_term(out, mm, c.clone());
            }
        }
    }

    pub fn apply(&self, p: &Poly, i: usize) -> Poly {
        let mut out = Poly::new();
        for (m, c) in p {
            self.apply_monomial(m, i, &mut out, c);
        }
        out
    }

    pub fn apply_pow(&self, p: &Poly, i: usize, k: u32) -> Poly {
        let mut q = p.clone();
        for _ in 0..k {
            q = self.apply(&q, i);
        }
        q
    }

    /// Same as [`apply_pow`] but drops monomials that can no longer return to
    /// degree `target` within the remaining steps (each application moves
    /// total degree by exactly one).
    pub fn apply_pow_pruned(&self, p: &Poly, i: usize, k: u32, steps_after: u32) -> Poly {
        let mut q = p.clone();
        for s in 0..k {
            q = self.apply(&q, i);
            let left = k - s - 1 + steps_after;
            q.retain(|m, _| degree(m) <= left);
        }
        q
    }

    /// `Σ_{i<active} D_i^k`
    pub fn power_sum(&self, p: &Poly, k: u32) -> Poly {
        let mut out = Poly::new();
        for i in 0..self.active {
            add_assign(&mut out, &self.apply_pow(p, i, k), &Rational::one());
        }
        out
    }

    /// `Σ_w Σ_i D_i^w x_i D_i^{k−1−w}`
    pub fn pbar(&self, p: &Poly, k: u32) -> Poly {
        let mut out = Poly::new();
        for i in 0..self.active {
            for w in 0..k {
                let inner = self.apply_pow(p, i, k - 1 - w);
                let shifted = mul_x(&inner, i);
                add_assign(&mut out, &self.apply_pow(&shifted, i, w), &Rational::one());
            }
        }
        out
    }
}

pub fn mul_x(p: &Poly, i: usize) -> Poly {
    p.iter()
        .map(|(m, c)| {
            let mut mm = m.clone();
            mm[i] += 1;
            (mm, c.clone())
        })
        .collect()
}

/// Caches a linear operator on monomials so that compositions over a spanning
/// set do not recompute shared images.
pub struct Memo<'a> {
    f: Box<dyn Fn(&Monomial) -> Poly + 'a>,
    cache: HashMap<Monomial, Poly>,
}

impl<'a> Memo<'a> {
    pub fn new(f: impl Fn(&Monomial) -> Poly + 'a) -> Self {
        Self { f: Box::new(f), cache: HashMap::new() }
    }

    pub fn apply(&mut self, p: &Poly) -> Poly {
        let mut out = Poly::new();
        for (m, c) in p {
            if !self.cache.contains_key(m) {
                let img = (self.f)(m);
                self.cache.insert(m.clone(), img);
            }
            add_assign(&mut out, &self.cache[m], c);
        }
        out
    }
}

/// All exponent vectors in `nvars` variables with total degree ≤ cap.
pub fn monomials_up_to(nvars: usize, cap: u32) -> Vec<Monomial> {
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0; nvars];
    rec(0, cap, &mut cur, &mut out);
    out
}
