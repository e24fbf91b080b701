//! Exact commutation checks for the power-sum operators, on the literal
//! polynomial representation.

use super::raw::{monomial, monomials_up_to, sub, Memo, Poly, RawDunkl};
use crate::error::{arg, Result};
use crate::scalar::Rational;

/// First monomial (in enumeration order) whose image under the commutator is
/// nonzero, with that image.
#[derive(Clone, Debug)]
pub struct Witness {
    pub monomial: Vec<u32>,
    pub image: Poly,
}

/// `[𝔓̂_{k1}(op1), 𝔓̂_{k2}(op2)]` on every monomial of degree ≤ cap.
/// Using two operators lets callers perturb one factor.
pub fn commutator_witness(op1: &RawDunkl, k1: u32, op2: &RawDunkl, k2: u32, nvars: usize, cap: u32) -> Option<Witness> {
    let mut a = Memo::new(|m: &Vec<u32>| op1.power_sum(&monomial(m), k1));
    let mut b = Memo::new(|m: &Vec<u32>| op2.power_sum(&monomial(m), k2));
    for m in monomials_up_to(nvars, cap) {
        let x = monomial(&m);
        let ab = a.apply(&b.apply(&x));
        let ba = b.apply(&a.apply(&x));
        let d = sub(&ab, &ba);
        if !d.is_empty() {
            return Some(Witness { monomial: m, image: d });
        }
    }
    None
}

pub fn check_commutation(n: usize, k1: u32, k2: u32, beta: &Rational, tau: &Rational, cap: u32) -> Result<bool> {
    if n == 0 {
        return arg("N must be positive");
    }
    let op = RawDunkl::new(n, tau.clone(), beta.clone());
    Ok(commutator_witness(&op, k1, &op, k2, n, cap).is_none())
}

/// `[[𝔓̄_k, 𝔓̂_k], 𝔓̂_k]` on every monomial of degree ≤ cap; `None` means it
/// vanishes identically there.
pub fn nested_commutator_witness(n: usize, k: u32, beta: &Rational, tau: &Rational, cap: u32) -> Result<Option<Witness>> {
    if k < 2 {
        return arg("nested commutator needs k ≥ 2");
    }
    let op = RawDunkl::new(n, tau.clone(), beta.clone());
    let mut p = Memo::new(|m: &Vec<u32>| op.power_sum(&monomial(m), k));
    let mut q = Memo::new(|m: &Vec<u32>| op.pbar(&monomial(m), k));
    for m in monomials_up_to(n, cap) {
        let x = monomial(&m);
        let px = p.apply(&x);
        let ppx = p.apply(&px);
        let qpp = q.apply(&ppx);
        let qpx = q.apply(&px);
        let pqp = p.apply(&qpx);
        let qx = q.apply(&x);
        let pqx = p.apply(&qx);
        let ppq = p.apply(&pqx);
        let mut d = sub(&qpp, &pqp);
        d = sub(&d, &pqp);
        super::raw::add_assign(&mut d, &ppq, &Rational::from_integer(1.into()));
        if !d.is_empty() {
            return Ok(Some(Witness { monomial: m, image: d }));
        }
    }
    Ok(None)
}

pub fn check_nested_commutator(n: usize, k: u32, beta: &Rational, tau: &Rational, cap: u32) -> Result<bool> {
    Ok(nested_commutator_witness(n, k, beta, tau, cap)?.is_none())
}

/// The single commutator `[𝔓̄_k, 𝔓̂_k]` applied to one monomial.
pub fn single_commutator_image(n: usize, k: u32, beta: &Rational, tau: &Rational, m: &[u32]) -> Poly {
    let op = RawDunkl::new(n, tau.clone(), beta.clone());
    let x = monomial(m);
    let a = op.pbar(&op.power_sum(&x, k), k);
    let b = op.power_sum(&op.pbar(&x, k), k);
    sub(&a, &b)
}
