//! The β = 2 multivariate Bessel function and a numerical check of its
//! Dunkl eigenrelation.

use crate::error::{arg, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] > w[1])
}

fn distinct(v: &[f64]) -> bool {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s.windows(2).all(|w| w[0] != w[1])
}

/// `1!·2!⋯(N−1)! · det[e^{λ_i x_j}] / ∏_{i<j}(x_i−x_j)(λ_i−λ_j)`
pub fn bessel_beta2(lambda: &[f64], x: &[f64]) -> Result<f64> {
    let n = lambda.len();
    if n == 0 || x.len() != n {
        return arg("lambda and x must be nonempty and of equal length");
    }
    if !strictly_decreasing(lambda) {
        return arg("lambda must be strictly decreasing");
    }
    if !distinct(x) {
        return arg("x must have distinct coordinates");
    }
    Ok(bessel_unchecked(lambda, x))
}

fn bessel_unchecked(lambda: &[f64], x: &[f64]) -> f64 {
    let n = lambda.len();
    let m = DMatrix::from_fn(n, n, |i, j| (lambda[i] * x[j]).exp());
    let mut v = m.determinant();
    let mut fact = 1.0;
    for k in 1..n {
        fact *= k as f64;
        v *= fact;
    }
    for i in 0..n {
        for j in i + 1..n {
            v /= (x[i] - x[j]) * (lambda[i] - lambda[j]);
        }
    }
    v
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenResidual {
    pub residual: f64,
    pub value: f64,
    pub eigenvalue: f64,
    /// the step is not small against the spacing of `x`
    pub step_warning: bool,
}

/// `𝔇_i g(x)` for β = 2 with a central difference for `∂_i` and exact swaps.
fn dunkl_fd<'a>(g: &'a dyn Fn(&[f64]) -> f64, i: usize, h: f64) -> impl Fn(&[f64]) -> f64 + 'a {
    move |x: &[f64]| {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        let mut v = (g(&xp) - g(&xm)) / (2.0 * h);
        let gx = g(x);
        for j in 0..x.len() {
            if j == i {
                continue;
            }
            let mut xs = x.to_vec();
            xs.swap(i, j);
            v += (gx - g(&xs)) / (x[i] - x[j]);
        }
        v
    }
}

fn power_sum_value(lambda: &[f64], x: &[f64], k: u32, h: f64) -> f64 {
    let base = |y: &[f64]| bessel_unchecked(lambda, y);
    let mut total = 0.0;
    for i in 0..x.len() {
        // k-fold composition, built as nested boxed closures
        let mut f: Box<dyn Fn(&[f64]) -> f64> = Box::new(base);
        for _ in 0..k {
            let prev = f;
            f = Box::new(move |y: &[f64]| dunkl_fd(&*prev, i, h)(y));
        }
        total += f(x);
    }
    total
}

/// `|𝔓_k B − (Σλ^k) B| / |B|` at `x`, with one Richardson refinement of the
/// finite-difference step.
pub fn eigenrelation_residual_beta2(lambda: &[f64], x: &[f64], k: u32, fd_step: f64) -> Result<EigenResidual> {
    let b = bessel_beta2(lambda, x)?;
    if !(fd_step > 0.0) {
        return arg("fd_step must be positive");
    }
    let mut spacing = f64::INFINITY;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            spacing = spacing.min((x[i] - x[j]).abs());
        }
    }
    let step_warning = fd_step * 100.0 > spacing;
    let coarse = power_sum_value(lambda, x, k, fd_step);
    let fine = power_sum_value(lambda, x, k, fd_step / 2.0);
    let v = (4.0 * fine - coarse) / 3.0;
    let eig: f64 = lambda.iter().map(|l| l.powi(k as i32)).sum();
    Ok(EigenResidual { residual: (v - eig * b).abs() / b.abs(), value: v, eigenvalue: eig, step_warning })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_variable_is_exponential() {
        let v = bessel_beta2(&[0.7], &[1.3]).unwrap();
        assert!((v - (0.7f64 * 1.3).exp()).abs() < 1e-14);
    }

    #[test]
    fn two_by_two_value() {
        // (e·1 − e^{−1}·1)/((1−(−1))(1−0)) = sinh(1)
        let v = bessel_beta2(&[1.0, 0.0], &[1.0, -1.0]).unwrap();
        assert!((v - 1f64.sinh()).abs() < 1e-12, "{v}");
    }

    #[test]
    fn normalization_near_origin() {
        let v = bessel_beta2(&[1.5, 0.2, -0.9], &[1e-3, -2e-3, 3e-3]).unwrap();
        assert!((v - 1.0).abs() < 1e-2, "{v}");
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(bessel_beta2(&[1.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(bessel_beta2(&[1.0, 0.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn eigenrelation_checks() {
        let r = eigenrelation_residual_beta2(&[2.0], &[0.4], 1, 1e-4).unwrap();
        assert!(r.residual < 1e-8);
        let r = eigenrelation_residual_beta2(&[1.0, 0.0], &[0.3, -0.2], 1, 1e-4).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
        let r = eigenrelation_residual_beta2(&[1.0, 0.0], &[0.3, -0.2], 2, 1e-4).unwrap();
        assert!(r.residual < 1e-5, "{r:?}");
        let r = eigenrelation_residual_beta2(&[1.0, 0.4, -0.5], &[0.3, -0.2, 0.9], 2, 1e-3).unwrap();
        assert!(r.residual < 1e-5, "{r:?}");
    }
}
