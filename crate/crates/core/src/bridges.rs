//! Closed-form 𝐅 kernels and Monte Carlo estimates of the exponential-area
//! functionals 𝐈, 𝐈₀, 𝐈₀₀ over conditioned Brownian paths.

use crate::error::{arg, resource, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return arg(format!("duration must be positive, got {x}"));
    }
    Ok(())
}

fn check_height(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return arg(format!("{name} must be a finite nonnegative height, got {v}"));
    }
    Ok(())
}

// factored so that small h·g/x keeps its precision
pub(crate) fn f_raw(x: f64, h: f64, g: f64) -> f64 {
    (-(g - h).powi(2) / (2.0 * x)).exp() * -(-2.0 * h * g / x).exp_m1() / (2.0 * PI * x).sqrt()
}

pub(crate) fn f0_raw(x: f64, h: f64) -> f64 {
    2.0 * h / (2.0 * PI * x.powi(3)).sqrt() * (-h * h / (2.0 * x)).exp()
}

/// Transition density of Brownian motion killed at 0, from `h` to `g` in time `x`.
pub fn f_kernel(x: f64, h: f64, g: f64) -> Result<f64> {
    check_x(x)?;
    check_height("h", h)?;
    check_height("g", g)?;
    Ok(f_raw(x, h, g))
}

pub fn f0_kernel(x: f64, h: f64) -> Result<f64> {
    check_x(x)?;
    check_height("h", h)?;
    Ok(f0_raw(x, h))
}

pub fn f00_kernel(x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(2.0 / (2.0 * PI * x.powi(3)).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgeKind {
    /// Brownian bridge conditioned to stay nonnegative, by rejection.
    BridgePositive,
    Bessel3Bridge,
    Excursion,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcursionMethod {
    /// norm of a three-dimensional Brownian bridge from 0 to 0
    #[default]
    Bessel3,
    /// cyclic shift of a Brownian bridge at its minimum, on the mesh
    Vervaat,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BridgeSpec {
    pub x: f64,
    pub h: f64,
    pub g: f64,
    pub kind: BridgeKind,
    /// mesh points per unit time
    pub mesh: usize,
    #[serde(default)]
    pub excursion: ExcursionMethod,
}

impl BridgeSpec {
    pub fn new(x: f64, h: f64, g: f64, kind: BridgeKind, mesh: usize) -> Self {
        BridgeSpec { x, h, g, kind, mesh, excursion: ExcursionMethod::default() }
    }

    pub fn steps(&self) -> usize {
        ((self.mesh as f64 * self.x).ceil() as usize).max(1)
    }

    fn validate(&self) -> Result<()> {
        check_x(self.x)?;
        check_height("h", self.h)?;
        check_height("g", self.g)?;
        if self.mesh < 16 {
            return arg(format!("mesh must be at least 16 points per unit time, got {}", self.mesh));
        }
        match self.kind {
            BridgeKind::Excursion if self.h != 0.0 || self.g != 0.0 => arg("an excursion starts and ends at 0"),
            BridgeKind::Bessel3Bridge if self.h != 0.0 || !(self.g > 0.0) => {
                arg("a Bessel-3 bridge starts at 0 and ends at a positive height")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampledPath {
    pub dt: f64,
    pub values: Vec<f64>,
    /// proposals thrown away before this path was accepted
    pub rejected: u64,
}

impl SampledPath {
    /// trapezoid rule on the mesh
    pub fn area(&self) -> f64 {
        area(&self.values, self.dt)
    }
}

pub(crate) fn area(v: &[f64], dt: f64) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = v[1..n - 1].iter().sum();
    dt * (inner + 0.5 * (v[0] + v[n - 1]))
}

const MAX_ATTEMPTS: u64 = 1000;

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Gaussian bridge from `a` to `b` on `n` steps of length `dt`, written into `out`.
fn gaussian_bridge<R: Rng>(rng: &mut R, a: f64, b: f64, n: usize, dt: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(a);
    let total = n as f64 * dt;
    let mut y = a;
    for i in 0..n - 1 {
        let rem = total - i as f64 * dt;
        let mean = y + (b - y) * dt / rem;
        let var = dt * (rem - dt) / rem;
        y = mean + var.sqrt() * normal(rng);
        out.push(y);
    }
    out.push(b);
}

/// Direction on the sphere with density ∝ exp(κ·u₁).
fn von_mises_fisher<R: Rng>(rng: &mut R, kappa: f64) -> [f64; 3] {
    let w = if kappa < 1e-12 {
        2.0 * rng.gen::<f64>() - 1.0
    } else {
        let u = 1.0 - rng.gen::<f64>();
        (1.0 + (u + (1.0 - u) * (-2.0 * kappa).exp()).ln() / kappa).clamp(-1.0, 1.0)
    };
    let phi = 2.0 * PI * rng.gen::<f64>();
    let s = (1.0 - w * w).max(0.0).sqrt();
    [w, s * phi.cos(), s * phi.sin()]
}

/// Bessel-3 bridge from `a` to `b`: the norm of a 3d Brownian bridge from
/// `(a,0,0)` to a point of norm `b` whose direction has the conditional law.
pub(crate) fn bessel3_bridge<R: Rng>(rng: &mut R, a: f64, b: f64, n: usize, dt: f64, out: &mut Vec<f64>) {
    let total = n as f64 * dt;
    let dir = von_mises_fisher(rng, a * b / total);
    let end = [b * dir[0], b * dir[1], b * dir[2]];
    let mut y = [a, 0.0, 0.0];
    out.clear();
    out.push(a);
    for i in 0..n - 1 {
        let rem = total - i as f64 * dt;
        let sd = (dt * (rem - dt) / rem).sqrt();
        for c in 0..3 {
            y[c] += (end[c] - y[c]) * dt / rem + sd * normal(rng);
        }
        out.push((y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt());
    }
    out.push(b);
}

fn vervaat<R: Rng>(rng: &mut R, n: usize, dt: f64, out: &mut Vec<f64>) {
    let mut b = Vec::with_capacity(n + 1);
    gaussian_bridge(rng, 0.0, 0.0, n, dt, &mut b);
    let (argmin, &min) = b[..n].iter().enumerate().min_by(|x, y| x.1.partial_cmp(y.1).unwrap()).unwrap();
    out.clear();
    for i in 0..=n {
        out.push(b[(argmin + i) % n] - min);
    }
    out[n] = 0.0;
}

/// One positive bridge by rejection; the acceptance probability includes the
/// chance of dipping below 0 between mesh points.
fn positive_bridge<R: Rng>(rng: &mut R, a: f64, b: f64, n: usize, dt: f64, out: &mut Vec<f64>) -> Result<u64> {
    for attempt in 0..MAX_ATTEMPTS {
        gaussian_bridge(rng, a, b, n, dt, out);
        let mut survive = 1.0;
        for w in out.windows(2) {
            if w[0] <= 0.0 || w[1] <= 0.0 {
                survive = 0.0;
                break;
            }
            survive *= -(-2.0 * w[0] * w[1] / dt).exp_m1();
        }
        if survive > 0.0 && rng.gen::<f64>() < survive {
            return Ok(attempt);
        }
    }
    resource(format!(
        "rejection rate above 0.999 for a positive bridge from {a} to {b}; endpoints this close to 0 need the bessel3_bridge or excursion kind"
    ))
}

fn sample_into<R: Rng>(spec: &BridgeSpec, rng: &mut R, out: &mut Vec<f64>) -> Result<u64> {
    let n = spec.steps();
    let dt = spec.x / n as f64;
    match spec.kind {
        BridgeKind::BridgePositive => positive_bridge(rng, spec.h, spec.g, n, dt, out),
        BridgeKind::Bessel3Bridge => {
            bessel3_bridge(rng, spec.h, spec.g, n, dt, out);
            Ok(0)
        }
        BridgeKind::Excursion => {
            match spec.excursion {
                ExcursionMethod::Bessel3 => bessel3_bridge(rng, 0.0, 0.0, n, dt, out),
                ExcursionMethod::Vervaat => vervaat(rng, n, dt, out),
            }
            Ok(0)
        }
    }
}

pub fn sample_path(spec: &BridgeSpec, seed: u64) -> Result<SampledPath> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::new();
    let rejected = sample_into(spec, &mut rng, &mut values)?;
    Ok(SampledPath { dt: spec.x / spec.steps() as f64, values, rejected })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionalEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub n_rejected: u64,
    pub mesh: usize,
}

/// An estimate at `mesh` together with one at `2·mesh` from independent draws.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelEstimate {
    pub coarse: FunctionalEstimate,
    pub fine: Option<FunctionalEstimate>,
}

impl KernelEstimate {
    pub fn best(&self) -> &FunctionalEstimate {
        self.fine.as_ref().unwrap_or(&self.coarse)
    }

    /// |coarse − fine| measured in combined standard errors
    pub fn mesh_gap(&self) -> Option<f64> {
        self.fine.as_ref().map(|f| {
            let se = (f.stderr.powi(2) + self.coarse.stderr.powi(2)).sqrt();
            (f.mean - self.coarse.mean).abs() / se.max(f64::MIN_POSITIVE)
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct McOptions {
    pub budget: u64,
    pub seed: u64,
    pub mesh: usize,
    pub refine: bool,
}

impl McOptions {
    pub fn new(budget: u64, seed: u64) -> Self {
        McOptions { budget, seed, mesh: 64, refine: true }
    }
}

const CHUNK: u64 = 4096;

/// `E[exp(∫B/β)]` over `budget` paths; β = ∞ is passed as `inv_beta = 0`.
fn area_exponential(spec: &BridgeSpec, inv_beta: f64, budget: u64, seed: u64, stream_base: u64) -> Result<FunctionalEstimate> {
    spec.validate()?;
    let chunks = budget.div_ceil(CHUNK);
    let parts: Vec<Result<(f64, f64, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + c);
            let count = CHUNK.min(budget - c * CHUNK);
            let dt = spec.x / spec.steps() as f64;
            let mut buf = Vec::with_capacity(spec.steps() + 1);
            let (mut s, mut s2, mut rej) = (0.0, 0.0, 0u64);
            for _ in 0..count {
                rej += sample_into(spec, &mut rng, &mut buf)?;
                let v = (inv_beta * area(&buf, dt)).exp();
                s += v;
                s2 += v * v;
            }
            Ok((s, s2, rej))
        })
        .collect();
    let (mut s, mut s2, mut rej) = (0.0, 0.0, 0u64);
    for p in parts {
        let (a, b, r) = p?;
        s += a;
        s2 += b;
        rej += r;
    }
    let n = budget as f64;
    let mean = s / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(FunctionalEstimate { mean, stderr: (var / n).sqrt(), n_samples: budget, n_rejected: rej, mesh: spec.mesh })
}

fn inv_beta(beta: f64) -> Result<f64> {
    if beta.is_infinite() && beta > 0.0 {
        Ok(0.0)
    } else if beta > 0.0 {
        Ok(1.0 / beta)
    } else {
        arg(format!("beta must be positive, got {beta}"))
    }
}

fn kernel_mc(spec: BridgeSpec, factor: f64, beta: f64, opts: &McOptions) -> Result<KernelEstimate> {
    if opts.budget < 1000 {
        return arg(format!("Monte Carlo budget must be at least 1000, got {}", opts.budget));
    }
    let ib = inv_beta(beta)?;
    let scale = |mut e: FunctionalEstimate| {
        e.mean *= factor;
        e.stderr *= factor;
        e
    };
    let coarse = scale(area_exponential(&spec, ib, opts.budget, opts.seed, 0)?);
    let fine = if opts.refine {
        let s2 = BridgeSpec { mesh: spec.mesh * 2, ..spec };
        Some(scale(area_exponential(&s2, ib, opts.budget, opts.seed, 1 << 40)?))
    } else {
        None
    };
    Ok(KernelEstimate { coarse, fine })
}

/// `𝐈(x;h,g)`; positive bridges use rejection when both ends are at least
/// `0.1·√x` high and the equivalent Bessel-3 bridge otherwise.
pub fn i_mc(x: f64, h: f64, g: f64, beta: f64, opts: &McOptions) -> Result<KernelEstimate> {
    let f = f_kernel(x, h, g)?;
    if h.min(g) >= 0.1 * x.sqrt() {
        return kernel_mc(BridgeSpec::new(x, h, g, BridgeKind::BridgePositive, opts.mesh), f, beta, opts);
    }
    if opts.mesh < 16 {
        return arg(format!("mesh must be at least 16 points per unit time, got {}", opts.mesh));
    }
    // the positive bridge between the same ends has the Bessel-3 bridge law
    bessel_general(x, h, g, f, beta, opts)
}

fn bessel_general(x: f64, h: f64, g: f64, f: f64, beta: f64, opts: &McOptions) -> Result<KernelEstimate> {
    if opts.budget < 1000 {
        return arg(format!("Monte Carlo budget must be at least 1000, got {}", opts.budget));
    }
    let ib = inv_beta(beta)?;
    let run = |mesh: usize, stream: u64| -> FunctionalEstimate {
        let n = ((mesh as f64 * x).ceil() as usize).max(1);
        let dt = x / n as f64;
        let chunks = opts.budget.div_ceil(CHUNK);
        let parts: Vec<(f64, f64)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(stream + c);
                let mut buf = Vec::with_capacity(n + 1);
                let (mut s, mut s2) = (0.0, 0.0);
                for _ in 0..CHUNK.min(opts.budget - c * CHUNK) {
                    bessel3_bridge(&mut rng, h, g, n, dt, &mut buf);
                    let v = (ib * area(&buf, dt)).exp();
                    s += v;
                    s2 += v * v;
                }
                (s, s2)
            })
            .collect();
        let (s, s2) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let nn = opts.budget as f64;
        let mean = s / nn;
        let var = ((s2 / nn - mean * mean) * nn / (nn - 1.0)).max(0.0);
        FunctionalEstimate { mean: f * mean, stderr: f * (var / nn).sqrt(), n_samples: opts.budget, n_rejected: 0, mesh }
    };
    let coarse = run(opts.mesh, 0);
    let fine = opts.refine.then(|| run(opts.mesh * 2, 1 << 40));
    Ok(KernelEstimate { coarse, fine })
}

/// `𝐈₀(x;h)`: Bessel-3 process from 0 conditioned to end at `h`.
pub fn i0_mc(x: f64, h: f64, beta: f64, opts: &McOptions) -> Result<KernelEstimate> {
    let f = f0_kernel(x, h)?;
    if h == 0.0 {
        return Ok(KernelEstimate {
            coarse: FunctionalEstimate { mean: 0.0, stderr: 0.0, n_samples: 1, n_rejected: 0, mesh: opts.mesh },
            fine: None,
        });
    }
    kernel_mc(BridgeSpec::new(x, 0.0, h, BridgeKind::Bessel3Bridge, opts.mesh), f, beta, opts)
}

pub fn i00_mc(x: f64, beta: f64, opts: &McOptions) -> Result<KernelEstimate> {
    let f = f00_kernel(x)?;
    kernel_mc(BridgeSpec::new(x, 0.0, 0.0, BridgeKind::Excursion, opts.mesh), f, beta, opts)
}

/// Same as [`i00_mc`] with an explicit excursion sampler.
pub fn i00_mc_with(x: f64, beta: f64, opts: &McOptions, method: ExcursionMethod) -> Result<KernelEstimate> {
    let f = f00_kernel(x)?;
    let mut spec = BridgeSpec::new(x, 0.0, 0.0, BridgeKind::Excursion, opts.mesh);
    spec.excursion = method;
    kernel_mc(spec, f, beta, opts)
}
