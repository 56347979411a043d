//! Integration over cube-fibred domains.
//!
//! The fibre rule writes `∫_Ω f = ∫_0^1 ∫_{[0,t^σ]^{n-1}} f dx' dt`, grades the
//! height with `t = s^β` so nodes cluster at the tip, and applies Gauss–Legendre
//! in `s` and a tensor Gauss–Legendre rule on each cross-section cube.
//!
//! Per-height partial sums are computed in parallel and reduced in a fixed
//! order, so results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{CuspDomain, FiberDomain};
use crate::field::ScalarField;
use crate::{Error, PowerWeight, ProblemParams, Result, WeightSpec};

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_m.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1,1] -> [0,1].
        nodes[i] = 0.5 * (1.0 - x);
        nodes[m - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[m - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 1 {
        return (x, 1.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuadratureScheme {
    /// `levels` Gauss nodes in the graded height variable, `cross` per
    /// cross-section direction. `beta = None` means `max(2, σ)`.
    FiberGauss { levels: usize, cross: usize, beta: Option<f64> },
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        QuadratureScheme::FiberGauss { levels: 16, cross: 16, beta: None }
    }
}

impl QuadratureScheme {
    pub fn fiber(levels: usize, cross: usize) -> Self {
        QuadratureScheme::FiberGauss { levels, cross, beta: None }
    }

    /// The same kind of rule with twice as many nodes per direction.
    pub fn refined(&self) -> Self {
        match *self {
            QuadratureScheme::FiberGauss { levels, cross, beta } => {
                QuadratureScheme::FiberGauss { levels: 2 * levels, cross: 2 * cross, beta }
            }
            QuadratureScheme::MonteCarlo { samples, seed } => {
                QuadratureScheme::MonteCarlo { samples: 4 * samples, seed }
            }
        }
    }
}

/// Default grading exponent `max(2, σ)`.
pub fn default_grading(sigma: f64) -> f64 {
    sigma.max(2.0)
}

/// An integral together with its standard error (zero for Gauss rules).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

const MC_BLOCK: usize = 4096;

pub fn integrate<D, F>(f: &F, domain: &D, scheme: &QuadratureScheme) -> Result<f64>
where
    D: FiberDomain + ?Sized,
    F: ScalarField + ?Sized,
{
    integrate_estimate(f, domain, scheme).map(|e| e.value)
}

pub fn integrate_estimate<D, F>(f: &F, domain: &D, scheme: &QuadratureScheme) -> Result<Estimate>
where
    D: FiberDomain + ?Sized,
    F: ScalarField + ?Sized,
{
    match *scheme {
        QuadratureScheme::FiberGauss { levels, cross, beta } => {
            if levels == 0 || cross == 0 {
                return Err(Error::InvalidScheme("fibre rule needs levels, cross >= 1".into()));
            }
            let beta = beta.unwrap_or_else(|| default_grading(domain.sigma()));
            if !(beta >= 1.0) {
                return Err(Error::InvalidScheme(format!("grading beta >= 1 violated ({beta})")));
            }
            fiber_gauss(f, domain, levels, cross, beta)
        }
        QuadratureScheme::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidScheme("monte_carlo needs at least one sample".into()));
            }
            monte_carlo(f, domain, samples, seed)
        }
    }
}

fn fiber_gauss<D, F>(f: &F, domain: &D, levels: usize, cross: usize, beta: f64) -> Result<Estimate>
where
    D: FiberDomain + ?Sized,
    F: ScalarField + ?Sized,
{
    let n = domain.dim();
    let (s_nodes, s_weights) = gauss_legendre(levels);
    let (c_nodes, c_weights) = gauss_legendre(cross);
    let per_level: Vec<Result<f64>> = s_nodes
        .par_iter()
        .zip(s_weights.par_iter())
        .map(|(&s, &ws)| {
            let t = s.powf(beta);
            let dt = beta * s.powf(beta - 1.0) * ws;
            let side = domain.side(t);
            let mut x = vec![0.0; n];
            x[n - 1] = t;
            let mut idx = vec![0usize; n - 1];
            let mut acc = 0.0;
            loop {
                let mut w = 1.0;
                for (d, &i) in idx.iter().enumerate() {
                    x[d] = side * c_nodes[i];
                    w *= c_weights[i];
                }
                let v = f.value(&x);
                if !v.is_finite() {
                    return Err(Error::NonFiniteIntegrand);
                }
                acc += w * v;
                // Odometer over the (n-1)-dimensional tensor grid.
                let mut d = 0;
                while d < n - 1 {
                    idx[d] += 1;
                    if idx[d] < cross {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d == n - 1 {
                    break;
                }
            }
            Ok(acc * side.powi(n as i32 - 1) * dt)
        })
        .collect();
    let mut total = 0.0;
    for v in per_level {
        total += v?;
    }
    Ok(Estimate { value: total, std_error: 0.0 })
}

fn monte_carlo<D, F>(f: &F, domain: &D, samples: usize, seed: u64) -> Result<Estimate>
where
    D: FiberDomain + ?Sized,
    F: ScalarField + ?Sized,
{
    let n = domain.dim();
    // Height density ∝ t^{σ(n-1)}, sampled by inversion.
    let gamma = domain.sigma() * (n as f64 - 1.0) + 1.0;
    let blocks = samples.div_ceil(MC_BLOCK);
    let partial: Vec<Result<(f64, f64)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = MC_BLOCK.min(samples - b * MC_BLOCK);
            let mut x = vec![0.0; n];
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                let u: f64 = 1.0 - rng.gen::<f64>();
                let t = u.powf(1.0 / gamma);
                let side = domain.side(t);
                for xi in x.iter_mut().take(n - 1) {
                    *xi = side * (1.0 - rng.gen::<f64>());
                }
                x[n - 1] = t;
                let v = f.value(&x);
                if !v.is_finite() {
                    return Err(Error::NonFiniteIntegrand);
                }
                sum += v;
                sum_sq += v * v;
            }
            Ok((sum, sum_sq))
        })
        .collect();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for r in partial {
        let (s, s2) = r?;
        sum += s;
        sum_sq += s2;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = if samples > 1 { ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    let vol = domain.volume();
    Ok(Estimate { value: vol * mean, std_error: vol * (var / nf).sqrt() })
}

/// `(∫ |u|^q w dx)^{1/q}`.
pub fn weighted_norm<D, F>(
    u: &F,
    w: &PowerWeight,
    q: f64,
    domain: &D,
    scheme: &QuadratureScheme,
) -> Result<f64>
where
    D: FiberDomain + ?Sized,
    F: ScalarField + ?Sized,
{
    if !(q >= 1.0) {
        return Err(Error::InvalidParams(format!("q >= 1 violated (q = {q})")));
    }
    let integrand = |x: &[f64]| u.value(x).abs().powf(q) * w.value(x);
    Ok(integrate(&integrand, domain, scheme)?.powf(1.0 / q))
}

/// `(∫ |u|^q dx)^{1/q}`.
pub fn plain_norm<D, F>(u: &F, q: f64, domain: &D, scheme: &QuadratureScheme) -> Result<f64>
where
    D: FiberDomain + ?Sized,
    F: ScalarField + ?Sized,
{
    weighted_norm(u, &PowerWeight::UNIT, q, domain, scheme)
}

/// Fibre exponent of `(w / w_γ^{p/q})^{q/(q-p)}` on the cusp; the ratio
/// norm is finite exactly when it exceeds `-1`.
pub fn ratio_fiber_exponent(w: &PowerWeight, optimal: &PowerWeight, params: &ProblemParams) -> f64 {
    let (p, q) = (params.p, params.q);
    let r = q / (q - p);
    r * (w.exponent - optimal.exponent * p / q) + params.gamma - 1.0
}

/// `‖w / w_γ^{p/q}‖_{L^{q/(q-p)}(Ω_γ)}`.
///
/// Divergence is decided from the fibre exponent before any integration.
pub fn ratio_norm(w: &WeightSpec, params: &ProblemParams, scheme: &QuadratureScheme) -> Result<f64> {
    let (p, q) = (params.p, params.q);
    if !(p < q) {
        return Err(Error::InvalidParams(format!("p < q required (p = {p}, q = {q})")));
    }
    let weight = w.resolve(params)?;
    let optimal = WeightSpec::Optimal.resolve(params)?;
    let exponent = ratio_fiber_exponent(&weight, &optimal, params);
    if exponent <= -1.0 {
        return Err(Error::DivergentRatioNorm { exponent });
    }
    let r = q / (q - p);
    let ratio = |x: &[f64]| (weight.value(x) / optimal.value(x).powf(p / q)).powf(r);
    let domain = CuspDomain::from_params(params);
    Ok(integrate(&ratio, &domain, scheme)?.powf(1.0 / r))
}
