use rayon::prelude::*;

use crate::fem::{FemFunction, WeightedQuadrature};
use crate::{Error, PowerWeight, Result};

/// Outcome of a recentering: the shift and the bracket it was found in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recentering {
    pub shift: f64,
    pub lower: f64,
    pub upper: f64,
    pub evaluations: usize,
}

const CHUNK: usize = 4096;

/// `h(t) = Σ_k c_k |v_k - t|^{q-2} (v_k - t)` and `-h'(t)`.
fn moment_and_slope(values: &[f64], weights: &[f64], q: f64, t: f64) -> (f64, f64) {
    let parts: Vec<(f64, f64)> = values
        .par_chunks(CHUNK)
        .zip(weights.par_chunks(CHUNK))
        .map(|(v, c)| {
            let (mut h, mut s) = (0.0, 0.0);
            for (&v, &c) in v.iter().zip(c) {
                let d = v - t;
                let a = d.abs();
                if a == 0.0 || c == 0.0 {
                    continue;
                }
                let pw = if q == 2.0 { 1.0 } else { a.powf(q - 2.0) };
                h += c * pw * d;
                s += c * pw;
            }
            (h, s)
        })
        .collect();
    let (h, s) = parts.iter().fold((0.0, 0.0), |(h, s), &(a, b)| (h + a, s + b));
    (h, (q - 1.0) * s)
}

/// Signed moment `Σ_k c_k |v_k - t|^{q-2} (v_k - t)`.
pub fn signed_moment(values: &[f64], weights: &[f64], q: f64, t: f64) -> f64 {
    moment_and_slope(values, weights, q, t).0
}

/// The unique root of the signed moment in `[min v, max v]`.
///
/// The moment is strictly decreasing in `t`, positive at `min v` and
/// negative at `max v`, so the root is kept bracketed throughout. Newton
/// steps are taken when they land inside the bracket, bisection otherwise;
/// iteration stops once the bracket or the step is below
/// `1e-14 · (max v - min v)`.
pub fn recenter_discrete(values: &[f64], weights: &[f64], q: f64) -> Result<Recentering> {
    if !(q > 1.0) {
        return Err(Error::InvalidParams(format!("q > 1 violated (q = {q})")));
    }
    if values.len() != weights.len() {
        return Err(Error::InvalidParams("values and weights differ in length".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroWeightMass);
    }
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::NonFiniteIntegrand);
    }
    if lo == hi {
        return Ok(Recentering { shift: lo, lower: lo, upper: hi, evaluations: 0 });
    }
    let tol = 1e-14 * (hi - lo);
    // Start from the weighted mean, which is exact for q = 2.
    let mean = values.iter().zip(weights).map(|(v, c)| v * c).sum::<f64>() / total;
    let mut t = mean.clamp(lo, hi);
    let mut evaluations = 0;
    for _ in 0..200 {
        let (h, slope) = moment_and_slope(values, weights, q, t);
        evaluations += 1;
        if h == 0.0 {
            return Ok(Recentering { shift: t, lower: t, upper: t, evaluations });
        }
        if h > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= tol {
            break;
        }
        let newton = if slope > 0.0 { t + h / slope } else { f64::NAN };
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = (next - t).abs();
        t = next;
        if step <= tol {
            break;
        }
    }
    Ok(Recentering { shift: t, lower: lo, upper: hi, evaluations })
}

/// Shift `u` onto the constraint set: returns `t̃` and `u - t̃`.
///
/// A constant field returns its value and the zero field.
pub fn recenter(u: &FemFunction, w: &PowerWeight, q: f64) -> Result<(f64, FemFunction)> {
    let mesh = u.mesh();
    if u.is_constant() {
        let c = u.values()[0];
        let quad = WeightedQuadrature::new(mesh, w);
        if !(quad.total_weight() > 0.0) {
            return Err(Error::ZeroWeightMass);
        }
        return Ok((c, FemFunction::constant(mesh.clone(), 0.0)));
    }
    let quad = WeightedQuadrature::new(mesh, w);
    let pv = quad.values_at_points(mesh, u.values());
    let r = recenter_discrete(&pv, quad.point_weights(), q)?;
    let shifted = u.values().iter().map(|v| v - r.shift).collect();
    Ok((r.shift, u.with_values(shifted)?))
}
