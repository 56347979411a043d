//! The cusp `Ω_γ = {0 < x_n < 1, 0 < x_i < x_n^σ}` and the pyramid `Ω_n`
//! (the same set with `σ = 1`).
//!
//! Both are unions of cube fibres: the slice at height `t` is the cube
//! `[0, t^σ]^{n-1}`. Quadrature and meshing rely on that structure.

use serde::Serialize;

use crate::{Error, ProblemParams, Result};

/// A domain whose slice at height `t ∈ (0,1)` is the cube `[0, t^σ]^{n-1}`.
pub trait FiberDomain: Sync {
    fn dim(&self) -> usize;

    fn sigma(&self) -> f64;

    /// Side of the cross-section cube at height `t`.
    fn side(&self, t: f64) -> f64 {
        t.powf(self.sigma())
    }

    /// Exact volume, `∫_0^1 t^{σ(n-1)} dt = 1/γ`.
    fn volume(&self) -> f64 {
        1.0 / (self.sigma() * (self.dim() as f64 - 1.0) + 1.0)
    }

    /// Largest distance between two vertices of `{0} ∪ {corners of the top
    /// face}`; the domain lies in their convex hull.
    fn diameter(&self) -> f64 {
        let n = self.dim();
        let mut vertices = vec![vec![0.0; n]];
        for mask in 0..(1usize << (n - 1)) {
            let mut v: Vec<f64> = (0..n - 1).map(|i| ((mask >> i) & 1) as f64).collect();
            v.push(1.0);
            vertices.push(v);
        }
        let mut best: f64 = 0.0;
        for (i, a) in vertices.iter().enumerate() {
            for b in &vertices[i + 1..] {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                best = best.max(d2);
            }
        }
        best.sqrt()
    }

    /// Closure membership minus the tip face `x_n = 0`, with a relative slack
    /// of `1e-12` on the curved faces.
    fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let t = x[self.dim() - 1];
        if !(t > 0.0 && t <= 1.0) {
            return false;
        }
        let side = self.side(t);
        x[..self.dim() - 1]
            .iter()
            .all(|&xi| xi >= 0.0 && xi <= side * (1.0 + 1e-12))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuspDomain {
    pub n: usize,
    pub gamma: f64,
    pub sigma: f64,
}

impl CuspDomain {
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("n >= 2 violated (n = {n})")));
        }
        if !(gamma.is_finite() && gamma >= n as f64) {
            return Err(Error::InvalidParams(format!(
                "gamma >= n violated (gamma = {gamma}, n = {n})"
            )));
        }
        Ok(Self { n, gamma, sigma: (gamma - 1.0) / (n as f64 - 1.0) })
    }

    pub fn from_params(params: &ProblemParams) -> Self {
        Self { n: params.n, gamma: params.gamma, sigma: params.sigma() }
    }
}

impl FiberDomain for CuspDomain {
    fn dim(&self) -> usize {
        self.n
    }

    fn sigma(&self) -> f64 {
        self.sigma
    }

    fn volume(&self) -> f64 {
        1.0 / self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PyramidDomain {
    pub n: usize,
}

impl PyramidDomain {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("n >= 2 violated (n = {n})")));
        }
        Ok(Self { n })
    }

    /// The simplex volume `1/n!`, which differs from the integrated volume
    /// `1/n` once `n >= 3`. Kept for cross-reference with the verbatim bound.
    pub fn simplex_volume(&self) -> f64 {
        1.0 / (1..=self.n).map(|k| k as f64).product::<f64>()
    }
}

impl FiberDomain for PyramidDomain {
    fn dim(&self) -> usize {
        self.n
    }

    fn sigma(&self) -> f64 {
        1.0
    }

    fn side(&self, t: f64) -> f64 {
        t
    }

    fn volume(&self) -> f64 {
        1.0 / self.n as f64
    }

    fn diameter(&self) -> f64 {
        (self.n as f64).sqrt()
    }
}
