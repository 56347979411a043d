//! Problem parameters `(n, p, q, γ)` and the quantities derived from them.

use serde::Serialize;

use crate::{Error, Result};

/// Dimension, exponents and cusp parameter of one eigenvalue problem.
///
/// [`ProblemParams::new`] enforces the full admissible range
/// `1 < p < n`, `p <= q < p*`, `n <= γ`. The discrete solver also accepts
/// `p >= n` (used for Laplacian oracle runs); such values are built with
/// [`ProblemParams::relaxed`] and refuse to produce [`DerivedParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemParams {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    #[serde(skip)]
    relaxed: bool,
}

/// Quantities derived from [`ProblemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    /// Cusp exponent, `(γ-1)/(n-1)`.
    pub sigma: f64,
    /// Largest admissible stretching exponent, `(n-p)/(γ-p)`.
    pub a_max: f64,
    /// `1/p - 1/q`.
    pub delta: f64,
    /// Sobolev conjugate `np/(n-p)`.
    pub p_star: f64,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

impl ProblemParams {
    /// Validated parameters for the closed-form bounds.
    pub fn new(n: usize, p: f64, q: f64, gamma: f64) -> Result<Self> {
        let params = Self::relaxed(n, p, q, gamma)?;
        params.check_strict()?;
        Ok(params)
    }

    /// Same as [`ProblemParams::new`] with `γ = σ(n-1) + 1`.
    pub fn from_sigma(n: usize, p: f64, q: f64, sigma: f64) -> Result<Self> {
        Self::new(n, p, q, gamma_from_sigma(n, sigma)?)
    }

    /// Parameters for the discrete solver only: `p < n` and `q < p*` are not
    /// enforced.
    pub fn relaxed(n: usize, p: f64, q: f64, gamma: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("n >= 2 violated (n = {n})")));
        }
        for (name, v) in [("p", p), ("q", q), ("gamma", gamma)] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite")));
            }
        }
        if p <= 1.0 {
            return Err(invalid(format!("p > 1 violated (p = {p})")));
        }
        if q < p {
            return Err(invalid(format!("q >= p violated (q = {q}, p = {p})")));
        }
        if gamma < n as f64 {
            return Err(invalid(format!("gamma >= n violated (gamma = {gamma}, n = {n})")));
        }
        Ok(Self { n, p, q, gamma, relaxed: true })
    }

    fn check_strict(mut self) -> Result<Self> {
        let nf = self.n as f64;
        if self.p >= nf {
            return Err(invalid(format!("p < n violated (p = {}, n = {})", self.p, self.n)));
        }
        let p_star = nf * self.p / (nf - self.p);
        if self.q >= p_star {
            return Err(invalid(format!("q >= p* = {p_star} (q = {})", self.q)));
        }
        self.relaxed = false;
        Ok(self)
    }

    /// True when the parameters satisfy the full admissible range.
    pub fn is_admissible(&self) -> bool {
        !self.relaxed || self.check_strict().is_ok()
    }

    /// Cusp exponent `σ = (γ-1)/(n-1)`; defined for relaxed parameters too.
    pub fn sigma(&self) -> f64 {
        (self.gamma - 1.0) / (self.n as f64 - 1.0)
    }

    /// The same problem with a different `q`, re-validated.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        if self.relaxed {
            Self::relaxed(self.n, self.p, q, self.gamma)
        } else {
            Self::new(self.n, self.p, q, self.gamma)
        }
    }

    pub fn derive(&self) -> Result<DerivedParams> {
        derive_params(self)
    }
}

/// `γ = σ(n-1) + 1`, rejecting inward cusps.
pub fn gamma_from_sigma(n: usize, sigma: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma >= 1.0) {
        return Err(invalid(format!("sigma >= 1 violated (sigma = {sigma})")));
    }
    Ok(sigma * (n as f64 - 1.0) + 1.0)
}

pub fn derive_params(params: &ProblemParams) -> Result<DerivedParams> {
    let params = params.check_strict()?;
    let nf = params.n as f64;
    let (p, q, gamma) = (params.p, params.q, params.gamma);
    Ok(DerivedParams {
        sigma: params.sigma(),
        a_max: (nf - p) / (gamma - p),
        delta: 1.0 / p - 1.0 / q,
        p_star: nf * p / (nf - p),
    })
}
