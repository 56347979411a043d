//! Weights on the cusp. Every supported weight is a height power
//! `c · x_n^e`, so integrability questions reduce to exponent arithmetic.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::{Error, ProblemParams, Result};

/// Weight selector, resolved against a problem by [`WeightSpec::resolve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `w_{γ,a}(x) = (1/a) x_n^{n/a-γ}`, the inverse Jacobian of `φ_a`.
    Family { a: f64 },
    /// `w_γ(x) = ((γ-p)/(n-p)) x_n^{p(γ-n)/(n-p)}`, i.e. the family at `a_max`.
    Optimal,
    Unit,
    Power { coeff: f64, exponent: f64 },
}

/// `coeff · x_n^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerWeight {
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerWeight {
    pub const UNIT: PowerWeight = PowerWeight { coeff: 1.0, exponent: 0.0 };

    /// Weight at a point; only the last coordinate matters.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        self.at_height(x[x.len() - 1])
    }

    #[inline]
    pub fn at_height(&self, t: f64) -> f64 {
        if self.exponent == 0.0 {
            self.coeff
        } else {
            self.coeff * t.powf(self.exponent)
        }
    }

    /// Exponent of `t` in `∫ w dx` after integrating out a cube fibre of side
    /// `t^σ` in `n` dimensions: `e + γ - 1`.
    pub fn fiber_exponent(&self, gamma: f64) -> f64 {
        self.exponent + gamma - 1.0
    }

    pub fn is_locally_integrable(&self, gamma: f64) -> bool {
        self.coeff >= 0.0 && self.fiber_exponent(gamma) > -1.0
    }

    /// `∫_{Ω_γ} w dx = c / (e + γ)`, when finite.
    pub fn mass(&self, gamma: f64) -> Result<f64> {
        let e = self.fiber_exponent(gamma);
        if e <= -1.0 {
            return Err(Error::NotLocallyIntegrable { exponent: e });
        }
        Ok(self.coeff / (e + 1.0))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { coeff: self.coeff * c, exponent: self.exponent }
    }
}

impl WeightSpec {
    /// Resolve to a concrete power weight for `params`.
    ///
    /// `Family` and `Optimal` need admissible parameters; `Optimal` resolves
    /// through `Family { a: a_max }`, so the two agree bit for bit.
    pub fn resolve(&self, params: &ProblemParams) -> Result<PowerWeight> {
        let nf = params.n as f64;
        let w = match *self {
            WeightSpec::Family { a } => {
                if !(a > 0.0) {
                    return Err(Error::InvalidParams(format!("a > 0 violated (a = {a})")));
                }
                PowerWeight { coeff: 1.0 / a, exponent: nf / a - params.gamma }
            }
            WeightSpec::Optimal => {
                let a_max = params.derive()?.a_max;
                return WeightSpec::Family { a: a_max }.resolve(params);
            }
            WeightSpec::Unit => PowerWeight::UNIT,
            WeightSpec::Power { coeff, exponent } => {
                if !(coeff >= 0.0 && coeff.is_finite() && exponent.is_finite()) {
                    return Err(Error::InvalidParams(format!(
                        "power weight needs finite c >= 0 and finite e (c = {coeff}, e = {exponent})"
                    )));
                }
                PowerWeight { coeff, exponent }
            }
        };
        if !w.is_locally_integrable(params.gamma) {
            return Err(Error::NotLocallyIntegrable { exponent: w.fiber_exponent(params.gamma) });
        }
        Ok(w)
    }

    pub fn value(&self, params: &ProblemParams, x: &[f64]) -> Result<f64> {
        Ok(self.resolve(params)?.value(x))
    }
}

/// `w_γ` straight from its printed formula, for cross-checking `Optimal`.
pub fn optimal_weight_formula(params: &ProblemParams) -> PowerWeight {
    let nf = params.n as f64;
    let (p, g) = (params.p, params.gamma);
    PowerWeight { coeff: (g - p) / (nf - p), exponent: p * (g - nf) / (nf - p) }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Family { a } => write!(f, "family:{a}"),
            WeightSpec::Optimal => f.write_str("optimal"),
            WeightSpec::Unit => f.write_str("unit"),
            WeightSpec::Power { coeff, exponent } => write!(f, "power:{coeff},{exponent}"),
        }
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::WeightSyntax(s.to_string());
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let s = s.trim();
        match s.split_once(':') {
            None => match s {
                "unit" => Ok(WeightSpec::Unit),
                "optimal" => Ok(WeightSpec::Optimal),
                _ => Err(bad()),
            },
            Some(("family", a)) => Ok(WeightSpec::Family { a: num(a)? }),
            Some(("power", rest)) => {
                let (c, e) = rest.split_once(',').ok_or_else(bad)?;
                Ok(WeightSpec::Power { coeff: num(c)?, exponent: num(e)? })
            }
            Some(_) => Err(bad()),
        }
    }
}
