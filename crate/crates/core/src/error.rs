use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter constraint is violated; the message names it.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    /// `a` exceeds `a_max`, so the composition operator is unbounded.
    #[error("composition operator unbounded for this a: a = {a} > a_max = {a_max}")]
    Inadmissible { a: f64, a_max: f64 },

    #[error("integrand not finite at quadrature node")]
    NonFiniteIntegrand,

    #[error("invalid quadrature scheme: {0}")]
    InvalidScheme(String),

    /// The weight ratio is not in the required Lebesgue class.
    #[error("divergent ratio norm: fibre exponent {exponent} <= -1 (weight not admissible for chosen q)")]
    DivergentRatioNorm { exponent: f64 },

    #[error("weight not locally integrable: fibre exponent {exponent} <= -1")]
    NotLocallyIntegrable { exponent: f64 },

    #[error("FEM path supports n=2 only (got n={0})")]
    UnsupportedDimension(usize),

    #[error("invalid mesh request: {0}")]
    InvalidMesh(String),

    #[error("quotient undefined for a constant field")]
    ConstantField,

    #[error("weight has zero mass on the mesh")]
    ZeroWeightMass,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot parse weight spec {0:?}; expected unit | optimal | family:A | power:C,E")]
    WeightSyntax(String),
}
