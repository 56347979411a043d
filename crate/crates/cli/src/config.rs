//! Run configuration shared by the command-line flags and the `key=value`
//! config file.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use cusp_eigen::eigen::SolverConfig;
use cusp_eigen::params::gamma_from_sigma;
use cusp_eigen::quadrature::{default_grading, QuadratureScheme};
use cusp_eigen::{ProblemParams, WeightSpec};

use crate::CliError;

/// Every setting a run can take. Unset fields fall back to the config file
/// and then to defaults.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct RunConfig {
    /// Dimension.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Defaults to `p`.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, conflicts_with = "sigma")]
    pub gamma: Option<f64>,
    /// Cusp exponent; `gamma = sigma (n - 1) + 1`.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// unit | optimal | family:A | power:C,E
    #[arg(long)]
    pub weight: Option<WeightSpec>,
    /// Mesh layers.
    #[arg(long = "M")]
    pub layers: Option<usize>,
    /// Mesh grading exponent; defaults to max(2, sigma).
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Worker threads; 0 picks one per core.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Map parameter for `verify`.
    #[arg(long)]
    pub a: Option<f64>,
    /// Fibre levels of the Gauss quadrature used by `verify`.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Cross-section points per direction of the Gauss quadrature.
    #[arg(long)]
    pub cross: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub gamma_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub q_grid: Option<Vec<f64>>,
    /// Also run the solver (`sweep`, `verify`).
    #[arg(long)]
    pub with_solve: bool,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dump_mesh: Option<PathBuf>,
    #[arg(long)]
    pub dump_eigenfunction: Option<PathBuf>,
}

fn list(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Validation(format!("config key {key}: {e}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl RunConfig {
    /// Parse the line-oriented `key = value` format; `#` starts a comment.
    pub fn parse_file(text: &str) -> Result<Self, CliError> {
        let mut c = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("config line {}: expected key=value", i + 1)))?;
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            let k = key.as_str();
            match k {
                "n" => c.n = Some(parse(k, value)?),
                "p" => c.p = Some(parse(k, value)?),
                "q" => c.q = Some(parse(k, value)?),
                "gamma" => c.gamma = Some(parse(k, value)?),
                "sigma" => c.sigma = Some(parse(k, value)?),
                "weight" => c.weight = Some(parse(k, value)?),
                "M" => c.layers = Some(parse(k, value)?),
                "beta" => c.beta = Some(parse(k, value)?),
                "seed" => c.seed = Some(parse(k, value)?),
                "restarts" => c.restarts = Some(parse(k, value)?),
                "max-iter" => c.max_iter = Some(parse(k, value)?),
                "workers" => c.workers = Some(parse(k, value)?),
                "a" => c.a = Some(parse(k, value)?),
                "levels" => c.levels = Some(parse(k, value)?),
                "cross" => c.cross = Some(parse(k, value)?),
                "gamma-grid" => c.gamma_grid = Some(parse_list(k, value)?),
                "p-grid" => c.p_grid = Some(parse_list(k, value)?),
                "q-grid" => c.q_grid = Some(parse_list(k, value)?),
                "with-solve" => c.with_solve = parse(k, value)?,
                "out" => c.out = Some(value.into()),
                "dump-mesh" => c.dump_mesh = Some(value.into()),
                "dump-eigenfunction" => c.dump_eigenfunction = Some(value.into()),
                _ => return Err(CliError::Validation(format!("unknown config key {key}"))),
            }
        }
        Ok(c)
    }

    /// Inverse of [`RunConfig::parse_file`] for the fields that are set.
    pub fn to_file(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        if let Some(v) = self.n {
            put("n", v.to_string());
        }
        if let Some(v) = self.p {
            put("p", v.to_string());
        }
        if let Some(v) = self.q {
            put("q", v.to_string());
        }
        if let Some(v) = self.gamma {
            put("gamma", v.to_string());
        }
        if let Some(v) = self.sigma {
            put("sigma", v.to_string());
        }
        if let Some(v) = &self.weight {
            put("weight", v.to_string());
        }
        if let Some(v) = self.layers {
            put("M", v.to_string());
        }
        if let Some(v) = self.beta {
            put("beta", v.to_string());
        }
        if let Some(v) = self.seed {
            put("seed", v.to_string());
        }
        if let Some(v) = self.restarts {
            put("restarts", v.to_string());
        }
        if let Some(v) = self.max_iter {
            put("max-iter", v.to_string());
        }
        if let Some(v) = self.workers {
            put("workers", v.to_string());
        }
        if let Some(v) = self.a {
            put("a", v.to_string());
        }
        if let Some(v) = self.levels {
            put("levels", v.to_string());
        }
        if let Some(v) = self.cross {
            put("cross", v.to_string());
        }
        if let Some(v) = &self.gamma_grid {
            put("gamma-grid", list(v));
        }
        if let Some(v) = &self.p_grid {
            put("p-grid", list(v));
        }
        if let Some(v) = &self.q_grid {
            put("q-grid", list(v));
        }
        if self.with_solve {
            put("with-solve", "true".into());
        }
        if let Some(v) = &self.out {
            put("out", v.display().to_string());
        }
        if let Some(v) = &self.dump_mesh {
            put("dump-mesh", v.display().to_string());
        }
        if let Some(v) = &self.dump_eigenfunction {
            put("dump-eigenfunction", v.display().to_string());
        }
        s
    }

    /// Fields set here win over `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            n: self.n.or(base.n),
            p: self.p.or(base.p),
            q: self.q.or(base.q),
            // gamma and sigma are alternatives: a flag for either replaces both.
            gamma: if self.gamma.is_some() || self.sigma.is_some() { self.gamma } else { base.gamma },
            sigma: if self.gamma.is_some() || self.sigma.is_some() { self.sigma } else { base.sigma },
            weight: self.weight.or(base.weight),
            layers: self.layers.or(base.layers),
            beta: self.beta.or(base.beta),
            seed: self.seed.or(base.seed),
            restarts: self.restarts.or(base.restarts),
            max_iter: self.max_iter.or(base.max_iter),
            workers: self.workers.or(base.workers),
            a: self.a.or(base.a),
            levels: self.levels.or(base.levels),
            cross: self.cross.or(base.cross),
            gamma_grid: self.gamma_grid.or(base.gamma_grid),
            p_grid: self.p_grid.or(base.p_grid),
            q_grid: self.q_grid.or(base.q_grid),
            with_solve: self.with_solve || base.with_solve,
            out: self.out.or(base.out),
            dump_mesh: self.dump_mesh.or(base.dump_mesh),
            dump_eigenfunction: self.dump_eigenfunction.or(base.dump_eigenfunction),
        }
    }

    pub fn dimension(&self) -> usize {
        self.n.unwrap_or(2)
    }

    pub fn p(&self) -> Result<f64, CliError> {
        self.p.ok_or_else(|| CliError::Validation("--p is required".into()))
    }

    pub fn q_for(&self, p: f64) -> f64 {
        self.q.unwrap_or(p)
    }

    pub fn gamma(&self) -> Result<f64, CliError> {
        match (self.gamma, self.sigma) {
            (Some(_), Some(_)) => Err(CliError::Validation("give --gamma or --sigma, not both".into())),
            (Some(g), None) => Ok(g),
            (None, Some(s)) => Ok(gamma_from_sigma(self.dimension(), s)?),
            (None, None) => Err(CliError::Validation("--gamma or --sigma is required".into())),
        }
    }

    /// Parameters in the full admissible range.
    pub fn params(&self) -> Result<ProblemParams, CliError> {
        let p = self.p()?;
        Ok(ProblemParams::new(self.dimension(), p, self.q_for(p), self.gamma()?)?)
    }

    /// Parameters for the solver, where `p >= n` and `q >= p*` are allowed.
    pub fn solver_params(&self) -> Result<ProblemParams, CliError> {
        let p = self.p()?;
        Ok(ProblemParams::relaxed(self.dimension(), p, self.q_for(p), self.gamma()?)?)
    }

    pub fn weight(&self) -> WeightSpec {
        self.weight.unwrap_or(WeightSpec::Optimal)
    }

    pub fn layers(&self) -> usize {
        self.layers.unwrap_or(32)
    }

    pub fn beta(&self, sigma: f64) -> f64 {
        self.beta.unwrap_or_else(|| default_grading(sigma))
    }

    pub fn solver(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            seed: self.seed.unwrap_or(d.seed),
            restarts: self.restarts.unwrap_or(d.restarts),
            max_iterations: self.max_iter.unwrap_or(d.max_iterations),
            ..d
        }
    }

    pub fn scheme(&self) -> QuadratureScheme {
        QuadratureScheme::FiberGauss {
            levels: self.levels.unwrap_or(48),
            cross: self.cross.unwrap_or(24),
            beta: None,
        }
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip() {
        let c = RunConfig {
            n: Some(2),
            p: Some(1.5),
            q: Some(2.0),
            sigma: Some(2.0),
            weight: Some(WeightSpec::Power { coeff: 0.5, exponent: 1.25 }),
            layers: Some(16),
            seed: Some(7),
            gamma_grid: Some(vec![2.5, 3.0, 0.1 + 0.2]),
            with_solve: true,
            dump_mesh: Some("m.txt".into()),
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::parse_file(&c.to_file()).unwrap(), c);
    }

    #[test]
    fn comments_and_errors() {
        let c = RunConfig::parse_file("# header\n p = 1.5 # trailing\n\nmax_iter=10\n").unwrap();
        assert_eq!((c.p, c.max_iter), (Some(1.5), Some(10)));
        assert!(RunConfig::parse_file("colour = red").is_err());
        assert!(RunConfig::parse_file("p 1.5").is_err());
        assert!(RunConfig::parse_file("p = x").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig { p: Some(1.2), gamma: Some(4.0), seed: Some(1), ..RunConfig::default() };
        let flags = RunConfig { p: Some(1.5), sigma: Some(2.0), ..RunConfig::default() };
        let merged = flags.over(file);
        assert_eq!(merged.p, Some(1.5));
        assert_eq!(merged.seed, Some(1));
        assert_eq!((merged.gamma, merged.sigma), (None, Some(2.0)));
        assert_eq!(merged.gamma().unwrap(), 3.0);
    }
}
