use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use cusp_eigen::bounds::{bound_report, mu_lower_general_weight, mu_lower_main, mu_lower_pp, BoundPair, BoundReport};
use cusp_eigen::eigen::{minimize_rq, EigenResult};
use cusp_eigen::mesh::Mesh;
use cusp_eigen::quadrature::ratio_norm;
use cusp_eigen::verify::{compare_bound, default_suite, CheckRecord, SuiteConfig};
use cusp_eigen::{CuspDomain, Error, ProblemParams, WeightSpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

/// Text produced by a command plus the exit status it should end with.
pub struct Output {
    pub text: String,
    pub status: Result<(), CliError>,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, status: Ok(()) }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    f(&mut out).and_then(|_| out.flush()).map_err(io)
}

#[derive(Serialize)]
struct GeneralWeight {
    weight: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_lower: Option<BoundPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct BoundsOutput {
    #[serde(flatten)]
    report: BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    general_weight: Option<GeneralWeight>,
}

pub fn bounds(cfg: &RunConfig) -> Result<Output, CliError> {
    let params = cfg.params()?;
    let report = bound_report(&params)?;
    let general_weight = if params.p < params.q {
        let weight = cfg.weight();
        let mut g = GeneralWeight { weight: weight.to_string(), ratio_norm: None, mu_lower: None, note: None };
        match ratio_norm(&weight, &params, &cfg.scheme()) {
            Ok(r) => {
                g.ratio_norm = Some(r);
                g.mu_lower = Some(mu_lower_general_weight(&params, r)?);
            }
            Err(e @ Error::DivergentRatioNorm { .. }) => g.note = Some(e.to_string()),
            Err(e) => return Err(e.into()),
        }
        Some(g)
    } else {
        None
    };
    Ok(Output::ok(json(&BoundsOutput { report, general_weight })))
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    params: &'a ProblemParams,
    weight: String,
    #[serde(flatten)]
    result: &'a EigenResult,
    vertices: usize,
    triangles: usize,
    /// Closed-form lower bound, when the parameters are in its range.
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_lower: Option<BoundPair>,
}

fn run_solver(cfg: &RunConfig, params: &ProblemParams, weight: &WeightSpec) -> Result<EigenResult, CliError> {
    if params.n != 2 {
        return Err(Error::UnsupportedDimension(params.n).into());
    }
    let domain = CuspDomain::new(params.n, params.gamma)?;
    let mesh = Arc::new(Mesh::build(&domain, cfg.layers(), cfg.beta(params.sigma()))?);
    if let Some(path) = &cfg.dump_mesh {
        write_file(path, |out| mesh.write_text(out))?;
    }
    let result = minimize_rq(mesh, params, weight, &cfg.solver())?;
    if let Some(path) = &cfg.dump_eigenfunction {
        write_file(path, |out| result.eigenfunction.write_text(out))?;
    }
    Ok(result)
}

/// The pair matching a solve: the `p = q` bound when it applies.
fn applicable_bound(params: &ProblemParams) -> Option<BoundPair> {
    if !params.is_admissible() {
        return None;
    }
    if params.p == params.q {
        mu_lower_pp(params).ok()
    } else {
        mu_lower_main(params).ok()
    }
}

pub fn solve(cfg: &RunConfig) -> Result<Output, CliError> {
    let params = cfg.solver_params()?;
    let weight = cfg.weight();
    let result = run_solver(cfg, &params, &weight)?;
    let mu_lower = if weight == WeightSpec::Optimal { applicable_bound(&params) } else { None };
    let out = SolveOutput {
        params: &params,
        weight: weight.to_string(),
        result: &result,
        vertices: result.eigenfunction.mesh().num_vertices(),
        triangles: result.eigenfunction.mesh().num_triangles(),
        mu_lower,
    };
    let status = if result.converged { Ok(()) } else { Err(CliError::NotConverged) };
    Ok(Output { text: json(&out), status })
}

pub fn verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let params = cfg.params()?;
    let suite = SuiteConfig {
        a_values: cfg.a.into_iter().collect(),
        seed: cfg.seed.unwrap_or(0),
        scheme: cfg.scheme(),
        ..SuiteConfig::default()
    };
    let mut records = default_suite(&params, &suite)?;
    if cfg.with_solve {
        let result = run_solver(cfg, &params, &WeightSpec::Optimal)?;
        records.extend(compare_bound(&params, "main", &result, &mu_lower_main(&params)?));
        if params.p == params.q {
            records.extend(compare_bound(&params, "pp", &result, &mu_lower_pp(&params)?));
        }
    }
    let mut text = String::from("check,params,lhs,rhs,margin,tolerance,pass\n");
    for r in &records {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            csv_field(&r.check),
            csv_field(&r.params),
            num(r.lhs),
            num(r.rhs),
            num(r.margin),
            num(r.tolerance),
            r.pass.as_str()
        ));
    }
    let status = if records.iter().any(CheckRecord::failed) { Err(CliError::VerificationFailed) } else { Ok(()) };
    Ok(Output { text, status })
}

struct SweepRow {
    n: usize,
    p: f64,
    q: f64,
    gamma: f64,
    report: Option<BoundReport>,
    mu_h: Option<f64>,
    error: String,
}

fn sweep_point(cfg: &RunConfig, n: usize, p: f64, q: f64, gamma: f64) -> SweepRow {
    let mut row = SweepRow { n, p, q, gamma, report: None, mu_h: None, error: String::new() };
    let params = match ProblemParams::new(n, p, q, gamma) {
        Ok(params) => params,
        Err(e) => {
            row.error = e.to_string();
            return row;
        }
    };
    match bound_report(&params) {
        Ok(r) => row.report = Some(r),
        Err(e) => row.error = e.to_string(),
    }
    if cfg.with_solve && row.error.is_empty() {
        match run_solver(cfg, &params, &WeightSpec::Optimal) {
            Ok(r) if r.converged => row.mu_h = Some(r.mu_h),
            Ok(r) => {
                row.mu_h = Some(r.mu_h);
                row.error = "solver did not converge".into();
            }
            Err(e) => row.error = e.to_string(),
        }
    }
    row
}

fn grid(name: &str, explicit: &Option<Vec<f64>>, single: Option<f64>) -> Result<Vec<f64>, CliError> {
    let values = match (explicit, single) {
        (Some(v), _) => v.clone(),
        (None, Some(x)) => vec![x],
        (None, None) => Vec::new(),
    };
    if values.is_empty() {
        return Err(CliError::Validation(format!("empty {name} grid")));
    }
    Ok(values)
}

pub fn sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = cfg.dimension();
    let ps = grid("p", &cfg.p_grid, cfg.p)?;
    let single_gamma = match (cfg.gamma, cfg.sigma) {
        (None, None) => None,
        _ => Some(cfg.gamma()?),
    };
    let gammas = grid("gamma", &cfg.gamma_grid, single_gamma)?;
    if cfg.q_grid.as_ref().is_some_and(Vec::is_empty) {
        return Err(CliError::Validation("empty q grid".into()));
    }
    let mut points = Vec::new();
    for &p in &ps {
        let qs = cfg.q_grid.clone().unwrap_or_else(|| vec![cfg.q_for(p)]);
        for &q in &qs {
            for &gamma in &gammas {
                points.push((p, q, gamma));
            }
        }
    }
    let rows: Vec<SweepRow> = points.par_iter().map(|&(p, q, g)| sweep_point(cfg, n, p, q, g)).collect();

    let mut text = String::from("n,p,q,gamma,a_max,K_p,B_convex,B_weighted,mu_lower_canonical,mu_lower_paper");
    if cfg.with_solve {
        text.push_str(",mu_h");
    }
    text.push_str(",error\n");
    for r in &rows {
        let mut fields = vec![r.n.to_string(), r.p.to_string(), r.q.to_string(), r.gamma.to_string()];
        match &r.report {
            Some(rep) => fields.extend(
                [rep.a_max, rep.k_p, rep.b_convex, rep.b_weighted, rep.mu_lower_canonical, rep.mu_lower_paper_verbatim]
                    .map(num),
            ),
            None => fields.extend(std::iter::repeat_n(String::new(), 6)),
        }
        if cfg.with_solve {
            fields.push(r.mu_h.map(num).unwrap_or_default());
        }
        fields.push(csv_field(&r.error));
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    Ok(Output::ok(text))
}
