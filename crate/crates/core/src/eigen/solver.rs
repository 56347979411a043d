use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::problem::DiscreteProblem;
use crate::fem::{element_gradient, FemFunction, WeightedQuadrature};
use crate::linalg::{
    assemble_scaled_stiffness, assemble_stiffness, assemble_weighted_mass, BandCholesky, BandMatrix,
};
use crate::mesh::{Mesh, MeshDescriptor};
use crate::{Error, PowerWeight, ProblemParams, Result, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// First trial step of the line search.
    pub initial_step: f64,
    pub backtrack: f64,
    /// Armijo constant.
    pub sufficient_decrease: f64,
    /// A step counts as stalled when the relative decrease is below this.
    pub stall_tolerance: f64,
    /// Consecutive stalled steps that end a run.
    pub stall_window: usize,
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// `ε` in `(|∇u|² + ε²)^{(p-2)/2}`; never enters the reported eigenvalue.
    pub regularization: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            backtrack: 0.5,
            sufficient_decrease: 1e-4,
            stall_tolerance: 1e-10,
            stall_window: 25,
            max_iterations: 50_000,
            restarts: 3,
            seed: 0,
            regularization: 1e-10,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        let positive = self.initial_step > 0.0
            && self.backtrack > 0.0
            && self.backtrack < 1.0
            && self.sufficient_decrease > 0.0
            && self.sufficient_decrease < 1.0
            && self.stall_tolerance > 0.0
            && self.regularization >= 0.0;
        if !positive || self.stall_window == 0 || self.max_iterations == 0 || self.restarts == 0 {
            return Err(Error::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    /// Unregularised Rayleigh quotient of `eigenfunction`.
    pub mu_h: f64,
    /// Recentred, unit weighted-`q`-norm minimiser.
    #[serde(skip)]
    pub eigenfunction: FemFunction,
    pub iterations: usize,
    pub restarts_used: usize,
    /// Restart that produced the reported minimiser.
    pub best_restart: usize,
    /// Relative decrease of the last accepted step.
    pub residual: f64,
    pub converged: bool,
    pub mesh: MeshDescriptor,
    /// Quotient after every accepted step of the winning restart.
    #[serde(skip)]
    pub history: Vec<f64>,
}

struct RunOutcome {
    values: Vec<f64>,
    quotient: f64,
    iterations: usize,
    residual: f64,
    converged: bool,
    history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn initial_field(mesh: &Mesh, restart: usize, seed: u64) -> Vec<f64> {
    match restart {
        0 => mesh.vertices().iter().map(|v| v[1]).collect(),
        1 => mesh.vertices().iter().map(|v| v[0]).collect(),
        r => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            (0..mesh.num_vertices()).map(|_| StandardNormal.sample(&mut rng)).collect()
        }
    }
}

/// Minimise the discrete Rayleigh quotient over the constraint set.
///
/// Each iteration takes a preconditioned gradient step (the Riesz
/// representative of the gradient for `K_ρ + M`, see [`preconditioner`]),
/// combined with the previous direction by Polak–Ribière+,
/// chooses its length by Armijo backtracking, and then recentres and
/// rescales the iterate to unit weighted `q`-norm. Restarts start from the
/// `x_2` and `x_1` interpolants and then from Gaussian fields seeded with
/// `seed + restart`; the smallest quotient wins, ties going to the lower
/// restart index.
pub fn minimize_rq(
    mesh: Arc<Mesh>,
    params: &ProblemParams,
    w: &WeightSpec,
    config: &SolverConfig,
) -> Result<EigenResult> {
    config.validate()?;
    if mesh.num_vertices() < 3 {
        return Err(Error::InvalidMesh("need at least three vertices".into()));
    }
    let weight = w.resolve(params)?;
    let problem = DiscreteProblem::new(mesh.clone(), &weight, params.p, params.q)?;
    let unit = WeightedQuadrature::new(&mesh, &PowerWeight::UNIT);
    let mass = assemble_weighted_mass(&mesh, &unit);

    let runs: Vec<Result<RunOutcome>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| descend(&problem, &mass, initial_field(&mesh, r, config.seed), config))
        .collect();

    let mut best: Option<(usize, RunOutcome)> = None;
    let mut total_iterations = 0;
    for (r, run) in runs.into_iter().enumerate() {
        let run = run?;
        total_iterations += run.iterations;
        let better = match &best {
            None => true,
            Some((_, b)) => run.quotient < b.quotient - 1e-12 * b.quotient.abs(),
        };
        if better {
            best = Some((r, run));
        }
    }
    let (best_restart, run) = best.expect("at least one restart");
    let mu_h = problem.evaluate(&run.values, 0.0)?.quotient;
    Ok(EigenResult {
        mu_h,
        eigenfunction: FemFunction::new(mesh.clone(), run.values)?,
        iterations: total_iterations,
        restarts_used: config.restarts,
        best_restart,
        residual: run.residual,
        converged: run.converged,
        mesh: mesh.descriptor(),
        history: run.history,
    })
}

/// Iterations between refreshes of the preconditioner.
const REFRESH: usize = 10;

/// `p (K_ρ + M)` with `ρ_e = (|∇u_e|² + ε²)^{(p-2)/2}`, the lagged-coefficient
/// linearisation of the p-Laplacian. The factor `p` matches the Hessian of
/// the energy, so a unit step damps high-frequency error instead of
/// reflecting it. The weight can vanish to high order at
/// the tip and graded cusp meshes carry needle elements there, so the mass
/// is unweighted and small pivots are floored.
fn preconditioner(problem: &DiscreteProblem, mass: &BandMatrix, u: &[f64], eps: f64) -> Result<BandCholesky> {
    let mesh = problem.mesh();
    let p = problem.p();
    let rho: Vec<f64> = (0..mesh.num_triangles())
        .map(|e| {
            let [gx, gy] = element_gradient(mesh, u, e);
            (gx * gx + gy * gy + eps * eps).powf(0.5 * p - 1.0)
        })
        .collect();
    assemble_scaled_stiffness(mesh, &rho).add_scaled(1.0, mass).scaled(p).modified_cholesky(1e-12)
}

fn descend(
    problem: &DiscreteProblem,
    mass: &BandMatrix,
    start: Vec<f64>,
    config: &SolverConfig,
) -> Result<RunOutcome> {
    let eps = config.regularization;
    let mut u = problem.project(&start)?;
    let mut precond = preconditioner(problem, mass, &u, eps)?;
    let mut eval = problem.evaluate(&u, eps)?;
    let mut history = vec![eval.quotient];
    let mut prev: Option<(Vec<f64>, Vec<f64>, Vec<f64>)> = None; // (g, z, d)
    let mut step = config.initial_step;
    let mut stalled = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        if iterations > 0 && iterations % REFRESH == 0 {
            precond = preconditioner(problem, mass, &u, eps)?;
            prev = None;
        }
        let g = problem.gradient(&u, &eval, eps);
        let z = precond.solve(&g);
        let mut direction: Vec<f64> = z.iter().map(|v| -v).collect();
        let mut steepest = true;
        if let Some((g0, z0, d0)) = &prev {
            let denom = dot(g0, z0);
            let beta = if denom > 0.0 { (dot(&z, &g) - dot(&z, g0)) / denom } else { 0.0 };
            if beta > 0.0 {
                let candidate: Vec<f64> = direction.iter().zip(d0).map(|(d, p)| d + beta * p).collect();
                if dot(&candidate, &g) < 0.0 {
                    direction = candidate;
                    steepest = false;
                }
            }
        }

        let accepted = line_search(problem, &u, &eval, &g, &direction, step, config)?;
        let (alpha, trial) = match accepted {
            Some(found) => found,
            None if !steepest => {
                // Drop the conjugate term and retry along -z.
                let d: Vec<f64> = z.iter().map(|v| -v).collect();
                match line_search(problem, &u, &eval, &g, &d, config.initial_step, config)? {
                    Some(found) => {
                        direction = d;
                        found
                    }
                    None => {
                        converged = true;
                        residual = 0.0;
                        break;
                    }
                }
            }
            None => {
                // No decrease along the preconditioned gradient: stationary
                // to working precision.
                converged = true;
                residual = 0.0;
                break;
            }
        };

        let scale = trial.moment.powf(1.0 / problem.q());
        let next: Vec<f64> = trial_values(&u, &direction, alpha)
            .iter()
            .map(|v| (v - trial.shift) / scale)
            .collect();
        let next_eval = problem.evaluate(&next, eps)?;
        if next_eval.quotient > eval.quotient {
            // Rescaling undid a decrease that was below rounding.
            converged = true;
            residual = 0.0;
            break;
        }
        iterations += 1;
        let decrease = (eval.quotient - next_eval.quotient) / eval.quotient;
        residual = decrease;
        history.push(next_eval.quotient);

        let d_scaled: Vec<f64> = direction.iter().map(|v| v / scale).collect();
        prev = Some((g, z, d_scaled));
        u = next;
        eval = next_eval;
        step = (2.0 * alpha).min(config.initial_step);

        if decrease < config.stall_tolerance {
            stalled += 1;
            if stalled >= config.stall_window {
                converged = true;
                break;
            }
        } else {
            stalled = 0;
        }
    }

    Ok(RunOutcome { quotient: eval.quotient, values: u, iterations, residual, converged, history })
}

fn trial_values(u: &[f64], d: &[f64], alpha: f64) -> Vec<f64> {
    u.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}

/// Armijo backtracking; returns the step and the evaluation at `u + αd`.
fn line_search(
    problem: &DiscreteProblem,
    u: &[f64],
    eval: &super::problem::Evaluation,
    g: &[f64],
    d: &[f64],
    first: f64,
    config: &SolverConfig,
) -> Result<Option<(f64, super::problem::Evaluation)>> {
    let slope = dot(g, d);
    if !(slope < 0.0) {
        return Ok(None);
    }
    let mut alpha = first;
    for _ in 0..60 {
        let trial = trial_values(u, d, alpha);
        match problem.evaluate(&trial, config.regularization) {
            Ok(t) if t.quotient <= eval.quotient + config.sufficient_decrease * alpha * slope => {
                return Ok(Some((alpha, t)));
            }
            Ok(_) | Err(Error::ConstantField) => {}
            Err(e) => return Err(e),
        }
        alpha *= config.backtrack;
    }
    Ok(None)
}

/// Exposed for the linear oracle: `K` and `M_w` of a problem.
pub(crate) fn linear_matrices(
    mesh: &Mesh,
    problem: &DiscreteProblem,
) -> (crate::linalg::BandMatrix, crate::linalg::BandMatrix) {
    (assemble_stiffness(mesh), assemble_weighted_mass(mesh, problem.quadrature()))
}
