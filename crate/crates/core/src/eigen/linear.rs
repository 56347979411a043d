use std::sync::Arc;

use super::problem::DiscreteProblem;
use super::solver::linear_matrices;
use crate::mesh::Mesh;
use crate::{PowerWeight, Result};

/// Smallest nonzero eigenvalue of `K x = λ M_w x` for `p = q = 2`.
///
/// Shifted inverse iteration on `(K + M_w) x = M_w y`, with constants
/// projected out in the `M_w` inner product at every step. The discrete
/// minimiser of the quotient at `p = q = 2` is exactly this eigenpair, so it
/// serves as an independent check on the nonlinear solver.
pub fn linear_oracle_solve(mesh: Arc<Mesh>, w: &PowerWeight) -> Result<(f64, Vec<f64>)> {
    let problem = DiscreteProblem::new(mesh.clone(), w, 2.0, 2.0)?;
    let (k, m) = linear_matrices(&mesh, &problem);
    let factor = k.add_scaled(1.0, &m).cholesky()?;
    let ones = vec![1.0; mesh.num_vertices()];
    let m_ones = m.matvec(&ones);
    let mass: f64 = m_ones.iter().sum();

    let deflate = |x: &mut Vec<f64>| {
        let c = x.iter().zip(&m_ones).map(|(a, b)| a * b).sum::<f64>() / mass;
        x.iter_mut().for_each(|v| *v -= c);
        let norm = m.quadratic_form(x).sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    };

    let mut x: Vec<f64> = mesh.vertices().iter().map(|v| v[1] + 0.1 * v[0]).collect();
    deflate(&mut x);
    let mut lambda = k.quadratic_form(&x);
    for _ in 0..10_000 {
        let mut next = factor.solve(&m.matvec(&x));
        deflate(&mut next);
        let next_lambda = k.quadratic_form(&next);
        x = next;
        let done = (next_lambda - lambda).abs() <= 1e-15 * next_lambda;
        lambda = next_lambda;
        if done {
            break;
        }
    }
    Ok((lambda, x))
}
