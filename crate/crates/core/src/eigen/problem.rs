use std::sync::Arc;

use rayon::prelude::*;

use super::recenter::recenter_discrete;
use crate::fem::{element_gradient, gradient_energy, FemFunction, WeightedQuadrature, TRIANGLE_RULE};
use crate::mesh::Mesh;
use crate::{Error, PowerWeight, Result};

/// A mesh, a weight and the exponents `p`, `q`, with the quadrature data
/// needed to evaluate the Rayleigh quotient and its gradient repeatedly.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    mesh: Arc<Mesh>,
    quad: WeightedQuadrature,
    p: f64,
    q: f64,
}

/// Rayleigh quotient of one nodal vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// `Σ_e |T_e| (|∇u|² + ε²)^{p/2}`.
    pub energy: f64,
    /// Recentering shift `t̃`.
    pub shift: f64,
    /// `Σ_k c_k |u_k - t̃|^q`.
    pub moment: f64,
    pub quotient: f64,
    /// `u - t̃` at the quadrature points.
    pub centered: Vec<f64>,
}

impl DiscreteProblem {
    pub fn new(mesh: Arc<Mesh>, w: &PowerWeight, p: f64, q: f64) -> Result<Self> {
        if !(p > 1.0 && q > 1.0) {
            return Err(Error::InvalidParams(format!("p, q > 1 required (p = {p}, q = {q})")));
        }
        let quad = WeightedQuadrature::new(&mesh, w);
        if !(quad.total_weight() > 0.0) {
            return Err(Error::ZeroWeightMass);
        }
        Ok(Self { mesh, quad, p, q })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn quadrature(&self) -> &WeightedQuadrature {
        &self.quad
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Quotient with the `ε`-regularised energy (`eps = 0` for the true one).
    pub fn evaluate(&self, values: &[f64], eps: f64) -> Result<Evaluation> {
        let pv = self.quad.values_at_points(&self.mesh, values);
        let r = recenter_discrete(&pv, self.quad.point_weights(), self.q)?;
        let centered: Vec<f64> = pv.iter().map(|v| v - r.shift).collect();
        let moment = self.quad.power_sum(&centered, self.q);
        if !(moment > 0.0) {
            return Err(Error::ConstantField);
        }
        let energy = gradient_energy(&self.mesh, values, self.p, eps);
        let quotient = energy / moment.powf(self.p / self.q);
        Ok(Evaluation { energy, shift: r.shift, moment, quotient, centered })
    }

    /// Euclidean gradient of the quotient with respect to nodal values.
    ///
    /// The shift is optimal, so its derivative drops out and
    /// `∇RQ = (∇E - RQ · p · G^{p/q-1} · S) / G^{p/q}` with
    /// `S_i = Σ_k c_k |ũ_k|^{q-2} ũ_k φ_i(x_k)`.
    pub fn gradient(&self, values: &[f64], eval: &Evaluation, eps: f64) -> Vec<f64> {
        let (p, q) = (self.p, self.q);
        let g_scale = eval.moment.powf(p / q);
        let s_coeff = eval.quotient * p * eval.moment.powf(p / q - 1.0);
        let cw = self.quad.point_weights();
        let npts = TRIANGLE_RULE.len();
        let local: Vec<[f64; 3]> = (0..self.mesh.num_triangles())
            .into_par_iter()
            .map(|e| {
                let [gx, gy] = element_gradient(&self.mesh, values, e);
                let g = &self.mesh.basis_gradients()[e];
                let area = self.mesh.areas()[e];
                let flux = p * area * (gx * gx + gy * gy + eps * eps).powf(0.5 * p - 1.0);
                let mut out = [0.0; 3];
                for (a, o) in out.iter_mut().enumerate() {
                    *o = flux * (gx * g[a][0] + gy * g[a][1]);
                }
                for (k, (l, _)) in TRIANGLE_RULE.iter().enumerate() {
                    let u = eval.centered[e * npts + k];
                    let c = cw[e * npts + k];
                    if u == 0.0 || c == 0.0 {
                        continue;
                    }
                    let m = c * u.abs().powf(q - 2.0) * u;
                    for (a, o) in out.iter_mut().enumerate() {
                        *o -= s_coeff * m * l[a];
                    }
                }
                out
            })
            .collect();
        let mut grad = vec![0.0; self.mesh.num_vertices()];
        for (tri, contrib) in self.mesh.triangles().iter().zip(local) {
            for a in 0..3 {
                grad[tri[a]] += contrib[a] / g_scale;
            }
        }
        grad
    }

    /// Signed moment `Σ c_k |u_k|^{q-2} u_k` at the quadrature points.
    pub fn constraint(&self, values: &[f64]) -> f64 {
        let pv = self.quad.values_at_points(&self.mesh, values);
        super::recenter::signed_moment(&pv, self.quad.point_weights(), self.q, 0.0)
    }

    /// `(Σ c_k |u_k|^q)^{1/q}`.
    pub fn weighted_norm(&self, values: &[f64]) -> f64 {
        let pv = self.quad.values_at_points(&self.mesh, values);
        self.quad.power_sum(&pv, self.q).powf(1.0 / self.q)
    }

    /// Recentre and rescale to unit weighted `q`-norm.
    pub fn project(&self, values: &[f64]) -> Result<Vec<f64>> {
        let eval = self.evaluate(values, 0.0)?;
        let scale = eval.moment.powf(1.0 / self.q);
        Ok(values.iter().map(|v| (v - eval.shift) / scale).collect())
    }
}

/// `‖∇u‖_p^p / ‖u - t̃‖_{q,w}^p`, equal to `‖∇u‖_p^p / inf_c ‖u - c‖_{q,w}^p`.
pub fn rayleigh_quotient(u: &FemFunction, p: f64, q: f64, w: &PowerWeight) -> Result<f64> {
    if u.is_constant() {
        return Err(Error::ConstantField);
    }
    let problem = DiscreteProblem::new(u.mesh().clone(), w, p, q)?;
    Ok(problem.evaluate(u.values(), 0.0)?.quotient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::PyramidDomain;

    fn problem(p: f64, q: f64) -> DiscreteProblem {
        let mesh = Arc::new(Mesh::build(&PyramidDomain::new(2).unwrap(), 6, 1.0).unwrap());
        let w = PowerWeight { coeff: 2.0, exponent: 1.0 };
        DiscreteProblem::new(mesh, &w, p, q).unwrap()
    }

    #[test]
    fn gradient_matches_central_differences() {
        for (p, q) in [(2.0, 2.0), (1.5, 1.5), (1.5, 2.25), (3.0, 4.0)] {
            let prob = problem(p, q);
            let values: Vec<f64> = prob
                .mesh()
                .vertices()
                .iter()
                .map(|v| (3.0 * v[0]).sin() + v[1] * v[1] - 0.3 * v[0] * v[1])
                .collect();
            let eval = prob.evaluate(&values, 0.0).unwrap();
            let grad = prob.gradient(&values, &eval, 0.0);
            let h = 1e-6;
            for i in [0, 3, 7, 12, values.len() - 1] {
                let mut plus = values.clone();
                let mut minus = values.clone();
                plus[i] += h;
                minus[i] -= h;
                let fd = (prob.evaluate(&plus, 0.0).unwrap().quotient
                    - prob.evaluate(&minus, 0.0).unwrap().quotient)
                    / (2.0 * h);
                assert!(
                    (fd - grad[i]).abs() < 1e-6 * (1.0 + fd.abs()),
                    "p={p} q={q} i={i}: fd {fd} vs {}",
                    grad[i]
                );
            }
        }
    }

    #[test]
    fn projection_lands_on_constraint_set() {
        let prob = problem(1.5, 3.0);
        let values: Vec<f64> = prob.mesh().vertices().iter().map(|v| v[0] * 5.0 + 2.0).collect();
        let u = prob.project(&values).unwrap();
        assert!(prob.constraint(&u).abs() < 1e-12);
        assert!((prob.weighted_norm(&u) - 1.0).abs() < 1e-12);
    }
}
