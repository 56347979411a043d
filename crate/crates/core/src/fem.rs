//! Piecewise-linear fields on a [`Mesh`] and their norms.

use std::io::{self, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::field::ScalarField;
use crate::mesh::Mesh;
use crate::{Error, PowerWeight, Result};

/// Degree-6 symmetric rule on the reference triangle (12 points).
/// Rows are barycentric coordinates; weights sum to one.
pub const TRIANGLE_RULE: [([f64; 3], f64); 12] = {
    const A1: f64 = 0.063_089_014_491_502_228_340_331_602_870_819;
    const W1: f64 = 0.050_844_906_370_206_816_920_936_809_106_869;
    const A2: f64 = 0.249_286_745_170_910_421_291_638_553_107_019;
    const W2: f64 = 0.116_786_275_726_379_366_030_690_438_090_053;
    const B: f64 = 0.053_145_049_844_816_947_353_249_671_631_398;
    const C: f64 = 0.310_352_451_033_784_405_416_607_733_956_552;
    const W3: f64 = 0.082_851_075_618_373_575_193_553_456_420_442;
    const B1: f64 = 1.0 - 2.0 * A1;
    const B2: f64 = 1.0 - 2.0 * A2;
    const D: f64 = 1.0 - B - C;
    [
        ([B1, A1, A1], W1),
        ([A1, B1, A1], W1),
        ([A1, A1, B1], W1),
        ([B2, A2, A2], W2),
        ([A2, B2, A2], W2),
        ([A2, A2, B2], W2),
        ([B, C, D], W3),
        ([B, D, C], W3),
        ([C, B, D], W3),
        ([C, D, B], W3),
        ([D, B, C], W3),
        ([D, C, B], W3),
    ]
};

pub const POINTS_PER_ELEMENT: usize = TRIANGLE_RULE.len();

#[derive(Debug, Clone, PartialEq)]
pub struct FemFunction {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl FemFunction {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return Err(Error::InvalidMesh(format!(
                "{} nodal values for {} vertices",
                values.len(),
                mesh.num_vertices()
            )));
        }
        Ok(Self { mesh, values })
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate<F: ScalarField + ?Sized>(mesh: Arc<Mesh>, f: &F) -> Self {
        let values = mesh.vertices().iter().map(|v| f.value(v)).collect();
        Self { mesh, values }
    }

    pub fn constant(mesh: Arc<Mesh>, c: f64) -> Self {
        let values = vec![c; mesh.num_vertices()];
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same mesh, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.mesh.clone(), values)
    }

    pub fn element_gradient(&self, e: usize) -> [f64; 2] {
        element_gradient(&self.mesh, &self.values, e)
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    /// Text dump, one `x y value` line per vertex.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        for ([x, y], v) in self.mesh.vertices().iter().zip(&self.values) {
            writeln!(out, "{x:.17e} {y:.17e} {v:.17e}")?;
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn element_gradient(mesh: &Mesh, values: &[f64], e: usize) -> [f64; 2] {
    let tri = mesh.triangles()[e];
    let g = &mesh.basis_gradients()[e];
    let mut out = [0.0; 2];
    for (k, &v) in tri.iter().enumerate() {
        out[0] += values[v] * g[k][0];
        out[1] += values[v] * g[k][1];
    }
    out
}

/// `(Σ_e |T_e| |∇u_e|^p)^{1/p}`, exact for piecewise-linear `u`.
pub fn grad_p_norm(u: &FemFunction, p: f64) -> f64 {
    gradient_energy(&u.mesh, &u.values, p, 0.0).powf(1.0 / p)
}

/// `Σ_e |T_e| (|∇u_e|² + ε²)^{p/2}`.
pub(crate) fn gradient_energy(mesh: &Mesh, values: &[f64], p: f64, eps: f64) -> f64 {
    let parts: Vec<f64> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|e| {
            let [gx, gy] = element_gradient(mesh, values, e);
            mesh.areas()[e] * (gx * gx + gy * gy + eps * eps).powf(0.5 * p)
        })
        .collect();
    parts.iter().sum()
}

/// Quadrature data of the 12-point rule on every element with a weight
/// folded in: `point_weight[12e + k] = |T_e| ω_k w(x_k)`.
#[derive(Debug, Clone)]
pub struct WeightedQuadrature {
    point_weight: Vec<f64>,
    points: Vec<[f64; 2]>,
}

impl WeightedQuadrature {
    pub fn new(mesh: &Mesh, w: &PowerWeight) -> Self {
        let per_elem: Vec<[([f64; 2], f64); POINTS_PER_ELEMENT]> = (0..mesh.num_triangles())
            .into_par_iter()
            .map(|e| {
                let tri = mesh.triangles()[e];
                let [p0, p1, p2] = tri.map(|v| mesh.vertices()[v]);
                let area = mesh.areas()[e];
                TRIANGLE_RULE.map(|(l, omega)| {
                    let x = [
                        l[0] * p0[0] + l[1] * p1[0] + l[2] * p2[0],
                        l[0] * p0[1] + l[1] * p1[1] + l[2] * p2[1],
                    ];
                    (x, area * omega * w.value(&x))
                })
            })
            .collect();
        let mut point_weight = Vec::with_capacity(per_elem.len() * POINTS_PER_ELEMENT);
        let mut points = Vec::with_capacity(per_elem.len() * POINTS_PER_ELEMENT);
        for elem in per_elem {
            for (x, c) in elem {
                points.push(x);
                point_weight.push(c);
            }
        }
        Self { point_weight, points }
    }

    pub fn point_weights(&self) -> &[f64] {
        &self.point_weight
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn total_weight(&self) -> f64 {
        self.point_weight.iter().sum()
    }

    /// Values of the P1 field at every quadrature point.
    pub fn values_at_points(&self, mesh: &Mesh, nodal: &[f64]) -> Vec<f64> {
        let per_elem: Vec<[f64; POINTS_PER_ELEMENT]> = mesh
            .triangles()
            .par_iter()
            .map(|tri| {
                let [a, b, c] = tri.map(|v| nodal[v]);
                TRIANGLE_RULE.map(|(l, _)| l[0] * a + l[1] * b + l[2] * c)
            })
            .collect();
        per_elem.into_iter().flatten().collect()
    }

    /// `Σ_k c_k |v_k|^q`.
    pub fn power_sum(&self, point_values: &[f64], q: f64) -> f64 {
        let parts: Vec<f64> = self
            .point_weight
            .par_chunks(POINTS_PER_ELEMENT)
            .zip(point_values.par_chunks(POINTS_PER_ELEMENT))
            .map(|(c, v)| c.iter().zip(v).map(|(c, v)| c * v.abs().powf(q)).sum::<f64>())
            .collect();
        parts.iter().sum()
    }
}

/// `(∫ |u|^q w)^{1/q}` with the degree-6 rule on each element.
pub fn fem_weighted_q_norm(u: &FemFunction, w: &PowerWeight, q: f64) -> f64 {
    let quad = WeightedQuadrature::new(&u.mesh, w);
    let pv = quad.values_at_points(&u.mesh, &u.values);
    quad.power_sum(&pv, q).powf(1.0 / q)
}
