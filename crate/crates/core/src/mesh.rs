//! Graded triangulations of the planar cusp `{0 < x_2 < 1, 0 < x_1 < x_2^σ}`.
//!
//! Vertices sit on horizontal layers `x_2 = (i/M)^β`. Layer `i` is split into
//! `max(1, ⌈M · x_2^σ⌉)` equal segments (the tip layer is a single vertex),
//! and neighbouring layers are stitched by a merge of their normalised
//! abscissae, so the mesh is conforming. Right-hand boundary vertices lie on
//! the curve `x_1 = x_2^σ`.

use std::io::{self, Write};

use serde::Serialize;

use crate::domain::FiberDomain;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    areas: Vec<f64>,
    /// Gradients of the three nodal basis functions on each element.
    grads: Vec<[[f64; 2]; 3]>,
    /// First vertex index of each layer, plus a final sentinel.
    layer_start: Vec<usize>,
    descriptor: MeshDescriptor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshDescriptor {
    pub layers: usize,
    pub beta: f64,
    pub sigma: f64,
}

impl Mesh {
    /// Mesh the planar domain with `layers` height layers and grading `beta`.
    pub fn build<D: FiberDomain + ?Sized>(domain: &D, layers: usize, beta: f64) -> Result<Mesh> {
        if domain.dim() != 2 {
            return Err(Error::UnsupportedDimension(domain.dim()));
        }
        if layers < 2 {
            return Err(Error::InvalidMesh(format!("M >= 2 violated (M = {layers})")));
        }
        if !(beta >= 1.0 && beta.is_finite()) {
            return Err(Error::InvalidMesh(format!("grading beta >= 1 violated ({beta})")));
        }
        let m = layers as f64;
        let mut vertices = Vec::new();
        let mut layer_start = Vec::with_capacity(layers + 2);
        // Segment count per layer; zero marks the single-vertex tip.
        let mut segments = Vec::with_capacity(layers + 1);
        for i in 0..=layers {
            layer_start.push(vertices.len());
            if i == 0 {
                vertices.push([0.0, 0.0]);
                segments.push(0);
                continue;
            }
            let t = if i == layers { 1.0 } else { (i as f64 / m).powf(beta) };
            let side = domain.side(t);
            let count = ((m * side - 1e-9).ceil() as usize).max(1);
            for j in 0..=count {
                let x = if j == count { side } else { side * j as f64 / count as f64 };
                vertices.push([x, t]);
            }
            segments.push(count);
        }
        layer_start.push(vertices.len());

        let mut triangles = Vec::new();
        for i in 0..layers {
            let (lo, a) = (layer_start[i], segments[i]);
            let (hi, b) = (layer_start[i + 1], segments[i + 1]);
            let (mut j, mut k) = (0usize, 0usize);
            while j < a || k < b {
                // Advance on whichever layer has the smaller next abscissa.
                let next_lo = if j < a { (j + 1) as f64 / a as f64 } else { f64::INFINITY };
                let next_hi = if k < b { (k + 1) as f64 / b as f64 } else { f64::INFINITY };
                if next_lo <= next_hi && j < a {
                    triangles.push([lo + j, lo + j + 1, hi + k]);
                    j += 1;
                } else {
                    triangles.push([lo + j, hi + k + 1, hi + k]);
                    k += 1;
                }
            }
        }

        let mut areas = Vec::with_capacity(triangles.len());
        let mut grads = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let [p0, p1, p2] = tri.map(|v| vertices[v]);
            let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            if !(det > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "degenerate or inverted triangle {tri:?} (2A = {det})"
                )));
            }
            areas.push(0.5 * det);
            grads.push([
                [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
                [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
                [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
            ]);
        }

        Ok(Mesh {
            vertices,
            triangles,
            areas,
            grads,
            layer_start,
            descriptor: MeshDescriptor { layers, beta, sigma: domain.sigma() },
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn basis_gradients(&self) -> &[[[f64; 2]; 3]] {
        &self.grads
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn descriptor(&self) -> MeshDescriptor {
        self.descriptor
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Largest `|i - j|` over edges; vertices are numbered layer by layer, so
    /// this stays near the widest layer.
    pub fn bandwidth(&self) -> usize {
        self.triangles
            .iter()
            .map(|t| {
                let max = t.iter().max().unwrap();
                let min = t.iter().min().unwrap();
                max - min
            })
            .max()
            .unwrap_or(0)
    }

    pub fn layer_starts(&self) -> &[usize] {
        &self.layer_start
    }

    /// Text dump: `"V vertices T triangles"`, then `x y` per vertex, then
    /// 0-based `i j k` per triangle.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{} vertices {} triangles", self.vertices.len(), self.triangles.len())?;
        for [x, y] in &self.vertices {
            writeln!(out, "{x:.17e} {y:.17e}")?;
        }
        for [i, j, k] in &self.triangles {
            writeln!(out, "{i} {j} {k}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{CuspDomain, PyramidDomain};

    #[test]
    fn two_layer_pyramid() {
        let mesh = Mesh::build(&PyramidDomain::new(2).unwrap(), 2, 1.0).unwrap();
        assert_eq!(mesh.num_vertices(), 6);
        assert_eq!(mesh.num_triangles(), 4);
        assert_eq!(mesh.total_area(), 0.5);
        assert_eq!(
            mesh.vertices(),
            &[[0.0, 0.0], [0.0, 0.5], [0.5, 0.5], [0.0, 1.0], [0.5, 1.0], [1.0, 1.0]]
        );
    }

    #[test]
    fn straight_boundary_area_exact() {
        for (m, beta) in [(7, 1.0), (16, 2.0), (33, 1.5)] {
            let mesh = Mesh::build(&PyramidDomain::new(2).unwrap(), m, beta).unwrap();
            assert!((mesh.total_area() - 0.5).abs() < 1e-14, "M={m}");
        }
    }

    #[test]
    fn cusp_area_converges_from_above() {
        // Chords of the convex curve x_1 = x_2^2 lie above it.
        let cusp = CuspDomain::new(2, 3.0).unwrap();
        let coarse = Mesh::build(&cusp, 16, 2.0).unwrap();
        let fine = Mesh::build(&cusp, 64, 2.0).unwrap();
        assert!(coarse.total_area() >= 1.0 / 3.0);
        assert!(fine.total_area() >= 1.0 / 3.0);
        assert!((fine.total_area() - 1.0 / 3.0).abs() < 1e-3);
        assert!(fine.total_area() < coarse.total_area());
    }

    #[test]
    fn boundary_vertices_on_curve_and_partition_of_unity() {
        let cusp = CuspDomain::new(2, 4.0).unwrap();
        let mesh = Mesh::build(&cusp, 20, 3.0).unwrap();
        let starts = mesh.layer_starts();
        for w in starts.windows(2).skip(1) {
            let [x, t] = mesh.vertices()[w[1] - 1];
            assert!((x - t.powi(3)).abs() < 1e-15);
        }
        for g in mesh.basis_gradients() {
            assert!((g[0][0] + g[1][0] + g[2][0]).abs() < 1e-9 * g[0][0].abs().max(1.0));
            assert!((g[0][1] + g[1][1] + g[2][1]).abs() < 1e-9 * g[0][1].abs().max(1.0));
        }
        assert!(mesh.areas().iter().all(|&a| a > 0.0));
    }

    #[test]
    fn rejects_bad_requests() {
        let d3 = PyramidDomain::new(3).unwrap();
        assert_eq!(Mesh::build(&d3, 8, 1.0).unwrap_err(), Error::UnsupportedDimension(3));
        let d2 = PyramidDomain::new(2).unwrap();
        assert!(Mesh::build(&d2, 1, 1.0).is_err());
        assert!(Mesh::build(&d2, 4, 0.5).is_err());
    }

    #[test]
    fn text_dump() {
        let mesh = Mesh::build(&PyramidDomain::new(2).unwrap(), 2, 1.0).unwrap();
        let mut buf = Vec::new();
        mesh.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "6 vertices 4 triangles");
        assert_eq!(lines.len(), 1 + 6 + 4);
        assert_eq!(lines[7], "0 2 1");
    }
}
