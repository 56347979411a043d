//! Symmetric banded matrices and their Cholesky factors.
//!
//! Meshes number vertices layer by layer, so P1 matrices have a bandwidth
//! close to the widest layer and a banded factorisation is cheap.

use crate::fem::{WeightedQuadrature, TRIANGLE_RULE};
use crate::mesh::Mesh;
use crate::{Error, Result};

/// Lower band of a symmetric matrix: entry `(i, j)` with `i - bw <= j <= i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `v` at `(i, j)` (and implicitly `(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        assert!(i - j <= self.bw, "entry ({i},{j}) outside bandwidth {}", self.bw);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// `self + c · other` (same shape).
    pub fn add_scaled(&self, c: f64, other: &BandMatrix) -> BandMatrix {
        assert_eq!((self.n, self.bw), (other.n, other.bw));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect();
        BandMatrix { n: self.n, bw: self.bw, data }
    }

    pub fn scaled(&self, c: f64) -> BandMatrix {
        BandMatrix { n: self.n, bw: self.bw, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let row = &self.data[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            let mut acc = 0.0;
            for j in lo..i {
                let a = row[j + self.bw - i];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            acc += row[self.bw] * x[i];
            y[i] += acc;
        }
        y
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn cholesky(&self) -> Result<BandCholesky> {
        self.factor(None)
    }

    /// Cholesky with every pivot kept above `floor · a_jj`; a pivot that
    /// falls below is replaced by `a_jj`. The result factors a nearby SPD
    /// matrix, which is all a preconditioner needs.
    pub fn modified_cholesky(&self, floor: f64) -> Result<BandCholesky> {
        self.factor(Some(floor))
    }

    fn factor(&self, floor: Option<f64>) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let mut l = self.data.clone();
        let at = |i: usize, j: usize| i * (bw + 1) + (j + bw - i);
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut d = l[at(j, j)];
            for k in lo..j {
                let v = l[at(j, k)];
                d -= v * v;
            }
            if let Some(f) = floor {
                let a = self.data[at(j, j)];
                if !(a > 0.0) {
                    return Err(Error::NotPositiveDefinite);
                }
                if !(d > f * a) {
                    d = a;
                }
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            let d = d.sqrt();
            l[at(j, j)] = d;
            for i in j + 1..(j + bw + 1).min(n) {
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut s = l[at(i, j)];
                for k in lo_i..j {
                    s -= l[at(i, k)] * l[at(j, k)];
                }
                l[at(i, j)] = s / d;
            }
        }
        Ok(BandCholesky { n, bw, l })
    }
}

/// `A = L Lᵀ` with `L` stored in the same band layout.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.n, self.bw);
        let at = |i: usize, j: usize| i * (bw + 1) + (j + bw - i);
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = y[i];
            for k in lo..i {
                s -= self.l[at(i, k)] * y[k];
            }
            y[i] = s / self.l[at(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.l[at(k, i)] * y[k];
            }
            y[i] = s / self.l[at(i, i)];
        }
        y
    }
}

/// P1 stiffness matrix `K_ij = ∫ ∇φ_i · ∇φ_j`.
pub fn assemble_stiffness(mesh: &Mesh) -> BandMatrix {
    assemble_scaled_stiffness(mesh, &vec![1.0; mesh.num_triangles()])
}

/// `K_ij = Σ_e ρ_e ∫_{T_e} ∇φ_i · ∇φ_j` with one coefficient per element.
pub fn assemble_scaled_stiffness(mesh: &Mesh, coeff: &[f64]) -> BandMatrix {
    assert_eq!(coeff.len(), mesh.num_triangles());
    let mut k = BandMatrix::zeros(mesh.num_vertices(), mesh.bandwidth());
    let elements = mesh.triangles().iter().zip(mesh.basis_gradients()).zip(mesh.areas());
    for (((tri, g), &area), &rho) in elements.zip(coeff) {
        for a in 0..3 {
            for b in 0..=a {
                let v = rho * area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                k.add(tri[a], tri[b], v);
            }
        }
    }
    k
}

/// Weighted mass matrix `M_ij = Σ_k c_k φ_i(x_k) φ_j(x_k)` with the
/// per-point weights of `quad`.
pub fn assemble_weighted_mass(mesh: &Mesh, quad: &WeightedQuadrature) -> BandMatrix {
    let mut m = BandMatrix::zeros(mesh.num_vertices(), mesh.bandwidth());
    let cw = quad.point_weights();
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let mut local = [[0.0; 3]; 3];
        for (k, (l, _)) in TRIANGLE_RULE.iter().enumerate() {
            let c = cw[e * TRIANGLE_RULE.len() + k];
            for a in 0..3 {
                for b in 0..=a {
                    local[a][b] += c * l[a] * l[b];
                }
            }
        }
        for a in 0..3 {
            for b in 0..=a {
                m.add(tri[a], tri[b], local[a][b]);
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{PowerWeight, PyramidDomain};

    fn spd(n: usize, bw: usize) -> BandMatrix {
        let mut a = BandMatrix::zeros(n, bw);
        for i in 0..n {
            a.add(i, i, 4.0 + i as f64 * 0.1);
            for d in 1..=bw.min(i) {
                a.add(i, i - d, -1.0 / (d as f64 + 1.0));
            }
        }
        a
    }

    #[test]
    fn cholesky_solves() {
        let a = spd(30, 4);
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.matvec(&x);
        let got = a.cholesky().unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-12);
        }
        assert_eq!(a.get(3, 8), 0.0);
        assert!(a.get(3, 7) != 0.0);
        assert_eq!(a.get(3, 5), a.get(5, 3));
    }

    #[test]
    fn indefinite_rejected() {
        let mut a = BandMatrix::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 0, 2.0);
        assert_eq!(a.cholesky().unwrap_err(), Error::NotPositiveDefinite);
        let f = a.modified_cholesky(1e-12).unwrap();
        assert!(f.solve(&[1.0, 1.0]).iter().all(|v| v.is_finite()));
    }

    #[test]
    fn stiffness_kills_constants_and_mass_sums_to_area() {
        let mesh = Mesh::build(&PyramidDomain::new(2).unwrap(), 6, 1.5).unwrap();
        let k = assemble_stiffness(&mesh);
        let ones = vec![1.0; mesh.num_vertices()];
        assert!(k.matvec(&ones).iter().all(|v| v.abs() < 1e-10));
        let quad = WeightedQuadrature::new(&mesh, &PowerWeight::UNIT);
        let m = assemble_weighted_mass(&mesh, &quad);
        assert!((m.quadratic_form(&ones) - 0.5).abs() < 1e-14);
        // x_2 has unit gradient: Kx·x = area.
        let x2: Vec<f64> = mesh.vertices().iter().map(|v| v[1]).collect();
        assert!((k.quadratic_form(&x2) - 0.5).abs() < 1e-12);
    }
}
