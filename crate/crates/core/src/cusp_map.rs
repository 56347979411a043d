//! The stretching maps `φ_a : Ω_n → Ω_γ`,
//!
//! ```text
//! φ_a(y) = (y_1 y_n^{aσ-1}, …, y_{n-1} y_n^{aσ-1}, y_n^a),
//! φ_a⁻¹(x) = (x_1 x_n^{1/a-σ}, …, x_{n-1} x_n^{1/a-σ}, x_n^{1/a}),
//! ```
//!
//! together with their Jacobi matrices and determinants.

use nalgebra::DMatrix;

use crate::domain::{CuspDomain, FiberDomain, PyramidDomain};
use crate::{Error, ProblemParams, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspMap {
    n: usize,
    gamma: f64,
    sigma: f64,
    a: f64,
}

impl CuspMap {
    /// A map with `0 < a <= a_max`.
    pub fn new(params: &ProblemParams, a: f64) -> Result<Self> {
        let a_max = params.derive()?.a_max;
        if !(a > 0.0) {
            return Err(Error::InvalidParams(format!("a > 0 violated (a = {a})")));
        }
        if a > a_max {
            return Err(Error::Inadmissible { a, a_max });
        }
        Ok(Self::unchecked(params.n, params.gamma, a))
    }

    /// The map with `a = a_max`, whose inverse Jacobian is the optimal weight.
    pub fn optimal(params: &ProblemParams) -> Result<Self> {
        Self::new(params, params.derive()?.a_max)
    }

    /// No admissibility check; `a` only needs to be positive for the map to
    /// be a bijection.
    pub fn unchecked(n: usize, gamma: f64, a: f64) -> Self {
        Self { n, gamma, sigma: (gamma - 1.0) / (n as f64 - 1.0), a }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn source(&self) -> PyramidDomain {
        PyramidDomain { n: self.n }
    }

    pub fn target(&self) -> CuspDomain {
        CuspDomain { n: self.n, gamma: self.gamma, sigma: self.sigma }
    }

    fn check_source(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.n {
            return Err(Error::OutsideDomain(format!("expected {} coordinates", self.n)));
        }
        if y[self.n - 1] <= 0.0 {
            return Err(Error::OutsideDomain("map degenerate at y_n=0".into()));
        }
        if !self.source().contains(y) {
            return Err(Error::OutsideDomain(format!("{y:?} not in the pyramid")));
        }
        Ok(())
    }

    pub fn phi(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_source(y)?;
        Ok(self.phi_unchecked(y))
    }

    /// [`CuspMap::phi`] without the membership check, for quadrature loops.
    pub fn phi_unchecked(&self, y: &[f64]) -> Vec<f64> {
        let yn = y[self.n - 1];
        let scale = yn.powf(self.a * self.sigma - 1.0);
        let mut x: Vec<f64> = y[..self.n - 1].iter().map(|&yi| yi * scale).collect();
        x.push(yn.powf(self.a));
        x
    }

    pub fn phi_inverse(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::OutsideDomain(format!("expected {} coordinates", self.n)));
        }
        if x[self.n - 1] <= 0.0 {
            return Err(Error::OutsideDomain("inverse map degenerate at x_n=0".into()));
        }
        if !self.target().contains(x) {
            return Err(Error::OutsideDomain(format!("{x:?} not in the cusp")));
        }
        Ok(self.phi_inverse_unchecked(x))
    }

    pub fn phi_inverse_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let xn = x[self.n - 1];
        let scale = xn.powf(1.0 / self.a - self.sigma);
        let mut y: Vec<f64> = x[..self.n - 1].iter().map(|&xi| xi * scale).collect();
        y.push(xn.powf(1.0 / self.a));
        y
    }

    /// `J(y, φ_a) = a y_n^{aγ-n}`.
    pub fn jacobian_det(&self, y: &[f64]) -> Result<f64> {
        let yn = self.height(y)?;
        Ok(self.a * yn.powf(self.a * self.gamma - self.n as f64))
    }

    /// `J(x, φ_a⁻¹) = (1/a) x_n^{n/a-γ}`, the weight `w_{γ,a}`.
    pub fn inverse_jacobian_det(&self, x: &[f64]) -> Result<f64> {
        let xn = self.height(x)?;
        Ok(xn.powf(self.n as f64 / self.a - self.gamma) / self.a)
    }

    fn height(&self, y: &[f64]) -> Result<f64> {
        match y.last() {
            Some(&t) if y.len() == self.n && t > 0.0 => Ok(t),
            Some(_) if y.len() == self.n => {
                Err(Error::OutsideDomain("last coordinate must be positive".into()))
            }
            _ => Err(Error::OutsideDomain(format!("expected {} coordinates", self.n))),
        }
    }

    /// `Dφ_a(y)`: diagonal `y_n^{aσ-1}` in the first `n-1` slots, `a y_n^{a-1}`
    /// in the corner, and `(aσ-1) y_i y_n^{aσ-2}` down the last column.
    pub fn jacobian_matrix(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        let yn = self.height(y)?;
        let n = self.n;
        let s = self.a * self.sigma;
        let diag = yn.powf(s - 1.0);
        let col = (s - 1.0) * yn.powf(s - 2.0);
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            m[(i, i)] = diag;
            m[(i, n - 1)] = col * y[i];
        }
        m[(n - 1, n - 1)] = self.a * yn.powf(self.a - 1.0);
        Ok(m)
    }

    /// `∇(u∘φ_a)(y) = Dφ_a(y)ᵀ ∇u(φ_a(y))`, given `∇u` at the image point.
    pub fn pullback_gradient(&self, y: &[f64], grad_u: &[f64]) -> Vec<f64> {
        let n = self.n;
        let yn = y[n - 1];
        let s = self.a * self.sigma;
        let diag = yn.powf(s - 1.0);
        let col = (s - 1.0) * yn.powf(s - 2.0);
        let mut out: Vec<f64> = grad_u[..n - 1].iter().map(|g| diag * g).collect();
        let last = (0..n - 1).map(|i| col * y[i] * grad_u[i]).sum::<f64>()
            + self.a * yn.powf(self.a - 1.0) * grad_u[n - 1];
        out.push(last);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_2_3() -> CuspMap {
        let params = ProblemParams::new(2, 1.5, 2.0, 3.0).unwrap();
        CuspMap::optimal(&params).unwrap()
    }

    #[test]
    fn identity_when_no_cusp() {
        let params = ProblemParams::new(2, 1.5, 1.5, 2.0).unwrap();
        let map = CuspMap::new(&params, 1.0).unwrap();
        assert_eq!(map.phi(&[0.3, 0.7]).unwrap(), vec![0.3, 0.7]);
        assert_eq!(map.phi_inverse(&[0.3, 0.7]).unwrap(), vec![0.3, 0.7]);
        assert_eq!(map.jacobian_det(&[0.2, 0.4]).unwrap(), 1.0);
        assert_eq!(map.jacobian_matrix(&[0.2, 0.4]).unwrap(), DMatrix::identity(2, 2));
    }

    #[test]
    fn worked_point() {
        let map = map_2_3();
        let x = map.phi(&[0.25, 0.5]).unwrap();
        assert!((x[0] - 0.25 * 0.5f64.powf(-1.0 / 3.0)).abs() < 1e-15);
        assert!((x[1] - 0.5f64.powf(1.0 / 3.0)).abs() < 1e-15);
        assert!((x[0] - 0.3149803).abs() < 1e-7);
        assert!((x[1] - 0.7937005).abs() < 1e-7);
        let y = map.phi_inverse(&x).unwrap();
        assert!((y[0] - 0.25).abs() < 1e-14 && (y[1] - 0.5).abs() < 1e-14);
        assert!((map.jacobian_det(&[0.25, 0.5]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn worked_jacobi_matrix() {
        let m = map_2_3().jacobian_matrix(&[0.25, 0.5]).unwrap();
        let third = 1.0 / 3.0;
        let expected = [
            [0.5f64.powf(-third), -third * 0.25 * 0.5f64.powf(-4.0 * third)],
            [0.0, third * 0.5f64.powf(-2.0 * third)],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[(i, j)] - expected[i][j]).abs() < 1e-14, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn rejections() {
        let map = map_2_3();
        let err = map.phi(&[0.25, 0.0]).unwrap_err();
        assert!(err.to_string().contains("degenerate at y_n=0"));
        assert!(map.phi(&[0.6, 0.5]).is_err());
        assert!(map.phi_inverse(&[0.1, 0.0]).is_err());
        assert!(map.jacobian_det(&[0.1, -0.5]).is_err());
        assert!(map.jacobian_matrix(&[0.1, 0.0]).is_err());
        let params = ProblemParams::new(2, 1.5, 2.0, 3.0).unwrap();
        assert!(matches!(CuspMap::new(&params, 0.5), Err(Error::Inadmissible { .. })));
        assert!(CuspMap::new(&params, 0.0).is_err());
    }

    #[test]
    fn pullback_matches_transpose_product() {
        let map = map_2_3();
        let y = [0.1, 0.4];
        let g = [0.7, -1.3];
        let m = map.jacobian_matrix(&y).unwrap();
        let expected = m.transpose() * nalgebra::DVector::from_column_slice(&g);
        let got = map.pullback_gradient(&y, &g);
        for i in 0..2 {
            assert!((got[i] - expected[i]).abs() < 1e-14);
        }
    }
}
