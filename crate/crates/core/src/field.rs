//! Scalar fields evaluated by quadrature and the verification checks.

/// A real function on a domain, evaluated only at interior points.
pub trait ScalarField: Sync {
    fn value(&self, x: &[f64]) -> f64;
}

/// A field with an evaluable gradient.
pub trait GradientField: ScalarField {
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

impl<F> ScalarField for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// `Σ c_k Π_i x_i^{e_{k,i}}` with non-negative integer exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(f64, Vec<u32>)>) -> Self {
        assert!(terms.iter().all(|(_, e)| e.len() == dim), "exponent vector length must equal dim");
        Self { dim, terms }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(dim, vec![(c, vec![0; dim])])
    }

    /// `x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::new(dim, vec![(1.0, e)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn terms(&self) -> &[(f64, Vec<u32>)] {
        &self.terms
    }
}

impl ScalarField for Polynomial {
    fn value(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }
}

impl GradientField for Polynomial {
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for (c, e) in &self.terms {
            for (j, gj) in g.iter_mut().enumerate() {
                if e[j] == 0 {
                    continue;
                }
                let mut term = c * e[j] as f64;
                for (i, (&k, &xi)) in e.iter().zip(x).enumerate() {
                    let k = if i == j { k - 1 } else { k };
                    term *= xi.powi(k as i32);
                }
                *gj += term;
            }
        }
        g
    }
}

/// `c · x_n^e` for real `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightPower {
    pub coeff: f64,
    pub exponent: f64,
}

impl ScalarField for HeightPower {
    fn value(&self, x: &[f64]) -> f64 {
        self.coeff * x[x.len() - 1].powf(self.exponent)
    }
}

impl GradientField for HeightPower {
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut g = vec![0.0; n];
        g[n - 1] = self.coeff * self.exponent * x[n - 1].powf(self.exponent - 1.0);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_gradient_matches_differences() {
        let p = Polynomial::new(2, vec![(1.5, vec![2, 1]), (-0.5, vec![0, 3]), (2.0, vec![0, 0])]);
        assert_eq!(p.degree(), 3);
        let x = [0.3, 0.7];
        let g = p.gradient(&x);
        let h = 1e-6;
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn height_power() {
        let u = HeightPower { coeff: 2.0, exponent: 0.5 };
        assert!((u.value(&[0.1, 0.25]) - 1.0).abs() < 1e-15);
        assert!((u.gradient(&[0.1, 0.25])[1] - 2.0).abs() < 1e-15);
    }
}
