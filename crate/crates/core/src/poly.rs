//! Real polynomials in one variable and companion-matrix root finding.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Polynomial with real coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(vec![value])
    }

    /// `offset + s`
    pub fn linear(offset: f64) -> Self {
        Self::new(vec![offset, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// Value and first derivative by Horner's scheme.
    fn eval_with_derivative(&self, s: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * s + p;
            p = p * s + c;
        }
        (p, dp)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &x) in self.coeffs.iter().enumerate() {
            for (j, &y) in other.coeffs.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let out = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + other.coeffs.get(i).unwrap_or(&0.0))
            .collect();
        Poly::new(out)
    }

    pub fn scale(&self, factor: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Product of `(offset_i + s)` over all offsets.
    pub fn from_linear_factors(offsets: impl IntoIterator<Item = f64>) -> Poly {
        offsets
            .into_iter()
            .fold(Poly::constant(1.0), |acc, a| acc.mul(&Poly::linear(a)))
    }

    /// Real roots of the polynomial, ascending.
    ///
    /// Eigenvalues of the companion matrix of the monic polynomial, each then
    /// polished by Newton iteration on the original coefficients. Roots whose
    /// imaginary part exceeds `imag_tol * |re|` are rejected.
    pub fn real_roots(&self, imag_tol: f64) -> Result<Vec<f64>> {
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coeffs[n];
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        let eig = companion.complex_eigenvalues();

        let mut roots = Vec::with_capacity(n);
        for z in eig.iter() {
            let scale = z.re.abs().max(f64::MIN_POSITIVE);
            let mut root = z.re;
            // Newton polish; converges in a few steps from the companion estimate.
            for _ in 0..8 {
                let (p, dp) = self.eval_with_derivative(root);
                if dp == 0.0 {
                    break;
                }
                let step = p / dp;
                root -= step;
                if step.abs() <= 4.0 * f64::EPSILON * root.abs() {
                    break;
                }
            }
            let imag_rel = z.im.abs() / scale;
            if imag_rel > imag_tol {
                // The Schur estimate of a simple real root can carry a small
                // spurious imaginary part; accept it when Newton lands on a zero.
                let (p, dp) = self.eval_with_derivative(root);
                let residual = (p / dp).abs();
                if !(residual <= imag_tol * root.abs().max(1.0) && z.im.abs() < 1e-6 * scale) {
                    return Err(Error::Numeric(format!(
                        "complex root {} {:+}i exceeds imaginary tolerance",
                        z.re, z.im
                    )));
                }
            }
            roots.push(root);
        }
        roots.sort_by(f64::total_cmp);
        Ok(roots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_matches_expansion() {
        let p = Poly::from_linear_factors([1.0, 2.0, 3.0]);
        assert_eq!(p.coeffs(), &[6.0, 11.0, 6.0, 1.0]);
        assert_eq!(p.eval(-1.0), 0.0);
        assert_eq!(p.eval(1.0), 24.0);
    }

    #[test]
    fn add_and_scale_trim_trailing_zeros() {
        let p = Poly::new(vec![1.0, 2.0, 1.0]);
        let q = p.add(&Poly::new(vec![0.0, 0.0, -1.0]));
        assert_eq!(q.degree(), 1);
        assert_eq!(q.scale(0.5).coeffs(), &[0.5, 1.0]);
    }

    #[test]
    fn roots_of_product_of_linear_factors() {
        let p = Poly::from_linear_factors([0.5, 1.7, 3.25, 10.0]);
        let roots = p.real_roots(1e-10).unwrap();
        let expected = [-10.0, -3.25, -1.7, -0.5];
        for (r, e) in roots.iter().zip(expected) {
            assert!((r - e).abs() < 1e-13 * e.abs(), "{r} vs {e}");
        }
    }

    #[test]
    fn complex_roots_are_rejected() {
        // s^2 + 1
        let p = Poly::new(vec![1.0, 0.0, 1.0]);
        assert!(matches!(p.real_roots(1e-10), Err(Error::Numeric(_))));
    }

    #[test]
    fn constant_has_no_roots() {
        assert!(Poly::constant(3.0).real_roots(1e-10).unwrap().is_empty());
    }
}
