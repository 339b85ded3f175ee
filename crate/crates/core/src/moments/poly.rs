use std::ops::{Add, AddAssign, Mul};

use serde::Serialize;

/// Polynomial `sum_k c_k v^k` in the conditioning variance `v = V_0`.
///
/// Conditional moments are always of this form; trailing zero coefficients
/// are kept when the shape of a formula dictates them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialInV {
    coeffs: Vec<f64>,
}

impl PolynomialInV {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "polynomial needs at least one coefficient"
        );
        Self { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        Self {
            coeffs: vec![0.0; degree + 1],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `v^k`, zero beyond the stored degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * v + c)
    }

    /// Multiplies by `v^shift`.
    pub fn shifted(&self, shift: usize) -> Self {
        let mut coeffs = vec![0.0; shift];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `sum_k c_k m_k`: replaces `v^k` by the k-th entry of `moments`.
    /// Panics if `moments` is shorter than the polynomial.
    pub fn contract(&self, moments: &[f64]) -> f64 {
        assert!(
            moments.len() > self.degree(),
            "need moments up to order {}",
            self.degree()
        );
        self.coeffs.iter().zip(moments).map(|(c, m)| c * m).sum()
    }

    /// Adds `factor * v^power` into the polynomial, growing it if needed.
    pub fn add_term(&mut self, power: usize, factor: f64) {
        if power >= self.coeffs.len() {
            self.coeffs.resize(power + 1, 0.0);
        }
        self.coeffs[power] += factor;
    }
}

impl AddAssign<&PolynomialInV> for PolynomialInV {
    fn add_assign(&mut self, rhs: &PolynomialInV) {
        if rhs.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), 0.0);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Add for &PolynomialInV {
    type Output = PolynomialInV;

    fn add(self, rhs: &PolynomialInV) -> PolynomialInV {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Mul for &PolynomialInV {
    type Output = PolynomialInV;

    fn mul(self, rhs: &PolynomialInV) -> PolynomialInV {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolynomialInV { coeffs: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_and_shift() {
        let p = PolynomialInV::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 + 4.0 + 12.0);
        let q = p.shifted(2);
        assert_eq!(q.degree(), 4);
        assert_eq!(q.eval(2.0), 4.0 * p.eval(2.0));
        assert_eq!(q.coeff(7), 0.0);
    }

    #[test]
    fn contract_uses_moments() {
        let p = PolynomialInV::new(vec![1.0, -1.0, 0.5]);
        assert_eq!(p.contract(&[1.0, 2.0, 6.0, 100.0]), 1.0 - 2.0 + 3.0);
    }

    proptest! {
        #[test]
        fn product_evaluates_pointwise(
            a in proptest::collection::vec(-3.0f64..3.0, 1..6),
            b in proptest::collection::vec(-3.0f64..3.0, 1..6),
            v in -2.0f64..2.0,
        ) {
            let pa = PolynomialInV::new(a);
            let pb = PolynomialInV::new(b);
            let lhs = (&pa * &pb).eval(v);
            let rhs = pa.eval(v) * pb.eval(v);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
            let sum = (&pa + &pb).eval(v);
            prop_assert!((sum - pa.eval(v) - pb.eval(v)).abs() <= 1e-10 * (1.0 + sum.abs()));
        }
    }
}
