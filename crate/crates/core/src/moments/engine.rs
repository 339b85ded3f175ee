use super::kernels::{binomial, epsilon_coeff, gaussian_even_moment};
use super::poly::PolynomialInV;
use super::trivariate::{Recursion, TrivariateMomentTable, MAX_TOTAL_ORDER};
use crate::error::{Error, Result};
use crate::model::{CumulantSpec, Model, ModelParams};

/// `E[V_0^n]` for `n = 0..=n_max` from the moment/cumulant recursion.
pub fn stationary_moments(spec: &CumulantSpec, n_max: usize) -> Result<Vec<f64>> {
    if n_max > spec.max_order() {
        return Err(Error::InsufficientCumulants {
            required: n_max,
            available: spec.max_order(),
        });
    }
    let mut m = Vec::with_capacity(n_max + 1);
    m.push(1.0);
    for n in 1..=n_max {
        let value = (0..n)
            .map(|i| binomial(n - 1, i) * spec.get(i + 1).unwrap() * m[n - 1 - i])
            .sum();
        m.push(value);
    }
    Ok(m)
}

pub fn stationary_moment(spec: &CumulantSpec, n: usize) -> Result<f64> {
    Ok(stationary_moments(spec, n)?[n])
}

/// Exponents `(a, b, c)` of `X_1^a V_1^b V_0^c` for the six components of
/// the estimating-function vector `(V_1, V_1 V_0, V_1^2, X_1, X_1 V_0, X_1 V_1)`.
pub const XI_MONOMIALS: [[usize; 3]; 6] = [
    [0, 1, 0],
    [0, 1, 1],
    [0, 2, 0],
    [1, 0, 0],
    [1, 0, 1],
    [1, 1, 0],
];

/// Joint moments of one observation step `(X_1, V_1)` given or averaged over
/// `V_0`, for a fixed parameter point.
///
/// The engine is immutable after construction: the stationary moments and
/// the trivariate table are filled eagerly, so concurrent reads are safe.
#[derive(Debug, Clone)]
pub struct MomentEngine {
    params: ModelParams,
    spec: CumulantSpec,
    gamma: f64,
    epsilon: f64,
    stationary: Vec<f64>,
    trivariate: TrivariateMomentTable,
}

impl MomentEngine {
    pub fn new(params: ModelParams, spec: CumulantSpec) -> Result<Self> {
        Self::with_recursion(params, spec, Recursion::DescendS)
    }

    pub fn with_recursion(
        params: ModelParams,
        spec: CumulantSpec,
        recursion: Recursion,
    ) -> Result<Self> {
        let stationary = stationary_moments(&spec, spec.max_order())?;
        let max_total = spec.max_order().min(MAX_TOTAL_ORDER);
        let trivariate = TrivariateMomentTable::build(&params, &spec, max_total, recursion)?;
        let (gamma, epsilon) = params.derived_constants();
        Ok(Self {
            params,
            spec,
            gamma,
            epsilon,
            stationary,
            trivariate,
        })
    }

    /// Engine with the model's cumulants up to [`crate::model::DEFAULT_MAX_ORDER`].
    pub fn from_model(model: &Model) -> Result<Self> {
        let spec = model.cumulants(crate::model::DEFAULT_MAX_ORDER)?;
        Self::new(*model.params(), spec)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn cumulants(&self) -> &CumulantSpec {
        &self.spec
    }

    pub fn stationary_moment(&self, n: usize) -> Result<f64> {
        self.stationary
            .get(n)
            .copied()
            .ok_or(Error::InsufficientCumulants {
                required: n,
                available: self.spec.max_order(),
            })
    }

    pub fn epsilon_coeff(&self, i: usize, j: usize) -> f64 {
        epsilon_coeff(i, j, &self.params)
    }

    pub fn trivariate_cumulant(&self, n: usize, m: usize, l: usize) -> Result<f64> {
        self.trivariate.cumulant(n, m, l)
    }

    pub fn trivariate_moment(&self, n: usize, m: usize, l: usize) -> Result<f64> {
        self.trivariate.moment(n, m, l)
    }

    pub fn trivariate_table(&self) -> &TrivariateMomentTable {
        &self.trivariate
    }

    /// `E[Y_1^n V_1^m Z_1^l | V_0 = v]` as a polynomial in `v`.
    pub fn xi_coeffs(&self, n: usize, m: usize, l: usize) -> Result<PolynomialInV> {
        let mut poly = PolynomialInV::zero(n + m);
        for i in 0..=n {
            for j in 0..=m {
                let w = binomial(n, i)
                    * binomial(m, j)
                    * self.epsilon.powi(i as i32)
                    * self.gamma.powi(j as i32);
                poly.add_term(i + j, w * self.trivariate.moment(n - i, m - j, l)?);
            }
        }
        Ok(poly)
    }

    /// `E[A_1^n Y_1^m V_1^l | V_0 = v]` with `A_1 = mu Delta + beta Y_1 + rho Z_1`.
    pub fn psi_coeffs(&self, n: usize, m: usize, l: usize) -> Result<PolynomialInV> {
        let drift = self.params.mu() * self.params.delta_t();
        let (beta, rho) = (self.params.beta(), self.params.rho());
        let mut poly = PolynomialInV::zero(n + m + l);
        for i in 0..=n {
            for j in 0..=n - i {
                let w = binomial(n, i)
                    * binomial(n - i, j)
                    * beta.powi(i as i32)
                    * rho.powi(j as i32)
                    * drift.powi((n - i - j) as i32);
                if w != 0.0 {
                    poly += &self.xi_coeffs(m + i, l, j)?.scaled(w);
                }
            }
        }
        Ok(poly)
    }

    /// `E[X_1^n V_1^m | V_0 = v]`, using `X_1 = A_1 + sqrt(Y_1) W_1`.
    pub fn phi_coeffs(&self, n: usize, m: usize) -> Result<PolynomialInV> {
        let mut poly = PolynomialInV::zero(n + m);
        for i in 0..=n / 2 {
            let w = binomial(n, 2 * i) * gaussian_even_moment(i);
            poly += &self.psi_coeffs(n - 2 * i, i, m)?.scaled(w);
        }
        Ok(poly)
    }

    pub fn conditional_moment(&self, n: usize, m: usize, v: f64) -> Result<f64> {
        if !(v >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "conditioning variance must be >= 0, got {v}"
            )));
        }
        Ok(self.phi_coeffs(n, m)?.eval(v))
    }

    /// `E[X_1^n V_1^m]` under the stationary law.
    pub fn unconditional_moment(&self, n: usize, m: usize) -> Result<f64> {
        self.joint_moment(n, m, 0)
    }

    /// `E[X_1^a V_1^b V_0^c]`.
    pub fn joint_moment(&self, a: usize, b: usize, c: usize) -> Result<f64> {
        let poly = self.phi_coeffs(a, b)?.shifted(c);
        self.contract(&poly)
    }

    /// Replaces `v^k` by `E[V_0^k]`.
    pub fn contract(&self, poly: &PolynomialInV) -> Result<f64> {
        if poly.degree() >= self.stationary.len() {
            return Err(Error::InsufficientCumulants {
                required: poly.degree(),
                available: self.spec.max_order(),
            });
        }
        Ok(poly.contract(&self.stationary))
    }

    /// Conditional means `f^1..f^6` of the estimating-function components.
    pub fn f_polynomials(&self) -> Result<[PolynomialInV; 6]> {
        let mut out: Vec<PolynomialInV> = Vec::with_capacity(6);
        for [a, b, c] in XI_MONOMIALS {
            out.push(self.phi_coeffs(a, b)?.shifted(c));
        }
        Ok(out.try_into().expect("six components"))
    }

    pub fn f_vector(&self, v: f64) -> Result<[f64; 6]> {
        if !(v >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "conditioning variance must be >= 0, got {v}"
            )));
        }
        Ok(self.f_polynomials()?.map(|p| p.eval(v)))
    }
}
