//! Asymptotic covariance of the closed-form estimator.
//!
//! With `Xi_k` the six estimating-function monomials and `f(v)` their
//! conditional means,
//!
//! ```text
//! Upsilon = E[Cov(Xi_1 | V_0)]
//! Sigma   = P^{-1} Upsilon P^{-T}        (limit covariance of sqrt(n) xi_n)
//! T       = D Sigma D^T                  (limit covariance of sqrt(n) theta_n)
//! ```
//!
//! where `P = I - f_1 e_1^T - f_2 e_3^T` collects the linear and quadratic
//! coefficients of `f`, and `D` is the Jacobian of the solution map.

use nalgebra::{Matrix6, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::solve_from_xi;
use crate::model::{CumulantSpec, ModelKind, ModelParams};
use crate::moments::{MomentEngine, XI_MONOMIALS};

/// Relative finite-difference step for [`jacobian_d`].
pub const FD_STEP: f64 = 1e-6;
/// Fallback step when a perturbed point leaves the solution's domain.
pub const FD_STEP_FALLBACK: f64 = 1e-7;

/// Limits of the empirical moments: `xi^1..xi^6` and `(upsilon^1, upsilon^2)`.
pub fn theoretical_xi(engine: &MomentEngine) -> Result<([f64; 6], [f64; 2])> {
    let mut xi = [0.0; 6];
    for (k, [a, b, c]) in XI_MONOMIALS.into_iter().enumerate() {
        xi[k] = engine.joint_moment(a, b, c)?;
    }
    Ok((
        xi,
        [engine.stationary_moment(1)?, engine.stationary_moment(2)?],
    ))
}

/// `Upsilon_ij = E[Xi^i Xi^j] - E[f^i(V_0) f^j(V_0)]`.
pub fn upsilon_matrix(engine: &MomentEngine) -> Result<Matrix6<f64>> {
    let f = engine.f_polynomials()?;
    let mut m = Matrix6::zeros();
    for i in 0..6 {
        for j in i..6 {
            let [a1, b1, c1] = XI_MONOMIALS[i];
            let [a2, b2, c2] = XI_MONOMIALS[j];
            let joint = engine.joint_moment(a1 + a2, b1 + b2, c1 + c2)?;
            let means = engine.contract(&(&f[i] * &f[j]))?;
            m[(i, j)] = joint - means;
            m[(j, i)] = m[(i, j)];
        }
    }
    Ok(m)
}

pub fn p_matrix(engine: &MomentEngine) -> Result<Matrix6<f64>> {
    let f = engine.f_polynomials()?;
    let mut p = Matrix6::identity();
    for (i, fi) in f.iter().enumerate() {
        if fi.degree() > 2 {
            return Err(Error::InvalidInput(format!(
                "conditional mean f^{} has degree {} > 2",
                i + 1,
                fi.degree()
            )));
        }
        p[(i, 0)] -= fi.coeff(1);
        p[(i, 2)] -= fi.coeff(2);
    }
    Ok(p)
}

/// `P^{-1} Upsilon P^{-T}` by two LU solves.
pub fn sigma_matrix(p: &Matrix6<f64>, upsilon: &Matrix6<f64>) -> Result<Matrix6<f64>> {
    let lu = p.lu();
    let a = lu.solve(upsilon).ok_or(Error::Singular)?;
    let sigma = lu.solve(&a.transpose()).ok_or(Error::Singular)?;
    Ok(symmetrize(&sigma))
}

/// Jacobian of the solution map `xi -> theta` at the limit point, by central
/// differences with relative step `step`.
pub fn jacobian_d_with_step(xi: [f64; 6], delta_t: f64, step: f64) -> Result<Matrix6<f64>> {
    let mut d = Matrix6::zeros();
    for j in 0..6 {
        let h = step * (xi[j].abs() + 1e-12);
        let (mut up, mut down) = (xi, xi);
        up[j] += h;
        down[j] -= h;
        let hi = solve_from_xi(up, delta_t)?;
        let lo = solve_from_xi(down, delta_t)?;
        for i in 0..6 {
            d[(i, j)] = (hi[i] - lo[i]) / (2.0 * h);
        }
    }
    Ok(d)
}

/// [`jacobian_d_with_step`] at [`FD_STEP`], retried once at
/// [`FD_STEP_FALLBACK`] if a perturbed point fails the gate.
pub fn jacobian_d(xi: [f64; 6], delta_t: f64) -> Result<Matrix6<f64>> {
    jacobian_d_with_step(xi, delta_t, FD_STEP)
        .or_else(|_| jacobian_d_with_step(xi, delta_t, FD_STEP_FALLBACK))
}

/// Smallest eigenvalue of the symmetric part, relative to the trace.
pub fn relative_min_eigenvalue(m: &Matrix6<f64>) -> f64 {
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym).eigenvalues;
    eig.min() / sym.trace().abs().max(f64::MIN_POSITIVE)
}

pub fn is_psd(m: &Matrix6<f64>) -> bool {
    relative_min_eigenvalue(m) >= -1e-8
}

fn symmetrize(m: &Matrix6<f64>) -> Matrix6<f64> {
    (m + m.transpose()) * 0.5
}

fn rows(m: &Matrix6<f64>) -> Vec<Vec<f64>> {
    (0..6)
        .map(|i| (0..6).map(|j| m[(i, j)]).collect())
        .collect()
}

fn from_array(a: [[f64; 6]; 6]) -> Matrix6<f64> {
    Matrix6::from_fn(|i, j| a[i][j])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdFlags {
    pub upsilon: bool,
    pub sigma: bool,
    pub t: bool,
}

/// Everything needed to present the limit law of `sqrt(n)(theta_n - theta)`.
/// Matrices are row-major in the order of `labels`; `upsilon`, `p` and
/// `sigma` are indexed by the six moment components.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticReport {
    pub parametrization: ModelKind,
    pub labels: Vec<String>,
    pub theta: Vec<f64>,
    pub upsilon: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
    pub jacobian: Vec<Vec<f64>>,
    pub t: Vec<Vec<f64>>,
    pub s: Vec<f64>,
    pub r: Vec<Vec<f64>>,
    pub psd: PsdFlags,
}

/// Intermediate matrices in `nalgebra` form.
#[derive(Debug, Clone)]
pub struct CovarianceParts {
    pub xi: [f64; 6],
    pub upsilon: Matrix6<f64>,
    pub p: Matrix6<f64>,
    pub sigma: Matrix6<f64>,
    /// Jacobian of the generic solution map.
    pub d: Matrix6<f64>,
}

impl CovarianceParts {
    pub fn compute(params: &ModelParams, spec: &CumulantSpec) -> Result<Self> {
        let engine = MomentEngine::new(*params, spec.clone())?;
        let (xi, _) = theoretical_xi(&engine)?;
        let upsilon = upsilon_matrix(&engine)?;
        let p = p_matrix(&engine)?;
        let sigma = sigma_matrix(&p, &upsilon)?;
        let d = jacobian_d(xi, params.delta_t())?;
        Ok(Self {
            xi,
            upsilon,
            p,
            sigma,
            d,
        })
    }

    /// `D` chained with the Jacobian of the map into `kind`.
    pub fn jacobian_in(&self, kind: ModelKind, theta: [f64; 6]) -> Matrix6<f64> {
        from_array(kind.reparametrization_jacobian(theta)) * self.d
    }

    pub fn t_matrix(&self, kind: ModelKind, theta: [f64; 6]) -> Matrix6<f64> {
        let d = self.jacobian_in(kind, theta);
        symmetrize(&(d * self.sigma * d.transpose()))
    }
}

pub fn asymptotic_covariance(
    params: &ModelParams,
    spec: &CumulantSpec,
    parametrization: ModelKind,
) -> Result<AsymptoticReport> {
    let parts = CovarianceParts::compute(params, spec)?;
    report_from_parts(&parts, params, parametrization)
}

pub fn report_from_parts(
    parts: &CovarianceParts,
    params: &ModelParams,
    parametrization: ModelKind,
) -> Result<AsymptoticReport> {
    let theta = params.theta();
    let d = parts.jacobian_in(parametrization, theta);
    let t = parts.t_matrix(parametrization, theta);
    let s: Vec<f64> = (0..6).map(|i| t[(i, i)].max(0.0).sqrt()).collect();
    let r = Matrix6::from_fn(|i, j| {
        if i == j {
            1.0
        } else {
            (t[(i, j)] / (s[i] * s[j])).clamp(-1.0, 1.0)
        }
    });
    Ok(AsymptoticReport {
        parametrization,
        labels: parametrization
            .labels()
            .iter()
            .map(|s| s.to_string())
            .collect(),
        theta: parametrization.from_generic(theta)?.to_vec(),
        upsilon: rows(&parts.upsilon),
        p: rows(&parts.p),
        sigma: rows(&parts.sigma),
        jacobian: rows(&d),
        t: rows(&t),
        s,
        r: rows(&r),
        psd: PsdFlags {
            upsilon: is_psd(&parts.upsilon),
            sigma: is_psd(&parts.sigma),
            t: is_psd(&t),
        },
    })
}

/// Per-parameter comparison of Monte Carlo spread with the asymptotic one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadComparison {
    pub label: String,
    pub truth: f64,
    pub mc_mean: f64,
    /// Monte Carlo standard deviation times `sqrt(n)`.
    pub mc_scaled_sd: f64,
    pub asymptotic_sd: f64,
    pub ratio: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub const MIN_REPLICATIONS_FOR_COMPARISON: usize = 100;

/// Compares replicated estimates (one `[f64; 6]` per replication, in the
/// report's parametrization) against the report.
pub fn empirical_vs_asymptotic(
    estimates: &[[f64; 6]],
    n: usize,
    report: &AsymptoticReport,
) -> Result<Vec<SpreadComparison>> {
    if estimates.len() < MIN_REPLICATIONS_FOR_COMPARISON {
        return Err(Error::InvalidInput(format!(
            "{} replications given, at least {MIN_REPLICATIONS_FOR_COMPARISON} needed",
            estimates.len()
        )));
    }
    let m = estimates.len() as f64;
    Ok((0..6)
        .map(|k| {
            let xs: Vec<f64> = estimates.iter().map(|e| e[k]).collect();
            let mean = xs.iter().sum::<f64>() / m;
            let central = |p: i32| xs.iter().map(|x| (x - mean).powi(p)).sum::<f64>() / m;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
            let m2 = central(2);
            let scaled = var.sqrt() * (n as f64).sqrt();
            SpreadComparison {
                label: report.labels[k].clone(),
                truth: report.theta[k],
                mc_mean: mean,
                mc_scaled_sd: scaled,
                asymptotic_sd: report.s[k],
                ratio: scaled / report.s[k],
                skewness: central(3) / m2.powf(1.5),
                excess_kurtosis: central(4) / (m2 * m2) - 3.0,
            }
        })
        .collect())
}
