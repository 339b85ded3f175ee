//! Closed-form root of the six martingale estimating equations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelParams};
use crate::series::ObservationSeries;

/// Empirical moments `xi^1..xi^6` and lagged-variance moments `upsilon^1, upsilon^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    /// Means of `V_i, V_i V_{i-1}, V_i^2, X_i, X_i V_{i-1}, X_i V_i`.
    pub xi: [f64; 6],
    /// Means of `V_{i-1}` and `V_{i-1}^2`, `i = 1..n`.
    pub upsilon: [f64; 2],
    pub n: usize,
}

/// Averages over `i = 1..n`. `V_0` enters the lagged sums, `V_n` does not.
pub fn sample_statistics(series: &ObservationSeries) -> Result<MomentSummary> {
    let n = series.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { n, min: 2 });
    }
    let v0 = series.v0().ok_or(Error::MissingInitialVariance)?;
    let mut xi = [0.0; 6];
    let mut upsilon = [0.0; 2];
    let mut prev = v0;
    for (&x, &v) in series.x().iter().zip(series.v()) {
        xi[0] += v;
        xi[1] += v * prev;
        xi[2] += v * v;
        xi[3] += x;
        xi[4] += x * prev;
        xi[5] += x * v;
        upsilon[0] += prev;
        upsilon[1] += prev * prev;
        prev = v;
    }
    let scale = 1.0 / n as f64;
    Ok(MomentSummary {
        xi: xi.map(|s| s * scale),
        upsilon: upsilon.map(|s| s * scale),
        n,
    })
}

/// A violated condition of the solvability gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GateFailure {
    /// `xi^2 - xi^1 upsilon^1 <= 0`.
    AutocovarianceNonpositive,
    /// `upsilon^2 - (upsilon^1)^2 <= 0`.
    VarianceNonpositive,
    /// `gamma_n >= 1`, so no positive mean-reversion rate exists.
    GammaNotBelowOne,
    /// `eta_n <= 0`.
    EtaNonpositive,
    /// `zeta_n <= 0`.
    ZetaNonpositive,
    /// A value came out infinite or NaN.
    NonFinite,
}

impl GateFailure {
    pub fn describe(&self) -> &'static str {
        match self {
            GateFailure::AutocovarianceNonpositive => "autocovariance nonpositive",
            GateFailure::VarianceNonpositive => "variance of lagged V nonpositive",
            GateFailure::GammaNotBelowOne => "autoregression coefficient not below one",
            GateFailure::EtaNonpositive => "stationary variance estimate nonpositive",
            GateFailure::ZetaNonpositive => "stationary mean estimate nonpositive",
            GateFailure::NonFinite => "non-finite estimate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reasons", rename_all = "snake_case")]
pub enum EstimateStatus {
    Ok,
    Degenerate(Vec<GateFailure>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateDiagnostics {
    /// `xi^2 - xi^1 upsilon^1`.
    pub autocovariance: f64,
    /// `upsilon^2 - (upsilon^1)^2`.
    pub variance: f64,
    /// `gamma_n`; NaN when the variance is zero.
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub status: EstimateStatus,
    pub theta_hat: Option<ModelParams>,
    pub diagnostics: GateDiagnostics,
}

impl EstimateResult {
    pub fn is_ok(&self) -> bool {
        self.status == EstimateStatus::Ok
    }

    /// Generic estimate, or the all-zero vector off the gate event (the
    /// classical convention for an undefined estimate).
    pub fn theta_or_zero(&self) -> [f64; 6] {
        self.theta_hat.map(|p| p.theta()).unwrap_or([0.0; 6])
    }

    pub fn into_params(self) -> Result<ModelParams> {
        match self.status {
            EstimateStatus::Ok => Ok(self.theta_hat.expect("ok carries an estimate")),
            EstimateStatus::Degenerate(reasons) => Err(Error::Degenerate(
                reasons
                    .iter()
                    .map(|r| r.describe())
                    .collect::<Vec<_>>()
                    .join(", "),
            )),
        }
    }
}

/// Solves `G_n(theta) = 0` in closed form.
///
/// The first three equations only involve `(lambda, zeta, eta)` and give the
/// AR(1) moment estimators; the last three are linear in `(mu, beta, rho)`.
pub fn solve_estimating_equations(summary: &MomentSummary, delta_t: f64) -> EstimateResult {
    let [x1, x2, x3, x4, x5, x6] = summary.xi;
    let [u1, u2] = summary.upsilon;
    let autocov = x2 - x1 * u1;
    let var = u2 - u1 * u1;
    let gamma = autocov / var;
    let diagnostics = GateDiagnostics {
        autocovariance: autocov,
        variance: var,
        gamma: if var != 0.0 { gamma } else { f64::NAN },
    };
    let degenerate = |reasons: Vec<GateFailure>| EstimateResult {
        status: EstimateStatus::Degenerate(reasons),
        theta_hat: None,
        diagnostics,
    };

    let mut reasons = Vec::new();
    if !(autocov > 0.0) {
        reasons.push(GateFailure::AutocovarianceNonpositive);
    }
    if !(var > 0.0) {
        reasons.push(GateFailure::VarianceNonpositive);
    }
    if !reasons.is_empty() {
        return degenerate(reasons);
    }
    if !(gamma < 1.0) {
        return degenerate(vec![GateFailure::GammaNotBelowOne]);
    }

    let zeta = (x1 - gamma * u1) / (1.0 - gamma);
    let eta = ((x3 - x1 * x1) - gamma * gamma * var) / (1.0 - gamma * gamma);
    if !(zeta > 0.0) {
        reasons.push(GateFailure::ZetaNonpositive);
    }
    if !(eta > 0.0) {
        reasons.push(GateFailure::EtaNonpositive);
    }
    if !reasons.is_empty() {
        return degenerate(reasons);
    }

    let lambda = -gamma.ln() / delta_t;
    let eps = (1.0 - gamma) / lambda;
    let beta = (x5 - u1 * x4) / (eps * var);
    let rho = (x6 - x4 * x1 - beta * eps * (eta * (1.0 - gamma) + gamma * var))
        / (2.0 * (1.0 - gamma) * eta);
    let mu = (x4 - beta * eps * (u1 - zeta)) / delta_t - (beta + lambda * rho) * zeta;

    match ModelParams::new(lambda, zeta, eta, mu, beta, rho, delta_t) {
        Ok(p) => EstimateResult {
            status: EstimateStatus::Ok,
            theta_hat: Some(p),
            diagnostics,
        },
        Err(_) => degenerate(vec![GateFailure::NonFinite]),
    }
}

/// The solution map with the lagged moments replaced by their limits
/// `upsilon^1 = xi^1`, `upsilon^2 = xi^3`. Its Jacobian is the delta-method
/// matrix of the asymptotic covariance.
pub fn solve_from_xi(xi: [f64; 6], delta_t: f64) -> Result<[f64; 6]> {
    let summary = MomentSummary {
        xi,
        upsilon: [xi[0], xi[2]],
        n: 0,
    };
    Ok(solve_estimating_equations(&summary, delta_t)
        .into_params()?
        .theta())
}

/// Generic estimate plus its view in a named parametrization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub result: EstimateResult,
    pub kind: ModelKind,
    /// Labeled parameters in `kind`'s parametrization when the gate passes.
    pub named: Option<Vec<(String, f64)>>,
}

pub fn estimate(series: &ObservationSeries, kind: ModelKind) -> Result<Estimate> {
    let summary = sample_statistics(series)?;
    let result = solve_estimating_equations(&summary, series.delta_t());
    let named = match &result.theta_hat {
        Some(p) => {
            let values = kind.from_generic(p.theta())?;
            Some(
                kind.labels()
                    .iter()
                    .zip(values)
                    .map(|(l, v)| (l.to_string(), v))
                    .collect(),
            )
        }
        None => None,
    };
    Ok(Estimate {
        result,
        kind,
        named,
    })
}

/// Limits of the empirical moments written out by hand, with `Delta` kept
/// explicitly. Used to cross-check the moment engine.
pub fn theoretical_limits_closed_form(p: &ModelParams) -> ([f64; 6], [f64; 2]) {
    let (lambda, zeta, eta, mu, beta, rho) =
        (p.lambda(), p.zeta(), p.eta(), p.mu(), p.beta(), p.rho());
    let (gamma, eps) = p.derived_constants();
    let dt = p.delta_t();
    let mean_x = dt * (mu + (beta + lambda * rho) * zeta);
    let xi = [
        zeta,
        zeta * zeta + gamma * eta,
        zeta * zeta + eta,
        mean_x,
        mean_x * zeta + beta * eps * eta,
        mean_x * zeta + (beta + 2.0 * rho * lambda) * eps * eta,
    ];
    (xi, [zeta, zeta * zeta + eta])
}
