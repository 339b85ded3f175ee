//! Parameter representations for BNS models.
//!
//! All parameters are annualized; `delta_t` is the grid width in years
//! (daily data on a 250-day year has `delta_t = 1/250`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};

/// Number of stationary cumulants built when a caller does not ask for a
/// specific order. The asymptotic covariance needs order 6; the rest is
/// headroom for higher joint moments.
pub const DEFAULT_MAX_ORDER: usize = 10;

/// Generic parameter vector `(lambda, zeta, eta, mu, beta, rho)` plus the
/// observation grid width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    lambda: f64,
    zeta: f64,
    eta: f64,
    mu: f64,
    beta: f64,
    rho: f64,
    delta_t: f64,
}

impl ModelParams {
    pub fn new(
        lambda: f64,
        zeta: f64,
        eta: f64,
        mu: f64,
        beta: f64,
        rho: f64,
        delta_t: f64,
    ) -> Result<Self> {
        Ok(Self {
            lambda: positive("lambda", lambda)?,
            zeta: positive("zeta", zeta)?,
            eta: positive("eta", eta)?,
            mu: finite("mu", mu)?,
            beta: finite("beta", beta)?,
            rho: finite("rho", rho)?,
            delta_t: positive("delta_t", delta_t)?,
        })
    }

    /// Builds parameters from a vector ordered `(lambda, zeta, eta, mu, beta, rho)`.
    pub fn from_theta(theta: [f64; 6], delta_t: f64) -> Result<Self> {
        let [lambda, zeta, eta, mu, beta, rho] = theta;
        Self::new(lambda, zeta, eta, mu, beta, rho, delta_t)
    }

    pub fn theta(&self) -> [f64; 6] {
        [
            self.lambda,
            self.zeta,
            self.eta,
            self.mu,
            self.beta,
            self.rho,
        ]
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn zeta(&self) -> f64 {
        self.zeta
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    /// One-step autoregression coefficient `exp(-lambda * delta_t)`.
    pub fn gamma(&self) -> f64 {
        (-self.lambda * self.delta_t).exp()
    }

    /// `(1 - gamma) / lambda`, the weight of `V_{i-1}` in the integrated variance.
    pub fn epsilon(&self) -> f64 {
        -(-self.lambda * self.delta_t).exp_m1() / self.lambda
    }

    pub fn derived_constants(&self) -> (f64, f64) {
        (self.gamma(), self.epsilon())
    }
}

/// Gamma-OU stationary law `Gamma(nu, alpha)` (shape, rate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaOuParams {
    pub nu: f64,
    pub alpha: f64,
}

impl GammaOuParams {
    pub fn new(nu: f64, alpha: f64) -> Result<Self> {
        Ok(Self {
            nu: positive("nu", nu)?,
            alpha: positive("alpha", alpha)?,
        })
    }

    /// Stationary `(mean, variance)` = `(nu/alpha, nu/alpha^2)`.
    pub fn to_generic(&self) -> (f64, f64) {
        (self.nu / self.alpha, self.nu / (self.alpha * self.alpha))
    }

    pub fn from_generic(zeta: f64, eta: f64) -> Result<Self> {
        let zeta = positive("zeta", zeta)?;
        let eta = positive("eta", eta)?;
        Self::new(zeta * zeta / eta, zeta / eta)
    }

    /// `K_n = nu (n-1)! / alpha^n`.
    pub fn cumulant(&self, n: usize) -> f64 {
        let mut k = self.nu / self.alpha;
        for j in 1..n {
            k *= j as f64 / self.alpha;
        }
        k
    }
}

/// IG-OU stationary law `IG(delta, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IgOuParams {
    pub delta: f64,
    pub gamma: f64,
}

impl IgOuParams {
    pub fn new(delta: f64, gamma: f64) -> Result<Self> {
        Ok(Self {
            delta: positive("delta_ig", delta)?,
            gamma: positive("gamma_ig", gamma)?,
        })
    }

    /// Stationary `(mean, variance)` = `(delta/gamma, delta/gamma^3)`.
    pub fn to_generic(&self) -> (f64, f64) {
        (self.delta / self.gamma, self.delta / self.gamma.powi(3))
    }

    pub fn from_generic(zeta: f64, eta: f64) -> Result<Self> {
        let zeta = positive("zeta", zeta)?;
        let eta = positive("eta", eta)?;
        let gamma = (zeta / eta).sqrt();
        Self::new(zeta * gamma, gamma)
    }

    /// `K_n = delta (2n-3)!! / gamma^(2n-1)`.
    pub fn cumulant(&self, n: usize) -> f64 {
        let g2 = self.gamma * self.gamma;
        let mut k = self.delta / self.gamma;
        for j in 2..=n {
            k *= (2 * j - 3) as f64 / g2;
        }
        k
    }
}

/// Stationary cumulants `K_1..K_max` of `V_0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulantSpec {
    cumulants: Vec<f64>,
}

impl CumulantSpec {
    /// Direct construction; `values[0]` is `K_1`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(
                "at least two cumulants (mean and variance) are required".into(),
            ));
        }
        positive("K1", values[0])?;
        positive("K2", values[1])?;
        for &k in &values[2..] {
            finite("K_n", k)?;
        }
        Ok(Self { cumulants: values })
    }

    pub fn gamma_ou(p: &GammaOuParams, max_order: usize) -> Result<Self> {
        check_order(max_order)?;
        Ok(Self {
            cumulants: (1..=max_order).map(|n| p.cumulant(n)).collect(),
        })
    }

    pub fn ig_ou(p: &IgOuParams, max_order: usize) -> Result<Self> {
        check_order(max_order)?;
        Ok(Self {
            cumulants: (1..=max_order).map(|n| p.cumulant(n)).collect(),
        })
    }

    pub fn max_order(&self) -> usize {
        self.cumulants.len()
    }

    /// `K_n` for `n >= 1`.
    pub fn get(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidInput("cumulant order starts at 1".into()));
        }
        self.cumulants
            .get(n - 1)
            .copied()
            .ok_or(Error::InsufficientCumulants {
                required: n,
                available: self.max_order(),
            })
    }

    pub fn values(&self) -> &[f64] {
        &self.cumulants
    }
}

fn check_order(max_order: usize) -> Result<()> {
    if max_order < 1 {
        return Err(Error::InvalidInput("max_order must be at least 1".into()));
    }
    Ok(())
}

/// Which parametrization a model, estimate, or report is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Generic,
    GammaOu,
    IgOu,
}

impl ModelKind {
    /// Labels of the parameter vector in this parametrization.
    pub fn labels(&self) -> [&'static str; 6] {
        match self {
            ModelKind::Generic => ["lambda", "zeta", "eta", "mu", "beta", "rho"],
            ModelKind::GammaOu => ["nu", "alpha", "lambda", "mu", "beta", "rho"],
            ModelKind::IgOu => ["delta_ig", "gamma_ig", "lambda", "mu", "beta", "rho"],
        }
    }

    /// Maps a generic vector `(lambda, zeta, eta, mu, beta, rho)` into this
    /// parametrization.
    pub fn from_generic(&self, theta: [f64; 6]) -> Result<[f64; 6]> {
        let [lambda, zeta, eta, mu, beta, rho] = theta;
        Ok(match self {
            ModelKind::Generic => theta,
            ModelKind::GammaOu => {
                let p = GammaOuParams::from_generic(zeta, eta)?;
                [p.nu, p.alpha, lambda, mu, beta, rho]
            }
            ModelKind::IgOu => {
                let p = IgOuParams::from_generic(zeta, eta)?;
                [p.delta, p.gamma, lambda, mu, beta, rho]
            }
        })
    }

    /// Inverse of [`ModelKind::from_generic`].
    pub fn to_generic(&self, named: [f64; 6]) -> Result<[f64; 6]> {
        let [a, b, lambda, mu, beta, rho] = named;
        Ok(match self {
            ModelKind::Generic => named,
            ModelKind::GammaOu => {
                let (zeta, eta) = GammaOuParams::new(a, b)?.to_generic();
                [lambda, zeta, eta, mu, beta, rho]
            }
            ModelKind::IgOu => {
                let (zeta, eta) = IgOuParams::new(a, b)?.to_generic();
                [lambda, zeta, eta, mu, beta, rho]
            }
        })
    }

    /// Jacobian of [`ModelKind::from_generic`] at `theta`, row-major.
    pub fn reparametrization_jacobian(&self, theta: [f64; 6]) -> [[f64; 6]; 6] {
        let mut j = [[0.0; 6]; 6];
        for (i, row) in j.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let (lambda_col, zeta_col, eta_col) = (0, 1, 2);
        let (zeta, eta) = (theta[1], theta[2]);
        let (d0, d1) = match self {
            ModelKind::Generic => return j,
            // nu = zeta^2/eta, alpha = zeta/eta
            ModelKind::GammaOu => (
                [2.0 * zeta / eta, -zeta * zeta / (eta * eta)],
                [1.0 / eta, -zeta / (eta * eta)],
            ),
            // delta = zeta^1.5 eta^-0.5, gamma = (zeta/eta)^0.5
            ModelKind::IgOu => (
                [
                    1.5 * (zeta / eta).sqrt(),
                    -0.5 * zeta.powf(1.5) / eta.powf(1.5),
                ],
                [
                    0.5 / (zeta * eta).sqrt(),
                    -0.5 * zeta.sqrt() / eta.powf(1.5),
                ],
            ),
        };
        j[0] = [0.0; 6];
        j[0][zeta_col] = d0[0];
        j[0][eta_col] = d0[1];
        j[1] = [0.0; 6];
        j[1][zeta_col] = d1[0];
        j[1][eta_col] = d1[1];
        j[2] = [0.0; 6];
        j[2][lambda_col] = 1.0;
        j
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Generic => "generic",
            ModelKind::GammaOu => "gamma_ou",
            ModelKind::IgOu => "ig_ou",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(ModelKind::Generic),
            "gamma_ou" => Ok(ModelKind::GammaOu),
            "ig_ou" => Ok(ModelKind::IgOu),
            other => Err(Error::InvalidInput(format!(
                "unknown model `{other}` (expected gamma_ou, ig_ou or generic)"
            ))),
        }
    }
}

/// Law of the stationary variance, the only distributional input.
#[derive(Debug, Clone, PartialEq)]
pub enum StationaryLaw {
    GammaOu(GammaOuParams),
    IgOu(IgOuParams),
    /// Cumulants supplied directly; no sampler exists for this case.
    Generic(CumulantSpec),
}

/// A fully specified BNS model: generic parameters plus the stationary law
/// that provides higher cumulants.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    params: ModelParams,
    law: StationaryLaw,
}

impl Model {
    pub fn gamma_ou(
        law: GammaOuParams,
        lambda: f64,
        mu: f64,
        beta: f64,
        rho: f64,
        delta_t: f64,
    ) -> Result<Self> {
        let (zeta, eta) = law.to_generic();
        Ok(Self {
            params: ModelParams::new(lambda, zeta, eta, mu, beta, rho, delta_t)?,
            law: StationaryLaw::GammaOu(law),
        })
    }

    pub fn ig_ou(
        law: IgOuParams,
        lambda: f64,
        mu: f64,
        beta: f64,
        rho: f64,
        delta_t: f64,
    ) -> Result<Self> {
        let (zeta, eta) = law.to_generic();
        Ok(Self {
            params: ModelParams::new(lambda, zeta, eta, mu, beta, rho, delta_t)?,
            law: StationaryLaw::IgOu(law),
        })
    }

    /// Generic model; `K_1` and `K_2` of `cumulants` must equal `zeta` and `eta`.
    pub fn generic(params: ModelParams, cumulants: CumulantSpec) -> Result<Self> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if !close(cumulants.get(1)?, params.zeta()) || !close(cumulants.get(2)?, params.eta()) {
            return Err(Error::InvalidInput(
                "cumulants K1, K2 must equal zeta, eta".into(),
            ));
        }
        Ok(Self {
            params,
            law: StationaryLaw::Generic(cumulants),
        })
    }

    /// Rebuilds a model of the same law family at other generic parameters.
    /// Generic laws keep their higher cumulants and replace `K_1`, `K_2`.
    pub fn with_params(&self, params: ModelParams) -> Result<Self> {
        match &self.law {
            StationaryLaw::GammaOu(_) => Self::gamma_ou(
                GammaOuParams::from_generic(params.zeta(), params.eta())?,
                params.lambda(),
                params.mu(),
                params.beta(),
                params.rho(),
                params.delta_t(),
            ),
            StationaryLaw::IgOu(_) => Self::ig_ou(
                IgOuParams::from_generic(params.zeta(), params.eta())?,
                params.lambda(),
                params.mu(),
                params.beta(),
                params.rho(),
                params.delta_t(),
            ),
            StationaryLaw::Generic(spec) => {
                let mut values = spec.values().to_vec();
                values[0] = params.zeta();
                values[1] = params.eta();
                Self::generic(params, CumulantSpec::from_values(values)?)
            }
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn law(&self) -> &StationaryLaw {
        &self.law
    }

    pub fn kind(&self) -> ModelKind {
        match self.law {
            StationaryLaw::GammaOu(_) => ModelKind::GammaOu,
            StationaryLaw::IgOu(_) => ModelKind::IgOu,
            StationaryLaw::Generic(_) => ModelKind::Generic,
        }
    }

    /// Stationary cumulants up to `max_order`.
    pub fn cumulants(&self, max_order: usize) -> Result<CumulantSpec> {
        match &self.law {
            StationaryLaw::GammaOu(p) => CumulantSpec::gamma_ou(p, max_order),
            StationaryLaw::IgOu(p) => CumulantSpec::ig_ou(p, max_order),
            StationaryLaw::Generic(spec) => Ok(spec.clone()),
        }
    }

    /// Parameter vector in the model's own parametrization.
    pub fn named_theta(&self) -> [f64; 6] {
        self.kind()
            .from_generic(self.params.theta())
            .expect("validated parameters map to a valid parametrization")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derived_constants_at_daily_grid() {
        let p = ModelParams::new(256.0, 0.04, 6.25e-4, 1.2, -0.5, -0.1, 1.0 / 250.0).unwrap();
        let (gamma, eps) = p.derived_constants();
        assert_relative_eq!(gamma, (-1.024f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(gamma, 0.359155, epsilon = 1e-6);
        assert!(eps > 0.0 && eps < p.delta_t());
        assert_relative_eq!(eps, (1.0 - gamma) / 256.0, max_relative = 1e-14);
    }

    #[test]
    fn epsilon_tends_to_delta_for_slow_reversion() {
        let p = ModelParams::new(1e-12, 1.0, 1.0, 0.0, 0.0, 0.0, 0.5).unwrap();
        assert_relative_eq!(p.epsilon(), 0.5, max_relative = 1e-11);
        assert!(p.gamma() < 1.0);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(ModelParams::new(0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, 1.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, f64::NAN, 0.0, 0.0, 1.0).is_err());
        assert!(GammaOuParams::new(0.0, 1.0).is_err());
        assert!(IgOuParams::new(1.0, -2.0).is_err());
        assert!(GammaOuParams::from_generic(0.0, 1.0).is_err());
    }

    #[test]
    fn gamma_ou_map() {
        let (zeta, eta) = GammaOuParams::new(2.56, 64.0).unwrap().to_generic();
        assert_relative_eq!(zeta, 0.04, max_relative = 1e-15);
        assert_relative_eq!(eta, 6.25e-4, max_relative = 1e-15);
        let back = GammaOuParams::from_generic(zeta, eta).unwrap();
        assert_relative_eq!(back.nu, 2.56, max_relative = 1e-14);
        assert_relative_eq!(back.alpha, 64.0, max_relative = 1e-14);
    }

    #[test]
    fn ig_ou_map() {
        assert_eq!(IgOuParams::new(1.0, 1.0).unwrap().to_generic(), (1.0, 1.0));
        let (zeta, eta) = IgOuParams::new(2.56, 8.0).unwrap().to_generic();
        assert_relative_eq!(zeta, 0.32, max_relative = 1e-15);
        assert_relative_eq!(eta, 0.005, max_relative = 1e-15);
        let back = IgOuParams::from_generic(zeta, eta).unwrap();
        assert_relative_eq!(back.delta, 2.56, max_relative = 1e-14);
        assert_relative_eq!(back.gamma, 8.0, max_relative = 1e-14);
    }

    #[test]
    fn cumulant_specs() {
        let g = CumulantSpec::gamma_ou(&GammaOuParams::new(2.56, 64.0).unwrap(), 10).unwrap();
        assert_relative_eq!(g.get(1).unwrap(), 0.04, max_relative = 1e-15);
        assert_relative_eq!(g.get(2).unwrap(), 6.25e-4, max_relative = 1e-15);
        assert_relative_eq!(
            g.get(3).unwrap(),
            2.0 * 2.56 / 64f64.powi(3),
            max_relative = 1e-15
        );
        assert!(matches!(
            g.get(11),
            Err(Error::InsufficientCumulants {
                required: 11,
                available: 10
            })
        ));
        let ig = IgOuParams::new(2.56, 8.0).unwrap();
        let s = CumulantSpec::ig_ou(&ig, 4).unwrap();
        assert_relative_eq!(s.get(2).unwrap(), 2.56 / 512.0, max_relative = 1e-15);
        assert_relative_eq!(
            s.get(4).unwrap(),
            15.0 * 2.56 / 8f64.powi(7),
            max_relative = 1e-15
        );
        assert!(CumulantSpec::gamma_ou(&GammaOuParams::new(1.0, 1.0).unwrap(), 0).is_err());
        assert!(CumulantSpec::from_values(vec![1.0]).is_err());
        assert!(CumulantSpec::from_values(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn model_kind_parsing() {
        for kind in [ModelKind::Generic, ModelKind::GammaOu, ModelKind::IgOu] {
            assert_eq!(kind.to_string().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("heston".parse::<ModelKind>().is_err());
    }

    #[test]
    fn generic_model_checks_leading_cumulants() {
        let p = ModelParams::new(1.0, 0.5, 0.1, 0.0, 0.0, 0.0, 1.0).unwrap();
        assert!(Model::generic(p, CumulantSpec::from_values(vec![0.5, 0.1, 0.3]).unwrap()).is_ok());
        assert!(Model::generic(p, CumulantSpec::from_values(vec![0.5, 0.2]).unwrap()).is_err());
    }
}
