//! JSON run configuration.
//!
//! ```json
//! {
//!   "model": "gamma_ou",
//!   "nu": 2.56, "alpha": 64,
//!   "lambda": 256, "mu": 1.2, "beta": -0.5, "rho": -0.1,
//!   "delta_t": 0.004,
//!   "n": 8000, "m": 500, "seed": 1, "bins": 40, "subgrid": 16
//! }
//! ```
//!
//! Rates (`lambda`, `mu`) are per year and `delta_t` is in years. The named
//! models take `nu`/`alpha` (`gamma_ou`) or `delta_ig`/`gamma_ig` (`ig_ou`);
//! `generic` takes `zeta`, `eta` and optionally the full cumulant list
//! `cumulants` starting at `K_1`.

use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{CumulantSpec, GammaOuParams, IgOuParams, Model, ModelKind, ModelParams};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Model,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub bins: Option<usize>,
    pub subgrid: Option<usize>,
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::InvalidInput("configuration must be a JSON object".into()))?;
        Self::from_object(obj, None)
    }

    /// Like [`RunConfig::from_json_str`], with `kind` overriding the `model`
    /// key.
    pub fn from_json_str_as(text: &str, kind: Option<ModelKind>) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::InvalidInput("configuration must be a JSON object".into()))?;
        Self::from_object(obj, kind)
    }

    pub fn from_file(path: &Path, kind: Option<ModelKind>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::from_json_str_as(&text, kind)
    }

    fn from_object(obj: &Map<String, Value>, kind: Option<ModelKind>) -> Result<Self> {
        let kind = match kind {
            Some(k) => k,
            None => get_str(obj, "model")?.parse()?,
        };
        let num = |key: &str| get_f64(obj, key);
        let (lambda, mu, beta, rho, delta_t) = (
            num("lambda")?,
            num("mu")?,
            num("beta")?,
            num("rho")?,
            num("delta_t")?,
        );
        let model = match kind {
            ModelKind::GammaOu => Model::gamma_ou(
                GammaOuParams::new(num("nu")?, num("alpha")?)?,
                lambda,
                mu,
                beta,
                rho,
                delta_t,
            )?,
            ModelKind::IgOu => Model::ig_ou(
                IgOuParams::new(num("delta_ig")?, num("gamma_ig")?)?,
                lambda,
                mu,
                beta,
                rho,
                delta_t,
            )?,
            ModelKind::Generic => {
                let params =
                    ModelParams::new(lambda, num("zeta")?, num("eta")?, mu, beta, rho, delta_t)?;
                let values = match obj.get("cumulants") {
                    None => vec![params.zeta(), params.eta()],
                    Some(Value::Array(items)) => items
                        .iter()
                        .map(|v| {
                            v.as_f64().ok_or_else(|| {
                                Error::InvalidInput("`cumulants` must hold numbers".into())
                            })
                        })
                        .collect::<Result<_>>()?,
                    Some(_) => {
                        return Err(Error::InvalidInput("`cumulants` must be an array".into()))
                    }
                };
                Model::generic(params, CumulantSpec::from_values(values)?)?
            }
        };
        Ok(Self {
            model,
            n: opt_usize(obj, "n")?,
            m: opt_usize(obj, "m")?,
            seed: opt_u64(obj, "seed")?,
            bins: opt_usize(obj, "bins")?,
            subgrid: opt_usize(obj, "subgrid")?,
        })
    }
}

fn missing(key: &str) -> Error {
    Error::InvalidInput(format!("missing key `{key}`"))
}

fn get_str<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a str> {
    obj.get(key)
        .ok_or_else(|| missing(key))?
        .as_str()
        .ok_or_else(|| Error::InvalidInput(format!("key `{key}` must be a string")))
}

fn get_f64(obj: &Map<String, Value>, key: &str) -> Result<f64> {
    obj.get(key)
        .ok_or_else(|| missing(key))?
        .as_f64()
        .ok_or_else(|| Error::InvalidInput(format!("key `{key}` must be a number")))
}

fn opt_u64(obj: &Map<String, Value>, key: &str) -> Result<Option<u64>> {
    obj.get(key)
        .map(|v| {
            v.as_u64().ok_or_else(|| {
                Error::InvalidInput(format!("key `{key}` must be a non-negative integer"))
            })
        })
        .transpose()
}

fn opt_usize(obj: &Map<String, Value>, key: &str) -> Result<Option<usize>> {
    Ok(opt_u64(obj, key)?.map(|v| v as usize))
}
