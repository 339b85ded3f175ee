use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{positive, Result};

/// Inverse Gaussian law parametrized by mean and shape (variance
/// `mean^3 / shape`).
///
/// Sampled with the transformation-with-multiple-roots method: a chi-square
/// draw is mapped to the smaller root, and a uniform picks between the two
/// roots. The smaller root is written as `mean * r / (1 + sqrt(1 + r))^2`
/// with `r = 4 shape / (mean * chi2)`, which avoids the cancellation of the
/// textbook form when `shape` is small relative to `mean`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseGaussian {
    mean: f64,
    shape: f64,
}

impl InverseGaussian {
    pub fn new(mean: f64, shape: f64) -> Result<Self> {
        Ok(Self {
            mean: positive("mean", mean)?,
            shape: positive("shape", shape)?,
        })
    }

    /// `IG(delta, gamma)` in the `(delta, gamma)` parametrization of the
    /// stationary law, i.e. mean `delta/gamma` and variance `delta/gamma^3`.
    pub fn from_delta_gamma(delta: f64, gamma: f64) -> Result<Self> {
        Self::new(delta / gamma, delta * delta)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }
}

impl Distribution<f64> for InverseGaussian {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let n: f64 = rng.sample(StandardNormal);
        let chi2 = n * n;
        let mu = self.mean;
        let root = if chi2 == 0.0 {
            mu
        } else {
            let r = 4.0 * self.shape / (mu * chi2);
            let d = 1.0 + (1.0 + r).sqrt();
            mu * r / (d * d)
        };
        let u: f64 = rng.random();
        if u * (mu + root) <= mu {
            root
        } else {
            mu * mu / root
        }
    }
}
