//! Joint cumulants and moments of `(S_1, U_1, Z_1)`.
//!
//! All three are integrals of deterministic kernels against the same
//! increasing Levy process, so their joint cumulant of order `(n, m, l)` is
//! `lambda * eps_{nm} * (n+m+l) * K_{n+m+l}`. Moments follow from the
//! multivariate moment/cumulant recursion.

use super::kernels::{binomial, epsilon_coeff};
use crate::error::{Error, Result};
use crate::model::{CumulantSpec, ModelParams};

/// Hard cap on the total order of tabulated trivariate moments.
pub const MAX_TOTAL_ORDER: usize = 12;

/// `K_{nml}`: joint cumulant of `S_1^n U_1^m Z_1^l`.
pub fn trivariate_cumulant(
    n: usize,
    m: usize,
    l: usize,
    params: &ModelParams,
    spec: &CumulantSpec,
) -> Result<f64> {
    let total = n + m + l;
    if total == 0 {
        return Err(Error::InvalidInput(
            "joint cumulant of order (0,0,0) is undefined".into(),
        ));
    }
    Ok(params.lambda() * epsilon_coeff(n, m, params) * total as f64 * spec.get(total)?)
}

/// Which coordinate a recursion step peels off first. The three variants
/// are the three textbook recursions; they must agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recursion {
    /// Descend in the `S` exponent, then `U`, then `Z`.
    DescendS,
    /// Descend in the `U` exponent, then `Z`, then `S`.
    DescendU,
    /// Descend in the `Z` exponent, then `S`, then `U`.
    DescendZ,
}

impl Recursion {
    fn axis_order(self) -> [usize; 3] {
        match self {
            Recursion::DescendS => [0, 1, 2],
            Recursion::DescendU => [1, 2, 0],
            Recursion::DescendZ => [2, 0, 1],
        }
    }
}

/// Dense table of `E[S^n U^m Z^l]` and `K_{nml}` for `n+m+l <= max_total`.
#[derive(Debug, Clone)]
pub struct TrivariateMomentTable {
    max_total: usize,
    cumulants: Vec<f64>,
    moments: Vec<f64>,
}

impl TrivariateMomentTable {
    pub fn build(
        params: &ModelParams,
        spec: &CumulantSpec,
        max_total: usize,
        recursion: Recursion,
    ) -> Result<Self> {
        if max_total > MAX_TOTAL_ORDER {
            return Err(Error::OrderTooHigh {
                required: max_total,
                limit: MAX_TOTAL_ORDER,
            });
        }
        if max_total > spec.max_order() {
            return Err(Error::InsufficientCumulants {
                required: max_total,
                available: spec.max_order(),
            });
        }
        let side = max_total + 1;
        let size = side * side * side;
        let mut table = Self {
            max_total,
            cumulants: vec![0.0; size],
            moments: vec![0.0; size],
        };
        for total in 1..=max_total {
            for k in multi_indices(total) {
                let c = trivariate_cumulant(k[0], k[1], k[2], params, spec)?;
                let at = table.index(k);
                table.cumulants[at] = c;
            }
        }
        let origin = table.index([0, 0, 0]);
        table.moments[origin] = 1.0;
        for total in 1..=max_total {
            for k in multi_indices(total) {
                let value = table.recurse(k, recursion);
                let at = table.index(k);
                table.moments[at] = value;
            }
        }
        Ok(table)
    }

    pub fn max_total(&self) -> usize {
        self.max_total
    }

    fn index(&self, k: [usize; 3]) -> usize {
        let side = self.max_total + 1;
        (k[0] * side + k[1]) * side + k[2]
    }

    fn check(&self, k: [usize; 3]) -> Result<usize> {
        let total = k[0] + k[1] + k[2];
        if total > self.max_total {
            return Err(Error::InsufficientCumulants {
                required: total,
                available: self.max_total,
            });
        }
        Ok(self.index(k))
    }

    /// `E[S_1^n U_1^m Z_1^l]`.
    pub fn moment(&self, n: usize, m: usize, l: usize) -> Result<f64> {
        Ok(self.moments[self.check([n, m, l])?])
    }

    /// `K_{nml}`; order zero is rejected.
    pub fn cumulant(&self, n: usize, m: usize, l: usize) -> Result<f64> {
        if n + m + l == 0 {
            return Err(Error::InvalidInput(
                "joint cumulant of order (0,0,0) is undefined".into(),
            ));
        }
        Ok(self.cumulants[self.check([n, m, l])?])
    }

    /// One step of the moment recursion along the first nonzero axis in the
    /// recursion's order. Uses only strictly lower-order table entries.
    fn recurse(&self, k: [usize; 3], recursion: Recursion) -> f64 {
        let axis = recursion
            .axis_order()
            .into_iter()
            .find(|&a| k[a] > 0)
            .expect("order >= 1");
        let mut bound = k;
        bound[axis] -= 1;
        let mut sum = 0.0;
        for j0 in 0..=bound[0] {
            for j1 in 0..=bound[1] {
                for j2 in 0..=bound[2] {
                    let j = [j0, j1, j2];
                    let weight: f64 = (0..3).map(|a| binomial(bound[a], j[a])).product();
                    let mut cum_idx = j;
                    cum_idx[axis] += 1;
                    let rest = [bound[0] - j0, bound[1] - j1, bound[2] - j2];
                    sum += weight
                        * self.cumulants[self.index(cum_idx)]
                        * self.moments[self.index(rest)];
                }
            }
        }
        sum
    }
}

/// All `(n, m, l)` with `n + m + l == total`.
pub fn multi_indices(total: usize) -> impl Iterator<Item = [usize; 3]> {
    (0..=total).flat_map(move |n| (0..=total - n).map(move |m| [n, m, total - n - m]))
}
