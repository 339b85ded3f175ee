//! Integrals of the OU kernels over one grid cell.

use crate::model::ModelParams;

/// Exact binomial coefficient, converted to `f64`. Exact for `n <= 60`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

/// `(2i)! / (2^i i!)`, the `2i`-th moment of a standard normal.
pub fn gaussian_even_moment(i: usize) -> f64 {
    (1..=i).map(|j| (2 * j - 1) as f64).product()
}

/// `int_0^Delta [(1 - e^{-lambda(Delta-s)})/lambda]^i [e^{-lambda(Delta-s)}]^j ds`.
///
/// With `u = 1 - e^{-lambda tau}` the integral becomes
/// `lambda^{-(i+1)} int_0^b u^i (1-u)^{j-1} du`, `b = 1 - gamma`. For `j >= 1`
/// that is an incomplete beta function with integer arguments, evaluated by
/// its finite binomial expansion (all terms positive). For `j = 0` the
/// integrand is `u^i / (1-u)` and the tail series `sum_{k>i} b^k / k` is
/// used, switching to `lambda Delta - sum_{k<=i} b^k / k` when `b` is close
/// to one.
pub fn epsilon_coeff(i: usize, j: usize, params: &ModelParams) -> f64 {
    let a = params.lambda() * params.delta_t();
    let b = -(-a).exp_m1();
    let g = (-a).exp();
    let reduced = if j == 0 {
        log_tail(i, a, b)
    } else {
        incomplete_beta_integer(i, j, b, g)
    };
    reduced / params.lambda().powi(i as i32 + 1)
}

/// `int_0^b u^i (1-u)^{j-1} du` for `j >= 1`, with `g = 1 - b` passed in
/// exactly.
fn incomplete_beta_integer(i: usize, j: usize, b: f64, g: f64) -> f64 {
    let total = i + j;
    // B(i+1, j) * C(i+j, t) = i! (j-1)! / (t! (i+j-t)!)
    let log_fact = |n: usize| -> f64 { (1..=n).map(|k| (k as f64).ln()).sum() };
    let prefactor = log_fact(i) + log_fact(j - 1);
    (i + 1..=total)
        .map(|t| {
            let w = (prefactor - log_fact(t) - log_fact(total - t)).exp();
            w * b.powi(t as i32) * g.powi((total - t) as i32)
        })
        .sum()
}

/// `int_0^b u^i / (1-u) du` where `a = -ln(1-b)`.
fn log_tail(i: usize, a: f64, b: f64) -> f64 {
    if b < 0.9 {
        let mut sum = 0.0;
        let mut pow = b.powi(i as i32 + 1);
        let mut k = i + 1;
        loop {
            let term = pow / k as f64;
            sum += term;
            if term <= 1e-18 * sum {
                break;
            }
            pow *= b;
            k += 1;
        }
        sum
    } else {
        let mut partial = 0.0;
        let mut pow = 1.0;
        for k in 1..=i {
            pow *= b;
            partial += pow / k as f64;
        }
        a - partial
    }
}
