//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use bns_core::{GammaOuParams, IgOuParams, Model, ModelParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DT: f64 = 1.0 / 250.0;

/// nu=2.56, alpha=64, lambda=256, mu=1.2, beta=-0.5, rho=-0.1, daily grid.
pub fn daily_gamma_ou() -> Model {
    Model::gamma_ou(
        GammaOuParams::new(2.56, 64.0).unwrap(),
        256.0,
        1.2,
        -0.5,
        -0.1,
        DT,
    )
    .unwrap()
}

pub fn daily_ig_ou() -> Model {
    Model::ig_ou(
        IgOuParams::new(2.56, 8.0).unwrap(),
        256.0,
        1.2,
        -0.5,
        -0.1,
        DT,
    )
    .unwrap()
}

/// Uniform draw from the box lambda in [50,500], zeta in [0.01,0.1],
/// eta in [1e-4,5e-3], mu, beta in [-2,2], rho in [-1,1].
pub fn random_theta(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams::new(
        rng.random_range(50.0..500.0),
        rng.random_range(0.01..0.1),
        rng.random_range(1e-4..5e-3),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-1.0..1.0),
        DT,
    )
    .unwrap()
}

pub fn random_thetas(seed: u64, count: usize) -> Vec<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_theta(&mut rng)).collect()
}

/// Gamma-OU model at a random generic point of the box.
pub fn random_gamma_model(rng: &mut ChaCha8Rng) -> Model {
    let p = random_theta(rng);
    Model::gamma_ou(
        GammaOuParams::from_generic(p.zeta(), p.eta()).unwrap(),
        p.lambda(),
        p.mu(),
        p.beta(),
        p.rho(),
        p.delta_t(),
    )
    .unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    (1..=order)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (order as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=order {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite 20-point Gauss-Legendre quadrature, panels doubled until two
/// successive values agree to `tol` relative.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let rule = gauss_legendre(20);
    let composite = |panels: usize| {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let mid = a + (k as f64 + 0.5) * h;
                rule.iter()
                    .map(|(x, w)| w * f(mid + 0.5 * h * x))
                    .sum::<f64>()
                    * 0.5
                    * h
            })
            .sum::<f64>()
    };
    let mut panels = 1;
    let mut prev = composite(panels);
    loop {
        panels *= 2;
        let next = composite(panels);
        if (next - prev).abs() <= tol * next.abs() || panels >= 1 << 12 {
            return next;
        }
        prev = next;
    }
}

/// `n`-th derivative at 0 of an analytic function, by the trapezoid rule on
/// the circle of radius `r` (Cauchy's integral formula).
pub fn contour_derivative<F: Fn(Complex64) -> Complex64>(f: &F, n: usize, r: f64) -> f64 {
    let points = 256;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..points {
        let t = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
        let z = Complex64::from_polar(r, t);
        acc += f(z) * Complex64::from_polar(1.0, -(n as f64) * t);
    }
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    (acc / points as f64).re * factorial / r.powi(n as i32)
}

/// Cumulant generating function of Gamma(nu, rate alpha).
pub fn gamma_cgf(nu: f64, alpha: f64) -> impl Fn(Complex64) -> Complex64 {
    move |t| -nu * (Complex64::new(1.0, 0.0) - t / alpha).ln()
}

/// Cumulant generating function of IG(delta, gamma).
pub fn ig_cgf(delta: f64, gamma: f64) -> impl Fn(Complex64) -> Complex64 {
    move |t| delta * (gamma - (gamma * gamma - 2.0 * t).sqrt())
}

/// Conditional means `f^1..f^6` as `(c0, c1, c2)` coefficient triples,
/// written out by hand with the grid width carried explicitly.
pub fn f_closed_form(p: &ModelParams) -> [[f64; 3]; 6] {
    let (lambda, zeta, eta, mu, beta, rho) =
        (p.lambda(), p.zeta(), p.eta(), p.mu(), p.beta(), p.rho());
    let dt = p.delta_t();
    let g = (-lambda * dt).exp();
    let e = (1.0 - g) / lambda;
    let kappa = mu * dt + beta * zeta * (dt - e) + rho * lambda * dt * zeta;
    [
        [(1.0 - g) * zeta, g, 0.0],
        [0.0, (1.0 - g) * zeta, g],
        [
            (1.0 - g).powi(2) * zeta * zeta + (1.0 - g * g) * eta,
            2.0 * g * (1.0 - g) * zeta,
            g * g,
        ],
        [kappa, beta * e, 0.0],
        [0.0, kappa, beta * e],
        [
            (1.0 - g) * zeta * kappa + (beta * e + 2.0 * rho) * (1.0 - g) * eta,
            kappa * g + beta * e * (1.0 - g) * zeta,
            beta * e * g,
        ],
    ]
}

/// Hand-differentiated Jacobian of the moment limits `xi(theta)` with
/// respect to `(lambda, zeta, eta, mu, beta, rho)`.
pub fn xi_jacobian(p: &ModelParams) -> [[f64; 6]; 6] {
    let (l, z, h, mu, b, r) = (p.lambda(), p.zeta(), p.eta(), p.mu(), p.beta(), p.rho());
    let dt = p.delta_t();
    let g = (-l * dt).exp();
    let e = (1.0 - g) / l;
    let dg = -dt * g;
    let de = (dt * g - e) / l;
    // m = dt (mu + (b + l r) z)
    let m = dt * (mu + (b + l * r) * z);
    let dm = [dt * r * z, dt * (b + l * r), 0.0, dt, dt * z, dt * l * z];
    let mut j = [[0.0; 6]; 6];
    j[0] = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
    j[1] = [dg * h, 2.0 * z, g, 0.0, 0.0, 0.0];
    j[2] = [0.0, 2.0 * z, 1.0, 0.0, 0.0, 0.0];
    j[3] = dm;
    // xi5 = m z + b e h
    j[4] = [
        dm[0] * z + b * de * h,
        dm[1] * z + m,
        b * e,
        dm[3] * z,
        dm[4] * z + e * h,
        dm[5] * z,
    ];
    // xi6 = m z + (b + 2 r l) e h
    let c = b + 2.0 * r * l;
    j[5] = [
        dm[0] * z + 2.0 * r * e * h + c * de * h,
        dm[1] * z + m,
        c * e,
        dm[3] * z,
        dm[4] * z + e * h,
        dm[5] * z + 2.0 * l * e * h,
    ];
    j
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
