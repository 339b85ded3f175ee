//! Joint moments of discretely observed returns and variance.
//!
//! Everything is expressed through the stationary cumulants of `V_0`:
//! kernel integrals give the joint cumulants of `(S_1, U_1, Z_1)`, a
//! recursion turns those into moments, and conditioning on `V_0 = v` turns
//! moments of `(X_1, V_1)` into polynomials in `v`.

mod engine;
mod kernels;
mod poly;
mod trivariate;

pub use engine::{stationary_moment, stationary_moments, MomentEngine, XI_MONOMIALS};
pub use kernels::{binomial, epsilon_coeff, gaussian_even_moment};
pub use poly::PolynomialInV;
pub use trivariate::{
    multi_indices, trivariate_cumulant, Recursion, TrivariateMomentTable, MAX_TOTAL_ORDER,
};
