//! Numerical building blocks: special functions, stable log-space helpers
//! and adaptive quadrature.

pub mod quad;
pub mod special;

pub use quad::{integrate, QuadratureError};
pub use special::{
    gamma_quantile, ln_phi, ln_student_t_cdf, log_sum_exp, log_sum_exp_pair, norm_cdf,
    norm_quantile,
};
