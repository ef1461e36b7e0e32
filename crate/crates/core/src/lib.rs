//! Bayesian measurement-error regression with finite mixtures of scale
//! mixtures of skew-normal (SMSN) distributions.
//!
//! The observation model is `Z = a + b·x + ε` with `a = (0, αᵀ)ᵀ` and
//! `b = (1, βᵀ)ᵀ`, where the latent covariate `x` follows a G-component
//! SMSN mixture and the error vector follows the matched symmetric scale
//! mixture of normals; `Z = (X, Yᵀ)ᵀ` collects the noisy measurements of
//! `x` and of the r-dimensional response. The crate provides:
//!
//! - densities, samplers and parameterization maps for the SMSN family
//!   ([`distributions`]) and their finite mixtures ([`mixture`]);
//! - the marginal observation model, its induced mixture form and data
//!   simulators ([`me_model`]);
//! - a Gibbs sampler for the posterior with conjugate block updates and
//!   Metropolis steps for the scale-factor parameters ([`inference`]);
//! - DIC model selection from stored chains ([`model_selection`]);
//! - posterior predictive p-values and data-cloning identifiability
//!   diagnostics ([`diagnostics`]).

pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod fsio;
pub mod inference;
pub mod math;
pub mod me_model;
pub mod mixture;
pub mod model_selection;
pub mod rng;

pub use error::{Error, Result};
pub use rng::RngStream;
