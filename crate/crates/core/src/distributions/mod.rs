//! The SMSN family: parameterizations, densities and samplers.
//!
//! A scale mixture of skew-normal (SMSN) law is the distribution of
//! `μ + U^{-1/2}(Δ|X₀| + X₁)` with `X₀ ~ N(0,1)`, `X₁ ~ N_q(0, Σ)` and a
//! positive mixing variable `U` whose law selects the family member:
//! degenerate at 1 (skew-normal), Gamma(ν/2, ν/2) (skew-t), Beta(ν, 1)
//! (skew-slash) or two-point on {τ, 1} (skew contaminated normal). Setting
//! the shape vector Δ to zero recovers the symmetric scale mixtures of
//! normals.

mod density;
mod ig;
mod sample;

pub use density::{smsn_logpdf, smsn_pdf, SmsnDensity};
pub use ig::{ig_pdf, ig_sample, nig_sample, IgParams, NigParams};
pub(crate) use sample::sample_scale_factor;
pub use sample::{affine_transform, smsn_sample, truncated_normal_sample};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Family tag of an SMSN (or symmetric SMN) distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Family {
    SkewNormal,
    SkewT,
    SkewSlash,
    SkewContaminatedNormal,
    Normal,
    StudentT,
    Slash,
    ContaminatedNormal,
}

impl Family {
    /// Whether the family carries a shape vector.
    pub fn is_skewed(self) -> bool {
        matches!(
            self,
            Family::SkewNormal | Family::SkewT | Family::SkewSlash | Family::SkewContaminatedNormal
        )
    }

    /// The symmetric member with the same mixing distribution.
    pub fn symmetric_counterpart(self) -> Family {
        match self {
            Family::SkewNormal | Family::Normal => Family::Normal,
            Family::SkewT | Family::StudentT => Family::StudentT,
            Family::SkewSlash | Family::Slash => Family::Slash,
            Family::SkewContaminatedNormal | Family::ContaminatedNormal => {
                Family::ContaminatedNormal
            }
        }
    }

    /// Short lowercase code used by the CLI and file formats.
    pub fn code(self) -> &'static str {
        match self {
            Family::Normal => "fmn",
            Family::StudentT => "fmt",
            Family::Slash => "fmsl",
            Family::ContaminatedNormal => "fmcn",
            Family::SkewNormal => "fmsn",
            Family::SkewT => "fmst",
            Family::SkewSlash => "fmssl",
            Family::SkewContaminatedNormal => "fmscn",
        }
    }

    pub fn from_code(code: &str) -> Result<Family> {
        Ok(match code {
            "fmn" => Family::Normal,
            "fmt" => Family::StudentT,
            "fmsl" => Family::Slash,
            "fmcn" => Family::ContaminatedNormal,
            "fmsn" => Family::SkewNormal,
            "fmst" => Family::SkewT,
            "fmssl" => Family::SkewSlash,
            "fmscn" => Family::SkewContaminatedNormal,
            other => {
                return Err(Error::invalid(
                    "family",
                    format!("unknown family code `{other}`"),
                ))
            }
        })
    }

    pub(crate) fn validate_scale_factor(self, nu: &ScaleFactor) -> Result<()> {
        match (self, nu) {
            (Family::SkewNormal | Family::Normal, ScaleFactor::None) => Ok(()),
            (
                Family::SkewT | Family::StudentT | Family::SkewSlash | Family::Slash,
                ScaleFactor::Dof(v),
            ) => {
                if *v > 0.0 && v.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("nu", format!("need ν > 0, got {v}")))
                }
            }
            (
                Family::SkewContaminatedNormal | Family::ContaminatedNormal,
                ScaleFactor::Contamination { rho, tau },
            ) => {
                // τ = 1 is the degenerate point mass at scale one.
                if *rho > 0.0 && *rho < 1.0 && *tau > 0.0 && *tau <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(
                        "nu",
                        format!("need ρ ∈ (0,1) and τ ∈ (0,1], got ρ={rho}, τ={tau}"),
                    ))
                }
            }
            _ => Err(Error::invalid(
                "nu",
                format!("scale factor {nu:?} does not match family {self:?}"),
            )),
        }
    }
}

/// Scale-factor parameter ν of the mixing distribution.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum ScaleFactor {
    /// Skew-normal / normal: no scale factor.
    None,
    /// Skew-t / Student-t (ν degrees of freedom) or skew-slash / slash.
    Dof(f64),
    /// Contaminated normal: contamination weight ρ and scale τ.
    Contamination { rho: f64, tau: f64 },
}

impl ScaleFactor {
    pub fn dof(&self) -> Option<f64> {
        match self {
            ScaleFactor::Dof(v) => Some(*v),
            _ => None,
        }
    }

    pub fn contamination(&self) -> Option<(f64, f64)> {
        match self {
            ScaleFactor::Contamination { rho, tau } => Some((*rho, *tau)),
            _ => None,
        }
    }
}

/// Parameters of one SMSN component: location μ, scale Σ, shape Δ, family and ν.
#[derive(Debug, Clone)]
pub struct SmsnParams {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    delta: DVector<f64>,
    family: Family,
    nu: ScaleFactor,
}

/// Shape vectors below this Euclidean norm route to the symmetric code path.
pub(crate) const DEGENERATE_SHAPE: f64 = 1e-12;

impl SmsnParams {
    pub fn new(
        mu: DVector<f64>,
        sigma: DMatrix<f64>,
        delta: DVector<f64>,
        family: Family,
        nu: ScaleFactor,
    ) -> Result<Self> {
        let q = mu.len();
        if sigma.nrows() != q || sigma.ncols() != q {
            return Err(Error::DimensionMismatch(format!(
                "sigma is {}×{}, expected {q}×{q}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if delta.len() != q {
            return Err(Error::DimensionMismatch(format!(
                "delta has length {}, expected {q}",
                delta.len()
            )));
        }
        if cholesky(&sigma).is_none() {
            return Err(Error::invalid("sigma", "not symmetric positive definite"));
        }
        family.validate_scale_factor(&nu)?;
        if !family.is_skewed() && delta.norm() >= DEGENERATE_SHAPE {
            return Err(Error::invalid(
                "delta",
                "symmetric families require a zero shape vector",
            ));
        }
        Ok(Self {
            mu,
            sigma,
            delta,
            family,
            nu,
        })
    }

    /// Univariate convenience constructor.
    pub fn univariate(
        mu: f64,
        sigma2: f64,
        delta: f64,
        family: Family,
        nu: ScaleFactor,
    ) -> Result<Self> {
        Self::new(
            DVector::from_element(1, mu),
            DMatrix::from_element(1, 1, sigma2),
            DVector::from_element(1, delta),
            family,
            nu,
        )
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn delta(&self) -> &DVector<f64> {
        &self.delta
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn nu(&self) -> &ScaleFactor {
        &self.nu
    }

    /// Ω = Σ + ΔΔᵀ of this component.
    pub fn omega(&self) -> DMatrix<f64> {
        &self.sigma + &self.delta * self.delta.transpose()
    }
}

pub(crate) fn cholesky(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Cholesky::new(m.clone())
}

/// (Ω, λ) from the (Σ, Δ) parameterization: Ω = Σ + ΔΔᵀ,
/// λ = Ω⁻¹Δ / (1 − ΔᵀΩ⁻¹Δ)^{1/2}.
pub fn omega_lambda_from(
    sigma: &DMatrix<f64>,
    delta: &DVector<f64>,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if cholesky(sigma).is_none() {
        return Err(Error::invalid("sigma", "not symmetric positive definite"));
    }
    if sigma.nrows() != delta.len() {
        return Err(Error::DimensionMismatch(format!(
            "sigma is {}×{} but delta has length {}",
            sigma.nrows(),
            sigma.ncols(),
            delta.len()
        )));
    }
    let omega = sigma + delta * delta.transpose();
    let chol = cholesky(&omega).ok_or_else(|| Error::invalid("omega", "Σ + ΔΔᵀ not SPD"))?;
    let omega_inv_delta = chol.solve(delta);
    let s = delta.dot(&omega_inv_delta);
    // ΔᵀΩ⁻¹Δ < 1 holds exactly when Σ is SPD; clamp against roundoff.
    let s = s.min(1.0 - 1e-14);
    let lambda = omega_inv_delta / (1.0 - s).sqrt();
    Ok((omega, lambda))
}

/// (Σ, Δ) from the (Ω, λ) parameterization: δ = λ/(1+λᵀΩλ)^{1/2},
/// Δ = Ωδ, Σ = Ω − ΩδδᵀΩ.
pub fn sigma_delta_from(
    omega: &DMatrix<f64>,
    lambda: &DVector<f64>,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if cholesky(omega).is_none() {
        return Err(Error::invalid("omega", "not symmetric positive definite"));
    }
    if omega.nrows() != lambda.len() {
        return Err(Error::DimensionMismatch(format!(
            "omega is {}×{} but lambda has length {}",
            omega.nrows(),
            omega.ncols(),
            lambda.len()
        )));
    }
    let omega_lambda = omega * lambda;
    let small_delta = lambda / (1.0 + lambda.dot(&omega_lambda)).sqrt();
    let delta = omega * &small_delta;
    let sigma = omega - &delta * delta.transpose();
    Ok((sigma, delta))
}
