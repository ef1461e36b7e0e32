//! Random variate generation for the SMSN family and supporting laws.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::math::special::{norm_cdf, norm_quantile};
use crate::rng::RngStream;

use super::{cholesky, Family, ScaleFactor, SmsnParams};

/// One draw of the mixing scale factor U ~ H(·|ν).
pub(crate) fn sample_scale_factor(family: Family, nu: &ScaleFactor, rng: &mut RngStream) -> f64 {
    match family.symmetric_counterpart() {
        Family::Normal => 1.0,
        Family::StudentT => {
            let v = nu.dof().expect("validated");
            Gamma::new(v / 2.0, 2.0 / v).expect("valid gamma").sample(rng)
        }
        Family::Slash => {
            // Beta(ν,1) by inverse CDF: u = v^{1/ν}.
            let v = nu.dof().expect("validated");
            rng.uniform_open().powf(1.0 / v)
        }
        Family::ContaminatedNormal => {
            let (rho, tau) = nu.contamination().expect("validated");
            if rng.random::<f64>() < rho {
                tau
            } else {
                1.0
            }
        }
        _ => unreachable!(),
    }
}

/// i.i.d. draws via the constructive representation
/// `μ + Δ·T + U^{-1/2}·chol(Σ)·z` with `T = |N(0, U⁻¹)|`.
///
/// Returns an n×q matrix with one draw per row.
pub fn smsn_sample(params: &SmsnParams, n: usize, rng: &mut RngStream) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one draw"));
    }
    let q = params.dim();
    let chol = cholesky(params.sigma())
        .ok_or_else(|| Error::invalid("sigma", "not symmetric positive definite"))?;
    let l = chol.l();
    let mut out = DMatrix::zeros(n, q);
    let mut z = DVector::zeros(q);
    for i in 0..n {
        let u = sample_scale_factor(params.family(), params.nu(), rng);
        let root_inv_u = 1.0 / u.sqrt();
        let t = {
            let z0: f64 = StandardNormal.sample(rng);
            z0.abs() * root_inv_u
        };
        for k in 0..q {
            z[k] = StandardNormal.sample(rng);
        }
        let noise = &l * &z;
        for k in 0..q {
            out[(i, k)] = params.mu()[k] + params.delta()[k] * t + root_inv_u * noise[k];
        }
    }
    Ok(out)
}

/// Affine image C·Y + d of an SMSN law: SMSN_m(Cμ + d, CΣCᵀ, CΔ, ν).
pub fn affine_transform(
    params: &SmsnParams,
    c: &DMatrix<f64>,
    d: &DVector<f64>,
) -> Result<SmsnParams> {
    let (m, q) = (c.nrows(), c.ncols());
    if q != params.dim() {
        return Err(Error::DimensionMismatch(format!(
            "C has {} columns, distribution dimension is {}",
            q,
            params.dim()
        )));
    }
    if d.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "d has length {}, expected {m}",
            d.len()
        )));
    }
    if m > q || c.clone().svd(false, false).rank(1e-10 * c.norm().max(1.0)) < m {
        return Err(Error::invalid("c", "transform matrix must have full row rank"));
    }
    SmsnParams::new(
        c * params.mu() + d,
        c * params.sigma() * c.transpose(),
        c * params.delta(),
        params.family(),
        *params.nu(),
    )
}

/// Draw from N(mu, var) conditioned on exceeding `lower`.
///
/// Inverse-CDF method on the upper tail: with a = (lower−mu)/sd, the upper
/// tail mass Q(X) is uniform on (0, Φ(−a)), so X = −Φ⁻¹(V·Φ(−a)). The
/// complementary form stays accurate for truncation points deep in the tail.
pub fn truncated_normal_sample(mu: f64, var: f64, lower: f64, rng: &mut RngStream) -> f64 {
    assert!(var > 0.0, "truncated normal needs var > 0, got {var}");
    let sd = var.sqrt();
    if lower == f64::NEG_INFINITY {
        let z: f64 = StandardNormal.sample(rng);
        return mu + sd * z;
    }
    let a = (lower - mu) / sd;
    let upper_mass = norm_cdf(-a);
    let v = rng.uniform_open();
    let z = if upper_mass > 0.0 {
        -norm_quantile((v * upper_mass).max(f64::MIN_POSITIVE))
    } else {
        // Beyond the representable tail (a ≳ 38): exponential tail approximation,
        // X − a | X > a ≈ Exp(a).
        a + (-v.ln()) / a
    };
    let x = mu + sd * z;
    // inverse-CDF rounding can land exactly on the boundary
    if x > lower {
        x
    } else {
        lower + (lower.abs() * f64::EPSILON).max(f64::MIN_POSITIVE)
    }
}
