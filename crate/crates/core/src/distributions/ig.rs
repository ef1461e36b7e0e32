//! Inverse Gaussian and normal inverse-Gaussian laws.
//!
//! Parameterized as IG(γ, δ) with density
//! (δ/√(2π)) u^{-3/2} exp{−½(δ²/u + γ²u − 2δγ)}, i.e. mean δ/γ and shape δ².
//! The NIG is the normal mean-variance mixture X|U ~ N_p(μ + uΔλ, uΔ) over
//! U ~ IG(γ, δ); det(Δ) = 1 keeps the parameterization identifiable.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, InverseGaussian, StandardNormal};

use crate::error::{Error, Result};
use crate::math::special::LN_2PI;
use crate::rng::RngStream;

use super::cholesky;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgParams {
    pub gamma: f64,
    pub delta: f64,
}

impl IgParams {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma", format!("need γ > 0, got {gamma}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid("delta", format!("need δ > 0, got {delta}")));
        }
        Ok(Self { gamma, delta })
    }

    pub fn mean(&self) -> f64 {
        self.delta / self.gamma
    }
}

/// IG(γ, δ) density at `u`.
pub fn ig_pdf(u: f64, params: &IgParams) -> Result<f64> {
    if u <= 0.0 {
        return Err(Error::invalid("u", format!("IG support is u > 0, got {u}")));
    }
    let IgParams { gamma, delta } = *params;
    let ln = delta.ln() - 0.5 * LN_2PI - 1.5 * u.ln()
        - 0.5 * (delta * delta / u + gamma * gamma * u - 2.0 * delta * gamma);
    Ok(ln.exp())
}

/// One IG(γ, δ) draw by the Michael–Schucany–Haas transformation method.
pub fn ig_sample(params: &IgParams, rng: &mut RngStream) -> f64 {
    let mean = params.delta / params.gamma;
    let shape = params.delta * params.delta;
    InverseGaussian::new(mean, shape)
        .expect("validated parameters")
        .sample(rng)
}

/// Parameters of a p-dimensional NIG distribution.
#[derive(Debug, Clone)]
pub struct NigParams {
    pub mu: DVector<f64>,
    pub capdelta: DMatrix<f64>,
    pub lambda: DVector<f64>,
    pub ig: IgParams,
}

impl NigParams {
    pub fn new(
        mu: DVector<f64>,
        capdelta: DMatrix<f64>,
        lambda: DVector<f64>,
        gamma: f64,
        delta: f64,
    ) -> Result<Self> {
        let p = mu.len();
        if capdelta.nrows() != p || capdelta.ncols() != p || lambda.len() != p {
            return Err(Error::DimensionMismatch(
                "mu, capdelta and lambda dimensions disagree".into(),
            ));
        }
        let chol = cholesky(&capdelta)
            .ok_or_else(|| Error::invalid("capdelta", "not symmetric positive definite"))?;
        let det: f64 = chol.l().diagonal().iter().map(|d| d * d).product();
        if (det - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(
                "capdelta",
                format!("det must equal 1 (got {det}); the restriction ensures identifiability"),
            ));
        }
        Ok(Self {
            mu,
            capdelta,
            lambda,
            ig: IgParams::new(gamma, delta)?,
        })
    }
}

/// i.i.d. NIG draws via the two-stage representation; one draw per row.
pub fn nig_sample(params: &NigParams, n: usize, rng: &mut RngStream) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one draw"));
    }
    let p = params.mu.len();
    let chol = cholesky(&params.capdelta).expect("validated at construction");
    let l = chol.l();
    let drift = &params.capdelta * &params.lambda;
    let mut out = DMatrix::zeros(n, p);
    let mut z = DVector::zeros(p);
    for i in 0..n {
        let u = ig_sample(&params.ig, rng);
        for k in 0..p {
            z[k] = StandardNormal.sample(rng);
        }
        let noise = &l * &z;
        for k in 0..p {
            out[(i, k)] = params.mu[k] + u * drift[k] + u.sqrt() * noise[k];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::quad::integrate;
    use approx::assert_relative_eq;

    #[test]
    fn ig_pdf_point_value() {
        // γ=δ=1 at u=1: exponent cancels, pdf = 1/√(2π)
        let p = IgParams::new(1.0, 1.0).unwrap();
        assert_relative_eq!(
            ig_pdf(1.0, &p).unwrap(),
            1.0 / (2.0 * std::f64::consts::PI).sqrt(),
            epsilon = 1e-12
        );
        assert!(ig_pdf(0.0, &p).is_err());
        assert!(ig_pdf(-1.0, &p).is_err());
    }

    #[test]
    fn ig_pdf_normalizes() {
        let p = IgParams::new(1.0, 0.5).unwrap();
        let mass = integrate(
            |u| ig_pdf(u.max(1e-12), &p).unwrap(),
            1e-12,
            80.0,
            1e-10,
            0.0,
            400,
        )
        .unwrap();
        assert_relative_eq!(mass, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn ig_sample_mean() {
        let p = IgParams::new(1.0, 1.0).unwrap();
        let mut rng = RngStream::root(31);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| ig_sample(&p, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var =
            draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}, se {se}");
        assert!(draws.iter().all(|&u| u > 0.0));
    }

    #[test]
    fn nig_symmetric_mean_is_mu() {
        let p = NigParams::new(
            DVector::from_element(1, 2.0),
            DMatrix::identity(1, 1),
            DVector::zeros(1),
            1.0,
            0.8,
        )
        .unwrap();
        let mut rng = RngStream::root(32);
        let draws = nig_sample(&p, 100_000, &mut rng).unwrap();
        let xs: Vec<f64> = draws.column(0).iter().cloned().collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (xs.len() as f64 - 1.0);
        let se = (var / xs.len() as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se);
    }

    #[test]
    fn nig_skewed_mean_matches_iterated_expectation() {
        // E[X] = μ + λ·E[U] = μ + λδ/γ for p=1, Δ=1
        let p = NigParams::new(
            DVector::from_element(1, 1.0),
            DMatrix::identity(1, 1),
            DVector::from_element(1, 2.0),
            1.0,
            1.0,
        )
        .unwrap();
        let mut rng = RngStream::root(33);
        let draws = nig_sample(&p, 200_000, &mut rng).unwrap();
        let xs: Vec<f64> = draws.column(0).iter().cloned().collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (xs.len() as f64 - 1.0);
        let se = (var / xs.len() as f64).sqrt();
        assert!(
            (mean - 3.0).abs() < 3.0 * se,
            "mean {mean} vs 3.0 (se {se})"
        );
    }

    #[test]
    fn nig_gaussian_limit_has_no_skewness() {
        // γ = δ = 10³ concentrates U at 1, so X is close to normal.
        let p = NigParams::new(
            DVector::from_element(1, 0.0),
            DMatrix::identity(1, 1),
            DVector::from_element(1, 1.0),
            1e3,
            1e3,
        )
        .unwrap();
        let mut rng = RngStream::root(34);
        let draws = nig_sample(&p, 100_000, &mut rng).unwrap();
        let xs: Vec<f64> = draws.column(0).iter().cloned().collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
        let skew = m3 / m2.powf(1.5);
        // MC error of the skewness estimate is about √(6/n) ≈ 0.0077
        assert!(skew.abs() < 3.0 * (6.0 / n).sqrt(), "skewness {skew}");
    }

    #[test]
    fn nig_rejects_non_unit_determinant() {
        let bad = NigParams::new(
            DVector::zeros(2),
            DMatrix::identity(2, 2) * 2.0,
            DVector::zeros(2),
            1.0,
            1.0,
        );
        assert!(bad.is_err());
    }
}
