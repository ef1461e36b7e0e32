//! The SMSN finite-mixture measurement-error observation model.
//!
//! `Z = a + b·x + ε` with `a = (0, αᵀ)ᵀ`, `b = (1, βᵀ)ᵀ`; the latent
//! covariate `x` follows a G-component SMSN mixture, the error vector the
//! matched symmetric family with diagonal scale Ω = diag(ω²₀,…,ω²_r) and a
//! scale factor shared with `x` within each observation. Marginally each
//! observation is an SMSN mixture with component parameters
//! ξ_j = a + μ_j b, Λ_j = Δ_j b, Σ_j = γ²_j b bᵀ + Ω.

mod io;

pub use io::{read_dataset_csv, write_dataset_csv, write_latents_csv};

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::distributions::{
    ig_sample, sample_scale_factor, truncated_normal_sample, Family, IgParams, ScaleFactor,
    SmsnParams,
};
use crate::error::{Error, Result};
use crate::mixture::{sample_label, MixtureSpec};
use crate::rng::RngStream;

/// Full parameter vector Θ of the FMSMSN-ME model.
#[derive(Debug, Clone, PartialEq)]
pub struct MeTheta {
    pub alpha: DVector<f64>,
    pub beta: DVector<f64>,
    pub mu: Vec<f64>,
    pub delta: Vec<f64>,
    pub gamma2: Vec<f64>,
    pub omega2: Vec<f64>,
    pub weights: Vec<f64>,
    pub family: Family,
    pub nu: ScaleFactor,
}

impl MeTheta {
    pub fn validate(&self) -> Result<()> {
        let g = self.mu.len();
        let r = self.alpha.len();
        if r == 0 {
            return Err(Error::invalid("alpha", "need at least one response (r ≥ 1)"));
        }
        if self.beta.len() != r {
            return Err(Error::DimensionMismatch("alpha and beta lengths differ".into()));
        }
        if g == 0 {
            return Err(Error::invalid("mu", "need at least one component"));
        }
        if self.delta.len() != g || self.gamma2.len() != g || self.weights.len() != g {
            return Err(Error::DimensionMismatch(
                "mu, delta, gamma2 and weights must all have length G".into(),
            ));
        }
        if self.omega2.len() != r + 1 {
            return Err(Error::DimensionMismatch(format!(
                "omega2 has length {}, expected r+1 = {}",
                self.omega2.len(),
                r + 1
            )));
        }
        if self.gamma2.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("gamma2", "component scales must be positive"));
        }
        if self.omega2.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("omega2", "error scales must be positive"));
        }
        let total: f64 = self.weights.iter().sum();
        if self.weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(
                "weights",
                format!("weights must be nonnegative and sum to 1 (sum {total})"),
            ));
        }
        if !self.family.is_skewed() && self.delta.iter().any(|&d| d != 0.0) {
            return Err(Error::invalid(
                "delta",
                "symmetric families require zero component shapes",
            ));
        }
        self.family.validate_scale_factor(&self.nu)?;
        Ok(())
    }

    pub fn n_components(&self) -> usize {
        self.mu.len()
    }

    pub fn n_responses(&self) -> usize {
        self.alpha.len()
    }

    /// Observation dimension p = r + 1.
    pub fn dim(&self) -> usize {
        self.alpha.len() + 1
    }

    /// a = (0, αᵀ)ᵀ; the leading zero keeps the model identifiable.
    pub fn a(&self) -> DVector<f64> {
        let mut a = DVector::zeros(self.dim());
        for k in 0..self.alpha.len() {
            a[k + 1] = self.alpha[k];
        }
        a
    }

    /// b = (1, βᵀ)ᵀ; the leading one keeps the model identifiable.
    pub fn b(&self) -> DVector<f64> {
        let mut b = DVector::zeros(self.dim());
        b[0] = 1.0;
        for k in 0..self.beta.len() {
            b[k + 1] = self.beta[k];
        }
        b
    }
}

/// Observed sample: n rows of Z = (X, Yᵀ)ᵀ, p = r + 1 columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    z: DMatrix<f64>,
}

impl Dataset {
    pub fn new(z: DMatrix<f64>) -> Result<Self> {
        if z.nrows() == 0 {
            return Err(Error::invalid("z", "need at least one observation"));
        }
        if z.ncols() < 2 {
            return Err(Error::invalid("z", "need p ≥ 2 columns (X plus at least one Y)"));
        }
        for i in 0..z.nrows() {
            for j in 0..z.ncols() {
                if !z[(i, j)].is_finite() {
                    return Err(Error::MalformedData {
                        row: i + 1,
                        reason: format!("non-finite entry in column {}", j + 1),
                    });
                }
            }
        }
        Ok(Self { z })
    }

    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    pub fn n_responses(&self) -> usize {
        self.z.ncols() - 1
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.z.row(i).transpose()
    }

    /// X measurement of observation i (first coordinate of Z).
    pub fn x(&self, i: usize) -> f64 {
        self.z[(i, 0)]
    }

    /// Y_k measurement of observation i, k in 0..r.
    pub fn y(&self, i: usize, k: usize) -> f64 {
        self.z[(i, k + 1)]
    }
}

/// The SMSN mixture induced on Z by a parameter vector Θ.
#[derive(Debug, Clone)]
pub struct InducedMixture {
    pub xi: Vec<DVector<f64>>,
    pub lambda: Vec<DVector<f64>>,
    pub sigma: Vec<DMatrix<f64>>,
    pub weights: Vec<f64>,
    pub family: Family,
    pub nu: ScaleFactor,
}

impl InducedMixture {
    /// View the induced parameters as an ordinary mixture specification.
    pub fn as_mixture_spec(&self) -> Result<MixtureSpec> {
        let components = (0..self.weights.len())
            .map(|j| {
                SmsnParams::new(
                    self.xi[j].clone(),
                    self.sigma[j].clone(),
                    self.lambda[j].clone(),
                    self.family,
                    self.nu,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        MixtureSpec::new(components, self.weights.clone())
    }
}

/// ξ_j = a + μ_j b, Λ_j = Δ_j b and Σ_j = γ²_j b bᵀ + Ω for every component.
///
/// Σ_j is assembled from the closed block structure: Σ_j[0,0] = γ²_j + ω²₀,
/// first row/column γ²_j β, lower-right block γ²_j ββᵀ + diag(ω²₁..ω²_r).
pub fn induced_mixture(theta: &MeTheta) -> Result<InducedMixture> {
    theta.validate()?;
    let p = theta.dim();
    let r = theta.n_responses();
    let a = theta.a();
    let b = theta.b();
    let g = theta.n_components();
    let mut xi = Vec::with_capacity(g);
    let mut lambda = Vec::with_capacity(g);
    let mut sigma = Vec::with_capacity(g);
    for j in 0..g {
        xi.push(&a + &b * theta.mu[j]);
        lambda.push(&b * theta.delta[j]);
        let g2 = theta.gamma2[j];
        let mut s = DMatrix::zeros(p, p);
        s[(0, 0)] = g2 + theta.omega2[0];
        for k in 0..r {
            let v = g2 * theta.beta[k];
            s[(0, k + 1)] = v;
            s[(k + 1, 0)] = v;
            for l in 0..r {
                s[(k + 1, l + 1)] = g2 * theta.beta[k] * theta.beta[l];
            }
            s[(k + 1, k + 1)] += theta.omega2[k + 1];
        }
        sigma.push(s);
    }
    Ok(InducedMixture {
        xi,
        lambda,
        sigma,
        weights: theta.weights.clone(),
        family: theta.family,
        nu: theta.nu,
    })
}

/// Observed-data log-likelihood Σᵢ log Σⱼ pⱼ·SMSN_p(zᵢ | ξⱼ, Σⱼ, Λⱼ, ν).
pub fn observed_loglik(theta: &MeTheta, data: &Dataset) -> Result<f64> {
    if data.dim() != theta.dim() {
        return Err(Error::DimensionMismatch(format!(
            "data has p = {}, model has p = {}",
            data.dim(),
            theta.dim()
        )));
    }
    let density = induced_mixture(theta)?.as_mixture_spec()?.density()?;
    let mut total = 0.0;
    for i in 0..data.n() {
        let lp = density
            .logpdf(&data.row(i))
            .map_err(|e| Error::DensityFailure {
                row: i,
                reason: e.to_string(),
            })?;
        total += lp;
    }
    Ok(total)
}

/// Latent draws accompanying a simulated dataset.
#[derive(Debug, Clone)]
pub struct MeLatents {
    pub x: Vec<f64>,
    pub s: Vec<usize>,
    pub u: Vec<f64>,
    pub t: Vec<f64>,
}

/// Simulate n observations from the FMSMSN-ME model via its stochastic
/// representation, returning the latent variables for use as test oracles.
pub fn simulate_me(theta: &MeTheta, n: usize, rng: &mut RngStream) -> Result<(Dataset, MeLatents)> {
    theta.validate()?;
    if n == 0 {
        return Err(Error::invalid("n", "need at least one observation"));
    }
    let p = theta.dim();
    let r = theta.n_responses();
    let mut z = DMatrix::zeros(n, p);
    let mut latents = MeLatents {
        x: Vec::with_capacity(n),
        s: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        t: Vec::with_capacity(n),
    };
    for i in 0..n {
        let s = sample_label(&theta.weights, rng);
        let u = sample_scale_factor(theta.family, &theta.nu, rng);
        let t = truncated_normal_sample(0.0, 1.0 / u, 0.0, rng);
        let zx: f64 = StandardNormal.sample(rng);
        let x = theta.mu[s] + theta.delta[s] * t + (theta.gamma2[s] / u).sqrt() * zx;
        let e0: f64 = StandardNormal.sample(rng);
        z[(i, 0)] = x + (theta.omega2[0] / u).sqrt() * e0;
        for k in 0..r {
            let ek: f64 = StandardNormal.sample(rng);
            z[(i, k + 1)] = theta.alpha[k]
                + theta.beta[k] * x
                + (theta.omega2[k + 1] / u).sqrt() * ek;
        }
        latents.x.push(x);
        latents.s.push(s);
        latents.u.push(u);
        latents.t.push(t);
    }
    Ok((Dataset::new(z)?, latents))
}

/// One NIG mixture component for the FMNIG-ME generator.
#[derive(Debug, Clone, Copy)]
pub struct FmnigComponent {
    pub mu: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// Settings of the FMNIG-ME generator: a NIG mixture for x plus the
/// regression structure; the error scale Ω is diagonal with det(Ω) = 1.
#[derive(Debug, Clone)]
pub struct FmnigSettings {
    pub components: Vec<FmnigComponent>,
    pub weights: Vec<f64>,
    pub alpha: DVector<f64>,
    pub beta: DVector<f64>,
    pub omega2: Vec<f64>,
}

impl FmnigSettings {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() || self.components.len() != self.weights.len() {
            return Err(Error::DimensionMismatch(
                "components and weights must be non-empty and equal length".into(),
            ));
        }
        for (j, c) in self.components.iter().enumerate() {
            IgParams::new(c.gamma, c.delta)
                .map_err(|e| Error::invalid("components", format!("component {j}: {e}")))?;
        }
        let total: f64 = self.weights.iter().sum();
        if self.weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-8 {
            return Err(Error::invalid("weights", "weights must lie on the simplex"));
        }
        if self.omega2.len() != self.alpha.len() + 1 || self.beta.len() != self.alpha.len() {
            return Err(Error::DimensionMismatch(
                "omega2 must have length r+1 and alpha/beta length r".into(),
            ));
        }
        let det: f64 = self.omega2.iter().product();
        if (det - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(
                "omega2",
                format!("det(Ω) must equal 1 within 1e-10, got {det}"),
            ));
        }
        Ok(())
    }
}

/// Latents accompanying an FMNIG-ME simulation.
#[derive(Debug, Clone)]
pub struct FmnigLatents {
    pub x: Vec<f64>,
    pub s: Vec<usize>,
    pub u: Vec<f64>,
}

/// Simulate from the FMNIG-ME model: S ~ categorical(p),
/// U|S=j ~ IG(γ_j, δ_j), x|U,S ~ N(μ_j + uλ_j, u), Z|x,U ~ N_p(a+bx, uΩ).
pub fn simulate_fmnig_me(
    settings: &FmnigSettings,
    n: usize,
    rng: &mut RngStream,
) -> Result<(Dataset, FmnigLatents)> {
    settings.validate()?;
    if n == 0 {
        return Err(Error::invalid("n", "need at least one observation"));
    }
    let r = settings.alpha.len();
    let mut z = DMatrix::zeros(n, r + 1);
    let mut latents = FmnigLatents {
        x: Vec::with_capacity(n),
        s: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
    };
    for i in 0..n {
        let s = sample_label(&settings.weights, rng);
        let c = settings.components[s];
        let u = ig_sample(&IgParams::new(c.gamma, c.delta).expect("validated"), rng);
        let zx: f64 = StandardNormal.sample(rng);
        let x = c.mu + u * c.lambda + u.sqrt() * zx;
        let e0: f64 = StandardNormal.sample(rng);
        z[(i, 0)] = x + (u * settings.omega2[0]).sqrt() * e0;
        for k in 0..r {
            let ek: f64 = StandardNormal.sample(rng);
            z[(i, k + 1)] = settings.alpha[k]
                + settings.beta[k] * x
                + (u * settings.omega2[k + 1]).sqrt() * ek;
        }
        latents.x.push(x);
        latents.s.push(s);
        latents.u.push(u);
    }
    Ok((Dataset::new(z)?, latents))
}
