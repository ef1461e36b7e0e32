//! Posterior inference: prior specification, the Gibbs sampler and chain
//! post-processing.

mod init;
mod persist;
mod sampler;

pub use persist::{read_chain, write_chain, RunManifest};
pub use sampler::GibbsSampler;

use serde::{Deserialize, Serialize};

use crate::distributions::{Family, ScaleFactor};
use crate::error::{Error, Result};
use crate::me_model::{observed_loglik, Dataset, MeTheta};
use crate::rng::RngStream;

/// Hyperparameters of the hierarchical prior.
///
/// Location blocks (α, β, μ_j, Δ_j) get independent normal priors with a
/// common mean/variance per block. Scales follow the gamma hierarchy
/// γ_j⁻²|f ~ Gamma(e, f), f ~ Gamma(g, h) and ω_i⁻² ~ Gamma(l, m); the
/// weights a Dirichlet(κ,…,κ). Family-specific scale-factor priors:
/// ν ~ Exp(λ) with λ ~ U(λ₀, λ₁) for skew-t, ν ~ Gamma(φ_sl, ψ_sl) for
/// skew-slash, ρ ~ Beta(ρ₀, ρ₁) and τ ~ Beta(τ₀, τ₁) for the contaminated
/// normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub alpha_mean: f64,
    pub alpha_var: f64,
    pub beta_mean: f64,
    pub beta_var: f64,
    pub mu_mean: f64,
    pub mu_var: f64,
    pub delta_mean: f64,
    pub delta_var: f64,
    /// e of γ_j⁻²|f ~ Gamma(e, f)
    pub gamma_shape: f64,
    /// (g, h) of f ~ Gamma(g, h)
    pub f_shape: f64,
    pub f_rate: f64,
    /// (l, m) of ω_i⁻² ~ Gamma(l, m)
    pub omega_shape: f64,
    pub omega_rate: f64,
    /// Dirichlet concentration, shared across components
    pub kappa: f64,
    /// skew-t: ν ~ Exp(λ), λ ~ U(λ₀, λ₁)
    pub lambda0: f64,
    pub lambda1: f64,
    /// skew-slash: ν ~ Gamma(φ_sl, ψ_sl)
    pub slash_shape: f64,
    pub slash_rate: f64,
    /// contaminated normal: ρ ~ Beta(ρ₀, ρ₁), τ ~ Beta(τ₀, τ₁)
    pub rho_a: f64,
    pub rho_b: f64,
    pub tau_a: f64,
    pub tau_b: f64,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            alpha_mean: 0.0,
            alpha_var: 1e4,
            beta_mean: 0.0,
            beta_var: 1e4,
            mu_mean: 0.0,
            mu_var: 1e4,
            delta_mean: 0.0,
            delta_var: 1e4,
            gamma_shape: 0.01,
            f_shape: 0.01,
            f_rate: 0.01,
            omega_shape: 0.01,
            omega_rate: 0.01,
            kappa: 1.0,
            lambda0: 0.04,
            lambda1: 0.5,
            slash_shape: 0.01,
            slash_rate: 0.01,
            rho_a: 1.0,
            rho_b: 1.0,
            tau_a: 1.0,
            tau_b: 1.0,
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha_var", self.alpha_var),
            ("beta_var", self.beta_var),
            ("mu_var", self.mu_var),
            ("delta_var", self.delta_var),
            ("gamma_shape", self.gamma_shape),
            ("f_shape", self.f_shape),
            ("f_rate", self.f_rate),
            ("omega_shape", self.omega_shape),
            ("omega_rate", self.omega_rate),
            ("kappa", self.kappa),
            ("slash_shape", self.slash_shape),
            ("slash_rate", self.slash_rate),
            ("rho_a", self.rho_a),
            ("rho_b", self.rho_b),
            ("tau_a", self.tau_a),
            ("tau_b", self.tau_b),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        if !(self.lambda0 > 0.0 && self.lambda0 < self.lambda1) {
            return Err(Error::invalid(
                "lambda0/lambda1",
                "need 0 < λ₀ < λ₁ for the skew-t hyperprior",
            ));
        }
        Ok(())
    }
}

/// MCMC run configuration. Defaults mirror the simulation studies:
/// 25,000 iterations, 5,000 burn-in, thinning 30.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 25_000,
            burnin: 5_000,
            thin: 30,
            seed: 0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burnin {
            return Err(Error::invalid(
                "iterations",
                format!(
                    "total iterations ({}) must exceed burn-in ({})",
                    self.iterations, self.burnin
                ),
            ));
        }
        if self.thin == 0 {
            return Err(Error::invalid("thin", "thinning must be at least 1"));
        }
        Ok(())
    }

    /// Number of stored draws: floor((iterations − burnin)/thin).
    pub fn stored_draws(&self) -> usize {
        (self.iterations - self.burnin) / self.thin
    }
}

/// Stored posterior draws plus latent summaries and run metadata.
#[derive(Debug, Clone)]
pub struct Chain {
    pub draws: Vec<MeTheta>,
    /// Observed-data log-likelihood at each stored draw.
    pub loglik: Vec<f64>,
    /// Posterior mean of the latent covariate per observation.
    pub latent_x_mean: Vec<f64>,
    /// Modal component assignment per observation (0-based).
    pub latent_s_mode: Vec<usize>,
    pub config: McmcConfig,
    pub family: Family,
    pub n_components: usize,
    pub n_responses: usize,
    pub relabeled: bool,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Posterior mean of the stored draws. Weights are renormalized after
    /// averaging; ν is averaged on its natural scale.
    pub fn posterior_mean(&self) -> MeTheta {
        assert!(!self.draws.is_empty(), "posterior mean of an empty chain");
        let l = self.draws.len() as f64;
        let template = &self.draws[0];
        let r = template.n_responses();
        let g = template.n_components();
        let mut mean = MeTheta {
            alpha: nalgebra::DVector::zeros(r),
            beta: nalgebra::DVector::zeros(r),
            mu: vec![0.0; g],
            delta: vec![0.0; g],
            gamma2: vec![0.0; g],
            omega2: vec![0.0; r + 1],
            weights: vec![0.0; g],
            family: template.family,
            nu: template.nu,
        };
        let mut nu_dof = 0.0;
        let mut nu_rho = 0.0;
        let mut nu_tau = 0.0;
        for draw in &self.draws {
            mean.alpha += &draw.alpha;
            mean.beta += &draw.beta;
            for j in 0..g {
                mean.mu[j] += draw.mu[j];
                mean.delta[j] += draw.delta[j];
                mean.gamma2[j] += draw.gamma2[j];
                mean.weights[j] += draw.weights[j];
            }
            for k in 0..=r {
                mean.omega2[k] += draw.omega2[k];
            }
            match draw.nu {
                ScaleFactor::None => {}
                ScaleFactor::Dof(v) => nu_dof += v,
                ScaleFactor::Contamination { rho, tau } => {
                    nu_rho += rho;
                    nu_tau += tau;
                }
            }
        }
        mean.alpha /= l;
        mean.beta /= l;
        for j in 0..g {
            mean.mu[j] /= l;
            mean.delta[j] /= l;
            mean.gamma2[j] /= l;
            mean.weights[j] /= l;
        }
        for k in 0..=r {
            mean.omega2[k] /= l;
        }
        let total: f64 = mean.weights.iter().sum();
        for w in &mut mean.weights {
            *w /= total;
        }
        mean.nu = match template.nu {
            ScaleFactor::None => ScaleFactor::None,
            ScaleFactor::Dof(_) => ScaleFactor::Dof(nu_dof / l),
            ScaleFactor::Contamination { .. } => ScaleFactor::Contamination {
                rho: nu_rho / l,
                tau: nu_tau / l,
            },
        };
        mean
    }
}

/// Fit the FMSMSN-ME model by the data-augmented Gibbs sweep.
pub fn gibbs_fit(
    data: &Dataset,
    g: usize,
    family: Family,
    prior: &PriorSpec,
    config: &McmcConfig,
) -> Result<Chain> {
    gibbs_fit_cloned(data, g, family, prior, config, 1)
}

/// `gibbs_fit` against the K-cloned posterior ∝ π(Θ)·∏ᵢ π(zᵢ|Θ)^K.
///
/// The data are never materialized K times; the sampler carries K latent
/// replicas per observation, which leaves the marginal posterior of Θ equal
/// to the one implied by replicating the dataset.
pub fn gibbs_fit_cloned(
    data: &Dataset,
    g: usize,
    family: Family,
    prior: &PriorSpec,
    config: &McmcConfig,
    clone_weight: usize,
) -> Result<Chain> {
    let mut rng = RngStream::root(config.seed);
    gibbs_fit_stream(data, g, family, prior, config, clone_weight, &mut rng)
}

/// Fit using an externally supplied random stream (clone levels and
/// concurrent chains derive their streams from the master seed).
pub fn gibbs_fit_stream(
    data: &Dataset,
    g: usize,
    family: Family,
    prior: &PriorSpec,
    config: &McmcConfig,
    clone_weight: usize,
    rng: &mut RngStream,
) -> Result<Chain> {
    config.validate()?;
    prior.validate()?;
    if clone_weight == 0 {
        return Err(Error::invalid("clone_weight", "must be at least 1"));
    }
    if data.n() < g {
        return Err(Error::invalid(
            "g",
            format!("need at least G = {g} observations, have {}", data.n()),
        ));
    }
    let mut sampler = GibbsSampler::new(data.clone(), g, family, prior.clone(), clone_weight)?;
    let stored = config.stored_draws();
    let mut draws = Vec::with_capacity(stored);
    let mut loglik = Vec::with_capacity(stored);
    let mut x_sum = vec![0.0; data.n()];
    let mut s_counts = vec![vec![0usize; g]; data.n()];
    for sweep in 1..=config.iterations {
        let adapt = sweep <= config.burnin;
        sampler.sweep(rng, adapt).map_err(|e| match e {
            Error::SamplerAbort {
                parameter, reason, ..
            } => Error::SamplerAbort {
                sweep,
                parameter,
                reason,
            },
            other => other,
        })?;
        if sweep > config.burnin && (sweep - config.burnin) % config.thin == 0 {
            let theta = sampler.theta();
            loglik.push(observed_loglik(&theta, data)?);
            draws.push(theta);
            sampler.accumulate_latent_summaries(&mut x_sum, &mut s_counts);
        }
    }
    let denom = (draws.len() * clone_weight) as f64;
    let latent_x_mean = x_sum.iter().map(|s| s / denom).collect();
    let latent_s_mode = s_counts
        .iter()
        .map(|counts| {
            counts
                .iter()
                .enumerate()
                .max_by_key(|(_, &c)| c)
                .map(|(j, _)| j)
                .unwrap_or(0)
        })
        .collect();
    Ok(Chain {
        draws,
        loglik,
        latent_x_mean,
        latent_s_mode,
        config: *config,
        family,
        n_components: g,
        n_responses: data.n_responses(),
        relabeled: g == 1,
    })
}

/// Post-hoc relabeling: per stored draw, permute component labels to
/// minimize the squared distance of the component locations to a running
/// reference ordering (initialized by sorting the first draw on μ). The
/// per-draw observed log-likelihood is label-invariant and left untouched.
pub fn relabel_chain(chain: &Chain) -> Chain {
    let g = chain.n_components;
    if g <= 1 || chain.draws.is_empty() {
        let mut out = chain.clone();
        out.relabeled = true;
        return out;
    }
    let mut out = chain.clone();
    let mut reference: Vec<f64> = {
        let mut mu = chain.draws[0].mu.clone();
        mu.sort_by(f64::total_cmp);
        mu
    };
    let mut seen = 0.0f64;
    for draw in &mut out.draws {
        let perm = best_permutation(&draw.mu, &reference);
        apply_permutation(draw, &perm);
        seen += 1.0;
        for j in 0..g {
            reference[j] += (draw.mu[j] - reference[j]) / seen;
        }
    }
    // latent mode labels refer to the as-sampled labeling; with separated
    // components the permutation is the identity on essentially all draws
    out.relabeled = true;
    out
}

/// Minimizing permutation of `mu` against `reference` (brute force; G is
/// small). `perm[new_slot] = old_index`.
fn best_permutation(mu: &[f64], reference: &[f64]) -> Vec<usize> {
    let g = mu.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut indices: Vec<usize> = (0..g).collect();
    permute(&mut indices, 0, &mut |perm| {
        let cost: f64 = (0..g).map(|j| (mu[perm[j]] - reference[j]).powi(2)).sum();
        match &best {
            Some((c, _)) if *c <= cost => {}
            _ => best = Some((cost, perm.to_vec())),
        }
    });
    best.expect("at least one permutation").1
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

fn apply_permutation(theta: &mut MeTheta, perm: &[usize]) {
    let take = |v: &[f64]| -> Vec<f64> { perm.iter().map(|&j| v[j]).collect() };
    theta.mu = take(&theta.mu);
    theta.delta = take(&theta.delta);
    theta.gamma2 = take(&theta.gamma2);
    theta.weights = take(&theta.weights);
}
