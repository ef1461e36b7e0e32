//! The Gibbs sweep for the data-augmented FMSMSN-ME posterior.
//!
//! One sweep updates, in order: x_i, T_i, U_i, S_i, (α,β), (μ_j,Δ_j),
//! γ_j⁻² and its hyperparameter f, ω_i⁻², the weights, and the scale-factor
//! parameter ν. All conditionals are conjugate except ν for the skew-t
//! family and τ for the contaminated normal, which use adaptive random-walk
//! Metropolis steps (tuned toward 0.35 acceptance during burn-in only).
//!
//! With a clone weight K > 1 the sampler carries K independent latent
//! replicas per observation, so the marginal posterior of Θ matches the
//! posterior of the K-times replicated dataset while the data stay O(n).

use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution, Gamma as GammaDist, StandardNormal};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::distributions::{truncated_normal_sample, Family, ScaleFactor};
use crate::error::{Error, Result};
use crate::math::special::{gamma_quantile, log_sum_exp};
use crate::me_model::{Dataset, MeTheta};
use crate::rng::RngStream;

use super::init::initialize;
use super::PriorSpec;

/// Bounds applied to every variance draw (γ²_j and ω²_i). The floor keeps
/// degenerate spikes out of the kernel; the cap keeps prior draws for empty
/// components finite under the near-improper Gamma(0.01, ·) hierarchy.
pub const VARIANCE_FLOOR: f64 = 1e-8;
pub const VARIANCE_CAP: f64 = 1e12;
const MH_TARGET_ACCEPTANCE: f64 = 0.35;

#[derive(Debug, Clone)]
struct NuState {
    /// Degrees of freedom (skew-t/t and skew-slash/slash families).
    dof: f64,
    /// Rate of the exponential prior on ν (skew-t hierarchy).
    lambda: f64,
    /// Contamination weight and scale (contaminated-normal families).
    rho: f64,
    tau: f64,
}

/// Data-augmented Gibbs sampler with sweep-level access.
///
/// Besides `sweep`, the sampler exposes prior draws, model-forward draws of
/// latents and data, and data replacement. Those hooks exist for
/// joint-distribution (Geweke-style) validation of the kernel: alternating
/// `sweep` with `redraw_data` must preserve the joint law of (Θ, latents,
/// data) started from `init_from_prior`.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    data: Dataset,
    g: usize,
    family: Family,
    prior: PriorSpec,
    clone_weight: usize,
    n: usize,
    r: usize,
    skewed: bool,
    // latent state, one entry per (replica, observation) pair
    x: Vec<f64>,
    t: Vec<f64>,
    u: Vec<f64>,
    s: Vec<usize>,
    // parameter state
    alpha: Vec<f64>,
    beta: Vec<f64>,
    mu: Vec<f64>,
    delta: Vec<f64>,
    gamma2: Vec<f64>,
    omega2: Vec<f64>,
    weights: Vec<f64>,
    f_hyper: f64,
    nu: NuState,
    // adaptive Metropolis state
    ln_nu_step: f64,
    logit_tau_step: f64,
    adapt_count: u64,
    mh_proposals: u64,
    mh_accepts: u64,
}

impl GibbsSampler {
    pub fn new(
        data: Dataset,
        g: usize,
        family: Family,
        prior: PriorSpec,
        clone_weight: usize,
    ) -> Result<Self> {
        prior.validate()?;
        if g == 0 {
            return Err(Error::invalid("g", "need at least one component"));
        }
        if data.n() < g {
            return Err(Error::invalid(
                "g",
                format!("need at least G = {g} observations, have {}", data.n()),
            ));
        }
        family.validate_scale_factor(&default_scale_factor(family))?;
        let n = data.n();
        let r = data.n_responses();
        let init = initialize(&data, g);
        let big_n = n * clone_weight;
        let mut s = Vec::with_capacity(big_n);
        let mut x = Vec::with_capacity(big_n);
        for k in 0..clone_weight {
            let _ = k;
            for i in 0..n {
                s.push(init.labels[i]);
                x.push(data.x(i));
            }
        }
        let nu = NuState {
            dof: match family.symmetric_counterpart() {
                Family::StudentT => 5.0,
                Family::Slash => 2.0,
                _ => 1.0,
            },
            lambda: 0.5 * (prior.lambda0 + prior.lambda1),
            rho: 0.5,
            tau: 0.5,
        };
        // residual variances around the least-squares line start the ω's
        let mut omega2 = vec![0.0; r + 1];
        let var_x: f64 = {
            let m = (0..n).map(|i| data.x(i)).sum::<f64>() / n as f64;
            (0..n).map(|i| (data.x(i) - m).powi(2)).sum::<f64>() / n as f64
        };
        omega2[0] = (0.5 * var_x).max(1e-4);
        for k in 0..r {
            let resid: f64 = (0..n)
                .map(|i| {
                    let e = data.y(i, k) - init.alpha[k] - init.beta[k] * data.x(i);
                    e * e
                })
                .sum::<f64>()
                / n as f64;
            omega2[k + 1] = resid.max(1e-4);
        }
        Ok(Self {
            g,
            family,
            prior,
            clone_weight,
            n,
            r,
            skewed: family.is_skewed(),
            x,
            t: vec![1.0; big_n],
            u: vec![1.0; big_n],
            s,
            alpha: init.alpha,
            beta: init.beta,
            mu: init.mu,
            delta: vec![0.0; g],
            gamma2: init.gamma2,
            omega2,
            weights: init.weights,
            f_hyper: 1.0,
            nu,
            ln_nu_step: 0.5,
            logit_tau_step: 0.5,
            adapt_count: 0,
            mh_proposals: 0,
            mh_accepts: 0,
            data,
        })
    }

    pub fn n_latent_replicas(&self) -> usize {
        self.clone_weight
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    /// Replace the observed data (dimensions must match). Used by the
    /// successive-conditional simulator in joint-distribution tests.
    pub fn replace_data(&mut self, data: Dataset) -> Result<()> {
        if data.n() != self.n || data.n_responses() != self.r {
            return Err(Error::DimensionMismatch(
                "replacement data must match the original shape".into(),
            ));
        }
        self.data = data;
        Ok(())
    }

    /// Snapshot of the current parameter state.
    pub fn theta(&self) -> MeTheta {
        MeTheta {
            alpha: nalgebra::DVector::from_row_slice(&self.alpha),
            beta: nalgebra::DVector::from_row_slice(&self.beta),
            mu: self.mu.clone(),
            delta: self.delta.clone(),
            gamma2: self.gamma2.clone(),
            omega2: self.omega2.clone(),
            weights: self.weights.clone(),
            family: self.family,
            nu: self.scale_factor(),
        }
    }

    pub fn scale_factor(&self) -> ScaleFactor {
        match self.family.symmetric_counterpart() {
            Family::Normal => ScaleFactor::None,
            Family::StudentT | Family::Slash => ScaleFactor::Dof(self.nu.dof),
            Family::ContaminatedNormal => ScaleFactor::Contamination {
                rho: self.nu.rho,
                tau: self.nu.tau,
            },
            _ => unreachable!(),
        }
    }

    /// Latent state view: (x, s, u, t), one entry per latent replica.
    pub fn latents(&self) -> (&[f64], &[usize], &[f64], &[f64]) {
        (&self.x, &self.s, &self.u, &self.t)
    }

    pub(crate) fn accumulate_latent_summaries(
        &self,
        x_sum: &mut [f64],
        s_counts: &mut [Vec<usize>],
    ) {
        for idx in 0..self.x.len() {
            let row = idx % self.n;
            x_sum[row] += self.x[idx];
            s_counts[row][self.s[idx]] += 1;
        }
    }

    fn check(&self, value: f64, parameter: &str) -> Result<f64> {
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::SamplerAbort {
                sweep: 0,
                parameter: parameter.to_string(),
                reason: format!("drew non-finite value {value}"),
            })
        }
    }

    /// One full Gibbs sweep; `adapt` enables Metropolis step-size tuning and
    /// must only be set during burn-in so the post-burn-in kernel is fixed.
    pub fn sweep(&mut self, rng: &mut RngStream, adapt: bool) -> Result<()> {
        self.update_latent_x(rng)?;
        if self.skewed {
            self.update_latent_t(rng)?;
        }
        self.update_latent_u(rng)?;
        self.update_labels(rng)?;
        self.update_regression(rng)?;
        self.update_component_locations(rng)?;
        self.update_component_scales(rng)?;
        self.rescale_component_move(rng)?;
        self.update_error_scales(rng)?;
        self.update_weights(rng)?;
        self.update_scale_factor_parameter(rng, adapt)?;
        Ok(())
    }

    /// x | rest: normal with precision u·(bᵀΩ⁻¹b + 1/γ²_j); the scale factor
    /// cancels from the mean.
    fn update_latent_x(&mut self, rng: &mut RngStream) -> Result<()> {
        let b_prec = self.b_omega_b();
        for idx in 0..self.x.len() {
            let row = idx % self.n;
            let j = self.s[idx];
            let prior_mean = self.mu[j] + self.delta[j] * self.t[idx];
            let proj = self.b_omega_resid(row);
            let coef = b_prec + 1.0 / self.gamma2[j];
            let mean = (proj + prior_mean / self.gamma2[j]) / coef;
            let sd = (1.0 / (self.u[idx] * coef)).sqrt();
            let z: f64 = StandardNormal.sample(rng);
            self.x[idx] = self.check(mean + sd * z, "x")?;
        }
        Ok(())
    }

    /// bᵀΩ⁻¹b = 1/ω²₀ + Σ_k β_k²/ω²_k.
    fn b_omega_b(&self) -> f64 {
        let mut v = 1.0 / self.omega2[0];
        for k in 0..self.r {
            v += self.beta[k] * self.beta[k] / self.omega2[k + 1];
        }
        v
    }

    /// bᵀΩ⁻¹(Z_i − a) = X_i/ω²₀ + Σ_k β_k(Y_ik − α_k)/ω²_k.
    fn b_omega_resid(&self, row: usize) -> f64 {
        let mut v = self.data.x(row) / self.omega2[0];
        for k in 0..self.r {
            v += self.beta[k] * (self.data.y(row, k) - self.alpha[k]) / self.omega2[k + 1];
        }
        v
    }

    /// T | rest: truncated normal on (0,∞); precision u·(1 + Δ²_j/γ²_j).
    fn update_latent_t(&mut self, rng: &mut RngStream) -> Result<()> {
        for idx in 0..self.t.len() {
            let j = self.s[idx];
            let coef = 1.0 + self.delta[j] * self.delta[j] / self.gamma2[j];
            let mean = self.delta[j] * (self.x[idx] - self.mu[j]) / self.gamma2[j] / coef;
            let var = 1.0 / (self.u[idx] * coef);
            self.t[idx] = self.check(truncated_normal_sample(mean, var, 0.0, rng), "T")?;
        }
        Ok(())
    }

    /// The scale-free quadratic form s_i entering every U conditional:
    /// (Z_i−a−bx)ᵀΩ⁻¹(Z_i−a−bx) + (x−μ_j−Δ_j t)²/γ²_j (+ t² when skewed).
    fn latent_quadratic(&self, idx: usize) -> f64 {
        let row = idx % self.n;
        let x = self.x[idx];
        let j = self.s[idx];
        let mut q = {
            let e0 = self.data.x(row) - x;
            e0 * e0 / self.omega2[0]
        };
        for k in 0..self.r {
            let e = self.data.y(row, k) - self.alpha[k] - self.beta[k] * x;
            q += e * e / self.omega2[k + 1];
        }
        let ex = x - self.mu[j] - self.delta[j] * self.t[idx];
        q += ex * ex / self.gamma2[j];
        if self.skewed {
            q += self.t[idx] * self.t[idx];
        }
        q
    }

    /// Number of half-powers of u contributed by (Z, x[, T]) per observation.
    fn u_exponent(&self) -> f64 {
        let p = (self.r + 1) as f64;
        if self.skewed {
            (p + 2.0) / 2.0
        } else {
            (p + 1.0) / 2.0
        }
    }

    /// U | rest, family-specific.
    fn update_latent_u(&mut self, rng: &mut RngStream) -> Result<()> {
        match self.family.symmetric_counterpart() {
            Family::Normal => Ok(()), // degenerate at 1
            Family::StudentT => {
                let nu = self.nu.dof;
                let eh = self.u_exponent();
                for idx in 0..self.u.len() {
                    let rate = 0.5 * (nu + self.latent_quadratic(idx));
                    let shape = 0.5 * nu + eh;
                    let draw = GammaDist::new(shape, 1.0 / rate)
                        .map_err(|e| Error::SamplerAbort {
                            sweep: 0,
                            parameter: "U".into(),
                            reason: e.to_string(),
                        })?
                        .sample(rng);
                    self.u[idx] = self.check(draw.max(1e-300), "U")?;
                }
                Ok(())
            }
            Family::Slash => {
                let nu = self.nu.dof;
                let eh = self.u_exponent();
                for idx in 0..self.u.len() {
                    let shape = nu + eh;
                    let rate = 0.5 * self.latent_quadratic(idx);
                    self.u[idx] =
                        self.check(truncated_gamma_unit(shape, rate, rng), "U")?;
                }
                Ok(())
            }
            Family::ContaminatedNormal => {
                let eh = self.u_exponent();
                let (rho, tau) = (self.nu.rho, self.nu.tau);
                for idx in 0..self.u.len() {
                    let s = self.latent_quadratic(idx);
                    let ln_tau = rho.ln() + eh * tau.ln() - 0.5 * tau * s;
                    let ln_one = (1.0 - rho).ln() - 0.5 * s;
                    let p_tau = 1.0 / (1.0 + (ln_one - ln_tau).exp());
                    self.u[idx] = if rng.random::<f64>() < p_tau { tau } else { 1.0 };
                }
                Ok(())
            }
            _ => unreachable!(),
        }
    }

    /// S | rest: categorical with weight ∝ p_j·N(x | μ_j + Δ_j t, u⁻¹γ²_j).
    fn update_labels(&mut self, rng: &mut RngStream) -> Result<()> {
        if self.g == 1 {
            return Ok(());
        }
        let mut ln_w = vec![0.0; self.g];
        for idx in 0..self.s.len() {
            let u = self.u[idx];
            for j in 0..self.g {
                let m = self.mu[j] + self.delta[j] * self.t[idx];
                let e = self.x[idx] - m;
                ln_w[j] = self.weights[j].ln() - 0.5 * self.gamma2[j].ln()
                    - 0.5 * u * e * e / self.gamma2[j];
            }
            let norm = log_sum_exp(&ln_w);
            let v: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = self.g - 1;
            for j in 0..self.g {
                acc += (ln_w[j] - norm).exp();
                if v < acc {
                    chosen = j;
                    break;
                }
            }
            self.s[idx] = chosen;
        }
        Ok(())
    }

    /// (α_k, β_k) | rest: independent bivariate-normal conjugate updates per
    /// response coordinate from Y_ik = α_k + β_k·x_i + N(0, ω²_k/u_i).
    fn update_regression(&mut self, rng: &mut RngStream) -> Result<()> {
        let mut sw = 0.0;
        let mut sx = 0.0;
        let mut sxx = 0.0;
        for idx in 0..self.x.len() {
            let u = self.u[idx];
            sw += u;
            sx += u * self.x[idx];
            sxx += u * self.x[idx] * self.x[idx];
        }
        for k in 0..self.r {
            let mut sy = 0.0;
            let mut sxy = 0.0;
            for idx in 0..self.x.len() {
                let y = self.data.y(idx % self.n, k);
                sy += self.u[idx] * y;
                sxy += self.u[idx] * self.x[idx] * y;
            }
            let w2 = self.omega2[k + 1];
            let a11 = 1.0 / self.prior.alpha_var + sw / w2;
            let a12 = sx / w2;
            let a22 = 1.0 / self.prior.beta_var + sxx / w2;
            let r1 = self.prior.alpha_mean / self.prior.alpha_var + sy / w2;
            let r2 = self.prior.beta_mean / self.prior.beta_var + sxy / w2;
            let (a, b) = draw_bivariate_from_precision(a11, a12, a22, r1, r2, rng);
            self.alpha[k] = self.check(a, "alpha")?;
            self.beta[k] = self.check(b, "beta")?;
        }
        Ok(())
    }

    /// (μ_j, Δ_j) | rest: bivariate-normal conjugate update per component
    /// from x_i = μ_j + Δ_j·t_i + N(0, γ²_j/u_i); symmetric families pin
    /// Δ_j = 0 and update μ_j alone.
    fn update_component_locations(&mut self, rng: &mut RngStream) -> Result<()> {
        for j in 0..self.g {
            let mut su = 0.0;
            let mut st = 0.0;
            let mut stt = 0.0;
            let mut sx = 0.0;
            let mut sxt = 0.0;
            for idx in 0..self.x.len() {
                if self.s[idx] != j {
                    continue;
                }
                let u = self.u[idx];
                let t = self.t[idx];
                su += u;
                st += u * t;
                stt += u * t * t;
                sx += u * self.x[idx];
                sxt += u * t * self.x[idx];
            }
            let g2 = self.gamma2[j];
            if self.skewed {
                let a11 = 1.0 / self.prior.mu_var + su / g2;
                let a12 = st / g2;
                let a22 = 1.0 / self.prior.delta_var + stt / g2;
                let r1 = self.prior.mu_mean / self.prior.mu_var + sx / g2;
                let r2 = self.prior.delta_mean / self.prior.delta_var + sxt / g2;
                let (m, d) = draw_bivariate_from_precision(a11, a12, a22, r1, r2, rng);
                self.mu[j] = self.check(m, "mu")?;
                self.delta[j] = self.check(d, "delta")?;
            } else {
                let prec = 1.0 / self.prior.mu_var + su / g2;
                let mean = (self.prior.mu_mean / self.prior.mu_var + sx / g2) / prec;
                let z: f64 = StandardNormal.sample(rng);
                self.mu[j] = self.check(mean + z / prec.sqrt(), "mu")?;
            }
        }
        Ok(())
    }

    /// γ_j⁻² | rest ~ Gamma(e + n_j/2, f + ½Σ u·eₓ²), then the hyperparameter
    /// f | rest ~ Gamma(g + G·e, h + Σ γ_j⁻²). Empty components fall back to
    /// the prior automatically because their sums vanish.
    fn update_component_scales(&mut self, rng: &mut RngStream) -> Result<()> {
        for j in 0..self.g {
            let mut count = 0.0;
            let mut ssq = 0.0;
            for idx in 0..self.x.len() {
                if self.s[idx] != j {
                    continue;
                }
                let e = self.x[idx] - self.mu[j] - self.delta[j] * self.t[idx];
                count += 1.0;
                ssq += self.u[idx] * e * e;
            }
            let shape = self.prior.gamma_shape + 0.5 * count;
            let rate = self.f_hyper + 0.5 * ssq;
            let prec = GammaDist::new(shape, 1.0 / rate)
                .map_err(|e| Error::SamplerAbort {
                    sweep: 0,
                    parameter: "gamma2".into(),
                    reason: e.to_string(),
                })?
                .sample(rng);
            self.gamma2[j] =
                self.check((1.0 / prec).clamp(VARIANCE_FLOOR, VARIANCE_CAP), "gamma2")?;
        }
        let shape = self.prior.f_shape + self.g as f64 * self.prior.gamma_shape;
        let rate = self.prior.f_rate + self.gamma2.iter().map(|g2| 1.0 / g2).sum::<f64>();
        self.f_hyper = self.check(
            GammaDist::new(shape, 1.0 / rate)
                .map_err(|e| Error::SamplerAbort {
                    sweep: 0,
                    parameter: "f".into(),
                    reason: e.to_string(),
                })?
                .sample(rng),
            "f",
        )?;
        Ok(())
    }

    /// Joint Metropolis scaling move on (γ²_j, x_{i: S_i=j}): propose
    /// γ²' = γ²·e^ζ and x' = m_ij + (x − m_ij)·e^{ζ/2}, which leaves the
    /// x-prior quadratic invariant. The conjugate γ⁻² draw alone mixes
    /// extremely slowly out of the γ² → 0 likelihood spike of skewed
    /// mixtures, where the latent x collapse onto μ_j + Δ_j·t and the
    /// feedback keeps γ² pinned; this move breaks that loop.
    ///
    /// Log acceptance: −e·ζ − f·(φ' − φ) + Δ log N_p(z | a + b·x', U⁻¹Ω),
    /// combining the Gamma(e, f) precision prior, the invariant x-prior
    /// block and the transformation Jacobian e^{ζ(1 + n_j/2)}.
    fn rescale_component_move(&mut self, rng: &mut RngStream) -> Result<()> {
        const SCALE_STEP: f64 = 0.7;
        let b_prec = self.b_omega_b();
        for j in 0..self.g {
            let zeta: f64 = SCALE_STEP * {
                let z: f64 = StandardNormal.sample(rng);
                z
            };
            let gamma2_new = self.gamma2[j] * zeta.exp();
            if !(VARIANCE_FLOOR..=VARIANCE_CAP).contains(&gamma2_new) {
                continue;
            }
            let half = (0.5 * zeta).exp();
            let mut delta_z = 0.0;
            let members: Vec<usize> =
                (0..self.x.len()).filter(|&i| self.s[i] == j).collect();
            let mut proposals = Vec::with_capacity(members.len());
            for &idx in &members {
                let row = idx % self.n;
                let m = self.mu[j] + self.delta[j] * self.t[idx];
                let x_new = m + (self.x[idx] - m) * half;
                // Z-likelihood change through the quadratic form only:
                // −u/2·[(z−a−bx')ᵀΩ⁻¹(z−a−bx') − (z−a−bx)ᵀΩ⁻¹(z−a−bx)],
                // expanded via bᵀΩ⁻¹b and bᵀΩ⁻¹(z−a)
                let proj = self.b_omega_resid(row);
                let old_q = b_prec * self.x[idx] * self.x[idx] - 2.0 * proj * self.x[idx];
                let new_q = b_prec * x_new * x_new - 2.0 * proj * x_new;
                delta_z -= 0.5 * self.u[idx] * (new_q - old_q);
                proposals.push(x_new);
            }
            let phi_old = 1.0 / self.gamma2[j];
            let phi_new = 1.0 / gamma2_new;
            let ln_accept =
                -self.prior.gamma_shape * zeta - self.f_hyper * (phi_new - phi_old) + delta_z;
            if rng.random::<f64>().ln() < ln_accept {
                self.gamma2[j] = gamma2_new;
                for (&idx, &x_new) in members.iter().zip(&proposals) {
                    self.x[idx] = x_new;
                }
            }
        }
        Ok(())
    }

    /// ω_k⁻² | rest ~ Gamma(l + N/2, m + ½Σ u·e_k²).
    fn update_error_scales(&mut self, rng: &mut RngStream) -> Result<()> {
        let big_n = self.x.len() as f64;
        for k in 0..=self.r {
            let mut ssq = 0.0;
            for idx in 0..self.x.len() {
                let row = idx % self.n;
                let e = if k == 0 {
                    self.data.x(row) - self.x[idx]
                } else {
                    self.data.y(row, k - 1) - self.alpha[k - 1] - self.beta[k - 1] * self.x[idx]
                };
                ssq += self.u[idx] * e * e;
            }
            let shape = self.prior.omega_shape + 0.5 * big_n;
            let rate = self.prior.omega_rate + 0.5 * ssq;
            let prec = GammaDist::new(shape, 1.0 / rate)
                .map_err(|e| Error::SamplerAbort {
                    sweep: 0,
                    parameter: "omega2".into(),
                    reason: e.to_string(),
                })?
                .sample(rng);
            self.omega2[k] =
                self.check((1.0 / prec).clamp(VARIANCE_FLOOR, VARIANCE_CAP), "omega2")?;
        }
        Ok(())
    }

    /// weights | rest ~ Dirichlet(κ + counts), via normalized gamma draws.
    fn update_weights(&mut self, rng: &mut RngStream) -> Result<()> {
        if self.g == 1 {
            self.weights[0] = 1.0;
            return Ok(());
        }
        let mut counts = vec![0.0f64; self.g];
        for &s in &self.s {
            counts[s] += 1.0;
        }
        let mut raw = vec![0.0; self.g];
        for j in 0..self.g {
            raw[j] = GammaDist::new(self.prior.kappa + counts[j], 1.0)
                .map_err(|e| Error::SamplerAbort {
                    sweep: 0,
                    parameter: "weights".into(),
                    reason: e.to_string(),
                })?
                .sample(rng);
            raw[j] = raw[j].max(1e-300);
        }
        let total: f64 = raw.iter().sum();
        for j in 0..self.g {
            self.weights[j] = self.check(raw[j] / total, "weights")?;
        }
        Ok(())
    }

    fn update_scale_factor_parameter(&mut self, rng: &mut RngStream, adapt: bool) -> Result<()> {
        match self.family.symmetric_counterpart() {
            Family::Normal => Ok(()),
            Family::StudentT => self.update_nu_skewt(rng, adapt),
            Family::Slash => self.update_nu_slash(rng),
            Family::ContaminatedNormal => self.update_nu_scn(rng, adapt),
            _ => unreachable!(),
        }
    }

    /// ν | U (skew-t): Metropolis on log ν against
    /// exp(−λν)·∏ Gamma(u_i | ν/2, ν/2), then λ | ν from its conditional
    /// ∝ λ·e^{−νλ} on (λ₀, λ₁) — a Gamma(2, ν) truncated to the interval.
    fn update_nu_skewt(&mut self, rng: &mut RngStream, adapt: bool) -> Result<()> {
        let sum_ln_u: f64 = self.u.iter().map(|u| u.ln()).sum();
        let sum_u: f64 = self.u.iter().sum();
        let big_n = self.u.len() as f64;
        let lambda = self.nu.lambda;
        let ln_target = |nu: f64| -> f64 {
            let half = 0.5 * nu;
            -lambda * nu + big_n * (half * half.ln() - ln_gamma(half))
                + (half - 1.0) * sum_ln_u
                - half * sum_u
        };
        let current = self.nu.dof;
        let z: f64 = StandardNormal.sample(rng);
        let proposal = (current.ln() + self.ln_nu_step * z).exp();
        let ln_ratio = ln_target(proposal) - ln_target(current) + proposal.ln() - current.ln();
        let accept_prob = ln_ratio.exp().min(1.0);
        self.mh_proposals += 1;
        if rng.random::<f64>() < accept_prob {
            self.nu.dof = self.check(proposal, "nu")?;
            self.mh_accepts += 1;
        }
        if adapt {
            self.adapt_count += 1;
            let gain = (self.adapt_count as f64).powf(-0.6);
            self.ln_nu_step =
                (self.ln_nu_step.ln() + gain * (accept_prob - MH_TARGET_ACCEPTANCE)).exp();
            self.ln_nu_step = self.ln_nu_step.clamp(1e-3, 10.0);
        }
        // λ | ν: inverse CDF of the truncated Gamma(2, ν)
        let f0 = gamma_lr(2.0, self.nu.dof * self.prior.lambda0);
        let f1 = gamma_lr(2.0, self.nu.dof * self.prior.lambda1);
        let v = rng.uniform_open();
        let target = f0 + v * (f1 - f0);
        let lam = if f1 - f0 > 1e-14 {
            gamma_quantile(target.clamp(1e-300, 1.0 - 1e-16), 2.0, self.nu.dof)
        } else {
            self.prior.lambda0
        };
        self.nu.lambda = lam.clamp(self.prior.lambda0, self.prior.lambda1);
        Ok(())
    }

    /// ν | U (skew-slash): conjugate Gamma(φ_sl + N, ψ_sl − Σ log u_i).
    fn update_nu_slash(&mut self, rng: &mut RngStream) -> Result<()> {
        let sum_ln_u: f64 = self.u.iter().map(|u| u.ln()).sum();
        let shape = self.prior.slash_shape + self.u.len() as f64;
        let rate = self.prior.slash_rate - sum_ln_u;
        let draw = GammaDist::new(shape, 1.0 / rate)
            .map_err(|e| Error::SamplerAbort {
                sweep: 0,
                parameter: "nu".into(),
                reason: e.to_string(),
            })?
            .sample(rng);
        self.nu.dof = self.check(draw.max(1e-6), "nu")?;
        Ok(())
    }

    /// (ρ, τ) | rest: ρ is Beta-conjugate in the contamination indicators;
    /// τ uses Metropolis on the logit scale and rewrites the contaminated
    /// U_i to the accepted value.
    fn update_nu_scn(&mut self, rng: &mut RngStream, adapt: bool) -> Result<()> {
        let contaminated: Vec<usize> = (0..self.u.len()).filter(|&i| self.u[i] != 1.0).collect();
        let n_tau = contaminated.len() as f64;
        let big_n = self.u.len() as f64;
        let rho = BetaDist::new(self.prior.rho_a + n_tau, self.prior.rho_b + big_n - n_tau)
            .map_err(|e| Error::SamplerAbort {
                sweep: 0,
                parameter: "rho".into(),
                reason: e.to_string(),
            })?
            .sample(rng);
        self.nu.rho = self.check(rho.clamp(1e-12, 1.0 - 1e-12), "rho")?;

        let s_sum: f64 = contaminated.iter().map(|&i| self.latent_quadratic(i)).sum();
        let eh = self.u_exponent();
        let (ta, tb) = (self.prior.tau_a, self.prior.tau_b);
        let ln_target = |tau: f64| -> f64 {
            (ta - 1.0 + n_tau * eh) * tau.ln() + (tb - 1.0) * (1.0 - tau).ln() - 0.5 * tau * s_sum
        };
        let current = self.nu.tau;
        let logit = (current / (1.0 - current)).ln();
        let z: f64 = StandardNormal.sample(rng);
        let proposal_logit = logit + self.logit_tau_step * z;
        let proposal = 1.0 / (1.0 + (-proposal_logit).exp());
        let accept_prob = if proposal > 0.0 && proposal < 1.0 {
            let ln_jacobian =
                (proposal.ln() + (1.0 - proposal).ln()) - (current.ln() + (1.0 - current).ln());
            (ln_target(proposal) - ln_target(current) + ln_jacobian)
                .exp()
                .min(1.0)
        } else {
            0.0
        };
        self.mh_proposals += 1;
        if rng.random::<f64>() < accept_prob {
            self.nu.tau = self.check(proposal, "tau")?;
            self.mh_accepts += 1;
            for &i in &contaminated {
                self.u[i] = self.nu.tau;
            }
        }
        if adapt {
            self.adapt_count += 1;
            let gain = (self.adapt_count as f64).powf(-0.6);
            self.logit_tau_step =
                (self.logit_tau_step.ln() + gain * (accept_prob - MH_TARGET_ACCEPTANCE)).exp();
            self.logit_tau_step = self.logit_tau_step.clamp(1e-3, 10.0);
        }
        Ok(())
    }

    /// Current Metropolis step sizes (log-ν walk, logit-τ walk).
    pub fn mh_steps(&self) -> (f64, f64) {
        (self.ln_nu_step, self.logit_tau_step)
    }

    /// Realized Metropolis acceptance rate since construction.
    pub fn mh_acceptance_rate(&self) -> f64 {
        if self.mh_proposals == 0 {
            f64::NAN
        } else {
            self.mh_accepts as f64 / self.mh_proposals as f64
        }
    }

    // ------------------------------------------------------------------
    // joint-distribution testing hooks
    // ------------------------------------------------------------------

    /// Draw Θ (and hyperparameters) from the prior.
    pub fn init_from_prior(&mut self, rng: &mut RngStream) -> Result<()> {
        let p = &self.prior;
        for k in 0..self.r {
            let z: f64 = StandardNormal.sample(rng);
            self.alpha[k] = p.alpha_mean + p.alpha_var.sqrt() * z;
            let z: f64 = StandardNormal.sample(rng);
            self.beta[k] = p.beta_mean + p.beta_var.sqrt() * z;
        }
        self.f_hyper = GammaDist::new(p.f_shape, 1.0 / p.f_rate).unwrap().sample(rng);
        for j in 0..self.g {
            let z: f64 = StandardNormal.sample(rng);
            self.mu[j] = p.mu_mean + p.mu_var.sqrt() * z;
            self.delta[j] = if self.skewed {
                let z: f64 = StandardNormal.sample(rng);
                p.delta_mean + p.delta_var.sqrt() * z
            } else {
                0.0
            };
            let prec = GammaDist::new(p.gamma_shape, 1.0 / self.f_hyper)
                .unwrap()
                .sample(rng);
            self.gamma2[j] = (1.0 / prec).clamp(VARIANCE_FLOOR, VARIANCE_CAP);
        }
        for k in 0..=self.r {
            let prec = GammaDist::new(p.omega_shape, 1.0 / p.omega_rate)
                .unwrap()
                .sample(rng);
            self.omega2[k] = (1.0 / prec).clamp(VARIANCE_FLOOR, VARIANCE_CAP);
        }
        let mut raw = vec![0.0; self.g];
        for j in 0..self.g {
            raw[j] = GammaDist::new(p.kappa, 1.0).unwrap().sample(rng).max(1e-300);
        }
        let total: f64 = raw.iter().sum();
        for j in 0..self.g {
            self.weights[j] = raw[j] / total;
        }
        match self.family.symmetric_counterpart() {
            Family::Normal => {}
            Family::StudentT => {
                self.nu.lambda = p.lambda0 + (p.lambda1 - p.lambda0) * rng.random::<f64>();
                self.nu.dof = -rng.uniform_open().ln() / self.nu.lambda;
            }
            Family::Slash => {
                self.nu.dof = GammaDist::new(p.slash_shape, 1.0 / p.slash_rate)
                    .unwrap()
                    .sample(rng)
                    .max(1e-6);
            }
            Family::ContaminatedNormal => {
                self.nu.rho = BetaDist::new(p.rho_a, p.rho_b).unwrap().sample(rng);
                self.nu.tau = BetaDist::new(p.tau_a, p.tau_b)
                    .unwrap()
                    .sample(rng)
                    .clamp(1e-12, 1.0 - 1e-12);
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    /// Draw latents from the model given the current Θ.
    pub fn draw_latents_from_model(&mut self, rng: &mut RngStream) -> Result<()> {
        for idx in 0..self.x.len() {
            let j = crate::mixture::sample_label(&self.weights, rng);
            let u = crate::distributions::sample_scale_factor(
                self.family,
                &self.scale_factor(),
                rng,
            );
            let t = if self.skewed {
                truncated_normal_sample(0.0, 1.0 / u, 0.0, rng)
            } else {
                1.0
            };
            let z: f64 = StandardNormal.sample(rng);
            self.s[idx] = j;
            self.u[idx] = u;
            self.t[idx] = t;
            self.x[idx] =
                self.mu[j] + self.delta[j] * t + (self.gamma2[j] / u).sqrt() * z;
        }
        Ok(())
    }

    /// Redraw the observed data from Z_i | x_i, U_i ~ N_p(a + b·x_i, U⁻¹Ω).
    /// With clone replicas the first replica's latents generate the data.
    pub fn redraw_data(&mut self, rng: &mut RngStream) -> Result<()> {
        let mut z = self.data.matrix().clone();
        for i in 0..self.n {
            let u = self.u[i];
            let x = self.x[i];
            let e0: f64 = StandardNormal.sample(rng);
            z[(i, 0)] = x + (self.omega2[0] / u).sqrt() * e0;
            for k in 0..self.r {
                let ek: f64 = StandardNormal.sample(rng);
                z[(i, k + 1)] =
                    self.alpha[k] + self.beta[k] * x + (self.omega2[k + 1] / u).sqrt() * ek;
            }
        }
        self.data = Dataset::new(z)?;
        Ok(())
    }
}

fn default_scale_factor(family: Family) -> ScaleFactor {
    match family.symmetric_counterpart() {
        Family::Normal => ScaleFactor::None,
        Family::StudentT | Family::Slash => ScaleFactor::Dof(3.0),
        Family::ContaminatedNormal => ScaleFactor::Contamination { rho: 0.5, tau: 0.5 },
        _ => unreachable!(),
    }
}

/// Draw from the bivariate normal with precision [[a11,a12],[a12,a22]] and
/// right-hand side (r1, r2): mean = A⁻¹r, covariance = A⁻¹.
fn draw_bivariate_from_precision(
    a11: f64,
    a12: f64,
    a22: f64,
    r1: f64,
    r2: f64,
    rng: &mut RngStream,
) -> (f64, f64) {
    let det = a11 * a22 - a12 * a12;
    let mean1 = (a22 * r1 - a12 * r2) / det;
    let mean2 = (a11 * r2 - a12 * r1) / det;
    // covariance = [[a22, -a12], [-a12, a11]]/det; its Cholesky factor:
    let c11 = (a22 / det).sqrt();
    let c21 = -a12 / det / c11;
    let c22 = (a11 / det - c21 * c21).max(0.0).sqrt();
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    (mean1 + c11 * z1, mean2 + c21 * z1 + c22 * z2)
}

/// Inverse-CDF draw from Gamma(shape, rate) restricted to (0, 1), through
/// the regularized incomplete gamma function.
fn truncated_gamma_unit(shape: f64, rate: f64, rng: &mut RngStream) -> f64 {
    let mass = gamma_lr(shape, rate);
    let v = rng.uniform_open();
    if mass <= 0.0 {
        // all mass numerically above 1: the exp factor is flat on (0,1) and
        // the conditional collapses to Beta(shape, 1)
        return v.powf(1.0 / shape);
    }
    let target = (v * mass).clamp(1e-300, 1.0 - 1e-16);
    gamma_quantile(target, shape, rate).clamp(1e-300, 1.0)
}
