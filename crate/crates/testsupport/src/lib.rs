//! Shared fixtures for the integration and acceptance suites: simulation
//! setups, Geweke-style joint-distribution machinery and distribution-layer
//! property checks.

use nalgebra::{DMatrix, DVector};
use smsnme::distributions::{Family, ScaleFactor};
use smsnme::inference::{GibbsSampler, PriorSpec};
use smsnme::me_model::{Dataset, FmnigComponent, FmnigSettings, MeTheta};
use smsnme::RngStream;

/// The simulation-study setup: α=(0.4,0.1), β=(0.8,0.9), ω²=(0.2,0.3,0.4),
/// μ=(2,8), Δ=(−2,2), γ²=(0.1,0.1), p=(0.7,0.3); symmetric families drop Δ.
pub fn sim1_theta(family: Family, nu: ScaleFactor) -> MeTheta {
    MeTheta {
        alpha: DVector::from_row_slice(&[0.4, 0.1]),
        beta: DVector::from_row_slice(&[0.8, 0.9]),
        mu: vec![2.0, 8.0],
        delta: if family.is_skewed() {
            vec![-2.0, 2.0]
        } else {
            vec![0.0, 0.0]
        },
        gamma2: vec![0.1, 0.1],
        omega2: vec![0.2, 0.3, 0.4],
        weights: vec![0.7, 0.3],
        family,
        nu,
    }
}

/// The NIG mixture data-generator scenario: p=(0.4,0.3,0.3), μ=(−10,1,10),
/// λ=(−2,1,−2), Ω=I₃, α=(0.4,0.1), β=(0.8,0.9), δ=0.5, γ=1.
pub fn sim2_nig_settings() -> FmnigSettings {
    FmnigSettings {
        components: vec![
            FmnigComponent { mu: -10.0, lambda: -2.0, gamma: 1.0, delta: 0.5 },
            FmnigComponent { mu: 1.0, lambda: 1.0, gamma: 1.0, delta: 0.5 },
            FmnigComponent { mu: 10.0, lambda: -2.0, gamma: 1.0, delta: 0.5 },
        ],
        weights: vec![0.4, 0.3, 0.3],
        alpha: DVector::from_row_slice(&[0.4, 0.1]),
        beta: DVector::from_row_slice(&[0.8, 0.9]),
        omega2: vec![1.0, 1.0, 1.0],
    }
}

// ---------------------------------------------------------------------
// Geweke-style joint-distribution machinery
// ---------------------------------------------------------------------

pub const GEWEKE_OBS: usize = 5;
pub const GEWEKE_COMPONENTS: usize = 2;

/// Moderate proper prior: joint-distribution moment comparisons need the
/// test functions to have finite, stable variances, which the vague
/// defaults do not provide.
pub fn geweke_prior() -> PriorSpec {
    PriorSpec {
        alpha_mean: 0.5,
        alpha_var: 1.0,
        beta_mean: 1.0,
        beta_var: 1.0,
        mu_mean: 0.0,
        mu_var: 2.0,
        delta_mean: 0.0,
        delta_var: 1.0,
        gamma_shape: 5.0,
        f_shape: 10.0,
        f_rate: 2.0,
        omega_shape: 5.0,
        omega_rate: 5.0,
        kappa: 2.0,
        ..PriorSpec::default()
    }
}

pub fn geweke_sampler() -> GibbsSampler {
    let data =
        Dataset::new(DMatrix::from_fn(GEWEKE_OBS, 2, |i, j| (i + j) as f64 * 0.1 + 0.1)).unwrap();
    GibbsSampler::new(
        data,
        GEWEKE_COMPONENTS,
        Family::SkewNormal,
        geweke_prior(),
        1,
    )
    .unwrap()
}

pub const GEWEKE_TEST_FUNCTION_NAMES: [&str; 10] = [
    "alpha1",
    "alpha1^2",
    "beta1",
    "beta1^2",
    "sum mu",
    "sum mu^2",
    "sum delta",
    "sum gamma2",
    "sum omega2 + sum p^2",
    "mean x + mean t",
];

/// Ten test functions of (Θ, latents); component-indexed quantities enter
/// through label-invariant statistics.
pub fn geweke_test_functions(sampler: &GibbsSampler) -> [f64; 10] {
    let theta = sampler.theta();
    let (x, _, _, t) = sampler.latents();
    let mean_x = x.iter().sum::<f64>() / x.len() as f64;
    let mean_t = t.iter().sum::<f64>() / t.len() as f64;
    [
        theta.alpha[0],
        theta.alpha[0] * theta.alpha[0],
        theta.beta[0],
        theta.beta[0] * theta.beta[0],
        theta.mu.iter().sum::<f64>(),
        theta.mu.iter().map(|m| m * m).sum::<f64>(),
        theta.delta.iter().sum::<f64>(),
        theta.gamma2.iter().sum::<f64>(),
        theta.omega2.iter().sum::<f64>() + theta.weights.iter().map(|p| p * p).sum::<f64>(),
        mean_x + mean_t,
    ]
}

pub struct Moments {
    pub mean: [f64; 10],
    pub se: [f64; 10],
}

/// Independent draws from the joint law: Θ ~ prior, latents ~ model | Θ,
/// data ~ model | latents.
pub fn geweke_forward_moments(draws: usize, seed: u64) -> Moments {
    let mut sampler = geweke_sampler();
    let mut rng = RngStream::root(seed);
    let mut sums = [0.0; 10];
    let mut sums_sq = [0.0; 10];
    for _ in 0..draws {
        sampler.init_from_prior(&mut rng).unwrap();
        sampler.draw_latents_from_model(&mut rng).unwrap();
        sampler.redraw_data(&mut rng).unwrap();
        let f = geweke_test_functions(&sampler);
        for k in 0..10 {
            sums[k] += f[k];
            sums_sq[k] += f[k] * f[k];
        }
    }
    let n = draws as f64;
    let mut mean = [0.0; 10];
    let mut se = [0.0; 10];
    for k in 0..10 {
        mean[k] = sums[k] / n;
        let var = (sums_sq[k] / n - mean[k] * mean[k]).max(0.0);
        se[k] = (var / n).sqrt();
    }
    Moments { mean, se }
}

/// Successive-conditional simulation: one Gibbs sweep then a data redraw,
/// batched means for autocorrelation-aware standard errors.
pub fn geweke_successive_moments(draws: usize, seed: u64) -> Moments {
    let mut sampler = geweke_sampler();
    let mut rng = RngStream::root(seed);
    sampler.init_from_prior(&mut rng).unwrap();
    sampler.draw_latents_from_model(&mut rng).unwrap();
    sampler.redraw_data(&mut rng).unwrap();
    let batches = 100;
    let batch_len = draws / batches;
    let mut batch_means = vec![[0.0f64; 10]; batches];
    let mut grand = [0.0f64; 10];
    for b in 0..batches {
        for _ in 0..batch_len {
            sampler.sweep(&mut rng, false).unwrap();
            sampler.redraw_data(&mut rng).unwrap();
            let f = geweke_test_functions(&sampler);
            for k in 0..10 {
                batch_means[b][k] += f[k];
            }
        }
        for k in 0..10 {
            batch_means[b][k] /= batch_len as f64;
            grand[k] += batch_means[b][k];
        }
    }
    let mut mean = [0.0; 10];
    let mut se = [0.0; 10];
    for k in 0..10 {
        mean[k] = grand[k] / batches as f64;
        let var = batch_means
            .iter()
            .map(|bm| (bm[k] - mean[k]) * (bm[k] - mean[k]))
            .sum::<f64>()
            / (batches as f64 - 1.0);
        se[k] = (var / batches as f64).sqrt();
    }
    Moments { mean, se }
}

/// z-scores of forward vs successive moments for the 10 test functions.
pub fn geweke_z_scores(draws: usize, forward_seed: u64, successive_seed: u64) -> [f64; 10] {
    let forward = geweke_forward_moments(draws, forward_seed);
    let successive = geweke_successive_moments(draws, successive_seed);
    let mut z = [0.0; 10];
    for k in 0..10 {
        let se = (forward.se[k] * forward.se[k] + successive.se[k] * successive.se[k]).sqrt();
        z[k] = (forward.mean[k] - successive.mean[k]) / se;
    }
    z
}

// ---------------------------------------------------------------------
// distribution-layer property checks (shared with the acceptance suite)
// ---------------------------------------------------------------------

use smsnme::distributions::{smsn_logpdf, smsn_sample, SmsnParams};
use smsnme::math::integrate;

/// One representative per family with tails that fit a 12-scale-unit window.
pub fn family_test_cases() -> Vec<SmsnParams> {
    let skew = 1.0;
    vec![
        SmsnParams::univariate(0.3, 1.2, skew, Family::SkewNormal, ScaleFactor::None).unwrap(),
        SmsnParams::univariate(0.3, 1.2, skew, Family::SkewT, ScaleFactor::Dof(6.0)).unwrap(),
        SmsnParams::univariate(0.3, 1.2, skew, Family::SkewSlash, ScaleFactor::Dof(3.0)).unwrap(),
        SmsnParams::univariate(
            0.3,
            1.2,
            skew,
            Family::SkewContaminatedNormal,
            ScaleFactor::Contamination { rho: 0.3, tau: 0.4 },
        )
        .unwrap(),
        SmsnParams::univariate(0.3, 1.2, 0.0, Family::Normal, ScaleFactor::None).unwrap(),
        SmsnParams::univariate(0.3, 1.2, 0.0, Family::StudentT, ScaleFactor::Dof(6.0)).unwrap(),
        SmsnParams::univariate(0.3, 1.2, 0.0, Family::Slash, ScaleFactor::Dof(3.0)).unwrap(),
        SmsnParams::univariate(
            0.3,
            1.2,
            0.0,
            Family::ContaminatedNormal,
            ScaleFactor::Contamination { rho: 0.3, tau: 0.4 },
        )
        .unwrap(),
    ]
}

/// Scale unit of a univariate component: √Ω with Ω = Σ + Δ².
pub fn scale_unit(params: &SmsnParams) -> f64 {
    (params.sigma()[(0, 0)] + params.delta()[0] * params.delta()[0]).sqrt()
}

/// ∫ pdf over the μ ± 12·scale window by adaptive quadrature.
pub fn normalization_mass(params: &SmsnParams) -> f64 {
    let mu = params.mu()[0];
    let s = scale_unit(params);
    integrate(
        |x| {
            smsn_logpdf(&DVector::from_element(1, x), params)
                .unwrap()
                .exp()
        },
        mu - 12.0 * s,
        mu + 12.0 * s,
        1e-10,
        1e-12,
        400,
    )
    .unwrap()
}

/// One-sample KS statistic of `n` sampler draws against the numeric CDF of
/// the density, together with the 1% critical value.
pub fn sampler_density_ks(params: &SmsnParams, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = RngStream::root(seed);
    let draws = smsn_sample(params, n, &mut rng).unwrap();
    let mut xs: Vec<f64> = draws.column(0).iter().cloned().collect();
    xs.sort_by(f64::total_cmp);
    // cumulative trapezoid CDF on a fine grid covering draws and core mass
    let mu = params.mu()[0];
    let s = scale_unit(params);
    let lo = (mu - 14.0 * s).min(xs[0] - s);
    let hi = (mu + 14.0 * s).max(xs[xs.len() - 1] + s);
    let grid_n = 8001usize;
    let h = (hi - lo) / (grid_n - 1) as f64;
    let mut pdf = Vec::with_capacity(grid_n);
    for k in 0..grid_n {
        let x = lo + k as f64 * h;
        pdf.push(
            smsn_logpdf(&DVector::from_element(1, x), params)
                .unwrap()
                .exp(),
        );
    }
    let mut cdf = vec![0.0f64; grid_n];
    for k in 1..grid_n {
        cdf[k] = cdf[k - 1] + 0.5 * h * (pdf[k - 1] + pdf[k]);
    }
    let total = cdf[grid_n - 1];
    let eval_cdf = |x: f64| -> f64 {
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let pos = (x - lo) / h;
        let k = pos.floor() as usize;
        let frac = pos - k as f64;
        ((cdf[k] + frac * (cdf[k + 1] - cdf[k])) / total).clamp(0.0, 1.0)
    };
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = eval_cdf(x);
        d = d.max((f - i as f64 / nf).abs());
        d = d.max((f - (i + 1) as f64 / nf).abs());
    }
    (d, 1.62762 / nf.sqrt())
}

/// χ² statistic (and 1% critical value) comparing draws against bin masses
/// of a univariate density; bins with expected count < 5 merge into tails.
pub fn chi2_density_fit(
    xs: &[f64],
    logpdf: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    bins: usize,
) -> (f64, f64) {
    let n = xs.len() as f64;
    let width = (hi - lo) / bins as f64;
    let mut observed = vec![0.0f64; bins];
    let mut outside = 0.0;
    for &x in xs {
        if x < lo || x >= hi {
            outside += 1.0;
        } else {
            observed[((x - lo) / width) as usize] += 1.0;
        }
    }
    let mut chi2 = 0.0;
    let mut df = 0usize;
    let mut pooled_obs = outside;
    let mut pooled_exp = 0.0;
    let mut total_mass = 0.0;
    for (b, obs) in observed.iter().enumerate() {
        let a = lo + b as f64 * width;
        let mass = integrate(|x| logpdf(x).exp(), a, a + width, 1e-9, 1e-13, 200).unwrap();
        total_mass += mass;
        let expected = mass * n;
        if expected < 5.0 {
            pooled_obs += obs;
            pooled_exp += expected;
        } else {
            chi2 += (obs - expected) * (obs - expected) / expected;
            df += 1;
        }
    }
    pooled_exp += (1.0 - total_mass).max(0.0) * n;
    if pooled_exp >= 5.0 {
        chi2 += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
        df += 1;
    }
    let critical = 2.0 * smsnme::math::gamma_quantile(0.99, (df.max(2) - 1) as f64 / 2.0, 1.0);
    (chi2, critical)
}
