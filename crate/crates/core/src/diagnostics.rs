//! Posterior predictive checking and data-cloning identifiability analysis.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::distributions::{Family, ScaleFactor};
use crate::error::{Error, Result};
use crate::fsio::atomic_write;
use crate::inference::{gibbs_fit_stream, relabel_chain, Chain, McmcConfig, PriorSpec};
use crate::me_model::{induced_mixture, observed_loglik, Dataset, MeTheta};
use crate::mixture::mixture_sample;
use crate::model_selection::deviance;
use crate::rng::RngStream;

/// Posterior predictive check with the deviance discrepancy.
#[derive(Debug, Clone)]
pub struct PpcReport {
    /// p_B = #{l : D(w⁽ˡ⁾,Θ⁽ˡ⁾) ≥ D(z,Θ⁽ˡ⁾)} / L.
    pub p_value: f64,
    /// Per-draw (realized deviance, predictive deviance) pairs.
    pub pairs: Vec<(f64, f64)>,
    pub draws: usize,
}

impl PpcReport {
    /// Recompute the p-value from the stored pairs (exact reproduction).
    pub fn p_value_from_pairs(&self) -> f64 {
        let hits = self
            .pairs
            .iter()
            .filter(|(realized, predictive)| predictive >= realized)
            .count();
        hits as f64 / self.pairs.len() as f64
    }
}

/// For each stored draw, simulate a replicate dataset of size n from the
/// induced SMSN mixture at Θ⁽ˡ⁾ and compare its deviance with the realized
/// one. Replicates use per-draw child streams of `rng`, so the result is
/// independent of evaluation order and safe to parallelize.
pub fn ppc_pvalue(chain: &Chain, data: &Dataset, rng: &RngStream) -> Result<PpcReport> {
    if chain.is_empty() {
        return Err(Error::invalid("chain", "no stored draws"));
    }
    let n = data.n();
    let pairs: Vec<(f64, f64)> = chain
        .draws
        .par_iter()
        .enumerate()
        .map(|(l, theta)| -> Result<(f64, f64)> {
            let realized = -2.0 * chain.loglik[l];
            let spec = induced_mixture(theta)?.as_mixture_spec()?;
            let mut stream = rng.child(l as u64);
            let (values, _) = mixture_sample(&spec, n, &mut stream)?;
            let replicate = Dataset::new(values)?;
            let predictive = deviance(theta, &replicate)?;
            Ok((realized, predictive))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = PpcReport {
        p_value: 0.0,
        draws: pairs.len(),
        pairs,
    };
    Ok(PpcReport {
        p_value: report.p_value_from_pairs(),
        ..report
    })
}

/// Which function g(Θ) of the parameter vector to monitor during cloning.
#[derive(Debug, Clone, Default)]
pub enum ParamSelector {
    /// Full Θ with the weights mapped through the additive log-ratio
    /// transform (full-rank on the simplex).
    #[default]
    Full,
    /// A subset of the flattened coordinates by name.
    Named(Vec<String>),
}

/// Names of the flattened g(Θ) coordinates for a model shape.
pub fn flat_parameter_names(family: Family, g: usize, r: usize) -> Vec<String> {
    let mut names = Vec::new();
    for k in 1..=r {
        names.push(format!("alpha{k}"));
    }
    for k in 1..=r {
        names.push(format!("beta{k}"));
    }
    for j in 1..=g {
        names.push(format!("mu{j}"));
    }
    if family.is_skewed() {
        for j in 1..=g {
            names.push(format!("delta{j}"));
        }
    }
    for j in 1..=g {
        names.push(format!("gamma2_{j}"));
    }
    for k in 0..=r {
        names.push(format!("omega2_{k}"));
    }
    for j in 1..g {
        names.push(format!("alr_p{j}"));
    }
    match family.symmetric_counterpart() {
        Family::StudentT | Family::Slash => names.push("nu".to_string()),
        Family::ContaminatedNormal => {
            names.push("rho".to_string());
            names.push("tau".to_string());
        }
        _ => {}
    }
    names
}

/// Flatten Θ into the g(Θ) coordinate vector matching `flat_parameter_names`.
pub fn flatten_theta(theta: &MeTheta) -> Vec<f64> {
    let g = theta.n_components();
    let mut out = Vec::new();
    out.extend(theta.alpha.iter());
    out.extend(theta.beta.iter());
    out.extend(theta.mu.iter());
    if theta.family.is_skewed() {
        out.extend(theta.delta.iter());
    }
    out.extend(theta.gamma2.iter());
    out.extend(theta.omega2.iter());
    for j in 0..g - 1 {
        out.push((theta.weights[j] / theta.weights[g - 1]).ln());
    }
    match theta.nu {
        ScaleFactor::None => {}
        ScaleFactor::Dof(v) => out.push(v),
        ScaleFactor::Contamination { rho, tau } => {
            out.push(rho);
            out.push(tau);
        }
    }
    out
}

/// One clone level of the identifiability analysis.
#[derive(Debug, Clone)]
pub struct CloneLevel {
    pub k: usize,
    /// Posterior mean of g(Θ) — approximates the ML estimate as K grows.
    pub posterior_mean: Vec<f64>,
    /// K × posterior covariance — approximates the inverse Fisher information.
    pub scaled_covariance: DMatrix<f64>,
    /// Largest eigenvalue of the (unscaled) posterior covariance of g(Θ).
    pub lambda_max: f64,
    /// λ_K / λ_{K₁}.
    pub lambda_hat: f64,
}

#[derive(Debug, Clone)]
pub struct CloneReport {
    pub levels: Vec<CloneLevel>,
    pub parameter_names: Vec<String>,
    /// Levels dropped because their chain failed, with the error text.
    pub skipped: Vec<(usize, String)>,
}

/// Data-cloning run: fit the K-weighted posterior per level and track the
/// largest eigenvalue of the posterior covariance of g(Θ). For an
/// identifiable model λ̂_K decays like 1/K.
///
/// Levels run concurrently on split streams derived from the master seed;
/// results do not depend on scheduling.
pub fn data_clone(
    data: &Dataset,
    g: usize,
    family: Family,
    prior: &PriorSpec,
    config: &McmcConfig,
    clone_levels: &[usize],
    selector: &ParamSelector,
) -> Result<CloneReport> {
    if clone_levels.is_empty() {
        return Err(Error::invalid("clone_levels", "need at least one level"));
    }
    let mut sorted_levels = clone_levels.to_vec();
    sorted_levels.sort_unstable();
    sorted_levels.dedup();
    if sorted_levels[0] == 0 {
        return Err(Error::invalid("clone_levels", "levels must be at least 1"));
    }
    let all_names = flat_parameter_names(family, g, data.n_responses());
    let keep: Vec<usize> = match selector {
        ParamSelector::Full => (0..all_names.len()).collect(),
        ParamSelector::Named(wanted) => {
            let mut idx = Vec::new();
            for name in wanted {
                let found = all_names.iter().position(|n| n == name).ok_or_else(|| {
                    Error::invalid("selector", format!("unknown parameter `{name}`"))
                })?;
                idx.push(found);
            }
            idx
        }
    };
    let parameter_names: Vec<String> = keep.iter().map(|&i| all_names[i].clone()).collect();

    let root = RngStream::root(config.seed);
    let fits: Vec<(usize, std::result::Result<Chain, String>)> = sorted_levels
        .par_iter()
        .enumerate()
        .map(|(level_idx, &k)| {
            let mut stream = root.child(level_idx as u64);
            let fit = gibbs_fit_stream(data, g, family, prior, config, k, &mut stream)
                .map(|chain| relabel_chain(&chain))
                .map_err(|e| e.to_string());
            (k, fit)
        })
        .collect();

    let mut levels = Vec::new();
    let mut skipped = Vec::new();
    let mut lambda_first: Option<f64> = None;
    for (k, fit) in fits {
        match fit {
            Err(reason) => {
                log::warn!("data cloning: level K={k} failed ({reason}); omitted from the curve");
                skipped.push((k, reason));
            }
            Ok(chain) => {
                let flat: Vec<Vec<f64>> = chain
                    .draws
                    .iter()
                    .map(|theta| {
                        let full = flatten_theta(theta);
                        keep.iter().map(|&i| full[i]).collect()
                    })
                    .collect();
                let dim = keep.len();
                let l = flat.len() as f64;
                let mut mean = vec![0.0; dim];
                for row in &flat {
                    for (m, v) in mean.iter_mut().zip(row) {
                        *m += v;
                    }
                }
                for m in &mut mean {
                    *m /= l;
                }
                let mut cov = DMatrix::zeros(dim, dim);
                for row in &flat {
                    let centered = DVector::from_fn(dim, |i, _| row[i] - mean[i]);
                    cov += &centered * centered.transpose();
                }
                cov /= l - 1.0;
                let eigen = cov.clone().symmetric_eigen();
                let lambda_max = eigen.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
                let first = *lambda_first.get_or_insert(lambda_max);
                levels.push(CloneLevel {
                    k,
                    posterior_mean: mean,
                    scaled_covariance: cov * k as f64,
                    lambda_max,
                    lambda_hat: lambda_max / first,
                });
            }
        }
    }
    Ok(CloneReport {
        levels,
        parameter_names,
        skipped,
    })
}

/// Plot data for the cloning figure: (K, λ̂_K, 1/K).
pub fn write_clone_csv(path: &Path, report: &CloneReport) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["k", "lambda_hat", "one_over_k"])?;
        for level in &report.levels {
            w.write_record(&[
                format!("{}", level.k),
                format!("{}", level.lambda_hat),
                format!("{}", 1.0 / level.k as f64),
            ])?;
        }
        w.flush()?;
    }
    atomic_write(path, &buf)?;
    Ok(())
}

/// Scatter data for the PPC figure: per-draw (realized, predictive) pairs.
pub fn write_ppc_csv(path: &Path, report: &PpcReport) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["draw", "realized_deviance", "predictive_deviance"])?;
        for (l, (realized, predictive)) in report.pairs.iter().enumerate() {
            w.write_record(&[
                format!("{}", l + 1),
                format!("{realized}"),
                format!("{predictive}"),
            ])?;
        }
        w.flush()?;
    }
    atomic_write(path, &buf)?;
    Ok(())
}

/// The clone-weighted log-likelihood is exactly K times the observed one;
/// this identity is what makes the weight-based implementation equivalent
/// to physically replicating the data K times.
pub fn clone_weighted_loglik(theta: &MeTheta, data: &Dataset, k: usize) -> Result<f64> {
    Ok(k as f64 * observed_loglik(theta, data)?)
}
