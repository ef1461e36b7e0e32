//! Deviance, effective dimension and both DIC variants from a stored chain.
//!
//! The plug-in DIC evaluates the deviance at the posterior mean Θ̄ and is
//! unreliable under label switching; the robust variant replaces the plug-in
//! density with the posterior predictive density per observation, which is
//! invariant under component relabeling. Comparison tables rank by the
//! robust variant.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fsio::atomic_write;
use crate::inference::Chain;
use crate::math::special::log_sum_exp;
use crate::me_model::{induced_mixture, observed_loglik, Dataset, MeTheta};

/// Summary of the deviance-based model-selection quantities.
#[derive(Debug, Clone)]
pub struct DicReport {
    pub dic_plugin: f64,
    pub dic_robust: f64,
    /// Effective dimension of the robust variant (used in tables).
    pub tau_d: f64,
    pub mean_deviance: f64,
    /// Observed log-likelihood at the posterior mean of the (relabeled) chain.
    pub loglik_at_mean: f64,
}

/// D(z, Θ) = −2·Σᵢ log π(zᵢ|Θ).
pub fn deviance(theta: &MeTheta, data: &Dataset) -> Result<f64> {
    Ok(-2.0 * observed_loglik(theta, data)?)
}

/// Per-draw, per-observation log densities log π(zᵢ|Θ⁽ˡ⁾).
fn log_density_matrix(chain: &Chain, data: &Dataset) -> Result<Vec<Vec<f64>>> {
    chain
        .draws
        .iter()
        .map(|theta| {
            let density = induced_mixture(theta)?.as_mixture_spec()?.density()?;
            (0..data.n())
                .map(|i| {
                    density.logpdf(&data.row(i)).map_err(|e| Error::DensityFailure {
                        row: i,
                        reason: e.to_string(),
                    })
                })
                .collect()
        })
        .collect()
}

fn warn_if_unlabeled(chain: &Chain, caller: &str) {
    if !chain.relabeled && chain.n_components >= 2 {
        log::warn!(
            "{caller} called on a non-relabeled chain with G = {}; the plug-in \
             estimator is unreliable under label switching",
            chain.n_components
        );
    }
}

/// Plug-in DIC: −4 Σᵢ E[log π(zᵢ|Θ)|z] + 2 Σᵢ log π(zᵢ|Θ̄).
pub fn dic_plugin(chain: &Chain, data: &Dataset) -> Result<f64> {
    warn_if_unlabeled(chain, "dic_plugin");
    let lp = log_density_matrix(chain, data)?;
    let l = chain.len() as f64;
    let posterior_mean_term: f64 = lp.iter().flatten().sum::<f64>() / l;
    let at_mean = observed_loglik(&chain.posterior_mean(), data)?;
    Ok(-4.0 * posterior_mean_term + 2.0 * at_mean)
}

/// Robust DIC: −(4/L)Σₗ Σᵢ log π(zᵢ|Θ⁽ˡ⁾) + 2 Σᵢ log ((1/L)Σₗ π(zᵢ|Θ⁽ˡ⁾)).
pub fn dic_robust(chain: &Chain, data: &Dataset) -> Result<f64> {
    let lp = log_density_matrix(chain, data)?;
    Ok(dic_robust_from_matrix(&lp, data.n()))
}

fn dic_robust_from_matrix(lp: &[Vec<f64>], n: usize) -> f64 {
    let l = lp.len() as f64;
    let fit_term: f64 = lp.iter().flatten().sum::<f64>() / l;
    let mut predictive = 0.0;
    let mut column = Vec::with_capacity(lp.len());
    for i in 0..n {
        column.clear();
        column.extend(lp.iter().map(|row| row[i]));
        predictive += log_sum_exp(&column) - l.ln();
    }
    -4.0 * fit_term + 2.0 * predictive
}

/// Effective dimensions τ_D = D̄ − D(estimator) for the plug-in and the
/// predictive estimator, in that order.
pub fn effective_dimension(chain: &Chain, data: &Dataset) -> Result<(f64, f64)> {
    let report = dic_report(chain, data)?;
    let tau_plugin = report.dic_plugin - report.mean_deviance;
    Ok((tau_plugin, report.tau_d))
}

/// One pass over the chain computing every deviance summary.
pub fn dic_report(chain: &Chain, data: &Dataset) -> Result<DicReport> {
    if chain.is_empty() {
        return Err(Error::invalid("chain", "no stored draws"));
    }
    warn_if_unlabeled(chain, "dic_report");
    let lp = log_density_matrix(chain, data)?;
    let l = chain.len() as f64;
    let n = data.n();
    let mean_loglik: f64 = lp.iter().flatten().sum::<f64>() / l;
    let mean_deviance = -2.0 * mean_loglik;
    let loglik_at_mean = observed_loglik(&chain.posterior_mean(), data)?;
    let dic_plugin = -4.0 * mean_loglik + 2.0 * loglik_at_mean;
    let mut predictive = 0.0;
    let mut column = Vec::with_capacity(chain.len());
    for i in 0..n {
        column.clear();
        column.extend(lp.iter().map(|row| row[i]));
        predictive += log_sum_exp(&column) - l.ln();
    }
    let dic_robust = -4.0 * mean_loglik + 2.0 * predictive;
    // DIC = D(estimator) + 2τ  ⇒  τ = DIC − D̄ for either estimator
    let tau_d = dic_robust - mean_deviance;
    Ok(DicReport {
        dic_plugin,
        dic_robust,
        tau_d,
        mean_deviance,
        loglik_at_mean,
    })
}

/// One row of the model-comparison table.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub model: String,
    pub g: usize,
    pub dic_robust: f64,
    pub dic_plugin: f64,
    pub tau_d: f64,
    pub loglik: f64,
}

impl ComparisonRow {
    pub fn from_report(model: &str, g: usize, report: &DicReport) -> Self {
        Self {
            model: model.to_string(),
            g,
            dic_robust: report.dic_robust,
            dic_plugin: report.dic_plugin,
            tau_d: report.tau_d,
            loglik: report.loglik_at_mean,
        }
    }
}

/// Write the comparison table sorted by robust DIC (best first); the
/// leading row carries a marker column flagging the minimum.
pub fn write_comparison_csv(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    let mut sorted: Vec<&ComparisonRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.dic_robust.total_cmp(&b.dic_robust));
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["model", "g", "dic_robust", "dic_plugin", "tau_d", "loglik", "best"])?;
        for (rank, row) in sorted.iter().enumerate() {
            w.write_record(&[
                row.model.clone(),
                format!("{}", row.g),
                format!("{}", row.dic_robust),
                format!("{}", row.dic_plugin),
                format!("{}", row.tau_d),
                format!("{}", row.loglik),
                if rank == 0 { "*".to_string() } else { String::new() },
            ])?;
        }
        w.flush()?;
    }
    atomic_write(path, &buf)?;
    Ok(())
}
