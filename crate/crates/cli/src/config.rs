//! Run configuration: defaults, optional TOML config file, command-line
//! overrides. Precedence is flags > file > defaults, and every command
//! echoes the fully resolved configuration into its run manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use smsnme::distributions::{Family, ScaleFactor};
use smsnme::inference::{McmcConfig, PriorSpec};
use smsnme::me_model::MeTheta;
use smsnme::Error;

/// Environment variable supplying the default output directory.
pub const OUT_DIR_ENV: &str = "SMSNME_OUT_DIR";

#[derive(Debug, Clone, Default, Deserialize)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub mcmc: McmcSection,
    #[serde(default)]
    pub model: ModelSection,
    pub prior: Option<PriorSpec>,
    #[serde(default)]
    pub simulate: SimulateSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct McmcSection {
    pub iterations: Option<usize>,
    pub burnin: Option<usize>,
    pub thin: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct ModelSection {
    pub family: Option<String>,
    pub g: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct SimulateSection {
    pub preset: Option<String>,
    pub n: Option<usize>,
    pub theta: Option<ThetaSection>,
}

/// Custom data-generating parameter vector for `simulate`.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct ThetaSection {
    pub family: String,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub mu: Vec<f64>,
    #[serde(default)]
    pub delta: Vec<f64>,
    pub gamma2: Vec<f64>,
    pub omega2: Vec<f64>,
    pub weights: Vec<f64>,
    pub nu: Option<f64>,
    pub rho: Option<f64>,
    pub tau: Option<f64>,
}

impl ThetaSection {
    pub fn to_theta(&self) -> Result<MeTheta, Error> {
        let family = Family::from_code(&self.family)?;
        let nu = scale_factor_from_parts(family, self.nu, self.rho, self.tau)?;
        let delta = if self.delta.is_empty() {
            vec![0.0; self.mu.len()]
        } else {
            self.delta.clone()
        };
        let theta = MeTheta {
            alpha: nalgebra::DVector::from_row_slice(&self.alpha),
            beta: nalgebra::DVector::from_row_slice(&self.beta),
            mu: self.mu.clone(),
            delta,
            gamma2: self.gamma2.clone(),
            omega2: self.omega2.clone(),
            weights: self.weights.clone(),
            family,
            nu,
        };
        theta.validate()?;
        Ok(theta)
    }
}

pub fn scale_factor_from_parts(
    family: Family,
    nu: Option<f64>,
    rho: Option<f64>,
    tau: Option<f64>,
) -> Result<ScaleFactor, Error> {
    Ok(match family.symmetric_counterpart() {
        Family::Normal => ScaleFactor::None,
        Family::StudentT | Family::Slash => {
            ScaleFactor::Dof(nu.ok_or_else(|| Error::invalid("nu", "family requires ν"))?)
        }
        Family::ContaminatedNormal => ScaleFactor::Contamination {
            rho: rho.ok_or_else(|| Error::invalid("rho", "family requires ρ"))?,
            tau: tau.ok_or_else(|| Error::invalid("tau", "family requires τ"))?,
        },
        _ => unreachable!(),
    })
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig, Error> {
    match path {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text).map_err(|e| Error::InvalidParameter {
                name: "config".into(),
                reason: e.to_string(),
            })
        }
    }
}

/// Merge MCMC settings: flags > file > paper defaults (25000/5000/30).
pub fn resolve_mcmc(
    iters: Option<usize>,
    burnin: Option<usize>,
    thin: Option<usize>,
    seed: Option<u64>,
    file: &McmcSection,
) -> McmcConfig {
    let defaults = McmcConfig::default();
    McmcConfig {
        iterations: iters.or(file.iterations).unwrap_or(defaults.iterations),
        burnin: burnin.or(file.burnin).unwrap_or(defaults.burnin),
        thin: thin.or(file.thin).unwrap_or(defaults.thin),
        seed: seed.or(file.seed).unwrap_or(defaults.seed),
    }
}

/// Output directory: flag > file > SMSNME_OUT_DIR; an error otherwise.
pub fn resolve_out_dir(flag: Option<PathBuf>, file: Option<PathBuf>) -> Result<PathBuf, Error> {
    flag.or(file)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .ok_or_else(|| {
            Error::invalid(
                "out",
                format!("no output directory: pass --out, set `out` in the config file, or set {OUT_DIR_ENV}"),
            )
        })
}
