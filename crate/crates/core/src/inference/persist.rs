//! Chain persistence: columnar CSV for the draws, a latent-summary sidecar
//! and a JSON run manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distributions::{Family, ScaleFactor};
use crate::error::{Error, Result};
use crate::fsio::atomic_write;
use crate::me_model::MeTheta;

use super::{Chain, McmcConfig, PriorSpec};

/// Run metadata written next to every chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub seed: u64,
    pub config: McmcConfig,
    pub family: String,
    pub n_components: usize,
    pub n_responses: usize,
    pub prior: PriorSpec,
    pub data_sha256: String,
    pub relabeled: bool,
    pub chain_file: String,
    pub latents_file: String,
}

fn chain_header(family: Family, g: usize, r: usize) -> Vec<String> {
    let mut h = vec!["draw".to_string(), "loglik".to_string()];
    for k in 1..=r {
        h.push(format!("alpha{k}"));
    }
    for k in 1..=r {
        h.push(format!("beta{k}"));
    }
    for j in 1..=g {
        h.push(format!("mu{j}"));
    }
    for j in 1..=g {
        h.push(format!("delta{j}"));
    }
    for j in 1..=g {
        h.push(format!("gamma2_{j}"));
    }
    for k in 0..=r {
        h.push(format!("omega2_{k}"));
    }
    for j in 1..=g {
        h.push(format!("p{j}"));
    }
    match family.symmetric_counterpart() {
        Family::StudentT | Family::Slash => h.push("nu".to_string()),
        Family::ContaminatedNormal => {
            h.push("rho".to_string());
            h.push("tau".to_string());
        }
        _ => {}
    }
    h
}

/// Write `chain.csv`, `latents.csv` and `manifest.json` under `dir`.
/// Returns the manifest path. All writes are atomic.
pub fn write_chain(
    dir: &Path,
    chain: &Chain,
    prior: &PriorSpec,
    data_sha256: &str,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let g = chain.n_components;
    let r = chain.n_responses;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(chain_header(chain.family, g, r))?;
        for (l, (draw, ll)) in chain.draws.iter().zip(&chain.loglik).enumerate() {
            let mut rec: Vec<String> = vec![format!("{}", l + 1), format!("{ll}")];
            for k in 0..r {
                rec.push(format!("{}", draw.alpha[k]));
            }
            for k in 0..r {
                rec.push(format!("{}", draw.beta[k]));
            }
            for v in &draw.mu {
                rec.push(format!("{v}"));
            }
            for v in &draw.delta {
                rec.push(format!("{v}"));
            }
            for v in &draw.gamma2 {
                rec.push(format!("{v}"));
            }
            for v in &draw.omega2 {
                rec.push(format!("{v}"));
            }
            for v in &draw.weights {
                rec.push(format!("{v}"));
            }
            match draw.nu {
                ScaleFactor::None => {}
                ScaleFactor::Dof(v) => rec.push(format!("{v}")),
                ScaleFactor::Contamination { rho, tau } => {
                    rec.push(format!("{rho}"));
                    rec.push(format!("{tau}"));
                }
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    atomic_write(&dir.join("chain.csv"), &buf)?;

    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["i", "x_mean", "s_mode"])?;
        for i in 0..chain.latent_x_mean.len() {
            w.write_record(&[
                format!("{}", i + 1),
                format!("{}", chain.latent_x_mean[i]),
                format!("{}", chain.latent_s_mode[i] + 1),
            ])?;
        }
        w.flush()?;
    }
    atomic_write(&dir.join("latents.csv"), &buf)?;

    let manifest = RunManifest {
        seed: chain.config.seed,
        config: chain.config,
        family: chain.family.code().to_string(),
        n_components: g,
        n_responses: r,
        prior: prior.clone(),
        data_sha256: data_sha256.to_string(),
        relabeled: chain.relabeled,
        chain_file: "chain.csv".to_string(),
        latents_file: "latents.csv".to_string(),
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_vec_pretty(&manifest)?;
    atomic_write(&path, &json)?;
    Ok(path)
}

/// Load a chain from its manifest. The chain and latent files are resolved
/// relative to the manifest's directory.
pub fn read_chain(manifest_path: &Path) -> Result<(Chain, RunManifest)> {
    let manifest: RunManifest = serde_json::from_slice(&std::fs::read(manifest_path)?)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let family = Family::from_code(&manifest.family)?;
    let g = manifest.n_components;
    let r = manifest.n_responses;
    let expected_header = chain_header(family, g, r);

    let mut reader = csv::Reader::from_path(dir.join(&manifest.chain_file))?;
    {
        let got: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if got != expected_header {
            return Err(Error::MalformedData {
                row: 1,
                reason: format!("chain header mismatch: {got:?}"),
            });
        }
    }
    let mut draws = Vec::new();
    let mut loglik = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedData {
            row: idx + 2,
            reason: e.to_string(),
        })?;
        let fields: Vec<f64> = record
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::MalformedData {
                    row: idx + 2,
                    reason: format!("cannot parse `{f}`"),
                })
            })
            .collect::<Result<_>>()?;
        let mut cursor = 1; // skip draw index
        let mut take = |count: usize| -> Vec<f64> {
            let out = fields[cursor..cursor + count].to_vec();
            cursor += count;
            out
        };
        let ll = take(1)[0];
        let alpha = take(r);
        let beta = take(r);
        let mu = take(g);
        let delta = take(g);
        let gamma2 = take(g);
        let omega2 = take(r + 1);
        let weights = take(g);
        let nu = match family.symmetric_counterpart() {
            Family::StudentT | Family::Slash => ScaleFactor::Dof(take(1)[0]),
            Family::ContaminatedNormal => {
                let v = take(2);
                ScaleFactor::Contamination { rho: v[0], tau: v[1] }
            }
            _ => ScaleFactor::None,
        };
        loglik.push(ll);
        draws.push(MeTheta {
            alpha: nalgebra::DVector::from_row_slice(&alpha),
            beta: nalgebra::DVector::from_row_slice(&beta),
            mu,
            delta,
            gamma2,
            omega2,
            weights,
            family,
            nu,
        });
    }

    let mut latent_x_mean = Vec::new();
    let mut latent_s_mode = Vec::new();
    let mut reader = csv::Reader::from_path(dir.join(&manifest.latents_file))?;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedData {
            row: idx + 2,
            reason: e.to_string(),
        })?;
        latent_x_mean.push(record[1].parse::<f64>().map_err(|_| Error::MalformedData {
            row: idx + 2,
            reason: "bad x_mean".into(),
        })?);
        let s: usize = record[2].parse().map_err(|_| Error::MalformedData {
            row: idx + 2,
            reason: "bad s_mode".into(),
        })?;
        latent_s_mode.push(s.saturating_sub(1));
    }

    Ok((
        Chain {
            draws,
            loglik,
            latent_x_mean,
            latent_s_mode,
            config: manifest.config,
            family,
            n_components: g,
            n_responses: r,
            relabeled: manifest.relabeled,
        },
        manifest,
    ))
}
