//! Command implementations: simulate, fit, compare, diagnose.

use std::path::{Path, PathBuf};

use serde::Serialize;
use smsnme::diagnostics::{
    data_clone, ppc_pvalue, write_clone_csv, write_ppc_csv, ParamSelector,
};
use smsnme::distributions::Family;
use smsnme::fsio::{atomic_write, sha256_file};
use smsnme::inference::{
    gibbs_fit_stream, read_chain, relabel_chain, write_chain, Chain, McmcConfig, PriorSpec,
};
use smsnme::me_model::{
    read_dataset_csv, simulate_fmnig_me, simulate_me, write_dataset_csv, write_latents_csv,
};
use smsnme::model_selection::{dic_report, write_comparison_csv, ComparisonRow};
use smsnme::{Error, Result, RngStream};

use crate::presets::{lookup, Preset};

/// Echo of the resolved run configuration, written next to every command's
/// outputs.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mcmc: Option<McmcConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    pub outputs: Vec<String>,
}

impl RunRecord {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let json = serde_json::to_vec_pretty(self)?;
        atomic_write(&dir.join("run.json"), &json)?;
        Ok(())
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

pub struct SimulateArgs {
    pub preset: Option<String>,
    pub theta: Option<crate::config::ThetaSection>,
    pub n: usize,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let generator = match (&args.preset, &args.theta) {
        (Some(name), _) => lookup(name)?,
        (None, Some(section)) => Preset::Smsn(section.to_theta()?),
        (None, None) => {
            return Err(Error::invalid(
                "preset",
                "simulate needs --preset or a [simulate.theta] table in the config file",
            ))
        }
    };
    ensure_dir(&args.out)?;
    let mut rng = RngStream::root(args.seed);
    let data_path = args.out.join("data.csv");
    let latents_path = args.out.join("latents.csv");
    match generator {
        Preset::Smsn(theta) => {
            let (data, latents) = simulate_me(&theta, args.n, &mut rng)?;
            write_dataset_csv(&data_path, &data)?;
            write_latents_csv(&latents_path, &latents.x, &latents.s, &latents.u, Some(&latents.t))?;
        }
        Preset::Nig(settings) => {
            let (data, latents) = simulate_fmnig_me(&settings, args.n, &mut rng)?;
            write_dataset_csv(&data_path, &data)?;
            write_latents_csv(&latents_path, &latents.x, &latents.s, &latents.u, None)?;
        }
    }
    RunRecord {
        command: "simulate".into(),
        seed: args.seed,
        preset: args.preset.clone(),
        n: Some(args.n),
        model: None,
        g: None,
        mcmc: None,
        prior: None,
        data: None,
        data_sha256: Some(sha256_file(&data_path)?),
        levels: None,
        outputs: vec!["data.csv".into(), "latents.csv".into()],
    }
    .write(&args.out)?;
    println!("wrote {} and latent sidecar", data_path.display());
    Ok(())
}

pub struct FitArgs {
    pub data: PathBuf,
    pub family: Family,
    pub g: usize,
    pub prior: PriorSpec,
    pub config: McmcConfig,
    pub relabel: bool,
    pub out: PathBuf,
}

pub fn cmd_fit(args: FitArgs) -> Result<()> {
    let data = read_dataset_csv(&args.data)?;
    let checksum = sha256_file(&args.data)?;
    ensure_dir(&args.out)?;
    let mut rng = RngStream::root(args.config.seed);
    let chain = gibbs_fit_stream(&data, args.g, args.family, &args.prior, &args.config, 1, &mut rng)?;
    let chain = if args.relabel && args.g >= 2 {
        relabel_chain(&chain)
    } else {
        chain
    };
    write_chain(&args.out, &chain, &args.prior, &checksum)?;
    write_summary_csv(&args.out.join("summary.csv"), &chain)?;
    RunRecord {
        command: "fit".into(),
        seed: args.config.seed,
        preset: None,
        n: Some(data.n()),
        model: Some(args.family.code().into()),
        g: Some(args.g),
        mcmc: Some(args.config),
        prior: Some(args.prior.clone()),
        data: Some(args.data.display().to_string()),
        data_sha256: Some(checksum),
        levels: None,
        outputs: vec![
            "chain.csv".into(),
            "latents.csv".into(),
            "manifest.json".into(),
            "summary.csv".into(),
        ],
    }
    .write(&args.out)?;
    let report = dic_report(&chain, &data)?;
    println!(
        "fit {} (G={}): {} draws, loglik at mean {:.4}, robust DIC {:.4}",
        args.family.code(),
        args.g,
        chain.len(),
        report.loglik_at_mean,
        report.dic_robust
    );
    Ok(())
}

/// Posterior summary table: mean, sd and central 95% interval per parameter.
fn write_summary_csv(path: &Path, chain: &Chain) -> Result<()> {
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let r = chain.n_responses;
    let g = chain.n_components;
    let pull = |f: &dyn Fn(&smsnme::me_model::MeTheta) -> f64| -> Vec<f64> {
        chain.draws.iter().map(|d| f(d)).collect()
    };
    for k in 0..r {
        columns.push((format!("alpha{}", k + 1), pull(&|d| d.alpha[k])));
    }
    for k in 0..r {
        columns.push((format!("beta{}", k + 1), pull(&|d| d.beta[k])));
    }
    for j in 0..g {
        columns.push((format!("mu{}", j + 1), pull(&|d| d.mu[j])));
    }
    for j in 0..g {
        columns.push((format!("delta{}", j + 1), pull(&|d| d.delta[j])));
    }
    for j in 0..g {
        columns.push((format!("gamma2_{}", j + 1), pull(&|d| d.gamma2[j])));
    }
    for k in 0..=r {
        columns.push((format!("omega2_{k}"), pull(&|d| d.omega2[k])));
    }
    for j in 0..g {
        columns.push((format!("p{}", j + 1), pull(&|d| d.weights[j])));
    }
    match chain.family.symmetric_counterpart() {
        Family::StudentT | Family::Slash => {
            columns.push(("nu".into(), pull(&|d| d.nu.dof().unwrap_or(f64::NAN))));
        }
        Family::ContaminatedNormal => {
            columns.push((
                "rho".into(),
                pull(&|d| d.nu.contamination().map(|c| c.0).unwrap_or(f64::NAN)),
            ));
            columns.push((
                "tau".into(),
                pull(&|d| d.nu.contamination().map(|c| c.1).unwrap_or(f64::NAN)),
            ));
        }
        _ => {}
    }
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["parameter", "mean", "sd", "q025", "q975"])
            .map_err(Error::from)?;
        for (name, values) in &columns {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (n - 1.0).max(1.0))
            .sqrt();
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            w.write_record(&[
                name.clone(),
                format!("{mean}"),
                format!("{sd}"),
                format!("{}", quantile(&sorted, 0.025)),
                format!("{}", quantile(&sorted, 0.975)),
            ])
            .map_err(Error::from)?;
        }
        w.flush()?;
    }
    atomic_write(path, &buf)?;
    Ok(())
}

/// Linear-interpolation quantile of a sorted sample.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

pub struct CompareArgs {
    pub data: PathBuf,
    pub models: Vec<(Family, usize)>,
    pub chains: Vec<PathBuf>,
    pub prior: PriorSpec,
    pub config: McmcConfig,
    pub out: PathBuf,
}

pub fn cmd_compare(args: CompareArgs) -> Result<()> {
    if args.models.is_empty() && args.chains.is_empty() {
        return Err(Error::invalid(
            "models",
            "compare needs --models or --chains",
        ));
    }
    let data = read_dataset_csv(&args.data)?;
    let checksum = sha256_file(&args.data)?;
    ensure_dir(&args.out)?;
    let root = RngStream::root(args.config.seed);
    let mut rows: Vec<ComparisonRow> = Vec::new();
    // fresh fits, one derived stream per model slot
    use rayon::prelude::*;
    let fitted: Vec<Result<ComparisonRow>> = args
        .models
        .par_iter()
        .enumerate()
        .map(|(idx, (family, g))| {
            let mut stream = root.child(idx as u64);
            let chain = gibbs_fit_stream(&data, *g, *family, &args.prior, &args.config, 1, &mut stream)?;
            let chain = relabel_chain(&chain);
            let report = dic_report(&chain, &data)?;
            Ok(ComparisonRow::from_report(family.code(), *g, &report))
        })
        .collect();
    for row in fitted {
        rows.push(row?);
    }
    for manifest_path in &args.chains {
        let (chain, manifest) = read_chain(manifest_path)?;
        if manifest.data_sha256 != checksum {
            log::warn!(
                "chain {} was fitted to data with checksum {}, current data has {}",
                manifest_path.display(),
                manifest.data_sha256,
                checksum
            );
        }
        let chain = if chain.relabeled { chain } else { relabel_chain(&chain) };
        let report = dic_report(&chain, &data)?;
        rows.push(ComparisonRow::from_report(
            &manifest.family,
            manifest.n_components,
            &report,
        ));
    }
    let table_path = args.out.join("comparison.csv");
    write_comparison_csv(&table_path, &rows)?;
    RunRecord {
        command: "compare".into(),
        seed: args.config.seed,
        preset: None,
        n: Some(data.n()),
        model: Some(
            args.models
                .iter()
                .map(|(f, g)| format!("{}:{g}", f.code()))
                .collect::<Vec<_>>()
                .join(","),
        ),
        g: None,
        mcmc: Some(args.config),
        prior: Some(args.prior.clone()),
        data: Some(args.data.display().to_string()),
        data_sha256: Some(checksum),
        levels: None,
        outputs: vec!["comparison.csv".into()],
    }
    .write(&args.out)?;
    let mut bymodel: Vec<&ComparisonRow> = rows.iter().collect();
    bymodel.sort_by(|a, b| a.dic_robust.total_cmp(&b.dic_robust));
    for (rank, row) in bymodel.iter().enumerate() {
        println!(
            "{} {} (G={}): robust DIC {:.4}{}",
            rank + 1,
            row.model,
            row.g,
            row.dic_robust,
            if rank == 0 { "  <- minimum" } else { "" }
        );
    }
    Ok(())
}

pub struct PpcArgs {
    pub chain_manifest: PathBuf,
    pub data: PathBuf,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn cmd_diagnose_ppc(args: PpcArgs) -> Result<()> {
    let data = read_dataset_csv(&args.data)?;
    let (chain, _) = read_chain(&args.chain_manifest)?;
    ensure_dir(&args.out)?;
    let rng = RngStream::root(args.seed);
    let report = ppc_pvalue(&chain, &data, &rng)?;
    write_ppc_csv(&args.out.join("ppc.csv"), &report)?;
    #[derive(Serialize)]
    struct PpcSummary {
        p_value: f64,
        draws: usize,
    }
    atomic_write(
        &args.out.join("ppc_summary.json"),
        &serde_json::to_vec_pretty(&PpcSummary {
            p_value: report.p_value,
            draws: report.draws,
        })?,
    )?;
    RunRecord {
        command: "diagnose --ppc".into(),
        seed: args.seed,
        preset: None,
        n: Some(data.n()),
        model: None,
        g: None,
        mcmc: None,
        prior: None,
        data: Some(args.data.display().to_string()),
        data_sha256: Some(sha256_file(&args.data)?),
        levels: None,
        outputs: vec!["ppc.csv".into(), "ppc_summary.json".into()],
    }
    .write(&args.out)?;
    println!("Bayesian p-value: {:.4} ({} draws)", report.p_value, report.draws);
    Ok(())
}

pub struct DcloneArgs {
    pub data: PathBuf,
    pub family: Family,
    pub g: usize,
    pub prior: PriorSpec,
    pub config: McmcConfig,
    pub levels: Vec<usize>,
    pub out: PathBuf,
}

pub fn cmd_diagnose_dclone(args: DcloneArgs) -> Result<()> {
    let data = read_dataset_csv(&args.data)?;
    ensure_dir(&args.out)?;
    let report = data_clone(
        &data,
        args.g,
        args.family,
        &args.prior,
        &args.config,
        &args.levels,
        &ParamSelector::Full,
    )?;
    write_clone_csv(&args.out.join("dclone.csv"), &report)?;
    RunRecord {
        command: "diagnose --dclone".into(),
        seed: args.config.seed,
        preset: None,
        n: Some(data.n()),
        model: Some(args.family.code().into()),
        g: Some(args.g),
        mcmc: Some(args.config),
        prior: Some(args.prior.clone()),
        data: Some(args.data.display().to_string()),
        data_sha256: Some(sha256_file(&args.data)?),
        levels: Some(args.levels.clone()),
        outputs: vec!["dclone.csv".into()],
    }
    .write(&args.out)?;
    for level in &report.levels {
        println!(
            "K = {:>3}: lambda_hat = {:.5}  (1/K = {:.5})",
            level.k,
            level.lambda_hat,
            1.0 / level.k as f64
        );
    }
    for (k, reason) in &report.skipped {
        eprintln!("warning: level K={k} skipped: {reason}");
    }
    Ok(())
}
