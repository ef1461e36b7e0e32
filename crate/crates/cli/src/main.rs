//! `smsnme` — simulate, fit, compare and diagnose SMSN mixture
//! measurement-error regression models.
//!
//! Exit codes: 0 success, 2 input/configuration error, 3 numerical or
//! sampler error.

mod commands;
mod config;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use smsnme::distributions::Family;
use smsnme::Error;

use config::{load_file_config, resolve_mcmc, resolve_out_dir};

#[derive(Parser)]
#[command(name = "smsnme", version, about = "Bayesian SMSN mixture measurement-error models")]
struct Cli {
    /// TOML configuration file (flags override file values)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct McmcFlags {
    /// Total MCMC iterations
    #[arg(long)]
    iters: Option<usize>,
    /// Burn-in iterations
    #[arg(long)]
    burnin: Option<usize>,
    /// Thinning interval
    #[arg(long)]
    thin: Option<usize>,
    /// Master random seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from a built-in preset or a configured generator
    Simulate {
        /// Built-in preset: sim1-<family> or sim2-nig
        #[arg(long)]
        preset: Option<String>,
        /// Number of observations
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a model by MCMC and persist the chain
    Fit {
        /// Input dataset CSV
        #[arg(long)]
        data: PathBuf,
        /// Model family: fmn, fmt, fmsl, fmcn, fmsn, fmst, fmssl, fmscn
        #[arg(long)]
        model: Option<String>,
        /// Number of mixture components
        #[arg(long)]
        g: Option<usize>,
        #[command(flatten)]
        mcmc: McmcFlags,
        /// Keep the raw labeling (skip post-hoc relabeling)
        #[arg(long)]
        no_relabel: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit several models and rank them by robust DIC
    Compare {
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated family codes to fit fresh
        #[arg(long, value_delimiter = ',')]
        models: Vec<String>,
        /// Existing chain manifests to include
        #[arg(long, value_delimiter = ',')]
        chains: Vec<PathBuf>,
        /// Components for every fresh fit
        #[arg(long)]
        g: Option<usize>,
        #[command(flatten)]
        mcmc: McmcFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Posterior predictive check or data-cloning identifiability analysis
    Diagnose {
        /// Posterior predictive check (needs --chain and --data)
        #[arg(long, conflicts_with = "dclone")]
        ppc: bool,
        /// Data-cloning run (needs --data, --model, --g)
        #[arg(long)]
        dclone: bool,
        /// Chain manifest produced by `fit`
        #[arg(long)]
        chain: Option<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        g: Option<usize>,
        /// Clone levels, e.g. 1,2,4,8,16
        #[arg(long, value_delimiter = ',')]
        levels: Vec<usize>,
        #[command(flatten)]
        mcmc: McmcFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::SamplerAbort { .. } | Error::Quadrature { .. } | Error::DensityFailure { .. } => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let file = load_file_config(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate { preset, n, seed, out } => {
            let out = resolve_out_dir(out, file.out.clone())?;
            let preset = preset.or(file.simulate.preset.clone());
            let theta = file.simulate.theta.clone();
            let n = n.or(file.simulate.n).unwrap_or(500);
            let seed = seed
                .or(file.mcmc.seed)
                .unwrap_or_else(|| smsnme::inference::McmcConfig::default().seed);
            commands::cmd_simulate(commands::SimulateArgs { preset, theta, n, seed, out })
        }
        Command::Fit { data, model, g, mcmc, no_relabel, out } => {
            let out = resolve_out_dir(out, file.out.clone())?;
            let family = resolve_family(model, &file)?;
            let g = g
                .or(file.model.g)
                .ok_or_else(|| Error::invalid("g", "fit needs --g or model.g in the config"))?;
            let config = resolve_mcmc(mcmc.iters, mcmc.burnin, mcmc.thin, mcmc.seed, &file.mcmc);
            let prior = file.prior.clone().unwrap_or_default();
            commands::cmd_fit(commands::FitArgs {
                data,
                family,
                g,
                prior,
                config,
                relabel: !no_relabel,
                out,
            })
        }
        Command::Compare { data, models, chains, g, mcmc, out } => {
            let out = resolve_out_dir(out, file.out.clone())?;
            let config = resolve_mcmc(mcmc.iters, mcmc.burnin, mcmc.thin, mcmc.seed, &file.mcmc);
            let prior = file.prior.clone().unwrap_or_default();
            let mut model_list = Vec::new();
            if !models.is_empty() {
                let g = g.or(file.model.g).ok_or_else(|| {
                    Error::invalid("g", "compare with --models needs --g")
                })?;
                for code in &models {
                    model_list.push((Family::from_code(code)?, g));
                }
            }
            commands::cmd_compare(commands::CompareArgs {
                data,
                models: model_list,
                chains,
                prior,
                config,
                out,
            })
        }
        Command::Diagnose {
            ppc,
            dclone,
            chain,
            data,
            model,
            g,
            levels,
            mcmc,
            out,
        } => {
            let out = resolve_out_dir(out, file.out.clone())?;
            if ppc {
                let chain = chain.ok_or_else(|| {
                    Error::invalid("chain", "--ppc needs --chain <manifest.json>")
                })?;
                let seed = mcmc.seed.or(file.mcmc.seed).unwrap_or(0);
                commands::cmd_diagnose_ppc(commands::PpcArgs { chain_manifest: chain, data, seed, out })
            } else if dclone {
                let family = resolve_family(model, &file)?;
                let g = g
                    .or(file.model.g)
                    .ok_or_else(|| Error::invalid("g", "--dclone needs --g"))?;
                let config =
                    resolve_mcmc(mcmc.iters, mcmc.burnin, mcmc.thin, mcmc.seed, &file.mcmc);
                let prior = file.prior.clone().unwrap_or_default();
                let levels = if levels.is_empty() {
                    vec![1, 2, 4, 8, 16, 32]
                } else {
                    levels
                };
                commands::cmd_diagnose_dclone(commands::DcloneArgs {
                    data,
                    family,
                    g,
                    prior,
                    config,
                    levels,
                    out,
                })
            } else {
                Err(Error::invalid("diagnose", "pass --ppc or --dclone"))
            }
        }
    }
}

fn resolve_family(flag: Option<String>, file: &config::FileConfig) -> Result<Family, Error> {
    let code = flag
        .or(file.model.family.clone())
        .ok_or_else(|| Error::invalid("model", "no model family given (--model)"))?;
    Family::from_code(&code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
