//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see every line).
//!
//! By default the MCMC-heavy criteria use the reduced CI configuration
//! (8000 iterations / 2000 burn-in / thinning 10) with doubled recovery
//! tolerances. Set `SMSNME_ACCEPT_FULL=1` for the full configuration
//! (25000/5000/30) at the tighter tolerances.

use std::path::Path;
use std::process::Command;

use smsnme::diagnostics::{clone_weighted_loglik, data_clone, ppc_pvalue, ParamSelector};
use smsnme::distributions::{Family, ScaleFactor};
use smsnme::inference::{
    gibbs_fit, gibbs_fit_stream, relabel_chain, McmcConfig, PriorSpec,
};
use smsnme::me_model::{observed_loglik, simulate_fmnig_me, simulate_me, MeTheta};
use smsnme::model_selection::{deviance, dic_plugin, dic_report, dic_robust};
use smsnme::RngStream;
use smsnme_testsupport as support;
use support::{
    family_test_cases, geweke_z_scores, normalization_mass, sampler_density_ks, sim1_theta,
    sim2_nig_settings, GEWEKE_TEST_FUNCTION_NAMES,
};

fn full_mode() -> bool {
    std::env::var("SMSNME_ACCEPT_FULL").map(|v| v == "1").unwrap_or(false)
}

fn accept_config(seed: u64) -> McmcConfig {
    if full_mode() {
        McmcConfig { iterations: 25_000, burnin: 5_000, thin: 30, seed }
    } else {
        McmcConfig { iterations: 8_000, burnin: 2_000, thin: 10, seed }
    }
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

// -------------------------------------------------------------------------
// 1. Parameter recovery, FMSN-ME G=2, n=500, five seeds
// -------------------------------------------------------------------------

#[test]
fn criterion_1_fmsn_parameter_recovery() {
    let tol_mult = if full_mode() { 4.0 } else { 8.0 };
    let truth = sim1_theta(Family::SkewNormal, ScaleFactor::None);
    // reported n=500 standard deviations of the posterior-mean estimates
    // for the FMSN-ME column of the recovery study
    let checks: Vec<(&str, f64, f64, Box<dyn Fn(&MeTheta) -> f64>)> = vec![
        ("alpha1", 0.4, 0.038, Box::new(|t: &MeTheta| t.alpha[0])),
        ("alpha2", 0.1, 0.044, Box::new(|t: &MeTheta| t.alpha[1])),
        ("beta1", 0.8, 0.007, Box::new(|t: &MeTheta| t.beta[0])),
        ("beta2", 0.9, 0.008, Box::new(|t: &MeTheta| t.beta[1])),
        ("mu1", 2.0, 0.090, Box::new(|t: &MeTheta| t.mu[0])),
        ("mu2", 8.0, 0.114, Box::new(|t: &MeTheta| t.mu[1])),
        ("delta1", -2.0, 0.119, Box::new(|t: &MeTheta| t.delta[0])),
        ("delta2", 2.0, 0.172, Box::new(|t: &MeTheta| t.delta[1])),
        ("gamma2_1", 0.1, 0.063, Box::new(|t: &MeTheta| t.gamma2[0])),
        ("gamma2_2", 0.1, 0.071, Box::new(|t: &MeTheta| t.gamma2[1])),
        ("omega2_0", 0.2, 0.026, Box::new(|t: &MeTheta| t.omega2[0])),
        ("omega2_1", 0.3, 0.026, Box::new(|t: &MeTheta| t.omega2[1])),
        ("omega2_2", 0.4, 0.036, Box::new(|t: &MeTheta| t.omega2[2])),
        ("p1", 0.7, 0.020, Box::new(|t: &MeTheta| t.weights[0])),
        ("p2", 0.3, 0.020, Box::new(|t: &MeTheta| t.weights[1])),
    ];
    let mut failures = Vec::new();
    for data_seed in [9101u64, 9102, 9103, 9104, 9105] {
        let mut rng = RngStream::root(data_seed);
        let (data, _) = simulate_me(&truth, 500, &mut rng).unwrap();
        let cfg = accept_config(data_seed + 1);
        let chain = gibbs_fit(&data, 2, Family::SkewNormal, &PriorSpec::default(), &cfg).unwrap();
        let mean = relabel_chain(&chain).posterior_mean();
        for (name, true_value, sd, getter) in &checks {
            let got = getter(&mean);
            let tol = tol_mult * sd;
            if (got - true_value).abs() > tol {
                failures.push(format!(
                    "seed {data_seed}: {name} = {got:.4} outside {true_value} ± {tol:.3}"
                ));
            }
        }
    }
    let pass = failures.is_empty();
    report(
        "1 [parameter recovery]",
        pass,
        &format!(
            "FMSN-ME G=2, n=500, 5 seeds, {}×sd tolerances{}",
            tol_mult,
            if pass {
                String::new()
            } else {
                format!("; {} violations: {}", failures.len(), failures.join("; "))
            }
        ),
    );
    assert!(pass, "{failures:?}");
}

// -------------------------------------------------------------------------
// 2. FMST-ME ν recovery
// -------------------------------------------------------------------------

#[test]
fn criterion_2_fmst_nu_recovery() {
    let truth = sim1_theta(Family::SkewT, ScaleFactor::Dof(3.0));
    let mut estimates = Vec::new();
    let mut pass = true;
    for data_seed in [9201u64, 9202, 9203, 9204, 9205] {
        let mut rng = RngStream::root(data_seed);
        let (data, _) = simulate_me(&truth, 500, &mut rng).unwrap();
        let cfg = accept_config(data_seed + 1);
        let chain = gibbs_fit(&data, 2, Family::SkewT, &PriorSpec::default(), &cfg).unwrap();
        let mean = relabel_chain(&chain).posterior_mean();
        let nu = mean.nu.dof().unwrap();
        estimates.push(nu);
        if !(2.2..4.5).contains(&nu) {
            pass = false;
        }
    }
    report(
        "2 [nu recovery]",
        pass,
        &format!(
            "FMST-ME G=2, true ν=3: posterior means {:?} (required in (2.2, 4.5))",
            estimates.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
    );
    assert!(pass, "nu estimates {estimates:?} left (2.2, 4.5)");
}

// -------------------------------------------------------------------------
// 3. DIC ordering on FMNIG-generated data
// -------------------------------------------------------------------------

#[test]
fn criterion_3_dic_ordering() {
    let settings = sim2_nig_settings();
    let mut rng = RngStream::root(2001);
    let (data, _) = simulate_fmnig_me(&settings, 100, &mut rng).unwrap();
    let cfg = accept_config(55);
    let families = [
        Family::Normal,
        Family::StudentT,
        Family::Slash,
        Family::ContaminatedNormal,
        Family::SkewT,
        Family::SkewSlash,
        Family::SkewContaminatedNormal,
    ];
    let root = RngStream::root(cfg.seed);
    let mut dic = std::collections::HashMap::new();
    for (i, family) in families.iter().enumerate() {
        let mut stream = root.child(i as u64);
        let chain =
            gibbs_fit_stream(&data, 3, *family, &PriorSpec::default(), &cfg, 1, &mut stream)
                .unwrap();
        let chain = relabel_chain(&chain);
        let report = dic_report(&chain, &data).unwrap();
        dic.insert(family.code(), report.dic_robust);
    }
    let skewed_heavy = [Family::SkewT, Family::SkewSlash, Family::SkewContaminatedNormal];
    let symmetric = [Family::Normal, Family::StudentT, Family::Slash, Family::ContaminatedNormal];
    let worst_heavy = skewed_heavy
        .iter()
        .map(|f| dic[f.code()])
        .fold(f64::NEG_INFINITY, f64::max);
    let best_symmetric = symmetric
        .iter()
        .map(|f| dic[f.code()])
        .fold(f64::INFINITY, f64::min);
    let pass = worst_heavy < best_symmetric;
    report(
        "3 [DIC ordering]",
        pass,
        &format!(
            "max(fmst,fmssl,fmscn) = {worst_heavy:.2} vs min(fmn,fmt,fmsl,fmcn) = {best_symmetric:.2} on sim2-nig n=100"
        ),
    );
    assert!(pass, "robust DIC ordering violated: {dic:?}");
}

// -------------------------------------------------------------------------
// 4. Bayesian p-value
// -------------------------------------------------------------------------

#[test]
fn criterion_4_bayesian_p_value() {
    let truth = sim1_theta(Family::SkewT, ScaleFactor::Dof(3.0));
    let mut rng = RngStream::root(3001);
    let (data, _) = simulate_me(&truth, 300, &mut rng).unwrap();
    let cfg = accept_config(3002);

    // 4a: well-specified self-fit
    let chain = gibbs_fit(&data, 2, Family::SkewT, &PriorSpec::default(), &cfg).unwrap();
    let chain = relabel_chain(&chain);
    let good = ppc_pvalue(&chain, &data, &RngStream::root(3003)).unwrap();
    let pass_a = good.p_value > 0.2 && good.p_value < 0.8;
    report(
        "4a [ppc well-specified]",
        pass_a,
        &format!("FMST-ME G=2 self-fit: p = {:.4} (required in (0.2, 0.8))", good.p_value),
    );

    // 4b: deliberately misspecified fit. The deviance is a quadratic
    // statistic and the G=1 normal null can match the first two moments of
    // any dataset from this model class, so this check fails by
    // construction; see the decisions ledger. It is asserted as specified.
    let bad_chain = gibbs_fit(&data, 1, Family::Normal, &PriorSpec::default(), &cfg).unwrap();
    let bad = ppc_pvalue(&bad_chain, &data, &RngStream::root(3004)).unwrap();
    let pass_b = bad.p_value < 0.05 || bad.p_value > 0.95;
    report(
        "4b [ppc misspecified]",
        pass_b,
        &format!(
            "FMN-ME G=1 on bimodal skew-t data: p = {:.4} (required < 0.05 or > 0.95)",
            bad.p_value
        ),
    );
    assert!(pass_a, "well-specified p-value {} outside (0.2, 0.8)", good.p_value);
    assert!(
        pass_b,
        "misspecified p-value {} not extreme; the deviance discrepancy cannot flag a \
         second-moment-saturated null (see decisions ledger)",
        bad.p_value
    );
}

// -------------------------------------------------------------------------
// 5. Data cloning on identifiable FMSN-ME data
// -------------------------------------------------------------------------

#[test]
fn criterion_5_data_cloning_rate() {
    let truth = sim1_theta(Family::SkewNormal, ScaleFactor::None);
    let mut rng = RngStream::root(604);
    let (data, _) = simulate_me(&truth, 200, &mut rng).unwrap();
    // longer chains than the CI default: the eigenvalue of the posterior
    // covariance needs the extra effective sample size to stabilize
    let cfg = McmcConfig { iterations: 32_000, burnin: 6_000, thin: 13, seed: 4040 };
    let clone_report = data_clone(
        &data,
        2,
        Family::SkewNormal,
        &PriorSpec::default(),
        &cfg,
        &[1, 2, 4, 8, 16],
        &ParamSelector::Full,
    )
    .unwrap();
    assert!(clone_report.skipped.is_empty(), "skipped levels: {:?}", clone_report.skipped);
    let mut pass = true;
    let mut detail = Vec::new();
    assert_eq!(clone_report.levels[0].lambda_hat, 1.0);
    for level in clone_report.levels.iter().skip(1) {
        let k = level.k as f64;
        let in_band = level.lambda_hat > 0.5 / k && level.lambda_hat < 2.0 / k;
        pass &= in_band;
        detail.push(format!("K={}: λ̂={:.4} (1/K={:.4})", level.k, level.lambda_hat, 1.0 / k));
    }
    report(
        "5 [data cloning]",
        pass,
        &format!("n=200 FMSN-ME, λ̂ within factor 2 of 1/K: {}", detail.join(", ")),
    );
    assert!(pass, "{detail:?}");
}

// -------------------------------------------------------------------------
// 6. Distribution-layer property suite
// -------------------------------------------------------------------------

#[test]
fn criterion_6_distribution_properties() {
    use nalgebra::{DMatrix, DVector};
    use smsnme::distributions::{
        omega_lambda_from, sigma_delta_from, smsn_pdf, smsn_sample, SmsnParams,
    };
    let mut problems = Vec::new();

    // normalization within 1e-4 for all 8 families
    for params in family_test_cases() {
        let mass = normalization_mass(&params);
        if (mass - 1.0).abs() > 1e-4 {
            problems.push(format!("{:?} mass {mass}", params.family()));
        }
    }

    // symmetric-reduction identities
    for (skewed, symmetric, nu) in [
        (Family::SkewNormal, Family::Normal, ScaleFactor::None),
        (Family::SkewT, Family::StudentT, ScaleFactor::Dof(5.0)),
        (
            Family::SkewContaminatedNormal,
            Family::ContaminatedNormal,
            ScaleFactor::Contamination { rho: 0.4, tau: 0.5 },
        ),
    ] {
        let a = SmsnParams::univariate(0.2, 1.1, 0.0, skewed, nu).unwrap();
        let b = SmsnParams::univariate(0.2, 1.1, 0.0, symmetric, nu).unwrap();
        for k in -4..=4 {
            let x = DVector::from_element(1, k as f64);
            let pa = smsn_pdf(&x, &a).unwrap();
            let pb = smsn_pdf(&x, &b).unwrap();
            if (pa - pb).abs() > 1e-12 * pb.max(1.0) {
                problems.push(format!("{skewed:?} reduction at {k}"));
            }
        }
    }
    let slash_a =
        SmsnParams::univariate(0.2, 1.1, 0.0, Family::SkewSlash, ScaleFactor::Dof(3.0)).unwrap();
    let slash_b =
        SmsnParams::univariate(0.2, 1.1, 0.0, Family::Slash, ScaleFactor::Dof(3.0)).unwrap();
    for k in -4..=4 {
        let x = DVector::from_element(1, k as f64);
        if (smsn_pdf(&x, &slash_a).unwrap() - smsn_pdf(&x, &slash_b).unwrap()).abs() > 1e-6 {
            problems.push(format!("slash reduction at {k}"));
        }
    }

    // parameterization round-trip to 1e-10 on seeded random inputs
    use rand::Rng as _;
    let mut rng = RngStream::root(606);
    for _ in 0..25 {
        let s11: f64 = rng.random_range(0.2..3.0);
        let s22 = rng.random_range(0.2..3.0);
        let corr: f64 = rng.random_range(-0.8..0.8);
        let cov = corr * (s11 * s22).sqrt();
        let sigma = DMatrix::from_row_slice(2, 2, &[s11, cov, cov, s22]);
        let delta =
            DVector::from_row_slice(&[rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]);
        let (omega, lambda) = omega_lambda_from(&sigma, &delta).unwrap();
        let (sigma2, delta2) = sigma_delta_from(&omega, &lambda).unwrap();
        if (&sigma2 - &sigma).norm() > 1e-10 * sigma.norm()
            || (&delta2 - &delta).norm() > 1e-10 * delta.norm().max(1.0)
        {
            problems.push("round trip".to_string());
        }
    }

    // skew-normal sampler moment at 10⁵ draws within 3 SE
    let sn = SmsnParams::univariate(0.5, 1.0, 1.5, Family::SkewNormal, ScaleFactor::None).unwrap();
    let mut rng = RngStream::root(607);
    let draws = smsn_sample(&sn, 100_000, &mut rng).unwrap();
    let xs: Vec<f64> = draws.column(0).iter().cloned().collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() as f64 - 1.0);
    let se = (var / xs.len() as f64).sqrt();
    let expected = 0.5 + (2.0 / std::f64::consts::PI).sqrt() * 1.5;
    if (mean - expected).abs() > 3.0 * se {
        problems.push(format!("SN moment {mean} vs {expected}"));
    }

    // sampler-vs-density KS at the 1% level per family
    for (i, params) in family_test_cases().into_iter().enumerate() {
        let (stat, critical) = sampler_density_ks(&params, 10_000, 608 + i as u64);
        if stat >= critical {
            problems.push(format!("{:?} KS {stat:.4} ≥ {critical:.4}", params.family()));
        }
    }

    let pass = problems.is_empty();
    report(
        "6 [distribution properties]",
        pass,
        &format!(
            "normalization, symmetric reduction, round-trip, SN moment, KS per family{}",
            if pass { String::new() } else { format!("; problems: {problems:?}") }
        ),
    );
    assert!(pass, "{problems:?}");
}

// -------------------------------------------------------------------------
// 7. DIC algebra
// -------------------------------------------------------------------------

#[test]
fn criterion_7_dic_algebra() {
    let truth = sim1_theta(Family::SkewNormal, ScaleFactor::None);
    let mut rng = RngStream::root(701);
    let (data, _) = simulate_me(&truth, 60, &mut rng).unwrap();
    let cfg = McmcConfig { iterations: 600, burnin: 200, thin: 10, seed: 702 };
    let chain = gibbs_fit(&data, 2, Family::SkewNormal, &PriorSpec::default(), &cfg).unwrap();
    let chain = relabel_chain(&chain);

    // single-draw identity: dic_plugin = dic_robust = deviance
    let mut single = chain.clone();
    single.draws.truncate(1);
    single.loglik.truncate(1);
    let dev = deviance(&single.draws[0], &data).unwrap();
    let plugin = dic_plugin(&single, &data).unwrap();
    let robust = dic_robust(&single, &data).unwrap();
    let identity_ok = (plugin - dev).abs() <= 1e-12 * dev.abs()
        && (robust - dev).abs() <= 1e-12 * dev.abs();

    // label-permutation invariance of the robust variant to 1e-10
    let base = dic_robust(&chain, &data).unwrap();
    let mut permuted = chain.clone();
    for (l, draw) in permuted.draws.iter_mut().enumerate() {
        if l % 2 == 0 {
            draw.mu.swap(0, 1);
            draw.delta.swap(0, 1);
            draw.gamma2.swap(0, 1);
            draw.weights.swap(0, 1);
        }
    }
    let perm = dic_robust(&permuted, &data).unwrap();
    let invariance_ok = (base - perm).abs() <= 1e-10 * base.abs().max(1.0);

    let pass = identity_ok && invariance_ok;
    report(
        "7 [DIC algebra]",
        pass,
        &format!(
            "single-draw identity (plugin {plugin:.6}, robust {robust:.6}, deviance {dev:.6}); permutation invariance |Δ| = {:.2e}",
            (base - perm).abs()
        ),
    );
    assert!(pass);
}

// -------------------------------------------------------------------------
// 8. Sampler correctness: Geweke test and the clone-weight identity
// -------------------------------------------------------------------------

#[test]
fn criterion_8_sampler_correctness() {
    let z = geweke_z_scores(160_000, 801, 802);
    let worst = z.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    let geweke_ok = z.iter().all(|v| v.abs() < 4.0);

    let truth = sim1_theta(Family::SkewNormal, ScaleFactor::None);
    let mut rng = RngStream::root(803);
    let (data, _) = simulate_me(&truth, 40, &mut rng).unwrap();
    let base = observed_loglik(&truth, &data).unwrap();
    let identity_ok = [2usize, 7, 16, 32].iter().all(|&k| {
        let weighted = clone_weighted_loglik(&truth, &data, k).unwrap();
        (weighted - k as f64 * base).abs() <= 1e-12 * base.abs()
    });

    let pass = geweke_ok && identity_ok;
    report(
        "8 [sampler correctness]",
        pass,
        &format!(
            "Geweke |z| over {} functions: worst {:.2} (< 4); clone-weight identity exact",
            GEWEKE_TEST_FUNCTION_NAMES.len(),
            worst
        ),
    );
    assert!(pass, "geweke z = {z:?}, identity_ok = {identity_ok}");
}

// -------------------------------------------------------------------------
// 9. CLI determinism
// -------------------------------------------------------------------------

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_smsnme"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn dir_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    entries
}

#[test]
fn criterion_9_cli_determinism() {
    let work = tempfile::tempdir().unwrap();
    let base = work.path();
    let sim = base.join("sim");
    // one shared dataset for the downstream commands
    let out = run_cli(&[
        "simulate", "--preset", "sim1-fmsn", "--n", "120", "--seed", "77",
        "--out", sim.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let data = sim.join("data.csv");
    let fit_first = base.join("fit1");
    let out = run_cli(&[
        "fit", "--data", data.to_str().unwrap(), "--model", "fmsn", "--g", "2",
        "--iters", "800", "--burnin", "200", "--thin", "4", "--seed", "5",
        "--out", fit_first.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut pass = true;
    let mut detail = Vec::new();
    let reruns: Vec<(&str, Vec<String>)> = vec![
        (
            "simulate",
            vec![
                "simulate".into(), "--preset".into(), "sim1-fmst".into(), "--n".into(),
                "90".into(), "--seed".into(), "11".into(),
            ],
        ),
        (
            "fit",
            vec![
                "fit".into(), "--data".into(), data.display().to_string(), "--model".into(),
                "fmsn".into(), "--g".into(), "2".into(), "--iters".into(), "800".into(),
                "--burnin".into(), "200".into(), "--thin".into(), "4".into(), "--seed".into(),
                "5".into(),
            ],
        ),
        (
            "compare",
            vec![
                "compare".into(), "--data".into(), data.display().to_string(), "--models".into(),
                "fmn,fmsn".into(), "--g".into(), "2".into(), "--iters".into(), "600".into(),
                "--burnin".into(), "200".into(), "--thin".into(), "4".into(), "--seed".into(),
                "9".into(),
            ],
        ),
        (
            "diagnose --ppc",
            vec![
                "diagnose".into(), "--ppc".into(), "--chain".into(),
                fit_first.join("manifest.json").display().to_string(), "--data".into(),
                data.display().to_string(), "--seed".into(), "13".into(),
            ],
        ),
        (
            "diagnose --dclone",
            vec![
                "diagnose".into(), "--dclone".into(), "--data".into(),
                data.display().to_string(), "--model".into(), "fmsn".into(), "--g".into(),
                "2".into(), "--levels".into(), "1,2".into(), "--iters".into(), "600".into(),
                "--burnin".into(), "200".into(), "--thin".into(), "4".into(), "--seed".into(),
                "15".into(),
            ],
        ),
    ];
    for (name, args) in &reruns {
        let dir_a = base.join(format!("{}_a", name.replace([' ', '-'], "_")));
        let dir_b = base.join(format!("{}_b", name.replace([' ', '-'], "_")));
        for dir in [&dir_a, &dir_b] {
            let mut full: Vec<String> = args.clone();
            full.push("--out".into());
            full.push(dir.display().to_string());
            let refs: Vec<&str> = full.iter().map(String::as_str).collect();
            let out = run_cli(&refs);
            if !out.status.success() {
                pass = false;
                detail.push(format!("{name} exited {:?}", out.status.code()));
            }
        }
        if dir_snapshot(&dir_a) != dir_snapshot(&dir_b) {
            pass = false;
            detail.push(format!("{name} outputs differ across reruns"));
        }
    }

    // exit-code contract: config errors exit 2, nothing written without --out
    let no_out = Command::new(env!("CARGO_BIN_EXE_smsnme"))
        .args(["simulate", "--preset", "sim1-fmsn", "--n", "10", "--seed", "1"])
        .env_remove("SMSNME_OUT_DIR")
        .output()
        .unwrap();
    if no_out.status.code() != Some(2) {
        pass = false;
        detail.push(format!("missing --out exited {:?}, expected 2", no_out.status.code()));
    }
    let bad_model = run_cli(&[
        "fit", "--data", data.to_str().unwrap(), "--model", "bogus", "--g", "2", "--out",
        base.join("x").to_str().unwrap(),
    ]);
    if bad_model.status.code() != Some(2) {
        pass = false;
        detail.push(format!("bad model exited {:?}, expected 2", bad_model.status.code()));
    }

    report(
        "9 [CLI determinism]",
        pass,
        &format!(
            "simulate/fit/compare/diagnose byte-identical across reruns; exit codes 0/2{}",
            if pass { String::new() } else { format!("; problems: {detail:?}") }
        ),
    );
    assert!(pass, "{detail:?}");
}
