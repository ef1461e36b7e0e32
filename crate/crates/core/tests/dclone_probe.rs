//! Manual probe for the data-cloning curve; run with --ignored --nocapture.

use smsnme_testsupport as common;

use common::sim1_theta;
use smsnme::diagnostics::{data_clone, ParamSelector};
use smsnme::distributions::{Family, ScaleFactor};
use smsnme::inference::{McmcConfig, PriorSpec};
use smsnme::me_model::simulate_me;
use smsnme::RngStream;

#[test]
#[ignore = "diagnostic probe"]
fn probe_clone_curve() {
    let truth = sim1_theta(Family::SkewNormal, ScaleFactor::None);
    let mut rng = RngStream::root(501);
    let (data, _) = simulate_me(&truth, 200, &mut rng).unwrap();
    let cfg = McmcConfig { iterations: 8000, burnin: 2000, thin: 10, seed: 41 };
    let start = std::time::Instant::now();
    let report = data_clone(
        &data,
        2,
        Family::SkewNormal,
        &PriorSpec::default(),
        &cfg,
        &[1, 2, 4, 8, 16],
        &ParamSelector::Full,
    )
    .unwrap();
    println!("elapsed {:?}", start.elapsed());
    for level in &report.levels {
        let k = level.k as f64;
        println!(
            "K={:>2}: lambda_max={:.5e} lambda_hat={:.4} 1/K={:.4} in-band={}",
            level.k,
            level.lambda_max,
            level.lambda_hat,
            1.0 / k,
            level.lambda_hat > 0.5 / k && level.lambda_hat < 2.0 / k
        );
    }
}
