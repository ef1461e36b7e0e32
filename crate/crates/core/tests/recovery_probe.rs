//! Manual probe for parameter recovery; run with --ignored --nocapture.

use smsnme_testsupport as common;

use common::sim1_theta;
use smsnme::distributions::{Family, ScaleFactor};
use smsnme::inference::{gibbs_fit, relabel_chain, McmcConfig, PriorSpec};
use smsnme::me_model::simulate_me;
use smsnme::RngStream;

#[test]
#[ignore = "diagnostic probe"]
fn probe_fmsn_recovery() {
    let truth = sim1_theta(Family::SkewNormal, ScaleFactor::None);
    let mut rng = RngStream::root(1001);
    let (data, _) = simulate_me(&truth, 500, &mut rng).unwrap();
    let cfg = McmcConfig { iterations: 8000, burnin: 2000, thin: 10, seed: 17 };
    let start = std::time::Instant::now();
    let chain = gibbs_fit(&data, 2, Family::SkewNormal, &PriorSpec::default(), &cfg).unwrap();
    let chain = relabel_chain(&chain);
    println!("fit took {:?} for {} stored draws", start.elapsed(), chain.len());
    let mean = chain.posterior_mean();
    println!("alpha  {:?}  (true 0.4, 0.1)", mean.alpha.as_slice());
    println!("beta   {:?}  (true 0.8, 0.9)", mean.beta.as_slice());
    println!("mu     {:?}  (true 2, 8)", mean.mu);
    println!("delta  {:?}  (true -2, 2)", mean.delta);
    println!("gamma2 {:?}  (true 0.1, 0.1)", mean.gamma2);
    println!("omega2 {:?}  (true 0.2, 0.3, 0.4)", mean.omega2);
    println!("weights {:?} (true 0.7, 0.3)", mean.weights);
}

#[test]
#[ignore = "diagnostic probe"]
fn probe_fmst_recovery() {
    let truth = sim1_theta(Family::SkewT, ScaleFactor::Dof(3.0));
    let mut rng = RngStream::root(1002);
    let (data, _) = simulate_me(&truth, 500, &mut rng).unwrap();
    let cfg = McmcConfig { iterations: 8000, burnin: 2000, thin: 10, seed: 18 };
    let start = std::time::Instant::now();
    let chain = gibbs_fit(&data, 2, Family::SkewT, &PriorSpec::default(), &cfg).unwrap();
    let chain = relabel_chain(&chain);
    println!("fit took {:?}", start.elapsed());
    let mean = chain.posterior_mean();
    println!("mu     {:?}  (true 2, 8)", mean.mu);
    println!("delta  {:?}  (true -2, 2)", mean.delta);
    println!("beta   {:?}  (true 0.8, 0.9)", mean.beta.as_slice());
    println!("weights {:?} (true 0.7, 0.3)", mean.weights);
    println!("nu     {:?}  (true 3)", mean.nu);
}
