//! Built-in simulation presets.
//!
//! `sim1-<family>` is the parameter-recovery setup: α=(0.4,0.1),
//! β=(0.8,0.9), ω²=(0.2,0.3,0.4), μ=(2,8), Δ=(−2,2), γ²=(0.1,0.1),
//! p=(0.7,0.3), with ν=3 for the t/slash members and (ρ,τ)=(0.7,0.3) for
//! the contaminated normal; symmetric members drop the shapes.
//!
//! `sim2-nig` generates from the NIG mixture model: p=(0.4,0.3,0.3),
//! μ=(−10,1,10), λ=(−2,1,−2), Ω=I₃, α=(0.4,0.1), β=(0.8,0.9), δ_j=0.5,
//! γ_j=1 — a generator outside the SMSN class used for model comparison.

use nalgebra::DVector;
use smsnme::distributions::{Family, ScaleFactor};
use smsnme::me_model::{FmnigComponent, FmnigSettings, MeTheta};
use smsnme::Error;

pub enum Preset {
    Smsn(MeTheta),
    Nig(FmnigSettings),
}

pub fn sim1_theta(family: Family) -> MeTheta {
    let nu = match family.symmetric_counterpart() {
        Family::Normal => ScaleFactor::None,
        Family::StudentT | Family::Slash => ScaleFactor::Dof(3.0),
        Family::ContaminatedNormal => ScaleFactor::Contamination { rho: 0.7, tau: 0.3 },
        _ => unreachable!(),
    };
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

pub fn lookup(name: &str) -> Result<Preset, Error> {
    if name == "sim2-nig" {
        return Ok(Preset::Nig(sim2_nig_settings()));
    }
    if let Some(code) = name.strip_prefix("sim1-") {
        let family = Family::from_code(code)?;
        return Ok(Preset::Smsn(sim1_theta(family)));
    }
    Err(Error::invalid(
        "preset",
        format!("unknown preset `{name}` (expected sim1-<family> or sim2-nig)"),
    ))
}
