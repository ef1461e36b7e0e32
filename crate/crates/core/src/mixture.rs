//! Finite mixtures of SMSN components.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::distributions::{smsn_sample, Family, ScaleFactor, SmsnDensity, SmsnParams};
use crate::error::{Error, Result};
use crate::math::special::log_sum_exp;
use crate::rng::RngStream;

/// A G-component SMSN mixture. All components share the family tag and the
/// scale factor ν; weights live on the simplex.
#[derive(Debug, Clone)]
pub struct MixtureSpec {
    components: Vec<SmsnParams>,
    weights: Vec<f64>,
}

impl MixtureSpec {
    /// Weights within 1e-8 of summing to one are renormalized; anything
    /// further off is rejected.
    pub fn new(components: Vec<SmsnParams>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("components", "need at least one component"));
        }
        if components.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        let family = components[0].family();
        let nu = *components[0].nu();
        let dim = components[0].dim();
        for (j, c) in components.iter().enumerate() {
            if c.family() != family {
                return Err(Error::invalid(
                    "components",
                    format!("component {j} has family {:?}, expected {family:?}", c.family()),
                ));
            }
            if c.nu() != &nu {
                return Err(Error::invalid(
                    "components",
                    format!("component {j} has a different scale factor; ν must be shared"),
                ));
            }
            if c.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "component {j} has dimension {}, expected {dim}",
                    c.dim()
                )));
            }
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::invalid("weights", "weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(
                "weights",
                format!("weights sum to {total}, outside the 1e-8 tolerance"),
            ));
        }
        let weights = weights.iter().map(|w| w / total).collect();
        Ok(Self {
            components,
            weights,
        })
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn family(&self) -> Family {
        self.components[0].family()
    }

    pub fn nu(&self) -> &ScaleFactor {
        self.components[0].nu()
    }

    pub fn components(&self) -> &[SmsnParams] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Precompile the per-component density evaluators.
    pub fn density(&self) -> Result<MixtureDensity> {
        let evaluators = self
            .components
            .iter()
            .map(SmsnDensity::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(MixtureDensity {
            evaluators,
            ln_weights: self.weights.iter().map(|w| w.ln()).collect(),
        })
    }
}

/// Reusable mixture log-density evaluator.
#[derive(Debug, Clone)]
pub struct MixtureDensity {
    evaluators: Vec<SmsnDensity>,
    ln_weights: Vec<f64>,
}

impl MixtureDensity {
    pub fn logpdf(&self, y: &DVector<f64>) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.evaluators.len());
        for (eval, lw) in self.evaluators.iter().zip(&self.ln_weights) {
            if *lw == f64::NEG_INFINITY {
                continue;
            }
            terms.push(lw + eval.logpdf(y)?);
        }
        Ok(log_sum_exp(&terms))
    }
}

/// log Σ_j p_j·SMSN(y|θ_j), stabilized by log-sum-exp.
pub fn mixture_logpdf(y: &DVector<f64>, spec: &MixtureSpec) -> Result<f64> {
    spec.density()?.logpdf(y)
}

/// Mixture density at `y`.
pub fn mixture_pdf(y: &DVector<f64>, spec: &MixtureSpec) -> Result<f64> {
    Ok(mixture_logpdf(y, spec)?.exp())
}

/// Draw the classification variable S ~ categorical(weights) by inverse CDF
/// over the cumulative weights (stable component ordering).
pub(crate) fn sample_label(weights: &[f64], rng: &mut RngStream) -> usize {
    let v: f64 = rng.random();
    let mut acc = 0.0;
    for (j, w) in weights.iter().enumerate() {
        acc += w;
        if v < acc {
            return j;
        }
    }
    weights.len() - 1
}

/// n mixture draws plus their component labels (0-based).
pub fn mixture_sample(
    spec: &MixtureSpec,
    n: usize,
    rng: &mut RngStream,
) -> Result<(DMatrix<f64>, Vec<usize>)> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one draw"));
    }
    let q = spec.dim();
    let mut values = DMatrix::zeros(n, q);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let j = sample_label(&spec.weights, rng);
        let row = smsn_sample(&spec.components[j], 1, rng)?;
        for k in 0..q {
            values[(i, k)] = row[(0, k)];
        }
        labels.push(j);
    }
    Ok((values, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::smsn_pdf;
    use approx::assert_relative_eq;

    fn sn(mu: f64, s2: f64, d: f64) -> SmsnParams {
        SmsnParams::univariate(mu, s2, d, Family::SkewNormal, ScaleFactor::None).unwrap()
    }

    fn pt(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn single_component_equals_component_pdf() {
        let spec = MixtureSpec::new(vec![sn(0.3, 1.0, 0.7)], vec![1.0]).unwrap();
        for &x in &[-1.0, 0.0, 2.0] {
            assert_relative_eq!(
                mixture_pdf(&pt(x), &spec).unwrap(),
                smsn_pdf(&pt(x), &sn(0.3, 1.0, 0.7)).unwrap(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn identical_components_collapse() {
        let spec =
            MixtureSpec::new(vec![sn(0.0, 1.0, 1.0), sn(0.0, 1.0, 1.0)], vec![0.5, 0.5]).unwrap();
        for &x in &[-1.0, 0.5] {
            assert_relative_eq!(
                mixture_pdf(&pt(x), &spec).unwrap(),
                smsn_pdf(&pt(x), &sn(0.0, 1.0, 1.0)).unwrap(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn matches_direct_weighted_sum() {
        let spec =
            MixtureSpec::new(vec![sn(-2.0, 1.0, 1.0), sn(3.0, 2.0, -0.5)], vec![0.35, 0.65])
                .unwrap();
        for &x in &[-3.0, -1.0, 0.0, 2.5, 6.0] {
            let direct = 0.35 * smsn_pdf(&pt(x), &sn(-2.0, 1.0, 1.0)).unwrap()
                + 0.65 * smsn_pdf(&pt(x), &sn(3.0, 2.0, -0.5)).unwrap();
            assert_relative_eq!(mixture_pdf(&pt(x), &spec).unwrap(), direct, epsilon = 1e-10);
        }
    }

    #[test]
    fn permutation_invariance() {
        let a = MixtureSpec::new(
            vec![sn(-2.0, 1.0, 1.0), sn(3.0, 2.0, -0.5), sn(0.0, 0.5, 0.0)],
            vec![0.2, 0.5, 0.3],
        )
        .unwrap();
        let b = MixtureSpec::new(
            vec![sn(0.0, 0.5, 0.0), sn(-2.0, 1.0, 1.0), sn(3.0, 2.0, -0.5)],
            vec![0.3, 0.2, 0.5],
        )
        .unwrap();
        for &x in &[-4.0, -1.0, 0.0, 1.0, 4.0] {
            let pa = mixture_pdf(&pt(x), &a).unwrap();
            let pb = mixture_pdf(&pt(x), &b).unwrap();
            assert!((pa - pb).abs() <= 1e-14 * pa.max(1.0));
        }
    }

    #[test]
    fn weight_validation() {
        assert!(MixtureSpec::new(vec![sn(0.0, 1.0, 0.0)], vec![0.9]).is_err());
        // within renormalization tolerance
        let spec =
            MixtureSpec::new(vec![sn(0.0, 1.0, 0.0), sn(1.0, 1.0, 0.0)], vec![0.5, 0.5 + 5e-9])
                .unwrap();
        assert_relative_eq!(spec.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        // mixed families rejected
        let st = SmsnParams::univariate(0.0, 1.0, 0.0, Family::StudentT, ScaleFactor::Dof(3.0))
            .unwrap();
        assert!(MixtureSpec::new(vec![sn(0.0, 1.0, 0.0), st], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn degenerate_weight_labels() {
        let spec =
            MixtureSpec::new(vec![sn(0.0, 1.0, 0.0), sn(5.0, 1.0, 0.0)], vec![1.0, 0.0]).unwrap();
        let mut rng = RngStream::root(41);
        let (_, labels) = mixture_sample(&spec, 500, &mut rng).unwrap();
        assert!(labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn label_frequencies() {
        let spec =
            MixtureSpec::new(vec![sn(0.0, 1.0, 0.0), sn(5.0, 1.0, 0.0)], vec![0.7, 0.3]).unwrap();
        let mut rng = RngStream::root(42);
        let n = 100_000;
        let (_, labels) = mixture_sample(&spec, n, &mut rng).unwrap();
        let freq = labels.iter().filter(|&&l| l == 0).count() as f64 / n as f64;
        let se = (0.7 * 0.3 / n as f64).sqrt();
        assert!((freq - 0.7).abs() < 3.0 * se, "freq {freq}");
    }
}
