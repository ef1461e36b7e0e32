//! Deterministic starting values: k-means on the X column for the mixture
//! blocks, per-coordinate least squares of Y on X for the regression.

use crate::me_model::Dataset;

pub(crate) struct InitState {
    pub labels: Vec<usize>,
    pub mu: Vec<f64>,
    pub gamma2: Vec<f64>,
    pub weights: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

/// 1-D k-means with quantile-seeded centroids; deterministic.
fn kmeans_1d(xs: &[f64], k: usize) -> (Vec<usize>, Vec<f64>) {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = xs.len();
    let mut centroids: Vec<f64> = (0..k)
        .map(|j| sorted[((j as f64 + 0.5) / k as f64 * n as f64) as usize % n])
        .collect();
    let mut labels = vec![0usize; n];
    for _ in 0..100 {
        let mut changed = false;
        for (i, &x) in xs.iter().enumerate() {
            let nearest = (0..k)
                .min_by(|&a, &b| {
                    (x - centroids[a])
                        .abs()
                        .total_cmp(&(x - centroids[b]).abs())
                })
                .unwrap();
            if labels[i] != nearest {
                labels[i] = nearest;
                changed = true;
            }
        }
        for j in 0..k {
            let members: Vec<f64> = xs
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == j)
                .map(|(&x, _)| x)
                .collect();
            if !members.is_empty() {
                centroids[j] = members.iter().sum::<f64>() / members.len() as f64;
            }
        }
        if !changed {
            break;
        }
    }
    (labels, centroids)
}

pub(crate) fn initialize(data: &Dataset, g: usize) -> InitState {
    let n = data.n();
    let r = data.n_responses();
    let xs: Vec<f64> = (0..n).map(|i| data.x(i)).collect();
    let (labels, centroids) = kmeans_1d(&xs, g);
    let mut mu = centroids;
    let mut gamma2 = vec![0.0; g];
    let mut counts = vec![0usize; g];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        gamma2[l] += (xs[i] - mu[l]) * (xs[i] - mu[l]);
    }
    let overall_mean = xs.iter().sum::<f64>() / n as f64;
    let overall_var = xs
        .iter()
        .map(|x| (x - overall_mean) * (x - overall_mean))
        .sum::<f64>()
        / n as f64;
    for j in 0..g {
        if counts[j] > 1 {
            gamma2[j] = (gamma2[j] / counts[j] as f64).max(1e-8);
        } else {
            gamma2[j] = overall_var.max(1e-8);
            if counts[j] == 0 {
                mu[j] = overall_mean;
            }
        }
    }
    // smoothed cluster proportions keep every weight strictly positive
    let weights: Vec<f64> = counts
        .iter()
        .map(|&c| (c as f64 + 0.5) / (n as f64 + 0.5 * g as f64))
        .collect();
    // least squares of each Y_k on (1, X)
    let sx: f64 = xs.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let det = n as f64 * sxx - sx * sx;
    let mut alpha = vec![0.0; r];
    let mut beta = vec![0.0; r];
    for k in 0..r {
        let sy: f64 = (0..n).map(|i| data.y(i, k)).sum();
        let sxy: f64 = (0..n).map(|i| xs[i] * data.y(i, k)).sum();
        if det.abs() > 1e-12 * (n as f64) * sxx.max(1.0) {
            beta[k] = (n as f64 * sxy - sx * sy) / det;
            alpha[k] = (sy - beta[k] * sx) / n as f64;
        } else {
            beta[k] = 0.0;
            alpha[k] = sy / n as f64;
        }
    }
    InitState {
        labels,
        mu,
        gamma2,
        weights,
        alpha,
        beta,
    }
}
