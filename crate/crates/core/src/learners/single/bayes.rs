use ndarray::{Array2, ArrayView2};

/// Gaussian naive Bayes with one normal density per (class, column).
#[derive(Debug, Clone)]
pub(super) struct GaussianNb {
    log_prior: Vec<f64>,
    mean: Array2<f64>,
    var: Array2<f64>,
}

impl GaussianNb {
    pub(super) fn fit(x: ArrayView2<f64>, y: &[usize], c: usize, w: &[f64]) -> Self {
        let d = x.ncols();
        let mut mass = vec![0.0; c];
        let mut mean = Array2::<f64>::zeros((c, d));
        for (i, row) in x.outer_iter().enumerate() {
            mass[y[i]] += w[i];
            for j in 0..d {
                mean[[y[i], j]] += w[i] * row[j];
            }
        }
        for k in 0..c {
            if mass[k] > 0.0 {
                mean.row_mut(k).mapv_inplace(|v| v / mass[k]);
            }
        }
        let mut var = Array2::<f64>::zeros((c, d));
        for (i, row) in x.outer_iter().enumerate() {
            for j in 0..d {
                var[[y[i], j]] += w[i] * (row[j] - mean[[y[i], j]]).powi(2);
            }
        }
        // Variance floor scaled to the widest column keeps constant columns finite.
        let widest = (0..d)
            .map(|j| {
                let col = x.column(j);
                let mu = col.mean().unwrap_or(0.0);
                col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / col.len() as f64
            })
            .fold(0.0f64, f64::max);
        let floor = 1e-9 * widest.max(1.0);
        for k in 0..c {
            for j in 0..d {
                var[[k, j]] = if mass[k] > 0.0 { var[[k, j]] / mass[k] } else { 0.0 } + floor;
            }
        }
        let total: f64 = mass.iter().sum();
        let log_prior = mass
            .iter()
            .map(|&m| if m > 0.0 { (m / total).ln() } else { f64::NEG_INFINITY })
            .collect();
        GaussianNb { log_prior, mean, var }
    }

    pub(super) fn scores(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let c = self.log_prior.len();
        let mut out = Array2::zeros((x.nrows(), c));
        for (i, row) in x.outer_iter().enumerate() {
            let mut logp: Vec<f64> = (0..c)
                .map(|k| {
                    if self.log_prior[k] == f64::NEG_INFINITY {
                        return f64::NEG_INFINITY;
                    }
                    self.log_prior[k]
                        + row
                            .iter()
                            .enumerate()
                            .map(|(j, v)| {
                                let var = self.var[[k, j]];
                                -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (v - self.mean[[k, j]]).powi(2) / var)
                            })
                            .sum::<f64>()
                })
                .collect();
            let mut top = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !top.is_finite() {
                logp.clone_from(&self.log_prior);
                top = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            }
            logp.iter_mut().for_each(|l| *l = (*l - top).exp());
            let z: f64 = logp.iter().sum();
            out.row_mut(i).iter_mut().zip(&logp).for_each(|(o, p)| *o = p / z);
        }
        out
    }
}
