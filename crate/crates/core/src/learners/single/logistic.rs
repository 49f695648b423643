use ndarray::{Array2, ArrayView2};

use crate::learners::{Deadline, LearnError};

const MOMENTUM: f64 = 0.9;

/// Multinomial logistic regression trained by full-batch Nesterov gradient
/// descent on standardized inputs.
#[derive(Debug, Clone)]
pub(super) struct Softmax {
    center: Vec<f64>,
    scale: Vec<f64>,
    /// `c × (d + 1)` row-major; the last column of each row is the bias.
    params: Vec<f64>,
    c: usize,
}

/// Weighted mean negative log-likelihood plus `l2/2 · ‖W‖²` (bias excluded),
/// and its gradient, for `c × (d + 1)` row-major parameters. `x` carries no
/// bias column; one is implied.
pub fn objective_and_gradient(
    params: &[f64],
    x: ArrayView2<f64>,
    y: &[usize],
    w: &[f64],
    c: usize,
    l2: f64,
) -> (f64, Vec<f64>) {
    let d = x.ncols();
    let stride = d + 1;
    let total: f64 = w.iter().sum();
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    let mut probs = vec![0.0; c];
    let mut row = vec![0.0; d];
    for (i, view) in x.outer_iter().enumerate() {
        row.iter_mut().zip(view.iter()).for_each(|(r, v)| *r = *v);
        for (k, p) in probs.iter_mut().enumerate() {
            let q = &params[k * stride..(k + 1) * stride];
            *p = q[d] + row.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
        }
        let top = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let own = probs[y[i]];
        let mut z = 0.0;
        for p in probs.iter_mut() {
            *p = (*p - top).exp();
            z += *p;
        }
        loss += w[i] * (top + z.ln() - own);
        for (k, p) in probs.iter().enumerate() {
            let r = w[i] * (p / z - if k == y[i] { 1.0 } else { 0.0 }) / total;
            let g = &mut grad[k * stride..(k + 1) * stride];
            g[..d].iter_mut().zip(&row).for_each(|(g, v)| *g += r * v);
            g[d] += r;
        }
    }
    loss /= total;
    for k in 0..c {
        for j in 0..d {
            let v = params[k * stride + j];
            loss += 0.5 * l2 * v * v;
            grad[k * stride + j] += l2 * v;
        }
    }
    (loss, grad)
}

impl Softmax {
    #[allow(clippy::too_many_arguments)]
    pub(super) fn fit(
        x: ArrayView2<f64>,
        y: &[usize],
        c: usize,
        w: &[f64],
        epochs: usize,
        rate: f64,
        l2: f64,
        deadline: Deadline,
    ) -> Result<Self, LearnError> {
        let (n, d) = x.dim();
        let mut center = vec![0.0; d];
        let mut scale = vec![1.0; d];
        for j in 0..d {
            let col = x.column(j);
            let mu = col.sum() / n as f64;
            let sd = (col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n as f64).sqrt();
            center[j] = mu;
            scale[j] = if sd > 1e-12 { sd } else { 1.0 };
        }
        let z = standardize(x, &center, &scale);
        // Nesterov-accelerated gradient descent.
        let mut params = vec![0.0; c * (d + 1)];
        let mut velocity = vec![0.0; params.len()];
        let mut ahead = params.clone();
        for _ in 0..epochs {
            deadline.check()?;
            let (_, grad) = objective_and_gradient(&ahead, z.view(), y, w, c, l2);
            for j in 0..params.len() {
                velocity[j] = MOMENTUM * velocity[j] - rate * grad[j];
                params[j] += velocity[j];
                ahead[j] = params[j] + MOMENTUM * velocity[j];
            }
        }
        Ok(Softmax {
            center,
            scale,
            params,
            c,
        })
    }

    pub(super) fn scores(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let z = standardize(x, &self.center, &self.scale);
        let d = z.ncols();
        let stride = d + 1;
        let mut out = Array2::zeros((z.nrows(), self.c));
        for (i, row) in z.outer_iter().enumerate() {
            let logits: Vec<f64> = (0..self.c)
                .map(|k| {
                    let p = &self.params[k * stride..(k + 1) * stride];
                    p[d] + row.iter().zip(p).map(|(a, b)| a * b).sum::<f64>()
                })
                .collect();
            let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
            let s: f64 = exps.iter().sum();
            out.row_mut(i).iter_mut().zip(&exps).for_each(|(o, e)| *o = e / s);
        }
        out
    }
}

fn standardize(x: ArrayView2<f64>, center: &[f64], scale: &[f64]) -> Array2<f64> {
    let mut z = x.as_standard_layout().into_owned();
    for mut row in z.outer_iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - center[j]) / scale[j];
        }
    }
    z
}
