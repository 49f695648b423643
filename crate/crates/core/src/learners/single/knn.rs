use ndarray::{Array2, ArrayView2};

/// k-nearest neighbours under Euclidean distance; scores are (weighted) vote
/// proportions. Equidistant neighbours are ranked by training index.
#[derive(Debug, Clone)]
pub(super) struct Knn {
    x: Array2<f64>,
    y: Vec<usize>,
    w: Vec<f64>,
    c: usize,
    k: usize,
}

impl Knn {
    pub(super) fn fit(x: ArrayView2<f64>, y: &[usize], c: usize, w: &[f64], k: usize) -> Self {
        Knn {
            x: x.to_owned(),
            y: y.to_vec(),
            w: w.to_vec(),
            c,
            k: k.min(y.len()),
        }
    }

    pub(super) fn scores(&self, q: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((q.nrows(), self.c));
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(self.y.len());
        for (i, row) in q.outer_iter().enumerate() {
            dist.clear();
            dist.extend(self.x.outer_iter().enumerate().map(|(t, train)| {
                let d2: f64 = train.iter().zip(row.iter()).map(|(a, b)| (a - b).powi(2)).sum();
                (d2, t)
            }));
            let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if self.k < dist.len() {
                dist.select_nth_unstable_by(self.k - 1, by_distance);
            }
            let neighbours = &dist[..self.k];
            let mut votes = vec![0.0; self.c];
            let mut mass = 0.0;
            for &(_, t) in neighbours {
                votes[self.y[t]] += self.w[t];
                mass += self.w[t];
            }
            if mass <= 0.0 {
                votes.iter_mut().for_each(|v| *v = 0.0);
                for &(_, t) in neighbours {
                    votes[self.y[t]] += 1.0;
                }
                mass = neighbours.len() as f64;
            }
            out.row_mut(i).iter_mut().zip(&votes).for_each(|(o, v)| *o = v / mass);
        }
        out
    }
}
