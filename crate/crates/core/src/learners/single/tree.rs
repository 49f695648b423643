//! Weighted CART classification tree with Gini impurity. A decision stump is
//! the depth-1 case.

use ndarray::{Array2, ArrayView2};

use crate::learners::{Deadline, LearnError};

#[derive(Debug, Clone)]
enum Node {
    Leaf(Vec<f64>),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub(super) struct Tree {
    nodes: Vec<Node>,
}

struct Grower<'a> {
    x: ArrayView2<'a, f64>,
    y: &'a [usize],
    w: &'a [f64],
    c: usize,
    max_depth: usize,
    min_leaf: usize,
    deadline: Deadline,
    nodes: Vec<Node>,
}

fn gini_mass(counts: &[f64], total: f64) -> f64 {
    // total · (1 − Σ p²)
    if total <= 0.0 {
        return 0.0;
    }
    total - counts.iter().map(|c| c * c).sum::<f64>() / total
}

impl Tree {
    pub(super) fn fit(
        x: ArrayView2<f64>,
        y: &[usize],
        c: usize,
        w: &[f64],
        max_depth: usize,
        min_leaf: usize,
        deadline: Deadline,
    ) -> Result<Tree, LearnError> {
        let mut g = Grower {
            x,
            y,
            w,
            c,
            max_depth,
            min_leaf,
            deadline,
            nodes: Vec::new(),
        };
        g.grow((0..y.len()).collect(), 0)?;
        Ok(Tree { nodes: g.nodes })
    }

    pub(super) fn scores(&self, x: ArrayView2<f64>, c: usize) -> Array2<f64> {
        let mut out = Array2::zeros((x.nrows(), c));
        for (i, row) in x.outer_iter().enumerate() {
            let mut at = 0;
            loop {
                match &self.nodes[at] {
                    Node::Leaf(dist) => {
                        out.row_mut(i).iter_mut().zip(dist).for_each(|(o, d)| *o = *d);
                        break;
                    }
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => at = if row[*feature] <= *threshold { *left } else { *right },
                }
            }
        }
        out
    }
}

impl Grower<'_> {
    fn leaf(&self, idx: &[usize]) -> Node {
        let mut dist = vec![0.0; self.c];
        for &i in idx {
            dist[self.y[i]] += self.w[i];
        }
        let total: f64 = dist.iter().sum();
        if total > 0.0 {
            dist.iter_mut().for_each(|d| *d /= total);
        } else {
            dist.iter_mut().for_each(|d| *d = 0.0);
            for &i in idx {
                dist[self.y[i]] += 1.0 / idx.len() as f64;
            }
        }
        Node::Leaf(dist)
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> Result<usize, LearnError> {
        self.deadline.check()?;
        let at = self.nodes.len();
        self.nodes.push(self.leaf(&idx));
        if depth >= self.max_depth || idx.len() < 2 * self.min_leaf {
            return Ok(at);
        }
        let Some((feature, threshold)) = self.best_split(&idx) else {
            return Ok(at);
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.x[[i, feature]] <= threshold);
        let left = self.grow(left_idx, depth + 1)?;
        let right = self.grow(right_idx, depth + 1)?;
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        Ok(at)
    }

    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64)> {
        let mut parent = vec![0.0; self.c];
        for &i in idx {
            parent[self.y[i]] += self.w[i];
        }
        let total: f64 = parent.iter().sum();
        let parent_impurity = gini_mass(&parent, total);
        if parent_impurity <= 1e-12 * total.max(1.0) {
            return None;
        }
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for f in 0..self.x.ncols() {
            order.sort_by(|&a, &b| self.x[[a, f]].total_cmp(&self.x[[b, f]]).then(a.cmp(&b)));
            let mut left = vec![0.0; self.c];
            let mut left_w = 0.0;
            for p in 0..order.len() - 1 {
                let i = order[p];
                left[self.y[i]] += self.w[i];
                left_w += self.w[i];
                let (here, next) = (self.x[[i, f]], self.x[[order[p + 1], f]]);
                let n_left = p + 1;
                if here == next || n_left < self.min_leaf || order.len() - n_left < self.min_leaf {
                    continue;
                }
                let right: Vec<f64> = parent.iter().zip(&left).map(|(a, b)| a - b).collect();
                let impurity = gini_mass(&left, left_w) + gini_mass(&right, total - left_w);
                if best.is_none_or(|(b, _, _)| impurity < b - 1e-12) {
                    let mid = here + (next - here) / 2.0;
                    let threshold = if mid < next { mid } else { here };
                    best = Some((impurity, f, threshold));
                }
            }
        }
        best.filter(|(imp, _, _)| *imp < parent_impurity - 1e-12 * total.max(1.0))
            .map(|(_, f, t)| (f, t))
    }
}
