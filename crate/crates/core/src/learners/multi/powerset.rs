use std::collections::HashMap;

use ndarray::{Array2, ArrayView2};

use crate::learners::LearnError;

/// Bijection between observed label vectors and dense class ids, assigned in
/// first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpCodebook {
    patterns: Vec<Vec<u8>>,
    ids: HashMap<Vec<u8>, usize>,
}

impl LpCodebook {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn pattern(&self, id: usize) -> Option<&[u8]> {
        self.patterns.get(id).map(Vec::as_slice)
    }

    pub fn id_of(&self, pattern: &[u8]) -> Option<usize> {
        self.ids.get(pattern).copied()
    }

    pub fn patterns(&self) -> &[Vec<u8>] {
        &self.patterns
    }
}

pub fn label_powerset_encode(labels: ArrayView2<u8>) -> (Vec<usize>, LpCodebook) {
    let mut book = LpCodebook {
        patterns: Vec::new(),
        ids: HashMap::new(),
    };
    let ids = labels
        .outer_iter()
        .map(|row| {
            let key = row.to_vec();
            let next = book.patterns.len();
            *book.ids.entry(key.clone()).or_insert_with(|| {
                book.patterns.push(key);
                next
            })
        })
        .collect();
    (ids, book)
}

pub fn label_powerset_decode(ids: &[usize], book: &LpCodebook) -> Result<Array2<u8>, LearnError> {
    let m = book.patterns.first().map_or(0, Vec::len);
    let mut out = Array2::zeros((ids.len(), m));
    for (i, &id) in ids.iter().enumerate() {
        let pattern = book.pattern(id).ok_or(LearnError::UnknownClassId {
            id,
            size: book.len(),
        })?;
        out.row_mut(i).iter_mut().zip(pattern).for_each(|(o, b)| *o = *b);
    }
    Ok(out)
}

/// Pruned-sets training multiset.
///
/// Label vectors seen at least `min_count` times are kept as they are. Each
/// instance carrying a rarer vector is re-expressed by up to `max_subsets`
/// frequent, non-empty, strict sub-vectors, ranked by occurrence count, then
/// cardinality, then lexicographically; instances with none are dropped.
pub fn prune_label_sets(labels: ArrayView2<u8>, min_count: usize, max_subsets: usize) -> Vec<(usize, Vec<u8>)> {
    let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
    for row in labels.outer_iter() {
        *counts.entry(row.to_vec()).or_default() += 1;
    }
    let mut frequent: Vec<(&Vec<u8>, usize)> = counts
        .iter()
        .filter(|(v, &c)| c >= min_count && v.iter().any(|&b| b == 1))
        .map(|(v, &c)| (v, c))
        .collect();
    frequent.sort_by(|(va, ca), (vb, cb)| {
        cb.cmp(ca)
            .then_with(|| cardinality(vb).cmp(&cardinality(va)))
            .then_with(|| va.cmp(vb))
    });

    let mut out = Vec::new();
    for (i, row) in labels.outer_iter().enumerate() {
        let v = row.to_vec();
        if counts[&v] >= min_count {
            out.push((i, v));
            continue;
        }
        out.extend(
            frequent
                .iter()
                .filter(|(u, _)| **u != v && u.iter().zip(&v).all(|(a, b)| a & b == *a))
                .take(max_subsets)
                .map(|(u, _)| (i, (*u).clone())),
        );
    }
    out
}

fn cardinality(v: &[u8]) -> usize {
    v.iter().filter(|&&b| b == 1).count()
}
