//! Native learners: single-label base/meta classifiers and the multi-label
//! reductions and wrappers built on top of them.
//!
//! Every fit is a pure function of `(spec, data, seed)`. Long-running fits
//! poll a [`Deadline`] between units of work (ensemble members, boosting
//! rounds, gradient epochs, tree nodes) and abort with
//! [`LearnError::Timeout`] once it has passed.

pub mod multi;
pub mod single;

use std::time::Instant;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LearnError {
    #[error("unsupported learner specification: {0}")]
    UnsupportedSpec(String),
    #[error("expected {expected} feature columns, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("training data is empty")]
    EmptyData,
    #[error("class id {id} is outside a codebook of {size} label sets")]
    UnknownClassId { id: usize, size: usize },
    #[error("subset size k = {k} is invalid for {m} labels")]
    InvalidK { k: usize, m: usize },
    #[error("{count} subsets of size {k} cannot cover {m} labels")]
    UncoverableLabels { count: usize, k: usize, m: usize },
    #[error("deadline passed during fit")]
    Timeout,
}

/// Optional point in time after which fitting gives up.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub const NONE: Deadline = Deadline(None);

    pub fn at(instant: Instant) -> Self {
        Deadline(Some(instant))
    }

    pub fn from_option(instant: Option<Instant>) -> Self {
        Deadline(instant)
    }

    pub fn instant(&self) -> Option<Instant> {
        self.0
    }

    pub fn expired(&self) -> bool {
        self.0.is_some_and(|d| Instant::now() >= d)
    }

    pub fn check(&self) -> Result<(), LearnError> {
        if self.expired() {
            Err(LearnError::Timeout)
        } else {
            Ok(())
        }
    }
}

/// Index of the largest value; ties go to the smallest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    #[test]
    fn argmax_ties_to_smaller_index() {
        assert_eq!(argmax(&[0.2, 0.8]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.1, 0.4, 0.4]), 1);
    }

    #[test]
    fn deadline() {
        assert!(Deadline::NONE.check().is_ok());
        let past = Deadline::at(Instant::now() - Duration::from_millis(1));
        assert_eq!(past.check(), Err(LearnError::Timeout));
    }
}
