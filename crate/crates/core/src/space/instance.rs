use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Algorithm, Layer, SpaceError};
use crate::learners::multi::MlSpec;
use crate::learners::single::SlSpec;

/// A fully resolved pipeline: an algorithm and, unless it is a leaf, the
/// pipeline it wraps. Serialized as nested text, e.g.
/// `BaggingML(CC(AdaBoostM1(NaiveBayes)))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentInstance {
    pub algorithm: Algorithm,
    pub child: Option<Box<ComponentInstance>>,
}

impl ComponentInstance {
    pub fn leaf(algorithm: Algorithm) -> Self {
        ComponentInstance { algorithm, child: None }
    }

    pub fn wrap(algorithm: Algorithm, child: ComponentInstance) -> Self {
        ComponentInstance {
            algorithm,
            child: Some(Box::new(child)),
        }
    }

    /// Nests `chain[0](chain[1](…))` and checks the layering rules.
    pub fn from_chain(chain: &[Algorithm]) -> Result<Self, SpaceError> {
        let (&last, outer) = chain
            .split_last()
            .ok_or_else(|| SpaceError::InvalidInstance("empty pipeline".into()))?;
        let instance = outer
            .iter()
            .rev()
            .fold(ComponentInstance::leaf(last), |inner, &a| ComponentInstance::wrap(a, inner));
        instance.validate()?;
        Ok(instance)
    }

    /// Algorithms from the outermost inwards.
    pub fn chain(&self) -> impl Iterator<Item = Algorithm> + '_ {
        std::iter::successors(Some(self), |c| c.child.as_deref()).map(|c| c.algorithm)
    }

    pub fn depth(&self) -> usize {
        self.chain().count()
    }

    pub fn validate(&self) -> Result<(), SpaceError> {
        let child_layer = self.child.as_ref().map(|c| c.algorithm.layer());
        let ok = match (self.algorithm.layer(), child_layer) {
            (Layer::MlMeta, Some(Layer::MlBase)) => true,
            (Layer::MlBase, None) => self.algorithm == Algorithm::MajorityLabelSet,
            (Layer::MlBase, Some(Layer::SlBase | Layer::SlMeta)) => self.algorithm != Algorithm::MajorityLabelSet,
            (Layer::SlMeta, Some(Layer::SlBase)) => true,
            (Layer::SlBase, None) => true,
            _ => false,
        };
        if !ok {
            return Err(SpaceError::InvalidInstance(format!(
                "{} cannot wrap {}",
                self.algorithm,
                self.child.as_ref().map_or("nothing".to_string(), |c| c.algorithm.to_string())
            )));
        }
        match &self.child {
            Some(c) => c.validate(),
            None => Ok(()),
        }
    }

    pub fn to_ml_spec(&self) -> Result<MlSpec, SpaceError> {
        self.validate()?;
        if self.algorithm.layer() == Layer::MlMeta || self.algorithm.layer() == Layer::MlBase {
            Ok(self.ml_spec())
        } else {
            Err(SpaceError::InvalidInstance(format!("{} is not a multi-label pipeline", self)))
        }
    }

    fn ml_spec(&self) -> MlSpec {
        let child = || self.child.as_deref().expect("validated");
        match self.algorithm {
            Algorithm::BaggingMl => MlSpec::bagging_ml(child().ml_spec()),
            Algorithm::EnsembleMl => MlSpec::ensemble_ml(child().ml_spec()),
            Algorithm::RandomSubspaceMl => MlSpec::random_subspace_ml(child().ml_spec()),
            Algorithm::Br => MlSpec::BinaryRelevance { base: child().sl_spec() },
            Algorithm::Cc => MlSpec::ClassifierChain { base: child().sl_spec() },
            Algorithm::Lc => MlSpec::LabelCombination { base: child().sl_spec() },
            Algorithm::Ps => MlSpec::pruned_sets(child().sl_spec()),
            Algorithm::Rakel => MlSpec::rakel(child().sl_spec()),
            Algorithm::MajorityLabelSet => MlSpec::MajorityLabelSet,
            other => unreachable!("{other} is single-label"),
        }
    }

    fn sl_spec(&self) -> SlSpec {
        let child = || self.child.as_deref().expect("validated").sl_spec();
        match self.algorithm {
            Algorithm::AdaBoostM1 => SlSpec::ada_boost(child()),
            Algorithm::Bagging => SlSpec::bagging(child()),
            Algorithm::RandomSubspace => SlSpec::random_subspace(child()),
            Algorithm::DecisionStump => SlSpec::DecisionStump,
            Algorithm::DecisionTree => SlSpec::decision_tree(),
            Algorithm::Knn => SlSpec::knn(),
            Algorithm::Logistic => SlSpec::logistic(),
            Algorithm::NaiveBayes => SlSpec::NaiveBayes,
            Algorithm::ZeroR => SlSpec::ZeroR,
            other => unreachable!("{other} is multi-label"),
        }
    }
}

impl fmt::Display for ComponentInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.algorithm.name())?;
        if let Some(c) = &self.child {
            write!(f, "({c})")?;
        }
        Ok(())
    }
}

impl FromStr for ComponentInstance {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: String| SpaceError::InvalidInstance(format!("`{s}`: {reason}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let opened = compact.matches('(').count();
        let names = compact
            .strip_suffix(&")".repeat(opened))
            .filter(|head| !head.contains(')'))
            .ok_or_else(|| bad("unbalanced parentheses".into()))?;
        let chain = names
            .split('(')
            .map(|name| Algorithm::from_name(name).ok_or_else(|| bad(format!("unknown algorithm `{name}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        ComponentInstance::from_chain(&chain)
    }
}

impl Serialize for ComponentInstance {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ComponentInstance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
