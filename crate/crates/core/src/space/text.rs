//! Line-oriented space declarations: `layer:name[:child]`.
//!
//! `layer` is one of `ml-meta`, `ml-base`, `sl-meta`, `sl-base`. `child`
//! names the layer the algorithm wraps: `ml` (any multi-label classifier),
//! `ml-base`, `sl` (any single-label classifier), `sl-base`, or `none`.
//! When omitted it defaults to `ml-base` for ML-meta, `sl` for ML-base
//! (`none` for MajorityLabelSet), `sl-base` for SL-meta and `none` for SL-base.
//! `#` starts a comment.

use std::collections::HashSet;

use super::{Algorithm, ComplexTask, ComponentSpace, Layer, SpaceError};

pub const DEFAULT_SPACE: &str = "\
# multi-label meta learners
ml-meta:BaggingML
ml-meta:EnsembleML
ml-meta:RandomSubspaceML
# multi-label base learners
ml-base:BR
ml-base:CC
ml-base:LC
ml-base:PS
ml-base:RAkEL
ml-base:MajorityLabelSet
# single-label meta learners
sl-meta:AdaBoostM1
sl-meta:Bagging
sl-meta:RandomSubspace
# single-label base learners
sl-base:DecisionStump
sl-base:DecisionTree
sl-base:KNN
sl-base:Logistic
sl-base:NaiveBayes
sl-base:ZeroR
";

fn layer_of(token: &str) -> Option<Layer> {
    [Layer::MlMeta, Layer::MlBase, Layer::SlMeta, Layer::SlBase]
        .into_iter()
        .find(|l| l.token() == token)
}

/// The complex task a child token introduces, or `None` for `none`.
fn child_task(token: &str) -> Option<Option<ComplexTask>> {
    Some(match token {
        "ml" => Some(ComplexTask::CreateMlClassifier),
        "ml-base" => Some(ComplexTask::CreateMlBaseClassifier),
        "sl" => Some(ComplexTask::CreateWekaClassifier),
        "sl-base" => Some(ComplexTask::SetupBaseClassifier),
        "none" => None,
        _ => return None,
    })
}

fn default_child(algorithm: Algorithm) -> &'static str {
    match algorithm.layer() {
        Layer::MlMeta => "ml-base",
        Layer::MlBase if algorithm == Algorithm::MajorityLabelSet => "none",
        Layer::MlBase => "sl",
        Layer::SlMeta => "sl-base",
        Layer::SlBase => "none",
    }
}

fn child_allowed(algorithm: Algorithm, child: &str) -> bool {
    match algorithm.layer() {
        Layer::MlMeta => matches!(child, "ml" | "ml-base"),
        Layer::MlBase if algorithm == Algorithm::MajorityLabelSet => child == "none",
        Layer::MlBase => matches!(child, "sl" | "sl-base"),
        Layer::SlMeta => matches!(child, "sl" | "sl-base"),
        Layer::SlBase => child == "none",
    }
}

/// Tasks whose methods offer an algorithm of `layer`.
fn tasks_for(layer: Layer) -> &'static [ComplexTask] {
    match layer {
        Layer::MlMeta => &[ComplexTask::CreateMlClassifier],
        Layer::MlBase => &[ComplexTask::CreateMlClassifier, ComplexTask::CreateMlBaseClassifier],
        Layer::SlMeta => &[ComplexTask::CreateWekaClassifier],
        Layer::SlBase => &[ComplexTask::CreateWekaClassifier, ComplexTask::SetupBaseClassifier],
    }
}

pub fn parse_space(text: &str) -> Result<ComponentSpace, SpaceError> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split(':').map(str::trim).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(SpaceError::MalformedLine {
                line,
                reason: format!("expected `layer:name[:child]`, got `{content}`"),
            });
        }
        let declared = layer_of(fields[0]).ok_or_else(|| SpaceError::MalformedLine {
            line,
            reason: format!("unknown layer `{}`", fields[0]),
        })?;
        let algorithm = Algorithm::from_name(fields[1]).ok_or_else(|| SpaceError::UnknownAlgorithm {
            line,
            name: fields[1].to_string(),
        })?;
        if algorithm.layer() != declared {
            return Err(SpaceError::WrongLayer {
                line,
                name: algorithm.name().into(),
                declared,
                actual: algorithm.layer(),
            });
        }
        if !seen.insert(algorithm) {
            return Err(SpaceError::DuplicateComponent {
                line,
                name: algorithm.name().into(),
            });
        }
        let child = fields.get(2).copied().unwrap_or_else(|| default_child(algorithm));
        let task = child_task(child).ok_or_else(|| SpaceError::MalformedLine {
            line,
            reason: format!("unknown child `{child}`"),
        })?;
        if !child_allowed(algorithm, child) {
            return Err(SpaceError::IncompatibleChild {
                line,
                name: algorithm.name().into(),
                child: child.into(),
            });
        }
        for &t in tasks_for(declared) {
            entries.push((t, algorithm, task));
        }
    }
    let space = ComponentSpace::from_methods(entries);
    if space.decompositions(ComponentSpace::INITIAL_TASK).is_empty() {
        return Err(SpaceError::Empty);
    }
    for m in space.methods() {
        if let Some(c) = m.child_task() {
            if space.decompositions(c).is_empty() {
                return Err(SpaceError::DeadTask(c));
            }
        }
    }
    Ok(space)
}
