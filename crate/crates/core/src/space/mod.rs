//! The pipeline space as an HTN problem.
//!
//! Four complex tasks drive the decomposition. `createMLClassifier` is the
//! initial task; every method chooses one algorithm (a simple task) and may
//! leave one complex task for that algorithm's child:
//!
//! ```text
//! createMLClassifier     -> ML-base [createWekaClassifier] | MajorityLabelSet
//!                         | ML-meta [createMLBaseClassifier]
//! createMLBaseClassifier -> ML-base [createWekaClassifier] | MajorityLabelSet
//! createWekaClassifier   -> SL-base | SL-meta [setupBaseClassifier]
//! setupBaseClassifier    -> SL-base
//! ```
//!
//! Methods of a task are ordered base before meta, then by algorithm name.

mod instance;
mod text;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::rng::{self, Stream};

pub use instance::ComponentInstance;
pub use text::{parse_space, DEFAULT_SPACE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: unknown algorithm `{name}`")]
    UnknownAlgorithm { line: usize, name: String },
    #[error("line {line}: `{name}` belongs to layer {actual}, not {declared}")]
    WrongLayer {
        line: usize,
        name: String,
        declared: Layer,
        actual: Layer,
    },
    #[error("line {line}: `{name}` cannot take child `{child}`")]
    IncompatibleChild { line: usize, name: String, child: String },
    #[error("line {line}: `{name}` declared twice")]
    DuplicateComponent { line: usize, name: String },
    #[error("task {0} is referenced but has no methods")]
    DeadTask(ComplexTask),
    #[error("the space is empty")]
    Empty,
    #[error("task {0} can decompose into itself; the space is unbounded")]
    UnboundedSpace(ComplexTask),
    #[error("simple task {0} has no methods")]
    SimpleTaskHasNoMethods(Algorithm),
    #[error("plan stops with open tasks {0:?}")]
    IncompletePlan(Vec<ComplexTask>),
    #[error("plan step {position}: no method for {algorithm} at {task:?}")]
    InvalidStep {
        position: usize,
        algorithm: Algorithm,
        task: Option<ComplexTask>,
    },
    #[error("invalid pipeline: {0}")]
    InvalidInstance(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Layer {
    MlBase,
    MlMeta,
    SlBase,
    SlMeta,
}

impl Layer {
    pub fn token(self) -> &'static str {
        match self {
            Layer::MlMeta => "ml-meta",
            Layer::MlBase => "ml-base",
            Layer::SlMeta => "sl-meta",
            Layer::SlBase => "sl-base",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

macro_rules! algorithms {
    ($($variant:ident => $name:literal, $layer:ident;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Algorithm {
            $($variant,)*
        }

        impl Algorithm {
            pub const ALL: &'static [Algorithm] = &[$(Algorithm::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Algorithm::$variant => $name,)*
                }
            }

            pub fn layer(self) -> Layer {
                match self {
                    $(Algorithm::$variant => Layer::$layer,)*
                }
            }

            pub fn from_name(name: &str) -> Option<Algorithm> {
                match name {
                    $($name => Some(Algorithm::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

algorithms! {
    BaggingMl => "BaggingML", MlMeta;
    EnsembleMl => "EnsembleML", MlMeta;
    RandomSubspaceMl => "RandomSubspaceML", MlMeta;
    Br => "BR", MlBase;
    Cc => "CC", MlBase;
    Lc => "LC", MlBase;
    MajorityLabelSet => "MajorityLabelSet", MlBase;
    Ps => "PS", MlBase;
    Rakel => "RAkEL", MlBase;
    AdaBoostM1 => "AdaBoostM1", SlMeta;
    Bagging => "Bagging", SlMeta;
    RandomSubspace => "RandomSubspace", SlMeta;
    DecisionStump => "DecisionStump", SlBase;
    DecisionTree => "DecisionTree", SlBase;
    Knn => "KNN", SlBase;
    Logistic => "Logistic", SlBase;
    NaiveBayes => "NaiveBayes", SlBase;
    ZeroR => "ZeroR", SlBase;
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComplexTask {
    CreateMlClassifier,
    CreateMlBaseClassifier,
    CreateWekaClassifier,
    SetupBaseClassifier,
}

impl ComplexTask {
    pub const ALL: [ComplexTask; 4] = [
        ComplexTask::CreateMlClassifier,
        ComplexTask::CreateMlBaseClassifier,
        ComplexTask::CreateWekaClassifier,
        ComplexTask::SetupBaseClassifier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComplexTask::CreateMlClassifier => "createMLClassifier",
            ComplexTask::CreateMlBaseClassifier => "createMLBaseClassifier",
            ComplexTask::CreateWekaClassifier => "createWekaClassifier",
            ComplexTask::SetupBaseClassifier => "setupBaseClassifier",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ComplexTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Complex(ComplexTask),
    Simple(Algorithm),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Method {
    pub task: ComplexTask,
    pub algorithm: Algorithm,
    /// `[Simple(algorithm)]`, followed by the child's task if there is one.
    pub subtasks: Vec<Task>,
}

impl Method {
    pub fn child_task(&self) -> Option<ComplexTask> {
        self.subtasks.iter().find_map(|t| match t {
            Task::Complex(c) => Some(*c),
            Task::Simple(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSpace {
    methods: [Vec<Method>; 4],
}

impl ComponentSpace {
    pub const INITIAL_TASK: ComplexTask = ComplexTask::CreateMlClassifier;

    /// Builds a space from `(task, algorithm, child task)` triples; methods
    /// are sorted into the canonical order.
    pub fn from_methods(entries: impl IntoIterator<Item = (ComplexTask, Algorithm, Option<ComplexTask>)>) -> Self {
        let mut methods: [Vec<Method>; 4] = Default::default();
        for (task, algorithm, child) in entries {
            let mut subtasks = vec![Task::Simple(algorithm)];
            subtasks.extend(child.map(Task::Complex));
            methods[task.index()].push(Method {
                task,
                algorithm,
                subtasks,
            });
        }
        for list in &mut methods {
            list.sort_by_key(|m| (m.algorithm.layer(), m.algorithm.name()));
        }
        ComponentSpace { methods }
    }

    pub fn decompositions(&self, task: ComplexTask) -> &[Method] {
        &self.methods[task.index()]
    }

    pub fn decompositions_of(&self, task: Task) -> Result<&[Method], SpaceError> {
        match task {
            Task::Complex(c) => Ok(self.decompositions(c)),
            Task::Simple(a) => Err(SpaceError::SimpleTaskHasNoMethods(a)),
        }
    }

    pub fn methods(&self) -> impl Iterator<Item = &Method> {
        self.methods.iter().flatten()
    }

    /// One line per method in canonical order; equal listings mean equal spaces.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for m in self.methods() {
            out.push_str(m.task.name());
            out.push_str(" -> ");
            out.push_str(m.algorithm.name());
            if let Some(c) = m.child_task() {
                out.push_str(" [");
                out.push_str(c.name());
                out.push(']');
            }
            out.push('\n');
        }
        out
    }

    pub fn fingerprint(&self) -> String {
        format!("{:016x}", rng::fnv1a(self.listing().as_bytes()))
    }

    /// Number of distinct goal pipelines, by dynamic programming over tasks.
    pub fn count_pipelines(&self) -> Result<u64, SpaceError> {
        #[derive(Clone, Copy)]
        enum Mark {
            Open,
            Done(u64),
        }
        fn visit(space: &ComponentSpace, task: ComplexTask, memo: &mut HashMap<ComplexTask, Mark>) -> Result<u64, SpaceError> {
            match memo.get(&task) {
                Some(Mark::Done(n)) => return Ok(*n),
                Some(Mark::Open) => return Err(SpaceError::UnboundedSpace(task)),
                None => {}
            }
            memo.insert(task, Mark::Open);
            let mut total = 0u64;
            for m in space.decompositions(task) {
                total += match m.child_task() {
                    Some(c) => visit(space, c, memo)?,
                    None => 1,
                };
            }
            memo.insert(task, Mark::Done(total));
            Ok(total)
        }
        visit(self, Self::INITIAL_TASK, &mut HashMap::new())
    }

    /// Every goal pipeline, in depth-first method order.
    pub fn enumerate_pipelines(&self) -> Result<Vec<ComponentInstance>, SpaceError> {
        self.count_pipelines()?;
        let mut out = Vec::new();
        let mut stack = vec![SearchNode::root()];
        while let Some(node) = stack.pop() {
            if node.is_goal() {
                out.push(node.pipeline()?);
            } else {
                stack.extend(node.successors(self).into_iter().rev());
            }
        }
        Ok(out)
    }

    pub fn interpret(&self, plan: &Plan) -> Result<ComponentInstance, SpaceError> {
        let mut node = SearchNode::root();
        for (position, &algorithm) in plan.steps.iter().enumerate() {
            let task = node.remaining.first().copied();
            let method = task
                .and_then(|t| self.decompositions(t).iter().find(|m| m.algorithm == algorithm))
                .ok_or(SpaceError::InvalidStep {
                    position,
                    algorithm,
                    task,
                })?;
            node = node.apply(method);
        }
        if !node.is_goal() {
            return Err(SpaceError::IncompletePlan(node.remaining));
        }
        node.pipeline()
    }

    /// The plan whose replay yields `pipeline`, if the space contains it.
    pub fn plan_for(&self, pipeline: &ComponentInstance) -> Result<Plan, SpaceError> {
        let plan = Plan {
            steps: pipeline.chain().collect(),
        };
        self.interpret(&plan)?;
        Ok(plan)
    }
}

impl Default for ComponentSpace {
    fn default() -> Self {
        default_space()
    }
}

pub fn default_space() -> ComponentSpace {
    parse_space(DEFAULT_SPACE).expect("built-in space is valid")
}

/// Algorithm choices from the initial task to a goal, outermost first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Plan {
    pub steps: Vec<Algorithm>,
}

/// A forward-decomposition state: the open complex tasks and the choices
/// made so far. Simple tasks are resolved as soon as they are introduced,
/// so a node is a goal exactly when no complex task remains.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SearchNode {
    pub remaining: Vec<ComplexTask>,
    pub decisions: Vec<Algorithm>,
}

impl SearchNode {
    pub fn root() -> Self {
        SearchNode {
            remaining: vec![ComponentSpace::INITIAL_TASK],
            decisions: Vec::new(),
        }
    }

    pub fn is_goal(&self) -> bool {
        self.remaining.is_empty()
    }

    /// The node's full task list: resolved choices, then open tasks.
    pub fn tasks(&self) -> Vec<Task> {
        self.decisions
            .iter()
            .map(|&a| Task::Simple(a))
            .chain(self.remaining.iter().map(|&t| Task::Complex(t)))
            .collect()
    }

    pub fn apply(&self, method: &Method) -> SearchNode {
        let mut remaining = Vec::with_capacity(self.remaining.len() + 1);
        let mut decisions = self.decisions.clone();
        for t in &method.subtasks {
            match t {
                Task::Simple(a) => decisions.push(*a),
                Task::Complex(c) => remaining.push(*c),
            }
        }
        remaining.extend_from_slice(&self.remaining[1..]);
        SearchNode { remaining, decisions }
    }

    /// One child per method of the first open task.
    pub fn successors(&self, space: &ComponentSpace) -> Vec<SearchNode> {
        match self.remaining.first() {
            None => Vec::new(),
            Some(&task) => space.decompositions(task).iter().map(|m| self.apply(m)).collect(),
        }
    }

    /// Applies uniformly random methods to the first open task until a goal.
    pub fn random_completion(&self, space: &ComponentSpace, rng: &mut Stream) -> Result<ComponentInstance, SpaceError> {
        let mut node = self.clone();
        while let Some(&task) = node.remaining.first() {
            let options = space.decompositions(task);
            if options.is_empty() {
                return Err(SpaceError::DeadTask(task));
            }
            node = node.apply(&options[rng::below(rng, options.len())]);
        }
        node.pipeline()
    }

    pub fn pipeline(&self) -> Result<ComponentInstance, SpaceError> {
        if !self.is_goal() {
            return Err(SpaceError::IncompletePlan(self.remaining.clone()));
        }
        ComponentInstance::from_chain(&self.decisions)
    }
}
