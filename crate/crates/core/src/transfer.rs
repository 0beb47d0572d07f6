//! Transfer testing: replan a frozen training model on a new object.
//!
//! A test object is bound to function labels, then the planner runs with
//! the training model unchanged. The transfer succeeds iff the resulting
//! plan reaches the goal. Whether it counts as near or far generalization
//! depends only on whether the test object shares a category with one of
//! the training objects.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{AssemblyState, ObjectSpec};
use crate::binding::{bind_doc, BindingDoc, BindingError, BindingWarning, FunctionBinding};
use crate::catalog::{Category, CategoryTable};
use crate::causal::{CausalModel, ValidationReport};
use crate::planner::{PlanReport, PlannerConfig, PlannerError, PlanningProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Near,
    Far,
}

/// Experimental condition: which relation the training objects have to each
/// other.
pub type Condition = Relation;

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Near => "near",
            Relation::Far => "far",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Success,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// The plan cannot switch the goal on with the bound functions.
    GoalUnreachableUnderModel,
    /// No pair of connectors can be joined, so nothing can be assembled.
    NoCompatibleConnections,
    StateSpaceExceeded,
    PlannerNonConvergence,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureReason::GoalUnreachableUnderModel => "goal_unreachable_under_model",
            FailureReason::NoCompatibleConnections => "no_compatible_connections",
            FailureReason::StateSpaceExceeded => "state_space_exceeded",
            FailureReason::PlannerNonConvergence => "planner_non_convergence",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransferError {
    #[error("causal model is invalid:\n{0}")]
    InvalidModel(ValidationReport),
    #[error(transparent)]
    Binding(#[from] BindingError),
    #[error("object `{0}` has no category")]
    UnknownCategory(String),
    #[error("{condition} condition requires {requirement}; got {training:?}")]
    ConditionMismatch {
        condition: Condition,
        requirement: &'static str,
        training: Vec<String>,
    },
    #[error("experiments use exactly two training objects, got {0}")]
    TrainingPair(usize),
    #[error(transparent)]
    Planner(PlannerError),
}

/// Result of replanning one test object. `plan` is present for successes
/// and for goal-unreachable failures (the best-effort prefix).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub v: u32,
    pub training_objects: Vec<String>,
    pub test_object: String,
    pub relation: Relation,
    pub outcome: OutcomeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<FailureReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanReport>,
    pub warnings: Vec<BindingWarning>,
}

impl TransferResult {
    pub fn is_success(&self) -> bool {
        self.outcome == OutcomeKind::Success
    }
}

/// Near iff the test object shares a category with any training object.
pub fn relation(
    categories: &CategoryTable,
    training: &[&str],
    test: &str,
) -> Result<Relation, TransferError> {
    let category = |id: &str| {
        categories
            .category_of(id)
            .ok_or_else(|| TransferError::UnknownCategory(id.to_string()))
    };
    let test_cat = category(test)?;
    let mut near = false;
    for t in training {
        near |= category(t)? == test_cat;
    }
    Ok(if near { Relation::Near } else { Relation::Far })
}

/// Plans `test_object` with the frozen `model` and the step-3 binding.
pub fn check_transfer(
    model: &CausalModel,
    training: &[&str],
    test_object: &ObjectSpec,
    binding: &FunctionBinding,
    config: &PlannerConfig,
    categories: &CategoryTable,
) -> Result<TransferResult, TransferError> {
    let relation = relation(categories, training, test_object.id())?;
    let problem = match PlanningProblem::new(test_object, model, binding, *config) {
        Ok(p) => p,
        Err(PlannerError::InvalidModel(report)) => return Err(TransferError::InvalidModel(report)),
        Err(PlannerError::BindingMismatch { expected, found }) => {
            return Err(BindingError::ObjectMismatch { expected, found }.into())
        }
        Err(e) => return Err(TransferError::Planner(e)),
    };

    let (outcome, reason, plan) =
        if test_object.applicable_actions(&AssemblyState::empty()).is_empty() {
            (
                OutcomeKind::Failure,
                Some(FailureReason::NoCompatibleConnections),
                None,
            )
        } else {
            match problem.solve() {
                Ok(report) if report.achieves_goal => (OutcomeKind::Success, None, Some(report)),
                Ok(report) => (
                    OutcomeKind::Failure,
                    Some(FailureReason::GoalUnreachableUnderModel),
                    Some(report),
                ),
                Err(PlannerError::StateSpaceExceeded(_)) => (
                    OutcomeKind::Failure,
                    Some(FailureReason::StateSpaceExceeded),
                    None,
                ),
                Err(PlannerError::NonConvergence { .. }) => (
                    OutcomeKind::Failure,
                    Some(FailureReason::PlannerNonConvergence),
                    None,
                ),
                Err(e) => return Err(TransferError::Planner(e)),
            }
        };

    Ok(TransferResult {
        v: crate::SCHEMA_VERSION,
        training_objects: training.iter().map(|s| s.to_string()).collect(),
        test_object: test_object.id().to_string(),
        relation,
        outcome,
        reason,
        plan,
        warnings: binding.warnings(),
    })
}

/// One row of an experiment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub test_object: String,
    pub relation: Relation,
    pub outcome: OutcomeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<FailureReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanReport>,
    pub warnings: Vec<BindingWarning>,
}

impl From<TransferResult> for ExperimentResult {
    fn from(r: TransferResult) -> Self {
        ExperimentResult {
            test_object: r.test_object,
            relation: r.relation,
            outcome: r.outcome,
            reason: r.reason,
            plan: r.plan,
            warnings: r.warnings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub v: u32,
    pub condition: Condition,
    pub training: Vec<String>,
    pub model_hash: String,
    pub results: Vec<ExperimentResult>,
}

/// Training objects share a category (near) or not (far).
pub fn check_condition(
    condition: Condition,
    training: &[&str],
    categories: &CategoryTable,
) -> Result<(), TransferError> {
    if training.len() != 2 {
        return Err(TransferError::TrainingPair(training.len()));
    }
    let cats: Vec<Category> = training
        .iter()
        .map(|id| {
            categories
                .category_of(id)
                .ok_or_else(|| TransferError::UnknownCategory(id.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let same = cats[0] == cats[1];
    let (ok, requirement) = match condition {
        Relation::Near => (same, "training objects from the same category"),
        Relation::Far => (!same, "training objects from different categories"),
    };
    if ok {
        Ok(())
    } else {
        Err(TransferError::ConditionMismatch {
            condition,
            requirement,
            training: training.iter().map(|s| s.to_string()).collect(),
        })
    }
}

/// Runs one experimental condition: a single model for the training pair,
/// transferred to each test object in order.
pub fn run_experiment(
    condition: Condition,
    training: &[&str],
    model: &CausalModel,
    tests: &[(&ObjectSpec, &BindingDoc)],
    config: &PlannerConfig,
    categories: &CategoryTable,
) -> Result<ExperimentReport, TransferError> {
    check_condition(condition, training, categories)?;
    let report = model.validate();
    if !report.is_ok() {
        return Err(TransferError::InvalidModel(report));
    }
    let results = tests
        .par_iter()
        .map(|(object, doc)| {
            let binding = bind_doc(object, model, doc)?;
            check_transfer(model, training, object, &binding, config, categories)
                .map(ExperimentResult::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport {
        v: crate::SCHEMA_VERSION,
        condition,
        training: training.iter().map(|s| s.to_string()).collect(),
        model_hash: model.content_hash(),
        results,
    })
}
