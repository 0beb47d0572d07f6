//! Assembly planning guided by human-authored causal models.
//!
//! People describe how an object works as rules over the *functions* of its
//! parts (`"provide electricity" AND "turn electricity into light" CAUSES
//! light`). The model becomes the reward of an assembly MDP: a state is
//! rewarded when the functions bound to its assembled parts make the goal
//! true. Because the model talks about functions rather than parts, it can
//! be reused on a different object by binding that object's parts to the
//! same functions, which is what [`transfer`] tests.
//!
//! ```
//! use std::collections::BTreeMap;
//! use causeplan::{bind, parse_model, ObjectSpec, PlannerConfig, PlanningProblem};
//!
//! let model = parse_model(
//!     "goal: light\n\"provide electricity\" AND \"turn electricity into light\" CAUSES light",
//! )?;
//! let lamp: ObjectSpec = serde_json::from_str(r#"{
//!   "id": "lamp", "display_name": "lamp",
//!   "parts": [
//!     {"id": "bulb", "display_name": "bulb",
//!      "connectors": [{"id": "thread", "kind": "thread", "size": 1.0, "accepted_primitives": ["screw"]}]},
//!     {"id": "base", "display_name": "base",
//!      "connectors": [{"id": "socket", "kind": "thread", "size": 1.0, "accepted_primitives": ["screw"]}]}
//!   ]
//! }"#)?;
//! let entries = BTreeMap::from([
//!     ("bulb".to_string(), vec!["turn electricity into light".to_string()]),
//!     ("base".to_string(), vec!["provide electricity".to_string()]),
//! ]);
//! let binding = bind(&lamp, &model, &entries)?;
//! let plan = PlanningProblem::new(&lamp, &model, &binding, PlannerConfig::default())?.solve()?;
//! assert!(plan.achieves_goal);
//! assert_eq!(plan.lines(), ["screw bulb (thread) to base (socket)"]);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod assembly;
pub mod binding;
pub mod catalog;
pub mod causal;
pub mod label;
pub mod planner;
pub mod transfer;

#[cfg(feature = "test-support")]
pub mod testing;

pub use assembly::{
    geometric_compatibility, AssemblyAction, AssemblyError, AssemblyState, CompatOverride,
    Connector, ConnectorKind, ConnectorRef, ObjectSpec, Part, Primitive, Slot,
};
pub use binding::{bind, bind_doc, BindingDoc, BindingError, BindingWarning, FunctionBinding, Provenance};
pub use catalog::{
    Catalog, CatalogError, Category, CategoryTable, ObjectCategory, ObjectSummary, PartSummary,
};
pub use causal::{
    parse_model, CausalModel, CausalRule, CompiledModel, GraphExport, NodeKind, NodeValuation,
    ParseError, ValidationDocument, ValidationReport, Violation,
};
pub use label::{FunctionLabel, Label};
pub use planner::{
    extract_plan, value_iteration, Plan, PlanReport, PlannerConfig, PlannerError, PlanningProblem,
    Rewards, StateKind, StateSpace,
};
pub use transfer::{
    check_transfer, run_experiment, Condition, ExperimentReport, FailureReason, OutcomeKind,
    Relation, TransferError, TransferResult,
};

/// Version stamped into every serialized document as `v`.
pub const SCHEMA_VERSION: u32 = 1;

pub(crate) fn schema_version() -> u32 {
    SCHEMA_VERSION
}

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/causal-models.md")]
    mod causal_models {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/assembly.md")]
    mod assembly {}
    #[doc = include_str!("../../../book/src/planning.md")]
    mod planning {}
    #[doc = include_str!("../../../book/src/transfer.md")]
    mod transfer {}
}
