//! Assembly planning as a Markov decision process.
//!
//! States are the assembly states reachable from the empty state, actions
//! are connector joins, and an action succeeds with the compatibility of its
//! connector pair. A failed attempt leaves the state unchanged. The reward
//! of a state comes from the causal model: reaching a state whose assembled
//! structure switches the goal on pays the goal reward, running out of
//! actions without it pays the dead-end penalty, and every other state costs
//! a small step penalty. Goal and dead-end states are absorbing.
//!
//! Rewards are paid on entry, so inside the Bellman backup an absorbing
//! successor contributes `R(s')` and no continuation value:
//!
//! ```text
//! V(s) = max_a  Σ_{s'} T(s, a, s') · (R(s') + γ · C(s'))
//! C(s') = 0 if s' is absorbing, V(s') otherwise
//! ```
//!
//! The value reported for an absorbing state is its reward.

use std::collections::{HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{AssemblyAction, AssemblyState, ConnectorRef, ObjectSpec, Primitive};
use crate::binding::FunctionBinding;
use crate::causal::{CausalModel, CompiledModel, ValidationReport};

/// Q-values closer than this are treated as tied; the earlier action wins.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rewards {
    pub goal: f64,
    pub dead_end: f64,
    pub step: f64,
}

impl Default for Rewards {
    fn default() -> Self {
        Rewards {
            goal: 1.0,
            dead_end: -1.0,
            step: -0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub discount: f64,
    pub epsilon: f64,
    pub max_states: usize,
    pub max_iterations: usize,
    pub rewards: Rewards,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            discount: 0.95,
            epsilon: 1e-6,
            max_states: 100_000,
            max_iterations: 10_000,
            rewards: Rewards::default(),
        }
    }
}

impl PlannerConfig {
    pub fn check(&self) -> Result<(), PlannerError> {
        let bad = |msg: &str| Err(PlannerError::InvalidConfig(msg.to_string()));
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return bad("discount must lie in (0, 1)");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad("epsilon must be positive");
        }
        if self.max_states == 0 || self.max_iterations == 0 {
            return bad("max_states and max_iterations must be positive");
        }
        if !(self.rewards.goal > 0.0 && self.rewards.dead_end < 0.0) {
            return bad("goal reward must be positive and dead-end reward negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlannerError {
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(String),
    #[error("causal model is invalid:\n{0}")]
    InvalidModel(ValidationReport),
    #[error("binding is for object `{found}`, planning object `{expected}`")]
    BindingMismatch { expected: String, found: String },
    #[error("state space exceeds the cap of {0} states")]
    StateSpaceExceeded(usize),
    #[error("value iteration did not converge after {iterations} sweeps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Open,
    Goal,
    DeadEnd,
}

impl StateKind {
    pub fn is_absorbing(self) -> bool {
        self != StateKind::Open
    }
}

/// Object, frozen causal model and binding, plus solver settings.
#[derive(Debug, Clone)]
pub struct PlanningProblem<'a> {
    object: &'a ObjectSpec,
    model: CompiledModel,
    model_hash: String,
    /// Root node indices activated by each part, by part index.
    part_functions: Vec<Vec<usize>>,
    config: PlannerConfig,
}

impl<'a> PlanningProblem<'a> {
    pub fn new(
        object: &'a ObjectSpec,
        model: &CausalModel,
        binding: &FunctionBinding,
        config: PlannerConfig,
    ) -> Result<Self, PlannerError> {
        config.check()?;
        if binding.object_id() != object.id() {
            return Err(PlannerError::BindingMismatch {
                expected: object.id().to_string(),
                found: binding.object_id().to_string(),
            });
        }
        let compiled = model.compile().map_err(PlannerError::InvalidModel)?;
        let part_functions = object
            .parts()
            .iter()
            .map(|p| {
                binding
                    .labels_for(&p.id)
                    .filter_map(|l| compiled.function_index(l))
                    .collect()
            })
            .collect();
        Ok(PlanningProblem {
            object,
            model: compiled,
            model_hash: model.content_hash(),
            part_functions,
            config,
        })
    }

    pub fn object(&self) -> &ObjectSpec {
        self.object
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.config
    }

    pub fn model_hash(&self) -> &str {
        &self.model_hash
    }

    /// True iff the functions bound to the assembled structure switch the
    /// goal on.
    pub fn is_goal_state(&self, state: &AssemblyState) -> bool {
        let mut active = vec![false; self.model.len()];
        for part in self.object.assembled_component(state) {
            for &f in &self.part_functions[part] {
                active[f] = true;
            }
        }
        self.model.goal_reached(&active)
    }

    pub fn state_kind(&self, state: &AssemblyState) -> StateKind {
        if self.is_goal_state(state) {
            StateKind::Goal
        } else if self.object.applicable_actions(state).is_empty() {
            StateKind::DeadEnd
        } else {
            StateKind::Open
        }
    }

    pub fn reward(&self, state: &AssemblyState) -> f64 {
        self.config.rewards.of(self.state_kind(state))
    }

    /// Successor distribution of attempting `action` in `state`. Outcomes
    /// with zero probability are omitted.
    pub fn transition(
        &self,
        state: &AssemblyState,
        action: &AssemblyAction,
    ) -> Result<Vec<(AssemblyState, f64)>, crate::assembly::AssemblyError> {
        let p = self.object.compatibility(action.from, action.to);
        let success = state.apply(action)?;
        let mut outcomes = Vec::with_capacity(2);
        if p > 0.0 {
            outcomes.push((success, p));
        }
        if p < 1.0 {
            outcomes.push((state.clone(), 1.0 - p));
        }
        Ok(outcomes)
    }

    pub fn enumerate_states(&self) -> Result<StateSpace, PlannerError> {
        StateSpace::enumerate(self.object, |s| self.is_goal_state(s), self.config.max_states)
    }

    /// Enumerates, solves and extracts the plan in one go.
    pub fn solve(&self) -> Result<PlanReport, PlannerError> {
        let space = self.enumerate_states()?;
        let solution = value_iteration(self, &space)?;
        let plan = extract_plan(self, &space, &solution);
        Ok(PlanReport::new(self, &plan, &space, &solution))
    }
}

impl Rewards {
    pub fn of(&self, kind: StateKind) -> f64 {
        match kind {
            StateKind::Goal => self.goal,
            StateKind::DeadEnd => self.dead_end,
            StateKind::Open => self.step,
        }
    }
}

/// Outgoing option of an open state: the action and where success leads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub action: AssemblyAction,
    pub success: usize,
    pub probability: f64,
}

/// Every state reachable from the empty one. State 0 is the empty state.
#[derive(Debug, Clone)]
pub struct StateSpace {
    states: Vec<AssemblyState>,
    index: HashMap<AssemblyState, usize>,
    kinds: Vec<StateKind>,
    edges: Vec<Vec<Edge>>,
}

impl StateSpace {
    /// Breadth-first closure under successful actions. Absorbing states are
    /// not expanded.
    pub fn enumerate(
        object: &ObjectSpec,
        is_goal: impl Fn(&AssemblyState) -> bool,
        max_states: usize,
    ) -> Result<Self, PlannerError> {
        let mut space = StateSpace {
            states: Vec::new(),
            index: HashMap::new(),
            kinds: Vec::new(),
            edges: Vec::new(),
        };
        let mut queue = VecDeque::new();
        space.intern(AssemblyState::empty(), max_states, &mut queue)?;
        while let Some(id) = queue.pop_front() {
            let state = space.states[id].clone();
            let actions = object.applicable_actions(&state);
            let kind = if is_goal(&state) {
                StateKind::Goal
            } else if actions.is_empty() {
                StateKind::DeadEnd
            } else {
                StateKind::Open
            };
            space.kinds[id] = kind;
            if kind.is_absorbing() {
                continue;
            }
            let mut edges = Vec::with_capacity(actions.len());
            for action in actions {
                let next = state
                    .apply(&action)
                    .expect("applicable actions apply cleanly");
                let success = space.intern(next, max_states, &mut queue)?;
                edges.push(Edge {
                    action,
                    success,
                    probability: object.compatibility(action.from, action.to),
                });
            }
            space.edges[id] = edges;
        }
        Ok(space)
    }

    fn intern(
        &mut self,
        state: AssemblyState,
        max_states: usize,
        queue: &mut VecDeque<usize>,
    ) -> Result<usize, PlannerError> {
        if let Some(&id) = self.index.get(&state) {
            return Ok(id);
        }
        if self.states.len() >= max_states {
            return Err(PlannerError::StateSpaceExceeded(max_states));
        }
        let id = self.states.len();
        self.index.insert(state.clone(), id);
        self.states.push(state);
        self.kinds.push(StateKind::Open);
        self.edges.push(Vec::new());
        queue.push_back(id);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, id: usize) -> &AssemblyState {
        &self.states[id]
    }

    pub fn id_of(&self, state: &AssemblyState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn kind(&self, id: usize) -> StateKind {
        self.kinds[id]
    }

    pub fn edges(&self, id: usize) -> &[Edge] {
        &self.edges[id]
    }

    pub fn action_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn goal_count(&self) -> usize {
        self.kinds.iter().filter(|k| **k == StateKind::Goal).count()
    }

    pub fn dead_end_count(&self) -> usize {
        self.kinds.iter().filter(|k| **k == StateKind::DeadEnd).count()
    }

    /// `(probability, next state)` outcomes of taking `edge` in state `id`.
    pub fn outcomes(&self, id: usize, edge: &Edge) -> [(f64, usize); 2] {
        [(edge.probability, edge.success), (1.0 - edge.probability, id)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub values: Vec<f64>,
    pub policy: Vec<Option<AssemblyAction>>,
    pub iterations: usize,
    pub residual: f64,
}

fn q_value(space: &StateSpace, rewards: &Rewards, gamma: f64, values: &[f64], id: usize, edge: &Edge) -> f64 {
    space
        .outcomes(id, edge)
        .iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|&(p, next)| {
            let kind = space.kinds[next];
            let continuation = if kind.is_absorbing() { 0.0 } else { values[next] };
            p * (rewards.of(kind) + gamma * continuation)
        })
        .sum()
}

/// Greedy choice: the first action (in enumeration order) within
/// [`TIE_TOLERANCE`] of the best Q-value.
fn greedy(
    space: &StateSpace,
    rewards: &Rewards,
    gamma: f64,
    values: &[f64],
    id: usize,
) -> Option<(f64, AssemblyAction)> {
    let mut best: Option<(f64, AssemblyAction)> = None;
    for edge in space.edges(id) {
        let q = q_value(space, rewards, gamma, values, id, edge);
        if best.is_none_or(|(b, _)| q > b + TIE_TOLERANCE) {
            best = Some((q, edge.action));
        }
    }
    best
}

/// Synchronous value iteration until the max-norm change between sweeps
/// drops below `epsilon`.
pub fn value_iteration(problem: &PlanningProblem, space: &StateSpace) -> Result<Solution, PlannerError> {
    let PlannerConfig {
        discount: gamma,
        epsilon,
        max_iterations,
        rewards,
        ..
    } = problem.config;

    let mut values: Vec<f64> = (0..space.len())
        .map(|id| match space.kind(id) {
            StateKind::Open => 0.0,
            kind => rewards.of(kind),
        })
        .collect();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iterations {
        let next: Vec<f64> = (0..space.len())
            .into_par_iter()
            .map(|id| match space.kind(id) {
                StateKind::Open => greedy(space, &rewards, gamma, &values, id)
                    .map(|(q, _)| q)
                    .expect("open states have actions"),
                _ => values[id],
            })
            .collect();
        residual = values
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        values = next;
        iterations += 1;
        if residual < epsilon {
            let policy = (0..space.len())
                .map(|id| greedy(space, &rewards, gamma, &values, id).map(|(_, a)| a))
                .collect();
            return Ok(Solution {
                values,
                policy,
                iterations,
                residual,
            });
        }
    }
    Err(PlannerError::NonConvergence {
        iterations,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub action: AssemblyAction,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub expected_value: f64,
    pub achieves_goal: bool,
    /// State reached by the nominal rollout.
    pub final_state: AssemblyState,
}

impl Plan {
    pub fn lines(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.text.as_str()).collect()
    }
}

/// Follows the policy from the empty state assuming every attempt succeeds,
/// stopping at a goal, a dead end, or a revisited state.
pub fn extract_plan(problem: &PlanningProblem, space: &StateSpace, solution: &Solution) -> Plan {
    let mut steps = Vec::new();
    let mut visited = HashSet::new();
    let mut current = 0;
    while visited.insert(current) && space.kind(current) == StateKind::Open {
        let Some(action) = solution.policy[current] else {
            break;
        };
        let edge = space
            .edges(current)
            .iter()
            .find(|e| e.action == action)
            .expect("policy picks an enumerated action");
        steps.push(PlanStep {
            action,
            text: problem.object.render_action(&action),
        });
        current = edge.success;
    }
    Plan {
        steps,
        expected_value: solution.values[0],
        achieves_goal: space.kind(current) == StateKind::Goal,
        final_state: space.state(current).clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDoc {
    pub primitive: Primitive,
    pub from: ConnectorRef,
    pub to: ConnectorRef,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub states: usize,
    pub iterations: usize,
    pub residual: f64,
}

/// The plan export document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub v: u32,
    pub object_id: String,
    pub model_hash: String,
    pub steps: Vec<StepDoc>,
    pub expected_value: f64,
    pub achieves_goal: bool,
    pub stats: PlanStats,
}

impl PlanReport {
    pub fn new(problem: &PlanningProblem, plan: &Plan, space: &StateSpace, solution: &Solution) -> Self {
        let object = problem.object;
        PlanReport {
            v: crate::SCHEMA_VERSION,
            object_id: object.id().to_string(),
            model_hash: problem.model_hash.clone(),
            steps: plan
                .steps
                .iter()
                .map(|s| StepDoc {
                    primitive: s.action.primitive,
                    from: object.connector_ref(s.action.from),
                    to: object.connector_ref(s.action.to),
                    text: s.text.clone(),
                })
                .collect(),
            expected_value: plan.expected_value,
            achieves_goal: plan.achieves_goal,
            stats: PlanStats {
                states: space.len(),
                iterations: solution.iterations,
                residual: solution.residual,
            },
        }
    }

    pub fn lines(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.text.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::tests::{conn, desk_lamp, part};
    use crate::assembly::{CompatOverride, ConnectorKind::*, Primitive::*};
    use crate::binding::{bind_doc, BindingDoc};
    use crate::causal::parse_model;
    use approx::assert_abs_diff_eq;

    const AND_MODEL: &str =
        "goal: light\n\"provide electricity\" AND \"turn electricity into light\" CAUSES light\n";

    fn lamp_binding(object: &ObjectSpec, model: &CausalModel) -> FunctionBinding {
        let doc = BindingDoc::new(object.id())
            .with("light_bulb", &["turn electricity into light"])
            .with("base", &["provide electricity"])
            .with("shade", &["diffuse light"]);
        bind_doc(object, model, &doc).unwrap()
    }

    /// Two parts, one connector each; `p` overrides the join probability.
    fn pair(p: Option<f64>) -> ObjectSpec {
        let overrides = p
            .map(|p| {
                vec![CompatOverride {
                    a: "a.x".parse().unwrap(),
                    b: "b.y".parse().unwrap(),
                    p,
                }]
            })
            .unwrap_or_default();
        ObjectSpec::new(
            "pair",
            "pair",
            vec![
                part("a", "a", vec![conn("x", Plug, 1.0, &[Connect])]),
                part("b", "b", vec![conn("y", Socket, 1.0, &[Connect])]),
            ],
            overrides,
        )
        .unwrap()
    }

    fn pair_problem(object: &ObjectSpec) -> (CausalModel, FunctionBinding) {
        let model = parse_model("goal: g\nf AND h CAUSES g").unwrap();
        let doc = BindingDoc::new("pair").with("a", &["f"]).with("b", &["h"]);
        let binding = bind_doc(object, &model, &doc).unwrap();
        (model, binding)
    }

    #[test]
    fn goal_states_under_the_and_model() {
        let lamp = desk_lamp();
        let model = parse_model(AND_MODEL).unwrap();
        let binding = lamp_binding(&lamp, &model);
        let problem = PlanningProblem::new(&lamp, &model, &binding, PlannerConfig::default()).unwrap();
        let empty = AssemblyState::empty();
        assert!(!problem.is_goal_state(&empty));
        assert_eq!(problem.reward(&empty), -0.01);

        let bulb = lamp
            .action(Connect, &"light_bulb.thread".parse().unwrap(), &"base.socket".parse().unwrap())
            .unwrap();
        let lit = empty.apply(&bulb).unwrap();
        assert!(problem.is_goal_state(&lit));
        assert_eq!(problem.reward(&lit), 1.0);
    }

    #[test]
    fn fully_joined_non_goal_is_a_dead_end() {
        let lamp = desk_lamp();
        let model = parse_model("goal: light\nmagic CAUSES light").unwrap();
        let binding = lamp_binding(&lamp, &model);
        let problem = PlanningProblem::new(&lamp, &model, &binding, PlannerConfig::default()).unwrap();
        let mut state = AssemblyState::empty();
        while let Some(a) = lamp.applicable_actions(&state).first().copied() {
            state = state.apply(&a).unwrap();
        }
        assert_eq!(problem.reward(&state), -1.0);
    }

    #[test]
    fn transition_distributions() {
        let certain = pair(None);
        let (model, binding) = pair_problem(&certain);
        let problem = PlanningProblem::new(&certain, &model, &binding, PlannerConfig::default()).unwrap();
        let action = certain.applicable_actions(&AssemblyState::empty())[0];
        let dist = problem.transition(&AssemblyState::empty(), &action).unwrap();
        assert_eq!(dist.len(), 1);
        assert_eq!(dist[0].1, 1.0);

        let half = pair(Some(0.5));
        let problem = PlanningProblem::new(&half, &model, &binding, PlannerConfig::default()).unwrap();
        let dist = problem.transition(&AssemblyState::empty(), &action).unwrap();
        assert_eq!(dist.iter().map(|d| d.1).collect::<Vec<_>>(), [0.5, 0.5]);
        assert_eq!(dist[1].0, AssemblyState::empty());
    }

    #[test]
    fn enumeration_sizes_and_cap() {
        let object = pair(None);
        let (model, binding) = pair_problem(&object);
        let problem = PlanningProblem::new(&object, &model, &binding, PlannerConfig::default()).unwrap();
        assert_eq!(problem.enumerate_states().unwrap().len(), 2);

        let capped = PlannerConfig {
            max_states: 1,
            ..PlannerConfig::default()
        };
        let problem = PlanningProblem::new(&object, &model, &binding, capped).unwrap();
        assert_eq!(
            problem.enumerate_states().unwrap_err(),
            PlannerError::StateSpaceExceeded(1)
        );

        let lamp = desk_lamp();
        let space = StateSpace::enumerate(&lamp, |_| false, 100).unwrap();
        assert_eq!(space.len(), 4);
        assert_eq!(space.kind(0), StateKind::Open);
        assert_eq!(space.dead_end_count(), 1);
    }

    #[test]
    fn deterministic_two_state_value() {
        let object = pair(None);
        let (model, binding) = pair_problem(&object);
        let problem = PlanningProblem::new(&object, &model, &binding, PlannerConfig::default()).unwrap();
        let space = problem.enumerate_states().unwrap();
        let solution = value_iteration(&problem, &space).unwrap();
        // Entering the absorbing goal pays R = 1 with no continuation.
        assert_eq!(solution.values[0], 1.0);
        assert_eq!(solution.values[1], 1.0);
        assert!(solution.policy[1].is_none());
    }

    #[test]
    fn half_probability_fixed_point() {
        let object = pair(Some(0.5));
        let (model, binding) = pair_problem(&object);
        let problem = PlanningProblem::new(&object, &model, &binding, PlannerConfig::default()).unwrap();
        let space = problem.enumerate_states().unwrap();
        let solution = value_iteration(&problem, &space).unwrap();
        // V = 0.5 (1 + 0) + 0.5 (-0.01 + 0.95 V)  =>  V = 0.495 / 0.525
        assert_abs_diff_eq!(solution.values[0], 0.495 / 0.525, epsilon = 1e-6);
        assert_abs_diff_eq!(solution.values[0], 0.942_857_142_857, epsilon = 1e-6);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let object = pair(Some(0.5));
        let (model, binding) = pair_problem(&object);
        let config = PlannerConfig {
            max_iterations: 3,
            ..PlannerConfig::default()
        };
        let problem = PlanningProblem::new(&object, &model, &binding, config).unwrap();
        let space = problem.enumerate_states().unwrap();
        assert!(matches!(
            value_iteration(&problem, &space),
            Err(PlannerError::NonConvergence { iterations: 3, .. })
        ));
    }

    #[test]
    fn desk_lamp_plan_is_one_step() {
        let lamp = desk_lamp();
        let model = parse_model(AND_MODEL).unwrap();
        let binding = lamp_binding(&lamp, &model);
        let problem = PlanningProblem::new(&lamp, &model, &binding, PlannerConfig::default()).unwrap();
        let report = problem.solve().unwrap();
        assert!(report.achieves_goal);
        assert_eq!(
            report.lines(),
            ["connect light bulb (thread) to base with cables (socket)"]
        );
        assert_eq!(report.expected_value, 1.0);
        assert_eq!(report.stats.states, 4);
        assert_eq!(report.steps[0].from.to_string(), "light_bulb.thread");
    }

    #[test]
    fn incompatible_object_gives_empty_failed_plan() {
        let object = ObjectSpec::new(
            "pair",
            "pair",
            vec![
                part("a", "a", vec![conn("x", Plug, 1.0, &[Connect])]),
                part("b", "b", vec![conn("y", Plug, 1.0, &[Connect])]),
            ],
            vec![],
        )
        .unwrap();
        let (model, binding) = pair_problem(&object);
        let problem = PlanningProblem::new(&object, &model, &binding, PlannerConfig::default()).unwrap();
        let report = problem.solve().unwrap();
        assert!(report.steps.is_empty());
        assert!(!report.achieves_goal);
        assert_eq!(report.expected_value, -1.0);
    }

    #[test]
    fn config_and_inputs_are_checked() {
        let object = pair(None);
        let (model, binding) = pair_problem(&object);
        for config in [
            PlannerConfig { discount: 1.0, ..Default::default() },
            PlannerConfig { epsilon: 0.0, ..Default::default() },
            PlannerConfig { rewards: Rewards { goal: -1.0, ..Default::default() }, ..Default::default() },
        ] {
            assert!(matches!(
                PlanningProblem::new(&object, &model, &binding, config),
                Err(PlannerError::InvalidConfig(_))
            ));
        }
        let bad = parse_model("goal: g\nintermediate: m\nm CAUSES g").unwrap();
        assert!(matches!(
            PlanningProblem::new(&object, &bad, &binding, PlannerConfig::default()),
            Err(PlannerError::InvalidModel(_))
        ));
        let lamp = desk_lamp();
        assert!(matches!(
            PlanningProblem::new(&lamp, &model, &binding, PlannerConfig::default()),
            Err(PlannerError::BindingMismatch { .. })
        ));
    }
}
