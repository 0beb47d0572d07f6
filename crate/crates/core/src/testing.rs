//! Random instance generators and brute-force oracles for test suites.
//!
//! The oracles here deliberately avoid the evaluation and planning code
//! paths: model evaluation is checked against exhaustive fixpoint search and
//! plan length against plain breadth-first search.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::assembly::{AssemblyState, Connector, ConnectorKind, ObjectSpec, Part, Primitive};
use crate::causal::{CausalModel, CausalRule};
use crate::label::Label;

fn label(s: &str) -> Label {
    Label::new(s).expect("generated labels are non-empty")
}

/// A random model that passes validation: at most `max_nodes` nodes and
/// `max_rules` rules, rules in shuffled order.
pub fn random_valid_model<R: Rng>(rng: &mut R, max_nodes: usize, max_rules: usize) -> CausalModel {
    assert!(max_nodes >= 2 && max_rules >= max_nodes - 1);
    let n = rng.gen_range(2..=max_nodes);
    let roots = rng.gen_range(1..n);
    let names: Vec<Label> = (0..n)
        .map(|i| {
            if i == n - 1 {
                label("goal")
            } else if i < roots {
                label(&format!("f{i}"))
            } else {
                label(&format!("m{i}"))
            }
        })
        .collect();

    let mut rules = Vec::new();
    let rule_for = |rng: &mut R, effect: usize| {
        let k = rng.gen_range(1..=effect.min(3));
        let ants: Vec<Label> = rand::seq::index::sample(rng, effect, k)
            .into_iter()
            .map(|i| names[i].clone())
            .collect();
        CausalRule::new(ants, names[effect].clone()).expect("antecedents precede the effect")
    };
    for effect in roots..n {
        rules.push(rule_for(rng, effect));
    }
    let extra = rng.gen_range(0..=max_rules - rules.len());
    for _ in 0..extra {
        let effect = rng.gen_range(roots..n);
        rules.push(rule_for(rng, effect));
    }
    rules.shuffle(rng);
    let declared: Vec<Label> = names[roots..n - 1]
        .iter()
        .filter(|_| rng.gen_bool(0.3))
        .cloned()
        .collect();
    CausalModel::new(names[n - 1].clone(), rules).with_intermediates(declared)
}

/// Exhaustive fixpoint search. Roots are pinned by `active`; every
/// assignment of the remaining nodes is tried and kept if each node equals
/// the OR over its rules of the AND of their antecedents. Returns all
/// fixpoints found.
pub fn brute_force_fixpoints(
    model: &CausalModel,
    active: &BTreeSet<Label>,
) -> Vec<BTreeMap<Label, bool>> {
    let mut produced: BTreeMap<&Label, Vec<&BTreeSet<Label>>> = BTreeMap::new();
    for rule in model.rules() {
        produced.entry(rule.effect()).or_default().push(rule.antecedents());
    }
    let mut all: BTreeSet<&Label> = BTreeSet::new();
    all.insert(model.goal());
    all.extend(model.declared_intermediates());
    for rule in model.rules() {
        all.extend(rule.antecedents());
        all.insert(rule.effect());
    }
    let free: Vec<&Label> = all.iter().copied().filter(|l| produced.contains_key(l)).collect();
    assert!(free.len() <= 20, "oracle is exponential in the number of non-root nodes");

    let mut fixpoints = Vec::new();
    for mask in 0u32..(1 << free.len()) {
        let mut values: BTreeMap<Label, bool> = all
            .iter()
            .map(|l| ((*l).clone(), active.contains(*l) && !produced.contains_key(l)))
            .collect();
        for (bit, l) in free.iter().enumerate() {
            values.insert((*l).clone(), mask & (1 << bit) != 0);
        }
        let consistent = free.iter().all(|l| {
            let derived = produced[l]
                .iter()
                .any(|ants| ants.iter().all(|a| values[a]));
            derived == values[*l]
        });
        if consistent {
            fixpoints.push(values);
        }
    }
    fixpoints
}

/// Random object whose compatibilities are all 0 or 1 (every connector has
/// size 1), with 2..=`max_parts` parts.
pub fn random_binary_object<R: Rng>(rng: &mut R, max_parts: usize) -> ObjectSpec {
    let kinds = [
        ConnectorKind::Socket,
        ConnectorKind::Plug,
        ConnectorKind::Thread,
        ConnectorKind::Surface,
    ];
    let n = rng.gen_range(2..=max_parts);
    let parts = (0..n)
        .map(|p| {
            let connectors = (0..rng.gen_range(1..=3))
                .map(|c| {
                    let mut prims: BTreeSet<Primitive> = Primitive::ALL
                        .iter()
                        .copied()
                        .filter(|_| rng.gen_bool(0.5))
                        .collect();
                    if prims.is_empty() {
                        prims.insert(*Primitive::ALL.choose(rng).expect("non-empty"));
                    }
                    Connector {
                        id: format!("c{c}"),
                        kind: *kinds.choose(rng).expect("non-empty"),
                        size: 1.0,
                        accepted_primitives: prims,
                    }
                })
                .collect();
            Part {
                id: format!("p{p}"),
                display_name: format!("part {p}"),
                connectors,
            }
        })
        .collect();
    ObjectSpec::new("random", "random object", parts, vec![]).expect("generated object is valid")
}

/// Random binding entries drawing from `vocabulary` plus an occasional
/// label outside it.
pub fn random_entries<R: Rng>(
    rng: &mut R,
    object: &ObjectSpec,
    vocabulary: &[Label],
) -> BTreeMap<String, Vec<String>> {
    object
        .parts()
        .iter()
        .map(|p| {
            let mut labels: Vec<String> = vocabulary
                .iter()
                .filter(|_| rng.gen_bool(0.4))
                .map(|l| l.to_string())
                .collect();
            if rng.gen_bool(0.1) {
                labels.push("unrelated function".into());
            }
            (p.id.clone(), labels)
        })
        .collect()
}

/// Fewest successful joins from the empty state to a state satisfying
/// `is_goal`, or `None` if no such state is reachable.
pub fn bfs_goal_distance(
    object: &ObjectSpec,
    is_goal: impl Fn(&AssemblyState) -> bool,
) -> Option<usize> {
    let start = AssemblyState::empty();
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0)]);
    while let Some((state, depth)) = queue.pop_front() {
        if is_goal(&state) {
            return Some(depth);
        }
        for action in object.applicable_actions(&state) {
            let next = state.apply(&action).expect("applicable actions apply");
            if seen.insert(next.clone()) {
                queue.push_back((next, depth + 1));
            }
        }
    }
    None
}

/// Goal test for [`bfs_goal_distance`] that evaluates the model through the
/// brute-force oracle instead of the compiled evaluator.
pub fn oracle_goal_test<'a>(
    object: &'a ObjectSpec,
    model: &'a CausalModel,
    entries: &'a BTreeMap<String, Vec<String>>,
) -> impl Fn(&AssemblyState) -> bool + 'a {
    move |state| {
        let active: BTreeSet<Label> = object
            .assembled_component(state)
            .into_iter()
            .flat_map(|p| entries.get(&object.parts()[p].id).into_iter().flatten())
            .filter_map(|s| Label::new(s).ok())
            .collect();
        let fixpoints = brute_force_fixpoints(model, &active);
        assert_eq!(fixpoints.len(), 1, "acyclic models have one fixpoint");
        fixpoints[0][model.goal()]
    }
}
