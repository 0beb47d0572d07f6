use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use causeplan::transfer::check_condition;
use causeplan::{
    bind_doc, check_transfer, parse_model, run_experiment, BindingDoc, BindingError, Catalog,
    CatalogError, CausalModel, Condition, Label, ObjectSpec, ObjectSummary, OutcomeKind, ParseError,
    PlanReport, PlannerConfig, PlannerError, PlanningProblem, TransferError, TransferResult,
    ValidationDocument, SCHEMA_VERSION,
};

use crate::{Format, OutputArgs, SourceArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Syntax { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("function labels must not be empty")]
    EmptyLabel,
    #[error("no object `{0}` in the catalog")]
    UnknownObject(String),
    #[error(transparent)]
    Binding(#[from] BindingError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Planner(PlannerError::StateSpaceExceeded(_))
            | CliError::Transfer(TransferError::Planner(PlannerError::StateSpaceExceeded(_))) => 3,
            CliError::Planner(PlannerError::NonConvergence { .. })
            | CliError::Transfer(TransferError::Planner(PlannerError::NonConvergence { .. })) => 4,
            _ => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn read_model(path: &Path) -> Result<CausalModel, CliError> {
    parse_model(&read(path)?).map_err(|source| CliError::Syntax {
        path: path.to_path_buf(),
        source,
    })
}

/// A model that must validate before it can be used.
fn read_valid_model(path: &Path) -> Result<CausalModel, CliError> {
    let model = read_model(path)?;
    let report = model.validate();
    if report.is_ok() {
        Ok(model)
    } else {
        Err(PlannerError::InvalidModel(report).into())
    }
}

fn load_catalog(dir: &Path) -> Result<Catalog, CliError> {
    Ok(Catalog::load_dir(dir)?)
}

fn resolve_object(catalog: &Catalog, object: &str) -> Result<ObjectSpec, CliError> {
    if object.ends_with(".json") {
        return read_json(Path::new(object));
    }
    catalog
        .get(object)
        .cloned()
        .ok_or_else(|| CliError::UnknownObject(object.to_string()))
}

/// Loads the catalog only when the object is named by id.
fn load_object(source: &SourceArgs) -> Result<ObjectSpec, CliError> {
    if source.object.ends_with(".json") {
        read_json(Path::new(&source.object))
    } else {
        resolve_object(&load_catalog(&source.catalog)?, &source.object)
    }
}

fn emit<T: Serialize>(output: &OutputArgs, doc: &T, text: &str) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(doc).expect("documents serialize") + "\n";
    if let Some(path) = &output.out {
        fs::write(path, &json).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    let mut stdout = io::stdout().lock();
    let body = match output.format {
        Format::Text => text,
        Format::Document => &json,
    };
    // A closed pipe is not worth an error.
    let _ = stdout.write_all(body.as_bytes());
    Ok(())
}

fn plan_text(report: &PlanReport, display_name: &str) -> String {
    let mut out = format!("plan for {display_name} ({})\n", report.object_id);
    if report.steps.is_empty() {
        out.push_str("  (no steps)\n");
    }
    for (i, step) in report.steps.iter().enumerate() {
        out.push_str(&format!("  {}. {}\n", i + 1, step.text));
    }
    out.push_str(&format!(
        "achieves goal: {}\nexpected value: {:.6}\nstates: {}, sweeps: {}, residual: {:.3e}\n",
        if report.achieves_goal { "yes" } else { "no" },
        report.expected_value,
        report.stats.states,
        report.stats.iterations,
        report.stats.residual,
    ));
    out
}

pub fn validate(path: &Path, output: &OutputArgs) -> Result<u8, CliError> {
    let model = read_model(path)?;
    let doc = ValidationDocument::new(&model);
    let text = if doc.ok {
        let graph = &doc.graph;
        format!(
            "valid: goal `{}`, {} nodes, {} rule{}\n",
            graph.goal,
            graph.nodes.len(),
            model.rules().len(),
            if model.rules().len() == 1 { "" } else { "s" }
        )
    } else {
        let mut text = String::from("invalid\n");
        for message in &doc.messages {
            text.push_str(&format!("  {message}\n"));
        }
        text
    };
    emit(output, &doc, &text)?;
    Ok(if doc.ok { 0 } else { 1 })
}

pub fn plan(
    source: &SourceArgs,
    model: &Path,
    binding: &Path,
    config: &PlannerConfig,
    output: &OutputArgs,
) -> Result<u8, CliError> {
    let object = load_object(source)?;
    let model = read_valid_model(model)?;
    let doc: BindingDoc = read_json(binding)?;
    let binding = bind_doc(&object, &model, &doc)?;
    for warning in binding.warnings() {
        eprintln!("warning: {warning}");
    }
    let report = PlanningProblem::new(&object, &model, &binding, *config)?.solve()?;
    emit(output, &report, &plan_text(&report, object.display_name()))?;
    Ok(if report.achieves_goal { 0 } else { 1 })
}

fn transfer_text(result: &TransferResult) -> String {
    let mut out = format!(
        "transfer {} -> {} ({}): {}",
        result.training_objects.join(", "),
        result.test_object,
        result.relation,
        outcome_word(result.outcome),
    );
    if let Some(reason) = result.reason {
        out.push_str(&format!(" ({reason})"));
    }
    out.push('\n');
    for warning in &result.warnings {
        out.push_str(&format!("  warning: {warning}\n"));
    }
    if let Some(plan) = &result.plan {
        for (i, step) in plan.steps.iter().enumerate() {
            out.push_str(&format!("  {}. {}\n", i + 1, step.text));
        }
    }
    out
}

fn outcome_word(outcome: OutcomeKind) -> &'static str {
    match outcome {
        OutcomeKind::Success => "success",
        OutcomeKind::Failure => "failure",
    }
}

pub fn transfer(
    source: &SourceArgs,
    model: &Path,
    binding: &Path,
    training: &[String],
    config: &PlannerConfig,
    output: &OutputArgs,
) -> Result<u8, CliError> {
    let catalog = load_catalog(&source.catalog)?;
    let object = resolve_object(&catalog, &source.object)?;
    let model = read_valid_model(model)?;
    let doc: BindingDoc = read_json(binding)?;
    let binding = bind_doc(&object, &model, &doc)?;
    let training: Vec<&str> = training.iter().map(String::as_str).collect();
    let result = check_transfer(&model, &training, &object, &binding, config, catalog.categories())?;
    emit(output, &result, &transfer_text(&result))?;
    Ok(if result.is_success() { 0 } else { 1 })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    #[serde(default)]
    #[allow(dead_code)]
    v: Option<u32>,
    condition: Condition,
    training: Vec<String>,
    model: PathBuf,
    tests: Vec<ExperimentTest>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentTest {
    object: String,
    binding: PathBuf,
    #[serde(default)]
    expect: Option<OutcomeKind>,
}

#[derive(Serialize)]
struct ExperimentDoc<'a> {
    #[serde(flatten)]
    report: &'a causeplan::ExperimentReport,
    expectations_met: bool,
}

pub fn experiment(
    path: &Path,
    catalog: &Path,
    config: &PlannerConfig,
    output: &OutputArgs,
) -> Result<u8, CliError> {
    let spec: ExperimentConfig = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let catalog = load_catalog(catalog)?;
    let training: Vec<&str> = spec.training.iter().map(String::as_str).collect();
    // Condition mismatches are reported before any file beyond the config is read.
    check_condition(spec.condition, &training, catalog.categories())?;
    let model = read_valid_model(&base.join(&spec.model))?;

    let mut objects = Vec::new();
    let mut bindings = Vec::new();
    for test in &spec.tests {
        objects.push(resolve_object(&catalog, &test.object)?);
        bindings.push(read_json::<BindingDoc>(&base.join(&test.binding))?);
    }
    let tests: Vec<(&ObjectSpec, &BindingDoc)> = objects.iter().zip(&bindings).collect();
    let report = run_experiment(
        spec.condition,
        &training,
        &model,
        &tests,
        config,
        catalog.categories(),
    )?;

    let mut all_met = true;
    let mut text = format!(
        "{} condition, training: {}\n",
        report.condition,
        report.training.join(", ")
    );
    for (result, test) in report.results.iter().zip(&spec.tests) {
        let mut line = format!(
            "  {} ({}): {}",
            result.test_object,
            result.relation,
            outcome_word(result.outcome)
        );
        if let Some(reason) = result.reason {
            line.push_str(&format!(" ({reason})"));
        }
        if let Some(expect) = test.expect {
            let met = expect == result.outcome;
            all_met &= met;
            line.push_str(&format!(
                ", expected {}{}",
                outcome_word(expect),
                if met { "" } else { " [UNMET]" }
            ));
        }
        text.push_str(&line);
        text.push('\n');
    }
    text.push_str(if all_met {
        "all expectations hold\n"
    } else {
        "some expectations do not hold\n"
    });
    let doc = ExperimentDoc {
        report: &report,
        expectations_met: all_met,
    };
    emit(output, &doc, &text)?;
    Ok(if all_met { 0 } else { 1 })
}

#[derive(Serialize)]
struct EvaluationRow {
    active: Vec<String>,
    values: BTreeMap<String, bool>,
    goal: bool,
}

#[derive(Serialize)]
struct EvaluationDoc {
    v: u32,
    goal: String,
    rows: Vec<EvaluationRow>,
}

pub fn evaluate(
    path: &Path,
    active: &[String],
    all_subsets: bool,
    output: &OutputArgs,
) -> Result<u8, CliError> {
    let model = read_valid_model(path)?;
    let compiled = model.compile().map_err(PlannerError::InvalidModel)?;
    let subsets: Vec<Vec<Label>> = if all_subsets {
        let roots: Vec<Label> = model.function_labels().into_iter().collect();
        (0u64..1 << roots.len())
            .map(|mask| {
                roots
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, l)| l.clone())
                    .collect()
            })
            .collect()
    } else {
        vec![active
            .iter()
            .map(|a| Label::new(a))
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::EmptyLabel)?]
    };
    let rows: Vec<EvaluationRow> = subsets
        .iter()
        .map(|set| {
            let valuation = compiled.evaluate(set.iter());
            EvaluationRow {
                active: set.iter().map(ToString::to_string).collect(),
                values: valuation
                    .values()
                    .iter()
                    .map(|(l, v)| (l.to_string(), *v))
                    .collect(),
                goal: valuation.goal(),
            }
        })
        .collect();
    let mut text = String::new();
    for row in &rows {
        let on: Vec<&str> = row
            .values
            .iter()
            .filter(|(_, v)| **v)
            .map(|(l, _)| l.as_str())
            .collect();
        text.push_str(&format!(
            "{{{}}} -> goal {}; true: {}\n",
            row.active.join(", "),
            if row.goal { "on" } else { "off" },
            on.join(", ")
        ));
    }
    let doc = EvaluationDoc {
        v: SCHEMA_VERSION,
        goal: model.goal().to_string(),
        rows,
    };
    emit(output, &doc, &text)?;
    Ok(0)
}

#[derive(Serialize)]
struct CompatDoc {
    v: u32,
    object_id: String,
    connectors: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

pub fn compat(source: &SourceArgs, output: &OutputArgs) -> Result<u8, CliError> {
    let object = load_object(source)?;
    let slots: Vec<_> = object.slots().collect();
    let matrix: Vec<Vec<f64>> = slots
        .iter()
        .map(|&a| slots.iter().map(|&b| object.compatibility(a, b)).collect())
        .collect();
    let connectors: Vec<String> = slots
        .iter()
        .map(|&s| object.connector_ref(s).to_string())
        .collect();
    let mut text = String::new();
    for (i, row) in matrix.iter().enumerate() {
        for (j, p) in row.iter().enumerate().skip(i + 1) {
            if *p > 0.0 {
                text.push_str(&format!("{} ~ {}: {p:.6}\n", connectors[i], connectors[j]));
            }
        }
    }
    let doc = CompatDoc {
        v: SCHEMA_VERSION,
        object_id: object.id().to_string(),
        connectors,
        matrix,
    };
    emit(output, &doc, &text)?;
    Ok(0)
}

#[derive(Serialize)]
struct Outcome {
    state: usize,
    p: f64,
}

#[derive(Serialize)]
struct TransitionDoc {
    state: usize,
    action: String,
    outcomes: Vec<Outcome>,
}

#[derive(Serialize)]
struct EnumerationDoc {
    v: u32,
    object_id: String,
    states: usize,
    actions: usize,
    goal_states: usize,
    dead_ends: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    transitions: Option<Vec<TransitionDoc>>,
}

pub fn enumerate(
    source: &SourceArgs,
    model: Option<&Path>,
    binding: Option<&Path>,
    transitions: bool,
    config: &PlannerConfig,
    output: &OutputArgs,
) -> Result<u8, CliError> {
    config.check()?;
    let object = load_object(source)?;
    let space = match (model, binding) {
        (Some(model), Some(binding)) => {
            let model = read_valid_model(model)?;
            let doc: BindingDoc = read_json(binding)?;
            let binding = bind_doc(&object, &model, &doc)?;
            PlanningProblem::new(&object, &model, &binding, *config)?.enumerate_states()?
        }
        _ => causeplan::StateSpace::enumerate(&object, |_| false, config.max_states)?,
    };
    let doc = EnumerationDoc {
        v: SCHEMA_VERSION,
        object_id: object.id().to_string(),
        states: space.len(),
        actions: space.action_count(),
        goal_states: space.goal_count(),
        dead_ends: space.dead_end_count(),
        transitions: transitions.then(|| {
            (0..space.len())
                .flat_map(|id| {
                    let space = &space;
                    let object = &object;
                    space.edges(id).iter().map(move |edge| TransitionDoc {
                        state: id,
                        action: object.render_action(&edge.action),
                        outcomes: space
                            .outcomes(id, edge)
                            .iter()
                            .map(|&(p, state)| Outcome { state, p })
                            .collect(),
                    })
                })
                .collect()
        }),
    };
    let text = format!(
        "{}: {} states, {} actions, {} goal states, {} dead ends\n",
        doc.object_id, doc.states, doc.actions, doc.goal_states, doc.dead_ends
    );
    emit(output, &doc, &text)?;
    Ok(0)
}

#[derive(Serialize)]
struct CatalogDoc {
    v: u32,
    objects: Vec<ObjectSummary>,
}

pub fn catalog(dir: &Path, output: &OutputArgs) -> Result<u8, CliError> {
    let catalog = load_catalog(dir)?;
    let doc = CatalogDoc {
        v: SCHEMA_VERSION,
        objects: catalog.summaries(),
    };
    let mut text = String::new();
    for object in &doc.objects {
        let category = object
            .category
            .map(|c| c.to_string())
            .unwrap_or_else(|| "-".into());
        let parts: Vec<&str> = object.parts.iter().map(|p| p.id.as_str()).collect();
        text.push_str(&format!(
            "{} [{}] {}: {}\n",
            object.id,
            category,
            object.display_name,
            parts.join(", ")
        ));
    }
    emit(output, &doc, &text)?;
    Ok(0)
}
