//! End-to-end acceptance checks, driven through the `causeplan` binary.
//!
//! Runs without the libtest harness so that each criterion's `PASS`/`FAIL`
//! line is always printed. Exits non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use causeplan::testing::{
    bfs_goal_distance, brute_force_fixpoints, oracle_goal_test, random_binary_object,
    random_entries, random_valid_model,
};
use causeplan::{
    parse_model, AssemblyState, BindingDoc, Catalog, Label, ObjectSpec, PlannerConfig,
    PlanningProblem, TransferResult,
};
use common::{causeplan, fixture, fixtures, write_json, write_text, Run};

const EVALUATION_MODELS: usize = 200;
const EVALUATION_BUDGET: Duration = Duration::from_secs(10);
const VALIDATION_MODELS: usize = 50;
const PLANNER_OBJECTS: usize = 100;
const PLANNER_BUDGET: Duration = Duration::from_secs(30);
const VALUE_TOLERANCE: f64 = 1e-6;
const PROBABILITY_TOLERANCE: f64 = 1e-12;
const COMPAT_PAIRS: usize = 1_000;
const DETERMINISM_RUNS: usize = 3;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn expect_code(run: &Run, code: i32) -> Result<(), String> {
    ensure(run.code == code, || {
        format!("exit {} (wanted {code}): {}", run.code, run.stderr.trim())
    })
}

fn catalog() -> Catalog {
    Catalog::load_dir(fixtures().join("catalog")).unwrap()
}

fn evaluation_oracle() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xE7A1);
    let started = Instant::now();
    let mut rows = 0;
    for i in 0..EVALUATION_MODELS {
        let model = random_valid_model(&mut rng, 10, 12);
        let path = write_text(dir.path(), &format!("m{i}.cm"), &model.to_source());
        let run = causeplan(&["evaluate", &path, "--all-subsets", "--format", "document"]);
        expect_code(&run, 0)?;
        for row in run.json()["rows"].as_array().unwrap() {
            let active: BTreeSet<Label> = row["active"]
                .as_array()
                .unwrap()
                .iter()
                .map(|l| Label::new(l.as_str().unwrap()).unwrap())
                .collect();
            let got: BTreeMap<Label, bool> = row["values"]
                .as_object()
                .unwrap()
                .iter()
                .map(|(l, v)| (Label::new(l).unwrap(), v.as_bool().unwrap()))
                .collect();
            let fixpoints = brute_force_fixpoints(&model, &active);
            ensure(fixpoints.len() == 1, || {
                format!("model {i}: {} fixpoints\n{model}", fixpoints.len())
            })?;
            ensure(fixpoints[0] == got, || {
                format!("model {i}, active {active:?}: got {got:?}, oracle {:?}", fixpoints[0])
            })?;
            rows += 1;
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < EVALUATION_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{EVALUATION_MODELS} models, {rows} subsets, {elapsed:.2?}"))
}

fn validation_fixtures() -> Outcome {
    let run = causeplan(&[
        "validate",
        &fixture("models/uncaused_intermediate.cm"),
        "--format",
        "document",
    ]);
    expect_code(&run, 1)?;
    let doc = run.json();
    let named = doc["violations"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v["kind"] == "uncaused_intermediate" && v["node"] == "flame");
    ensure(named, || format!("flame not named: {}", doc["violations"]))?;

    let run = causeplan(&["validate", &fixture("models/cyclic.cm"), "--format", "document"]);
    expect_code(&run, 1)?;
    let doc = run.json();
    ensure(
        doc["violations"].as_array().unwrap().iter().any(|v| v["kind"] == "cycle"),
        || format!("no cycle reported: {}", doc["violations"]),
    )?;

    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11D);
    for i in 0..VALIDATION_MODELS {
        let model = random_valid_model(&mut rng, 10, 12);
        let path = write_text(dir.path(), &format!("v{i}.cm"), &model.to_source());
        let run = causeplan(&["validate", &path]);
        expect_code(&run, 0).map_err(|e| format!("model {i}: {e}\n{model}"))?;
    }
    Ok(format!("both fixtures rejected, {VALIDATION_MODELS} random models accepted"))
}

fn transfer_doc(object: &str, model: &str, binding: &str, training: &str) -> Result<(Run, TransferResult), String> {
    let run = causeplan(&[
        "transfer",
        "--object",
        object,
        "--model",
        &fixture(model),
        "--binding",
        &fixture(binding),
        "--training",
        training,
        "--format",
        "document",
    ]);
    let result = serde_json::from_str(&run.stdout)
        .map_err(|e| format!("bad transfer document ({e}): {}", run.stderr))?;
    Ok((run, result))
}

fn failed_transfer() -> Outcome {
    let (run, result) = transfer_doc(
        "flashlight",
        "models/desk_lamp_failed.cm",
        "bindings/flashlight_failed.json",
        "desk_lamp",
    )?;
    expect_code(&run, 1)?;
    let reason = result.reason.map(|r| r.to_string());
    ensure(reason.as_deref() == Some("goal_unreachable_under_model"), || {
        format!("reason {reason:?}")
    })?;
    let doc: Value = serde_json::from_str(&run.stdout).unwrap();
    let flagged = doc["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w["kind"] == "novel_label" && w["label"] == "hold things together");
    ensure(flagged, || format!("warnings {}", doc["warnings"]))?;
    Ok("failure(goal_unreachable_under_model), novel label flagged".into())
}

fn near_generalization() -> Outcome {
    let (run, result) = transfer_doc(
        "flashlight",
        "models/desk_lamp_and.cm",
        "bindings/flashlight.json",
        "desk_lamp",
    )?;
    expect_code(&run, 0)?;
    let plan = result.plan.ok_or("no plan")?;

    let catalog = catalog();
    let flashlight = catalog.get("flashlight").unwrap();
    let model = parse_model(&std::fs::read_to_string(fixture("models/desk_lamp_and.cm")).unwrap()).unwrap();
    let doc: BindingDoc =
        serde_json::from_str(&std::fs::read_to_string(fixture("bindings/flashlight.json")).unwrap()).unwrap();
    let binding = causeplan::bind_doc(flashlight, &model, &doc).unwrap();
    let problem = PlanningProblem::new(flashlight, &model, &binding, PlannerConfig::default()).unwrap();
    let mut state = AssemblyState::empty();
    for step in &plan.steps {
        let action = flashlight
            .action(step.primitive, &step.from, &step.to)
            .map_err(|e| e.to_string())?;
        state = state.apply(&action).map_err(|e| e.to_string())?;
    }
    ensure(problem.is_goal_state(&state), || "replayed plan misses the goal".into())?;
    Ok(format!("success, {} steps replayed to the goal", plan.steps.len()))
}

fn plan_length(object: &str, model: &str, binding: &str) -> Result<(Value, i32), String> {
    let run = causeplan(&[
        "plan", "--object", object, "--model", model, "--binding", binding, "--format", "document",
    ]);
    if run.code != 0 && run.code != 1 {
        return Err(format!("exit {}: {}", run.code, run.stderr.trim()));
    }
    let code = run.code;
    Ok((run.json(), code))
}

fn planner_oracle() -> Outcome {
    let started = Instant::now();
    let catalog = catalog();
    let read_model = |name: &str| parse_model(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
    let fixtures_cases = [
        ("desk_lamp", "models/desk_lamp_and.cm", "bindings/desk_lamp.json"),
        ("flashlight", "models/desk_lamp_and.cm", "bindings/flashlight.json"),
        ("flashlight", "models/desk_lamp_failed.cm", "bindings/flashlight_failed.json"),
        ("candle", "models/two_branch.cm", "bindings/candle.json"),
        ("kerosene_lamp", "models/two_branch.cm", "bindings/kerosene_lamp.json"),
        ("kerosene_lamp", "models/desk_lamp_and.cm", "bindings/kerosene_lamp.json"),
    ];
    let mut checked = 0;
    for (id, model_file, binding_file) in fixtures_cases {
        let object = catalog.get(id).unwrap();
        let model = read_model(model_file);
        let doc: BindingDoc =
            serde_json::from_str(&std::fs::read_to_string(fixture(binding_file)).unwrap()).unwrap();
        let (report, _) = plan_length(id, &fixture(model_file), &fixture(binding_file))?;
        compare_with_bfs(object, &model, &doc.entries, &report)
            .map_err(|e| format!("{id} under {model_file}: {e}"))?;
        checked += 1;
    }

    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0F5);
    let mut reachable = 0;
    for i in 0..PLANNER_OBJECTS {
        let object = random_binary_object(&mut rng, 5);
        let model = random_valid_model(&mut rng, 6, 8);
        let vocabulary: Vec<Label> = model.function_labels().into_iter().collect();
        let entries = random_entries(&mut rng, &object, &vocabulary);
        let object_path = write_json(dir.path(), &format!("o{i}.json"), &object);
        let model_path = write_text(dir.path(), &format!("o{i}.cm"), &model.to_source());
        let binding_path = write_json(
            dir.path(),
            &format!("o{i}.binding.json"),
            &json!({"v": 1, "object_id": object.id(), "entries": entries}),
        );
        let (report, _) = plan_length(&object_path, &model_path, &binding_path)?;
        if compare_with_bfs(&object, &model, &entries, &report).map_err(|e| format!("random {i}: {e}"))? {
            reachable += 1;
        }
        checked += 1;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < PLANNER_BUDGET, || format!("took {elapsed:?}"))?;
    ensure(reachable >= PLANNER_OBJECTS / 5, || {
        format!("only {reachable} random instances have a reachable goal")
    })?;
    Ok(format!("{checked} instances ({reachable} random reachable), {elapsed:.2?}"))
}

/// True when the goal is reachable and the plan is as short as BFS.
fn compare_with_bfs(
    object: &ObjectSpec,
    model: &causeplan::CausalModel,
    entries: &BTreeMap<String, Vec<String>>,
    report: &Value,
) -> Result<bool, String> {
    let steps = report["steps"].as_array().unwrap().len();
    let achieves = report["achieves_goal"].as_bool().unwrap();
    match bfs_goal_distance(object, oracle_goal_test(object, model, entries)) {
        Some(d) => {
            ensure(achieves && steps == d, || {
                format!("plan has {steps} steps (achieves {achieves}), BFS distance {d}")
            })?;
            Ok(true)
        }
        None => {
            ensure(!achieves, || "plan claims an unreachable goal".into())?;
            Ok(false)
        }
    }
}

fn stochastic_value() -> Outcome {
    let (report, code) = plan_length(
        &fixture("toy/loose_pair.json"),
        &fixture("models/pair.cm"),
        &fixture("bindings/loose_pair.json"),
    )?;
    ensure(code == 0, || format!("exit {code}"))?;
    let value = report["expected_value"].as_f64().unwrap();
    let expected = 0.495 / 0.525;
    let err = (value - expected).abs();
    ensure(err < VALUE_TOLERANCE, || format!("V(empty) = {value}, expected {expected}"))?;
    Ok(format!("V(empty) = {value:.9}, |error| = {err:.1e}"))
}

fn random_object_with_sizes(rng: &mut ChaCha8Rng, index: usize) -> Value {
    let kinds = ["socket", "plug", "thread", "surface"];
    let primitives = ["connect", "insert", "screw"];
    let parts: Vec<Value> = (0..rng.gen_range(2..=4))
        .map(|p| {
            let connectors: Vec<Value> = (0..rng.gen_range(1..=3))
                .map(|c| {
                    let count = rng.gen_range(1..=3);
                    let mut accepted: Vec<&str> = primitives
                        .choose_multiple(rng, count)
                        .copied()
                        .collect();
                    accepted.sort();
                    json!({
                        "id": format!("c{c}"),
                        "kind": kinds[rng.gen_range(0..kinds.len())],
                        "size": rng.gen_range(0.1..5.0f64),
                        "accepted_primitives": accepted,
                    })
                })
                .collect();
            json!({"id": format!("p{p}"), "display_name": format!("part {p}"), "connectors": connectors})
        })
        .collect();
    json!({"v": 1, "id": format!("rand{index}"), "display_name": "random object", "parts": parts})
}

fn transition_stochasticity() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5707);
    let mut objects: Vec<String> = ["desk_lamp", "flashlight", "candle", "kerosene_lamp"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    objects.push(fixture("toy/loose_pair.json"));
    for i in 0..20 {
        objects.push(write_json(dir.path(), &format!("s{i}.json"), &random_object_with_sizes(&mut rng, i)));
    }

    let mut distributions = 0;
    for object in &objects {
        let run = causeplan(&[
            "enumerate", "--object", object, "--transitions", "--format", "document",
        ]);
        expect_code(&run, 0).map_err(|e| format!("{object}: {e}"))?;
        for t in run.json()["transitions"].as_array().unwrap() {
            let total: f64 = t["outcomes"]
                .as_array()
                .unwrap()
                .iter()
                .map(|o| o["p"].as_f64().unwrap())
                .sum();
            ensure((total - 1.0).abs() <= PROBABILITY_TOLERANCE, || {
                format!("{object}: `{}` sums to {total}", t["action"])
            })?;
            distributions += 1;
        }
    }

    let mut matrices = Vec::new();
    for object in &objects {
        let run = causeplan(&["compat", "--object", object, "--format", "document"]);
        expect_code(&run, 0)?;
        matrices.push(run.json()["matrix"].clone());
    }
    for _ in 0..COMPAT_PAIRS {
        let m = &matrices[rng.gen_range(0..matrices.len())];
        let n = m.as_array().unwrap().len();
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        ensure(m[i][j] == m[j][i], || format!("compat({i},{j}) = {} but compat({j},{i}) = {}", m[i][j], m[j][i]))?;
    }
    Ok(format!("{distributions} distributions, {COMPAT_PAIRS} symmetric pairs"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let plan_args = |out: &Path| -> Vec<String> {
        [
            "plan",
            "--object",
            "kerosene_lamp",
            "--model",
            &fixture("models/two_branch.cm"),
            "--binding",
            &fixture("bindings/kerosene_lamp.json"),
            "--format",
            "document",
            "--out",
            &out.to_string_lossy(),
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    };
    let experiment_args = |out: &Path| -> Vec<String> {
        [
            "experiment",
            &fixture("experiments/far.json"),
            "--format",
            "document",
            "--out",
            &out.to_string_lossy(),
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    };
    for (name, args) in [
        ("plan", &plan_args as &dyn Fn(&Path) -> Vec<String>),
        ("experiment", &experiment_args),
    ] {
        let mut outputs = Vec::new();
        for k in 0..DETERMINISM_RUNS {
            let out = dir.path().join(format!("{name}{k}.json"));
            let run = causeplan(&args(&out));
            expect_code(&run, 0)?;
            let file = std::fs::read(&out).unwrap();
            ensure(file == run.stdout.as_bytes(), || format!("{name}: --out differs from stdout"))?;
            outputs.push(file);
        }
        ensure(outputs.windows(2).all(|w| w[0] == w[1]), || format!("{name} documents differ"))?;
    }
    Ok(format!("plan and experiment identical over {DETERMINISM_RUNS} runs"))
}

fn experiment_harness() -> Outcome {
    let outcomes = |file: &str| -> Result<(i32, BTreeMap<String, String>), String> {
        let run = causeplan(&["experiment", &fixture(file), "--format", "document"]);
        let code = run.code;
        if code != 0 && code != 1 {
            return Err(format!("{file}: exit {code}: {}", run.stderr.trim()));
        }
        let doc = run.json();
        let map = doc["results"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| {
                (
                    r["test_object"].as_str().unwrap().to_string(),
                    r["outcome"].as_str().unwrap().to_string(),
                )
            })
            .collect();
        Ok((code, map))
    };
    let (code, far) = outcomes("experiments/far.json")?;
    ensure(code == 0, || format!("far exit {code}"))?;
    ensure(
        far.get("flashlight").map(String::as_str) == Some("success")
            && far.get("kerosene_lamp").map(String::as_str) == Some("success"),
        || format!("far outcomes {far:?}"),
    )?;
    let (code, near) = outcomes("experiments/near.json")?;
    ensure(code == 0, || format!("near exit {code}"))?;
    ensure(
        near.get("flashlight").map(String::as_str) == Some("success")
            && near.get("kerosene_lamp").map(String::as_str) == Some("failure"),
        || format!("near outcomes {near:?}"),
    )?;
    Ok(format!("far {far:?}; near {near:?}"))
}

fn main() -> std::process::ExitCode {
    let criteria: [Criterion; 9] = [
        ("evaluation matches brute-force fixpoints", evaluation_oracle),
        ("validation rejects bad fixtures, accepts random models", validation_fixtures),
        ("failed flashlight transfer", failed_transfer),
        ("near generalization to the flashlight", near_generalization),
        ("plan length equals BFS goal distance", planner_oracle),
        ("stochastic value of the loose pair", stochastic_value),
        ("transition rows sum to one, compatibility symmetric", transition_stochasticity),
        ("plan and experiment documents are deterministic", determinism),
        ("experiment harness, far and near", experiment_harness),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                println!("FAIL {}. {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria pass", criteria.len(), criteria.len());
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
