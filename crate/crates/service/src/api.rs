use std::collections::BTreeSet;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use causeplan::{
    bind_doc, check_transfer, parse_model, AssemblyState, BindingDoc, BindingWarning,
    FailureReason, ObjectSpec, ObjectSummary, OutcomeKind, PlanReport, PlannerError,
    PlanningProblem, TransferError, TransferResult, ValidationDocument, SCHEMA_VERSION,
};

use crate::error::ApiError;
use crate::session::{Session, Step1, Step2, Step3, Step3Entry};
use crate::AppState;

#[derive(Serialize)]
pub struct ObjectList {
    v: u32,
    objects: Vec<ObjectSummary>,
}

pub async fn list_objects(State(state): State<AppState>) -> Json<ObjectList> {
    Json(ObjectList {
        v: SCHEMA_VERSION,
        objects: state.catalog.summaries(),
    })
}

pub async fn get_object(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<ObjectSpec>, ApiError> {
    object(&state, &id).map(|o| Json(o.clone()))
}

fn object<'a>(state: &'a AppState, id: &str) -> Result<&'a ObjectSpec, ApiError> {
    state
        .catalog
        .get(id)
        .ok_or_else(|| ApiError::NotFound(format!("no object `{id}`")))
}

pub async fn validate_model(body: String) -> Result<Response, ApiError> {
    let model = parse_model(&body).map_err(ApiError::Syntax)?;
    let doc = ValidationDocument::new(&model);
    let status = if doc.ok {
        StatusCode::OK
    } else {
        StatusCode::UNPROCESSABLE_ENTITY
    };
    Ok((status, Json(doc)).into_response())
}

pub async fn create_session(State(state): State<AppState>) -> Result<(StatusCode, Json<Session>), ApiError> {
    Ok((StatusCode::CREATED, Json(state.store.create().await?)))
}

pub async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Session>, ApiError> {
    Ok(Json(state.store.load(&id).await?))
}

#[derive(Debug, Deserialize)]
pub struct SaveStep {
    /// The session version the client last saw.
    version: u64,
    #[serde(flatten)]
    payload: StepPayload,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
enum StepPayload {
    Step1 { bindings: Vec<BindingDoc> },
    Step2 { source: String },
}

pub async fn save_step(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(request): Json<SaveStep>,
) -> Result<Json<Session>, ApiError> {
    let guard = state.store.lock(&id).await;
    let mut session = state.store.load(&id).await?;
    if request.version != session.version {
        return Err(ApiError::Conflict(format!(
            "stale write: session is at version {}, request was based on {}",
            session.version, request.version
        )));
    }
    if session.is_frozen() {
        return Err(ApiError::Conflict(
            "the model is frozen once a test object has been transferred".into(),
        ));
    }
    match request.payload {
        StepPayload::Step1 { bindings } => {
            check_training_bindings(&state, &bindings)?;
            session.step1 = Some(Step1 { bindings });
        }
        StepPayload::Step2 { source } => {
            let model = parse_model(&source).map_err(ApiError::Syntax)?;
            session.step2 = Some(Step2 {
                validation: ValidationDocument::new(&model),
                source,
                plan: None,
            });
        }
    }
    state.store.commit(&guard, &mut session).await?;
    Ok(Json(session))
}

fn check_training_bindings(state: &AppState, bindings: &[BindingDoc]) -> Result<(), ApiError> {
    let mut seen = BTreeSet::new();
    for doc in bindings {
        let object = state
            .catalog
            .get(&doc.object_id)
            .ok_or_else(|| ApiError::Unprocessable(format!("no object `{}`", doc.object_id)))?;
        if !seen.insert(doc.object_id.as_str()) {
            return Err(ApiError::Unprocessable(format!(
                "object `{}` is bound twice",
                doc.object_id
            )));
        }
        for (part, labels) in &doc.entries {
            if object.part_index(part).is_none() {
                return Err(ApiError::Unprocessable(format!(
                    "object `{}` has no part `{part}`",
                    doc.object_id
                )));
            }
            if labels.iter().any(|l| l.trim().is_empty()) {
                return Err(ApiError::Unprocessable(format!("empty label on part `{part}`")));
            }
        }
    }
    Ok(())
}

/// Runs CPU-bound work on the bounded planning pool.
async fn on_worker<T: Send + 'static>(
    state: &AppState,
    work: impl FnOnce() -> T + Send + 'static,
) -> Result<T, ApiError> {
    let permit = state
        .workers
        .clone()
        .acquire_owned()
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    tokio::task::spawn_blocking(move || {
        let _permit = permit;
        work()
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRequest {
    object_id: String,
    /// Falls back to the step-1 binding for the object.
    #[serde(default)]
    binding: Option<BindingDoc>,
}

/// A plan run; failures are results too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResponse {
    pub v: u32,
    pub object_id: String,
    pub outcome: OutcomeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<FailureReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanReport>,
    pub warnings: Vec<BindingWarning>,
}

pub async fn plan(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(request): Json<PlanRequest>,
) -> Result<Json<PlanResponse>, ApiError> {
    let guard = state.store.lock(&id).await;
    let mut session = state.store.load(&id).await?;
    let source = session
        .validated_source()
        .ok_or_else(|| ApiError::Conflict("the session has no validated model".into()))?
        .to_string();
    let object = object(&state, &request.object_id)?.clone();
    let doc = match request.binding {
        Some(doc) => doc,
        None => session
            .step1
            .iter()
            .flat_map(|s| &s.bindings)
            .find(|b| b.object_id == request.object_id)
            .cloned()
            .ok_or_else(|| {
                ApiError::Conflict(format!("no step-1 binding for `{}`", request.object_id))
            })?,
    };
    let config = state.planner;
    let response = on_worker(&state, move || run_plan(&object, &source, &doc, config)).await??;
    if let (Some(report), Some(step2)) = (&response.plan, session.step2.as_mut()) {
        step2.plan = Some(report.clone());
        state.store.commit(&guard, &mut session).await?;
    }
    Ok(Json(response))
}

fn run_plan(
    object: &ObjectSpec,
    source: &str,
    doc: &BindingDoc,
    config: causeplan::PlannerConfig,
) -> Result<PlanResponse, ApiError> {
    let model = parse_model(source).map_err(|e| ApiError::Internal(e.to_string()))?;
    let binding = bind_doc(object, &model, doc).map_err(|e| ApiError::Unprocessable(e.to_string()))?;
    let problem = PlanningProblem::new(object, &model, &binding, config)
        .map_err(|e| ApiError::Unprocessable(e.to_string()))?;
    let mut response = PlanResponse {
        v: SCHEMA_VERSION,
        object_id: object.id().to_string(),
        outcome: OutcomeKind::Failure,
        reason: None,
        message: None,
        plan: None,
        warnings: binding.warnings(),
    };
    if object.applicable_actions(&AssemblyState::empty()).is_empty() {
        response.reason = Some(FailureReason::NoCompatibleConnections);
    }
    match problem.solve() {
        Ok(report) => {
            if report.achieves_goal {
                response.outcome = OutcomeKind::Success;
            } else if response.reason.is_none() {
                response.reason = Some(FailureReason::GoalUnreachableUnderModel);
            }
            response.plan = Some(report);
        }
        Err(e @ PlannerError::StateSpaceExceeded(_)) => {
            response.reason = Some(FailureReason::StateSpaceExceeded);
            response.message = Some(e.to_string());
        }
        Err(e @ PlannerError::NonConvergence { .. }) => {
            response.reason = Some(FailureReason::PlannerNonConvergence);
            response.message = Some(e.to_string());
        }
        Err(e) => return Err(ApiError::Unprocessable(e.to_string())),
    }
    Ok(response)
}

/// Step-3 request. Only a binding is accepted; the model cannot be changed.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferRequest {
    binding: BindingDoc,
}

pub async fn transfer(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(request): Json<TransferRequest>,
) -> Result<Json<TransferResult>, ApiError> {
    let guard = state.store.lock(&id).await;
    let mut session = state.store.load(&id).await?;
    let training = session.training_objects();
    if training.is_empty() {
        return Err(ApiError::Conflict("step 1 has no training bindings".into()));
    }
    let source = session
        .validated_source()
        .ok_or_else(|| ApiError::Conflict("the session has no validated model".into()))?
        .to_string();
    if session.step2.as_ref().and_then(|s| s.plan.as_ref()).is_none() {
        return Err(ApiError::Conflict("plan the training object before transferring".into()));
    }
    let object = object(&state, &request.binding.object_id)?.clone();
    let doc = request.binding;
    let (config, catalog) = (state.planner, state.catalog.clone());
    let worker_doc = doc.clone();
    let result = on_worker(&state, move || {
        let model = parse_model(&source).map_err(|e| ApiError::Internal(e.to_string()))?;
        let binding =
            bind_doc(&object, &model, &worker_doc).map_err(|e| ApiError::Unprocessable(e.to_string()))?;
        let training: Vec<&str> = training.iter().map(String::as_str).collect();
        check_transfer(&model, &training, &object, &binding, &config, catalog.categories())
            .map_err(transfer_error)
    })
    .await??;

    session
        .step3
        .get_or_insert_with(|| Step3 { results: Vec::new() })
        .results
        .push(Step3Entry {
            binding: doc,
            result: result.clone(),
        });
    state.store.commit(&guard, &mut session).await?;
    Ok(Json(result))
}

fn transfer_error(e: TransferError) -> ApiError {
    match e {
        TransferError::InvalidModel(_) => ApiError::Conflict(e.to_string()),
        _ => ApiError::Unprocessable(e.to_string()),
    }
}
