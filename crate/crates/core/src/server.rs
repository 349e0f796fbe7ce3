//! HTTP service for the configuration workbench: sessions holding a model
//! and its configuration file, finder jobs run in the background, state
//! exports and analysis warnings.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path as FsPath, PathBuf};
use std::sync::{Arc, Mutex as StdMutex};
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value as Json_};
use tokio::sync::Mutex;
use tower_http::services::ServeDir;
use uuid::Uuid;

use crate::analyzer::analyze;
use crate::config::{default_config, serialize_config, serialize_config_file, validate, ConfigError, ConfigFile, Configuration};
use crate::finder::{Backend, BacktrackingBackend, CancelToken, FinderProblem};
use crate::model::Model;
use crate::parse::{parse_config_file, parse_model, parse_state_commands};
use crate::state::{export_dot, export_json, state_from_json, state_to_json, SystemState};
use crate::tasks::{check_consistency, check_independence, run_all_independence, TaskOptions};

#[derive(Clone, Debug)]
pub struct ServeOptions {
    pub host: String,
    pub port: u16,
    pub static_dir: Option<PathBuf>,
    pub snapshot: Option<PathBuf>,
}

#[derive(Default)]
struct SessionData {
    model: Option<Model>,
    model_text: Option<String>,
    model_path: Option<String>,
    configs: ConfigFile,
    jobs: Vec<Uuid>,
}

struct Session {
    id: Uuid,
    data: Mutex<SessionData>,
    /// Held by the running job; later jobs wait in submission order.
    queue: Arc<Mutex<()>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Validate,
    Consistency,
    Independence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Cancelled,
}

struct JobStatus {
    state: JobState,
    result: Option<Json_>,
    error: Option<String>,
    states: Vec<SystemState>,
}

struct Job {
    id: Uuid,
    session: Uuid,
    kind: JobKind,
    cancel: CancelToken,
    status: StdMutex<JobStatus>,
}

impl Job {
    fn to_json(&self) -> Json_ {
        let st = self.status.lock().expect("job lock");
        let mut j = json!({
            "id": self.id,
            "session": self.session,
            "kind": self.kind,
            "state": st.state,
        });
        if let Some(r) = &st.result {
            j["result"] = r.clone();
        }
        if let Some(e) = &st.error {
            j["error"] = json!(e);
        }
        j
    }
}

/// Shared server state; cheap to clone.
#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<Uuid, Arc<Session>>>>,
    jobs: Arc<Mutex<HashMap<Uuid, Arc<Job>>>>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    async fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        let id = Uuid::parse_str(id).map_err(|_| ApiError::not_found("session", id))?;
        self.sessions
            .lock()
            .await
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", &id.to_string()))
    }

    async fn job(&self, id: &str) -> Result<Arc<Job>, ApiError> {
        let id = Uuid::parse_str(id).map_err(|_| ApiError::not_found("job", id))?;
        self.jobs
            .lock()
            .await
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("job", &id.to_string()))
    }

    async fn add_session(&self, data: SessionData) -> Uuid {
        let id = Uuid::new_v4();
        let session = Arc::new(Session {
            id,
            data: Mutex::new(data),
            queue: Arc::new(Mutex::new(())),
        });
        self.sessions.lock().await.insert(id, session);
        id
    }

    /// Model text, path and configuration text of every session.
    pub async fn snapshot(&self) -> Json_ {
        let sessions: Vec<Arc<Session>> = self.sessions.lock().await.values().cloned().collect();
        let mut out = Vec::new();
        for s in sessions {
            let d = s.data.lock().await;
            out.push(json!({
                "id": s.id,
                "model_text": d.model_text,
                "model_path": d.model_path,
                "configs": d.model.as_ref().map(|_| serialize_config_file(&d.configs)),
            }));
        }
        json!({ "sessions": out })
    }

    /// Recreates sessions from a snapshot; entries that no longer parse are
    /// skipped.
    pub async fn restore(&self, snapshot: &Json_) {
        let Some(items) = snapshot["sessions"].as_array() else {
            return;
        };
        for item in items {
            let mut data = SessionData::default();
            if let Some(text) = item["model_text"].as_str() {
                let path = item["model_path"].as_str().map(str::to_string);
                let Ok(model) = parse_model(text, path.as_deref().unwrap_or("model.use")) else {
                    continue;
                };
                data.configs = item["configs"]
                    .as_str()
                    .and_then(|c| parse_config_file(c, "snapshot.properties", &model).ok())
                    .unwrap_or_else(|| default_file(&model));
                data.model = Some(model);
                data.model_text = Some(text.to_string());
                data.model_path = path;
            }
            let id = item["id"].as_str().and_then(|s| Uuid::parse_str(s).ok()).unwrap_or_else(Uuid::new_v4);
            let session = Arc::new(Session {
                id,
                data: Mutex::new(data),
                queue: Arc::new(Mutex::new(())),
            });
            self.sessions.lock().await.insert(id, session);
        }
    }
}

#[derive(Debug)]
pub struct ApiError(StatusCode, Json_);

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError(status, json!({ "error": message.into() }))
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("unknown {what} `{id}`"))
    }

    fn config_errors(errors: &[ConfigError]) -> Self {
        let items: Vec<Json_> = errors
            .iter()
            .map(|e| {
                json!({
                    "key": e.key,
                    "message": e.message,
                    "location": e.location,
                    "config": e.config,
                })
            })
            .collect();
        ApiError(StatusCode::UNPROCESSABLE_ENTITY, json!({ "errors": items }))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn default_file(model: &Model) -> ConfigFile {
    let mut f = ConfigFile::default();
    f.configs.insert("default".into(), default_config(model));
    f
}

fn model_json(model: &Model) -> Json_ {
    json!({
        "name": model.name,
        "classes": model.classes.iter().map(|c| json!({
            "name": c.name,
            "abstract": c.is_abstract,
            "parents": c.parents,
            "attributes": c.attributes.iter().map(|a| json!({"name": a.name, "type": a.ty.to_string()})).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "associations": model.associations.iter().map(|a| json!({
            "name": a.name,
            "ends": a.ends.iter().map(|e| json!({
                "role": e.role,
                "class": e.class,
                "multiplicity": e.multiplicity.to_string(),
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "invariants": model.invariants.iter().map(|i| json!({
            "name": i.qualified_name(),
            "context": i.context,
            "text": i.text_of(&i.body),
        })).collect::<Vec<_>>(),
    })
}

fn require_model(d: &SessionData) -> ApiResult<&Model> {
    d.model
        .as_ref()
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no model loaded in this session"))
}

pub fn router(state: AppState, static_dir: Option<&FsPath>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/model", post(load_model))
        .route("/sessions/{id}/configs", get(list_configs).put(put_config_file))
        .route("/sessions/{id}/configs/{name}", get(get_config).put(put_config))
        .route("/sessions/{id}/configs/{name}/clone", post(clone_config))
        .route("/sessions/{id}/configs/{name}/rename", post(rename_config))
        .route("/sessions/{id}/configs/{name}/delete", post(delete_config))
        .route("/sessions/{id}/jobs", post(submit_job))
        .route("/sessions/{id}/warnings", get(warnings))
        .route("/jobs/{id}", get(get_job))
        .route("/jobs/{id}/cancel", post(cancel_job))
        .route("/jobs/{id}/state.json", get(state_json))
        .route("/jobs/{id}/state.dot", get(state_dot))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until Ctrl-C, then writes the snapshot if one was requested.
pub async fn serve(opts: ServeOptions) -> std::io::Result<()> {
    let state = AppState::new();
    if let Some(path) = &opts.snapshot {
        if let Ok(text) = tokio::fs::read_to_string(path).await {
            if let Ok(j) = serde_json::from_str::<Json_>(&text) {
                state.restore(&j).await;
            }
        }
    }
    let app = router(state.clone(), opts.static_dir.as_deref());
    let addr: SocketAddr = format!("{}:{}", opts.host, opts.port)
        .parse()
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, format!("{e}")))?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some(path) = &opts.snapshot {
        let j = state.snapshot().await;
        tokio::fs::write(path, serde_json::to_string_pretty(&j).expect("json")).await?;
    }
    Ok(())
}

async fn create_session(State(app): State<AppState>) -> (StatusCode, Json<Json_>) {
    let id = app.add_session(SessionData::default()).await;
    (StatusCode::CREATED, Json(json!({ "id": id })))
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Json_>> {
    let s = app.session(&id).await?;
    let d = s.data.lock().await;
    Ok(Json(json!({
        "id": s.id,
        "model": d.model.as_ref().map(model_json),
        "model_path": d.model_path,
        "configs": d.configs.names(),
        "jobs": d.jobs,
    })))
}

#[derive(Deserialize)]
struct ModelBody {
    text: String,
    path: Option<String>,
}

async fn load_model(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<ModelBody>,
) -> ApiResult<Json<Json_>> {
    let s = app.session(&id).await?;
    let file = body.path.clone().unwrap_or_else(|| "model.use".into());
    let model = parse_model(&body.text, &file).map_err(|diags| {
        let items: Vec<Json_> = diags
            .iter()
            .map(|d| json!({"message": d.message(), "location": d.location()}))
            .collect();
        ApiError(StatusCode::UNPROCESSABLE_ENTITY, json!({ "errors": items }))
    })?;
    // A configuration file with the model's base name is opened with it.
    let mut config_path = None;
    let mut config_errors = Vec::new();
    let mut configs = default_file(&model);
    if let Some(p) = &body.path {
        let sibling = FsPath::new(p).with_extension("properties");
        if let Ok(text) = tokio::fs::read_to_string(&sibling).await {
            match parse_config_file(&text, &sibling.display().to_string(), &model) {
                Ok(f) => {
                    configs = f;
                    config_path = Some(sibling.display().to_string());
                }
                Err(errors) => config_errors = errors,
            }
        }
    }
    let warnings = analyze(&model, None);
    let mut d = s.data.lock().await;
    let response = json!({
        "model": model_json(&model),
        "warnings": warnings,
        "configs": configs.names(),
        "config_path": config_path,
        "config_errors": config_errors.iter().map(|e| json!({"key": e.key, "message": e.message, "location": e.location})).collect::<Vec<_>>(),
    });
    configs.path = config_path.map(PathBuf::from);
    d.model = Some(model);
    d.model_text = Some(body.text);
    d.model_path = body.path;
    d.configs = configs;
    Ok(Json(response))
}

async fn list_configs(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Json_>> {
    let s = app.session(&id).await?;
    let d = s.data.lock().await;
    Ok(Json(json!({
        "names": d.configs.names(),
        "text": serialize_config_file(&d.configs),
    })))
}

#[derive(Deserialize)]
struct TextBody {
    text: String,
}

async fn put_config_file(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<TextBody>,
) -> ApiResult<Json<Json_>> {
    let s = app.session(&id).await?;
    let mut d = s.data.lock().await;
    let model = require_model(&d)?;
    let mut file = parse_config_file(&body.text, "configs.properties", model).map_err(|e| ApiError::config_errors(&e))?;
    file.path = d.configs.path.clone();
    d.configs = file;
    Ok(Json(json!({ "names": d.configs.names() })))
}

async fn get_config(State(app): State<AppState>, Path((id, name)): Path<(String, String)>) -> ApiResult<Json<Json_>> {
    let s = app.session(&id).await?;
    let d = s.data.lock().await;
    let c = d.configs.get(&name).ok_or_else(|| ApiError::not_found("configuration", &name))?;
    Ok(Json(json!({
        "name": name,
        "config": c,
        "text": serialize_config(c),
    })))
}

/// Either the key-value text of one configuration or its JSON form.
#[derive(Deserialize)]
struct ConfigBody {
    text: Option<String>,
    config: Option<Configuration>,
}

async fn put_config(
    State(app): State<AppState>,
    Path((id, name)): Path<(String, String)>,
    Json(body): Json<ConfigBody>,
) -> ApiResult<Json<Json_>> {
    let s = app.session(&id).await?;
    let mut d = s.data.lock().await;
    let model = require_model(&d)?;
    let config = match (body.text, body.config) {
        (Some(text), _) => {
            let header = format!("[{name}]\n");
            let parsed = parse_config_file(&format!("{header}{text}"), &name, model).map_err(|errors| {
                // Report lines relative to the submitted text.
                let shifted: Vec<ConfigError> = errors
                    .into_iter()
                    .map(|mut e| {
                        if let Some(l) = e.location.as_mut() {
                            l.line = l.line.saturating_sub(1).max(1);
                        }
                        e
                    })
                    .collect();
                ApiError::config_errors(&shifted)
            })?;
            parsed.get(&name).cloned().unwrap_or_default()
        }
        (None, Some(config)) => {
            let errors = validate(&config, model);
            if !errors.is_empty() {
                return Err(ApiError::config_errors(&errors));
            }
            config
        }
        (None, None) => return Err(ApiError::new(StatusCode::BAD_REQUEST, "expected `text` or `config`")),
    };
    d.configs = d
        .configs
        .with_config(&name, config)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let c = d.configs.get(&name).expect("inserted");
    Ok(Json(json!({ "name": name, "config": c, "text": serialize_config(c) })))
}

fn file_error(e: crate::config::ConfigFileError) -> ApiError {
    use crate::config::ConfigFileError::*;
    let status = match &e {
        UnknownConfig(_) => StatusCode::NOT_FOUND,
        DuplicateName(_) => StatusCode::CONFLICT,
        InvalidName(_) => StatusCode::BAD_REQUEST,
    };
    ApiError::new(status, e.to_string())
}

#[derive(Deserialize, Default)]
struct NameBody {
    new_name: Option<String>,
}

async fn clone_config(
    State(app): State<AppState>,
    Path((id, name)): Path<(String, String)>,
    body: Option<Json<NameBody>>,
) -> ApiResult<(StatusCode, Json<Json_>)> {
    let s = app.session(&id).await?;
    let mut d = s.data.lock().await;
    let new_name = body.and_then(|b| b.0.new_name);
    d.configs = d.configs.clone_config(&name, new_name.as_deref()).map_err(file_error)?;
    Ok((StatusCode::CREATED, Json(json!({ "names": d.configs.names() }))))
}

async fn rename_config(
    State(app): State<AppState>,
    Path((id, name)): Path<(String, String)>,
    Json(body): Json<NameBody>,
) -> ApiResult<Json<Json_>> {
    let s = app.session(&id).await?;
    let mut d = s.data.lock().await;
    let new_name = body
        .new_name
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "`new_name` is required"))?;
    d.configs = d.configs.rename_config(&name, &new_name).map_err(file_error)?;
    Ok(Json(json!({ "names": d.configs.names() })))
}

async fn delete_config(
    State(app): State<AppState>,
    Path((id, name)): Path<(String, String)>,
) -> ApiResult<Json<Json_>> {
    let s = app.session(&id).await?;
    let mut d = s.data.lock().await;
    d.configs = d.configs.delete_config(&name).map_err(file_error)?;
    Ok(Json(json!({ "names": d.configs.names() })))
}

#[derive(Deserialize)]
struct JobBody {
    kind: JobKind,
    #[serde(alias = "configName")]
    config_name: String,
    /// JSON state export or `!create`/`!set`/`!insert` commands.
    #[serde(alias = "baseState")]
    base_state: Option<Json_>,
    limit: Option<usize>,
    /// Target of an independence job; all invariants when absent.
    invariant: Option<String>,
    timeout_ms: Option<u64>,
    seed: Option<u64>,
}

async fn submit_job(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<JobBody>,
) -> ApiResult<(StatusCode, Json<Json_>)> {
    let s = app.session(&id).await?;
    let mut d = s.data.lock().await;
    let model = require_model(&d)?.clone();
    let config = d
        .configs
        .get(&body.config_name)
        .ok_or_else(|| ApiError::not_found("configuration", &body.config_name))?
        .clone();
    let errors = validate(&config, &model);
    if !errors.is_empty() {
        return Err(ApiError::config_errors(&errors));
    }
    let base = match &body.base_state {
        None | Some(Json_::Null) => None,
        Some(Json_::String(cmds)) => Some(
            parse_state_commands(cmds, "base.cmd", &model)
                .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?,
        ),
        Some(j) => Some(state_from_json(j).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.0))?),
    };
    if let (JobKind::Independence, Some(inv)) = (body.kind, &body.invariant) {
        if model.invariant(inv).is_none() {
            return Err(ApiError::not_found("invariant", inv));
        }
    }
    let job = Arc::new(Job {
        id: Uuid::new_v4(),
        session: s.id,
        kind: body.kind,
        cancel: CancelToken::new(),
        status: StdMutex::new(JobStatus {
            state: JobState::Queued,
            result: None,
            error: None,
            states: Vec::new(),
        }),
    });
    d.jobs.push(job.id);
    app.jobs.lock().await.insert(job.id, job.clone());
    let queue = s.queue.clone();
    let runner = job.clone();
    tokio::spawn(async move {
        let _turn = queue.lock_owned().await;
        {
            let mut st = runner.status.lock().expect("job lock");
            if st.state != JobState::Queued {
                return;
            }
            st.state = JobState::Running;
        }
        let worker = runner.clone();
        let outcome = tokio::task::spawn_blocking(move || execute(&worker, &model, &config, base.as_ref(), &body)).await;
        let mut st = runner.status.lock().expect("job lock");
        match outcome {
            Ok(Ok((result, states))) => {
                st.result = Some(result);
                st.states = states;
            }
            Ok(Err(e)) => st.error = Some(e),
            Err(e) => st.error = Some(format!("job failed: {e}")),
        }
        st.state = if runner.cancel.is_cancelled() {
            JobState::Cancelled
        } else {
            JobState::Done
        };
    });
    Ok((StatusCode::ACCEPTED, Json(json!({ "id": job.id }))))
}

fn execute(
    job: &Job,
    model: &Model,
    config: &Configuration,
    base: Option<&SystemState>,
    body: &JobBody,
) -> Result<(Json_, Vec<SystemState>), String> {
    let deadline = body.timeout_ms.map(Duration::from_millis);
    let strategy = body
        .seed
        .map_or(crate::finder::Strategy::Minimal, |seed| crate::finder::Strategy::Random { seed });
    match job.kind {
        JobKind::Validate => {
            let mut problem = FinderProblem::new(model, config)
                .with_cancel(job.cancel.clone())
                .with_strategy(strategy);
            problem.deadline = deadline;
            if let Some(b) = base {
                problem = problem.with_base(b);
            }
            let out = BacktrackingBackend
                .run(&problem, body.limit.unwrap_or(1).max(1))
                .map_err(|e| e.to_string())?;
            let verdict = if !out.states.is_empty() {
                "SAT"
            } else if out.timed_out {
                "TIMEOUT"
            } else {
                "UNSAT"
            };
            let result = json!({
                "verdict": verdict,
                "stats": out.stats,
                "log": out.log,
                "states": out.states.iter().map(state_to_json).collect::<Vec<_>>(),
            });
            Ok((result, out.states))
        }
        JobKind::Consistency | JobKind::Independence => {
            let opts = TaskOptions {
                deadline,
                cancel: Some(job.cancel.clone()),
                strategy,
            };
            let reports = match (job.kind, &body.invariant) {
                (JobKind::Consistency, _) => vec![check_consistency(model, config, &opts).map_err(|e| e.to_string())?],
                (_, Some(inv)) => vec![check_independence(model, config, inv, &opts).map_err(|e| e.to_string())?],
                (_, None) => run_all_independence(model, config, &opts).map_err(|e| e.to_string())?,
            };
            let states = reports.iter().filter_map(|r| r.witness.clone()).collect();
            let result = json!({ "reports": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>() });
            Ok((result, states))
        }
    }
}

async fn get_job(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Json_>> {
    Ok(Json(app.job(&id).await?.to_json()))
}

async fn cancel_job(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Json_>> {
    let job = app.job(&id).await?;
    {
        let mut st = job.status.lock().expect("job lock");
        match st.state {
            JobState::Queued => st.state = JobState::Cancelled,
            JobState::Running => job.cancel.cancel(),
            JobState::Done | JobState::Cancelled => {}
        }
    }
    Ok(Json(job.to_json()))
}

#[derive(Deserialize)]
struct IndexQuery {
    index: Option<usize>,
}

async fn job_state(app: &AppState, id: &str, index: Option<usize>) -> ApiResult<SystemState> {
    let job = app.job(id).await?;
    let st = job.status.lock().expect("job lock");
    st.states
        .get(index.unwrap_or(0))
        .cloned()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "the job has no state at this index"))
}

async fn state_json(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<IndexQuery>,
) -> ApiResult<Response> {
    let s = job_state(&app, &id, q.index).await?;
    Ok(([(header::CONTENT_TYPE, "application/json")], export_json(&s)).into_response())
}

async fn state_dot(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<IndexQuery>,
) -> ApiResult<Response> {
    let s = job_state(&app, &id, q.index).await?;
    Ok(([(header::CONTENT_TYPE, "text/vnd.graphviz")], export_dot(&s)).into_response())
}

#[derive(Deserialize)]
struct WarningsQuery {
    config: Option<String>,
}

async fn warnings(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<WarningsQuery>,
) -> ApiResult<Json<Json_>> {
    let s = app.session(&id).await?;
    let d = s.data.lock().await;
    let model = require_model(&d)?;
    let config = match &q.config {
        Some(name) => Some(d.configs.get(name).ok_or_else(|| ApiError::not_found("configuration", name))?),
        None => None,
    };
    Ok(Json(json!({ "warnings": analyze(model, config) })))
}
