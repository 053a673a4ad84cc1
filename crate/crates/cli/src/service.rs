//! JSON-over-HTTP API. Endpoint schemas are in `api.md`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use accessplan::io::{
    access_properties, allocation_properties, blocks_to_geojson, lots_to_geojson, network_to_geojson, read_records_csv,
    RunConfig,
};
use accessplan::pipeline::{evaluate_policy, site_access, Site};
use accessplan::policy::{
    knee_of_records, pareto_records, sensitivity_groups, ObjectiveRecord, Policy, SensitivityParam,
};
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

pub struct AppState {
    site: Option<Arc<Site>>,
    /// Blocks and segments scored under the configured policy, built once.
    site_json: Option<Value>,
    cfg: RunConfig,
    runs: PathBuf,
}

impl AppState {
    pub fn new(site: Option<Site>, cfg: RunConfig, runs: PathBuf) -> accessplan::Result<Arc<Self>> {
        let site_json = match &site {
            Some(s) => Some(site_geojson(s, &cfg)?),
            None => None,
        };
        Ok(Arc::new(AppState { site: site.map(Arc::new), site_json, cfg, runs }))
    }
}

fn site_geojson(site: &Site, cfg: &RunConfig) -> accessplan::Result<Value> {
    let (scores, tensor) = site_access(site, &cfg.policy, &cfg.eval, None)?;
    let segs: Vec<_> = (0..site.network.segments.len())
        .map(|k| scores.iter().enumerate().map(|(t, s)| (format!("S_t{t}"), s.scores[k].into())).collect())
        .collect();
    Ok(json!({
        "policy": cfg.policy,
        "total_area": site.total_area(),
        "blocks": blocks_to_geojson(&site.blocks, &access_properties(&tensor)),
        "segments": network_to_geojson(&site.network, Some(&segs)),
    }))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/site", get(get_site))
        .route("/evaluate", post(post_evaluate))
        .route("/runs", get(list_runs))
        .route("/runs/{id}/records", get(run_records))
        .route("/runs/{id}/pareto", get(run_pareto))
        .route("/runs/{id}/knee", get(run_knee))
        .route("/runs/{id}/sensitivity/{param}", get(run_sensitivity))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

struct ApiError(StatusCode, Value);

impl ApiError {
    fn new(status: StatusCode, message: impl std::fmt::Display) -> Self {
        ApiError(status, json!({ "error": message.to_string() }))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type ApiResult = std::result::Result<Json<Value>, ApiError>;

fn no_site() -> ApiError {
    ApiError::new(StatusCode::CONFLICT, "site not loaded")
}

async fn get_site(State(st): State<Arc<AppState>>) -> ApiResult {
    st.site_json.clone().map(Json).ok_or_else(no_site)
}

async fn post_evaluate(State(st): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let site = st.site.clone().ok_or_else(no_site)?;
    let policy: Policy = serde_json::from_slice(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    policy.validate().map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    let st2 = st.clone();
    let result = tokio::task::spawn_blocking(move || -> accessplan::Result<Value> {
        let ev = evaluate_policy(&site, &policy, &st2.cfg.eval, None)?;
        let mut props = access_properties(&ev.tensor);
        for (p, a) in props.iter_mut().zip(allocation_properties(&ev.allocation)) {
            p.extend(a);
        }
        let radii: BTreeMap<&str, f64> =
            ev.policy.tiers.iter().map(|t| t.name()).zip(ev.policy.radii.iter().copied()).collect();
        Ok(json!({
            "record": ObjectiveRecord::ok(ev.policy.clone(), ev.raw),
            "radii": radii,
            "shares": ev.shares,
            "construction": ev.intensity.report,
            "allocation": blocks_to_geojson(&site.blocks, &props),
            "lots": lots_to_geojson(&site.blocks, &ev.intensity)?,
        }))
    });
    let policy_echo: Option<Policy> = serde_json::from_slice(&body).ok();
    match result.await {
        Ok(Ok(v)) => Ok(Json(v)),
        Ok(Err(e)) => {
            let record = policy_echo.map(|p| ObjectiveRecord::invalid(p, &e));
            Err(ApiError(StatusCode::UNPROCESSABLE_ENTITY, json!({ "error": e.to_string(), "record": record })))
        }
        Err(e) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e)),
    }
}

/// Run ids are the names of subdirectories of the run root that hold a
/// `records.csv`.
fn run_ids(st: &AppState) -> Vec<String> {
    let mut ids: Vec<String> = std::fs::read_dir(&st.runs)
        .into_iter()
        .flatten()
        .flatten()
        .filter(|e| e.path().join("records.csv").is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    ids.sort();
    ids
}

fn run_dir(st: &AppState, id: &str) -> std::result::Result<PathBuf, ApiError> {
    if run_ids(st).iter().any(|r| r == id) {
        Ok(st.runs.join(id))
    } else {
        Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown run {id:?}")))
    }
}

fn load_run(st: &AppState, id: &str) -> std::result::Result<Vec<ObjectiveRecord>, ApiError> {
    let dir = run_dir(st, id)?;
    std::fs::File::open(dir.join("records.csv"))
        .map_err(accessplan::Error::from)
        .and_then(read_records_csv)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e))
}

async fn list_runs(State(st): State<Arc<AppState>>) -> ApiResult {
    let runs: Vec<Value> = run_ids(&st)
        .into_iter()
        .map(|id| {
            let dir = st.runs.join(&id);
            json!({
                "id": id,
                "has_pareto": dir.join("pareto.csv").is_file(),
                "has_knee": dir.join("knee.json").is_file(),
            })
        })
        .collect();
    Ok(Json(json!(runs)))
}

async fn run_records(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    Ok(Json(json!(load_run(&st, &id)?)))
}

async fn run_pareto(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let records = load_run(&st, &id)?;
    let front = pareto_records(&records);
    let on_front: Vec<&ObjectiveRecord> = records.iter().filter(|r| front.contains(&r.id())).collect();
    Ok(Json(json!(on_front)))
}

async fn run_knee(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let dir = run_dir(&st, &id)?;
    if let Ok(text) = std::fs::read_to_string(dir.join("knee.json")) {
        return serde_json::from_str(&text).map(Json).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e));
    }
    let records = load_run(&st, &id)?;
    let front = pareto_records(&records);
    let knee = knee_of_records(&records, &front).ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "empty front"))?;
    let rec = records.iter().find(|r| r.id() == knee.id).expect("knee is a record");
    Ok(Json(json!({
        "id": knee.id,
        "distance": knee.distance,
        "policy": rec.policy,
        "raw": rec.raw,
        "norm": rec.norm,
        "outputs": [],
    })))
}

async fn run_sensitivity(State(st): State<Arc<AppState>>, Path((id, param)): Path<(String, String)>) -> ApiResult {
    let param: SensitivityParam = param.parse().map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    let records = load_run(&st, &id)?;
    let front = pareto_records(&records);
    let on_front: Vec<&ObjectiveRecord> = records.iter().filter(|r| front.contains(&r.id())).collect();
    Ok(Json(json!({ "param": param.to_string(), "groups": sensitivity_groups(&on_front, param) })))
}
