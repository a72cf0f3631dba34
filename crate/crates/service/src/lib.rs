//! HTTP JSON API over the pvsim simulation library.
//!
//! | method | path                  | purpose                                   |
//! |--------|-----------------------|-------------------------------------------|
//! | GET    | `/panels`             | list registered panels                    |
//! | POST   | `/panels`             | register a datasheet and estimate it      |
//! | GET    | `/panels/{id}/curve`  | I-V / P-V arrays plus the tracked MPP     |
//!
//! Wire units are W/m² and °C; they are converted to model units at the
//! boundary.

mod registry;

use std::net::IpAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use pvsim_core::{
    datasheet_from_fields, generate_iv_curve, track_mpp, EnvConditions, FieldValue, StcContext,
    DEFAULT_POINTS,
};

pub use registry::{PanelEntry, Registry, RegistryError};

pub const MAX_POINTS: usize = 20_000;

pub struct AppState {
    pub registry: Registry,
    pub ctx: StcContext,
}

impl AppState {
    /// State with every bundled panel registered.
    pub fn new(ctx: StcContext) -> Result<Self, RegistryError> {
        Ok(AppState {
            registry: Registry::with_bundled(&ctx)?,
            ctx,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub class: String,
}

fn error_response(status: StatusCode, class: &str, message: impl Into<String>) -> Response {
    let body = ErrorBody {
        error: message.into(),
        class: class.to_string(),
    };
    (status, Json(body)).into_response()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PanelSummary {
    pub panel_id: String,
    pub name: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EstimatedBody {
    pub n: f64,
    pub rs_ohm: f64,
    pub i0_stc_a: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RegisteredBody {
    pub panel_id: String,
    pub name: Option<String>,
    pub estimated: EstimatedBody,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MppBody {
    pub v_mp_v: f64,
    pub i_mp_a: f64,
    pub p_mp_w: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CurveBody {
    pub voltage_v: Vec<f64>,
    pub current_a: Vec<f64>,
    pub power_w: Vec<f64>,
    pub mpp: MppBody,
}

#[derive(Debug, Deserialize)]
pub struct CurveQuery {
    pub irradiance_w_m2: Option<f64>,
    pub temperature_c: Option<f64>,
    pub points: Option<usize>,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/panels", get(list_panels).post(register_panel))
        .route("/panels/{id}/curve", get(panel_curve))
        .with_state(state)
}

/// API routes plus static UI assets served from `ui_dir` for any other path.
pub fn router_with_ui(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    match ui_dir {
        Some(dir) => router(state).fallback_service(ServeDir::new(dir)),
        None => router(state),
    }
}

pub async fn serve(bind: IpAddr, port: u16, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let state = AppState::new(StcContext::default())
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    let app = router_with_ui(Arc::new(state), ui_dir);
    let listener = tokio::net::TcpListener::bind((bind, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await
}

async fn list_panels(State(state): State<Arc<AppState>>) -> Json<Vec<PanelSummary>> {
    Json(
        state
            .registry
            .list()
            .iter()
            .map(|entry| PanelSummary {
                panel_id: entry.id.clone(),
                name: entry.datasheet.name.clone(),
            })
            .collect(),
    )
}

fn json_fields(body: &[u8]) -> Result<Vec<(String, FieldValue)>, String> {
    let value: serde_json::Value =
        serde_json::from_slice(body).map_err(|e| format!("malformed JSON body: {e}"))?;
    let serde_json::Value::Object(map) = value else {
        return Err("datasheet body must be a JSON object".into());
    };
    Ok(map
        .into_iter()
        .map(|(k, v)| {
            let field = match v {
                serde_json::Value::Number(num) => match num.as_i64() {
                    Some(i) => FieldValue::Integer(i),
                    None => FieldValue::Float(num.as_f64().unwrap_or(f64::NAN)),
                },
                serde_json::Value::String(s) => FieldValue::Text(s),
                other => FieldValue::Other(other.to_string()),
            };
            (k, field)
        })
        .collect())
}

async fn register_panel(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let fields = match json_fields(&body) {
        Ok(f) => f,
        Err(msg) => return error_response(StatusCode::BAD_REQUEST, "invalid-datasheet", msg),
    };
    let datasheet = match datasheet_from_fields(fields) {
        Ok(ds) => ds,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, e.class(), e.to_string()),
    };
    match state.registry.register(datasheet, &state.ctx) {
        Ok(entry) => {
            let body = RegisteredBody {
                panel_id: entry.id.clone(),
                name: entry.datasheet.name.clone(),
                estimated: EstimatedBody {
                    n: entry.params.n,
                    rs_ohm: entry.params.rs,
                    i0_stc_a: entry.params.i0_stc,
                    iterations: entry.params.iterations,
                    residual: entry.params.residual,
                },
            };
            (StatusCode::CREATED, Json(body)).into_response()
        }
        Err(RegistryError::Estimation(e)) => {
            error_response(StatusCode::UNPROCESSABLE_ENTITY, e.class(), e.to_string())
        }
    }
}

async fn panel_curve(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    query: Result<Query<CurveQuery>, QueryRejection>,
) -> Response {
    let Query(query) = match query {
        Ok(q) => q,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, "bad-query", e.body_text()),
    };
    let Some(entry) = state.registry.get(&id) else {
        return error_response(
            StatusCode::NOT_FOUND,
            "unknown-panel",
            format!("no panel with id `{id}`"),
        );
    };
    let points = query.points.unwrap_or(DEFAULT_POINTS);
    if !(2..=MAX_POINTS).contains(&points) {
        return error_response(
            StatusCode::BAD_REQUEST,
            "bad-query",
            format!("points must be in [2, {MAX_POINTS}], got {points}"),
        );
    }
    let env = match EnvConditions::from_interface_units(
        query.irradiance_w_m2.unwrap_or(1000.0),
        query.temperature_c.unwrap_or(25.0),
        &state.ctx,
    ) {
        Ok(env) => env,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, "bad-query", e.to_string()),
    };
    let curve = match generate_iv_curve(&entry.datasheet, &entry.params, &env, &state.ctx, points)
    {
        Ok(c) => c,
        Err(e) => {
            return error_response(StatusCode::UNPROCESSABLE_ENTITY, e.class(), e.to_string())
        }
    };
    let mpp = track_mpp(&curve);
    Json(CurveBody {
        voltage_v: curve.voltage,
        current_a: curve.current,
        power_w: curve.power,
        mpp: MppBody {
            v_mp_v: mpp.v_mp,
            i_mp_a: mpp.i_mp,
            p_mp_w: mpp.p_mp,
        },
    })
    .into_response()
}
