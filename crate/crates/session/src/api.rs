//! HTTP routes. Request and response bodies are described by the JSON
//! schemas in `schemas/`.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pbr_monty::engine::{enumerate_joint, Strategy};
use pbr_monty::envelope::{analysis_envelope, simulation_envelope, OutputEnvelope};
use pbr_monty::games::{crossover_q, params_from_parts, GameKind, GamesError, PrepState};
use pbr_monty::rational::{self, parse_rational, ratio, to_f64, ExactValue, Rational};
use pbr_monty::Execution;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use uuid::Uuid;

use crate::session::{DecisionRequest, Disclosure, Event, GameChoice, Phase, PlayError, RevealKind, Session};
use crate::store::{GameTally, SessionStore};

/// Upper bound on `trials` for one `POST /simulate` call.
pub const MAX_BATCH_TRIALS: u64 = 10_000_000;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn not_found(id: Uuid) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no live session {id}"))
    }
}

impl From<GamesError> for ApiError {
    fn from(e: GamesError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_game", e.to_string())
    }
}

impl From<PlayError> for ApiError {
    fn from(e: PlayError) -> Self {
        match e {
            PlayError::WrongPhase { .. } => ApiError::new(StatusCode::CONFLICT, "wrong_phase", e.to_string()),
            PlayError::DoorOutOfRange { .. } | PlayError::IllegalSwitch { .. } => {
                ApiError::new(StatusCode::BAD_REQUEST, "illegal_move", e.to_string())
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.code, "message": self.message }))).into_response()
    }
}

/// A rational given as `"num/den"`, a dyadic decimal string, an integer, or
/// `{"num","den"}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum RationalInput {
    Int(i64),
    Text(String),
    Exact(ExactValue),
}

impl RationalInput {
    fn value(&self, name: &str) -> Result<Rational, ApiError> {
        match self {
            RationalInput::Int(n) => Ok(rational::int(*n)),
            RationalInput::Text(t) => parse_rational(t).map_err(|e| ApiError::bad_request(format!("{name}: {e}"))),
            RationalInput::Exact(v) => Ok(v.0.clone()),
        }
    }
}

/// Game selection shared by every endpoint. Give either `q` (split equally)
/// or any of `q1, q2, q3` (missing ones are zero); neither means the
/// default ψ-epistemic parameters.
#[derive(Clone, Debug, Default, Deserialize)]
pub struct GameQuery {
    pub game: String,
    #[serde(default)]
    pub q: Option<RationalInput>,
    #[serde(default)]
    pub q1: Option<RationalInput>,
    #[serde(default)]
    pub q2: Option<RationalInput>,
    #[serde(default)]
    pub q3: Option<RationalInput>,
    /// Preparation 1..=4; ignored by games not built on one.
    #[serde(default)]
    pub state: Option<u8>,
}

impl GameQuery {
    pub fn resolve(&self) -> Result<GameChoice, ApiError> {
        let game: GameKind = self.game.parse()?;
        let state = self.state.map(PrepState::new).transpose()?.unwrap_or_default();
        let value = |name: &str, q: &Option<RationalInput>| q.as_ref().map(|q| q.value(name)).transpose();
        let params = params_from_parts(
            value("q", &self.q)?,
            [value("q1", &self.q1)?, value("q2", &self.q2)?, value("q3", &self.q3)?],
        )?;
        if params.is_some() && !game.takes_q() {
            return Err(GamesError::UnexpectedParams(game).into());
        }
        Ok(GameChoice { game, params, state })
    }
}

/// What a client may see of a session. Before `phase = finished` there is
/// no prize door, seed, or transcript here.
#[derive(Clone, Debug, Serialize)]
pub struct SessionView {
    pub id: Uuid,
    pub game: GameKind,
    pub label: String,
    pub doors: usize,
    pub door_labels: Vec<String>,
    pub parameters: Map<String, Value>,
    pub phase: Phase,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub picked: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub revealed_door: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goat_or_prize: Option<RevealKind>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub switch_targets: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Disclosure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Vec<Event>>,
}

impl SessionView {
    fn of(id: Uuid, s: &Session) -> Self {
        let spec = s.spec();
        let reveal = s.events().iter().find_map(|e| match e {
            Event::Picked { reveal, .. } => Some(*reveal),
            _ => None,
        });
        let finished = s.phase() == Phase::Finished;
        SessionView {
            id,
            game: s.choice().game,
            label: spec.label.clone(),
            doors: spec.doors,
            door_labels: (0..spec.doors).map(|d| spec.door_name(d)).collect(),
            parameters: s.choice().echo(),
            phase: s.phase(),
            picked: s.picked(),
            revealed_door: s.revealed(),
            goat_or_prize: reveal,
            switch_targets: s.switch_targets(),
            result: s.disclosure(),
            transcript: finished.then(|| s.events().to_vec()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct CreateSessionRequest {
    #[serde(flatten)]
    pub game: GameQuery,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct PickRequest {
    pub door: usize,
}

/// `{"action": "stick"}` or `{"action": "switch", "to": 3}`; `switch_to`
/// is accepted as an alias for `to`.
#[derive(Clone, Debug, Deserialize)]
pub struct DecisionBody {
    pub action: String,
    #[serde(default, alias = "switch_to")]
    pub to: Option<usize>,
}

impl DecisionBody {
    fn request(&self) -> Result<DecisionRequest, ApiError> {
        match (self.action.as_str(), self.to) {
            ("stick", None) => Ok(DecisionRequest::Stick),
            ("stick", Some(_)) => Err(ApiError::bad_request("`stick` takes no target door")),
            ("switch", to) => Ok(DecisionRequest::Switch { to }),
            (other, _) => Err(ApiError::bad_request(format!("unknown action `{other}` (expected stick or switch)"))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct SimulateRequest {
    #[serde(flatten)]
    pub game: GameQuery,
    pub strategy: Strategy,
    pub trials: u64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalRates {
    pub stick_given_goat: f64,
    pub switch_given_goat: f64,
    /// Three binomial standard errors at the exact rate and current counts.
    pub stick_three_sigma: f64,
    pub switch_three_sigma: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StatsResponse {
    pub game: GameKind,
    pub label: String,
    pub exact: OutputEnvelope,
    pub tallies: GameTally,
    pub empirical: EmpiricalRates,
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/games", get(list_games))
        .route("/analysis", get(analysis))
        .route("/simulate", post(simulate_batch))
        .route("/stats", get(stats))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/pick", post(pick))
        .route("/sessions/{id}/decision", post(decide))
        .with_state(store)
}

fn exact_json(r: &Rational) -> Value {
    serde_json::to_value(ExactValue::from(r)).expect("rationals serialize")
}

async fn list_games() -> Json<Value> {
    let games: Vec<Value> = GameKind::ALL
        .iter()
        .map(|kind| {
            let spec = pbr_monty::games::build_game(*kind, None, PrepState::default()).expect("catalog games build");
            let mut g = json!({
                "name": kind.name(),
                "doors": kind.doors(),
                "door_labels": (0..spec.doors).map(|d| spec.door_name(d)).collect::<Vec<_>>(),
                "takes_q": kind.takes_q(),
                "takes_state": kind.takes_state(),
            });
            if kind.takes_state() {
                g["states"] = json!([1, 2, 3, 4]);
            }
            if kind.takes_q() {
                let d = pbr_monty::games::default_epistemic_params();
                g["parameters"] = json!({
                    "q1": { "min": exact_json(&rational::zero()), "max": exact_json(&ratio(1, 4)), "default": exact_json(d.q1()) },
                    "q2": { "min": exact_json(&rational::zero()), "max": exact_json(&ratio(1, 4)), "default": exact_json(d.q2()) },
                    "q3": { "min": exact_json(&rational::zero()), "max": exact_json(&ratio(1, 2)), "default": exact_json(d.q3()) },
                });
                g["crossover_q"] = exact_json(&crossover_q());
            }
            g
        })
        .collect();
    Json(json!({ "games": games }))
}

async fn analysis(Query(q): Query<GameQuery>) -> Result<Json<OutputEnvelope>, ApiError> {
    let choice = q.resolve()?;
    Ok(Json(analysis_envelope(choice.game, choice.params.as_ref(), choice.state)?))
}

async fn simulate_batch(Json(req): Json<SimulateRequest>) -> Result<Json<OutputEnvelope>, ApiError> {
    let choice = req.game.resolve()?;
    if req.trials == 0 || req.trials > MAX_BATCH_TRIALS {
        return Err(ApiError::bad_request(format!("trials must be in 1..={MAX_BATCH_TRIALS}")));
    }
    let seed = req.seed.unwrap_or_else(rand::random);
    let env = tokio::task::spawn_blocking(move || {
        simulation_envelope(
            choice.game,
            choice.params.as_ref(),
            choice.state,
            req.strategy,
            req.trials,
            seed,
            Execution::default(),
        )
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(env))
}

async fn stats(State(store): State<Arc<SessionStore>>, Query(q): Query<GameQuery>) -> Result<Json<StatsResponse>, ApiError> {
    let choice = q.resolve()?;
    let spec = choice.build()?;
    let analysis = enumerate_joint(&spec).map_err(GamesError::from)?;
    let exact = analysis_envelope(choice.game, choice.params.as_ref(), choice.state)?;
    let tallies = store.tally(&spec.label);
    let sigma = |p: &Option<Rational>, n: u64| {
        let p = p.as_ref().map_or(0.0, to_f64);
        3.0 * (p * (1.0 - p) / n.max(1) as f64).sqrt()
    };
    let empirical = EmpiricalRates {
        stick_given_goat: tallies.stick.rate(),
        switch_given_goat: tallies.switch.rate(),
        stick_three_sigma: sigma(&analysis.p_win_stick_given_goat, tallies.stick.plays),
        switch_three_sigma: sigma(&analysis.p_win_switch_given_goat, tallies.switch.plays),
    };
    Ok(Json(StatsResponse { game: choice.game, label: spec.label, exact, tallies, empirical }))
}

async fn create_session(
    State(store): State<Arc<SessionStore>>,
    Json(req): Json<CreateSessionRequest>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let choice = req.game.resolve()?;
    let seed = req.seed.unwrap_or_else(rand::random);
    let session = Session::create(choice, seed)?;
    let id = store.insert(session);
    let view = store.with_session(id, |s| SessionView::of(id, s)).ok_or_else(|| ApiError::not_found(id))?;
    tracing::debug!(%id, label = %view.label, "session created");
    Ok((StatusCode::CREATED, Json(view)))
}

fn parse_id(raw: &str) -> Result<Uuid, ApiError> {
    raw.parse()
        .map_err(|_| ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no live session {raw}")))
}

async fn get_session(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let id = parse_id(&id)?;
    store.with_session(id, |s| SessionView::of(id, s)).map(Json).ok_or_else(|| ApiError::not_found(id))
}

async fn pick(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    Json(req): Json<PickRequest>,
) -> Result<Json<SessionView>, ApiError> {
    let id = parse_id(&id)?;
    store
        .with_session(id, |s| -> Result<SessionView, PlayError> {
            s.pick(req.door)?;
            Ok(SessionView::of(id, s))
        })
        .ok_or_else(|| ApiError::not_found(id))?
        .map(Json)
        .map_err(ApiError::from)
}

async fn decide(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    Json(body): Json<DecisionBody>,
) -> Result<Json<SessionView>, ApiError> {
    let id = parse_id(&id)?;
    let request = body.request()?;
    store
        .with_session(id, |s| -> Result<SessionView, PlayError> {
            s.decide(request)?;
            Ok(SessionView::of(id, s))
        })
        .ok_or_else(|| ApiError::not_found(id))?
        .map(Json)
        .map_err(ApiError::from)
}
