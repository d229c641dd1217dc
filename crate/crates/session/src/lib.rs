//! Turn-by-turn HTTP play for the Monty Hall game catalog, plus stateless
//! analysis and batch-simulation endpoints.
//!
//! | method | path                      | body / query                       |
//! |--------|---------------------------|------------------------------------|
//! | GET    | `/games`                  |                                    |
//! | GET    | `/analysis`               | `?game=&q=&q1=&q2=&q3=&state=`     |
//! | POST   | `/simulate`               | game fields + `strategy`, `trials` |
//! | GET    | `/stats`                  | same query as `/analysis`          |
//! | POST   | `/sessions`               | game fields + optional `seed`      |
//! | GET    | `/sessions/{id}`          |                                    |
//! | POST   | `/sessions/{id}/pick`     | `{"door": n}` (1-based)            |
//! | POST   | `/sessions/{id}/decision` | `{"action": "stick"}` or `{"action": "switch", "to": n}` |

pub mod api;
pub mod session;
pub mod store;

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::Router;
use tower_http::services::{ServeDir, ServeFile};

pub use api::router;
pub use session::{replay, DecisionRequest, Event, GameChoice, Outcome, Phase, Session};
pub use store::{verify_transcript, SessionStore, DEFAULT_IDLE_TIMEOUT};

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub addr: SocketAddr,
    /// Built web UI; served for any path the API does not claim.
    pub static_dir: Option<PathBuf>,
    pub transcript: Option<PathBuf>,
    pub idle_timeout: Duration,
}

/// API routes, with `static_dir` (if any) as the fallback. Unknown paths
/// under the static root fall back to its `index.html`.
pub fn app(store: Arc<SessionStore>, static_dir: Option<PathBuf>) -> Router {
    let api = router(store);
    match static_dir {
        Some(dir) => {
            let index = dir.join("index.html");
            api.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(index)))
        }
        None => api,
    }
}

pub fn build_store(config: &ServeConfig) -> io::Result<Arc<SessionStore>> {
    let store = SessionStore::new(config.idle_timeout);
    let store = match &config.transcript {
        Some(path) => store.with_transcript(path)?,
        None => store,
    };
    Ok(Arc::new(store))
}

/// Binds and serves until `shutdown` resolves. Idle sessions are reaped in
/// the background.
pub async fn serve(config: ServeConfig, shutdown: impl Future<Output = ()> + Send + 'static) -> io::Result<()> {
    let store = build_store(&config)?;
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");

    let reaper_store = Arc::clone(&store);
    let period = (config.idle_timeout / 4).clamp(Duration::from_millis(100), Duration::from_secs(60));
    let reaper = tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            let n = reaper_store.reap_expired();
            if n > 0 {
                tracing::debug!(expired = n, "reaped idle sessions");
            }
        }
    });

    let result = axum::serve(listener, app(store, config.static_dir)).with_graceful_shutdown(shutdown).await;
    reaper.abort();
    result
}
