//! The HTTP service over an in-memory instance.
//!
//! $ cargo run --example serve -- 8080
//! $ curl -s localhost:8080/plan -d '{"demand":[4,2]}'
//! $ curl -s localhost:8080/sessions -d '{"demand":[4,2]}'
//! $ curl -s localhost:8080/sessions/<id>/choose -d '{"option":1}'
//! $ curl -s 'localhost:8080/sessions/<id>/report?format=csv'

use std::sync::Arc;

use blendplan::ingestion::StockSource;
use blendplan::service::{router, AppState};
use blendplan::{EngineConfig, RecipeMatrix};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let port: u16 = std::env::args().nth(1).map_or(Ok(8080), |p| p.parse())?;
    let recipes = RecipeMatrix::new(
        vec!["BLEND1".into(), "BLEND2".into()],
        vec!["C1".into(), "C2".into(), "C3".into()],
        vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5]],
    )?;
    let state = AppState::new(recipes, StockSource::inline(&[10.0, 9.0, 5.0]), EngineConfig::default())?;

    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    println!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(state)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
