//! Stock from a file, an inline list or a polled HTTP feed.
//!
//! $ cargo run --example stock_feed -- inline:10,9,5
//! $ cargo run --example stock_feed -- http://127.0.0.1:8080/stock
//!
//! `BLENDPLAN_STOCK_URL` replaces whatever source was given.

use std::time::Duration;

use blendplan::format::bracketed;
use blendplan::ingestion::{StockFeed, StockSource};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arg = std::env::args().nth(1).unwrap_or_else(|| "inline:10,9,5".into());
    let mut source: StockSource = arg.parse()?;
    if source.poll_interval.is_some() {
        source.poll_interval = Some(1);
    }
    let source = source.with_env_override();
    println!("{:?} {}", source.kind, source.location);

    let feed = StockFeed::spawn(&source, 3)?;
    for _ in 0..3 {
        match feed.snapshot() {
            Ok(s) => println!("{} as of {}", bracketed(s.as_slice()), s.as_of.unwrap_or(0)),
            Err(e) => println!("{e}"),
        }
        if let Some(e) = feed.last_error() {
            println!("  last fetch failed: {e}");
        }
        std::thread::sleep(Duration::from_millis(1200));
    }
    Ok(())
}
