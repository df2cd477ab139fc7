//! Whole tons of each product the stock supports if nothing else is made.
//!
//! $ cargo run --example capacity -- 10,9,5
//! BLEND1 18
//! BLEND2 10

use blendplan::ingestion::parse_quantities;
use blendplan::{max_quantities, RecipeMatrix, StockVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let recipes = RecipeMatrix::new(
        vec!["BLEND1".into(), "BLEND2".into()],
        vec!["C1".into(), "C2".into(), "C3".into()],
        vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5]],
    )?;
    let stock = StockVector::new(parse_quantities(&std::env::args().nth(1).unwrap_or_else(|| "10,9,5".into()))?);
    let caps = max_quantities(&recipes, &stock)?;
    for (name, cap) in recipes.products().iter().zip(caps.as_slice()) {
        println!("{name} {cap}");
    }
    Ok(())
}
