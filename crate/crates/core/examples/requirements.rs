//! Component tons needed for a demand.
//!
//! $ cargo run --example requirements -- 4,2

use blendplan::format::{matrix_table, num};
use blendplan::ingestion::parse_demand;
use blendplan::{component_requirements, stock_state, RecipeMatrix, StockVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let recipes = RecipeMatrix::new(
        vec!["BLEND1".into(), "BLEND2".into()],
        vec!["C1".into(), "C2".into(), "C3".into()],
        vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5]],
    )?;
    let arg = std::env::args().nth(1).unwrap_or_else(|| "4,2".into());
    let demand = parse_demand(&arg, recipes.n_products())?;

    let req = component_requirements(&recipes, &demand)?;
    print!("{}", matrix_table("product", recipes.products(), recipes.components(), &req.values));

    // column sums; zero stock so everything used shows as required
    let zero = StockVector::new(vec![0.0; recipes.n_components()]);
    let state = stock_state(&req, &zero, 1e-9)?;
    for (c, used) in recipes.components().iter().zip(&state.used) {
        println!("{c}: {} t", num(*used));
    }
    Ok(())
}
