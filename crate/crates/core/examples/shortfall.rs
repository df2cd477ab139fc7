//! A demand the stock cannot cover, and by how much.
//!
//! $ cargo run --example shortfall
//! Required blended products cannot be made
//! C1: used 15.5, stock 10, short 5.5
//! ...

use blendplan::format::num;
use blendplan::{plan, DemandVector, EngineConfig, Outcome, RecipeMatrix, StockVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let recipes = RecipeMatrix::from_weights(vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5]])?;
    let stock = StockVector::new(vec![10.0, 9.0, 5.0]);
    let demand = DemandVector(vec![25.0, 15.0]);

    match plan(&recipes, &stock, &demand, &EngineConfig::default())? {
        Outcome::Shortfall(state) => {
            println!("Required blended products cannot be made");
            for (j, c) in recipes.components().iter().enumerate() {
                println!(
                    "{c}: used {}, stock {}, short {}",
                    num(state.used[j]),
                    num(stock[j]),
                    num(state.required[j])
                );
            }
        }
        Outcome::Feasible(_) => println!("stock covers the demand"),
    }
    Ok(())
}
