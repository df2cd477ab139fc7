//! Walks the whole plan tree: every branch choice, the forced steps after
//! it and the stock left at each node.
//!
//! $ cargo run --example plan_tree

use blendplan::format::bracketed;
use blendplan::{plan, DemandVector, EngineConfig, PlanNode, RecipeMatrix, StockVector};

fn show(node: &PlanNode, recipes: &RecipeMatrix, depth: usize) {
    let pad = "  ".repeat(depth);
    match node.choice {
        Some(c) => println!("{pad}option {}: {} +{} t", c.option, recipes.products()[c.product], c.quantity),
        None => println!("{pad}root"),
    }
    for a in &node.forced {
        println!("{pad}  then {} +{} t (only choice)", recipes.products()[a.product], a.quantity);
    }
    println!("{pad}  stock {}", bracketed(node.remaining.as_slice()));
    for child in &node.children {
        show(child, recipes, depth + 1);
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let recipes = RecipeMatrix::new(
        vec!["REGULAR".into(), "PREMIUM".into(), "SUPER".into()],
        vec!["NAPHTHA".into(), "REFORMATE".into(), "ALKYLATE".into()],
        vec![vec![0.5, 0.3, 0.2], vec![0.2, 0.4, 0.4], vec![0.1, 0.3, 0.6]],
    )?;
    let stock = StockVector::new(vec![40.0, 45.0, 50.0]);
    let demand = DemandVector(vec![20.0, 10.0, 5.0]);

    let tree = plan(&recipes, &stock, &demand, &EngineConfig::default())?
        .feasible()
        .ok_or("stock does not cover the demand")?;
    show(&tree.root, &recipes, 0);
    println!("{} leaves", tree.leaf_count());
    Ok(())
}
