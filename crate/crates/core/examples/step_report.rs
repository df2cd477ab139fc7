//! The iteration table for every path, in text and CSV, plus the complete
//! report the CLI prints.
//!
//! $ cargo run --example step_report

use blendplan::reporting::{render_full_report, StepReport};
use blendplan::{plan, DemandVector, EngineConfig, RecipeMatrix, StockVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let recipes = RecipeMatrix::new(
        vec!["REGULAR".into(), "PREMIUM".into(), "SUPER".into()],
        vec!["NAPHTHA".into(), "REFORMATE".into(), "ALKYLATE".into()],
        vec![vec![0.5, 0.3, 0.2], vec![0.2, 0.4, 0.4], vec![0.1, 0.3, 0.6]],
    )?;
    let cfg = EngineConfig::default();
    let tree = plan(
        &recipes,
        &StockVector::new(vec![40.0, 45.0, 50.0]),
        &DemandVector(vec![20.0, 10.0, 5.0]),
        &cfg,
    )?
    .feasible()
    .ok_or("infeasible")?;

    let report = StepReport::from_tree(&tree);
    print!("{}", report.to_text());
    println!();
    print!("{}", report.to_csv());
    println!();
    print!("{}", render_full_report(&tree, &cfg)?);
    Ok(())
}
