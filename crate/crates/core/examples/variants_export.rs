//! Every distinct end state of the plan tree, biggest total first, exported
//! as CSV or JSON.
//!
//! $ cargo run --example variants_export -- csv
//! variant,BLEND1,BLEND2
//! 1,12,10
//! 2,16,3

use blendplan::reporting::{export_variants, ExportFormat};
use blendplan::{enumerate_variants, plan, DemandVector, EngineConfig, RecipeMatrix, StockVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let format: ExportFormat = std::env::args().nth(1).unwrap_or_else(|| "csv".into()).parse()?;
    let recipes = RecipeMatrix::new(
        vec!["BLEND1".into(), "BLEND2".into()],
        vec!["C1".into(), "C2".into(), "C3".into()],
        vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5]],
    )?;
    let cfg = EngineConfig::default();
    let tree = plan(&recipes, &StockVector::new(vec![10.0, 9.0, 5.0]), &DemandVector(vec![4.0, 2.0]), &cfg)?
        .feasible()
        .ok_or("infeasible")?;
    let variants = enumerate_variants(&tree, &cfg)?;
    println!("{}", String::from_utf8(export_variants(&variants, recipes.products(), format))?);
    Ok(())
}
