//! Steps through the tree one choice at a time, like an operator would.
//! Options come from the command line, or stdin when none are given.
//!
//! $ cargo run --example session_walk -- 1
//! $ cargo run --example session_walk        # prompts

use std::io::{BufRead, Write};

use blendplan::reporting::StepReport;
use blendplan::{open_session, DemandVector, EngineConfig, RecipeMatrix, StockVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let recipes = RecipeMatrix::new(
        vec!["BLEND1".into(), "BLEND2".into()],
        vec!["C1".into(), "C2".into(), "C3".into()],
        vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5]],
    )?;
    let mut session = open_session(
        &recipes,
        &StockVector::new(vec![10.0, 9.0, 5.0]),
        &DemandVector(vec![4.0, 2.0]),
        &EngineConfig::default(),
    )?
    .feasible()
    .ok_or("infeasible")?;

    let mut scripted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    scripted.reverse();
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();

    while !session.finished() {
        for c in session.choices() {
            println!("  {}: {} +{} t", c.option, recipes.products()[c.product], c.quantity);
        }
        let option = match scripted.pop() {
            Some(o) => o,
            None if std::env::args().len() > 1 => break,
            None => {
                print!("option> ");
                std::io::stdout().flush()?;
                match lines.next() {
                    Some(line) => line?.trim().parse().unwrap_or(0),
                    None => break,
                }
            }
        };
        if let Err(e) = session.choose(option) {
            println!("{e}");
        }
    }
    print!("{}", StepReport::from_session(&session).to_text());
    Ok(())
}
