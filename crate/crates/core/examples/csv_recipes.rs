//! Reading and writing recipe CSV, and what validation reports for bad files.
//!
//! $ cargo run --example csv_recipes

use blendplan::ingestion::{parse_recipes_csv, write_recipes_csv};

const GOOD: &str = "name,NAPHTHA,REFORMATE,ALKYLATE\r\nREGULAR,0.5,0.3,0.2\r\nPREMIUM,0.2,0.4,0.4\r\n";

const BAD: &[&str] = &[
    "BLEND1,0.5,abc",
    "BLEND1,0.5,0.4",
    "BLEND1,0,0\nBLEND2,1,0",
    "BLEND1,1,0\nBLEND1,0,1",
    "BLEND1,0.5,0.5\nBLEND2,1",
];

fn main() {
    let recipes = parse_recipes_csv(GOOD).expect("valid recipes");
    println!("{} x {}: {:?}", recipes.n_products(), recipes.n_components(), recipes.components());
    let text = write_recipes_csv(&recipes);
    print!("{text}");
    assert_eq!(parse_recipes_csv(&text).unwrap(), recipes);

    for input in BAD {
        let errors = parse_recipes_csv(input).unwrap_err();
        println!("{input:?}");
        for e in errors.iter() {
            println!("  {e}");
        }
    }
}
