//! Requirement, stock-balance and capacity computations.
//!
//! All functions are pure and only check dimensions; nonnegativity of the
//! inputs is the caller's job (see [`crate::model::validate_instance`]).

use crate::error::{Error, Result};
use crate::model::{
    Addition, DemandVector, ProductionVector, RecipeMatrix, RequirementMatrix, StockState,
    StockVector,
};

/// A capacity ratio this close below an integer counts as that integer.
pub const RATIO_SNAP: f64 = 1e-9;

/// `diag(demand) * recipes`: tons of each component needed per product.
pub fn component_requirements(
    recipes: &RecipeMatrix,
    demand: &DemandVector,
) -> Result<RequirementMatrix> {
    if demand.len() != recipes.n_products() {
        return Err(Error::dimension(format!(
            "demand has {} values but recipes have {} products",
            demand.len(),
            recipes.n_products()
        )));
    }
    let values = recipes
        .rows()
        .zip(demand.as_slice())
        .map(|(row, &p)| row.iter().map(|&w| p * w).collect())
        .collect();
    Ok(RequirementMatrix { values })
}

/// Subtracts the column sums of `requirements` from `stock` and reports the
/// per-component shortfall. Remaining values in `[-tol, 0)` are not flagged.
pub fn stock_state(
    requirements: &RequirementMatrix,
    stock: &StockVector,
    tol: f64,
) -> Result<StockState> {
    let m = stock.len();
    if requirements.values.iter().any(|row| row.len() != m) {
        return Err(Error::dimension(format!(
            "requirements have {} columns but stock has {} values",
            requirements.n_columns(),
            m
        )));
    }
    let mut used = vec![0.0; m];
    for row in &requirements.values {
        for (u, &c) in used.iter_mut().zip(row) {
            *u += c;
        }
    }
    let remaining: Vec<f64> = stock
        .as_slice()
        .iter()
        .zip(&used)
        .map(|(s, u)| s - u)
        .collect();
    let required: Vec<f64> = remaining
        .iter()
        .zip(used.iter().zip(stock.as_slice()))
        .map(|(&r, (&u, &s))| if r < -tol { u - s } else { 0.0 })
        .collect();
    let negative = remaining.iter().any(|&r| r < -tol);
    Ok(StockState {
        used,
        remaining,
        required,
        negative,
    })
}

/// Largest whole number of tons of each product that the stock supports,
/// considering each product on its own.
pub fn max_quantities(recipes: &RecipeMatrix, stock: &StockVector) -> Result<ProductionVector> {
    if stock.len() != recipes.n_components() {
        return Err(Error::dimension(format!(
            "stock has {} values but recipes have {} components",
            stock.len(),
            recipes.n_components()
        )));
    }
    Ok(ProductionVector(
        recipes.rows().map(|row| row_capacity(row, stock.as_slice())).collect(),
    ))
}

fn row_capacity(row: &[f64], stock: &[f64]) -> u64 {
    let mut cap: Option<u64> = None;
    for (&w, &s) in row.iter().zip(stock) {
        if w > 0.0 {
            let bound = whole_units(s.max(0.0) / w);
            cap = Some(cap.map_or(bound, |c| c.min(bound)));
        }
    }
    // Validated recipes always have a positive weight.
    cap.unwrap_or(0)
}

/// Integer part of a nonnegative ratio, snapping values just below an
/// integer up to it.
pub(crate) fn whole_units(ratio: f64) -> u64 {
    let up = ratio.ceil();
    let v = if up - ratio <= RATIO_SNAP { up } else { ratio.floor() };
    // saturating float-to-int cast
    v as u64
}

/// Stock left after producing `addition` on top of `stock`. Float dust
/// below zero is clamped.
pub fn deduct(recipes: &RecipeMatrix, stock: &StockVector, addition: Addition) -> StockVector {
    let q = addition.quantity as f64;
    let quantities = stock
        .as_slice()
        .iter()
        .zip(recipes.row(addition.product))
        .map(|(&s, &w)| (s - q * w).max(0.0))
        .collect();
    StockVector {
        quantities,
        as_of: stock.as_of,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> RecipeMatrix {
        RecipeMatrix::from_weights(vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5]]).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-9, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn identity_recipe() {
        let r = RecipeMatrix::from_weights(vec![vec![1.0]]).unwrap();
        let c = component_requirements(&r, &vec![5.0].into()).unwrap();
        assert_eq!(c.values, vec![vec![5.0]]);
    }

    #[test]
    fn worked_requirements() {
        let c = component_requirements(&worked(), &vec![4.0, 2.0].into()).unwrap();
        assert_close(&c.values[0], &[2.0, 2.0, 0.0]);
        assert_close(&c.values[1], &[0.4, 0.6, 1.0]);
    }

    #[test]
    fn zero_demand_gives_zero_requirements() {
        let c = component_requirements(&worked(), &vec![0.0, 0.0].into()).unwrap();
        assert!(c.values.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn requirements_dimension_mismatch() {
        let err = component_requirements(&worked(), &vec![1.0].into()).unwrap_err();
        assert_eq!(err.code(), "DIMENSION_MISMATCH");
    }

    #[test]
    fn feasible_state() {
        let c = RequirementMatrix {
            values: vec![vec![2.0, 2.0, 0.0], vec![0.4, 0.6, 1.0]],
        };
        let s = stock_state(&c, &vec![10.0, 9.0, 5.0].into(), 1e-9).unwrap();
        assert_close(&s.used, &[2.4, 2.6, 1.0]);
        assert_close(&s.remaining, &[7.6, 6.4, 4.0]);
        assert_eq!(s.required, vec![0.0, 0.0, 0.0]);
        assert!(!s.negative);
    }

    #[test]
    fn overflow_state() {
        let c = RequirementMatrix {
            values: vec![vec![12.5, 12.5, 0.0], vec![3.0, 4.5, 7.5]],
        };
        let s = stock_state(&c, &vec![10.0, 9.0, 5.0].into(), 1e-9).unwrap();
        assert_close(&s.used, &[15.5, 17.0, 7.5]);
        assert!(s.negative);
        assert_close(&s.required, &[5.5, 8.0, 2.5]);
    }

    #[test]
    fn zero_requirements_leave_stock() {
        let c = RequirementMatrix {
            values: vec![vec![0.0; 3]; 2],
        };
        let s = stock_state(&c, &vec![3.0, 2.0, 1.0].into(), 1e-9).unwrap();
        assert_eq!(s.used, vec![0.0; 3]);
        assert_eq!(s.remaining, vec![3.0, 2.0, 1.0]);
        assert!(!s.negative);
    }

    #[test]
    fn dust_within_tolerance_is_not_shortfall() {
        let c = RequirementMatrix {
            values: vec![vec![1.0 + 1e-12]],
        };
        let s = stock_state(&c, &vec![1.0].into(), 1e-9).unwrap();
        assert!(!s.negative);
        assert_eq!(s.required, vec![0.0]);
    }

    #[test]
    fn worked_capacities() {
        let caps = max_quantities(&worked(), &vec![7.6, 6.4, 4.0].into()).unwrap();
        assert_eq!(caps.0, vec![12, 8]);
        let caps = max_quantities(&worked(), &vec![10.0, 9.0, 5.0].into()).unwrap();
        assert_eq!(caps.0, vec![18, 10]);
    }

    #[test]
    fn zero_stock_zero_capacity() {
        let caps = max_quantities(&worked(), &vec![0.0; 3].into()).unwrap();
        assert!(caps.is_zero());
    }

    #[test]
    fn zero_weight_column_skipped() {
        let r = RecipeMatrix::from_weights(vec![vec![0.0, 1.0]]).unwrap();
        let caps = max_quantities(&r, &vec![5.0, 2.0].into()).unwrap();
        assert_eq!(caps.0, vec![2]);
    }

    #[test]
    fn near_integer_ratio_snaps_up() {
        // 0.6 / 0.2 evaluates to 2.9999999999999996
        assert_eq!(whole_units(0.6 / 0.2), 3);
        assert_eq!(whole_units(2.5), 2);
        assert_eq!(whole_units(0.0), 0);
    }

    #[test]
    fn large_plants_are_not_capped() {
        let r = RecipeMatrix::from_weights(vec![vec![1.0]]).unwrap();
        let caps = max_quantities(&r, &vec![25_000.0].into()).unwrap();
        assert_eq!(caps.0, vec![25_000]);
    }

    #[test]
    fn deduct_clamps_dust() {
        let r = RecipeMatrix::from_weights(vec![vec![0.2, 0.8]]).unwrap();
        let left = deduct(&r, &vec![0.6, 5.0].into(), Addition { product: 0, quantity: 3 });
        assert!(left[0] >= 0.0 && left[0] < 1e-12);
        assert!((left[1] - 2.6).abs() < 1e-12);
    }
}
