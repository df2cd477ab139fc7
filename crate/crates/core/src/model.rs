//! Domain types shared by every stage of planning.
//!
//! Recipes are validated once on construction and are immutable afterwards.
//! Stock and demand are thin wrappers; [`validate_instance`] is the gate that
//! checks them against a recipe matrix before any planning happens.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ErrorCode, ValidationError, ValidationErrors};

/// Tunables for validation and tree construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Allowed deviation of a recipe row sum from 1.
    pub row_sum_tolerance: f64,
    /// Negative remaining stock above `-shortfall_tolerance` tons is treated as zero.
    pub shortfall_tolerance: f64,
    pub max_tree_depth: usize,
    pub max_variants: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            row_sum_tolerance: 1e-6,
            shortfall_tolerance: 1e-9,
            max_tree_depth: 64,
            max_variants: 100_000,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), ValidationErrors> {
        let ok = self.row_sum_tolerance > 0.0
            && self.shortfall_tolerance > 0.0
            && self.max_tree_depth > 0
            && self.max_variants > 0;
        if ok {
            Ok(())
        } else {
            Err(ValidationError::new(
                ErrorCode::NegativeValue,
                "engine configuration values must all be positive",
            )
            .into())
        }
    }
}

/// Unvalidated recipe data, as uploaded or parsed. This is also the JSON
/// wire shape of a recipe matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecipes {
    pub products: Vec<String>,
    pub components: Vec<String>,
    pub weights: Vec<Vec<f64>>,
}

/// `n x m` matrix of mass fractions: row `i` holds the tons of each
/// component consumed per ton of blended product `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecipeMatrix {
    products: Vec<String>,
    components: Vec<String>,
    weights: Vec<f64>,
}

impl RecipeMatrix {
    /// Validates with the default row-sum tolerance.
    pub fn new(
        products: Vec<String>,
        components: Vec<String>,
        weights: Vec<Vec<f64>>,
    ) -> Result<Self, ValidationErrors> {
        validate_recipes(
            RawRecipes {
                products,
                components,
                weights,
            },
            EngineConfig::default().row_sum_tolerance,
        )
    }

    /// Convenience constructor naming products `P1..Pn` and components `C1..Cm`.
    pub fn from_weights(weights: Vec<Vec<f64>>) -> Result<Self, ValidationErrors> {
        let n = weights.len();
        let m = weights.first().map_or(0, Vec::len);
        Self::new(default_names("P", n), default_names("C", m), weights)
    }

    pub fn n_products(&self) -> usize {
        self.products.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn products(&self) -> &[String] {
        &self.products
    }

    pub fn components(&self) -> &[String] {
        &self.components
    }

    pub fn weight(&self, product: usize, component: usize) -> f64 {
        self.weights[product * self.components.len() + component]
    }

    pub fn row(&self, product: usize) -> &[f64] {
        let m = self.components.len();
        &self.weights[product * m..(product + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks(self.components.len())
    }

    /// Whether components carry the generated `C1..Cm` names.
    pub fn has_default_component_names(&self) -> bool {
        self.components
            .iter()
            .enumerate()
            .all(|(j, name)| *name == format!("C{}", j + 1))
    }

    pub fn to_raw(&self) -> RawRecipes {
        RawRecipes {
            products: self.products.clone(),
            components: self.components.clone(),
            weights: self.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl Serialize for RecipeMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_raw().serialize(serializer)
    }
}

pub(crate) fn default_names(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|k| format!("{prefix}{k}")).collect()
}

/// Checks every recipe-matrix rule and collects all violations.
pub fn validate_recipes(
    raw: RawRecipes,
    row_sum_tolerance: f64,
) -> Result<RecipeMatrix, ValidationErrors> {
    let mut errors = Vec::new();
    let n = raw.products.len();
    let m = raw.components.len();

    if n == 0 {
        errors.push(ValidationError::new(ErrorCode::Empty, "at least one recipe is required"));
    }
    if m == 0 {
        errors.push(ValidationError::new(ErrorCode::Empty, "at least one component is required"));
    }
    if raw.weights.len() != n {
        errors.push(ValidationError::new(
            ErrorCode::DimensionMismatch,
            format!("{} product names but {} weight rows", n, raw.weights.len()),
        ));
    }
    check_names(&raw.products, "product", &mut errors);
    check_names(&raw.components, "component", &mut errors);

    for (i, row) in raw.weights.iter().enumerate() {
        if row.len() != m {
            errors.push(
                ValidationError::new(
                    ErrorCode::RaggedRows,
                    format!("row has {} weights, expected {}", row.len(), m),
                )
                .at_row(i),
            );
            continue;
        }
        let mut row_ok = true;
        for (j, &w) in row.iter().enumerate() {
            if !w.is_finite() {
                errors.push(
                    ValidationError::new(ErrorCode::NonFinite, format!("weight {w} is not finite"))
                        .at_row(i)
                        .at_column(j),
                );
                row_ok = false;
            } else if w < 0.0 {
                errors.push(
                    ValidationError::new(ErrorCode::NegativeWeight, format!("weight {w} is negative"))
                        .at_row(i)
                        .at_column(j),
                );
                row_ok = false;
            }
        }
        if !row_ok {
            continue;
        }
        if row.iter().all(|&w| w == 0.0) {
            errors.push(
                ValidationError::new(ErrorCode::ZeroRow, "recipe has no positive weight").at_row(i),
            );
            continue;
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > row_sum_tolerance {
            errors.push(
                ValidationError::new(ErrorCode::RowSum, format!("row sums to {sum}, expected 1"))
                    .at_row(i),
            );
        }
    }

    if !errors.is_empty() {
        return Err(ValidationErrors(errors));
    }
    Ok(RecipeMatrix {
        products: raw.products,
        components: raw.components,
        weights: raw.weights.into_iter().flatten().collect(),
    })
}

fn check_names(names: &[String], kind: &str, errors: &mut Vec<ValidationError>) {
    let mut seen = HashSet::new();
    for (k, name) in names.iter().enumerate() {
        if name.trim().is_empty() {
            let err = ValidationError::new(ErrorCode::Empty, format!("{kind} name is empty"));
            errors.push(if kind == "product" { err.at_row(k) } else { err.at_column(k) });
        } else if !seen.insert(name.as_str()) {
            let err = ValidationError::new(
                ErrorCode::DuplicateName,
                format!("{kind} name {name:?} appears more than once"),
            );
            errors.push(if kind == "product" { err.at_row(k) } else { err.at_column(k) });
        }
    }
}

macro_rules! tonnage_vector {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub Vec<f64>);

        impl $name {
            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                $name(v)
            }
        }

        impl std::ops::Index<usize> for $name {
            type Output = f64;
            fn index(&self, k: usize) -> &f64 {
                &self.0[k]
            }
        }
    };
}

tonnage_vector!(
    /// Demanded tons per blended product, in recipe row order.
    DemandVector
);

/// Available tons per component, in recipe column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockVector {
    pub quantities: Vec<f64>,
    /// Unix seconds at which the stock was read.
    #[serde(default)]
    pub as_of: Option<u64>,
}

impl StockVector {
    pub fn new(quantities: Vec<f64>) -> Self {
        StockVector {
            quantities,
            as_of: None,
        }
    }

    pub fn with_as_of(mut self, as_of: u64) -> Self {
        self.as_of = Some(as_of);
        self
    }

    pub fn len(&self) -> usize {
        self.quantities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quantities.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.quantities
    }
}

impl From<Vec<f64>> for StockVector {
    fn from(v: Vec<f64>) -> Self {
        StockVector::new(v)
    }
}

impl std::ops::Index<usize> for StockVector {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.quantities[k]
    }
}

/// Tons of component `j` needed for the demanded amount of product `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequirementMatrix {
    pub values: Vec<Vec<f64>>,
}

impl RequirementMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    pub fn n_columns(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

/// Component balance after subtracting a requirement matrix from stock.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StockState {
    pub used: Vec<f64>,
    /// Stock minus used; may be negative when `negative` is set.
    pub remaining: Vec<f64>,
    /// Missing tons per component, zero where stock suffices.
    pub required: Vec<f64>,
    pub negative: bool,
}

/// Whole-ton production per blended product.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductionVector(pub Vec<u64>);

impl ProductionVector {
    pub fn zeros(n: usize) -> Self {
        ProductionVector(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&q| q == 0)
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn add(&mut self, addition: Addition) {
        self.0[addition.product] += addition.quantity;
    }

    /// `demand + self`, per product.
    pub fn on_top_of(&self, demand: &DemandVector) -> Vec<f64> {
        demand
            .0
            .iter()
            .zip(&self.0)
            .map(|(d, &q)| d + q as f64)
            .collect()
    }
}

impl std::ops::Index<usize> for ProductionVector {
    type Output = u64;
    fn index(&self, k: usize) -> &u64 {
        &self.0[k]
    }
}

impl fmt::Display for ProductionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, q) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{q}")?;
        }
        f.write_str("]")
    }
}

/// Whole tons of one product added on top of the demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Addition {
    pub product: usize,
    pub quantity: u64,
}

impl Serialize for Addition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (self.product, self.quantity).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Addition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (product, quantity) = <(usize, u64)>::deserialize(deserializer)?;
        Ok(Addition { product, quantity })
    }
}

/// Checks that stock and demand fit the recipe matrix and are nonnegative.
/// An empty list means the triple can be planned.
pub fn validate_instance(
    recipes: &RecipeMatrix,
    stock: &StockVector,
    demand: &DemandVector,
) -> Vec<ValidationError> {
    let mut errors = Vec::new();
    if stock.len() != recipes.n_components() {
        errors.push(ValidationError::new(
            ErrorCode::DimensionMismatch,
            format!(
                "stock has {} values but recipes have {} components",
                stock.len(),
                recipes.n_components()
            ),
        ));
    }
    if demand.len() != recipes.n_products() {
        errors.push(ValidationError::new(
            ErrorCode::DimensionMismatch,
            format!(
                "demand has {} values but recipes have {} products",
                demand.len(),
                recipes.n_products()
            ),
        ));
    }
    check_quantities(stock.as_slice(), "stock", &mut errors);
    check_quantities(demand.as_slice(), "demand", &mut errors);
    errors
}

pub(crate) fn check_quantities(values: &[f64], what: &str, errors: &mut Vec<ValidationError>) {
    for (k, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            errors.push(
                ValidationError::new(ErrorCode::NonFinite, format!("{what} value {v} is not finite"))
                    .at_column(k),
            );
        } else if v < 0.0 {
            errors.push(
                ValidationError::new(ErrorCode::NegativeValue, format!("{what} value {v} is negative"))
                    .at_column(k),
            );
        }
    }
}
