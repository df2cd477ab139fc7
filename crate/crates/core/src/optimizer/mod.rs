//! Feasibility gate, branch-choice tree, variant enumeration and the
//! interactive stepping session.
//!
//! Every node of the plan tree starts from some remaining stock and computes
//! per-product capacities. When exactly one product can still be made, its
//! full capacity is applied automatically (a *forced* addition) and the
//! capacities are recomputed. When several can be made, each becomes a
//! numbered choice that applies that product's full capacity. A node where
//! nothing can be made is a leaf, and its accumulated production on top of
//! the demand is a plan variant.

mod session;
mod tree;

use serde::Serialize;

use crate::algebra::{self, component_requirements, max_quantities, stock_state};
use crate::error::{Error, Result, ValidationErrors};
use crate::model::{
    validate_instance, Addition, DemandVector, EngineConfig, ProductionVector, RecipeMatrix,
    RequirementMatrix, StockState, StockVector,
};

pub use session::{open_session, Session, TraceEvent};
pub use tree::{enumerate_variants, PlanNode, PlanTree, PlanVariant};

/// Result of gating a demand against stock.
#[derive(Debug, Clone)]
pub enum Outcome<T> {
    /// The demand exceeds stock; `required` holds the missing tons.
    Shortfall(StockState),
    Feasible(T),
}

impl<T> Outcome<T> {
    pub fn feasible(self) -> Option<T> {
        match self {
            Outcome::Feasible(t) => Some(t),
            Outcome::Shortfall(_) => None,
        }
    }

    pub fn shortfall(&self) -> Option<&StockState> {
        match self {
            Outcome::Shortfall(s) => Some(s),
            Outcome::Feasible(_) => None,
        }
    }
}

pub type PlanOutcome = Outcome<PlanTree>;

/// One numbered option offered at a branch node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Choice {
    /// 1-based, in ascending product order.
    pub option: usize,
    pub product: usize,
    /// The product's full current capacity.
    pub quantity: u64,
}

impl Choice {
    pub fn addition(&self) -> Addition {
        Addition {
            product: self.product,
            quantity: self.quantity,
        }
    }
}

/// What [`expand_node`] did at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    /// Forced additions in the order they were applied.
    pub forced: Vec<Addition>,
    /// Stock after the forced additions.
    pub stock: StockVector,
    /// Capacities at `stock`.
    pub caps: ProductionVector,
    /// Empty at a leaf, otherwise two or more options.
    pub choices: Vec<Choice>,
}

impl Expansion {
    pub fn is_leaf(&self) -> bool {
        self.choices.is_empty()
    }

    pub fn forced_totals(&self) -> ProductionVector {
        let mut total = ProductionVector::zeros(self.caps.len());
        for &a in &self.forced {
            total.add(a);
        }
        total
    }
}

/// Applies forced additions until zero or at least two products remain
/// producible, then lists the branch choices.
pub fn expand_node(recipes: &RecipeMatrix, stock: &StockVector) -> Result<Expansion> {
    let mut stock = stock.clone();
    let mut forced = Vec::new();
    // A forced product is drained below one ton, so it cannot recur.
    for _ in 0..=recipes.n_products() {
        let caps = max_quantities(recipes, &stock)?;
        let mut producible = caps.0.iter().enumerate().filter(|(_, &q)| q >= 1);
        match (producible.next(), producible.next()) {
            (Some((product, &quantity)), None) => {
                let a = Addition { product, quantity };
                stock = algebra::deduct(recipes, &stock, a);
                forced.push(a);
            }
            _ => {
                let choices = branch_choices(&caps);
                return Ok(Expansion {
                    forced,
                    stock,
                    caps,
                    choices,
                });
            }
        }
    }
    unreachable!("forced additions exceed the number of products")
}

fn branch_choices(caps: &ProductionVector) -> Vec<Choice> {
    caps.0
        .iter()
        .enumerate()
        .filter(|(_, &q)| q >= 1)
        .enumerate()
        .map(|(k, (product, &quantity))| Choice {
            option: k + 1,
            product,
            quantity,
        })
        .collect()
}

/// Requirements and post-demand stock for a validated, feasible demand.
#[derive(Debug, Clone)]
pub(crate) struct Gate {
    pub requirements: RequirementMatrix,
    pub state: StockState,
    pub root_stock: StockVector,
}

pub(crate) fn gate(
    recipes: &RecipeMatrix,
    stock: &StockVector,
    demand: &DemandVector,
    cfg: &EngineConfig,
) -> Result<Outcome<Gate>> {
    cfg.validate()?;
    let problems = validate_instance(recipes, stock, demand);
    if !problems.is_empty() {
        return Err(Error::Validation(ValidationErrors(problems)));
    }
    let requirements = component_requirements(recipes, demand)?;
    let state = stock_state(&requirements, stock, cfg.shortfall_tolerance)?;
    if state.negative {
        return Ok(Outcome::Shortfall(state));
    }
    let root_stock = StockVector {
        quantities: state.remaining.iter().map(|&r| r.max(0.0)).collect(),
        as_of: stock.as_of,
    };
    Ok(Outcome::Feasible(Gate {
        requirements,
        state,
        root_stock,
    }))
}

/// Gates the demand and, when it fits, builds the complete plan tree.
pub fn plan(
    recipes: &RecipeMatrix,
    stock: &StockVector,
    demand: &DemandVector,
    cfg: &EngineConfig,
) -> Result<PlanOutcome> {
    Ok(match gate(recipes, stock, demand, cfg)? {
        Outcome::Shortfall(s) => Outcome::Shortfall(s),
        Outcome::Feasible(g) => Outcome::Feasible(PlanTree::build(recipes, demand, g, cfg)?),
    })
}
