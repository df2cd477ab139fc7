//! Blend planning for recipe-driven plants.
//!
//! Given a recipe matrix (mass fraction of each component per ton of each
//! blended product) and the stock held in the tanks, the crate answers:
//!
//! - how much of every component a demanded production needs
//!   ([`component_requirements`]) and whether the tanks hold enough
//!   ([`stock_state`]);
//! - how many whole tons of each product the stock supports on its own
//!   ([`max_quantities`]);
//! - which locally maximal production variants remain once the demand is
//!   met, either all at once ([`plan`], [`enumerate_variants`]) or one
//!   operator choice at a time ([`open_session`]).
//!
//! ```
//! use blendplan::{plan, enumerate_variants, EngineConfig, RecipeMatrix};
//!
//! let recipes = RecipeMatrix::from_weights(vec![
//!     vec![0.5, 0.5, 0.0],
//!     vec![0.2, 0.3, 0.5],
//! ])
//! .unwrap();
//! let cfg = EngineConfig::default();
//! let tree = plan(&recipes, &vec![10.0, 9.0, 5.0].into(), &vec![4.0, 2.0].into(), &cfg)
//!     .unwrap()
//!     .feasible()
//!     .expect("demand fits the stock");
//! let variants = enumerate_variants(&tree, &cfg).unwrap();
//! // largest total tonnage first
//! assert_eq!(variants[0].totals, vec![12.0, 10.0]);
//! assert_eq!(variants[1].totals, vec![16.0, 3.0]);
//! ```
//!
//! Recipes and stock are read by [`ingestion`], reports and exports are
//! produced by [`reporting`], and [`service`] puts everything behind an HTTP
//! API. The `blendplan` binary wraps [`cli`].

pub mod algebra;
pub mod cli;
pub mod error;
pub mod format;
pub mod ingestion;
pub mod model;
pub mod optimizer;
pub mod reporting;
pub mod service;

pub use algebra::{component_requirements, max_quantities, stock_state};
pub use error::{Error, ErrorCode, Result, ValidationError, ValidationErrors};
pub use model::{
    validate_instance, validate_recipes, Addition, DemandVector, EngineConfig, ProductionVector,
    RawRecipes, RecipeMatrix, RequirementMatrix, StockState, StockVector,
};
pub use optimizer::{
    enumerate_variants, expand_node, open_session, plan, Choice, Expansion, Outcome, PlanNode,
    PlanOutcome, PlanTree, PlanVariant, Session, TraceEvent,
};
