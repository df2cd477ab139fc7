use super::{expand_node, gate, Choice, Expansion, Outcome};
use crate::algebra::deduct;
use crate::error::{Error, Result};
use crate::model::{
    Addition, DemandVector, EngineConfig, ProductionVector, RecipeMatrix, RequirementMatrix,
    StockVector,
};

/// What happened along a session, in order. Enough to re-render the
/// step report without touching the tree.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Forced(Addition),
    Chose {
        /// Capacities offered at the branch node.
        caps: ProductionVector,
        choice: Choice,
    },
    /// Nothing more can be made.
    Leaf,
}

/// An operator's walk down the plan tree, one branch choice per step. Nodes
/// are expanded on demand, so each step costs one expansion.
#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    recipes: RecipeMatrix,
    initial_stock: StockVector,
    demand: DemandVector,
    requirements: RequirementMatrix,
    cfg: EngineConfig,
    current: Expansion,
    step: usize,
    extra: ProductionVector,
    trace: Vec<TraceEvent>,
}

/// Gates the demand and, when it fits, positions a session at the root with
/// any root forced additions already applied.
pub fn open_session(
    recipes: &RecipeMatrix,
    stock: &StockVector,
    demand: &DemandVector,
    cfg: &EngineConfig,
) -> Result<Outcome<Session>> {
    let gate = match gate(recipes, stock, demand, cfg)? {
        Outcome::Shortfall(s) => return Ok(Outcome::Shortfall(s)),
        Outcome::Feasible(g) => g,
    };
    let current = expand_node(recipes, &gate.root_stock)?;
    let mut session = Session {
        id: uuid::Uuid::new_v4().simple().to_string(),
        recipes: recipes.clone(),
        initial_stock: stock.clone(),
        demand: demand.clone(),
        requirements: gate.requirements,
        cfg: *cfg,
        current: current.clone(),
        step: 0,
        extra: ProductionVector::zeros(recipes.n_products()),
        trace: Vec::new(),
    };
    session.absorb(current);
    Ok(Outcome::Feasible(session))
}

impl Session {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn recipes(&self) -> &RecipeMatrix {
        &self.recipes
    }

    pub fn initial_stock(&self) -> &StockVector {
        &self.initial_stock
    }

    pub fn demand(&self) -> &DemandVector {
        &self.demand
    }

    /// Component needs of the demand itself.
    pub fn requirements(&self) -> &RequirementMatrix {
        &self.requirements
    }

    /// Number of choices applied so far; the root is step 0.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn remaining(&self) -> &StockVector {
        &self.current.stock
    }

    /// Capacities at the current node.
    pub fn caps(&self) -> &ProductionVector {
        &self.current.caps
    }

    pub fn choices(&self) -> &[Choice] {
        &self.current.choices
    }

    pub fn finished(&self) -> bool {
        self.current.is_leaf()
    }

    /// Production chosen or forced on top of the demand.
    pub fn extra(&self) -> &ProductionVector {
        &self.extra
    }

    /// Demand plus every applied addition.
    pub fn totals(&self) -> Vec<f64> {
        self.extra.on_top_of(&self.demand)
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    /// Choices and forced additions applied so far, in order.
    pub fn path(&self) -> Vec<Addition> {
        self.trace
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Forced(a) => Some(*a),
                TraceEvent::Chose { choice, .. } => Some(choice.addition()),
                TraceEvent::Leaf => None,
            })
            .collect()
    }

    /// Applies option `option` in full, then any forced additions, and
    /// advances one step. The session is unchanged on error.
    pub fn choose(&mut self, option: usize) -> Result<()> {
        if self.finished() {
            return Err(Error::SessionFinished);
        }
        let choice = *self
            .current
            .choices
            .iter()
            .find(|c| c.option == option)
            .ok_or(Error::InvalidOption {
                option,
                available: self.current.choices.len(),
            })?;
        if self.step + 1 > self.cfg.max_tree_depth {
            return Err(Error::LimitExceeded {
                what: "plan tree depth",
                limit: self.cfg.max_tree_depth,
            });
        }
        let stock = deduct(&self.recipes, &self.current.stock, choice.addition());
        let next = expand_node(&self.recipes, &stock)?;

        self.trace.push(TraceEvent::Chose {
            caps: self.current.caps.clone(),
            choice,
        });
        self.extra.add(choice.addition());
        self.step += 1;
        self.absorb(next);
        Ok(())
    }

    fn absorb(&mut self, expansion: Expansion) {
        for &a in &expansion.forced {
            self.extra.add(a);
            self.trace.push(TraceEvent::Forced(a));
        }
        if expansion.is_leaf() {
            self.trace.push(TraceEvent::Leaf);
        }
        self.current = expansion;
    }
}
