use std::collections::BTreeMap;

use serde::Serialize;

use super::{expand_node, Choice, Gate};
use crate::algebra::deduct;
use crate::error::{Error, Result};
use crate::model::{
    Addition, DemandVector, EngineConfig, ProductionVector, RecipeMatrix, RequirementMatrix,
    StockState, StockVector,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PlanNode {
    /// `None` at the root.
    pub choice: Option<Choice>,
    /// Forced additions applied after the choice, in order.
    pub forced: Vec<Addition>,
    /// Stock after the choice and the forced additions.
    pub remaining: StockVector,
    /// Capacities at `remaining`: all zero at a leaf.
    pub caps: ProductionVector,
    /// One child per branch choice, ascending product index.
    pub children: Vec<PlanNode>,
}

impl PlanNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn choices(&self) -> Vec<Choice> {
        self.children.iter().filter_map(|c| c.choice).collect()
    }

    /// Choice followed by the forced additions.
    pub fn additions(&self) -> impl Iterator<Item = Addition> + '_ {
        self.choice.map(|c| c.addition()).into_iter().chain(self.forced.iter().copied())
    }
}

/// Every reachable production path for one feasible demand.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanTree {
    pub recipes: RecipeMatrix,
    pub demand: DemandVector,
    pub requirements: RequirementMatrix,
    /// Balance after the demand; `remaining` may carry float dust below zero.
    pub state: StockState,
    /// Post-demand stock the root expands from.
    pub root_stock: StockVector,
    pub root: PlanNode,
}

/// Demand plus the additions along one root-to-leaf path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanVariant {
    /// Tons per product.
    pub totals: Vec<f64>,
    /// Whole tons added on top of the demand.
    #[serde(skip)]
    pub additions: ProductionVector,
    /// Choices and forced additions from root to leaf.
    pub path: Vec<Addition>,
}

struct Budget<'a> {
    cfg: &'a EngineConfig,
    leaves: usize,
}

impl PlanTree {
    pub(crate) fn build(
        recipes: &RecipeMatrix,
        demand: &DemandVector,
        gate: Gate,
        cfg: &EngineConfig,
    ) -> Result<Self> {
        let mut budget = Budget { cfg, leaves: 0 };
        let root = grow(recipes, &gate.root_stock, None, 0, &mut budget)?;
        Ok(PlanTree {
            recipes: recipes.clone(),
            demand: demand.clone(),
            requirements: gate.requirements,
            state: gate.state,
            root_stock: gate.root_stock,
            root,
        })
    }

    pub fn root_choices(&self) -> Vec<Choice> {
        self.root.choices()
    }

    pub fn leaf_count(&self) -> usize {
        fn count(node: &PlanNode) -> usize {
            if node.is_leaf() {
                1
            } else {
                node.children.iter().map(count).sum()
            }
        }
        count(&self.root)
    }

    /// Walks the tree along `path` and returns the visited nodes, root first.
    /// `None` when the path does not describe a root-to-leaf walk.
    pub fn nodes_along(&self, path: &[Addition]) -> Option<Vec<&PlanNode>> {
        let mut rest = path;
        let mut node = &self.root;
        let mut visited = Vec::new();
        loop {
            let own: Vec<Addition> = node.additions().collect();
            rest = rest.strip_prefix(own.as_slice())?;
            visited.push(node);
            if node.is_leaf() {
                return rest.is_empty().then_some(visited);
            }
            let next = rest.first()?;
            node = node
                .children
                .iter()
                .find(|c| c.choice.map(|ch| ch.addition()) == Some(*next))?;
        }
    }
}

fn grow(
    recipes: &RecipeMatrix,
    stock: &StockVector,
    choice: Option<Choice>,
    depth: usize,
    budget: &mut Budget<'_>,
) -> Result<PlanNode> {
    if depth > budget.cfg.max_tree_depth {
        return Err(Error::LimitExceeded {
            what: "plan tree depth",
            limit: budget.cfg.max_tree_depth,
        });
    }
    let expansion = expand_node(recipes, stock)?;
    let mut children = Vec::with_capacity(expansion.choices.len());
    if expansion.is_leaf() {
        budget.leaves += 1;
        if budget.leaves > budget.cfg.max_variants {
            return Err(Error::LimitExceeded {
                what: "number of plan variants",
                limit: budget.cfg.max_variants,
            });
        }
    }
    for &c in &expansion.choices {
        let next = deduct(recipes, &expansion.stock, c.addition());
        children.push(grow(recipes, &next, Some(c), depth + 1, budget)?);
    }
    Ok(PlanNode {
        choice,
        forced: expansion.forced,
        remaining: expansion.stock,
        caps: expansion.caps,
        children,
    })
}

/// Collects every leaf's totals depth-first. Leaves with identical totals
/// are merged keeping the lexicographically smallest path. Variants are
/// ordered by descending total tonnage, then ascending totals.
pub fn enumerate_variants(tree: &PlanTree, cfg: &EngineConfig) -> Result<Vec<PlanVariant>> {
    let n = tree.recipes.n_products();
    let mut found: BTreeMap<ProductionVector, Vec<Addition>> = BTreeMap::new();
    let mut leaves = 0usize;
    let mut stack: Vec<(&PlanNode, Vec<Addition>)> = vec![(&tree.root, Vec::new())];
    while let Some((node, mut path)) = stack.pop() {
        path.extend(node.additions());
        if node.is_leaf() {
            leaves += 1;
            if leaves > cfg.max_variants {
                return Err(Error::LimitExceeded {
                    what: "number of plan variants",
                    limit: cfg.max_variants,
                });
            }
            let mut additions = ProductionVector::zeros(n);
            for &a in &path {
                additions.add(a);
            }
            found
                .entry(additions)
                .and_modify(|kept| {
                    if path < *kept {
                        *kept = path.clone();
                    }
                })
                .or_insert(path);
        } else {
            for child in node.children.iter().rev() {
                stack.push((child, path.clone()));
            }
        }
    }

    let mut variants: Vec<PlanVariant> = found
        .into_iter()
        .map(|(additions, path)| PlanVariant {
            totals: additions.on_top_of(&tree.demand),
            additions,
            path,
        })
        .collect();
    // Totals differ from additions by the fixed demand, so ordering on the
    // integer additions is exact.
    variants.sort_by(|a, b| {
        b.additions
            .total()
            .cmp(&a.additions.total())
            .then_with(|| a.additions.cmp(&b.additions))
    });
    Ok(variants)
}

#[cfg(test)]
mod tests {
    use super::super::plan;
    use super::*;

    fn worked_tree(demand: Vec<f64>) -> PlanTree {
        let r = RecipeMatrix::new(
            vec!["BLEND1".into(), "BLEND2".into()],
            vec!["C1".into(), "C2".into(), "C3".into()],
            vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5]],
        )
        .unwrap();
        plan(&r, &vec![10.0, 9.0, 5.0].into(), &demand.into(), &EngineConfig::default())
            .unwrap()
            .feasible()
            .unwrap()
    }

    #[test]
    fn worked_instance_variants() {
        let tree = worked_tree(vec![4.0, 2.0]);
        let quantities: Vec<u64> = tree.root_choices().iter().map(|c| c.quantity).collect();
        assert_eq!(quantities, vec![12, 8]);
        let v = enumerate_variants(&tree, &EngineConfig::default()).unwrap();
        let totals: Vec<Vec<f64>> = v.iter().map(|v| v.totals.clone()).collect();
        // 22 t before 19 t
        assert_eq!(totals, vec![vec![12.0, 10.0], vec![16.0, 3.0]]);
        assert_eq!(
            v[1].path,
            vec![Addition { product: 0, quantity: 12 }, Addition { product: 1, quantity: 1 }]
        );
    }

    #[test]
    fn independent_recipes_collapse() {
        let r = RecipeMatrix::from_weights(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let tree = plan(&r, &vec![2.0, 3.0].into(), &vec![1.0, 1.0].into(), &EngineConfig::default())
            .unwrap()
            .feasible()
            .unwrap();
        assert_eq!(tree.leaf_count(), 2);
        let v = enumerate_variants(&tree, &EngineConfig::default()).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].totals, vec![2.0, 3.0]);
        // option 1 first: product 0 then the forced product 1
        assert_eq!(
            v[0].path,
            vec![Addition { product: 0, quantity: 1 }, Addition { product: 1, quantity: 2 }]
        );
    }

    #[test]
    fn exhausting_demand_is_single_leaf() {
        let r = RecipeMatrix::from_weights(vec![vec![1.0]]).unwrap();
        let tree = plan(&r, &vec![3.0].into(), &vec![3.0].into(), &EngineConfig::default())
            .unwrap()
            .feasible()
            .unwrap();
        assert!(tree.root.is_leaf());
        let v = enumerate_variants(&tree, &EngineConfig::default()).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].totals, vec![3.0]);
        assert!(v[0].path.is_empty());
    }

    #[test]
    fn variant_limit() {
        let tree = worked_tree(vec![4.0, 2.0]);
        let cfg = EngineConfig { max_variants: 1, ..EngineConfig::default() };
        let err = enumerate_variants(&tree, &cfg).unwrap_err();
        assert_eq!(err.code(), "LIMIT_EXCEEDED");

        let r = tree.recipes.clone();
        let err = plan(&r, &vec![10.0, 9.0, 5.0].into(), &vec![4.0, 2.0].into(), &cfg).unwrap_err();
        assert_eq!(err.code(), "LIMIT_EXCEEDED");
    }

    #[test]
    fn depth_limit() {
        let tree = worked_tree(vec![4.0, 2.0]);
        let cfg = EngineConfig { max_tree_depth: 1, ..EngineConfig::default() };
        assert!(plan(&tree.recipes, &vec![10.0, 9.0, 5.0].into(), &vec![4.0, 2.0].into(), &cfg).is_ok());
        let r = RecipeMatrix::from_weights(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let err = plan(&r, &vec![1.0, 1.0, 1.0].into(), &vec![0.0; 3].into(), &cfg).unwrap_err();
        assert_eq!(err.code(), "LIMIT_EXCEEDED");
    }

    #[test]
    fn nodes_along_variant_path() {
        let tree = worked_tree(vec![4.0, 2.0]);
        let v = enumerate_variants(&tree, &EngineConfig::default()).unwrap();
        let nodes = tree.nodes_along(&v[0].path).unwrap();
        assert_eq!(nodes.len(), 2);
        assert_eq!(nodes[1].forced, vec![Addition { product: 0, quantity: 8 }]);
        assert!(tree.nodes_along(&[Addition { product: 0, quantity: 3 }]).is_none());
    }
}
