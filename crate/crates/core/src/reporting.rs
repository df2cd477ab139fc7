//! Step reports, the full iteration report and variant exports.
//!
//! A step report lists, per row, the production added at that sub-step and
//! the running totals per product:
//!
//! ```text
//! step  sub step           P3 matrix  BLEND1  BLEND2
//! 0     0                  [4 2]           4       2
//! 0     Possible choices:                 12       8
//! 1     1                  [12 0]         16       2
//! 1     2                  [0 1]          16       3
//! 1     3                  [0 0]          16       3
//! ```
//!
//! `step` is the option taken at the first branch. Within a step, sub-steps
//! count up from 1; after a deeper branch they are prefixed with the options
//! taken below the first branch (`1.1`, `1.2`, `2.1.1`, ...). Every path ends
//! in an all-zero row.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::format::{bracketed, matrix_table, num, table};
use crate::model::{Addition, EngineConfig, RecipeMatrix};
use crate::optimizer::{enumerate_variants, PlanNode, PlanTree, PlanVariant, Session, TraceEvent};

pub const CHOICES_LABEL: &str = "Possible choices:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Demand,
    /// Capacities offered at a branch node; `p3` holds them.
    Choices,
    Choice,
    Forced,
    /// Nothing more can be made.
    Terminal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRow {
    pub step: usize,
    pub sub_step: String,
    pub kind: RowKind,
    pub p3: Vec<f64>,
    pub totals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub products: Vec<String>,
    pub rows: Vec<StepRow>,
}

#[derive(Debug, Clone)]
struct Cursor {
    step: usize,
    branched: bool,
    prefix: Vec<usize>,
    seq: usize,
    totals: Vec<f64>,
}

impl Cursor {
    fn label(&self) -> String {
        let mut parts: Vec<String> = self.prefix.iter().map(usize::to_string).collect();
        parts.push(self.seq.to_string());
        parts.join(".")
    }

    fn row(&self, kind: RowKind, p3: Vec<f64>) -> StepRow {
        StepRow {
            step: self.step,
            sub_step: if kind == RowKind::Choices {
                CHOICES_LABEL.to_string()
            } else {
                self.label()
            },
            kind,
            p3,
            totals: self.totals.clone(),
        }
    }

    fn apply(&mut self, a: Addition) -> Vec<f64> {
        self.totals[a.product] += a.quantity as f64;
        let mut delta = vec![0.0; self.totals.len()];
        delta[a.product] = a.quantity as f64;
        delta
    }

    fn forced(&mut self, a: Addition) -> StepRow {
        self.seq += 1;
        let delta = self.apply(a);
        self.row(RowKind::Forced, delta)
    }

    fn branch(&mut self, option: usize, a: Addition) -> StepRow {
        if self.branched {
            self.prefix.push(option);
        } else {
            self.branched = true;
            self.step = option;
        }
        self.seq = 1;
        let delta = self.apply(a);
        self.row(RowKind::Choice, delta)
    }

    fn terminal(&mut self) -> StepRow {
        self.seq += 1;
        self.row(RowKind::Terminal, vec![0.0; self.totals.len()])
    }

    fn choices(&self, caps: &[u64]) -> StepRow {
        self.row(RowKind::Choices, caps.iter().map(|&c| c as f64).collect())
    }
}

fn start(demand: &[f64]) -> (Cursor, Vec<StepRow>) {
    let cursor = Cursor {
        step: 0,
        branched: false,
        prefix: Vec::new(),
        seq: 0,
        totals: demand.to_vec(),
    };
    let first = cursor.row(RowKind::Demand, demand.to_vec());
    (cursor, vec![first])
}

impl StepReport {
    /// Rows for everything a session has done so far. An unfinished session
    /// ends with the choices currently on offer.
    pub fn from_session(session: &Session) -> Self {
        let mut report = Self::from_trace(session.recipes(), session.demand().as_slice(), session.trace());
        if !session.finished() {
            let last = report.rows.last().expect("reports start with the demand row");
            report.rows.push(StepRow {
                step: last.step,
                sub_step: CHOICES_LABEL.to_string(),
                kind: RowKind::Choices,
                p3: session.caps().0.iter().map(|&c| c as f64).collect(),
                totals: session.totals(),
            });
        }
        report
    }

    /// Rows for one root-to-leaf path of `tree`.
    pub fn from_variant(tree: &PlanTree, variant: &PlanVariant) -> Option<Self> {
        let nodes = tree.nodes_along(&variant.path)?;
        let mut trace = Vec::new();
        for (k, node) in nodes.iter().enumerate() {
            if let (Some(parent), Some(choice)) = (k.checked_sub(1).map(|p| nodes[p]), node.choice) {
                trace.push(TraceEvent::Chose {
                    caps: parent.caps.clone(),
                    choice,
                });
            }
            trace.extend(node.forced.iter().map(|&a| TraceEvent::Forced(a)));
        }
        trace.push(TraceEvent::Leaf);
        Some(Self::from_trace(&tree.recipes, tree.demand.as_slice(), &trace))
    }

    pub fn from_trace(recipes: &RecipeMatrix, demand: &[f64], trace: &[TraceEvent]) -> Self {
        let (mut cursor, mut rows) = start(demand);
        for event in trace {
            match event {
                TraceEvent::Forced(a) => rows.push(cursor.forced(*a)),
                TraceEvent::Chose { caps, choice } => {
                    rows.push(cursor.choices(caps.as_slice()));
                    rows.push(cursor.branch(choice.option, choice.addition()));
                }
                TraceEvent::Leaf => rows.push(cursor.terminal()),
            }
        }
        StepReport {
            products: recipes.products().to_vec(),
            rows,
        }
    }

    /// Every path of the tree, shared prefixes written once.
    pub fn from_tree(tree: &PlanTree) -> Self {
        fn walk(node: &PlanNode, mut cursor: Cursor, rows: &mut Vec<StepRow>) {
            for &a in &node.forced {
                rows.push(cursor.forced(a));
            }
            if node.is_leaf() {
                rows.push(cursor.terminal());
                return;
            }
            rows.push(cursor.choices(node.caps.as_slice()));
            for child in &node.children {
                let choice = child.choice.expect("non-root nodes carry their choice");
                let mut c = cursor.clone();
                rows.push(c.branch(choice.option, choice.addition()));
                walk(child, c, rows);
            }
        }
        let (cursor, mut rows) = start(tree.demand.as_slice());
        walk(&tree.root, cursor, &mut rows);
        StepReport {
            products: tree.recipes.products().to_vec(),
            rows,
        }
    }

    /// Totals of the last row.
    pub fn final_totals(&self) -> &[f64] {
        &self.rows.last().expect("reports start with the demand row").totals
    }

    pub fn to_text(&self) -> String {
        let mut header = vec!["step".to_string(), "sub step".to_string(), "P3 matrix".to_string()];
        header.extend(self.products.iter().cloned());
        let body = self
            .rows
            .iter()
            .map(|r| {
                let (p3, shown) = match r.kind {
                    RowKind::Choices => (String::new(), &r.p3),
                    _ => (bracketed(&r.p3), &r.totals),
                };
                let mut cells = vec![r.step.to_string(), r.sub_step.clone(), p3];
                cells.extend(shown.iter().map(|&v| num(v)));
                cells
            })
            .collect::<Vec<_>>();
        table(&header, &body, 3)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,sub_step,kind");
        for p in &self.products {
            write!(out, ",p3_{p}").unwrap();
        }
        for p in &self.products {
            write!(out, ",{p}").unwrap();
        }
        out.push('\n');
        for r in &self.rows {
            let kind = serde_json::to_value(r.kind).unwrap();
            write!(out, "{},{},{}", r.step, r.sub_step, kind.as_str().unwrap()).unwrap();
            for &v in r.p3.iter().chain(&r.totals) {
                write!(out, ",{}", num(v)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn named(names: &[String], values: &[f64]) -> String {
    names
        .iter()
        .zip(values)
        .map(|(n, &v)| format!("{n} {}", num(v)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// The complete report: inputs, a depth-indented dump of every tree node,
/// the full step table and the deduplicated variant list.
pub fn render_full_report(tree: &PlanTree, cfg: &EngineConfig) -> Result<String> {
    let variants = enumerate_variants(tree, cfg)?;
    let recipes = &tree.recipes;
    let products = recipes.products();
    let components = recipes.components();
    let mut out = String::new();

    out.push_str("BLEND PLAN REPORT\n\n");
    out.push_str("Recipes (tons of component per ton of product)\n");
    let weights: Vec<Vec<f64>> = recipes.rows().map(<[f64]>::to_vec).collect();
    out.push_str(&matrix_table("product", products, components, &weights));
    writeln!(out, "\nDemand: {}", named(products, tree.demand.as_slice())).unwrap();
    out.push_str("\nComponent requirements\n");
    out.push_str(&matrix_table("product", products, components, &tree.requirements.values));
    writeln!(out, "\nComponents used: {}", named(components, &tree.state.used)).unwrap();
    writeln!(out, "Stock after demand: {}", named(components, tree.root_stock.as_slice())).unwrap();

    out.push_str("\nPlan tree\n");
    fn dump(node: &PlanNode, depth: usize, products: &[String], out: &mut String) {
        let indent = "  ".repeat(depth + 1);
        let head = match node.choice {
            None => "root".to_string(),
            Some(c) => format!("option {}: {} +{} t", c.option, products[c.product], c.quantity),
        };
        write!(out, "{indent}{head}").unwrap();
        for a in &node.forced {
            write!(out, "; forced {} +{} t", products[a.product], a.quantity).unwrap();
        }
        write!(
            out,
            "; stock {}; caps {}",
            bracketed(node.remaining.as_slice()),
            node.caps
        )
        .unwrap();
        if node.is_leaf() {
            out.push_str("; leaf");
        } else {
            write!(out, "; {} choices", node.children.len()).unwrap();
        }
        out.push('\n');
        for child in &node.children {
            dump(child, depth + 1, products, out);
        }
    }
    dump(&tree.root, 0, products, &mut out);

    out.push_str("\nSteps\n");
    out.push_str(&StepReport::from_tree(tree).to_text());

    writeln!(out, "\nVariants ({})", variants.len()).unwrap();
    for (k, v) in variants.iter().enumerate() {
        writeln!(out, "  {}: {}", k + 1, named(products, &v.totals)).unwrap();
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(format!("unknown export format {other:?}, expected csv or json")),
        }
    }
}

/// CSV: `variant,<products...>` then one numbered row per variant, no
/// trailing newline. JSON: array of `{totals, path}`.
pub fn export_variants(variants: &[PlanVariant], products: &[String], format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Csv => {
            let mut lines = vec![format!("variant,{}", products.join(","))];
            for (k, v) in variants.iter().enumerate() {
                let cells: Vec<String> = v.totals.iter().map(|&t| num(t)).collect();
                lines.push(format!("{},{}", k + 1, cells.join(",")));
            }
            lines.join("\n").into_bytes()
        }
        ExportFormat::Json => serde_json::to_vec(variants).expect("variants serialize"),
    }
}
