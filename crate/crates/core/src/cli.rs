//! Command-line front end.
//!
//! Exit codes: 0 success, 1 infeasible demand, 2 validation error, 3 I/O
//! error, 4 limits exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::format::{bracketed, matrix_table, num, table};
use crate::ingestion::{load_stock, parse_demand, parse_recipes_csv_with, StockSource};
use crate::model::{DemandVector, EngineConfig, RecipeMatrix, StockState, StockVector};
use crate::optimizer::{enumerate_variants, plan, Outcome};
use crate::reporting::{export_variants, render_full_report, ExportFormat};
use crate::service::{serve, ServiceConfig};
use crate::{component_requirements, max_quantities, stock_state};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_LIMIT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "blendplan", version, about = "Blend planning from recipes and component stock")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a recipe CSV file
    Validate {
        #[arg(long)]
        recipes: PathBuf,
    },
    /// Component tons needed for a demand
    Requirements {
        #[arg(long)]
        recipes: PathBuf,
        #[command(flatten)]
        demand: DemandArgs,
    },
    /// Whole tons of each product the stock supports on its own
    Capacity {
        #[arg(long)]
        recipes: PathBuf,
        #[arg(long)]
        stock: String,
    },
    /// Shortfall, or the first choices after meeting the demand
    Plan(PlanArgs),
    /// Every locally maximal production variant
    Variants {
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value = "csv")]
        format: ExportFormat,
    },
    /// Full report of the plan tree
    Report(PlanArgs),
    /// Run the HTTP service
    Serve {
        #[arg(long)]
        recipes: PathBuf,
        /// Stock file path, `file:PATH`, `inline:v1,v2,..` or an http(s) URL
        #[arg(long)]
        stock_source: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Seconds between fetches for URL sources
        #[arg(long)]
        poll_interval: Option<u64>,
        /// Write uploaded recipes back to the recipe file
        #[arg(long)]
        snapshot: bool,
    },
}

#[derive(Args, Debug)]
struct DemandArgs {
    /// Demanded tons per product, e.g. "25,15"
    #[arg(long, conflicts_with = "demand_file", required_unless_present = "demand_file")]
    demand: Option<String>,
    /// File holding the demand list
    #[arg(long)]
    demand_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[arg(long)]
    recipes: PathBuf,
    /// Stock file (or any stock source string)
    #[arg(long)]
    stock: String,
    #[command(flatten)]
    demand: DemandArgs,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_) | Error::InvalidOption { .. } | Error::SessionFinished => EXIT_VALIDATION,
        Error::Unreachable(_) | Error::Io(_) => EXIT_IO,
        Error::LimitExceeded { .. } => EXIT_LIMIT,
    }
}

/// Parses `args` (program name first) and runs the command on stdout/stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`run`], writing to the given streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let cfg = EngineConfig::default();
    match execute(cli.command, &cfg, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = report_error(&e, err);
            exit_code(&e)
        }
    }
}

fn report_error(e: &Error, err: &mut dyn Write) -> std::io::Result<()> {
    match e {
        Error::Validation(errs) => {
            writeln!(err, "error: validation failed")?;
            for v in errs.iter() {
                writeln!(err, "  {v}")?;
            }
            Ok(())
        }
        other => writeln!(err, "error: {other}"),
    }
}

fn read_failed(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn read_recipes(path: &Path, cfg: &EngineConfig) -> Result<RecipeMatrix, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| read_failed(path, e))?;
    Ok(parse_recipes_csv_with(&text, cfg.row_sum_tolerance)?)
}

fn read_stock(source: &str, recipes: &RecipeMatrix) -> Result<StockVector, Error> {
    let source: StockSource = source.parse()?;
    load_stock(&source, recipes.n_components())
}

fn read_demand(args: &DemandArgs, recipes: &RecipeMatrix) -> Result<DemandVector, Error> {
    let text = match (&args.demand, &args.demand_file) {
        (Some(list), _) => list.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| read_failed(path, e))?,
        (None, None) => unreachable!("clap requires one of --demand/--demand-file"),
    };
    Ok(parse_demand(&text, recipes.n_products())?)
}

fn write_shortfall(out: &mut dyn Write, recipes: &RecipeMatrix, stock: &StockVector, s: &StockState) -> std::io::Result<()> {
    writeln!(out, "Required blended products cannot be made")?;
    let header: Vec<String> = ["component", "used", "stock", "required"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = recipes
        .components()
        .iter()
        .enumerate()
        .map(|(j, name)| vec![name.clone(), num(s.used[j]), num(stock[j]), num(s.required[j])])
        .collect();
    out.write_all(table(&header, &rows, 1).as_bytes())?;
    writeln!(out, "required: {}", bracketed(&s.required))
}

fn execute(command: Command, cfg: &EngineConfig, out: &mut dyn Write) -> Result<i32, Error> {
    match command {
        Command::Validate { recipes } => {
            let r = read_recipes(&recipes, cfg)?;
            writeln!(out, "valid: {} recipes, {} components", r.n_products(), r.n_components())?;
            writeln!(out, "products: {}", r.products().join(", "))?;
            writeln!(out, "components: {}", r.components().join(", "))?;
        }
        Command::Requirements { recipes, demand } => {
            let r = read_recipes(&recipes, cfg)?;
            let d = read_demand(&demand, &r)?;
            let c = component_requirements(&r, &d)?;
            let used = stock_state(&c, &StockVector::new(vec![0.0; r.n_components()]), f64::INFINITY)?.used;
            let mut names = r.products().to_vec();
            names.push("total".into());
            let mut rows = c.values.clone();
            rows.push(used);
            out.write_all(matrix_table("product", &names, r.components(), &rows).as_bytes())?;
        }
        Command::Capacity { recipes, stock } => {
            let r = read_recipes(&recipes, cfg)?;
            let s = read_stock(&stock, &r)?;
            let caps = max_quantities(&r, &s)?;
            let rows: Vec<Vec<String>> = r
                .products()
                .iter()
                .zip(caps.as_slice())
                .map(|(p, q)| vec![p.clone(), q.to_string()])
                .collect();
            out.write_all(table(&["product".into(), "max tons".into()], &rows, 1).as_bytes())?;
        }
        Command::Plan(args) => {
            let (r, s, d) = plan_inputs(&args, cfg)?;
            match plan(&r, &s, &d, cfg)? {
                Outcome::Shortfall(state) => {
                    write_shortfall(out, &r, &s, &state)?;
                    return Ok(EXIT_INFEASIBLE);
                }
                Outcome::Feasible(tree) => {
                    writeln!(out, "Demand can be made")?;
                    out.write_all(
                        matrix_table("product", r.products(), r.components(), &tree.requirements.values)
                            .as_bytes(),
                    )?;
                    let left: Vec<String> = r
                        .components()
                        .iter()
                        .zip(tree.root_stock.as_slice())
                        .map(|(c, &v)| format!("{c} {}", num(v)))
                        .collect();
                    writeln!(out, "Stock after demand: {}", left.join(", "))?;
                    for a in &tree.root.forced {
                        writeln!(out, "Forced: {} +{} t", r.products()[a.product], a.quantity)?;
                    }
                    let choices = tree.root_choices();
                    if choices.is_empty() {
                        writeln!(out, "No further production possible")?;
                    } else {
                        writeln!(out, "Choices:")?;
                        for c in choices {
                            writeln!(out, "  {}: {} +{} t", c.option, r.products()[c.product], c.quantity)?;
                        }
                    }
                }
            }
        }
        Command::Variants { plan: args, format } => {
            let (r, s, d) = plan_inputs(&args, cfg)?;
            match plan(&r, &s, &d, cfg)? {
                Outcome::Shortfall(state) => {
                    write_shortfall(out, &r, &s, &state)?;
                    return Ok(EXIT_INFEASIBLE);
                }
                Outcome::Feasible(tree) => {
                    let variants = enumerate_variants(&tree, cfg)?;
                    out.write_all(&export_variants(&variants, r.products(), format))?;
                    writeln!(out)?;
                }
            }
        }
        Command::Report(args) => {
            let (r, s, d) = plan_inputs(&args, cfg)?;
            match plan(&r, &s, &d, cfg)? {
                Outcome::Shortfall(state) => {
                    write_shortfall(out, &r, &s, &state)?;
                    return Ok(EXIT_INFEASIBLE);
                }
                Outcome::Feasible(tree) => out.write_all(render_full_report(&tree, cfg)?.as_bytes())?,
            }
        }
        Command::Serve {
            recipes,
            stock_source,
            port,
            host,
            poll_interval,
            snapshot,
        } => {
            let mut source: StockSource = stock_source.parse()?;
            if poll_interval.is_some() {
                source.poll_interval = poll_interval;
            }
            let mut config = ServiceConfig::new(SocketAddr::new(host, port), recipes, source.with_env_override());
            config.snapshot_recipes = snapshot;
            config.engine = *cfg;
            let runtime = tokio::runtime::Runtime::new()?;
            writeln!(out, "serving on http://{}", config.addr)?;
            out.flush()?;
            runtime.block_on(serve(config))?;
        }
    }
    Ok(EXIT_OK)
}

fn plan_inputs(args: &PlanArgs, cfg: &EngineConfig) -> Result<(RecipeMatrix, StockVector, DemandVector), Error> {
    let r = read_recipes(&args.recipes, cfg)?;
    let s = read_stock(&args.stock, &r)?;
    let d = read_demand(&args.demand, &r)?;
    Ok((r, s, d))
}
