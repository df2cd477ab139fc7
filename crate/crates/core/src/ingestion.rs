//! Reading recipes, stock and demand from files, strings and HTTP feeds.
//!
//! Recipe CSV: one recipe per line, `name,w1,...,wm`. An optional first
//! line whose second cell is not a number names the components
//! (`name,NAPHTHA,REFORMATE,...`); without it components are `C1..Cm`.
//! No quoting; `.` is always the decimal separator; LF or CRLF.
//!
//! Stock CSV: one line of `m` tonnages, optionally followed by
//! `as_of,<unix seconds>`.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, ErrorCode, Result, ValidationError, ValidationErrors};
use crate::model::{
    check_quantities, default_names, validate_recipes, DemandVector, EngineConfig, RawRecipes,
    RecipeMatrix, StockVector,
};

/// Overrides the configured stock source with an HTTP feed.
pub const STOCK_URL_ENV: &str = "BLENDPLAN_STOCK_URL";

pub const DEFAULT_POLL_INTERVAL: u64 = 10;

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
}

fn cells(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn is_number(cell: &str) -> bool {
    cell.parse::<f64>().is_ok()
}

/// Parses recipe CSV with the default row-sum tolerance.
pub fn parse_recipes_csv(text: &str) -> Result<RecipeMatrix, ValidationErrors> {
    parse_recipes_csv_with(text, EngineConfig::default().row_sum_tolerance)
}

pub fn parse_recipes_csv_with(
    text: &str,
    row_sum_tolerance: f64,
) -> Result<RecipeMatrix, ValidationErrors> {
    let mut rows = lines(text).peekable();
    let header = match rows.peek() {
        Some((_, line)) => {
            let c = cells(line);
            (c.len() >= 2 && !is_number(c[1])).then(|| c[1..].iter().map(|s| s.to_string()).collect::<Vec<_>>())
        }
        None => {
            return Err(ValidationError::new(ErrorCode::Empty, "recipe file has no rows").into())
        }
    };
    if header.is_some() {
        rows.next();
    }

    let mut errors = Vec::new();
    let mut width = header.as_ref().map(Vec::len);
    let mut products = Vec::new();
    let mut weights = Vec::new();
    for (line_no, line) in rows {
        let c = cells(line);
        let row_width = c.len() - 1;
        match width {
            None => width = Some(row_width),
            Some(w) if w != row_width => {
                errors.push(
                    ValidationError::new(
                        ErrorCode::RaggedRows,
                        format!("{row_width} weight cells, expected {w}"),
                    )
                    .at_row(line_no),
                );
                continue;
            }
            Some(_) => {}
        }
        let mut row = Vec::with_capacity(row_width);
        for (k, cell) in c[1..].iter().enumerate() {
            match cell.parse::<f64>() {
                Ok(v) => row.push(v),
                Err(_) => errors.push(
                    ValidationError::new(ErrorCode::Parse, format!("{cell:?} is not a number"))
                        .at_row(line_no)
                        .at_column(k + 1),
                ),
            }
        }
        products.push(c[0].to_string());
        weights.push(row);
    }
    if !errors.is_empty() {
        return Err(ValidationErrors(errors));
    }
    let m = width.unwrap_or(0);
    let components = header.unwrap_or_else(|| default_names("C", m));
    validate_recipes(
        RawRecipes {
            products,
            components,
            weights,
        },
        row_sum_tolerance,
    )
}

/// Renders recipes so that [`parse_recipes_csv`] restores them exactly.
/// A header line is written only when components have non-default names.
pub fn write_recipes_csv(recipes: &RecipeMatrix) -> String {
    let mut out = String::new();
    if !recipes.has_default_component_names() {
        out.push_str("name");
        for c in recipes.components() {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
    }
    for (name, row) in recipes.products().iter().zip(recipes.rows()) {
        out.push_str(name);
        for w in row {
            // shortest representation that round-trips
            write!(out, ",{w}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses a comma-separated list of tonnages, e.g. `"25,15"`.
pub fn parse_quantities(text: &str) -> Result<Vec<f64>, ValidationErrors> {
    let mut errors = Vec::new();
    let mut values = Vec::new();
    for (k, cell) in cells(text.trim()).into_iter().enumerate() {
        match cell.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) => errors.push(
                ValidationError::new(ErrorCode::Parse, format!("{cell:?} is not a number"))
                    .at_row(0)
                    .at_column(k),
            ),
        }
    }
    if errors.is_empty() {
        Ok(values)
    } else {
        Err(ValidationErrors(errors))
    }
}

/// Demand typed by the operator as a comma list, one value per recipe.
pub fn parse_demand(text: &str, expected_n: usize) -> Result<DemandVector, ValidationErrors> {
    let values = parse_quantities(text)?;
    if values.len() != expected_n {
        return Err(ValidationError::new(
            ErrorCode::DimensionMismatch,
            format!("demand has {} values, expected {expected_n}", values.len()),
        )
        .into());
    }
    let mut errors = Vec::new();
    check_quantities(&values, "demand", &mut errors);
    if errors.is_empty() {
        Ok(DemandVector(values))
    } else {
        Err(ValidationErrors(errors))
    }
}

/// Parses the stock file format. `as_of` stays `None` when the file has no
/// `as_of` line.
pub fn parse_stock_csv(text: &str, expected_m: usize) -> Result<StockVector, ValidationErrors> {
    let mut rows = lines(text);
    let Some((_, first)) = rows.next() else {
        return Err(ValidationError::new(ErrorCode::Empty, "stock file has no values").into());
    };
    let values = parse_quantities(first)?;
    if values.len() != expected_m {
        return Err(ValidationError::new(
            ErrorCode::DimensionMismatch,
            format!("stock has {} values, expected {expected_m}", values.len()),
        )
        .into());
    }
    let mut errors = Vec::new();
    check_quantities(&values, "stock", &mut errors);
    let mut as_of = None;
    if let Some((line_no, line)) = rows.next() {
        match cells(line).as_slice() {
            ["as_of", secs] => match secs.parse::<u64>() {
                Ok(s) => as_of = Some(s),
                Err(_) => errors.push(
                    ValidationError::new(ErrorCode::Parse, format!("{secs:?} is not a timestamp"))
                        .at_row(line_no)
                        .at_column(1),
                ),
            },
            _ => errors.push(
                ValidationError::new(ErrorCode::Parse, "expected \"as_of,<unix seconds>\"")
                    .at_row(line_no),
            ),
        }
    }
    if !errors.is_empty() {
        return Err(ValidationErrors(errors));
    }
    Ok(StockVector {
        quantities: values,
        as_of,
    })
}

pub fn write_stock_csv(stock: &StockVector) -> String {
    let values: Vec<String> = stock.quantities.iter().map(f64::to_string).collect();
    let mut out = values.join(",");
    out.push('\n');
    if let Some(t) = stock.as_of {
        writeln!(out, "as_of,{t}").unwrap();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StockSourceKind {
    File,
    HttpPoll,
    Inline,
}

/// Where component stock comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StockSource {
    pub kind: StockSourceKind,
    /// File path, URL, or the inline CSV values.
    pub location: String,
    /// Seconds between fetches; http-poll only.
    pub poll_interval: Option<u64>,
}

impl StockSource {
    pub fn file(path: impl Into<PathBuf>) -> Self {
        StockSource {
            kind: StockSourceKind::File,
            location: path.into().to_string_lossy().into_owned(),
            poll_interval: None,
        }
    }

    pub fn inline(values: &[f64]) -> Self {
        let text: Vec<String> = values.iter().map(f64::to_string).collect();
        StockSource {
            kind: StockSourceKind::Inline,
            location: text.join(","),
            poll_interval: None,
        }
    }

    pub fn http_poll(url: impl Into<String>, poll_interval: u64) -> Self {
        StockSource {
            kind: StockSourceKind::HttpPoll,
            location: url.into(),
            poll_interval: Some(poll_interval),
        }
    }

    /// Replaces `self` with an http-poll source when [`STOCK_URL_ENV`] is set.
    pub fn with_env_override(self) -> Self {
        match std::env::var(STOCK_URL_ENV) {
            Ok(url) if !url.trim().is_empty() => {
                let interval = self.poll_interval.unwrap_or(DEFAULT_POLL_INTERVAL);
                StockSource::http_poll(url.trim(), interval)
            }
            _ => self,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationErrors> {
        if self.kind == StockSourceKind::HttpPoll && self.poll_interval.is_none_or(|s| s < 1) {
            return Err(ValidationError::new(
                ErrorCode::NegativeValue,
                "poll interval must be at least 1 second",
            )
            .into());
        }
        Ok(())
    }
}

impl FromStr for StockSource {
    type Err = ValidationErrors;

    /// `http(s)://...` polls, `inline:10,9,5` is literal, `file:PATH` or a
    /// bare path reads a stock file.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.starts_with("http://") || s.starts_with("https://") {
            Ok(StockSource::http_poll(s, DEFAULT_POLL_INTERVAL))
        } else if let Some(values) = s.strip_prefix("inline:") {
            Ok(StockSource::inline(&parse_quantities(values)?))
        } else {
            let path = s.strip_prefix("file:").unwrap_or(s);
            if path.is_empty() {
                return Err(ValidationError::new(ErrorCode::Empty, "stock source is empty").into());
            }
            Ok(StockSource::file(path))
        }
    }
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Reads stock once. The result always carries `as_of`: from the file's
/// `as_of` line, else the file modification time, else the read time.
pub fn load_stock(source: &StockSource, expected_m: usize) -> Result<StockVector> {
    source.validate()?;
    match source.kind {
        StockSourceKind::Inline => {
            let stock = parse_stock_csv(&source.location, expected_m)?;
            Ok(stamp(stock, now_secs()))
        }
        StockSourceKind::File => {
            let path = PathBuf::from(&source.location);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Unreachable(format!("{}: {e}", path.display())))?;
            let modified = std::fs::metadata(&path)
                .and_then(|m| m.modified())
                .ok()
                .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
                .map_or_else(now_secs, |d| d.as_secs());
            Ok(stamp(parse_stock_csv(&text, expected_m)?, modified))
        }
        StockSourceKind::HttpPoll => {
            let client = http_client()?;
            fetch_stock(&client, &source.location, expected_m)
        }
    }
}

fn stamp(mut stock: StockVector, fallback: u64) -> StockVector {
    stock.as_of.get_or_insert(fallback);
    stock
}

fn http_client() -> Result<reqwest::blocking::Client> {
    reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(10))
        .build()
        .map_err(|e| Error::Unreachable(e.to_string()))
}

/// JSON body of a stock feed; the same shape `GET /stock` serves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockBody {
    pub quantities: Vec<f64>,
    pub as_of: Option<u64>,
}

fn fetch_stock(client: &reqwest::blocking::Client, url: &str, expected_m: usize) -> Result<StockVector> {
    let body: StockBody = client
        .get(url)
        .send()
        .and_then(|r| r.error_for_status())
        .and_then(|r| r.json())
        .map_err(|e| Error::Unreachable(format!("{url}: {e}")))?;
    if body.quantities.len() != expected_m {
        return Err(Error::dimension(format!(
            "stock feed returned {} values, expected {expected_m}",
            body.quantities.len()
        )));
    }
    let mut errors = Vec::new();
    check_quantities(&body.quantities, "stock", &mut errors);
    if !errors.is_empty() {
        return Err(Error::Validation(ValidationErrors(errors)));
    }
    let as_of = body.as_of.unwrap_or_else(now_secs);
    Ok(StockVector::new(body.quantities).with_as_of(as_of))
}

/// Background poller for an http-poll source. Readers get the last good
/// snapshot; failed fetches keep the previous value and its `as_of`.
pub struct StockFeed {
    latest: Arc<RwLock<Option<StockVector>>>,
    last_error: Arc<RwLock<Option<String>>>,
    stop: Arc<AtomicBool>,
    worker: Option<JoinHandle<()>>,
}

impl StockFeed {
    /// Fetches once, then keeps polling every `poll_interval` seconds on a
    /// background thread. The HTTP client lives entirely on that thread, so
    /// this may be called from inside an async runtime.
    pub fn spawn(source: &StockSource, expected_m: usize) -> Result<Self> {
        source.validate()?;
        if source.kind != StockSourceKind::HttpPoll {
            let stock = load_stock(source, expected_m)?;
            return Ok(StockFeed::fixed(stock));
        }
        let interval = Duration::from_secs(source.poll_interval.unwrap_or(DEFAULT_POLL_INTERVAL));
        let url = source.location.clone();
        let latest = Arc::new(RwLock::new(None));
        let last_error = Arc::new(RwLock::new(None));
        let stop = Arc::new(AtomicBool::new(false));
        let (first_tx, first_rx) = std::sync::mpsc::channel();

        let worker = {
            let latest = Arc::clone(&latest);
            let last_error = Arc::clone(&last_error);
            let stop = Arc::clone(&stop);
            std::thread::Builder::new()
                .name("stock-feed".into())
                .spawn(move || {
                    let client = match http_client() {
                        Ok(c) => c,
                        Err(e) => {
                            *last_error.write().unwrap() = Some(e.to_string());
                            let _ = first_tx.send(());
                            return;
                        }
                    };
                    let tick = Duration::from_millis(50);
                    let mut first = Some(first_tx);
                    loop {
                        match fetch_stock(&client, &url, expected_m) {
                            Ok(s) => {
                                *latest.write().unwrap() = Some(s);
                                *last_error.write().unwrap() = None;
                            }
                            Err(Error::Unreachable(why)) => *last_error.write().unwrap() = Some(why),
                            Err(e) => *last_error.write().unwrap() = Some(e.to_string()),
                        }
                        if let Some(tx) = first.take() {
                            let _ = tx.send(());
                        }
                        let mut waited = Duration::ZERO;
                        while waited < interval {
                            if stop.load(Ordering::Relaxed) {
                                return;
                            }
                            std::thread::sleep(tick);
                            waited += tick;
                        }
                    }
                })?
        };
        let _ = first_rx.recv();
        Ok(StockFeed {
            latest,
            last_error,
            stop,
            worker: Some(worker),
        })
    }

    /// A feed that never changes.
    pub fn fixed(stock: StockVector) -> Self {
        StockFeed {
            latest: Arc::new(RwLock::new(Some(stock))),
            last_error: Arc::new(RwLock::new(None)),
            stop: Arc::new(AtomicBool::new(true)),
            worker: None,
        }
    }

    /// The most recent good snapshot, or `UNREACHABLE` if none was ever fetched.
    pub fn snapshot(&self) -> Result<StockVector> {
        self.latest.read().unwrap().clone().ok_or_else(|| {
            Error::Unreachable(
                self.last_error
                    .read()
                    .unwrap()
                    .clone()
                    .unwrap_or_else(|| "no stock fetched yet".into()),
            )
        })
    }

    pub fn last_error(&self) -> Option<String> {
        self.last_error.read().unwrap().clone()
    }
}

impl Drop for StockFeed {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}
