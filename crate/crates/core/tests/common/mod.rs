//! Instance generators and independent oracles shared by the integration
//! tests. Grid instances keep weights in hundredths and tonnages in tenths,
//! so the oracles below work in exact integer milli-tons.
#![allow(dead_code)]

use std::collections::BTreeSet;

use blendplan::{DemandVector, RecipeMatrix, StockVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn worked_recipes() -> RecipeMatrix {
    RecipeMatrix::new(
        vec!["BLEND1".into(), "BLEND2".into()],
        vec!["C1".into(), "C2".into(), "C3".into()],
        vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5]],
    )
    .unwrap()
}

pub fn worked_stock() -> StockVector {
    StockVector::new(vec![10.0, 9.0, 5.0])
}

#[derive(Debug, Clone)]
pub struct Grid {
    /// Weights in hundredths; every row sums to 100.
    pub k: Vec<Vec<i64>>,
    /// Stock in tenths of a ton.
    pub stock: Vec<i64>,
    /// Demand in tenths of a ton.
    pub demand: Vec<i64>,
}

fn grid_row<R: Rng>(rng: &mut R, m: usize) -> Vec<i64> {
    let support = rng.random_range(1..=m);
    let columns = sample(rng, m, support).into_vec();
    let mut cuts: Vec<i64> = sample(rng, 99, support - 1).into_iter().map(|c| c as i64 + 1).collect();
    cuts.sort_unstable();
    cuts.push(100);
    let mut row = vec![0; m];
    let mut last = 0;
    for (&col, cut) in columns.iter().zip(cuts) {
        row[col] = cut - last;
        last = cut;
    }
    row
}

impl Grid {
    /// `n` in `1..=max_n`, `m` in `1..=max_m`, stock up to `max_stock`
    /// tenths per component, demand up to `max_demand` tenths per product.
    pub fn random<R: Rng>(rng: &mut R, max_n: usize, max_m: usize, max_stock: i64, max_demand: i64) -> Self {
        let n = rng.random_range(1..=max_n);
        let m = rng.random_range(1..=max_m);
        Self::sized(rng, n, m, max_stock, max_demand)
    }

    pub fn sized<R: Rng>(rng: &mut R, n: usize, m: usize, max_stock: i64, max_demand: i64) -> Self {
        Grid {
            k: (0..n).map(|_| grid_row(rng, m)).collect(),
            stock: (0..m).map(|_| rng.random_range(0..=max_stock)).collect(),
            demand: (0..n).map(|_| rng.random_range(0..=max_demand)).collect(),
        }
    }

    /// Redraws demand until the stock covers it, falling back to zero demand.
    pub fn with_feasible_demand<R: Rng>(mut self, rng: &mut R, max_demand: i64) -> Self {
        for _ in 0..20 {
            if self.demand_fits() {
                return self;
            }
            self.demand = (0..self.n()).map(|_| rng.random_range(0..=max_demand)).collect();
        }
        self.demand = vec![0; self.n()];
        self
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    pub fn m(&self) -> usize {
        self.stock.len()
    }

    pub fn recipes(&self) -> RecipeMatrix {
        RecipeMatrix::from_weights(
            self.k
                .iter()
                .map(|row| row.iter().map(|&w| w as f64 / 100.0).collect())
                .collect(),
        )
        .unwrap()
    }

    pub fn stock_vector(&self) -> StockVector {
        StockVector::new(self.stock.iter().map(|&t| t as f64 / 10.0).collect())
    }

    pub fn demand_vector(&self) -> DemandVector {
        DemandVector(self.demand.iter().map(|&t| t as f64 / 10.0).collect())
    }

    pub fn stock_milli(&self) -> Vec<i64> {
        self.stock.iter().map(|&t| t * 100).collect()
    }

    /// Component use of the demand, in milli-tons.
    pub fn demand_use_milli(&self) -> Vec<i64> {
        (0..self.m())
            .map(|j| (0..self.n()).map(|i| self.k[i][j] * self.demand[i]).sum())
            .collect()
    }

    pub fn demand_fits(&self) -> bool {
        self.demand_use_milli().iter().zip(self.stock_milli()).all(|(&u, s)| u <= s)
    }

    /// Stock left after the demand, in milli-tons.
    pub fn remaining_milli(&self) -> Vec<i64> {
        self.stock_milli().iter().zip(self.demand_use_milli()).map(|(s, u)| s - u).collect()
    }

    /// Milli-tons one whole ton of `product` takes from each component.
    pub fn ton_milli(&self, product: usize) -> Vec<i64> {
        self.k[product].iter().map(|&w| w * 10).collect()
    }
}

/// Float recipes with random zeros, rows normalised to one.
pub fn random_float_recipes<R: Rng>(rng: &mut R, n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let mut row: Vec<f64> = (0..m)
                .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.001..1.0) })
                .collect();
            if row.iter().all(|&w| w == 0.0) {
                row[rng.random_range(0..m)] = 1.0;
            }
            let sum: f64 = row.iter().sum();
            row.iter().map(|w| w / sum).collect()
        })
        .collect()
}

/// `diag(p) * a` as a full matrix product.
pub fn naive_requirements(p: &[f64], a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = p.len();
    let m = a.first().map_or(0, Vec::len);
    let diag: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..n).map(|c| if r == c { p[r] } else { 0.0 }).collect())
        .collect();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            for (l, d) in diag[i].iter().enumerate() {
                out[i][j] += d * a[l][j];
            }
        }
    }
    out
}

pub fn fits(usage: &[i64], stock: &[i64]) -> bool {
    usage.iter().zip(stock).all(|(u, s)| u <= s)
}

/// Largest whole tonnage of `product` the stock allows, counting up one ton
/// at a time.
pub fn increment_capacity(grid: &Grid, product: usize, stock_milli: &[i64]) -> u64 {
    let per_ton = grid.ton_milli(product);
    let mut q = 0i64;
    loop {
        let usage: Vec<i64> = per_ton.iter().map(|w| w * (q + 1)).collect();
        if !fits(&usage, stock_milli) {
            return q as u64;
        }
        q += 1;
    }
}

/// The per-recipe minimum over nonzero weights of the integer part of
/// available/weight, as a two-level loop over lines and columns, with the
/// "no bound yet" start value. Exact on the grid: (t/10)/(k/100) = 10t/k.
pub fn double_loop_capacity(k: &[Vec<i64>], stock_tenths: &[i64]) -> Vec<u64> {
    let mut p2 = Vec::new();
    for line in k {
        let mut prod: Option<i64> = None;
        for (column, &weight) in line.iter().enumerate() {
            let available = stock_tenths[column];
            if weight != 0 {
                let minim_bp = (10 * available) / weight;
                if prod.is_none_or(|p| p > minim_bp) {
                    prod = Some(minim_bp);
                }
            }
        }
        p2.push(prod.expect("rows have a nonzero weight") as u64);
    }
    p2
}

/// All additions reachable by repeatedly producing the full capacity of any
/// product that can still be made, until nothing can.
pub fn naive_variants(grid: &Grid) -> BTreeSet<Vec<u64>> {
    fn caps(grid: &Grid, rem: &[i64]) -> Vec<i64> {
        (0..grid.n())
            .map(|i| {
                grid.ton_milli(i)
                    .iter()
                    .zip(rem)
                    .filter(|(w, _)| **w > 0)
                    .map(|(w, r)| r / w)
                    .min()
                    .unwrap()
            })
            .collect()
    }
    fn walk(grid: &Grid, rem: Vec<i64>, adds: Vec<u64>, out: &mut BTreeSet<Vec<u64>>) {
        let c = caps(grid, &rem);
        let mut any = false;
        for (i, &cap) in c.iter().enumerate() {
            if cap > 0 {
                any = true;
                let next: Vec<i64> = rem.iter().zip(grid.ton_milli(i)).map(|(r, w)| r - cap * w).collect();
                let mut a = adds.clone();
                a[i] += cap as u64;
                walk(grid, next, a, out);
            }
        }
        if !any {
            out.insert(adds);
        }
    }
    let mut out = BTreeSet::new();
    walk(grid, grid.remaining_milli(), vec![0; grid.n()], &mut out);
    out
}

/// Stock left after the demand plus `adds`, in milli-tons.
pub fn left_after(grid: &Grid, adds: &[u64]) -> Vec<i64> {
    let mut rem = grid.remaining_milli();
    for (i, &q) in adds.iter().enumerate() {
        for (r, w) in rem.iter_mut().zip(grid.ton_milli(i)) {
            *r -= w * q as i64;
        }
    }
    rem
}

pub fn is_feasible(grid: &Grid, adds: &[u64]) -> bool {
    left_after(grid, adds).iter().all(|&r| r >= 0)
}

/// No single extra ton of any product fits.
pub fn is_locally_maximal(grid: &Grid, adds: &[u64]) -> bool {
    let rem = left_after(grid, adds);
    (0..grid.n()).all(|i| !fits(&grid.ton_milli(i), &rem))
}

/// One parsed line of a text step report.
#[derive(Debug, Clone, PartialEq)]
pub enum ReportLine {
    Choices { step: usize, caps: Vec<f64> },
    Row { step: usize, label: String, p3: Vec<f64>, totals: Vec<f64> },
}

fn numbers(tokens: &[&str]) -> Result<Vec<f64>, String> {
    tokens
        .iter()
        .map(|t| t.parse::<f64>().map_err(|_| format!("{t:?} is not a number")))
        .collect()
}

/// Equal up to the six significant digits reports print.
pub fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-5 * x.abs().max(y.abs()).max(1.0))
}

/// Tokenises a text step report for `n` products.
pub fn parse_report(text: &str, n: usize) -> Result<(Vec<String>, Vec<ReportLine>), String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty report")?.split_whitespace().collect();
    if header.len() != 5 + n || header[..5] != ["step", "sub", "step", "P3", "matrix"] {
        return Err(format!("bad header {header:?}"));
    }
    let products = header[5..].iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    for line in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let step: usize = tokens.first().and_then(|t| t.parse().ok()).ok_or(format!("no step in {line:?}"))?;
        if tokens.get(1..3) == Some(&["Possible", "choices:"][..]) {
            let caps = numbers(&tokens[3..])?;
            if caps.len() != n {
                return Err(format!("choices row {line:?} has {} values", caps.len()));
            }
            out.push(ReportLine::Choices { step, caps });
            continue;
        }
        let label = tokens.get(1).ok_or(format!("no label in {line:?}"))?.to_string();
        let open = line.find('[').ok_or(format!("no P3 cell in {line:?}"))?;
        let close = line.find(']').ok_or(format!("unclosed P3 cell in {line:?}"))?;
        let p3 = numbers(&line[open + 1..close].split_whitespace().collect::<Vec<_>>())?;
        let totals = numbers(&line[close + 1..].split_whitespace().collect::<Vec<_>>())?;
        if p3.len() != n || totals.len() != n {
            return Err(format!("row {line:?} has the wrong width"));
        }
        out.push(ReportLine::Row { step, label, p3, totals });
    }
    Ok((products, out))
}

/// Shape facts a valid report establishes.
#[derive(Debug, Default)]
pub struct Grammar {
    pub terminals: Vec<Vec<f64>>,
    pub branch_rows: usize,
    pub dotted_labels: usize,
}

/// Checks the row grammar of a full tree report:
///
/// report := demand node
/// node   := forced* (terminal | choices branch+)
/// branch := choice node
///
/// The demand row is step 0, label 0. A choice at the first branch sets the
/// step to its option and restarts numbering at 1; deeper choices append
/// their option to the label prefix. Forced and terminal rows count on.
/// Terminal rows add nothing. Totals follow the P3 deltas along each path.
pub fn check_grammar(lines: &[ReportLine], demand: &[f64]) -> Result<Grammar, String> {
    check(lines, demand, false)
}

/// Like [`check_grammar`] for a report of one path: each choices row is
/// followed by exactly one of the offered branches.
pub fn check_path_grammar(lines: &[ReportLine], demand: &[f64]) -> Result<Grammar, String> {
    check(lines, demand, true)
}

fn check(lines: &[ReportLine], demand: &[f64], single: bool) -> Result<Grammar, String> {
    struct Ctx {
        step: usize,
        branched: bool,
        prefix: Vec<usize>,
        seq: usize,
        totals: Vec<f64>,
    }
    impl Ctx {
        fn label(&self) -> String {
            let mut parts: Vec<String> = self.prefix.iter().map(|p| p.to_string()).collect();
            parts.push(self.seq.to_string());
            parts.join(".")
        }
    }
    fn expect_row(
        lines: &[ReportLine],
        pos: &mut usize,
        ctx: &Ctx,
    ) -> Result<(Vec<f64>, Vec<f64>), String> {
        match lines.get(*pos) {
            Some(ReportLine::Row { step, label, p3, totals }) => {
                if *step != ctx.step || *label != ctx.label() {
                    return Err(format!(
                        "line {}: got step {step} label {label}, expected step {} label {}",
                        *pos + 2,
                        ctx.step,
                        ctx.label()
                    ));
                }
                *pos += 1;
                Ok((p3.clone(), totals.clone()))
            }
            other => Err(format!("line {}: expected a row, got {other:?}", *pos + 2)),
        }
    }
    fn add(ctx: &mut Ctx, p3: &[f64], totals: &[f64], line: usize) -> Result<(), String> {
        for (t, d) in ctx.totals.iter_mut().zip(p3) {
            *t += d;
        }
        if !close(&ctx.totals, totals) {
            return Err(format!("line {line}: totals {totals:?}, expected {:?}", ctx.totals));
        }
        Ok(())
    }
    fn node(lines: &[ReportLine], pos: &mut usize, mut ctx: Ctx, g: &mut Grammar, single: bool) -> Result<(), String> {
        loop {
            match lines.get(*pos) {
                Some(ReportLine::Choices { step, caps }) => {
                    if *step != ctx.step {
                        return Err(format!("line {}: choices row on step {step}", *pos + 2));
                    }
                    *pos += 1;
                    let offered: Vec<(usize, f64)> =
                        caps.iter().copied().enumerate().filter(|(_, c)| *c > 0.0).collect();
                    if offered.len() < 2 {
                        return Err(format!("line {}: fewer than two choices", *pos + 1));
                    }
                    let taken: Vec<usize> = if single {
                        let Some(ReportLine::Row { p3, .. }) = lines.get(*pos) else {
                            return Err(format!("line {}: no branch after choices", *pos + 2));
                        };
                        let k = offered
                            .iter()
                            .position(|&(product, cap)| p3[product] == cap)
                            .ok_or(format!("line {}: branch {p3:?} was not offered", *pos + 2))?;
                        vec![k]
                    } else {
                        (0..offered.len()).collect()
                    };
                    for k in taken {
                        let (product, cap) = offered[k];
                        let option = k + 1;
                        let mut child = Ctx {
                            step: ctx.step,
                            branched: ctx.branched,
                            prefix: ctx.prefix.clone(),
                            seq: 1,
                            totals: ctx.totals.clone(),
                        };
                        if child.branched {
                            child.prefix.push(option);
                        } else {
                            child.branched = true;
                            child.step = option;
                        }
                        let at = *pos + 2;
                        let (p3, totals) = expect_row(lines, pos, &child)?;
                        let mut want = vec![0.0; p3.len()];
                        want[product] = cap;
                        if p3 != want {
                            return Err(format!("line {at}: choice P3 {p3:?}, expected {want:?}"));
                        }
                        add(&mut child, &p3, &totals, at)?;
                        g.branch_rows += 1;
                        if child.label().contains('.') {
                            g.dotted_labels += 1;
                        }
                        node(lines, pos, child, g, single)?;
                    }
                    return Ok(());
                }
                Some(ReportLine::Row { .. }) => {
                    ctx.seq += 1;
                    let at = *pos + 2;
                    let (p3, totals) = expect_row(lines, pos, &ctx)?;
                    let nonzero = p3.iter().filter(|v| **v != 0.0).count();
                    if ctx.label().contains('.') {
                        g.dotted_labels += 1;
                    }
                    match nonzero {
                        0 => {
                            add(&mut ctx, &p3, &totals, at)?;
                            g.terminals.push(totals);
                            return Ok(());
                        }
                        1 => add(&mut ctx, &p3, &totals, at)?,
                        _ => return Err(format!("line {at}: forced row adds to several products")),
                    }
                }
                None => return Err("report ends before a terminal row".into()),
            }
        }
    }

    let mut g = Grammar::default();
    match lines.first() {
        Some(ReportLine::Row { step: 0, label, p3, totals }) if label == "0" && close(p3, demand) && close(totals, demand) => {}
        other => return Err(format!("first row must be the demand, got {other:?}")),
    }
    let mut pos = 1;
    let ctx = Ctx {
        step: 0,
        branched: false,
        prefix: Vec::new(),
        seq: 0,
        totals: demand.to_vec(),
    };
    node(lines, &mut pos, ctx, &mut g, single)?;
    if pos != lines.len() {
        return Err(format!("{} trailing lines", lines.len() - pos));
    }
    Ok(g)
}

/// Serves `state` on an ephemeral local port; returns the base URL.
pub async fn spawn_service(state: blendplan::service::AppState) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let app = blendplan::service::router(std::sync::Arc::new(state));
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    format!("http://{addr}")
}

/// Service state over the worked recipes with an inline stock.
pub fn worked_state() -> blendplan::service::AppState {
    blendplan::service::AppState::new(
        worked_recipes(),
        blendplan::ingestion::StockSource::inline(worked_stock().as_slice()),
        blendplan::EngineConfig::default(),
    )
    .unwrap()
}

/// A session view with its id replaced, serialised the way the service does.
pub fn view_bytes(mut view: serde_json::Value, id: &str) -> Vec<u8> {
    if let Some(obj) = view.as_object_mut() {
        if obj.contains_key("id") {
            obj.insert("id".into(), serde_json::Value::String(id.to_string()));
        }
    }
    serde_json::to_vec(&view).unwrap()
}

/// A one-route HTTP server answering every request with the current
/// `(status, body)`; swap the response to simulate a changing or failing feed.
pub struct FakeFeed {
    pub url: String,
    pub response: std::sync::Arc<std::sync::Mutex<(u16, String)>>,
}

impl FakeFeed {
    pub fn start(status: u16, body: &str) -> Self {
        use std::io::{BufRead, BufReader, Write};
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/stock", listener.local_addr().unwrap());
        let response = std::sync::Arc::new(std::sync::Mutex::new((status, body.to_string())));
        let shared = std::sync::Arc::clone(&response);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut line = String::new();
                while reader.read_line(&mut line).is_ok_and(|n| n > 0) && line != "\r\n" {
                    line.clear();
                }
                let (status, body) = shared.lock().unwrap().clone();
                let _ = write!(
                    stream,
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
            }
        });
        FakeFeed { url, response }
    }

    pub fn set(&self, status: u16, body: &str) {
        *self.response.lock().unwrap() = (status, body.to_string());
    }
}
