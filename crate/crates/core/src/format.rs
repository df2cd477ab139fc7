//! Number rendering shared by text reports, CSV exports and the CLI.

use std::fmt::Write as _;

/// Up to six significant digits, integers without a decimal point.
pub fn num(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    // sub-nanoton residue from subtraction
    if value.abs() < 1e-9 {
        return "0".to_string();
    }
    if value == value.trunc() && value.abs() < 1e15 {
        return format!("{}", value as i64);
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let text = format!("{value:.decimals$}");
    let text = if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        text
    };
    if text == "-0" {
        "0".to_string()
    } else {
        text
    }
}

/// `[a b c]`, each entry through [`num`].
pub fn bracketed(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|&v| num(v)).collect();
    format!("[{}]", parts.join(" "))
}

/// Left-aligns the first `left` columns, right-aligns the rest.
pub fn table(header: &[String], rows: &[Vec<String>], left: usize) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let mut line = String::new();
        for (k, (cell, &w)) in row.iter().zip(&widths).enumerate() {
            if k > 0 {
                line.push_str("  ");
            }
            if k < left {
                write!(line, "{cell:<w$}").unwrap();
            } else {
                write!(line, "{cell:>w$}").unwrap();
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn matrix_table(first: &str, row_names: &[String], columns: &[String], rows: &[Vec<f64>]) -> String {
    let mut header = vec![first.to_string()];
    header.extend(columns.iter().cloned());
    let body: Vec<Vec<String>> = row_names
        .iter()
        .zip(rows)
        .map(|(name, row)| {
            std::iter::once(name.clone())
                .chain(row.iter().map(|&v| num(v)))
                .collect()
        })
        .collect();
    table(&header, &body, 1)
}
