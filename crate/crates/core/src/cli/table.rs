//! Plain CSV tables: ASCII, '.' decimals, '\n' line ends, 12 significant digits.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.header.len() {
                return Err(Error::Domain(format!(
                    "row {i} has {} values for {} columns",
                    row.len(),
                    self.header.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Domain(format!(
                        "non-finite value in column `{}`, row {i}",
                        self.header[j]
                    )));
                }
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format_number(*v));
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// Shortest decimal rendering of `x` rounded to 12 significant digits; scientific notation
/// outside 1e-5..1e15.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{m}e{exp}");
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    let mut s = String::new();
    let rounded: f64 = sci.parse().expect("valid float");
    write!(s, "{:.*}", decimals, rounded).expect("write to string");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// Parses a table written by [`Table::to_csv`].
pub fn parse_csv(text: &str) -> Result<Table> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid("csv", "empty table"))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|v| v.parse::<f64>().map_err(|e| Error::invalid("csv", e.to_string())))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(Table { header, rows })
}
