use std::fmt::Write as _;

use clap::ValueEnum;
use phaselock::format::g17;
use serde_json::Value;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

/// JSON number, or `null` for the non-finite sentinels (an infinite upper bound).
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Fixed ten-decimal rendering for the text format.
pub fn fixed(x: f64) -> String {
    if x.is_finite() {
        format!("{:.10}", x)
    } else {
        g17(x)
    }
}

pub fn json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

/// CSV with one header row; every float cell in 17 significant digits.
pub struct Csv {
    out: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { out: header.join(",") + "\n" }
    }

    pub fn row<I: IntoIterator<Item = Cell>>(&mut self, cells: I) {
        let line: Vec<String> = cells.into_iter().map(|c| c.render()).collect();
        let _ = writeln!(self.out, "{}", line.join(","));
    }

    pub fn finish(self) -> String {
        self.out
    }
}

pub enum Cell {
    F(f64),
    I(u64),
    S(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => g17(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

/// `key = value` lines with the keys padded to a common width.
pub fn text_block(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{:<width$} = {}\n", k, v, width = width))
        .collect()
}
