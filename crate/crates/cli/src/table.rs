//! Named tables and their CSV rendering.

use serde::Serialize;
use stein_lab::units;

/// Unit tag carried in every CSV header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Unit {
    /// Log-valued, in the configured base.
    Log,
    Prob,
    Count,
    /// Dimensionless real.
    Ratio,
    Flag,
    Label,
}

impl Unit {
    fn tag(self) -> &'static str {
        match self {
            Unit::Log => units::unit(),
            Unit::Prob => "prob",
            Unit::Count => "count",
            Unit::Ratio => "ratio",
            Unit::Flag => "flag",
            Unit::Label => "label",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// Twelve significant digits, scientific notation.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.11e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => fmt_num(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<(String, Unit)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[(&str, Unit)]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|(c, u)| (c.to_string(), *u)).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|(c, u)| format!("{c} [{}]", u.tag())))
            .expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_units_and_digits() {
        let mut t = Table::new("t", &[("n", Unit::Count), ("rate", Unit::Log), ("note", Unit::Label)]);
        t.push(vec![3usize.into(), (1.0 / 3.0).into(), "a,b".into()]);
        let text = String::from_utf8(t.to_csv()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), format!("n [count],rate [{}],note [label]", units::unit()));
        assert_eq!(lines.next().unwrap(), "3,3.33333333333e-1,\"a,b\"");
    }
}
