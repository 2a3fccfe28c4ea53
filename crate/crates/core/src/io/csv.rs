//! Deterministic CSV tables.
//!
//! Floats use the shortest representation that parses back to the same
//! `f64` (never more than 17 significant digits), switching to exponent
//! notation outside `[1e-5, 1e16)`.

use std::io::Write;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    UInt(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("non-finite value {value} in row {row}, column `{column}`")]
    NonFinite { row: usize, column: String, value: f64 },
    #[error("row {row} has {got} cells, header has {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("malformed CSV at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Float values of a column; non-float cells are skipped.
    pub fn float_column(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.column_index(name) else { return vec![] };
        self.rows
            .iter()
            .filter_map(|r| match r.get(k) {
                Some(Cell::Float(v)) => Some(*v),
                _ => None,
            })
            .collect()
    }

    /// Checks the table is rectangular and every float is finite.
    pub fn validate(&self) -> Result<(), CsvError> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.header.len() {
                return Err(CsvError::Ragged { row: i, got: row.len(), expected: self.header.len() });
            }
            for (cell, column) in row.iter().zip(&self.header) {
                if let Cell::Float(v) = cell {
                    if !v.is_finite() {
                        return Err(CsvError::NonFinite { row: i, column: column.clone(), value: *v });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, CsvError> {
        let mut buf = Vec::new();
        write_csv(self, &mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }
}

/// Shortest round-trip decimal form of a finite float.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn render(cell: &Cell) -> String {
    match cell {
        Cell::Float(v) => format_float(*v),
        Cell::Int(v) => v.to_string(),
        Cell::UInt(v) => v.to_string(),
        Cell::Text(s) => escape(s),
        Cell::Empty => String::new(),
    }
}

/// Validates the whole table, then writes header and rows with `\n` endings.
pub fn write_csv<W: Write>(table: &CsvTable, mut sink: W) -> Result<(), CsvError> {
    table.validate()?;
    let header: Vec<String> = table.header.iter().map(|h| escape(h)).collect();
    writeln!(sink, "{}", header.join(","))?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(render).collect();
        writeln!(sink, "{}", cells.join(","))?;
    }
    sink.flush()?;
    Ok(())
}

/// Parses CSV text into a header and raw string records.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>), CsvError> {
    let mut records = Vec::new();
    let mut record = Vec::new();
    let mut field = String::new();
    let mut in_quotes = false;
    let mut line = 1;
    let mut chars = text.chars().peekable();
    let mut dirty = false;
    while let Some(ch) = chars.next() {
        if in_quotes {
            match ch {
                '"' if chars.peek() == Some(&'"') => {
                    chars.next();
                    field.push('"');
                }
                '"' => in_quotes = false,
                '\n' => {
                    line += 1;
                    field.push(ch);
                }
                _ => field.push(ch),
            }
            continue;
        }
        match ch {
            '"' if field.is_empty() => {
                in_quotes = true;
                dirty = true;
            }
            '"' => {
                return Err(CsvError::Malformed { line, reason: "quote inside unquoted field".into() })
            }
            ',' => {
                record.push(std::mem::take(&mut field));
                dirty = true;
            }
            '\r' if chars.peek() == Some(&'\n') => {}
            '\n' => {
                record.push(std::mem::take(&mut field));
                records.push(std::mem::take(&mut record));
                dirty = false;
                line += 1;
            }
            _ => {
                field.push(ch);
                dirty = true;
            }
        }
    }
    if in_quotes {
        return Err(CsvError::Malformed { line, reason: "unterminated quote".into() });
    }
    if dirty {
        record.push(field);
        records.push(record);
    }
    let mut it = records.into_iter();
    let header = it
        .next()
        .ok_or_else(|| CsvError::Malformed { line: 1, reason: "missing header".into() })?;
    let rows: Vec<Vec<String>> = it.collect();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != header.len() {
            return Err(CsvError::Ragged { row: i, got: r.len(), expected: header.len() });
        }
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = CsvTable::new(["t", "x1", "x2", "q"]);
        assert_eq!(t.to_csv_string().unwrap(), "t,x1,x2,q\n");
    }

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(-0.0), "-0");
        assert_eq!(format_float(1e-14), "1e-14");
        assert_eq!(format_float(2.8284271247461903), "2.8284271247461903");
        assert_eq!(format_float(0.1 + 0.2), "0.30000000000000004");
        assert_eq!(format_float(1e16), "1e16");
    }

    #[test]
    fn nan_rejected_before_writing() {
        let mut t = CsvTable::new(["a", "b"]);
        t.push(vec![1.0.into(), 2.0.into()]);
        t.push(vec![f64::NAN.into(), 2.0.into()]);
        let mut sink = Vec::new();
        assert!(matches!(write_csv(&t, &mut sink), Err(CsvError::NonFinite { row: 1, .. })));
        assert!(sink.is_empty());
    }

    #[test]
    fn ragged_rejected() {
        let mut t = CsvTable::new(["a", "b"]);
        t.push(vec![1.0.into()]);
        assert!(matches!(t.to_csv_string(), Err(CsvError::Ragged { .. })));
    }

    #[test]
    fn mixed_cells_and_quoting() {
        let mut t = CsvTable::new(["class", "count", "z"]);
        t.push(vec!["collapse_to_1".into(), 7u64.into(), Cell::Empty]);
        t.push(vec!["a,\"b\"".into(), (-3i64).into(), 0.25.into()]);
        let s = t.to_csv_string().unwrap();
        assert_eq!(s, "class,count,z\ncollapse_to_1,7,\n\"a,\"\"b\"\"\",-3,0.25\n");
        let (h, rows) = read_csv(&s).unwrap();
        assert_eq!(h, vec!["class", "count", "z"]);
        assert_eq!(rows[1], vec!["a,\"b\"", "-3", "0.25"]);
        assert_eq!(rows[0][2], "");
    }

    proptest! {
        #[test]
        fn floats_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            let s = format_float(v);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
            let digits = s.split(['e', 'E']).next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect::<String>();
            prop_assert!(digits.trim_start_matches('0').len() <= 17, "{}", s);
        }

        #[test]
        fn tables_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e300f64..1e300, 3), 0..20)) {
            let mut t = CsvTable::new(["a", "b", "c"]);
            for r in &rows {
                t.push(r.iter().map(|&v| Cell::Float(v)).collect());
            }
            let s = t.to_csv_string().unwrap();
            let (_, parsed) = read_csv(&s).unwrap();
            prop_assert_eq!(parsed.len(), rows.len());
            for (p, r) in parsed.iter().zip(&rows) {
                for (ps, v) in p.iter().zip(r) {
                    prop_assert_eq!(ps.parse::<f64>().unwrap().to_bits(), v.to_bits());
                }
            }
        }
    }
}
