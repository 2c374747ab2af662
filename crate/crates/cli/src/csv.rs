//! CSV artifacts: `#` metadata lines, one header row, then data rows.
//! Floats are written in scientific notation with 17 significant digits so
//! that values round-trip exactly.

use std::fmt::Write;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.push((key.into(), value.to_string()));
        self
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            // metadata values never span lines
            let _ = writeln!(out, "# {k}: {}", v.replace('\n', " "));
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        for record in std::iter::once(&self.header).chain(&self.rows) {
            w.write_record(record).expect("writing to memory cannot fail");
        }
        let bytes = w.into_inner().expect("writing to memory cannot fail");
        out.push_str(std::str::from_utf8(&bytes).expect("fields are UTF-8"));
        out
    }
}

/// Column names `prefix1..prefixN`.
pub fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

pub fn nums<'a, I: IntoIterator<Item = &'a f64>>(xs: I) -> impl Iterator<Item = String> + use<'a, I> {
    xs.into_iter().map(|x| num(*x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let mut t = CsvTable::new(["a", "b"]);
        t.meta("seed", 3);
        t.push(vec![num(0.1), num(-2.0)]);
        assert_eq!(
            t.render(),
            "# seed: 3\na,b\n1.0000000000000001e-1,-2.0000000000000000e0\n"
        );
    }

    #[test]
    fn fields_are_quoted() {
        let mut t = CsvTable::new(["label"]);
        t.push(vec!["a, b".into()]);
        assert_eq!(t.render(), "label\n\"a, b\"\n");
    }

    #[test]
    fn floats_round_trip() {
        for x in [std::f64::consts::PI, 1e-300, -7.25e11, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
