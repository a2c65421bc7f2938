//! Self-describing experiment reports in JSON or CSV.
//!
//! Reports carry the configuration that produced them. Output is a pure
//! function of the report: keys are sorted, floats use the shortest
//! round-trip representation, and nothing time- or host-dependent is
//! recorded.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// Rows of scalar cells under named columns.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; panics if its length differs from the header.
    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row length differs from header");
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Value,
    pub passed: bool,
    pub table: Table,
    /// Command-specific structured results.
    pub details: Value,
}

impl Report {
    pub fn new(command: &str, config: Value, passed: bool, table: Table, details: Value) -> Self {
        Report {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: command.to_owned(),
            config,
            passed,
            table,
            details,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Header comments with the command, verdict and config, then the table.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# {} {} {}", self.tool, self.version, self.command).unwrap();
        writeln!(out, "# passed: {}", self.passed).unwrap();
        writeln!(out, "# config: {}", serde_json::to_string(&self.config).unwrap()).unwrap();
        let header: Vec<String> = self.table.columns.iter().map(|c| csv_field(c)).collect();
        writeln!(out, "{}", header.join(",")).unwrap();
        for row in &self.table.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> std::io::Result<()> {
        out.write_all(self.render(format).as_bytes())?;
        out.flush()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => csv_field(s),
        other => csv_field(&other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Report {
        let mut t = Table::new(["name", "value"]);
        t.push(vec![json!("a,b"), json!(0.1)]);
        t.push(vec![json!("c"), Value::Null]);
        Report::new("demo", json!({"seed": 1, "family": "clifford"}), true, t, json!({}))
    }

    #[test]
    fn csv_quotes_and_embeds_config() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "# passed: true");
        assert_eq!(lines[2], r#"# config: {"family":"clifford","seed":1}"#);
        assert_eq!(lines[3], "name,value");
        assert_eq!(lines[4], "\"a,b\",0.1");
        assert_eq!(lines[5], "c,");
    }

    #[test]
    fn json_roundtrips() {
        let r = sample();
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.to_json(), sample().to_json());
    }
}
