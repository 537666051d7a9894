//! Plot-ready long-format tables and their CSV/JSON encodings. Every
//! figure-shaped output of the pipeline is a table here; rendering is left
//! to downstream tools.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{significance_stars, DunnMatrix, Factor, GroupedSample, KwResult};

/// Output encoding of report tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Str(String),
    Int(i64),
    Float(f64),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Value {
        Value::Str(s.into())
    }

    fn csv_field(&self) -> String {
        match self {
            Value::Str(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Value::Int(i) => i.to_string(),
            Value::Float(f) => f.to_string(),
        }
    }
}

impl From<f64> for Value {
    fn from(f: f64) -> Value {
        Value::Float(f)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Value {
        Value::Int(i)
    }
}

impl From<u32> for Value {
    fn from(i: u32) -> Value {
        Value::Int(i64::from(i))
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Value {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Value {
        Value::Str(s)
    }
}

/// Named table with a fixed column set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Table {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(Value::csv_field).collect();
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    /// JSON array of objects, column name to value, same values as CSV.
    pub fn to_json(&self) -> String {
        let objects: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| {
                        let jv = match v {
                            Value::Str(s) => serde_json::Value::String(s.clone()),
                            Value::Int(i) => serde_json::Value::from(*i),
                            Value::Float(f) => serde_json::Value::from(*f),
                        };
                        (c.clone(), jv)
                    })
                    .collect()
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&objects).expect("table serializes");
        text.push('\n');
        text
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    /// Writes the table as `<dir>/<name>.<ext>` and returns the path.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(format!("{}.{}", self.name, format.extension()));
        fs::write(&path, self.render(format)).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// One row of the grouped-test summary (factor x variable).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KwSummaryRow {
    pub variable: String,
    pub factor: Factor,
    pub result: KwResult,
}

/// Summary table of Kruskal-Wallis results across factors and variables.
/// The statistic column is emitted under both its proper name and the
/// legacy "f_statistic" header used by comparable reports.
pub fn kw_summary_table(rows: &[KwSummaryRow]) -> Table {
    let mut table = Table::new(
        "kruskal_wallis_summary",
        &[
            "variable",
            "factor",
            "h_statistic",
            "f_statistic",
            "df",
            "p_value",
            "significance",
        ],
    );
    for row in rows {
        table.push(vec![
            row.variable.as_str().into(),
            row.factor.as_str().into(),
            row.result.h_statistic.into(),
            row.result.h_statistic.into(),
            Value::Int(row.result.df as i64),
            row.result.p_value.into(),
            significance_stars(row.result.p_value).into(),
        ]);
    }
    table
}

/// Long-format Dunn matrix: one row per ordered group pair.
pub fn dunn_table(name: impl Into<String>, matrix: &DunnMatrix) -> Table {
    let mut table = Table::new(
        name,
        &[
            "group_a",
            "group_b",
            "p_adjusted",
            "adjustment",
            "significance",
        ],
    );
    for i in 0..matrix.labels.len() {
        for j in (i + 1)..matrix.labels.len() {
            let p = matrix.p[i][j];
            table.push(vec![
                matrix.labels[i].as_str().into(),
                matrix.labels[j].as_str().into(),
                p.into(),
                matrix.adjustment.as_str().into(),
                significance_stars(p).into(),
            ]);
        }
    }
    table
}

/// Long-format view of a grouped sample: (factor, group, value) rows.
pub fn grouped_values_table(name: impl Into<String>, g: &GroupedSample) -> Table {
    let mut table = Table::new(name, &["factor", "group", "value"]);
    for (label, values) in &g.groups {
        for &v in values {
            table.push(vec![
                g.factor.as_str().into(),
                label.as_str().into(),
                v.into(),
            ]);
        }
    }
    table
}

/// Questionnaire summary: per-phase item means, subscale means and total
/// mean over the responding subjects.
pub fn ssq_summary_table(rows: &[crate::dataset::read::SsqRow]) -> Table {
    use crate::stats::{ssq_score, SSQ_ITEMS};
    let mut table = Table::new("ssq_summary", &["phase", "measure", "mean", "n"]);
    let mut phases: Vec<String> = rows.iter().map(|(_, p, _)| p.clone()).collect();
    phases.sort();
    phases.dedup();
    for phase in &phases {
        let group: Vec<_> = rows.iter().filter(|(_, p, _)| p == phase).collect();
        let n = group.len();
        if n == 0 {
            continue;
        }
        for item in 0..SSQ_ITEMS {
            let mean = group
                .iter()
                .map(|(_, _, r)| f64::from(r.ratings[item]))
                .sum::<f64>()
                / n as f64;
            table.push(vec![
                phase.as_str().into(),
                format!("item_{:02}", item + 1).into(),
                mean.into(),
                Value::Int(n as i64),
            ]);
        }
        let mut sub_totals: std::collections::BTreeMap<&str, f64> = Default::default();
        let mut total = 0.0;
        for (_, _, r) in &group {
            let (t, per) = ssq_score(r);
            total += f64::from(t);
            for (scale, v) in per {
                *sub_totals.entry(scale.as_str()).or_insert(0.0) += f64::from(v);
            }
        }
        for (scale, sum) in sub_totals {
            table.push(vec![
                phase.as_str().into(),
                scale.into(),
                (sum / n as f64).into(),
                Value::Int(n as i64),
            ]);
        }
        table.push(vec![
            phase.as_str().into(),
            "total".into(),
            (total / n as f64).into(),
            Value::Int(n as i64),
        ]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{dunn_posthoc, kruskal_wallis, Adjustment};

    #[test]
    fn csv_escaping() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec!["plain".into(), "with,comma".into()]);
        t.push(vec!["with \"quote\"".into(), 1.5.into()]);
        let csv = t.to_csv();
        assert!(csv.contains("plain,\"with,comma\""));
        assert!(csv.contains("\"with \"\"quote\"\"\",1.5"));
    }

    #[test]
    fn csv_and_json_encode_identical_values() {
        let mut t = Table::new("t", &["name", "count", "ratio"]);
        t.push(vec!["x".into(), Value::Int(3), 0.125.into()]);
        t.push(vec!["y".into(), Value::Int(-1), (1.0 / 3.0).into()]);

        let json: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        let csv = t.to_csv();
        let csv_rows: Vec<&str> = csv.lines().skip(1).collect();
        for (row_json, row_csv) in json.as_array().unwrap().iter().zip(csv_rows) {
            let fields: Vec<&str> = row_csv.split(',').collect();
            assert_eq!(row_json["name"].as_str().unwrap(), fields[0]);
            assert_eq!(row_json["count"].to_string(), fields[1]);
            let ratio_csv: f64 = fields[2].parse().unwrap();
            assert_eq!(row_json["ratio"].as_f64().unwrap(), ratio_csv);
        }
    }

    #[test]
    fn table_write_roundtrip() {
        let tmp = tempfile::tempdir().unwrap();
        let mut t = Table::new("sample", &["v"]);
        t.push(vec![2.5.into()]);
        let p_csv = t.write(tmp.path(), OutputFormat::Csv).unwrap();
        let p_json = t.write(tmp.path(), OutputFormat::Json).unwrap();
        assert!(p_csv.ends_with("sample.csv"));
        assert!(p_json.ends_with("sample.json"));
        assert_eq!(fs::read_to_string(p_csv).unwrap(), "v\n2.5\n");
    }

    #[test]
    fn kw_and_dunn_tables_shaped() {
        let g = GroupedSample::new(
            Factor::Course,
            vec![
                ("A".into(), vec![1.0, 2.0, 3.0]),
                ("B".into(), vec![4.0, 5.0, 6.0]),
                ("C".into(), vec![7.0, 8.0, 9.0]),
            ],
        )
        .unwrap();
        let kw = kruskal_wallis(&g).unwrap();
        let table = kw_summary_table(&[KwSummaryRow {
            variable: "time_duration".into(),
            factor: Factor::Course,
            result: kw,
        }]);
        assert_eq!(table.rows.len(), 1);

        let dunn = dunn_posthoc(&g, Adjustment::Holm).unwrap();
        let table = dunn_table("dunn_course", &dunn);
        assert_eq!(table.rows.len(), 3); // 3 choose 2
    }
}
