use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use unideform::verify::VerificationReport;

/// Column-oriented numeric table written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Self { name: name.to_string(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    /// Header plus one line per row, `{:.16e}` (17 significant digits), LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let x = if *x == 0.0 { 0.0 } else { *x };
                write!(out, "{x:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// `name -> {value, tolerance, pass}`; non-finite values become `null`.
pub fn report_json(report: &VerificationReport) -> Value {
    let mut map = Map::new();
    for m in &report.metrics {
        let num = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
        map.insert(
            m.name.clone(),
            json!({
                "value": num(m.value),
                "tolerance": m.tolerance.map_or(Value::Null, num),
                "pass": m.pass,
            }),
        );
    }
    Value::Object(map)
}

pub fn write_file(path: &Path, contents: &str) -> std::io::Result<PathBuf> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_exactly() {
        let mut s = Series::new("x", &["t", "y"]);
        let vals = [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23];
        for &v in &vals {
            s.push(vec![v, -v]);
        }
        let text = s.to_csv();
        assert!(text.starts_with("t,y\n"));
        assert!(!text.contains('\r'));
        for (line, &v) in text.lines().skip(1).zip(&vals) {
            let parsed: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert_eq!(parsed, [v, -v]);
        }
    }

    #[test]
    fn report_has_value_tolerance_pass() {
        let mut r = VerificationReport::new();
        r.at_most("a", 1e-9, 1e-8).info("b", f64::NAN);
        let j = report_json(&r);
        assert_eq!(j["a"]["pass"], json!(true));
        assert_eq!(j["a"]["tolerance"], json!(1e-8));
        assert_eq!(j["b"]["value"], Value::Null);
        assert_eq!(j["b"]["pass"], json!(false));
    }
}
