//! Output assembly: human tables, CSV, JSON lines, and plot-data files.
//! All numeric fields are emitted at 15 significant digits so that every
//! table re-parses to the values that produced it.

use crate::error::Result;
use crate::stats::ProfilePoint;
use crate::sweep::{SweepRecord, TrendVerdict};
use serde::Serialize;
use serde_json::Value;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Human,
    Csv,
    Json,
}

/// 15 significant digits, scientific.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.14e}")
}

fn round15(x: f64) -> f64 {
    if x.is_finite() {
        fmt_num(x).parse().unwrap()
    } else {
        x
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if !n.is_i64() && !n.is_u64() {
                    if let Some(r) = serde_json::Number::from_f64(round15(f)) {
                        *v = Value::Number(r);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// One JSON object per line, floats rounded to 15 significant digits.
pub fn json_line<T: Serialize>(record: &T) -> String {
    let mut value = serde_json::to_value(record).expect("serializable record");
    round_value(&mut value);
    value.to_string()
}

/// Column-oriented table for the human and CSV formats.
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Table {
        Table { headers: headers.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.headers.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => {
                let mut out = self.headers.join(",");
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                out
            }
            _ => {
                let mut widths: Vec<usize> = self.headers.iter().map(String::len).collect();
                for row in &self.rows {
                    for (w, cell) in widths.iter_mut().zip(row) {
                        *w = (*w).max(cell.len());
                    }
                }
                let line = |cells: &[String]| -> String {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, &w)| format!("{c:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                let mut out = line(&self.headers);
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&line(row));
                    out.push('\n');
                }
                out
            }
        }
    }
}

fn write_curve(dir: &Path, name: &str, xs: &[f64], ys: &[f64]) -> Result<()> {
    let mut out = String::new();
    for (x, y) in xs.iter().zip(ys) {
        out.push_str(&format!("{} {}\n", fmt_num(*x), fmt_num(*y)));
    }
    fs::write(dir.join(name), out)?;
    Ok(())
}

/// One file per profile curve: dtv, dkl, vkl against t.
pub fn write_profile_plots(dir: &Path, points: &[ProfilePoint]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let ts: Vec<f64> = points.iter().map(|p| p.t).collect();
    write_curve(dir, "dtv.dat", &ts, &points.iter().map(|p| p.dtv).collect::<Vec<_>>())?;
    write_curve(dir, "dkl.dat", &ts, &points.iter().map(|p| p.dkl).collect::<Vec<_>>())?;
    write_curve(dir, "vkl.dat", &ts, &points.iter().map(|p| p.vkl).collect::<Vec<_>>())?;
    Ok(())
}

/// One file per sweep curve: window ratio and vc statistic against n.
pub fn write_sweep_plots(dir: &Path, records: &[SweepRecord], verdict: &TrendVerdict) -> Result<()> {
    fs::create_dir_all(dir)?;
    let ns: Vec<f64> = records.iter().map(|r| r.n as f64).collect();
    write_curve(dir, "window_ratio.dat", &ns, &verdict.window_ratio)?;
    write_curve(dir, "vc.dat", &ns, &verdict.vc)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_reparse_to_fifteen_digits() {
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 0.25, 1e-12, 7.0e30] {
            let printed = fmt_num(x);
            let back: f64 = printed.parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-14, "{x} -> {printed} -> {back}");
            // Stable: a second print round-trips byte-identically.
            assert_eq!(fmt_num(back), fmt_num(back.to_string().parse::<f64>().unwrap()));
        }
    }

    #[test]
    fn json_lines_are_single_objects() {
        #[derive(Serialize)]
        struct R {
            t: f64,
            k: usize,
        }
        let line = json_line(&R { t: 1.0 / 3.0, k: 4 });
        assert!(!line.contains('\n'));
        let v: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["k"], 4);
        assert!((v["t"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn table_formats() {
        let mut t = Table::new(&["a", "long_header"]);
        t.push_row(vec!["1".into(), "2".into()]);
        let csv = t.render(OutputFormat::Csv);
        assert_eq!(csv, "a,long_header\n1,2\n");
        let human = t.render(OutputFormat::Human);
        assert!(human.lines().next().unwrap().contains("long_header"));
        assert_eq!(human.lines().count(), 2);
    }
}
