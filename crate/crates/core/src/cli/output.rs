//! CSV tables and the run manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::Row;
use super::CliError;

/// Rounds half away from zero to 2 decimals using the shortest decimal
/// representation of `x`, so `0.125` becomes `0.13` and `-0.125` becomes `-0.13`.
pub fn round2(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let text = format!("{}", x.abs());
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    let frac: Vec<u8> = frac_part.bytes().map(|b| b - b'0').collect();
    digits.push(frac.first().copied().unwrap_or(0));
    digits.push(frac.get(1).copied().unwrap_or(0));
    if frac.get(2).copied().unwrap_or(0) >= 5 {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 2;
    let int_str: String = digits[..split]
        .iter()
        .map(|d| char::from(b'0' + d))
        .collect();
    let frac_str: String = digits[split..]
        .iter()
        .map(|d| char::from(b'0' + d))
        .collect();
    let zero = digits.iter().all(|&d| d == 0);
    let sign = if x.is_sign_negative() && !zero {
        "-"
    } else {
        ""
    };
    format!("{sign}{int_str}.{frac_str}")
}

fn header(k: usize) -> Vec<String> {
    let mut h = vec!["table_id".to_string()];
    for prefix in ["n", "sigma", "mu"] {
        h.extend((1..=k).map(|j| format!("{prefix}{j}")));
    }
    h.extend(
        ["p", "estimator", "baseline", "risk", "se", "pri"]
            .iter()
            .map(|s| s.to_string()),
    );
    h
}

fn record(row: &Row, num: &dyn Fn(f64) -> String) -> Vec<String> {
    let mut r = vec![row.table_id.map(|t| t.to_string()).unwrap_or_default()];
    r.extend(row.ns.iter().map(|n| n.to_string()));
    r.extend(row.sigmas.iter().map(|s| s.to_string()));
    r.extend(row.mus.iter().map(|m| m.to_string()));
    r.push(row.p.to_string());
    r.push(row.estimator.clone());
    r.push(row.baseline.clone());
    r.push(num(row.risk));
    r.push(num(row.se));
    r.push(num(row.pri));
    r
}

/// Writes rows as CSV; `display` rounds risk, se and pri to 2 decimals.
pub fn write_csv<W: Write>(rows: &[Row], display: bool, out: W) -> Result<(), CliError> {
    let k = rows.first().map_or(2, |r| r.ns.len());
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header(k)).map_err(io)?;
    let full = |x: f64| x.to_string();
    let rounded = |x: f64| round2(x);
    let num: &dyn Fn(f64) -> String = if display { &rounded } else { &full };
    for row in rows {
        w.write_record(record(row, num)).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_csv_file(rows: &[Row], display: bool, path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    write_csv(rows, display, std::io::BufWriter::new(file))
}

#[derive(Debug, Clone, Serialize)]
pub struct TableOutput {
    pub table_id: u32,
    pub csv: String,
    pub display_csv: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant_csv: Option<String>,
    pub notes: Vec<String>,
}

/// Everything needed to reproduce a run's result files.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub reps: u64,
    pub wall_clock_seconds: f64,
    pub settings: BTreeMap<String, String>,
    pub tables: Vec<TableOutput>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = toml::to_string(self).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    }
}

pub fn table_paths(dir: &Path, id: u32) -> (PathBuf, PathBuf, PathBuf) {
    (
        dir.join(format!("table_{id}.csv")),
        dir.join(format!("table_{id}_display.csv")),
        dir.join(format!("table_{id}_loss_consistent.csv")),
    )
}
