//! Plot-ready tables assembled from a results directory.

use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::io::Table;

pub const EVALUATION_FILE: &str = "evaluation.csv";
pub const IMMUNIZATION_FILE: &str = "immunization.csv";
pub const ORDER_SWEEP_FILE: &str = "order_sweep.csv";

pub const EVALUATION_HEADER: [&str; 4] = ["method", "beta_ratio", "beta2_ratio", "tau"];
pub const IMMUNIZATION_HEADER: [&str; 4] = ["method", "beta_ratio", "mean_r", "std_error"];
pub const ORDER_SWEEP_HEADER: [&str; 3] = ["max_order", "method", "tau"];

/// One output table per figure family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    TauVsBeta,
    TauHeatmap,
    Immunization,
    TauVsOrder,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::TauVsBeta, Family::TauHeatmap, Family::Immunization, Family::TauVsOrder];

    pub fn file_name(self) -> &'static str {
        match self {
            Family::TauVsBeta => "tau_vs_beta.csv",
            Family::TauHeatmap => "tau_heatmap.csv",
            Family::Immunization => "immunization_curve.csv",
            Family::TauVsOrder => "tau_vs_order.csv",
        }
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            Family::TauVsBeta => &["method", "beta_ratio", "tau"],
            Family::TauHeatmap => &["method", "beta2_ratio", "tau"],
            Family::Immunization => &IMMUNIZATION_HEADER,
            Family::TauVsOrder => &ORDER_SWEEP_HEADER,
        }
    }
}

fn load(results: &Path, name: &str, header: &[&str]) -> Result<Option<Table>> {
    let path = results.join(name);
    if !path.exists() {
        return Ok(None);
    }
    let table = Table::load(&path)?;
    if table.header != header {
        return Err(CliError::Runtime(format!("{} has header {:?}, expected {header:?}", path.display(), table.header)));
    }
    Ok(Some(table))
}

fn project(source: &Table, family: Family, keep: impl Fn(&[String]) -> bool) -> Table {
    let cols: Vec<usize> = family.header().iter().map(|h| source.column(h).expect("source has column")).collect();
    let mut out = Table::new(family.header());
    for row in source.rows.iter().filter(|r| keep(r)) {
        out.push(cols.iter().map(|&c| row[c].clone()).collect());
    }
    out
}

fn is_zero(cell: &str) -> bool {
    cell.parse::<f64>().map(|v| v == 0.0).unwrap_or(false)
}

/// Builds every family's table from `results`. Families without source rows
/// are returned in the second list.
pub fn build_report(results: &Path) -> Result<(Vec<(Family, Table)>, Vec<Family>)> {
    let evaluation = load(results, EVALUATION_FILE, &EVALUATION_HEADER)?;
    let immunization = load(results, IMMUNIZATION_FILE, &IMMUNIZATION_HEADER)?;
    let sweep = load(results, ORDER_SWEEP_FILE, &ORDER_SWEEP_HEADER)?;
    let mut present = Vec::new();
    let mut missing = Vec::new();
    for family in Family::ALL {
        let table = match family {
            Family::TauVsBeta => evaluation.as_ref().map(|t| project(t, family, |r| is_zero(&r[2]))),
            Family::TauHeatmap => evaluation.as_ref().map(|t| project(t, family, |r| !is_zero(&r[2]))),
            Family::Immunization => immunization.as_ref().map(|t| project(t, family, |_| true)),
            Family::TauVsOrder => sweep.as_ref().map(|t| project(t, family, |_| true)),
        };
        match table {
            Some(t) if !t.rows.is_empty() => present.push((family, t)),
            _ => missing.push(family),
        }
    }
    Ok((present, missing))
}

/// Writes one CSV per figure family into `out`. Fails, naming the missing
/// families, unless `allow_missing` is set.
pub fn emit_report(results: &Path, out: &Path, allow_missing: bool) -> Result<Vec<PathBuf>> {
    let (present, missing) = build_report(results)?;
    if !missing.is_empty() && (!allow_missing || present.is_empty()) {
        let names: Vec<&str> = missing.iter().map(|f| f.file_name().trim_end_matches(".csv")).collect();
        return Err(CliError::Runtime(format!(
            "missing results for {} report families: {}",
            missing.len(),
            names.join(", ")
        )));
    }
    let mut written = Vec::new();
    for (family, table) in present {
        let path = out.join(family.file_name());
        table.save(&path)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_directory_names_all_families() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_report(dir.path(), dir.path(), false).unwrap_err().to_string();
        assert!(err.contains("4 report families"), "{err}");
        for f in Family::ALL {
            assert!(err.contains(f.file_name().trim_end_matches(".csv")));
        }
    }

    #[test]
    fn evaluation_rows_split_by_channel() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join(EVALUATION_FILE),
            "method,beta_ratio,beta2_ratio,tau\nismnet,1.00,0.00,0.5\nismnet,1.00,0.50,0.4\n",
        )
        .unwrap();
        let (present, missing) = build_report(dir.path()).unwrap();
        assert_eq!(missing, vec![Family::Immunization, Family::TauVsOrder]);
        assert_eq!(present[0].1.to_csv(), "method,beta_ratio,tau\nismnet,1.00,0.5\n");
        assert_eq!(present[1].1.to_csv(), "method,beta2_ratio,tau\nismnet,0.50,0.4\n");
        let out = dir.path().join("report");
        assert!(emit_report(dir.path(), &out, false).is_err());
        assert_eq!(emit_report(dir.path(), &out, true).unwrap().len(), 2);
    }
}
