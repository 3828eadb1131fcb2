//! Score files (`simplex_id,score` CSV with a JSON sidecar), tidy result
//! tables and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use simplex_influence::diffusion::LabelMeta;
use simplex_influence::InfluenceScores;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Labels,
    Prediction,
    Baseline,
}

/// Metadata stored next to every score file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSidecar {
    pub kind: ScoreKind,
    pub method: String,
    pub hub_order: usize,
    pub max_order: usize,
    pub beta_ratio: f64,
    pub beta2_ratio: f64,
    pub config_hash: String,
    pub dataset_hash: String,
    /// Diffusion settings behind a label file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusion: Option<LabelMeta>,
    /// Held-out ids a prediction should be scored on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_ids: Option<Vec<usize>>,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// Writes observed entries only, one `id,score` row each.
pub fn write_scores(path: &Path, scores: &InfluenceScores, sidecar: &ScoreSidecar) -> Result<()> {
    let mut text = String::from("simplex_id,score\n");
    for id in scores.observed_ids() {
        text.push_str(&format!("{id},{}\n", scores.values[id]));
    }
    write_text(path, &text)?;
    write_json(&sidecar_path(path), sidecar)
}

pub fn read_scores(path: &Path) -> Result<(InfluenceScores, ScoreSidecar)> {
    let text = read(path)?;
    let bad = |line: usize, what: &str| CliError::Runtime(format!("{}:{line}: {what}", path.display()));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "simplex_id,score")) => {}
        _ => return Err(bad(1, "expected header \"simplex_id,score\"")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (id, score) = line.split_once(',').ok_or_else(|| bad(i + 1, "expected two fields"))?;
        let id: usize = id.trim().parse().map_err(|_| bad(i + 1, "bad simplex id"))?;
        let score: f64 = score.trim().parse().map_err(|_| bad(i + 1, "bad score"))?;
        rows.push((id, score));
    }
    let sidecar: ScoreSidecar = read_json(&sidecar_path(path))?;
    let len = rows.iter().map(|&(id, _)| id + 1).max().unwrap_or(0);
    let mut scores = InfluenceScores::unobserved(len);
    for (id, score) in rows {
        scores.set(id, score);
    }
    Ok((scores, sidecar))
}

/// A tidy CSV table held as header plus string rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut text = self.header.join(",") + "\n";
        for row in &self.rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        text
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::Runtime("empty table".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
        Ok(Table { header, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_csv())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Adds rows, replacing existing rows whose first `key_cols` cells match.
    pub fn upsert(&mut self, row: Vec<String>, key_cols: usize) {
        match self.rows.iter_mut().find(|r| r[..key_cols] == row[..key_cols]) {
            Some(existing) => *existing = row,
            None => self.rows.push(row),
        }
    }
}

/// Loads `path` if it exists with the expected header, else starts empty.
pub fn load_or_new(path: &Path, header: &[&str]) -> Result<Table> {
    if path.exists() {
        let t = Table::load(path)?;
        if t.header != header {
            return Err(CliError::Runtime(format!(
                "{} has header {:?}, expected {:?}",
                path.display(),
                t.header,
                header
            )));
        }
        Ok(t)
    } else {
        Ok(Table::new(header))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub root_seed: u64,
    pub seeds: Vec<(String, u64)>,
    pub version: String,
    pub threads: usize,
    pub outputs: Vec<PathBuf>,
    pub config: serde_json::Value,
}

/// Formats a ratio for file names: `1.5` → `1.50`.
pub fn ratio_tag(x: f64) -> String {
    format!("{x:.2}")
}
