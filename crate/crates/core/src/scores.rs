use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Influence scores over one layer of simplices, with a mask telling which
/// entries were actually observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceScores {
    pub values: Vec<f64>,
    pub observed: Vec<bool>,
}

impl InfluenceScores {
    pub fn unobserved(len: usize) -> Self {
        InfluenceScores { values: vec![0.0; len], observed: vec![false; len] }
    }

    pub fn fully_observed(values: Vec<f64>) -> Self {
        let observed = vec![true; values.len()];
        InfluenceScores { values, observed }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn set(&mut self, id: usize, value: f64) {
        self.values[id] = value;
        self.observed[id] = true;
    }

    pub fn get(&self, id: usize) -> Option<f64> {
        self.observed.get(id).copied().unwrap_or(false).then(|| self.values[id])
    }

    pub fn observed_ids(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.observed[i]).collect()
    }

    /// Scores restricted to `ids`, failing on any unobserved entry.
    pub fn select(&self, ids: &[usize]) -> Result<Vec<f64>> {
        ids.iter().map(|&i| self.get(i).ok_or(Error::Unobserved(i))).collect()
    }
}
