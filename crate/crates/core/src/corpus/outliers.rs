use serde::{Deserialize, Serialize};

use crate::stats::{iqr_bounds, Fences};

use super::{CorpusError, PostRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngagementField {
    Score,
    NumComments,
}

impl EngagementField {
    pub fn value(self, record: &PostRecord) -> f64 {
        match self {
            EngagementField::Score => record.score as f64,
            EngagementField::NumComments => record.num_comments as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EngagementField::Score => "score",
            EngagementField::NumComments => "num_comments",
        }
    }
}

/// Keep-mask over rows: false when any column falls outside its 1.5 × IQR
/// fences. Fences come from the full input, computed once.
pub fn iqr_keep_mask(columns: &[Vec<f64>]) -> Result<(Vec<bool>, Vec<Fences>), CorpusError> {
    let n = columns.first().map(Vec::len).unwrap_or(0);
    if n < 4 {
        return Err(CorpusError::TooSmall { needed: 4, got: n });
    }
    let fences: Vec<Fences> = columns.iter().map(|c| iqr_bounds(c)).collect::<Result<_, _>>()?;
    let keep = (0..n).map(|i| columns.iter().zip(&fences).all(|(c, f)| f.contains(c[i]))).collect();
    Ok((keep, fences))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierSplit {
    pub kept: Vec<PostRecord>,
    pub removed: Vec<PostRecord>,
    pub fences: Vec<(EngagementField, Fences)>,
}

/// Single-pass removal of records outside the fences of ANY listed field.
pub fn remove_outliers_iqr(records: &[PostRecord], fields: &[EngagementField]) -> Result<OutlierSplit, CorpusError> {
    let columns: Vec<Vec<f64>> = fields.iter().map(|f| records.iter().map(|r| f.value(r)).collect()).collect();
    let (keep, fences) = iqr_keep_mask(&columns)?;
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for (r, k) in records.iter().zip(keep) {
        if k {
            kept.push(r.clone());
        } else {
            removed.push(r.clone());
        }
    }
    Ok(OutlierSplit { kept, removed, fences: fields.iter().copied().zip(fences).collect() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemorabilityGroup {
    High,
    Low,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    Some(if s.len() % 2 == 1 { s[m] } else { (s[m - 1] + s[m]) / 2.0 })
}

/// High iff strictly above the sample median; ties at the median go low.
pub fn median_split(scores: &[f64]) -> Vec<MemorabilityGroup> {
    let Some(med) = median(scores) else { return Vec::new() };
    scores
        .iter()
        .map(|s| if *s > med { MemorabilityGroup::High } else { MemorabilityGroup::Low })
        .collect()
}
