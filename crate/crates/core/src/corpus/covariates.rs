use std::sync::OnceLock;

use chrono::{DateTime, Timelike, Utc};
use chrono_tz::Tz;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{CorpusError, PostRecord};

/// Post-level covariates entering the heatmap and partial correlations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateVector {
    pub caption_length: u32,
    /// 0 = day, 1 = night.
    pub time_of_day: u8,
    pub posted_duration: f64,
    pub file_size_kb: f64,
    pub resolution: u64,
    /// Filled in by the sentiment stage.
    pub avg_sentiment: Option<f64>,
    pub num_comments: u64,
    pub post_score: i64,
}

/// Day window `[day_start_hour, day_end_hour)` evaluated in `timezone`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayNight {
    pub timezone: Tz,
    pub day_start_hour: u32,
    pub day_end_hour: u32,
}

impl Default for DayNight {
    fn default() -> Self {
        Self { timezone: Tz::UTC, day_start_hour: 6, day_end_hour: 18 }
    }
}

impl DayNight {
    pub fn with_timezone(name: &str) -> Result<Self, CorpusError> {
        let timezone: Tz = name.parse().map_err(|_| CorpusError::Timezone(name.to_string()))?;
        Ok(Self { timezone, ..Self::default() })
    }

    pub fn is_night(&self, at: DateTime<Utc>) -> bool {
        let hour = at.with_timezone(&self.timezone).hour();
        !(self.day_start_hour..self.day_end_hour).contains(&hour)
    }
}

fn letter() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\p{L}").expect("static regex"))
}

/// Number of Unicode letter-category characters.
pub fn caption_length(caption: &str) -> u32 {
    letter().find_iter(caption).count() as u32
}

pub fn derive_covariates(
    record: &PostRecord,
    reference_time: DateTime<Utc>,
    day_night: &DayNight,
) -> Result<CovariateVector, CorpusError> {
    if reference_time < record.created_at {
        return Err(CorpusError::ReferenceBeforeCreation {
            post_id: record.post_id.clone(),
            created_at: record.created_at,
            reference_time,
        });
    }
    let elapsed = reference_time - record.created_at;
    let posted_duration = elapsed.num_milliseconds() as f64 / 86_400_000.0;
    Ok(CovariateVector {
        caption_length: caption_length(&record.caption),
        time_of_day: u8::from(day_night.is_night(record.created_at)),
        posted_duration,
        file_size_kb: record.file_size as f64 / 1024.0,
        resolution: u64::from(record.image_width) * u64::from(record.image_height),
        avg_sentiment: None,
        num_comments: record.num_comments,
        post_score: record.score,
    })
}
