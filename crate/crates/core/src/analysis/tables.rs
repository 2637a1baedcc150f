use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{iqr_keep_mask, median_split, MemorabilityGroup};
use crate::distinct::{build_layer_design, run_stage_models, DistinctivenessProfile, StageModels, StageTargets};
use crate::features::Stage;
use crate::stats::{partial_spearman, spearman, CorrelationResult, GlmOptions, StatsError, VifEntry};

use super::table::{PostRow, COVARIATES};
use super::AnalysisError;

pub const ASSESSMENT_REMOVED: &str = "outliers_removed";
pub const ASSESSMENT_ALL: &str = "all_posts";

/// Variables of the covariate heatmap, in display order.
pub const HEATMAP_VARIABLES: &[&str] = &[
    "memorability",
    "num_comments",
    "post_score",
    "avg_sentiment",
    "caption_length",
    "time_of_day",
    "posted_duration",
    "file_size_kb",
    "resolution",
];

const ALPHA: f64 = 0.05;

/// One line of correlations.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub assessment: String,
    pub scope: String,
    pub group: String,
    pub x: String,
    pub y: String,
    pub n: usize,
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
    pub status: String,
}

/// One line of partials.csv, sentiment.csv or consistency.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub analysis: String,
    pub x: String,
    pub y: String,
    /// Control names joined by `;`.
    pub controls: String,
    pub n: usize,
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
    pub high_mean: Option<f64>,
    pub low_mean: Option<f64>,
    pub status: String,
}

/// One cell of heatmap.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub var_a: String,
    pub var_b: String,
    pub n: usize,
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerModelsReport {
    pub n_images: usize,
    pub predictors: Vec<String>,
    pub vif: Vec<VifEntry>,
    pub degenerate: bool,
    pub models: StageModels,
}

impl LayerModelsReport {
    /// Targets whose fit did not converge.
    pub fn nonconverged(&self) -> Vec<&'static str> {
        let m = &self.models;
        [("memorability", &m.memorability), ("num_comments", &m.num_comments), ("avg_sentiment", &m.avg_sentiment)]
            .into_iter()
            .filter(|(_, f)| !f.converged)
            .map(|(n, _)| n)
            .collect()
    }
}

/// Rows where every named variable is present, as aligned columns.
pub fn complete_columns(rows: &[&PostRow], names: &[&str]) -> Vec<Vec<f64>> {
    let mut cols = vec![Vec::new(); names.len()];
    for r in rows {
        let vals: Option<Vec<f64>> = names.iter().map(|n| r.variable(n)).collect();
        if let Some(vals) = vals {
            for (c, v) in cols.iter_mut().zip(vals) {
                c.push(v);
            }
        }
    }
    cols
}

fn status_of(e: &StatsError) -> String {
    match e {
        StatsError::TooFewObservations { .. } => "too_few".into(),
        StatsError::Degenerate(_) => "degenerate".into(),
        StatsError::CollinearControls { .. } | StatsError::RankDeficient { .. } => "collinear_controls".into(),
        other => format!("error: {other}"),
    }
}

fn split(result: Result<CorrelationResult, StatsError>) -> (Option<f64>, Option<f64>, String) {
    match result {
        Ok(r) => (Some(r.rho), Some(r.p_value), "ok".into()),
        Err(e) => (None, None, status_of(&e)),
    }
}

/// Keeps rows inside the score and comment-count fences of `rows` itself.
pub fn without_outliers<'a>(rows: &[&'a PostRow]) -> Option<Vec<&'a PostRow>> {
    let cols = vec![rows.iter().map(|r| r.post_score()).collect(), rows.iter().map(|r| r.num_comments()).collect()];
    let (keep, _) = iqr_keep_mask(&cols).ok()?;
    Some(rows.iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| *r).collect())
}

/// Memorability against comments and score, overall, per collection run and
/// per subreddit. With `remove_outliers`, fences are computed within each group.
pub fn correlation_rows(rows: &[&PostRow], remove_outliers: bool) -> Vec<CorrelationRow> {
    let mut groups: Vec<(&str, String, Vec<&PostRow>)> = vec![("overall", "all".into(), rows.to_vec())];
    let mut runs: BTreeMap<String, Vec<&PostRow>> = BTreeMap::new();
    let mut subs: BTreeMap<String, Vec<&PostRow>> = BTreeMap::new();
    for r in rows {
        if let Some(run) = &r.collection_run {
            runs.entry(run.clone()).or_default().push(r);
        }
        subs.entry(r.subreddit.clone()).or_default().push(r);
    }
    groups.extend(runs.into_iter().map(|(k, v)| ("timepoint", k, v)));
    groups.extend(subs.into_iter().map(|(k, v)| ("subreddit", k, v)));

    let assessment = if remove_outliers { ASSESSMENT_REMOVED } else { ASSESSMENT_ALL };
    let mut out = Vec::new();
    for (scope, group, members) in groups {
        let subset = if remove_outliers { without_outliers(&members) } else { Some(members.clone()) };
        for y in ["num_comments", "post_score"] {
            let row = |n, (rho, p_value, status): (Option<f64>, Option<f64>, String)| CorrelationRow {
                assessment: assessment.into(),
                scope: scope.into(),
                group: group.clone(),
                x: "memorability".into(),
                y: y.into(),
                n,
                rho,
                p_value,
                status,
            };
            match &subset {
                Some(s) => {
                    let cols = complete_columns(s, &["memorability", y]);
                    out.push(row(cols[0].len(), split(spearman(&cols[0], &cols[1]))));
                }
                None => out.push(row(members.len(), (None, None, "too_few".into()))),
            }
        }
    }
    out
}

pub fn heatmap_cells(rows: &[&PostRow]) -> Vec<HeatmapCell> {
    let cols = complete_columns(rows, HEATMAP_VARIABLES);
    let n = cols[0].len();
    let mut out = Vec::new();
    for (i, a) in HEATMAP_VARIABLES.iter().enumerate() {
        for (j, b) in HEATMAP_VARIABLES.iter().enumerate() {
            let (rho, p_value, status) = if i == j {
                if cols[i].windows(2).all(|w| w[0] == w[1]) {
                    (None, None, "degenerate".into())
                } else {
                    (Some(1.0), Some(0.0), "ok".into())
                }
            } else {
                split(spearman(&cols[i], &cols[j]))
            };
            out.push(HeatmapCell { var_a: (*a).into(), var_b: (*b).into(), n, rho, p_value, status });
        }
    }
    out
}

/// Covariates with p < .05 against both `x` and `y`, over rows complete in all of them.
pub fn significant_controls(rows: &[&PostRow], x: &str, y: &str) -> Vec<String> {
    let mut names = vec![x, y];
    names.extend_from_slice(COVARIATES);
    let cols = complete_columns(rows, &names);
    COVARIATES
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let c = &cols[k + 2];
            let sig = |v: &[f64]| spearman(v, c).is_ok_and(|r| r.p_value < ALPHA);
            sig(&cols[0]) && sig(&cols[1])
        })
        .map(|(_, n)| n.to_string())
        .collect()
}

pub fn spearman_row(analysis: &str, rows: &[&PostRow], x: &str, y: &str) -> StatRow {
    let cols = complete_columns(rows, &[x, y]);
    let (rho, p_value, status) = split(spearman(&cols[0], &cols[1]));
    StatRow {
        analysis: analysis.into(),
        x: x.into(),
        y: y.into(),
        controls: String::new(),
        n: cols[0].len(),
        rho,
        p_value,
        high_mean: None,
        low_mean: None,
        status,
    }
}

pub fn partial_row(analysis: &str, rows: &[&PostRow], x: &str, y: &str, controls: &[String]) -> StatRow {
    let mut names = vec![x, y];
    names.extend(controls.iter().map(String::as_str));
    let unknown: Vec<&str> = controls.iter().map(String::as_str).filter(|c| !super::table::VARIABLES.contains(c)).collect();
    let cols = complete_columns(rows, &names);
    let (rho, p_value, status) = if unknown.is_empty() {
        let ctl: Vec<(String, Vec<f64>)> = controls.iter().cloned().zip(cols[2..].iter().cloned()).collect();
        split(partial_spearman(&cols[0], &cols[1], &ctl))
    } else {
        (None, None, format!("unknown control: {}", unknown.join(";")))
    };
    StatRow {
        analysis: analysis.into(),
        x: x.into(),
        y: y.into(),
        controls: controls.join(";"),
        n: cols[0].len(),
        rho,
        p_value,
        high_mean: None,
        low_mean: None,
        status,
    }
}

/// Mean of `y` above and at-or-below the memorability median.
pub fn median_split_row(rows: &[&PostRow], y: &str) -> StatRow {
    let cols = complete_columns(rows, &["memorability", y]);
    let groups = median_split(&cols[0]);
    let mean = |g| {
        let v: Vec<f64> = groups.iter().zip(&cols[1]).filter(|(gg, _)| **gg == g).map(|(_, v)| *v).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let (high_mean, low_mean) = (mean(MemorabilityGroup::High), mean(MemorabilityGroup::Low));
    StatRow {
        analysis: "median_split_mean".into(),
        x: "memorability".into(),
        y: y.into(),
        controls: String::new(),
        n: cols[0].len(),
        rho: None,
        p_value: None,
        high_mean,
        low_mean,
        status: if high_mean.is_some() && low_mean.is_some() { "ok".into() } else { "too_few".into() },
    }
}

pub fn layer_models(
    rows: &[&PostRow],
    profiles: &BTreeMap<String, DistinctivenessProfile>,
    opts: &GlmOptions,
) -> Result<LayerModelsReport, AnalysisError> {
    let mut selected = Vec::new();
    let mut targets = StageTargets { memorability: Vec::new(), num_comments: Vec::new(), avg_sentiment: Vec::new() };
    for r in rows {
        let Some(p) = profiles.get(&r.image_hash) else { continue };
        selected.push(p.clone());
        targets.memorability.push(r.memorability);
        targets.num_comments.push(r.num_comments());
        targets.avg_sentiment.push(r.avg_sentiment());
    }
    let design = build_layer_design(&selected).map_err(|e| AnalysisError::stage("layer_models", e))?;
    if design.degenerate {
        log::warn!("stage residual design is degenerate (max VIF {})", design.max_vif());
    }
    let models = run_stage_models(&design, &targets, opts).map_err(|e| AnalysisError::stage("layer_models", e))?;
    Ok(LayerModelsReport {
        n_images: selected.len(),
        predictors: Stage::ALL.iter().map(|s| s.as_str().to_string()).collect(),
        vif: design.vif,
        degenerate: design.degenerate,
        models,
    })
}
