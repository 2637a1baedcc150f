//! The `analyze` pipeline: joins the corpus with the feature container,
//! scores comments, and writes correlation, sentiment, consistency and
//! layer-model outputs. Also the `validate` diagnostics.

mod config;
mod table;
mod tables;
mod validate;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::corpus::{dedup_records, load_corpus, sha256_hex, DayNight};
use crate::distinct::compute_profiles;
use crate::embeddings::{load_embeddings, LoadOptions};
use crate::features::{FeatureContainer, Stage};
use crate::report;
use crate::sentiment::SentimentRuleset;
use crate::textprep::LexiconSet;

pub use config::{AnalysisSelection, ControlSelection, DistanceConfig, GlmConfig, RunConfig, SentimentConfig};
pub use table::{PostRow, COVARIATES, VARIABLES};
pub use tables::{
    complete_columns, correlation_rows, heatmap_cells, median_split_row, partial_row, significant_controls,
    spearman_row, without_outliers, CorrelationRow, HeatmapCell, LayerModelsReport, StatRow, ASSESSMENT_ALL,
    ASSESSMENT_REMOVED, HEATMAP_VARIABLES,
};
pub use validate::{validate, Check, Diagnostics};

pub const CORRELATIONS_FILE: &str = "correlations.csv";
pub const CORRELATIONS_ALL_FILE: &str = "correlations_no_outlier_removal.csv";
pub const PARTIALS_FILE: &str = "partials.csv";
pub const HEATMAP_CSV: &str = "heatmap.csv";
pub const HEATMAP_SVG: &str = "heatmap.svg";
pub const SENTIMENT_FILE: &str = "sentiment.csv";
pub const CONSISTENCY_FILE: &str = "consistency.csv";
pub const LAYER_MODELS_FILE: &str = "layer_models.json";
pub const COEFFICIENTS_SVG: &str = "coefficients.svg";
pub const ANALYSIS_TABLE_FILE: &str = "analysis_table.csv";
pub const METADATA_FILE: &str = "run_metadata.json";

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("config: {0}")]
    Config(String),
    #[error("missing inputs: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingInputs(Vec<PathBuf>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}

impl AnalysisError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AnalysisError::Io { path: path.into(), source }
    }

    pub(crate) fn stage(stage: &'static str, e: impl std::error::Error + Send + Sync + 'static) -> Self {
        AnalysisError::Stage { stage, source: Box::new(e) }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RunCounts {
    pub corpus_records: usize,
    pub duplicates_dropped: usize,
    pub without_features: usize,
    pub joined: usize,
    pub outliers: usize,
    pub main_rows: usize,
    pub without_sentiment: usize,
    pub without_labels: usize,
    pub without_consistency: usize,
    pub layer_model_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSummary {
    pub output_dir: PathBuf,
    /// Result files written (the metadata sidecar excluded), in write order.
    pub files: Vec<String>,
    pub counts: RunCounts,
    /// Layer-model targets whose fit did not converge.
    pub nonconverged: Vec<String>,
}

/// Result files, keyed by name, built in memory before anything touches
/// the output directory.
#[derive(Default)]
struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), AnalysisError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| AnalysisError::stage("write", e))?;
        }
        let bytes = w.into_inner().map_err(|e| AnalysisError::stage("write", e.into_error()))?;
        self.add(name, bytes);
        Ok(())
    }
}

fn load_ruleset(cfg: &RunConfig) -> Result<SentimentRuleset, AnalysisError> {
    let mut rules = match &cfg.sentiment.lexicon {
        Some(p) => SentimentRuleset::from_lexicon_file(p).map_err(|e| AnalysisError::stage("sentiment", e))?,
        None => SentimentRuleset::default(),
    };
    rules.constants = cfg.sentiment.constants.clone();
    rules.validate().map_err(|e| AnalysisError::stage("sentiment", e))?;
    Ok(rules)
}

pub fn run_analysis(cfg: &RunConfig) -> Result<AnalysisSummary, AnalysisError> {
    cfg.check()?;
    let mut counts = RunCounts::default();

    let records = load_corpus(&cfg.corpus_path).map_err(|e| AnalysisError::stage("corpus", e))?;
    counts.corpus_records = records.len();
    let dedup = dedup_records(&records);
    counts.duplicates_dropped = dedup.dropped.len();
    let container = FeatureContainer::open(&cfg.feature_dir).map_err(|e| AnalysisError::stage("features", e))?;
    let lexicons = LexiconSet::from_paths(&cfg.lexicons).map_err(|e| AnalysisError::stage("lexicons", e))?;
    let ruleset = load_ruleset(cfg)?;
    let day_night = DayNight::with_timezone(&cfg.timezone).map_err(|e| AnalysisError::stage("config", e))?;

    let pairs: Vec<_> = dedup
        .kept
        .iter()
        .filter_map(|r| {
            let idx = r.image_hash().and_then(|h| container.image_index(h));
            idx.map(|i| (r, &container.images()[i]))
        })
        .collect();
    counts.joined = pairs.len();
    counts.without_features = dedup.kept.len() - pairs.len();
    if counts.without_features > 0 {
        log::warn!("{} posts have no exported features and are left out", counts.without_features);
    }

    let texts = table::prepare_text(
        &pairs,
        &table::TextInputs { lexicons: &lexicons, ruleset: &ruleset, dedupe_tokens: cfg.dedupe_comment_tokens },
    );
    let embeddings = if cfg.analyses.consistency {
        let vocab = table::vocabulary(&texts);
        let opts = LoadOptions { dimension: Some(cfg.embedding_dimension), vocabulary: Some(&vocab) };
        Some(load_embeddings(&cfg.embedding_path, &opts).map_err(|e| AnalysisError::stage("embeddings", e))?)
    } else {
        None
    };
    let mut rows = table::build_rows(&pairs, &texts, embeddings.as_ref(), &day_night, cfg.reference_time)?;

    let profiles = if cfg.analyses.layer_models {
        let p = compute_profiles(&container, &cfg.distance.options()).map_err(|e| AnalysisError::stage("distinctiveness", e))?;
        let map: BTreeMap<String, _> = p.into_iter().map(|p| (p.image_hash.clone(), p)).collect();
        for r in &mut rows {
            r.residuals = map.get(&r.image_hash).map(|p| p.residuals.clone());
        }
        Some(map)
    } else {
        None
    };

    let all: Vec<&PostRow> = rows.iter().collect();
    let kept_ids: std::collections::HashSet<String> = without_outliers(&all)
        .ok_or(AnalysisError::Stage {
            stage: "outliers",
            source: format!("need at least 4 posts with features, got {}", all.len()).into(),
        })?
        .iter()
        .map(|r| r.post_id.clone())
        .collect();
    for r in &mut rows {
        r.outlier = !kept_ids.contains(&r.post_id);
    }
    counts.outliers = rows.iter().filter(|r| r.outlier).count();
    let all: Vec<&PostRow> = rows.iter().collect();
    let main: Vec<&PostRow> = if cfg.outlier_removal { all.iter().copied().filter(|r| !r.outlier).collect() } else { all.clone() };
    counts.main_rows = main.len();
    counts.without_sentiment = main.iter().filter(|r| r.avg_sentiment().is_none()).count();
    counts.without_labels = pairs.iter().filter(|(_, e)| e.label_strings().is_none()).count();
    counts.without_consistency = main.iter().filter(|r| r.consistency.is_none()).count();

    let sel = cfg.analyses;
    let mut out = Outputs::default();
    out.add(ANALYSIS_TABLE_FILE, analysis_table_csv(&rows)?);
    if sel.correlations {
        out.csv(CORRELATIONS_FILE, &correlation_rows(&all, true))?;
        out.csv(CORRELATIONS_ALL_FILE, &correlation_rows(&all, false))?;
    }
    if sel.partials {
        let mut partial = Vec::new();
        for y in ["num_comments", "post_score"] {
            let controls = cfg.controls.engagement.clone().unwrap_or_else(|| significant_controls(&main, "memorability", y));
            partial.push(spearman_row("spearman", &main, "memorability", y));
            partial.push(partial_row("partial_spearman", &main, "memorability", y, &controls));
        }
        out.csv(PARTIALS_FILE, &partial)?;
    }
    if sel.heatmap {
        let cells = heatmap_cells(&main);
        out.csv(HEATMAP_CSV, &cells)?;
        out.add(HEATMAP_SVG, report::heatmap_svg(&cells).into_bytes());
    }
    if sel.sentiment {
        let controls = cfg
            .controls
            .sentiment
            .clone()
            .unwrap_or_else(|| significant_controls(&main, "memorability", "avg_sentiment"));
        let rows = vec![
            spearman_row("spearman", &main, "memorability", "avg_sentiment"),
            partial_row("partial_spearman", &main, "memorability", "avg_sentiment", &controls),
            spearman_row("spearman", &main, "memorability", "sentiment_intensity"),
            median_split_row(&main, "avg_sentiment"),
            median_split_row(&main, "sentiment_intensity"),
        ];
        out.csv(SENTIMENT_FILE, &rows)?;
    }
    if sel.consistency {
        let controls = cfg.controls.consistency.clone().unwrap_or_else(|| vec!["comment_length".into()]);
        let rows = vec![
            spearman_row("spearman", &main, "memorability", "consistency"),
            partial_row("partial_spearman", &main, "memorability", "consistency", &controls),
            median_split_row(&main, "consistency"),
        ];
        out.csv(CONSISTENCY_FILE, &rows)?;
    }
    let mut nonconverged = Vec::new();
    if let Some(profiles) = &profiles {
        let report = tables::layer_models(&main, profiles, &cfg.glm.options())?;
        counts.layer_model_rows = report.n_images;
        nonconverged = report.nonconverged().into_iter().map(str::to_string).collect();
        let mut json = serde_json::to_vec_pretty(&report).map_err(|e| AnalysisError::stage("write", e))?;
        json.push(b'\n');
        out.add(LAYER_MODELS_FILE, json);
        out.add(COEFFICIENTS_SVG, report::coefficients_svg(&report::CoefficientPanels::from_report(&report)).into_bytes());
    }

    let metadata = json!({
        "generated_at": chrono::Utc::now().to_rfc3339(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "counts": &counts,
        "sentiment_ruleset_sha256": ruleset.fingerprint(),
        "feature_model_versions": &container.manifest().model_versions,
        "nonconverged": &nonconverged,
        "outputs": out.files.iter().map(|(n, b)| (n.clone(), sha256_hex(b))).collect::<BTreeMap<_, _>>(),
    });
    let mut meta = serde_json::to_vec_pretty(&metadata).map_err(|e| AnalysisError::stage("write", e))?;
    meta.push(b'\n');

    let files: Vec<String> = out.files.iter().map(|(n, _)| n.clone()).collect();
    out.add(METADATA_FILE, meta);
    commit_outputs(&cfg.output_dir, &out.files)?;
    Ok(AnalysisSummary { output_dir: cfg.output_dir.clone(), files, counts, nonconverged })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn analysis_table_csv(rows: &[PostRow]) -> Result<Vec<u8>, AnalysisError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "post_id",
        "subreddit",
        "collection_run",
        "image_hash",
        "memorability",
        "num_comments",
        "post_score",
        "avg_sentiment",
        "sentiment_intensity",
        "consistency",
        "comment_length",
        "noun_tokens",
        "matched_tokens",
        "caption_length",
        "time_of_day",
        "posted_duration",
        "file_size_kb",
        "resolution",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(Stage::ALL.iter().map(|s| format!("residual_{}", s.as_str())));
    header.push("outlier".into());
    let err = |e: csv::Error| AnalysisError::stage("write", e);
    w.write_record(&header).map_err(err)?;
    for r in rows {
        let c = &r.covariates;
        let mut rec = vec![
            r.post_id.clone(),
            r.subreddit.clone(),
            r.collection_run.clone().unwrap_or_default(),
            r.image_hash.clone(),
            r.memorability.to_string(),
            c.num_comments.to_string(),
            c.post_score.to_string(),
            fmt_opt(c.avg_sentiment),
            fmt_opt(r.sentiment_intensity),
            fmt_opt(r.consistency),
            r.comment_length.to_string(),
            r.noun_tokens.to_string(),
            r.matched_tokens.to_string(),
            c.caption_length.to_string(),
            c.time_of_day.to_string(),
            c.posted_duration.to_string(),
            c.file_size_kb.to_string(),
            c.resolution.to_string(),
        ];
        for s in Stage::ALL {
            rec.push(fmt_opt(r.residuals.as_ref().and_then(|m| m.get(&s).copied())));
        }
        rec.push(r.outlier.to_string());
        w.write_record(&rec).map_err(err)?;
    }
    w.into_inner().map_err(|e| AnalysisError::stage("write", e.into_error()))
}

/// Writes every file into a staging directory inside `dir`, then renames
/// them into place. If a rename fails, files already moved by this call
/// are deleted again, so a failed run leaves none of its outputs behind.
pub(crate) fn commit_outputs(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), AnalysisError> {
    fs::create_dir_all(dir).map_err(|e| AnalysisError::io(dir, e))?;
    let staging = dir.join(format!(".staging-{}", std::process::id()));
    let _ = fs::remove_dir_all(&staging);
    fs::create_dir(&staging).map_err(|e| AnalysisError::io(&staging, e))?;
    let mut moved = Vec::new();
    let result = (|| {
        for (name, bytes) in files {
            let p = staging.join(name);
            fs::write(&p, bytes).map_err(|e| AnalysisError::io(&p, e))?;
        }
        for (name, _) in files {
            let dest = dir.join(name);
            fs::rename(staging.join(name), &dest).map_err(|e| AnalysisError::io(&dest, e))?;
            moved.push(dest);
        }
        Ok(())
    })();
    if result.is_err() {
        for p in &moved {
            let _ = fs::remove_file(p);
        }
    }
    let _ = fs::remove_dir_all(&staging);
    result
}
