use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::distinct::DistanceOptions;
use crate::sentiment::SentimentConstants;
use crate::stats::{Dispersion, GlmOptions};
use crate::textprep::LexiconPaths;

/// Everything `analyze` and `validate` read. Relative paths in a config
/// file are resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus_path: PathBuf,
    pub feature_dir: PathBuf,
    pub embedding_path: PathBuf,
    #[serde(default = "default_dimension")]
    pub embedding_dimension: usize,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub lexicons: LexiconPaths,
    #[serde(default)]
    pub sentiment: SentimentConfig,
    /// IANA zone for the day/night dummy.
    #[serde(default = "default_timezone")]
    pub timezone: String,
    /// Reference time for `posted_duration`; each post's `fetched_at` when unset.
    #[serde(default)]
    pub reference_time: Option<DateTime<Utc>>,
    /// Main analyses on the outlier-removed set. Both correlation files are written either way.
    #[serde(default = "yes")]
    pub outlier_removal: bool,
    /// Count each comment noun once per post for the consistency score.
    #[serde(default)]
    pub dedupe_comment_tokens: bool,
    #[serde(default)]
    pub analyses: AnalysisSelection,
    #[serde(default)]
    pub controls: ControlSelection,
    #[serde(default)]
    pub distance: DistanceConfig,
    #[serde(default)]
    pub glm: GlmConfig,
}

fn default_dimension() -> usize {
    crate::embeddings::GLOVE_DIMENSION
}

fn default_timezone() -> String {
    "UTC".into()
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SentimentConfig {
    /// Token → valence TSV; the bundled lexicon when unset.
    pub lexicon: Option<PathBuf>,
    pub constants: SentimentConstants,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSelection {
    pub correlations: bool,
    pub heatmap: bool,
    pub partials: bool,
    pub sentiment: bool,
    pub consistency: bool,
    pub layer_models: bool,
}

impl Default for AnalysisSelection {
    fn default() -> Self {
        Self { correlations: true, heatmap: true, partials: true, sentiment: true, consistency: true, layer_models: true }
    }
}

/// Control variables for the partial correlations. Unset lists are chosen
/// from the data: covariates whose Spearman p < .05 with both variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSelection {
    pub engagement: Option<Vec<String>>,
    pub sentiment: Option<Vec<String>>,
    /// Defaults to `comment_length`.
    pub consistency: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceConfig {
    pub tile_mib: usize,
    pub materialize_max_n: usize,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        let d = DistanceOptions::default();
        Self { tile_mib: d.tile_bytes >> 20, materialize_max_n: d.materialize_max_n }
    }
}

impl DistanceConfig {
    pub fn options(&self) -> DistanceOptions {
        DistanceOptions { tile_bytes: self.tile_mib.max(1) << 20, materialize_max_n: self.materialize_max_n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlmConfig {
    pub max_iter: usize,
    pub tol: f64,
    /// Fix the NB dispersion instead of estimating it.
    pub fixed_alpha: Option<f64>,
}

impl Default for GlmConfig {
    fn default() -> Self {
        let d = GlmOptions::default();
        Self { max_iter: d.max_iter, tol: d.tol, fixed_alpha: None }
    }
}

impl GlmConfig {
    pub fn options(&self) -> GlmOptions {
        GlmOptions {
            max_iter: self.max_iter,
            tol: self.tol,
            dispersion: self.fixed_alpha.map_or(Dispersion::Estimate, Dispersion::Fixed),
        }
    }
}

impl RunConfig {
    /// Config with every optional setting at its default.
    pub fn new(corpus_path: PathBuf, feature_dir: PathBuf, embedding_path: PathBuf, output_dir: PathBuf) -> Self {
        Self {
            corpus_path,
            feature_dir,
            embedding_path,
            embedding_dimension: default_dimension(),
            output_dir,
            lexicons: LexiconPaths::default(),
            sentiment: SentimentConfig::default(),
            timezone: default_timezone(),
            reference_time: None,
            outlier_removal: true,
            dedupe_comment_tokens: false,
            analyses: AnalysisSelection::default(),
            controls: ControlSelection::default(),
            distance: DistanceConfig::default(),
            glm: GlmConfig::default(),
        }
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, AnalysisError> {
        let text = fs::read_to_string(path).map_err(|e| AnalysisError::io(path, e))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| AnalysisError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus_path);
        fix(&mut self.feature_dir);
        fix(&mut self.embedding_path);
        fix(&mut self.output_dir);
        for p in self.input_paths_mut() {
            fix(p);
        }
    }

    fn input_paths_mut(&mut self) -> impl Iterator<Item = &mut PathBuf> {
        let l = &mut self.lexicons;
        [&mut l.stopwords, &mut l.custom_stopwords, &mut l.nouns, &mut l.lemma_exceptions, &mut l.wordlist, &mut self.sentiment.lexicon]
            .into_iter()
            .flatten()
    }

    /// Input files and directories that must exist before a run.
    pub fn required_inputs(&self) -> Vec<&Path> {
        let mut out = vec![self.corpus_path.as_path(), self.feature_dir.as_path()];
        if self.analyses.consistency {
            out.push(&self.embedding_path);
        }
        let l = &self.lexicons;
        out.extend(
            [&l.stopwords, &l.custom_stopwords, &l.nouns, &l.lemma_exceptions, &l.wordlist, &self.sentiment.lexicon]
                .into_iter()
                .flatten()
                .map(PathBuf::as_path),
        );
        out
    }

    pub fn missing_inputs(&self) -> Vec<PathBuf> {
        self.required_inputs().into_iter().filter(|p| !p.exists()).map(Path::to_path_buf).collect()
    }

    pub fn check(&self) -> Result<(), AnalysisError> {
        if self.embedding_dimension == 0 {
            return Err(AnalysisError::Config("embedding_dimension must be positive".into()));
        }
        if self.glm.max_iter == 0 || !(self.glm.tol > 0.0) {
            return Err(AnalysisError::Config("glm.max_iter and glm.tol must be positive".into()));
        }
        if let Some(a) = self.glm.fixed_alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(AnalysisError::Config(format!("glm.fixed_alpha must be positive, got {a}")));
            }
        }
        self.sentiment.constants.validate().map_err(|e| AnalysisError::Config(e.to_string()))?;
        let missing = self.missing_inputs();
        if !missing.is_empty() {
            return Err(AnalysisError::MissingInputs(missing));
        }
        Ok(())
    }
}
