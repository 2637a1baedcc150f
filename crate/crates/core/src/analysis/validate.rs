use std::fmt;

use crate::corpus::{dedup_records, load_corpus, DayNight};
use crate::embeddings::{load_embeddings, LoadOptions};
use crate::features::FeatureContainer;
use crate::textprep::LexiconSet;

use super::{load_ruleset, table, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub checks: Vec<Check>,
}

impl Diagnostics {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    fn push(&mut self, name: &'static str, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check { name, ok, detail: detail.into() });
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {:<12} {}", if c.ok { " ok " } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Checks every input of an `analyze` run without writing anything.
/// Later checks that depend on a failed one are skipped.
pub fn validate(cfg: &RunConfig) -> Diagnostics {
    let mut d = Diagnostics::default();
    match check_settings(cfg) {
        Ok(()) => d.push("config", true, format!("timezone {}, outlier removal {}", cfg.timezone, cfg.outlier_removal)),
        Err(e) => d.push("config", false, e),
    }

    let records = match load_corpus(&cfg.corpus_path) {
        Ok(r) => {
            let dedup = dedup_records(&r);
            d.push(
                "corpus",
                true,
                format!("{} records, {} duplicates", r.len(), dedup.dropped.len()),
            );
            Some(dedup.kept)
        }
        Err(e) => {
            d.push("corpus", false, e.to_string());
            None
        }
    };

    let container = match FeatureContainer::open(&cfg.feature_dir) {
        Ok(c) => {
            let m = c.manifest();
            d.push(
                "features",
                true,
                format!("{} images, {} layers, format {}", m.images.len(), m.layers.len(), m.format_version),
            );
            Some(c)
        }
        Err(e) => {
            d.push("features", false, e.to_string());
            None
        }
    };

    let lexicons = match LexiconSet::from_paths(&cfg.lexicons) {
        Ok(l) => {
            d.push("lexicons", true, "loaded");
            Some(l)
        }
        Err(e) => {
            d.push("lexicons", false, e.to_string());
            None
        }
    };

    let ruleset = match load_ruleset(cfg) {
        Ok(r) => {
            d.push("sentiment", true, format!("ruleset sha256 {}", r.fingerprint()));
            Some(r)
        }
        Err(e) => {
            d.push("sentiment", false, e.to_string());
            None
        }
    };

    let (Some(records), Some(container)) = (records, container) else {
        embedding_presence(cfg, &mut d);
        return d;
    };
    let pairs: Vec<_> = records
        .iter()
        .filter_map(|r| {
            let i = r.image_hash().and_then(|h| container.image_index(h))?;
            Some((r, &container.images()[i]))
        })
        .collect();
    let no_labels = pairs.iter().filter(|(_, e)| e.label_strings().is_none()).count();
    d.push(
        "coverage",
        pairs.len() >= 4,
        format!(
            "{}/{} posts have features, {} without labels",
            pairs.len(),
            records.len(),
            no_labels
        ),
    );

    let (Some(lexicons), Some(ruleset)) = (lexicons, ruleset) else {
        embedding_presence(cfg, &mut d);
        return d;
    };
    if !cfg.analyses.consistency {
        d.push("embeddings", true, "not needed (consistency disabled)");
        return d;
    }
    if !embedding_presence(cfg, &mut d) {
        return d;
    }
    let texts = table::prepare_text(
        &pairs,
        &table::TextInputs { lexicons: &lexicons, ruleset: &ruleset, dedupe_tokens: cfg.dedupe_comment_tokens },
    );
    let vocab = table::vocabulary(&texts);
    let opts = LoadOptions { dimension: Some(cfg.embedding_dimension), vocabulary: Some(&vocab) };
    match load_embeddings(&cfg.embedding_path, &opts) {
        Ok(table) => {
            let nouns: Vec<&String> = texts.iter().flat_map(|t| t.nouns.tokens.iter()).collect();
            let oov = nouns.iter().filter(|t| !table.contains(t)).count();
            let rate = if nouns.is_empty() { 0.0 } else { oov as f64 / nouns.len() as f64 };
            d.push(
                "embeddings",
                true,
                format!(
                    "dimension {}, {} of {} needed tokens found, noun OOV rate {:.3} ({oov}/{})",
                    table.dimension(),
                    table.vocab_size(),
                    vocab.len(),
                    rate,
                    nouns.len()
                ),
            );
        }
        Err(e) => d.push("embeddings", false, e.to_string()),
    }
    d
}

fn check_settings(cfg: &RunConfig) -> Result<(), String> {
    DayNight::with_timezone(&cfg.timezone).map_err(|e| e.to_string())?;
    match cfg.check() {
        Ok(()) | Err(super::AnalysisError::MissingInputs(_)) => Ok(()),
        Err(e) => Err(e.to_string()),
    }
}

/// Records a failing `embeddings` check when the file is absent.
fn embedding_presence(cfg: &RunConfig, d: &mut Diagnostics) -> bool {
    if !cfg.analyses.consistency || cfg.embedding_path.is_file() {
        return true;
    }
    if !d.checks.iter().any(|c| c.name == "embeddings") {
        d.push("embeddings", false, format!("{}: file not found", cfg.embedding_path.display()));
    }
    false
}
