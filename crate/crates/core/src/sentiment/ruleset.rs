use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SentimentError;

const VADER_LEXICON: &str = include_str!("../../data/lexicon/vader_lexicon.tsv");

const B_INCR: f64 = 0.293;
const B_DECR: f64 = -0.293;

const NEGATIONS: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "ain't", "aren't", "can't",
    "couldn't", "daren't", "didn't", "doesn't", "dont", "hadnt", "hasnt", "havent", "isnt", "mightnt", "mustnt",
    "neither", "don't", "hadn't", "hasn't", "haven't", "isn't", "mightn't", "mustn't", "neednt", "needn't",
    "never", "none", "nope", "nor", "not", "nothing", "nowhere", "oughtnt", "shant", "shouldnt", "uhuh", "wasnt",
    "werent", "oughtn't", "shan't", "shouldn't", "uh-uh", "wasn't", "weren't", "without", "wont", "wouldnt",
    "won't", "wouldn't", "rarely", "seldom", "despite",
];

const BOOSTERS_UP: &[&str] = &[
    "absolutely", "amazingly", "awfully", "completely", "considerably", "decidedly", "deeply", "effing",
    "enormously", "entirely", "especially", "exceptionally", "extremely", "fabulously", "flipping", "flippin",
    "fricking", "frickin", "frigging", "friggin", "fully", "fucking", "greatly", "hella", "highly", "hugely",
    "incredibly", "intensely", "majorly", "more", "most", "particularly", "purely", "quite", "really",
    "remarkably", "so", "substantially", "thoroughly", "totally", "tremendously", "uber", "unbelievably",
    "unusually", "utterly", "very",
];

const BOOSTERS_DOWN: &[&str] = &[
    "almost", "barely", "hardly", "just enough", "kind of", "kinda", "kindof", "kind-of", "less", "little",
    "marginally", "occasionally", "partly", "scarcely", "slightly", "somewhat", "sort of", "sorta", "sortof",
    "sort-of",
];

const IDIOMS: &[(&str, f64)] = &[
    ("the shit", 3.0),
    ("the bomb", 3.0),
    ("bad ass", 1.5),
    ("yeah right", -2.0),
    ("cut the mustard", 2.0),
    ("kiss of death", -1.5),
    ("hand to mouth", -2.0),
];

/// Numeric rule constants. Defaults reproduce the reference analyzer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SentimentConstants {
    pub normalization_alpha: f64,
    /// Added to (or subtracted from) an ALL-CAPS word's valence when the
    /// text mixes cased and uncased words.
    pub caps_boost: f64,
    pub negation_scalar: f64,
    pub exclamation_boost: f64,
    pub exclamation_max: usize,
    pub question_boost: f64,
    /// Replaces the per-mark question boost beyond three marks.
    pub question_many_boost: f64,
    /// Booster dampening at distance two and three from the word.
    pub booster_distance_decay: [f64; 2],
    /// Multipliers for "never so/this X" at distance two and three.
    pub never_emphasis: [f64; 2],
    /// Added after an idiom check when a two-word dampener ("kind of") precedes.
    pub bigram_dampener: f64,
    pub but_before_weight: f64,
    pub but_after_weight: f64,
}

impl Default for SentimentConstants {
    fn default() -> Self {
        Self {
            normalization_alpha: 15.0,
            caps_boost: 0.733,
            negation_scalar: -0.74,
            exclamation_boost: 0.292,
            exclamation_max: 4,
            question_boost: 0.18,
            question_many_boost: 0.96,
            booster_distance_decay: [0.95, 0.9],
            never_emphasis: [1.5, 1.25],
            bigram_dampener: B_DECR,
            but_before_weight: 0.5,
            but_after_weight: 1.5,
        }
    }
}

impl SentimentConstants {
    pub fn validate(&self) -> Result<(), SentimentError> {
        let all = [
            self.normalization_alpha,
            self.caps_boost,
            self.negation_scalar,
            self.exclamation_boost,
            self.question_boost,
            self.question_many_boost,
            self.booster_distance_decay[0],
            self.booster_distance_decay[1],
            self.never_emphasis[0],
            self.never_emphasis[1],
            self.bigram_dampener,
            self.but_before_weight,
            self.but_after_weight,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(SentimentError::InvalidRuleset("non-finite constant".into()));
        }
        if self.normalization_alpha <= 0.0 {
            return Err(SentimentError::InvalidRuleset("normalization_alpha must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentRuleset {
    pub valence_lexicon: HashMap<String, f64>,
    pub booster_map: HashMap<String, f64>,
    pub negation_set: HashSet<String>,
    pub idioms: HashMap<String, f64>,
    pub constants: SentimentConstants,
}

impl Default for SentimentRuleset {
    fn default() -> Self {
        Self::with_lexicon(parse_lexicon(VADER_LEXICON, Path::new("<bundled>/vader_lexicon.tsv")).expect("bundled lexicon"))
    }
}

impl SentimentRuleset {
    /// Default rules over a custom valence lexicon.
    pub fn with_lexicon(valence_lexicon: HashMap<String, f64>) -> Self {
        let booster_map = BOOSTERS_UP
            .iter()
            .map(|w| (w.to_string(), B_INCR))
            .chain(BOOSTERS_DOWN.iter().map(|w| (w.to_string(), B_DECR)))
            .collect();
        Self {
            valence_lexicon,
            booster_map,
            negation_set: NEGATIONS.iter().map(|w| w.to_string()).collect(),
            idioms: IDIOMS.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            constants: SentimentConstants::default(),
        }
    }

    pub fn from_lexicon_file(path: &Path) -> Result<Self, SentimentError> {
        let text = fs::read_to_string(path).map_err(|source| SentimentError::Io { path: path.to_path_buf(), source })?;
        Ok(Self::with_lexicon(parse_lexicon(&text, path)?))
    }

    /// SHA-256 over the sorted lexicons and the constants. Equal rulesets
    /// give equal fingerprints regardless of load order.
    pub fn fingerprint(&self) -> String {
        use std::fmt::Write;
        let mut text = String::new();
        let mut section = |name: &str, mut rows: Vec<String>| {
            rows.sort();
            let _ = writeln!(text, "[{name}]");
            for r in rows {
                let _ = writeln!(text, "{r}");
            }
        };
        section("valence", self.valence_lexicon.iter().map(|(k, v)| format!("{k}\t{v}")).collect());
        section("boosters", self.booster_map.iter().map(|(k, v)| format!("{k}\t{v}")).collect());
        section("negations", self.negation_set.iter().cloned().collect());
        section("idioms", self.idioms.iter().map(|(k, v)| format!("{k}\t{v}")).collect());
        text.push_str(&serde_json::to_string(&self.constants).expect("constants serialize"));
        crate::corpus::sha256_hex(text.as_bytes())
    }

    pub fn validate(&self) -> Result<(), SentimentError> {
        if self.valence_lexicon.is_empty() {
            return Err(SentimentError::InvalidRuleset("empty valence lexicon".into()));
        }
        if self.valence_lexicon.values().chain(self.booster_map.values()).chain(self.idioms.values()).any(|v| !v.is_finite()) {
            return Err(SentimentError::InvalidRuleset("non-finite valence".into()));
        }
        self.constants.validate()
    }
}

/// `token<TAB>valence[<TAB>...]` per line; later duplicates replace earlier ones.
pub fn parse_lexicon(text: &str, path: &Path) -> Result<HashMap<String, f64>, SentimentError> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| SentimentError::Lexicon { path: PathBuf::from(path), line: i + 1, message };
        let mut cols = line.split('\t');
        let (Some(token), Some(value)) = (cols.next(), cols.next()) else {
            return Err(bad("expected `token<TAB>valence`".into()));
        };
        let value: f64 = value.trim().parse().map_err(|_| bad(format!("bad valence `{value}`")))?;
        if !value.is_finite() {
            return Err(bad(format!("non-finite valence `{value}`")));
        }
        out.insert(token.to_string(), value);
    }
    Ok(out)
}
