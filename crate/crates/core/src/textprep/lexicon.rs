use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::TextprepError;

const NOUNS: &str = include_str!("../../data/lexicon/nouns.txt");
const WORDLIST: &str = include_str!("../../data/lexicon/wordlist.txt");
const STOPWORDS: &str = include_str!("../../data/lexicon/stopwords.txt");
const CUSTOM_STOPWORDS: &str = include_str!("../../data/lexicon/custom_stopwords.txt");
const LEMMA_EXCEPTIONS: &str = include_str!("../../data/lexicon/lemma_exceptions.tsv");

/// Words that must always be present in the custom stopword list.
pub const REQUIRED_CUSTOM_STOPWORDS: [&str; 4] = ["pic", "picture", "post", "lol"];

/// Word lists used by the comment preprocessing pipeline. All entries are lowercase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconSet {
    pub standard_stopwords: HashSet<String>,
    pub custom_stopwords: HashSet<String>,
    pub noun_lexicon: HashSet<String>,
    pub lemma_exceptions: HashMap<String, String>,
    pub english_wordlist: HashSet<String>,
}

/// File locations for [`LexiconSet::from_paths`]; unset entries fall back to the bundled lists.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconPaths {
    pub stopwords: Option<PathBuf>,
    pub custom_stopwords: Option<PathBuf>,
    pub nouns: Option<PathBuf>,
    pub lemma_exceptions: Option<PathBuf>,
    pub wordlist: Option<PathBuf>,
}

impl LexiconSet {
    /// The lists shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_sources(
            &Source::Text("stopwords.txt", STOPWORDS),
            &Source::Text("custom_stopwords.txt", CUSTOM_STOPWORDS),
            &Source::Text("nouns.txt", NOUNS),
            &Source::Text("lemma_exceptions.tsv", LEMMA_EXCEPTIONS),
            &Source::Text("wordlist.txt", WORDLIST),
        )
        .expect("bundled lexicons are well formed")
    }

    pub fn from_paths(paths: &LexiconPaths) -> Result<Self, TextprepError> {
        let pick = |p: &Option<PathBuf>, name: &'static str, text: &'static str| -> Result<Source, TextprepError> {
            match p {
                Some(path) => {
                    let body = fs::read_to_string(path).map_err(|source| TextprepError::Io { path: path.clone(), source })?;
                    Ok(Source::File(path.clone(), body))
                }
                None => Ok(Source::Text(name, text)),
            }
        };
        Self::from_sources(
            &pick(&paths.stopwords, "stopwords.txt", STOPWORDS)?,
            &pick(&paths.custom_stopwords, "custom_stopwords.txt", CUSTOM_STOPWORDS)?,
            &pick(&paths.nouns, "nouns.txt", NOUNS)?,
            &pick(&paths.lemma_exceptions, "lemma_exceptions.tsv", LEMMA_EXCEPTIONS)?,
            &pick(&paths.wordlist, "wordlist.txt", WORDLIST)?,
        )
    }

    fn from_sources(
        stop: &Source,
        custom: &Source,
        nouns: &Source,
        exceptions: &Source,
        wordlist: &Source,
    ) -> Result<Self, TextprepError> {
        let set = LexiconSet {
            standard_stopwords: word_set(stop)?,
            custom_stopwords: word_set(custom)?,
            noun_lexicon: word_set(nouns)?,
            lemma_exceptions: exception_map(exceptions)?,
            english_wordlist: word_set(wordlist)?,
        };
        if let Some(missing) = REQUIRED_CUSTOM_STOPWORDS.iter().find(|w| !set.custom_stopwords.contains(**w)) {
            return Err(TextprepError::Lexicon {
                path: custom.path(),
                line: 0,
                message: format!("custom stopwords must include `{missing}`"),
            });
        }
        Ok(set)
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.standard_stopwords.contains(token) || self.custom_stopwords.contains(token)
    }
}

enum Source {
    Text(&'static str, &'static str),
    File(PathBuf, String),
}

impl Source {
    fn body(&self) -> &str {
        match self {
            Source::Text(_, t) => t,
            Source::File(_, t) => t,
        }
    }

    fn path(&self) -> PathBuf {
        match self {
            Source::Text(name, _) => Path::new("<bundled>").join(name),
            Source::File(p, _) => p.clone(),
        }
    }
}

fn bad(src: &Source, line: usize, message: impl Into<String>) -> TextprepError {
    TextprepError::Lexicon { path: src.path(), line, message: message.into() }
}

fn word_set(src: &Source) -> Result<HashSet<String>, TextprepError> {
    let mut out = HashSet::new();
    for (i, line) in src.body().lines().enumerate() {
        let w = line.trim();
        if w.is_empty() || w.starts_with('#') {
            continue;
        }
        if w.chars().any(char::is_whitespace) {
            return Err(bad(src, i + 1, format!("expected one word per line, got `{w}`")));
        }
        out.insert(w.to_lowercase());
    }
    Ok(out)
}

fn exception_map(src: &Source) -> Result<HashMap<String, String>, TextprepError> {
    let mut out = HashMap::new();
    for (i, line) in src.body().lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        match (cols.next(), cols.next(), cols.next()) {
            (Some(surface), Some(lemma), None) if !surface.trim().is_empty() && !lemma.trim().is_empty() => {
                out.entry(surface.trim().to_lowercase()).or_insert_with(|| lemma.trim().to_lowercase());
            }
            _ => return Err(bad(src, i + 1, "expected `surface<TAB>lemma`")),
        }
    }
    Ok(out)
}
