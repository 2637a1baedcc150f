//! Comment text normalisation for the image–comment consistency metric.

mod clean;
mod lemma;
mod lexicon;

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use clean::{clean_text, collapse_repeats, tokenize};
pub use lemma::lemmatize;
pub use lexicon::{LexiconPaths, LexiconSet, REQUIRED_CUSTOM_STOPWORDS};

#[derive(Debug, thiserror::Error)]
pub enum TextprepError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Lexicon { path: PathBuf, line: usize, message: String },
}

/// Noun lemmas extracted from one or more comments.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenList {
    pub tokens: Vec<String>,
    /// Index of the comment each token came from.
    pub source_comment_index: Vec<usize>,
}

impl TokenList {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn extend(&mut self, other: TokenList) {
        self.tokens.extend(other.tokens);
        self.source_comment_index.extend(other.source_comment_index);
    }

    /// First occurrence of each token, in order.
    pub fn deduped(&self) -> TokenList {
        let mut seen = HashSet::new();
        let mut out = TokenList::default();
        for (t, i) in self.tokens.iter().zip(&self.source_comment_index) {
            if seen.insert(t.as_str()) {
                out.tokens.push(t.clone());
                out.source_comment_index.push(*i);
            }
        }
        out
    }
}

/// clean → tokenize → collapse repeats → lemmatize → nouns only → drop
/// stopwords → drop words outside the wordlist. Multiplicity is kept.
pub fn extract_nouns(comment: &str, lex: &LexiconSet) -> TokenList {
    extract_with_index(comment, 0, lex)
}

/// [`extract_nouns`] over several comments, concatenated in order.
pub fn extract_nouns_from_comments<S: AsRef<str>>(comments: &[S], lex: &LexiconSet) -> TokenList {
    let mut out = TokenList::default();
    for (i, c) in comments.iter().enumerate() {
        out.extend(extract_with_index(c.as_ref(), i, lex));
    }
    out
}

fn extract_with_index(comment: &str, index: usize, lex: &LexiconSet) -> TokenList {
    let tokens = collapse_repeats(&tokenize(&clean_text(comment)));
    let tokens: Vec<String> = tokens
        .iter()
        .map(|t| lemmatize(t, lex))
        .filter(|t| lex.noun_lexicon.contains(t))
        .filter(|t| !lex.is_stopword(t))
        .filter(|t| lex.english_wordlist.contains(t))
        .collect();
    let n = tokens.len();
    TokenList { tokens, source_comment_index: vec![index; n] }
}

/// Lowercased, lemmatized labels with duplicates removed (first occurrence wins).
pub fn unique_labels<S: AsRef<str>>(labels: &[S], lex: &LexiconSet) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for label in labels {
        let lower = label.as_ref().trim().to_lowercase();
        if lower.is_empty() {
            continue;
        }
        let lemma = lemmatize(&lower, lex);
        if seen.insert(lemma.clone()) {
            out.push(lemma);
        }
    }
    out
}
