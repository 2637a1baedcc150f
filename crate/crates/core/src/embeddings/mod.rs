//! Word vectors, cosine similarity and the image–comment consistency score.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const GLOVE_DIMENSION: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("vector dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("zero-norm vector")]
    ZeroNorm,
}

/// Immutable token → vector table. Vectors are stored contiguously as f32
/// (the precision of the published text files); arithmetic is done in f64.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    dimension: usize,
    index: HashMap<String, usize>,
    data: Vec<f32>,
    norms: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Self {
        Self { dimension, ..Self::default() }
    }

    /// Inserts a vector unless the token is already present. Returns false
    /// for a duplicate.
    pub fn insert(&mut self, token: &str, vector: &[f32]) -> Result<bool, EmbeddingError> {
        if vector.len() != self.dimension {
            return Err(EmbeddingError::DimensionMismatch { left: self.dimension, right: vector.len() });
        }
        let token = token.to_lowercase();
        if self.index.contains_key(&token) {
            return Ok(false);
        }
        self.index.insert(token, self.norms.len());
        self.data.extend_from_slice(vector);
        self.norms.push(vector.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt());
        Ok(true)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vocab_size(&self) -> usize {
        self.norms.len()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        let i = *self.index.get(token)?;
        Some(&self.data[i * self.dimension..(i + 1) * self.dimension])
    }

    /// Cosine between two in-vocabulary tokens; `None` if either is missing
    /// or has zero norm.
    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        let (&i, &j) = (self.index.get(a)?, self.index.get(b)?);
        let (ni, nj) = (self.norms[i], self.norms[j]);
        if ni == 0.0 || nj == 0.0 {
            return None;
        }
        let d = self.dimension;
        let dot: f64 = self.data[i * d..(i + 1) * d]
            .iter()
            .zip(&self.data[j * d..(j + 1) * d])
            .map(|(x, y)| f64::from(*x) * f64::from(*y))
            .sum();
        Some((dot / (ni * nj)).clamp(-1.0, 1.0))
    }
}

/// Options for [`load_embeddings`].
#[derive(Debug, Clone, Default)]
pub struct LoadOptions<'a> {
    /// Expected vector length; defaults to 100.
    pub dimension: Option<usize>,
    /// Keep only these tokens (all lines are still validated).
    pub vocabulary: Option<&'a HashSet<String>>,
}

/// Reads the GloVe text format: a token followed by its components,
/// space separated, one token per line. The first occurrence of a token wins.
pub fn load_embeddings(path: &Path, options: &LoadOptions) -> Result<EmbeddingTable, EmbeddingError> {
    let dimension = options.dimension.unwrap_or(GLOVE_DIMENSION);
    let file = File::open(path).map_err(|source| EmbeddingError::Io { path: path.to_path_buf(), source })?;
    let mut table = EmbeddingTable::new(dimension);
    let mut buf = Vec::with_capacity(dimension);
    let mut duplicates = 0usize;
    for (i, line) in BufReader::with_capacity(1 << 20, file).lines().enumerate() {
        let line = line.map_err(|source| EmbeddingError::Io { path: path.to_path_buf(), source })?;
        let bad = |message: String| EmbeddingError::Parse { path: path.to_path_buf(), line: i + 1, message };
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let token = parts.next().unwrap_or_default();
        buf.clear();
        for p in parts {
            let v: f32 = p.parse().map_err(|_| bad(format!("bad component `{p}`")))?;
            if !v.is_finite() {
                return Err(bad(format!("non-finite component `{p}`")));
            }
            buf.push(v);
        }
        if buf.len() != dimension {
            return Err(bad(format!("expected {dimension} components, found {}", buf.len())));
        }
        if options.vocabulary.is_some_and(|v| !v.contains(&token.to_lowercase())) {
            continue;
        }
        if !table.insert(token, &buf)? {
            duplicates += 1;
            log::warn!("{}:{}: duplicate token `{token}` ignored", path.display(), i + 1);
        }
    }
    if duplicates > 0 {
        log::warn!("{}: {duplicates} duplicate tokens ignored", path.display());
    }
    Ok(table)
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimensionMismatch { left: u.len(), right: v.len() });
    }
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbeddingError::ZeroNorm);
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Highest-cosine label for `token`. Ties go to the earlier label; labels
/// outside the table are skipped. `None` when nothing can be compared.
pub fn best_match<S: AsRef<str>>(token: &str, labels: &[S], table: &EmbeddingTable) -> Option<(String, f64)> {
    let mut best: Option<(&str, f64)> = None;
    for label in labels {
        let label = label.as_ref();
        if let Some(c) = table.similarity(token, label) {
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((label, c));
            }
        }
    }
    best.map(|(l, c)| (l.to_string(), c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub comment_token: String,
    pub best_label: String,
    pub cosine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyScore {
    /// Mean best-match cosine; `None` when no token could be matched.
    pub value: Option<f64>,
    pub matched_pairs: Vec<MatchedPair>,
    /// Tokens without a match (out of vocabulary, or no usable label).
    pub skipped_tokens: usize,
}

pub fn consistency_score<S: AsRef<str>, L: AsRef<str>>(
    comment_tokens: &[S],
    labels: &[L],
    table: &EmbeddingTable,
) -> ConsistencyScore {
    let mut matched_pairs = Vec::new();
    let mut skipped_tokens = 0;
    for t in comment_tokens {
        match best_match(t.as_ref(), labels, table) {
            Some((best_label, cosine)) => {
                matched_pairs.push(MatchedPair { comment_token: t.as_ref().to_string(), best_label, cosine })
            }
            None => skipped_tokens += 1,
        }
    }
    let value = (!matched_pairs.is_empty())
        .then(|| matched_pairs.iter().map(|p| p.cosine).sum::<f64>() / matched_pairs.len() as f64);
    ConsistencyScore { value, matched_pairs, skipped_tokens }
}
