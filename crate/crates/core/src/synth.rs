//! Deterministic synthetic dataset: a corpus with images, a feature
//! container, a toy embedding table and a run config, all from one seed.
//!
//! Comment counts follow NB(exp(a + b·memorability), α), redrawn below the
//! collection threshold. Memorability-network stage-4 activations get
//! noisier (more distinct) with memorability; other stages are unrelated.

use std::collections::BTreeMap;
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use chrono::{Duration, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use crate::corpus::{save_corpus, CommentRecord, CorpusError, ImageStore, PostRecord, MAX_TOP_COMMENTS, MIN_COMMENTS, MIN_SCORE};
use crate::features::{standard_layers, ContainerWriter, FeatureError, ImageEntry, Label, LabelStatus, Network, Stage};

pub const CORPUS_FILE: &str = "corpus.ndjson";
pub const FEATURE_DIR: &str = "features";
pub const EMBEDDING_FILE: &str = "toy.100d.txt";
pub const CONFIG_FILE: &str = "config.toml";

const TOY_EMBEDDINGS: &str = include_str!("../fixtures/embeddings/toy.100d.txt");
const NOUNS: [&str; 10] = ["stone", "rock", "ground", "tower", "dragon", "sculpture", "water", "money", "tree", "sky"];
const POSITIVE: [&str; 5] = ["love", "great", "beautiful", "awesome", "nice"];
const NEGATIVE: [&str; 5] = ["sad", "terrible", "ugly", "boring", "awful"];
const FILLER: [&str; 6] = ["this", "the", "looks", "that", "wow", "really"];
const SUBREDDITS: [&str; 3] = ["pics", "pic", "images"];
const RUNS: [&str; 3] = ["run1", "run2", "run3"];
const BLOCKS: [u32; 6] = [3, 8, 12, 24, 36, 3];
const LENGTHS: [u64; 6] = [64, 56, 48, 48, 48, 40];

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error("invalid options: {0}")]
    Options(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub seed: u64,
    pub n_posts: usize,
    /// a in log E[comments] = a + b·memorability.
    pub comment_intercept: f64,
    /// b; zero plants no signal.
    pub comment_slope: f64,
    pub alpha: f64,
    /// Weight of memorability in the stage-4 noise scale (log units per SD).
    pub stage4_link: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self { seed: 20_240_301, n_posts: 60, comment_intercept: 1.5, comment_slope: 3.0, alpha: 0.25, stage4_link: 0.8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSummary {
    pub dir: PathBuf,
    pub config_path: PathBuf,
    pub n_posts: usize,
}

fn nb_draw(rng: &mut ChaCha8Rng, mean: f64, alpha: f64) -> u64 {
    let lambda = Gamma::new(1.0 / alpha, alpha * mean).expect("positive gamma parameters").sample(rng);
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng) as u64
}

/// Redraws until the count reaches `floor`, like a collector that skips
/// posts below the threshold.
fn nb_at_least(rng: &mut ChaCha8Rng, mean: f64, alpha: f64, floor: u64) -> u64 {
    loop {
        let k = nb_draw(rng, mean, alpha);
        if k >= floor {
            return k;
        }
    }
}

fn png(rng: &mut ChaCha8Rng, index: usize) -> Vec<u8> {
    let w = rng.random_range(8..24u32);
    let h = rng.random_range(8..24u32);
    let base = [(index * 37 % 256) as u8, (index * 91 % 256) as u8, rng.random::<u8>()];
    let img = image::RgbImage::from_fn(w, h, |x, y| {
        image::Rgb([base[0].wrapping_add(x as u8), base[1].wrapping_add(y as u8), base[2]])
    });
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png).expect("png encodes in memory");
    out.into_inner()
}

fn comment(rng: &mut ChaCha8Rng, labels: &[&str], mood: f64) -> String {
    let mut words = Vec::new();
    for _ in 0..rng.random_range(1..=2) {
        words.push(*FILLER.choose(rng).unwrap());
    }
    for _ in 0..rng.random_range(1..=3) {
        let noun = if !labels.is_empty() && rng.random::<f64>() < 0.6 { labels.choose(rng).unwrap() } else { NOUNS.choose(rng).unwrap() };
        words.push(noun);
    }
    if rng.random::<f64>() < 0.8 {
        let pool = if rng.random::<f64>() < mood { &POSITIVE } else { &NEGATIVE };
        words.insert(rng.random_range(0..=words.len()), pool.choose(rng).unwrap());
    }
    let mut text = words.join(" ");
    if rng.random::<f64>() < 0.3 {
        text.push('!');
    }
    text
}

fn activation_row(rng: &mut ChaCha8Rng, common: &[f64], log_scale: f64) -> Vec<f32> {
    let s = log_scale.exp();
    common.iter().map(|c| (c + s * rng.sample::<f64, _>(StandardNormal)) as f32).collect()
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::Io { path: path.to_path_buf(), source }
}

/// Writes the dataset into `dir` (created if needed). Identical options
/// give byte-identical files.
pub fn generate(dir: &Path, opts: &SynthOptions) -> Result<SynthSummary, SynthError> {
    if opts.n_posts < 6 || !(opts.alpha > 0.0) {
        return Err(SynthError::Options("need n_posts >= 6 and alpha > 0".into()));
    }
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let store = ImageStore::new(dir);
    let n = opts.n_posts;

    let memorability: Vec<f64> = (0..n).map(|_| rng.random_range(0.35..0.95)).collect();
    let mean_m = memorability.iter().sum::<f64>() / n as f64;
    let sd_m = (memorability.iter().map(|m| (m - mean_m).powi(2)).sum::<f64>() / n as f64).sqrt().max(1e-9);

    let mut records = Vec::with_capacity(n);
    let mut entries = Vec::with_capacity(n);
    for (i, &mem) in memorability.iter().enumerate() {
        let bytes = png(&mut rng, i);
        let stored = store.put(&bytes)?;
        let run = i % RUNS.len();
        let created_at = Utc.with_ymd_and_hms(2024, 3, 1 + 7 * run as u32, 0, 0, 0).unwrap()
            + Duration::minutes(rng.random_range(0..7 * 24 * 60));
        let fetched_at = created_at + Duration::hours(rng.random_range(24..72));

        let mean = (opts.comment_intercept + opts.comment_slope * mem).exp();
        let num_comments = nb_at_least(&mut rng, mean, opts.alpha, MIN_COMMENTS as u64);
        let score = nb_at_least(&mut rng, 40.0, 0.5, MIN_SCORE as u64) as i64;

        let failed = i == n - 1;
        let mut labels: Vec<&str> = Vec::new();
        if !failed {
            while labels.len() < rng.random_range(2..=3) {
                let l = *NOUNS.choose(&mut rng).unwrap();
                if !labels.contains(&l) {
                    labels.push(l);
                }
            }
        }
        let mood = rng.random_range(0.2..0.8);
        let k = (num_comments as usize).min(MAX_TOP_COMMENTS);
        let mut scores: Vec<i64> = (0..k).map(|_| rng.random_range(1..200)).collect();
        scores.sort_unstable_by(|a, b| b.cmp(a));
        let top_comments =
            scores.into_iter().map(|s| CommentRecord { body: comment(&mut rng, &labels, mood), comment_score: s }).collect();

        records.push(PostRecord {
            post_id: format!("s{i:03}"),
            subreddit: SUBREDDITS[(i / RUNS.len()) % SUBREDDITS.len()].to_string(),
            caption: format!("My {} photo number {i}", NOUNS[i % NOUNS.len()]),
            created_at,
            fetched_at,
            score,
            num_comments,
            image_ref: stored.image_ref.clone(),
            image_width: stored.width,
            image_height: stored.height,
            file_size: stored.file_size,
            top_comments,
            collection_run: Some(RUNS[run].to_string()),
        });
        entries.push(ImageEntry {
            image_hash: stored.hash.clone(),
            memorability: mem,
            labels: labels.iter().enumerate().map(|(j, l)| Label { label: l.to_string(), confidence: 0.9 - 0.1 * j as f64 }).collect(),
            label_status: if failed { LabelStatus::Failed } else { LabelStatus::Ok },
        });
    }
    save_corpus(&dir.join(CORPUS_FILE), &records)?;

    // One log-scale per (network, stage, image): a shared per-image term
    // couples the two networks so residualization has something to remove.
    let layers = standard_layers(BLOCKS, LENGTHS);
    let shared: Vec<Vec<f64>> = (0..n).map(|_| (0..6).map(|_| 0.4 * rng.sample::<f64, _>(StandardNormal)).collect()).collect();
    let mut log_scale: BTreeMap<(Network, Stage), Vec<f64>> = BTreeMap::new();
    for l in &layers {
        let k = Stage::ALL.iter().position(|s| *s == l.stage).unwrap();
        let v = (0..n)
            .map(|i| {
                let noise = 0.3 * rng.sample::<f64, _>(StandardNormal);
                let planted = if l.network == Network::Memorability && l.stage == Stage::Stage4 {
                    opts.stage4_link * (memorability[i] - mean_m) / sd_m
                } else {
                    0.0
                };
                shared[i][k] + noise + planted
            })
            .collect();
        log_scale.insert((l.network, l.stage), v);
    }
    let commons: Vec<Vec<f64>> =
        layers.iter().map(|l| (0..l.flattened_length).map(|_| rng.sample(StandardNormal)).collect()).collect();

    let versions = BTreeMap::from([
        ("memorability".to_string(), "synthetic-1".to_string()),
        ("imagenet_baseline".to_string(), "synthetic-1".to_string()),
        ("labels".to_string(), "synthetic-1".to_string()),
    ]);
    let feature_dir = dir.join(FEATURE_DIR);
    let mut writer = ContainerWriter::create(&feature_dir, versions, "post_activation_block_output", layers.clone())?;
    for (i, entry) in entries.into_iter().enumerate() {
        let rows: Vec<Vec<f32>> = layers
            .iter()
            .zip(&commons)
            .map(|(l, c)| activation_row(&mut rng, c, log_scale[&(l.network, l.stage)][i]))
            .collect();
        let refs: Vec<&[f32]> = rows.iter().map(Vec::as_slice).collect();
        writer.push_image(entry, &refs)?;
    }
    writer.finish()?;

    let emb = dir.join(EMBEDDING_FILE);
    fs::write(&emb, TOY_EMBEDDINGS).map_err(io(&emb))?;
    let config_path = dir.join(CONFIG_FILE);
    let config = format!(
        "corpus_path = \"{CORPUS_FILE}\"\nfeature_dir = \"{FEATURE_DIR}\"\nembedding_path = \"{EMBEDDING_FILE}\"\n\
         output_dir = \"results\"\ntimezone = \"UTC\"\noutlier_removal = true\n"
    );
    fs::write(&config_path, config).map_err(io(&config_path))?;
    Ok(SynthSummary { dir: dir.to_path_buf(), config_path, n_posts: n })
}
