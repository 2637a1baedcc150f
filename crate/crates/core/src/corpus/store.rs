use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use image::ImageFormat;
use sha2::{Digest, Sha256};

use super::{CorpusError, PostRecord};

/// Image directory name, relative to the corpus file.
pub const IMAGE_DIR: &str = "images";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes one JSON record per line, via a temporary file renamed into place.
pub fn save_corpus(path: &Path, records: &[PostRecord]) -> Result<(), CorpusError> {
    let tmp = path.with_extension("ndjson.tmp");
    {
        let file = fs::File::create(&tmp).map_err(|e| CorpusError::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        for r in records {
            serde_json::to_writer(&mut w, r).map_err(|e| CorpusError::io(&tmp, e.into()))?;
            w.write_all(b"\n").map_err(|e| CorpusError::io(&tmp, e))?;
        }
        w.flush().map_err(|e| CorpusError::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| CorpusError::io(path, e))
}

/// Reads a corpus file. Blank lines are skipped; every record is validated.
pub fn load_corpus(path: &Path) -> Result<Vec<PostRecord>, CorpusError> {
    let file = fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| CorpusError::Parse { path: path.to_path_buf(), line: i + 1, message };
        let record: PostRecord = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        record.validate().map_err(|e| parse_err(e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DedupOutcome {
    pub kept: Vec<PostRecord>,
    /// (dropped post id, id of the record kept in its place)
    pub dropped: Vec<(String, String)>,
}

/// Drops repeated post ids and repeated image hashes, keeping the record
/// with the earliest `fetched_at` (input order breaks ties). Output keeps
/// input order.
pub fn dedup_records(records: &[PostRecord]) -> DedupOutcome {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by_key(|&i| (records[i].fetched_at, i));

    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut hashes: HashMap<&str, usize> = HashMap::new();
    let mut keep = vec![false; records.len()];
    let mut dropped = Vec::new();
    for i in order {
        let r = &records[i];
        let owner = ids.get(r.post_id.as_str()).or_else(|| r.image_hash().and_then(|h| hashes.get(h)));
        if let Some(&k) = owner {
            dropped.push((r.post_id.clone(), records[k].post_id.clone()));
            continue;
        }
        keep[i] = true;
        ids.insert(&r.post_id, i);
        if let Some(h) = r.image_hash() {
            hashes.insert(h, i);
        }
    }
    let kept = records.iter().zip(&keep).filter(|(_, k)| **k).map(|(r, _)| r.clone()).collect();
    DedupOutcome { kept, dropped }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredImage {
    pub hash: String,
    /// `images/<hash>.<ext>`, relative to the store root.
    pub image_ref: String,
    pub width: u32,
    pub height: u32,
    pub file_size: u64,
    pub newly_written: bool,
}

/// Content-addressed image directory.
#[derive(Debug, Clone)]
pub struct ImageStore {
    root: PathBuf,
}

impl ImageStore {
    /// `root` is the directory holding the corpus file; images go under `root/images`.
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn resolve(&self, image_ref: &str) -> PathBuf {
        self.root.join(image_ref)
    }

    /// Hashes present on disk.
    pub fn known_hashes(&self) -> Result<HashSet<String>, CorpusError> {
        let dir = self.root.join(IMAGE_DIR);
        let mut out = HashSet::new();
        let entries = match fs::read_dir(&dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(CorpusError::io(dir, e)),
        };
        for entry in entries {
            let path = entry.map_err(|e| CorpusError::io(&dir, e))?.path();
            if path.extension().is_some_and(|e| e == "tmp") {
                continue;
            }
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string());
            }
        }
        Ok(out)
    }

    /// Decodes `bytes`, then stores them under their SHA-256. Bytes that do
    /// not decode are rejected without touching the disk.
    pub fn put(&self, bytes: &[u8]) -> Result<StoredImage, CorpusError> {
        let (width, height, format) = inspect_image(bytes)?;
        let hash = sha256_hex(bytes);
        let ext = format.extensions_str().first().copied().unwrap_or("img");
        let image_ref = format!("{IMAGE_DIR}/{hash}.{ext}");
        let dest = self.root.join(&image_ref);
        let newly_written = !dest.exists();
        if newly_written {
            let dir = self.root.join(IMAGE_DIR);
            fs::create_dir_all(&dir).map_err(|e| CorpusError::io(&dir, e))?;
            let tmp = dest.with_extension("tmp");
            fs::write(&tmp, bytes).map_err(|e| CorpusError::io(&tmp, e))?;
            fs::rename(&tmp, &dest).map_err(|e| CorpusError::io(&dest, e))?;
        }
        Ok(StoredImage { hash, image_ref, width, height, file_size: bytes.len() as u64, newly_written })
    }

    pub fn read(&self, image_ref: &str) -> Result<Vec<u8>, CorpusError> {
        let path = self.resolve(image_ref);
        fs::read(&path).map_err(|e| CorpusError::io(path, e))
    }
}

/// Dimensions and format of an encoded image; fails when the pixel data
/// does not fully decode.
pub fn inspect_image(bytes: &[u8]) -> Result<(u32, u32, ImageFormat), CorpusError> {
    let format = image::guess_format(bytes).map_err(|e| CorpusError::Image(e.to_string()))?;
    let img = image::load_from_memory_with_format(bytes, format).map_err(|e| CorpusError::Image(e.to_string()))?;
    if img.width() == 0 || img.height() == 0 {
        return Err(CorpusError::Image("zero-sized image".into()));
    }
    Ok((img.width(), img.height(), format))
}
