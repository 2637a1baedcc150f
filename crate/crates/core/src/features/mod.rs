//! Reader and writer for the Feature Container: a directory holding
//! `manifest.json` plus one little-endian f32 payload per (network, stage),
//! row-major, one row per manifest image.

mod manifest;

use std::collections::{HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

pub use manifest::{
    ImageEntry, Label, LabelStatus, LayerSpec, Manifest, Network, Stage, FORMAT_VERSION, LAYERS_PER_NETWORK,
    STAGE3_BLOCKS,
};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid manifest: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("{path}: payload is {actual} bytes, manifest implies {expected}")]
    PayloadSize { path: PathBuf, expected: u64, actual: u64 },
    #[error("no layer {network}/{stage} in container")]
    MissingLayer { network: Network, stage: Stage },
    #[error("row {row} out of range ({rows} rows)")]
    RowRange { row: usize, rows: usize },
    #[error("image `{image}` layer {network}/{stage}: expected {expected} values, got {actual}")]
    RowLength { image: String, network: Network, stage: Stage, expected: usize, actual: usize },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FeatureError + '_ {
    move |source| FeatureError::Io { path: path.to_path_buf(), source }
}

/// Row-addressable matrix of activations, read in contiguous blocks.
pub trait RowSource: Sync {
    fn n_rows(&self) -> usize;
    fn row_len(&self) -> usize;
    /// Name used in error messages.
    fn row_name(&self, row: usize) -> String;
    /// Reads rows `start..start + count` into `out` (row-major, widened to f64).
    fn read_rows(&self, start: usize, count: usize, out: &mut Vec<f64>) -> Result<(), FeatureError>;
}

/// In-memory row source.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    pub names: Vec<String>,
}

impl RowMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
            names: (0..rows.len()).map(|i| format!("row {i}")).collect(),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl RowSource for RowMatrix {
    fn n_rows(&self) -> usize {
        self.rows
    }

    fn row_len(&self) -> usize {
        self.cols
    }

    fn row_name(&self, row: usize) -> String {
        self.names.get(row).cloned().unwrap_or_else(|| format!("row {row}"))
    }

    fn read_rows(&self, start: usize, count: usize, out: &mut Vec<f64>) -> Result<(), FeatureError> {
        if start + count > self.rows {
            return Err(FeatureError::RowRange { row: start + count, rows: self.rows });
        }
        out.clear();
        out.extend_from_slice(&self.data[start * self.cols..(start + count) * self.cols]);
        Ok(())
    }
}

/// One payload file, opened for random row access.
#[derive(Debug)]
pub struct LayerFile {
    spec: LayerSpec,
    path: PathBuf,
    file: Mutex<File>,
    image_hashes: Vec<String>,
}

impl LayerFile {
    pub fn spec(&self) -> &LayerSpec {
        &self.spec
    }

    /// One row as stored (f32).
    pub fn read_row_f32(&self, row: usize) -> Result<Vec<f32>, FeatureError> {
        let mut buf = Vec::new();
        self.read_raw(row, 1, &mut buf)?;
        Ok(buf.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect())
    }

    fn read_raw(&self, start: usize, count: usize, buf: &mut Vec<u8>) -> Result<(), FeatureError> {
        let rows = self.image_hashes.len();
        if start + count > rows {
            return Err(FeatureError::RowRange { row: start + count, rows });
        }
        let row_bytes = self.spec.flattened_length * 4;
        buf.resize((row_bytes as usize) * count, 0);
        let mut f = self.file.lock().unwrap_or_else(|e| e.into_inner());
        f.seek(SeekFrom::Start(start as u64 * row_bytes)).map_err(io_err(&self.path))?;
        f.read_exact(buf).map_err(io_err(&self.path))
    }
}

impl RowSource for LayerFile {
    fn n_rows(&self) -> usize {
        self.image_hashes.len()
    }

    fn row_len(&self) -> usize {
        self.spec.flattened_length as usize
    }

    fn row_name(&self, row: usize) -> String {
        self.image_hashes.get(row).cloned().unwrap_or_else(|| format!("row {row}"))
    }

    fn read_rows(&self, start: usize, count: usize, out: &mut Vec<f64>) -> Result<(), FeatureError> {
        let mut buf = Vec::new();
        self.read_raw(start, count, &mut buf)?;
        out.clear();
        out.extend(buf.chunks_exact(4).map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]]))));
        Ok(())
    }
}

/// An opened, validated container.
#[derive(Debug)]
pub struct FeatureContainer {
    dir: PathBuf,
    manifest: Manifest,
    index: HashMap<String, usize>,
}

impl FeatureContainer {
    /// Reads and validates the manifest and checks every payload size.
    pub fn open(dir: &Path) -> Result<Self, FeatureError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| FeatureError::Manifest { path: path.clone(), message: e.to_string() })?;
        validate_manifest(&manifest).map_err(|message| FeatureError::Manifest { path: path.clone(), message })?;
        let n = manifest.images.len() as u64;
        for layer in &manifest.layers {
            let p = dir.join(&layer.file);
            let actual = fs::metadata(&p).map_err(io_err(&p))?.len();
            let expected = n * layer.flattened_length * 4;
            if actual != expected {
                return Err(FeatureError::PayloadSize { path: p, expected, actual });
            }
        }
        let index = manifest.images.iter().enumerate().map(|(i, e)| (e.image_hash.clone(), i)).collect();
        Ok(Self { dir: dir.to_path_buf(), manifest, index })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn images(&self) -> &[ImageEntry] {
        &self.manifest.images
    }

    pub fn image_index(&self, hash: &str) -> Option<usize> {
        self.index.get(hash).copied()
    }

    pub fn layer_spec(&self, network: Network, stage: Stage) -> Option<&LayerSpec> {
        self.manifest.layers.iter().find(|l| l.network == network && l.stage == stage)
    }

    pub fn layer(&self, network: Network, stage: Stage) -> Result<LayerFile, FeatureError> {
        let spec = self.layer_spec(network, stage).ok_or(FeatureError::MissingLayer { network, stage })?.clone();
        let path = self.dir.join(&spec.file);
        let file = File::open(&path).map_err(io_err(&path))?;
        Ok(LayerFile {
            spec,
            path,
            file: Mutex::new(file),
            image_hashes: self.manifest.images.iter().map(|e| e.image_hash.clone()).collect(),
        })
    }
}

fn validate_manifest(m: &Manifest) -> Result<(), String> {
    if m.format_version != FORMAT_VERSION {
        return Err(format!("unsupported format_version {} (expected {FORMAT_VERSION})", m.format_version));
    }
    if m.hook_point.trim().is_empty() {
        return Err("hook_point is empty".into());
    }
    let mut seen = HashSet::new();
    let mut files = HashSet::new();
    for l in &m.layers {
        if !seen.insert((l.network, l.stage)) {
            return Err(format!("duplicate layer {}/{}", l.network, l.stage));
        }
        if !files.insert(l.file.as_str()) {
            return Err(format!("payload file `{}` used twice", l.file));
        }
        if l.flattened_length == 0 {
            return Err(format!("layer {}/{} has zero length", l.network, l.stage));
        }
        if Path::new(&l.file).components().count() != 1 {
            return Err(format!("payload file `{}` must be a bare file name", l.file));
        }
        if let Some(b) = l.stage.required_block() {
            if l.block_index != b {
                return Err(format!("layer {}/{} taps block {}, expected {b}", l.network, l.stage, l.block_index));
            }
        }
    }
    for net in Network::ALL {
        let count = m.layers.iter().filter(|l| l.network == net).count();
        if count != LAYERS_PER_NETWORK {
            return Err(format!("network {net} has {count} layers, expected {LAYERS_PER_NETWORK}"));
        }
    }
    let mut hashes = HashSet::new();
    for e in &m.images {
        if !hashes.insert(e.image_hash.as_str()) {
            return Err(format!("duplicate image_hash `{}`", e.image_hash));
        }
        if !(0.0..=1.0).contains(&e.memorability) {
            return Err(format!("image `{}` memorability {} outside [0, 1]", e.image_hash, e.memorability));
        }
    }
    Ok(())
}

/// Writes a container into a staging directory and renames it into place
/// on [`ContainerWriter::finish`]; an abandoned writer leaves no container.
pub struct ContainerWriter {
    target: PathBuf,
    staging: PathBuf,
    manifest: Manifest,
    writers: Vec<BufWriter<File>>,
}

impl ContainerWriter {
    pub fn create(
        target: &Path,
        model_versions: std::collections::BTreeMap<String, String>,
        hook_point: &str,
        layers: Vec<LayerSpec>,
    ) -> Result<Self, FeatureError> {
        let staging = target.with_extension("partial");
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(io_err(&staging))?;
        }
        fs::create_dir_all(&staging).map_err(io_err(&staging))?;
        let mut writers = Vec::with_capacity(layers.len());
        for l in &layers {
            let p = staging.join(&l.file);
            writers.push(BufWriter::new(File::create(&p).map_err(io_err(&p))?));
        }
        let manifest =
            Manifest { format_version: FORMAT_VERSION, model_versions, hook_point: hook_point.to_string(), layers, images: Vec::new() };
        Ok(Self { target: target.to_path_buf(), staging, manifest, writers })
    }

    /// Appends one image; `activations` follow the order of the layer list.
    pub fn push_image(&mut self, entry: ImageEntry, activations: &[&[f32]]) -> Result<(), FeatureError> {
        assert_eq!(activations.len(), self.manifest.layers.len(), "one activation vector per layer");
        for (layer, values) in self.manifest.layers.iter().zip(activations) {
            if values.len() as u64 != layer.flattened_length {
                return Err(FeatureError::RowLength {
                    image: entry.image_hash.clone(),
                    network: layer.network,
                    stage: layer.stage,
                    expected: layer.flattened_length as usize,
                    actual: values.len(),
                });
            }
        }
        for ((layer, values), w) in self.manifest.layers.iter().zip(activations).zip(&mut self.writers) {
            let p = self.staging.join(&layer.file);
            for v in values.iter() {
                w.write_all(&v.to_le_bytes()).map_err(io_err(&p))?;
            }
        }
        self.manifest.images.push(entry);
        Ok(())
    }

    pub fn finish(mut self) -> Result<FeatureContainer, FeatureError> {
        validate_manifest(&self.manifest)
            .map_err(|message| FeatureError::Manifest { path: self.staging.join(MANIFEST_FILE), message })?;
        for (w, l) in self.writers.iter_mut().zip(&self.manifest.layers) {
            w.flush().map_err(io_err(&self.staging.join(&l.file)))?;
        }
        self.writers.clear();
        let mp = self.staging.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        fs::write(&mp, json + "\n").map_err(io_err(&mp))?;
        if self.target.exists() {
            fs::remove_dir_all(&self.target).map_err(io_err(&self.target))?;
        }
        fs::rename(&self.staging, &self.target).map_err(io_err(&self.target))?;
        FeatureContainer::open(&self.target)
    }
}

/// The twelve layer specs in canonical order with default file names.
pub fn standard_layers(block_indices: [u32; 6], lengths: [u64; 6]) -> Vec<LayerSpec> {
    Network::ALL
        .iter()
        .flat_map(|&network| {
            Stage::ALL.iter().enumerate().map(move |(k, &stage)| LayerSpec {
                network,
                stage,
                block_index: block_indices[k],
                flattened_length: lengths[k],
                file: LayerSpec::default_file_name(network, stage),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(dir: &Path, n: usize) -> FeatureContainer {
        let layers = standard_layers([3, 8, 12, 24, 36, 3], [4, 3, 2, 2, 2, 5]);
        let mut w = ContainerWriter::create(&dir.join("c"), Default::default(), "post_activation_block_output", layers.clone())
            .unwrap();
        for i in 0..n {
            let rows: Vec<Vec<f32>> =
                layers.iter().map(|l| (0..l.flattened_length).map(|k| (i * 100 + k as usize) as f32).collect()).collect();
            let refs: Vec<&[f32]> = rows.iter().map(Vec::as_slice).collect();
            let entry = ImageEntry {
                image_hash: format!("h{i}"),
                memorability: 0.5,
                labels: vec![Label { label: "stone".into(), confidence: 0.9 }],
                label_status: LabelStatus::Ok,
            };
            w.push_image(entry, &refs).unwrap();
        }
        w.finish().unwrap()
    }

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let c = build(dir.path(), 3);
        assert_eq!(c.images().len(), 3);
        assert_eq!(c.manifest().layers.len(), 12);
        let l = c.layer(Network::ImagenetBaseline, Stage::Stage4).unwrap();
        assert_eq!((l.n_rows(), l.row_len()), (3, 5));
        assert_eq!(l.read_row_f32(2).unwrap(), vec![200.0, 201.0, 202.0, 203.0, 204.0]);
        let mut out = Vec::new();
        l.read_rows(1, 2, &mut out).unwrap();
        assert_eq!(out.len(), 10);
        assert_eq!(out[0], 100.0);
        assert_eq!(l.row_name(1), "h1");
        assert!(!dir.path().join("c.partial").exists());
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let c = build(dir.path(), 2);
        let p = c.dir().join("memorability__stage2.f32");
        let bytes = fs::read(&p).unwrap();
        fs::write(&p, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(FeatureContainer::open(c.dir()), Err(FeatureError::PayloadSize { .. })));
    }

    #[test]
    fn wrong_stage3_block_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let layers = standard_layers([3, 8, 11, 24, 36, 3], [1; 6]);
        let w = ContainerWriter::create(&dir.path().join("c"), Default::default(), "x", layers).unwrap();
        assert!(matches!(w.finish(), Err(FeatureError::Manifest { .. })));
    }

    #[test]
    fn row_length_checked_on_write() {
        let dir = tempfile::tempdir().unwrap();
        let layers = standard_layers([3, 8, 12, 24, 36, 3], [2; 6]);
        let mut w = ContainerWriter::create(&dir.path().join("c"), Default::default(), "x", layers).unwrap();
        let short = [0.0f32];
        let ok = [0.0f32, 1.0];
        let mut refs: Vec<&[f32]> = vec![&ok; 12];
        refs[5] = &short;
        let e = ImageEntry { image_hash: "a".into(), memorability: 0.1, labels: vec![], label_status: LabelStatus::Failed };
        assert!(matches!(w.push_image(e, &refs), Err(FeatureError::RowLength { .. })));
    }
}
