//! Layer distinctiveness: Pearson-distance matrices over activations,
//! per-image mean dissimilarity, residualization against the baseline
//! network, and the stage-level regression models.

mod distance;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureContainer, FeatureError, Network, Stage};
use crate::stats::{glm_fit, ols_with_residuals, vif, Design, Family, GlmOptions, ModelFit, StatsError, VifEntry};

pub use distance::{
    layer_mean_dissimilarity, mean_dissimilarity, pearson_distance_matrix, streamed_mean_dissimilarity,
    DissimilarityMatrix, DistanceOptions,
};

#[derive(Debug, thiserror::Error)]
pub enum DistinctError {
    #[error("image `{image}` has constant activations")]
    ZeroVariance { image: String },
    #[error("need at least 2 images, got {got}")]
    TooFewImages { got: usize },
    #[error("activation rows need at least 2 values, got {len}")]
    RowTooShort { len: usize },
    #[error("baseline scores are constant; nothing to regress on")]
    ConstantBaseline,
    #[error("score vectors differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 3 images for residualization, got {got}")]
    TooFewForResiduals { got: usize },
    #[error("image `{image}` has no residual for {stage}")]
    MissingLayer { image: String, stage: Stage },
    #[error("{target} model: {source}")]
    Model {
        target: &'static str,
        #[source]
        source: StatsError,
    },
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Residuals of the OLS fit `memnet = a + b · baseline`.
pub fn residualize_layer(memnet: &[f64], baseline: &[f64]) -> Result<Vec<f64>, DistinctError> {
    if memnet.len() != baseline.len() {
        return Err(DistinctError::LengthMismatch { left: memnet.len(), right: baseline.len() });
    }
    if memnet.len() < 3 {
        return Err(DistinctError::TooFewForResiduals { got: memnet.len() });
    }
    if baseline.windows(2).all(|w| w[0] == w[1]) {
        return Err(DistinctError::ConstantBaseline);
    }
    let design = Design::with_intercept(&[("baseline", baseline)])?;
    match ols_with_residuals(&design, memnet) {
        Ok((_, resid)) => Ok(resid),
        Err(StatsError::RankDeficient { .. }) => Err(DistinctError::ConstantBaseline),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinctivenessProfile {
    pub image_hash: String,
    pub mean_dissimilarity: BTreeMap<Network, BTreeMap<Stage, f64>>,
    /// Memorability-network component orthogonal to the baseline, per stage.
    pub residuals: BTreeMap<Stage, f64>,
}

/// Mean dissimilarity for all twelve layers, then per-stage residuals.
/// Profiles follow the container's image order.
pub fn compute_profiles(
    container: &FeatureContainer,
    opts: &DistanceOptions,
) -> Result<Vec<DistinctivenessProfile>, DistinctError> {
    let mut means: BTreeMap<(Network, Stage), Vec<f64>> = BTreeMap::new();
    for net in Network::ALL {
        for stage in Stage::ALL {
            let layer = container.layer(net, stage)?;
            log::info!("mean dissimilarity {net}/{stage}: {} x {}", layer.spec().flattened_length, container.images().len());
            means.insert((net, stage), layer_mean_dissimilarity(&layer, opts)?);
        }
    }
    profiles_from_means(container.images().iter().map(|e| e.image_hash.clone()).collect(), &means)
}

/// Assembles profiles from per-layer mean-dissimilarity vectors.
pub fn profiles_from_means(
    image_hashes: Vec<String>,
    means: &BTreeMap<(Network, Stage), Vec<f64>>,
) -> Result<Vec<DistinctivenessProfile>, DistinctError> {
    let n = image_hashes.len();
    let mut residuals: BTreeMap<Stage, Vec<f64>> = BTreeMap::new();
    for stage in Stage::ALL {
        let mem = means.get(&(Network::Memorability, stage));
        let base = means.get(&(Network::ImagenetBaseline, stage));
        match (mem, base) {
            (Some(m), Some(b)) => {
                if m.len() != n || b.len() != n {
                    return Err(DistinctError::LengthMismatch { left: n, right: m.len().min(b.len()) });
                }
                residuals.insert(stage, residualize_layer(m, b)?);
            }
            _ => {
                let image = image_hashes.first().cloned().unwrap_or_default();
                return Err(DistinctError::MissingLayer { image, stage });
            }
        }
    }
    Ok(image_hashes
        .into_iter()
        .enumerate()
        .map(|(i, image_hash)| DistinctivenessProfile {
            image_hash,
            mean_dissimilarity: Network::ALL
                .iter()
                .map(|&net| (net, Stage::ALL.iter().map(|&s| (s, means[&(net, s)][i])).collect()))
                .collect(),
            residuals: residuals.iter().map(|(s, v)| (*s, v[i])).collect(),
        })
        .collect())
}

/// Intercept plus one residual column per stage, in stage order.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerDesign {
    pub image_hashes: Vec<String>,
    pub design: Design,
    pub vif: Vec<VifEntry>,
    /// Some predictor is constant or an exact combination of the others.
    pub degenerate: bool,
}

impl LayerDesign {
    pub fn max_vif(&self) -> f64 {
        self.vif.iter().map(|v| v.vif).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn build_layer_design(profiles: &[DistinctivenessProfile]) -> Result<LayerDesign, DistinctError> {
    let mut columns: Vec<(String, Vec<f64>)> = Stage::ALL.iter().map(|s| (s.as_str().to_string(), Vec::new())).collect();
    for p in profiles {
        for (k, stage) in Stage::ALL.iter().enumerate() {
            let v = p
                .residuals
                .get(stage)
                .ok_or_else(|| DistinctError::MissingLayer { image: p.image_hash.clone(), stage: *stage })?;
            columns[k].1.push(*v);
        }
    }
    let n = profiles.len();
    let mut data = Vec::with_capacity(n * 7);
    for i in 0..n {
        data.push(1.0);
        data.extend(columns.iter().map(|(_, c)| c[i]));
    }
    let names = std::iter::once("intercept".to_string()).chain(columns.iter().map(|(s, _)| s.clone())).collect();
    let design = Design::new(names, DMatrix::from_row_slice(n, 7, &data))?;
    let vif = vif(&columns)?;
    let degenerate = vif.iter().any(|v| v.perfectly_collinear);
    Ok(LayerDesign { image_hashes: profiles.iter().map(|p| p.image_hash.clone()).collect(), design, vif, degenerate })
}

/// Per-image targets aligned with the design rows.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTargets {
    pub memorability: Vec<f64>,
    pub num_comments: Vec<f64>,
    /// `None` for posts without scorable comments; those rows are left out
    /// of the sentiment model only.
    pub avg_sentiment: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageModels {
    pub memorability: ModelFit,
    pub num_comments: ModelFit,
    pub avg_sentiment: ModelFit,
}

pub fn run_stage_models(
    layer: &LayerDesign,
    targets: &StageTargets,
    opts: &GlmOptions,
) -> Result<StageModels, DistinctError> {
    let n = layer.design.nrows();
    for len in [targets.memorability.len(), targets.num_comments.len(), targets.avg_sentiment.len()] {
        if len != n {
            return Err(DistinctError::LengthMismatch { left: n, right: len });
        }
    }
    let fit = |target: &'static str, design: &Design, y: &[f64], family| {
        glm_fit(design, y, family, opts).map_err(|source| DistinctError::Model { target, source })
    };
    let memorability = fit("memorability", &layer.design, &targets.memorability, Family::Gaussian)?;
    let num_comments = fit("num_comments", &layer.design, &targets.num_comments, Family::NegativeBinomial)?;

    let rows: Vec<usize> = (0..n).filter(|&i| targets.avg_sentiment[i].is_some()).collect();
    let y: Vec<f64> = rows.iter().filter_map(|&i| targets.avg_sentiment[i]).collect();
    let sub = Design::new(layer.design.names.clone(), layer.design.matrix.select_rows(rows.iter()))
        .map_err(|source| DistinctError::Model { target: "avg_sentiment", source })?;
    let avg_sentiment = fit("avg_sentiment", &sub, &y, Family::Gaussian)?;
    Ok(StageModels { memorability, num_comments, avg_sentiment })
}
