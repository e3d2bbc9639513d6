//! Forward-only reference networks: GIN message passing, localized graph
//! attention, cross-modal fusion, pooling and the linear head, plus the
//! finite-unroll oracle suites.
//!
//! All features are column-per-atom `d x n` matrices and every computation is
//! in `f64`. Weights are either generated from a seed (see [`weights`]) or
//! loaded from a JSON weight file.

mod fragcam;
mod layers;
mod masking;
mod model;
pub mod verify;
pub mod weights;

pub use fragcam::{fragcam, resolve_overlaps, FragCamResult, FragmentError};
pub use layers::{
    attention_weights, cross_modal_fusion, gin_layer, layer_norm, layer_norm_columns, local_attention_layer, mlp,
    project_spatial, softmax_columns, AttentionWeights, FusionWeights, LayerNormWeights, MlpWeights,
    SpatialDescriptors, DIST_BUCKETS,
};
pub use masking::{mask_atoms, masked_atom_logits, MaskedAtoms, MASK_CLASSES};
pub use model::{encode, forward_graph, forward_polymer, prepare, ForwardOutput, PreparedGraph};
pub use weights::{ReferenceModel, SeedDescriptor, WeightMap, COUNTER_MIX_V1};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::context::ContextError;
use crate::matrix::ShapeError;
use crate::polymer::Strategy;

#[derive(Debug, Error)]
pub enum NetError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("missing weight {0:?}")]
    MissingWeight(String),
    #[error("unexpected weight {0:?}")]
    UnexpectedWeight(String),
    #[error("weight {name:?} is {found:?}, expected {expected:?}")]
    WeightShape {
        name: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("weight {0:?} has non-finite entries")]
    NonFinite(String),
    #[error("unknown weight algorithm {0:?}")]
    Algorithm(String),
    #[error("unknown spatial group {0:?}")]
    UnknownGroup(String),
    #[error("spatial group {name:?} has {found} values, expected {expected}")]
    GroupDim {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("spatial descriptors given but the model has no spatial groups")]
    NoFusion,
    #[error(transparent)]
    Fragment(#[from] FragmentError),
    #[error("weight file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Gin,
    Attention,
}

impl FromStr for LayerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<LayerKind, String> {
        match s {
            "gin" => Ok(LayerKind::Gin),
            "attention" | "lga" => Ok(LayerKind::Attention),
            _ => Err(format!("unknown layer kind {s:?} (expected gin or attention)")),
        }
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayerKind::Gin => "gin",
            LayerKind::Attention => "attention",
        })
    }
}

/// Where the locality mask enters the attention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MaskMode {
    /// Masked logits are dropped before the softmax, so each column is a
    /// distribution over its local keys.
    #[default]
    PreSoftmax,
    /// Softmax over all keys, then masked entries are zeroed; columns are not
    /// renormalized.
    PostSoftmax,
}

impl FromStr for MaskMode {
    type Err = String;

    fn from_str(s: &str) -> Result<MaskMode, String> {
        match s {
            "pre" => Ok(MaskMode::PreSoftmax),
            "post" => Ok(MaskMode::PostSoftmax),
            _ => Err(format!("unknown mask mode {s:?} (expected pre or post)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Hidden width `d`.
    pub dim: usize,
    /// Layer count `L`.
    pub layers: usize,
    pub d_thres: usize,
    pub layer_kind: LayerKind,
    pub mask_mode: MaskMode,
    pub strategy: Strategy,
    pub backbone_embedding: bool,
    /// `(name, d_i)` per spatial descriptor group; empty disables fusion.
    pub spatial_groups: Vec<(String, usize)>,
}

impl Default for ModelConfig {
    fn default() -> ModelConfig {
        ModelConfig {
            dim: 64,
            layers: 3,
            d_thres: 3,
            layer_kind: LayerKind::Attention,
            mask_mode: MaskMode::PreSoftmax,
            strategy: Strategy::Link,
            backbone_embedding: true,
            spatial_groups: Vec::new(),
        }
    }
}
