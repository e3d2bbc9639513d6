//! Named weights and the `counter-mix-v1` generator.
//!
//! Generation is specified bit for bit so other implementations can
//! reproduce a model from `(seed, name)` alone:
//!
//! 1. `key = mix64(seed ^ fnv1a64(name))`
//! 2. for pair `p`: `u1 = unit(counter(key, 2p))`, `u2 = unit(counter(key, 2p + 1))`,
//!    `r = sqrt(-2 ln u1)`, `z[2p] = r cos(2 pi u2)`, `z[2p + 1] = r sin(2 pi u2)`
//! 3. entries are taken row-major from `z`, then scaled per weight role:
//!    matrices by `1 / sqrt(cols)`, biases by `0.1`, LayerNorm gains as
//!    `1 + 0.1 z`, the backbone vector unscaled.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::layers::{AttentionWeights, FusionWeights, LayerNormWeights, MlpWeights, DIST_BUCKETS};
use super::masking::MASK_CLASSES;
use super::{LayerKind, ModelConfig, NetError};
use crate::context::PATH_CODES;
use crate::matrix::DenseMatrix;
use crate::polymer::ATOM_FEATURE_DIM;
use crate::rng::{counter, fnv1a64, mix64, unit_interval};

pub const COUNTER_MIX_V1: &str = "counter-mix-v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedDescriptor {
    pub algorithm: String,
    pub seed: u64,
}

impl SeedDescriptor {
    pub fn counter_mix(seed: u64) -> SeedDescriptor {
        SeedDescriptor {
            algorithm: COUNTER_MIX_V1.to_string(),
            seed,
        }
    }
}

/// The first `count` standard normals of the stream for `name`.
pub fn standard_normals(seed: u64, name: &str, count: usize) -> Vec<f64> {
    let key = mix64(seed ^ fnv1a64(name.as_bytes()));
    let mut out = Vec::with_capacity(count + 1);
    let mut p = 0u64;
    while out.len() < count {
        let u1 = unit_interval(counter(key, 2 * p));
        let u2 = unit_interval(counter(key, 2 * p + 1));
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * PI * u2;
        out.push(r * t.cos());
        out.push(r * t.sin());
        p += 1;
    }
    out.truncate(count);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Matrix,
    Bias,
    Gain,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct WeightSpec {
    name: String,
    rows: usize,
    cols: usize,
    role: Role,
}

fn spec(name: impl Into<String>, rows: usize, cols: usize, role: Role) -> WeightSpec {
    WeightSpec {
        name: name.into(),
        rows,
        cols,
        role,
    }
}

fn mlp_specs(out: &mut Vec<WeightSpec>, prefix: &str, d: usize) {
    out.push(spec(format!("{prefix}.W1"), d, d, Role::Matrix));
    out.push(spec(format!("{prefix}.b1"), d, 1, Role::Bias));
    out.push(spec(format!("{prefix}.W2"), d, d, Role::Matrix));
    out.push(spec(format!("{prefix}.b2"), d, 1, Role::Bias));
}

fn ln_specs(out: &mut Vec<WeightSpec>, prefix: &str, d: usize) {
    out.push(spec(format!("{prefix}.gain"), d, 1, Role::Gain));
    out.push(spec(format!("{prefix}.bias"), d, 1, Role::Bias));
}

fn plan(config: &ModelConfig) -> Vec<WeightSpec> {
    let d = config.dim;
    let mut out = vec![
        spec("input.W", d, ATOM_FEATURE_DIM, Role::Matrix),
        spec("input.b", d, 1, Role::Bias),
        spec("backbone.b", d, 1, Role::Raw),
    ];
    for l in 0..config.layers {
        match config.layer_kind {
            LayerKind::Gin => mlp_specs(&mut out, &format!("layer{l}.gin"), d),
            LayerKind::Attention => {
                for w in ["WQ", "WK", "WV"] {
                    out.push(spec(format!("layer{l}.attn.{w}"), d, d, Role::Matrix));
                }
                out.push(spec(format!("layer{l}.attn.dist"), 1, DIST_BUCKETS, Role::Matrix));
                out.push(spec(format!("layer{l}.attn.path"), 1, PATH_CODES, Role::Matrix));
                ln_specs(&mut out, &format!("layer{l}.ln1"), d);
                mlp_specs(&mut out, &format!("layer{l}.ffn"), d);
                ln_specs(&mut out, &format!("layer{l}.ln2"), d);
            }
        }
    }
    if !config.spatial_groups.is_empty() {
        for w in ["WQ", "WK", "WV"] {
            out.push(spec(format!("fusion.{w}"), d, d, Role::Matrix));
        }
        ln_specs(&mut out, "fusion.ln", d);
        for (g, dg) in &config.spatial_groups {
            out.push(spec(format!("spatial.{g}.W"), d, *dg, Role::Matrix));
        }
    }
    out.push(spec("head.w", 1, d, Role::Matrix));
    out.push(spec("mask_head.W", MASK_CLASSES, d, Role::Matrix));
    out
}

fn generate(seed: u64, s: &WeightSpec) -> DenseMatrix {
    let z = standard_normals(seed, &s.name, s.rows * s.cols);
    let data = match s.role {
        Role::Matrix => {
            let k = 1.0 / (s.cols as f64).sqrt();
            z.into_iter().map(|x| x * k).collect()
        }
        Role::Bias => z.into_iter().map(|x| 0.1 * x).collect(),
        Role::Gain => z.into_iter().map(|x| 1.0 + 0.1 * x).collect(),
        Role::Raw => z,
    };
    DenseMatrix::new(s.rows, s.cols, data).expect("planned shape")
}

/// Weight file contents: name to matrix.
pub type WeightMap = BTreeMap<String, DenseMatrix>;

/// Immutable weights plus the layer plan they serve.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceModel {
    pub config: ModelConfig,
    weights: WeightMap,
    /// Set when the weights were generated rather than loaded.
    pub seed: Option<SeedDescriptor>,
}

impl ReferenceModel {
    /// Generates every weight with `counter-mix-v1`.
    ///
    /// ```
    /// use polyseq::nets::{ModelConfig, ReferenceModel};
    /// let a = ReferenceModel::generate(ModelConfig::default(), 7);
    /// let b = ReferenceModel::generate(ModelConfig::default(), 7);
    /// assert_eq!(a, b);
    /// assert_eq!(a.weight("head.w").shape(), (1, 64));
    /// ```
    pub fn generate(config: ModelConfig, seed: u64) -> ReferenceModel {
        let weights = plan(&config)
            .iter()
            .map(|s| (s.name.clone(), generate(seed, s)))
            .collect();
        ReferenceModel {
            config,
            weights,
            seed: Some(SeedDescriptor::counter_mix(seed)),
        }
    }

    pub fn from_descriptor(config: ModelConfig, desc: &SeedDescriptor) -> Result<ReferenceModel, NetError> {
        if desc.algorithm != COUNTER_MIX_V1 {
            return Err(NetError::Algorithm(desc.algorithm.clone()));
        }
        Ok(ReferenceModel::generate(config, desc.seed))
    }

    /// Checks names, shapes and finiteness against the plan for `config`.
    pub fn from_weights(config: ModelConfig, weights: WeightMap) -> Result<ReferenceModel, NetError> {
        let specs = plan(&config);
        for s in &specs {
            let w = weights
                .get(&s.name)
                .ok_or_else(|| NetError::MissingWeight(s.name.clone()))?;
            if w.shape() != (s.rows, s.cols) {
                return Err(NetError::WeightShape {
                    name: s.name.clone(),
                    expected: (s.rows, s.cols),
                    found: w.shape(),
                });
            }
            if !w.is_finite() {
                return Err(NetError::NonFinite(s.name.clone()));
            }
        }
        if let Some(extra) = weights.keys().find(|k| !specs.iter().any(|s| &s.name == *k)) {
            return Err(NetError::UnexpectedWeight(extra.clone()));
        }
        Ok(ReferenceModel {
            config,
            weights,
            seed: None,
        })
    }

    pub fn from_json(config: ModelConfig, text: &str) -> Result<ReferenceModel, NetError> {
        ReferenceModel::from_weights(config, serde_json::from_str(text)?)
    }

    pub fn load(config: ModelConfig, path: &Path) -> Result<ReferenceModel, NetError> {
        let text = std::fs::read_to_string(path).map_err(|e| NetError::Json(serde_json::Error::io(e)))?;
        ReferenceModel::from_json(config, &text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.weights).expect("weights serialize")
    }

    pub fn weights(&self) -> &WeightMap {
        &self.weights
    }

    /// Panics on a name outside the plan; the constructors guarantee every
    /// planned name is present.
    pub fn weight(&self, name: &str) -> &DenseMatrix {
        self.weights
            .get(name)
            .unwrap_or_else(|| panic!("weight {name:?} is not in the plan"))
    }

    pub fn has_weight(&self, name: &str) -> bool {
        self.weights.contains_key(name)
    }

    /// Copy with the same weights and a different configuration, as long
    /// as the new plan is satisfied (e.g. toggling the backbone embedding
    /// or the mask mode).
    pub fn with_config(&self, config: ModelConfig) -> Result<ReferenceModel, NetError> {
        let mut m = ReferenceModel::from_weights(config, self.weights.clone())?;
        m.seed = self.seed.clone();
        Ok(m)
    }

    fn mlp(&self, prefix: &str) -> MlpWeights<'_> {
        MlpWeights {
            w1: self.weight(&format!("{prefix}.W1")),
            b1: self.weight(&format!("{prefix}.b1")).data(),
            w2: self.weight(&format!("{prefix}.W2")),
            b2: self.weight(&format!("{prefix}.b2")).data(),
        }
    }

    fn ln(&self, prefix: &str) -> LayerNormWeights<'_> {
        LayerNormWeights {
            gain: self.weight(&format!("{prefix}.gain")).data(),
            bias: self.weight(&format!("{prefix}.bias")).data(),
        }
    }

    pub fn gin(&self, layer: usize) -> MlpWeights<'_> {
        self.mlp(&format!("layer{layer}.gin"))
    }

    pub fn attention(&self, layer: usize) -> AttentionWeights<'_> {
        let p = format!("layer{layer}.attn");
        AttentionWeights {
            wq: self.weight(&format!("{p}.WQ")),
            wk: self.weight(&format!("{p}.WK")),
            wv: self.weight(&format!("{p}.WV")),
            dist: self.weight(&format!("{p}.dist")).data(),
            path: self.weight(&format!("{p}.path")).data(),
            ln1: self.ln(&format!("layer{layer}.ln1")),
            ffn: self.mlp(&format!("layer{layer}.ffn")),
            ln2: self.ln(&format!("layer{layer}.ln2")),
            mode: self.config.mask_mode,
        }
    }

    pub fn fusion(&self) -> Option<FusionWeights<'_>> {
        if self.config.spatial_groups.is_empty() {
            return None;
        }
        Some(FusionWeights {
            wq: self.weight("fusion.WQ"),
            wk: self.weight("fusion.WK"),
            wv: self.weight("fusion.WV"),
            ln: self.ln("fusion.ln"),
        })
    }

    pub fn head(&self) -> &[f64] {
        self.weight("head.w").data()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normals_are_reproducible_and_standard() {
        let a = standard_normals(11, "x", 20_001);
        assert_eq!(a.len(), 20_001);
        assert_eq!(a[..10], standard_normals(11, "x", 10)[..]);
        assert_ne!(a[..10], standard_normals(11, "y", 10)[..]);
        assert_ne!(a[..10], standard_normals(12, "x", 10)[..]);
        let n = a.len() as f64;
        let mean = a.iter().sum::<f64>() / n;
        let var = a.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn first_pair_follows_box_muller() {
        let key = mix64(5 ^ fnv1a64(b"w"));
        let u1 = unit_interval(counter(key, 0));
        let u2 = unit_interval(counter(key, 1));
        let z = standard_normals(5, "w", 2);
        let r = (-2.0 * u1.ln()).sqrt();
        assert_eq!(z[0], r * (2.0 * PI * u2).cos());
        assert_eq!(z[1], r * (2.0 * PI * u2).sin());
    }

    #[test]
    fn plan_shapes() {
        let cfg = ModelConfig {
            dim: 8,
            layers: 2,
            spatial_groups: vec![("shape".into(), 3)],
            ..ModelConfig::default()
        };
        let m = ReferenceModel::generate(cfg.clone(), 1);
        assert_eq!(m.weight("input.W").shape(), (8, ATOM_FEATURE_DIM));
        assert_eq!(m.weight("layer1.attn.dist").shape(), (1, DIST_BUCKETS));
        assert_eq!(m.weight("spatial.shape.W").shape(), (8, 3));
        assert!(!m.has_weight("layer2.attn.WQ"));
        assert!(!m.has_weight("layer0.gin.W1"));
        let gains = m.weight("layer0.ln1.gain").data();
        assert!(gains.iter().all(|g| (g - 1.0).abs() < 0.6));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let cfg = ModelConfig {
            dim: 4,
            layers: 1,
            ..ModelConfig::default()
        };
        let m = ReferenceModel::generate(cfg.clone(), 99);
        let back = ReferenceModel::from_json(cfg.clone(), &m.to_json()).unwrap();
        assert_eq!(back.weights(), m.weights());
        assert_eq!(back.seed, None);
    }

    #[test]
    fn load_errors() {
        let cfg = ModelConfig {
            dim: 4,
            layers: 1,
            ..ModelConfig::default()
        };
        let m = ReferenceModel::generate(cfg.clone(), 3);
        let mut w = m.weights().clone();
        w.remove("head.w");
        assert!(matches!(
            ReferenceModel::from_weights(cfg.clone(), w),
            Err(NetError::MissingWeight(n)) if n == "head.w"
        ));
        let mut w = m.weights().clone();
        w.insert("head.w".into(), DenseMatrix::zeros(4, 1));
        assert!(matches!(
            ReferenceModel::from_weights(cfg.clone(), w),
            Err(NetError::WeightShape { .. })
        ));
        let mut w = m.weights().clone();
        w.insert("extra".into(), DenseMatrix::zeros(1, 1));
        assert!(matches!(
            ReferenceModel::from_weights(cfg.clone(), w),
            Err(NetError::UnexpectedWeight(_))
        ));
        let bad = SeedDescriptor {
            algorithm: "mt19937".into(),
            seed: 1,
        };
        assert!(matches!(
            ReferenceModel::from_descriptor(cfg, &bad),
            Err(NetError::Algorithm(_))
        ));
    }
}
