use serde::{Deserialize, Serialize};

use super::{MaskMode, NetError, ReferenceModel};
use crate::context::{AttentionContext, PATH_CODES};
use crate::graph::MolGraph;
use crate::matrix::{DenseMatrix, FeatureMatrix, ShapeError};

/// Distance bias table size: distances 0..=32 plus one overflow bucket.
pub const DIST_BUCKETS: usize = 34;

const LN_EPS: f64 = 1e-12;

/// Two affine maps with a ReLU between them.
#[derive(Debug, Clone, Copy)]
pub struct MlpWeights<'a> {
    pub w1: &'a DenseMatrix,
    pub b1: &'a [f64],
    pub w2: &'a DenseMatrix,
    pub b2: &'a [f64],
}

#[derive(Debug, Clone, Copy)]
pub struct LayerNormWeights<'a> {
    pub gain: &'a [f64],
    pub bias: &'a [f64],
}

#[derive(Debug, Clone, Copy)]
pub struct AttentionWeights<'a> {
    pub wq: &'a DenseMatrix,
    pub wk: &'a DenseMatrix,
    pub wv: &'a DenseMatrix,
    /// Distance bias per bucket.
    pub dist: &'a [f64],
    /// Linear functional over averaged path bond codes.
    pub path: &'a [f64],
    pub ln1: LayerNormWeights<'a>,
    pub ffn: MlpWeights<'a>,
    pub ln2: LayerNormWeights<'a>,
    pub mode: MaskMode,
}

#[derive(Debug, Clone, Copy)]
pub struct FusionWeights<'a> {
    pub wq: &'a DenseMatrix,
    pub wk: &'a DenseMatrix,
    pub wv: &'a DenseMatrix,
    pub ln: LayerNormWeights<'a>,
}

pub fn mlp(x: &FeatureMatrix, w: &MlpWeights) -> Result<FeatureMatrix, ShapeError> {
    let h = w.w1.matmul(x)?.add_column_broadcast(w.b1)?.map(|v| v.max(0.0));
    w.w2.matmul(&h)?.add_column_broadcast(w.b2)
}

/// GIN update with `eps = 0`: `x_v <- MLP(x_v + sum of neighbor x_u)`.
/// Link bonds count as ordinary neighbors.
pub fn gin_layer(g: &MolGraph, x: &FeatureMatrix, w: &MlpWeights) -> Result<FeatureMatrix, ShapeError> {
    if x.cols() != g.atom_count() {
        return Err(ShapeError::new("gin_layer", g.atom_count(), x.cols()));
    }
    let mut agg = x.clone();
    for v in 0..g.atom_count() {
        for &(u, _) in g.neighbors(v) {
            for i in 0..x.rows() {
                agg.set(i, v, agg.get(i, v) + x.get(i, u));
            }
        }
    }
    mlp(&agg, w)
}

/// Normalizes each column to zero mean and unit (population) variance.
pub fn layer_norm_columns(x: &FeatureMatrix) -> FeatureMatrix {
    let d = x.rows() as f64;
    let mut out = x.clone();
    for j in 0..x.cols() {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / d;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / d;
        let inv = 1.0 / (var + LN_EPS).sqrt();
        for (i, v) in col.iter().enumerate() {
            out.set(i, j, (v - mean) * inv);
        }
    }
    out
}

pub fn layer_norm(x: &FeatureMatrix, w: &LayerNormWeights) -> Result<FeatureMatrix, ShapeError> {
    if w.gain.len() != x.rows() || w.bias.len() != x.rows() {
        return Err(ShapeError::new("layer_norm", x.rows(), w.gain.len()));
    }
    let mut out = layer_norm_columns(x);
    for j in 0..out.cols() {
        for i in 0..out.rows() {
            out.set(i, j, out.get(i, j) * w.gain[i] + w.bias[i]);
        }
    }
    Ok(out)
}

fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// Softmax down each column.
pub fn softmax_columns(s: &DenseMatrix) -> DenseMatrix {
    let mut out = s.clone();
    for j in 0..s.cols() {
        let mut col = s.column(j);
        softmax_in_place(&mut col);
        out.set_column(j, &col);
    }
    out
}

fn bias(ctx: &AttentionContext, w: &AttentionWeights, key: usize, query: usize) -> f64 {
    let d = ctx.dist[key][query];
    let f = &ctx.path_features[key][query];
    w.dist[d.min(DIST_BUCKETS - 1)] + (0..PATH_CODES).map(|c| w.path[c] * f[c]).sum::<f64>()
}

/// Masked attention matrix `A_hat`, keys down the rows and queries across
/// the columns, so the layer output is `V A_hat`.
pub fn attention_weights(
    ctx: &AttentionContext,
    x: &FeatureMatrix,
    w: &AttentionWeights,
) -> Result<DenseMatrix, NetError> {
    let n = x.cols();
    if ctx.n != n {
        return Err(ShapeError::new("attention context", ctx.n, n).into());
    }
    if w.dist.len() != DIST_BUCKETS || w.path.len() != PATH_CODES {
        return Err(ShapeError::new("attention bias", DIST_BUCKETS, w.dist.len()).into());
    }
    let q = w.wq.matmul(x)?;
    let k = w.wk.matmul(x)?;
    let scale = 1.0 / (x.rows() as f64).sqrt();
    let logit = |i: usize, j: usize| {
        let dot: f64 = (0..q.rows()).map(|r| k.get(r, i) * q.get(r, j)).sum();
        dot * scale + bias(ctx, w, i, j)
    };
    let mut a = DenseMatrix::zeros(n, n);
    for j in 0..n {
        match w.mode {
            MaskMode::PreSoftmax => {
                let keys: Vec<usize> = (0..n).filter(|&i| ctx.local_mask[i][j]).collect();
                let mut col: Vec<f64> = keys.iter().map(|&i| logit(i, j)).collect();
                softmax_in_place(&mut col);
                for (&i, p) in keys.iter().zip(col) {
                    a.set(i, j, p);
                }
            }
            MaskMode::PostSoftmax => {
                let mut col: Vec<f64> = (0..n).map(|i| logit(i, j)).collect();
                softmax_in_place(&mut col);
                for (i, p) in col.into_iter().enumerate() {
                    if ctx.local_mask[i][j] {
                        a.set(i, j, p);
                    }
                }
            }
        }
    }
    Ok(a)
}

/// One localized graph transformer layer:
/// `H = LN(V A_hat + X)`, `X' = LN(FFN(H) + H)`.
pub fn local_attention_layer(
    ctx: &AttentionContext,
    x: &FeatureMatrix,
    w: &AttentionWeights,
) -> Result<FeatureMatrix, NetError> {
    let a = attention_weights(ctx, x, w)?;
    let y = w.wv.matmul(x)?.matmul(&a)?;
    let half = layer_norm(&y.add(x)?, &w.ln1)?;
    let ff = mlp(&half, &w.ffn)?;
    Ok(layer_norm(&ff.add(&half)?, &w.ln2)?)
}

/// `X_ts = LN(X_t + V_s softmax_col(K_s^T Q_t / sqrt(d)))` with queries from
/// the topology and keys/values from the projected spatial columns.
pub fn cross_modal_fusion(
    xt: &FeatureMatrix,
    xs: &DenseMatrix,
    w: &FusionWeights,
) -> Result<FeatureMatrix, ShapeError> {
    if xs.rows() != xt.rows() {
        return Err(ShapeError::new("cross_modal_fusion", xt.rows(), xs.rows()));
    }
    let q = w.wq.matmul(xt)?;
    let k = w.wk.matmul(xs)?;
    let v = w.wv.matmul(xs)?;
    let s = k.transpose().matmul(&q)?.scale(1.0 / (xt.rows() as f64).sqrt());
    let a = softmax_columns(&s);
    layer_norm(&xt.add(&v.matmul(&a)?)?, &w.ln)
}

/// Precomputed descriptor vectors of one polymer, one entry per group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialDescriptors {
    pub source: String,
    pub groups: Vec<(String, Vec<f64>)>,
}

/// Stacks `W_i x_i` for every group as the columns of a `d x N_s` matrix.
pub fn project_spatial(sd: &SpatialDescriptors, model: &ReferenceModel) -> Result<DenseMatrix, NetError> {
    let mut cols = Vec::with_capacity(sd.groups.len());
    for (name, x) in &sd.groups {
        let &(_, dim) = model
            .config
            .spatial_groups
            .iter()
            .find(|(g, _)| g == name)
            .ok_or_else(|| NetError::UnknownGroup(name.clone()))?;
        if x.len() != dim {
            return Err(NetError::GroupDim {
                name: name.clone(),
                expected: dim,
                found: x.len(),
            });
        }
        let w = model.weight(&format!("spatial.{name}.W"));
        cols.push(w.matmul(&DenseMatrix::column_vector(x))?.column(0));
    }
    Ok(DenseMatrix::from_columns(model.config.dim, &cols)?)
}
