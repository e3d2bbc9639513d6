use super::layers::{cross_modal_fusion, gin_layer, local_attention_layer, project_spatial, SpatialDescriptors};
use super::{LayerKind, ModelConfig, NetError, ReferenceModel};
use crate::context::build_context;
use crate::graph::MolGraph;
use crate::matrix::FeatureMatrix;
use crate::polymer::{
    apply_backbone_embedding, auto_repeat_for_lga, backbone_mask, featurize, star_link, strategy_transform,
    MonomerGraph, Strategy,
};

/// The graph a model actually sees for one monomer.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedGraph {
    pub graph: MolGraph,
    pub backbone: Vec<bool>,
    /// Copies of the source monomer at the front of `graph`; copy `c` atom
    /// `j` is atom `c * monomer_atoms + j`.
    pub copies: usize,
    pub monomer_atoms: usize,
}

/// Applies the configured strategy. Under star linking with attention
/// layers the monomer is first repeated per [`auto_repeat_for_lga`]. The
/// backbone mask is the monomer's mask tiled over the copies.
pub fn prepare(config: &ModelConfig, m: &MonomerGraph) -> PreparedGraph {
    let n = m.atom_count();
    if config.strategy != Strategy::Link {
        let sg = strategy_transform(m, config.strategy);
        return PreparedGraph {
            graph: sg.graph,
            backbone: sg.backbone,
            copies: 1,
            monomer_atoms: n,
        };
    }
    let (base, k) = match config.layer_kind {
        LayerKind::Attention => auto_repeat_for_lga(m, config.d_thres),
        LayerKind::Gin => (m.clone(), 1),
    };
    let sl = star_link(&base);
    let copies = k * sl.repeat_k;
    let one = backbone_mask(m);
    PreparedGraph {
        graph: sl.graph,
        backbone: one.iter().copied().cycle().take(copies * n).collect(),
        copies,
        monomer_atoms: n,
    }
}

/// Input projection, optional backbone embedding and the layer stack.
pub fn encode(
    model: &ReferenceModel,
    g: &MolGraph,
    backbone: &[bool],
    x0: &FeatureMatrix,
) -> Result<FeatureMatrix, NetError> {
    let cfg = &model.config;
    let mut h = model
        .weight("input.W")
        .matmul(x0)?
        .add_column_broadcast(model.weight("input.b").data())?;
    if cfg.backbone_embedding {
        h = apply_backbone_embedding(&h, backbone, model.weight("backbone.b").data())?;
    }
    match cfg.layer_kind {
        LayerKind::Gin => {
            for l in 0..cfg.layers {
                h = gin_layer(g, &h, &model.gin(l))?;
            }
        }
        LayerKind::Attention => {
            let ctx = build_context(g, cfg.d_thres)?;
            for l in 0..cfg.layers {
                h = local_attention_layer(&ctx, &h, &model.attention(l))?;
            }
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    /// Per-atom output `X_ts` (after fusion when descriptors are given).
    pub atoms: FeatureMatrix,
    /// Mean over all atom columns.
    pub pooled: Vec<f64>,
    pub y_hat: f64,
    pub copies: usize,
    pub monomer_atoms: usize,
}

pub fn forward_graph(
    model: &ReferenceModel,
    g: &MolGraph,
    backbone: &[bool],
    sd: Option<&SpatialDescriptors>,
) -> Result<ForwardOutput, NetError> {
    let mut x = encode(model, g, backbone, &featurize(g))?;
    if let Some(sd) = sd {
        let fw = model.fusion().ok_or(NetError::NoFusion)?;
        x = cross_modal_fusion(&x, &project_spatial(sd, model)?, &fw)?;
    }
    let pooled = x.column_mean();
    let y_hat = model.head().iter().zip(&pooled).map(|(w, h)| w * h).sum();
    Ok(ForwardOutput {
        atoms: x,
        pooled,
        y_hat,
        copies: 1,
        monomer_atoms: g.atom_count(),
    })
}

/// Full forward pass of one polymer.
///
/// ```
/// use polyseq::nets::{forward_polymer, ModelConfig, ReferenceModel};
/// use polyseq::psmiles::parse;
/// let model = ReferenceModel::generate(ModelConfig { dim: 16, ..ModelConfig::default() }, 1);
/// let a = forward_polymer(&model, &parse("*CONO*").unwrap(), None).unwrap();
/// let b = forward_polymer(&model, &parse("*NOCO*").unwrap(), None).unwrap();
/// assert!((a.y_hat - b.y_hat).abs() < 1e-9);
/// ```
pub fn forward_polymer(
    model: &ReferenceModel,
    m: &MonomerGraph,
    sd: Option<&SpatialDescriptors>,
) -> Result<ForwardOutput, NetError> {
    let p = prepare(&model.config, m);
    let mut out = forward_graph(model, &p.graph, &p.backbone, sd)?;
    out.copies = p.copies;
    out.monomer_atoms = p.monomer_atoms;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psmiles::parse;

    fn cfg(strategy: Strategy, kind: LayerKind) -> ModelConfig {
        ModelConfig {
            dim: 12,
            layers: 2,
            strategy,
            layer_kind: kind,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn relabeling_keeps_prediction() {
        for kind in [LayerKind::Gin, LayerKind::Attention] {
            let model = ReferenceModel::generate(cfg(Strategy::Link, kind), 4);
            let p = prepare(&model.config, &parse("*CC(=O)Nc1ccc(cc1)O*").unwrap());
            let n = p.graph.atom_count();
            let perm: Vec<usize> = (0..n).map(|i| (i * 5 + 2) % n).collect();
            let g2 = p.graph.permuted(&perm);
            let mut bb2 = vec![false; n];
            for (i, &b) in p.backbone.iter().enumerate() {
                bb2[perm[i]] = b;
            }
            let a = forward_graph(&model, &p.graph, &p.backbone, None).unwrap().y_hat;
            let b = forward_graph(&model, &g2, &bb2, None).unwrap().y_hat;
            assert!((a - b).abs() < 1e-9, "{kind}: {a} vs {b}");
        }
    }

    #[test]
    fn link_prepares_lga_repeats() {
        let c = cfg(Strategy::Link, LayerKind::Attention);
        let p = prepare(&c, &parse("*CONO*").unwrap());
        // d_b = 3, d_thres = 3: two copies reach distance 7 > 5
        assert_eq!(p.copies, 2);
        assert_eq!(p.graph.atom_count(), 8);
        assert!(p.backbone.iter().all(|&b| b));
        let p = prepare(&cfg(Strategy::Link, LayerKind::Gin), &parse("*CC(C)*").unwrap());
        assert_eq!(p.copies, 2);
        assert_eq!(p.backbone, vec![true, true, false, true, true, false]);
    }

    #[test]
    fn keep_strategy_sees_translation() {
        let model = ReferenceModel::generate(cfg(Strategy::Keep, LayerKind::Attention), 8);
        let a = forward_polymer(&model, &parse("*CONO*").unwrap(), None).unwrap().y_hat;
        let b = forward_polymer(&model, &parse("*NOCO*").unwrap(), None).unwrap().y_hat;
        assert!((a - b).abs() > 1e-6);
    }

    #[test]
    fn fusion_requires_groups() {
        let model = ReferenceModel::generate(cfg(Strategy::Link, LayerKind::Gin), 8);
        let sd = SpatialDescriptors {
            source: "x".into(),
            groups: vec![],
        };
        assert!(matches!(
            forward_polymer(&model, &parse("*CC*").unwrap(), Some(&sd)),
            Err(NetError::NoFusion)
        ));
    }
}
