use super::{MonomerGraph, StarLinkGraph};
use crate::graph::{ranked_shortest_path, sssr};

/// Backbone atoms of a monomer: one shortest head-to-tail path plus every
/// ring of the smallest set of smallest rings that shares an atom with it.
///
/// Ties between equal-length paths and rings are broken by canonical rank,
/// so isomorphic monomers get corresponding masks.
pub fn backbone_mask(m: &MonomerGraph) -> Vec<bool> {
    let ranks = m.canonical_ranks();
    let mut mask = vec![false; m.atom_count()];
    let path = ranked_shortest_path(&m.graph, m.head, m.tail, &ranks).expect("monomer graphs are connected");
    for &v in &path {
        mask[v] = true;
    }
    let on_path = mask.clone();
    for ring in sssr(&m.graph, &ranks) {
        if ring.iter().any(|&a| on_path[a]) {
            for a in ring {
                mask[a] = true;
            }
        }
    }
    mask
}

/// Backbone mask of a star-linking graph, computed on its base monomer
/// (the link edge never counts as part of a path or ring).
pub fn detect_backbone(g: &StarLinkGraph) -> Vec<bool> {
    backbone_mask(&g.base)
}
