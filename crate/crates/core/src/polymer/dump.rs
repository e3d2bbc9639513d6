//! JSON graph dumps with a fixed field order, for diff-based tests.

use serde::{Deserialize, Serialize};

use super::{backbone_mask, implicit_hydrogens, strategy_transform, MonomerGraph, StarLinkGraph, Strategy};
use crate::graph::{BondOrder, MolGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpAtom {
    pub index: usize,
    pub element: String,
    pub aromatic: bool,
    pub charge: i8,
    /// Hydrogen count in the polymer context (boundary atoms see their
    /// junction bond).
    pub hcount: u8,
    pub is_boundary: bool,
    pub is_backbone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpBond {
    pub u: usize,
    pub v: usize,
    pub order: BondOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpMeta {
    pub auto_repeat_k: usize,
    pub stereo_discarded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub atoms: Vec<DumpAtom>,
    pub bonds: Vec<DumpBond>,
    pub link_edge: Option<[usize; 2]>,
    pub meta: DumpMeta,
}

fn atoms_of(g: &MolGraph, hydrogens_from: &MolGraph, boundary: [usize; 2], backbone: &[bool]) -> Vec<DumpAtom> {
    g.atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| DumpAtom {
            index: i,
            element: a.element.symbol().to_string(),
            aromatic: a.aromatic,
            charge: a.charge,
            hcount: implicit_hydrogens(hydrogens_from, i),
            is_boundary: boundary.contains(&i),
            is_backbone: backbone[i],
        })
        .collect()
}

fn bonds_of(g: &MolGraph) -> Vec<DumpBond> {
    g.bonds()
        .iter()
        .filter(|b| !b.link)
        .map(|b| DumpBond {
            u: b.u,
            v: b.v,
            order: b.order,
        })
        .collect()
}

impl GraphDump {
    pub fn from_monomer(m: &MonomerGraph) -> GraphDump {
        // Hydrogen counts are taken with the star bonds in place.
        let capped = strategy_transform(m, Strategy::Keep).graph;
        GraphDump {
            atoms: atoms_of(&m.graph, &capped, [m.head, m.tail], &backbone_mask(m)),
            bonds: bonds_of(&m.graph),
            link_edge: None,
            meta: DumpMeta {
                auto_repeat_k: 1,
                stereo_discarded: m.stereo_discarded,
            },
        }
    }

    pub fn from_star_link(sl: &StarLinkGraph) -> GraphDump {
        let (h, t) = sl.link_edge;
        GraphDump {
            atoms: atoms_of(&sl.graph, &sl.graph, [h, t], &sl.backbone),
            bonds: bonds_of(&sl.graph),
            link_edge: Some([h, t]),
            meta: DumpMeta {
                auto_repeat_k: sl.repeat_k,
                stereo_discarded: sl.base.stereo_discarded,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymer::star_link;
    use crate::psmiles::parse;

    #[test]
    fn monomer_dump_field_order_is_stable() {
        let d = GraphDump::from_monomer(&parse("*CO*").unwrap());
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(
            json,
            r#"{"atoms":[{"index":0,"element":"C","aromatic":false,"charge":0,"hcount":2,"is_boundary":true,"is_backbone":true},{"index":1,"element":"O","aromatic":false,"charge":0,"hcount":0,"is_boundary":true,"is_backbone":true}],"bonds":[{"u":0,"v":1,"order":"single"}],"link_edge":null,"meta":{"auto_repeat_k":1,"stereo_discarded":false}}"#
        );
    }

    #[test]
    fn star_link_dump_reports_repeat() {
        let d = GraphDump::from_star_link(&star_link(&parse("*CC(C)*").unwrap()));
        assert_eq!(d.atoms.len(), 6);
        assert_eq!(d.bonds.len(), 5);
        assert_eq!(d.link_edge, Some([0, 4]));
        assert_eq!(d.meta.auto_repeat_k, 2);
    }
}
