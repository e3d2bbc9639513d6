//! Local atom feature schema.
//!
//! | block            | width | encoding                                    |
//! |------------------|-------|---------------------------------------------|
//! | element          | 15    | one-hot over [`ELEMENT_CLASSES`] + "other"  |
//! | degree           | 7     | one-hot 0..=6, clamped                      |
//! | formal charge    | 5     | one-hot -2..=2, clamped                     |
//! | aromatic         | 1     | flag                                        |
//! | in ring          | 1     | flag, link bonds ignored                    |
//! | implicit H       | 5     | one-hot 0..=4, clamped                      |

use crate::element::Element;
use crate::graph::{bridges, Atom, MolGraph};
use crate::matrix::{DenseMatrix, FeatureMatrix, ShapeError};

pub const FEATURE_SCHEMA_VERSION: u32 = 1;

pub const ELEMENT_CLASSES: [Element; 14] = [
    Element::H,
    Element::B,
    Element::C,
    Element::N,
    Element::O,
    Element::F,
    Element::SI,
    Element::P,
    Element::S,
    Element::CL,
    Element::SE,
    Element::BR,
    Element::I,
    Element::DUMMY,
];

const ELEMENT_WIDTH: usize = ELEMENT_CLASSES.len() + 1;
const DEGREE_OFFSET: usize = ELEMENT_WIDTH;
const CHARGE_OFFSET: usize = DEGREE_OFFSET + 7;
const AROMATIC_OFFSET: usize = CHARGE_OFFSET + 5;
const RING_OFFSET: usize = AROMATIC_OFFSET + 1;
const HYDROGEN_OFFSET: usize = RING_OFFSET + 1;

pub const ATOM_FEATURE_DIM: usize = HYDROGEN_OFFSET + 5;

/// Atoms incident to a non-link bond that lies on a cycle of the graph with
/// link bonds removed.
pub fn in_ring_atoms(g: &MolGraph) -> Vec<bool> {
    let is_bridge = bridges(g, false);
    let mut out = vec![false; g.atom_count()];
    for (i, b) in g.bonds().iter().enumerate() {
        if !b.link && !is_bridge[i] {
            out[b.u] = true;
            out[b.v] = true;
        }
    }
    out
}

fn effective_valence(atom: &Atom) -> Option<i32> {
    let base = atom.element.default_valence()? as i32;
    let q = atom.charge as i32;
    Some(match atom.element {
        Element::B | Element::C | Element::SI => base - q.abs(),
        _ => base + q,
    })
}

/// Implicit hydrogens of atom `v` from the default valence table. Bracket
/// atoms report their written count.
pub fn implicit_hydrogens(g: &MolGraph, v: usize) -> u8 {
    let atom = g.atom(v);
    if let Some(h) = atom.hydrogens {
        return h;
    }
    let Some(valence) = effective_valence(atom) else {
        return 0;
    };
    let used: i32 = g
        .neighbors(v)
        .iter()
        .map(|&(_, b)| g.bond(b).order.doubled_valence() as i32)
        .sum();
    ((2 * valence - used).max(0) / 2) as u8
}

/// Feature matrix of `g`, one column per atom.
pub fn featurize(g: &MolGraph) -> FeatureMatrix {
    let ring = in_ring_atoms(g);
    let mut x = DenseMatrix::zeros(ATOM_FEATURE_DIM, g.atom_count());
    for (v, atom) in g.atoms().iter().enumerate() {
        let el = ELEMENT_CLASSES
            .iter()
            .position(|e| *e == atom.element)
            .unwrap_or(ELEMENT_CLASSES.len());
        x.set(el, v, 1.0);
        x.set(DEGREE_OFFSET + g.degree(v).min(6), v, 1.0);
        x.set(CHARGE_OFFSET + (atom.charge.clamp(-2, 2) + 2) as usize, v, 1.0);
        if atom.aromatic {
            x.set(AROMATIC_OFFSET, v, 1.0);
        }
        if ring[v] {
            x.set(RING_OFFSET, v, 1.0);
        }
        x.set(HYDROGEN_OFFSET + implicit_hydrogens(g, v).min(4) as usize, v, 1.0);
    }
    x
}

/// Adds `b` to every column flagged in `mask`.
pub fn apply_backbone_embedding(x: &FeatureMatrix, mask: &[bool], b: &[f64]) -> Result<FeatureMatrix, ShapeError> {
    if b.len() != x.rows() {
        return Err(ShapeError::new("apply_backbone_embedding", x.rows(), b.len()));
    }
    if mask.len() != x.cols() {
        return Err(ShapeError::new("apply_backbone_embedding mask", x.cols(), mask.len()));
    }
    let mut out = x.clone();
    for (j, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
        for (i, bi) in b.iter().enumerate() {
            out.set(i, j, x.get(i, j) + bi);
        }
    }
    Ok(out)
}
