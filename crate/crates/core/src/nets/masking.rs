use rand::Rng;

use super::model::encode;
use super::{NetError, ReferenceModel};
use crate::graph::MolGraph;
use crate::matrix::{DenseMatrix, FeatureMatrix};
use crate::polymer::{featurize, ELEMENT_CLASSES};

/// Element classes predicted by the masked-atom head, "other" included.
pub const MASK_CLASSES: usize = ELEMENT_CLASSES.len() + 1;

/// Zeroes each column independently with probability `p_mask`. Returns the
/// corrupted matrix and the masked column indices in increasing order.
///
/// Panics unless `0 <= p_mask <= 1`.
pub fn mask_atoms<R: Rng + ?Sized>(x: &FeatureMatrix, p_mask: f64, rng: &mut R) -> (FeatureMatrix, Vec<usize>) {
    assert!((0.0..=1.0).contains(&p_mask), "p_mask must lie in [0, 1]");
    let mut out = x.clone();
    let mut masked = Vec::new();
    let zero = vec![0.0; x.rows()];
    for j in 0..x.cols() {
        if rng.gen_bool(p_mask) {
            out.set_column(j, &zero);
            masked.push(j);
        }
    }
    (out, masked)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskedAtoms {
    pub masked: Vec<usize>,
    /// Element class of every masked atom.
    pub targets: Vec<usize>,
    /// `MASK_CLASSES x masked.len()` logits.
    pub logits: DenseMatrix,
}

fn element_class(x0: &FeatureMatrix, j: usize) -> usize {
    (0..MASK_CLASSES)
        .find(|&c| x0.get(c, j) == 1.0)
        .expect("one-hot element block")
}

/// Corrupts the atom features of the model's prepared graph and runs the
/// element classifier on the masked atoms.
pub fn masked_atom_logits<R: Rng + ?Sized>(
    model: &ReferenceModel,
    g: &MolGraph,
    backbone: &[bool],
    p_mask: f64,
    rng: &mut R,
) -> Result<MaskedAtoms, NetError> {
    let x0 = featurize(g);
    let (xc, masked) = mask_atoms(&x0, p_mask, rng);
    let h = encode(model, g, backbone, &xc)?;
    let logits = model.weight("mask_head.W").matmul(&h.select_columns(&masked))?;
    Ok(MaskedAtoms {
        targets: masked.iter().map(|&j| element_class(&x0, j)).collect(),
        masked,
        logits,
    })
}
