use serde::Serialize;
use thiserror::Error;

use super::layers::SpatialDescriptors;
use super::model::forward_polymer;
use super::{NetError, ReferenceModel};
use crate::polymer::MonomerGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FragmentError {
    #[error("no fragments given")]
    NoFragments,
    #[error("fragment {0} is empty")]
    Empty(usize),
    #[error("atom {atom} in fragment {fragment} is out of range ({atoms} atoms)")]
    OutOfRange { fragment: usize, atom: usize, atoms: usize },
    #[error("atom {atom} appears in fragments {first} and {second}")]
    Overlap { atom: usize, first: usize, second: usize },
    #[error("atom {0} is in no fragment")]
    Uncovered(usize),
}

/// Turns an overlapping fragmentation into a partition: an atom shared by
/// several fragments stays only in the lowest-indexed one. Fragments left
/// empty are dropped; each survivor comes with its original index.
pub fn resolve_overlaps(fragments: &[Vec<usize>]) -> Vec<(usize, Vec<usize>)> {
    let mut seen = std::collections::HashSet::new();
    fragments
        .iter()
        .map(|f| f.iter().copied().filter(|&a| seen.insert(a)).collect::<Vec<_>>())
        .enumerate()
        .filter(|(_, f)| !f.is_empty())
        .collect()
}

fn check_partition(fragments: &[Vec<usize>], n: usize) -> Result<(), FragmentError> {
    if fragments.is_empty() {
        return Err(FragmentError::NoFragments);
    }
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (i, f) in fragments.iter().enumerate() {
        if f.is_empty() {
            return Err(FragmentError::Empty(i));
        }
        for &a in f {
            if a >= n {
                return Err(FragmentError::OutOfRange {
                    fragment: i,
                    atom: a,
                    atoms: n,
                });
            }
            if let Some(first) = owner[a] {
                return Err(FragmentError::Overlap {
                    atom: a,
                    first,
                    second: i,
                });
            }
            owner[a] = Some(i);
        }
    }
    match owner.iter().position(Option::is_none) {
        Some(a) => Err(FragmentError::Uncovered(a)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FragCamResult {
    /// `a_i = w^T h_i / N_F` per fragment.
    pub scores: Vec<f64>,
    /// `w^T h` with `h = (1/N_F) sum_i h_i`.
    pub y_hat: f64,
    /// Prediction of the mean-pooled forward pass, for reference.
    pub forward_y_hat: f64,
}

/// Fragment scores over the first monomer copy of the model's output:
/// `h_i` sums the output columns of fragment `i`.
///
/// ```
/// use polyseq::nets::{fragcam, ModelConfig, ReferenceModel};
/// use polyseq::psmiles::parse;
/// let model = ReferenceModel::generate(ModelConfig { dim: 8, ..ModelConfig::default() }, 3);
/// let m = parse("*CC(=O)O*").unwrap();
/// let r = fragcam(&model, &m, &[vec![0, 1], vec![2, 3]], None).unwrap();
/// assert!((r.scores.iter().sum::<f64>() - r.y_hat).abs() < 1e-9);
/// ```
pub fn fragcam(
    model: &ReferenceModel,
    m: &MonomerGraph,
    fragments: &[Vec<usize>],
    sd: Option<&SpatialDescriptors>,
) -> Result<FragCamResult, NetError> {
    check_partition(fragments, m.atom_count())?;
    let out = forward_polymer(model, m, sd)?;
    let w = model.head();
    let nf = fragments.len() as f64;
    let d = out.atoms.rows();
    let sums: Vec<Vec<f64>> = fragments
        .iter()
        .map(|f| {
            let mut h = vec![0.0; d];
            for &a in f {
                for (r, hr) in h.iter_mut().enumerate() {
                    *hr += out.atoms.get(r, a);
                }
            }
            h
        })
        .collect();
    let dot = |h: &[f64]| w.iter().zip(h).map(|(a, b)| a * b).sum::<f64>();
    let mut h = vec![0.0; d];
    for hi in &sums {
        for (a, b) in h.iter_mut().zip(hi) {
            *a += b / nf;
        }
    }
    Ok(FragCamResult {
        scores: sums.iter().map(|hi| dot(hi) / nf).collect(),
        y_hat: dot(&h),
        forward_y_hat: out.y_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::ModelConfig;
    use crate::psmiles::parse;

    fn model() -> ReferenceModel {
        ReferenceModel::generate(
            ModelConfig {
                dim: 8,
                layers: 2,
                ..ModelConfig::default()
            },
            21,
        )
    }

    #[test]
    fn single_fragment_is_prediction() {
        let m = parse("*CC(=O)OC*").unwrap();
        let r = fragcam(&model(), &m, &[vec![0, 1, 2, 3, 4]], None).unwrap();
        assert_eq!(r.scores.len(), 1);
        assert!((r.scores[0] - r.y_hat).abs() < 1e-12);
    }

    #[test]
    fn symmetric_fragments_split_evenly() {
        // both halves of *OCCO* map onto each other under the ring symmetry
        let m = parse("*OCCO*").unwrap();
        let r = fragcam(&model(), &m, &[vec![0, 1], vec![3, 2]], None).unwrap();
        assert!((r.scores[0] - r.scores[1]).abs() < 1e-12);
        assert!((r.scores[0] - r.y_hat / 2.0).abs() < 1e-12);
    }

    #[test]
    fn partition_errors() {
        let m = parse("*CCO*").unwrap();
        let md = model();
        let err = |f: &[Vec<usize>]| match fragcam(&md, &m, f, None) {
            Err(NetError::Fragment(e)) => e,
            other => panic!("expected fragment error, got {other:?}"),
        };
        assert_eq!(err(&[]), FragmentError::NoFragments);
        assert_eq!(err(&[vec![0, 1, 2], vec![]]), FragmentError::Empty(1));
        assert_eq!(
            err(&[vec![0, 1], vec![1, 2]]),
            FragmentError::Overlap {
                atom: 1,
                first: 0,
                second: 1
            }
        );
        assert_eq!(err(&[vec![0, 1]]), FragmentError::Uncovered(2));
        assert!(matches!(
            err(&[vec![0, 1, 2, 7]]),
            FragmentError::OutOfRange { atom: 7, .. }
        ));
    }

    #[test]
    fn overlaps_go_to_lower_fragment() {
        let r = resolve_overlaps(&[vec![0, 1], vec![1, 2], vec![2]]);
        assert_eq!(r, vec![(0, vec![0, 1]), (1, vec![2])]);
    }
}
