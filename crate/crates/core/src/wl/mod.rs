//! 1-WL color refinement, an exact isomorphism oracle for small graphs, and
//! twin polymer generation.
//!
//! Colors are 64-bit hashes of (own color, sorted multiset of (bond code,
//! neighbor color)), so colors from different graphs refined for the same
//! number of rounds are directly comparable.

mod iso;
mod twins;

pub use crate::polymer::unroll;
pub use iso::{isomorphic, isomorphic_colored, IsoError, MAX_ISO_ATOMS};
pub use twins::{
    cut_eligible_edges, cut_monomer, dumbbell_seed, edge_orbits, fused_dumbbell_seed, generate_twins, twin_report,
    TwinPair, TwinReport,
};

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::graph::MolGraph;
use crate::rng::{fnv1a64, hash_words};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColoringResult {
    pub colors: Vec<u64>,
    /// `(color, count)` sorted by color.
    pub histogram: Vec<(u64, usize)>,
    /// Refinement rounds that split at least one class.
    pub rounds: usize,
}

/// Initial colors from the full atom attributes.
pub fn atom_colors(g: &MolGraph) -> Vec<u64> {
    g.atoms().iter().map(|a| fnv1a64(&a.key_bytes())).collect()
}

pub fn uniform_colors(n: usize) -> Vec<u64> {
    vec![0; n]
}

/// Atom colors split by a backbone mask.
pub fn backbone_split_colors(g: &MolGraph, mask: &[bool]) -> Vec<u64> {
    atom_colors(g)
        .into_iter()
        .zip(mask)
        .map(|(c, &b)| hash_words(&[c, b as u64]))
        .collect()
}

/// One refinement round.
pub fn wl_step(g: &MolGraph, colors: &[u64]) -> Vec<u64> {
    (0..g.atom_count())
        .map(|v| {
            let mut nb: Vec<(u8, u64)> = g
                .neighbors(v)
                .iter()
                .map(|&(w, b)| (g.bond(b).order.code(), colors[w]))
                .collect();
            nb.sort_unstable();
            let mut words = Vec::with_capacity(1 + 2 * nb.len());
            words.push(colors[v]);
            for (l, c) in nb {
                words.push(l as u64);
                words.push(c);
            }
            hash_words(&words)
        })
        .collect()
}

/// Colors after exactly `rounds` refinement rounds.
pub fn wl_rounds(g: &MolGraph, initial: &[u64], rounds: usize) -> Vec<u64> {
    let mut c = initial.to_vec();
    for _ in 0..rounds {
        c = wl_step(g, &c);
    }
    c
}

fn class_count(colors: &[u64]) -> usize {
    colors.iter().collect::<HashSet<_>>().len()
}

pub fn histogram(colors: &[u64]) -> Vec<(u64, usize)> {
    let mut h = BTreeMap::new();
    for &c in colors {
        *h.entry(c).or_insert(0) += 1;
    }
    h.into_iter().collect()
}

/// Refines until the partition stops splitting.
///
/// ```
/// use polyseq::psmiles::parse;
/// use polyseq::wl::{atom_colors, wl_refine};
/// let g = parse("*CONO*").unwrap().graph;
/// let r = wl_refine(&g, &atom_colors(&g));
/// assert_eq!(r.histogram.len(), 4);
/// ```
pub fn wl_refine(g: &MolGraph, initial: &[u64]) -> ColoringResult {
    assert_eq!(initial.len(), g.atom_count(), "one initial color per atom");
    let mut colors = initial.to_vec();
    let mut classes = class_count(&colors);
    let mut rounds = 0;
    while rounds < g.atom_count() {
        let next = wl_step(g, &colors);
        let k = class_count(&next);
        if k == classes {
            break;
        }
        colors = next;
        classes = k;
        rounds += 1;
    }
    ColoringResult {
        histogram: histogram(&colors),
        colors,
        rounds,
    }
}

/// Refines two graphs in lockstep until neither partition splits, so the
/// resulting colors are comparable. Returns both results; the graphs are
/// WL-indistinguishable iff the histograms are equal.
pub fn wl_compare(g1: &MolGraph, init1: &[u64], g2: &MolGraph, init2: &[u64]) -> (ColoringResult, ColoringResult) {
    let mut c1 = init1.to_vec();
    let mut c2 = init2.to_vec();
    let mut rounds = 0;
    let limit = g1.atom_count().max(g2.atom_count());
    while rounds < limit {
        let n1 = wl_step(g1, &c1);
        let n2 = wl_step(g2, &c2);
        let split = class_count(&n1) > class_count(&c1) || class_count(&n2) > class_count(&c2);
        if !split {
            break;
        }
        c1 = n1;
        c2 = n2;
        rounds += 1;
    }
    let r1 = ColoringResult {
        histogram: histogram(&c1),
        colors: c1,
        rounds,
    };
    let r2 = ColoringResult {
        histogram: histogram(&c2),
        colors: c2,
        rounds,
    };
    (r1, r2)
}

/// True when WL with the given initial colors tells the graphs apart.
pub fn wl_distinguishes(g1: &MolGraph, init1: &[u64], g2: &MolGraph, init2: &[u64]) -> bool {
    let (a, b) = wl_compare(g1, init1, g2, init2);
    a.histogram != b.histogram
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::Element;
    use crate::graph::{Atom, BondOrder};
    use crate::psmiles::parse;

    fn cycle(n: usize) -> MolGraph {
        let mut g = MolGraph::new();
        for _ in 0..n {
            g.add_atom(Atom::new(Element::C));
        }
        for i in 0..n {
            g.add_bond(i, (i + 1) % n, BondOrder::Single).unwrap();
        }
        g
    }

    #[test]
    fn cycle_is_one_class() {
        let g = cycle(4);
        let r = wl_refine(&g, &atom_colors(&g));
        assert_eq!(r.histogram.len(), 1);
        assert_eq!(r.rounds, 0);
    }

    #[test]
    fn chain_classes() {
        // uniform start: ends vs middles after one round, then nothing more
        // for a symmetric path; attributes break the symmetry of C-O-N-O
        let g = parse("*CONO*").unwrap().graph;
        let r = wl_refine(&g, &uniform_colors(4));
        assert_eq!(r.histogram.len(), 2);
        let r = wl_refine(&g, &atom_colors(&g));
        assert_eq!(r.histogram.len(), 4);
        assert_eq!(r.rounds, 1);
    }

    #[test]
    fn hexagon_vs_two_triangles() {
        let mut two = cycle(3);
        let off = two.append(&cycle(3));
        assert_eq!(off, 3);
        let six = cycle(6);
        assert!(!wl_distinguishes(&six, &atom_colors(&six), &two, &atom_colors(&two)));
    }

    #[test]
    fn lockstep_detects_difference() {
        let a = parse("*CCCC*").unwrap().graph;
        let b = parse("*CC(C)C*").unwrap().graph;
        assert!(wl_distinguishes(&a, &atom_colors(&a), &b, &atom_colors(&b)));
    }
}
