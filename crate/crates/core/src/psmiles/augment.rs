use rand::Rng;

use super::{parse, write, SmilesError};
use crate::graph::{bridges, ranked_shortest_path, Bond, BondOrder};
use crate::polymer::MonomerGraph;

/// Doubles the repeat unit: two copies joined by a single bond from the
/// first tail to the second head.
///
/// ```
/// assert_eq!(polyseq::psmiles::repeat("*CONO*").unwrap(), "*CONOCONO*");
/// ```
pub fn repeat(s: &str) -> Result<String, SmilesError> {
    Ok(write(&repeat_monomer(&parse(s)?)))
}

pub fn repeat_monomer(m: &MonomerGraph) -> MonomerGraph {
    m.repeated(2)
}

/// Where a translation cuts the star-linking cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cut {
    /// Cut the link itself: the monomer is unchanged.
    Identity,
    /// Cut bond `bond`, with `near` the endpoint closer to the head.
    Bond { bond: usize, near: usize, far: usize },
}

/// The cuts a translation may choose from: the identity, then every
/// single-bond bridge on the head-to-tail main chain, in chain order.
///
/// Bonds of the cycle that lie in a ring of the monomer are not offered:
/// cutting one opens the ring and yields a different polymer whose
/// star-linking graph happens to coincide.
pub fn translation_cuts(m: &MonomerGraph) -> Vec<Cut> {
    let g = &m.graph;
    let is_bridge = bridges(g, false);
    let path = ranked_shortest_path(g, m.head, m.tail, &m.canonical_ranks()).expect("monomer is connected");
    let mut cuts = vec![Cut::Identity];
    for w in path.windows(2) {
        let b = g.bond_between(w[0], w[1]).expect("path steps are bonds");
        if is_bridge[b] && g.bond(b).order == BondOrder::Single {
            cuts.push(Cut::Bond {
                bond: b,
                near: w[0],
                far: w[1],
            });
        }
    }
    cuts
}

/// Applies a cut: the cut bond is removed, the old tail is bonded to the
/// old head, and the cut endpoints become the new boundaries.
pub fn translate(m: &MonomerGraph, cut: Cut) -> MonomerGraph {
    let Cut::Bond { bond, near, far } = cut else {
        return m.clone();
    };
    let mut g = m.graph.clone();
    g.remove_bond(bond);
    g.push_bond(Bond {
        u: m.tail,
        v: m.head,
        order: BondOrder::Single,
        link: false,
    })
    .expect("boundaries are not bonded once the cut bond is gone");
    MonomerGraph {
        graph: g,
        head: far,
        tail: near,
        stereo_discarded: m.stereo_discarded,
    }
}

/// Rewrites `s` starting from a uniformly chosen cut of its main-chain
/// cycle.
pub fn random_translation<R: Rng + ?Sized>(s: &str, rng: &mut R) -> Result<String, SmilesError> {
    let m = parse(s)?;
    let cuts = translation_cuts(&m);
    let cut = cuts[rng.gen_range(0..cuts.len())];
    Ok(write(&translate(&m, cut)))
}

/// What one call of [`random_augment_traced`] did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentTrace {
    pub output: String,
    pub repeated: bool,
    pub cut: usize,
    pub cut_count: usize,
}

/// A fair coin decides whether to repeat; a random translation is always
/// applied afterwards.
pub fn random_augment<R: Rng + ?Sized>(s: &str, rng: &mut R) -> Result<String, SmilesError> {
    random_augment_traced(s, rng).map(|t| t.output)
}

pub fn random_augment_traced<R: Rng + ?Sized>(s: &str, rng: &mut R) -> Result<AugmentTrace, SmilesError> {
    let mut m = parse(s)?;
    let repeated = rng.gen_bool(0.5);
    if repeated {
        m = repeat_monomer(&m);
    }
    let cuts = translation_cuts(&m);
    let cut = rng.gen_range(0..cuts.len());
    Ok(AugmentTrace {
        output: write(&translate(&m, cuts[cut])),
        repeated,
        cut,
        cut_count: cuts.len(),
    })
}
