use serde::Serialize;

use super::{atom_colors, backbone_split_colors, isomorphic_colored, wl_distinguishes, wl_refine};
use crate::element::Element;
use crate::graph::{bridges, Atom, BondOrder, MolGraph};
use crate::polymer::{backbone_mask, star_link, unroll, MonomerGraph, StarLinkGraph};
use crate::psmiles::{monomer_polymer_key, write};
use crate::rng::hash_words;

/// Distinct polymers whose star-linking graphs are isomorphic.
#[derive(Debug, Clone)]
pub struct TwinPair {
    pub monomer_a: MonomerGraph,
    pub monomer_b: MonomerGraph,
    pub shared_star_graph: StarLinkGraph,
    /// Smallest unroll depth at which WL separates the open chains.
    pub witness: usize,
}

/// Bonds whose removal leaves a connected graph with distinct, non-adjacent
/// boundary atoms joined by a single bond: ring bonds of single order.
pub fn cut_eligible_edges(h: &MolGraph) -> Vec<usize> {
    let is_bridge = bridges(h, true);
    (0..h.bond_count())
        .filter(|&b| !is_bridge[b] && h.bond(b).order == BondOrder::Single)
        .collect()
}

/// The monomer obtained by cutting bond `b`; its endpoints become the head
/// and tail. Linking it again gives back `h`.
pub fn cut_monomer(h: &MolGraph, b: usize) -> MonomerGraph {
    let cut = h.bond(b);
    let mut g = MolGraph::new();
    for a in h.atoms() {
        g.add_atom(a.clone());
    }
    // rebuilt rather than cloned so a cut star-linking graph loses its link flag
    for (i, bd) in h.bonds().iter().enumerate() {
        if i != b {
            g.add_bond(bd.u, bd.v, bd.order).expect("copied bond");
        }
    }
    MonomerGraph::new(g, cut.u, cut.v).expect("ring bond cut keeps the graph connected")
}

/// Partitions `edges` into automorphism orbits of `h`: WL colors split
/// candidates cheaply, then the isomorphism oracle with both endpoints
/// individualized decides.
pub fn edge_orbits(h: &MolGraph, edges: &[usize]) -> Vec<Vec<usize>> {
    let stable = wl_refine(h, &atom_colors(h)).colors;
    let sig = |b: usize| {
        let bd = h.bond(b);
        let (x, y) = (stable[bd.u], stable[bd.v]);
        (x.min(y), x.max(y), bd.order)
    };
    let tagged = |b: usize| {
        let bd = h.bond(b);
        stable
            .iter()
            .enumerate()
            .map(|(i, &c)| hash_words(&[c, (i == bd.u || i == bd.v) as u64]))
            .collect::<Vec<u64>>()
    };
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for &e in edges {
        let te = tagged(e);
        let home = orbits.iter_mut().find(|o| {
            sig(o[0]) == sig(e)
                && isomorphic_colored(h, &te, h, &tagged(o[0]))
                    .expect("seed graphs are small")
                    .is_some()
        });
        match home {
            Some(o) => o.push(e),
            None => orbits.push(vec![e]),
        }
    }
    orbits
}

const WITNESS_DEPTHS: std::ops::RangeInclusive<usize> = 2..=6;

/// Candidate twins from every pair of cut-eligible edge orbits of `h`.
/// A candidate is kept only when the two polymers differ (distinct polymer
/// keys) and WL separates their open-chain unrolls at some depth 2..=6.
pub fn generate_twins(h: &MolGraph) -> Vec<TwinPair> {
    let orbits = edge_orbits(h, &cut_eligible_edges(h));
    let mut out = Vec::new();
    for i in 0..orbits.len() {
        for j in i + 1..orbits.len() {
            let a = cut_monomer(h, orbits[i][0]);
            let b = cut_monomer(h, orbits[j][0]);
            if monomer_polymer_key(&a) == monomer_polymer_key(&b) {
                continue;
            }
            let witness = WITNESS_DEPTHS.clone().find(|&k| {
                let (ua, ub) = (unroll(&a, k), unroll(&b, k));
                wl_distinguishes(&ua, &atom_colors(&ua), &ub, &atom_colors(&ub))
            });
            if let Some(witness) = witness {
                out.push(TwinPair {
                    shared_star_graph: star_link(&a),
                    monomer_a: a,
                    monomer_b: b,
                    witness,
                });
            }
        }
    }
    out
}

/// Two carbon rings of sizes `ring_a` and `ring_b` joined through a chain
/// of `linker` carbons (a direct bond when zero).
pub fn dumbbell_seed(ring_a: usize, ring_b: usize, linker: usize) -> MolGraph {
    assert!(ring_a >= 3 && ring_b >= 3, "rings need at least three atoms");
    let mut g = MolGraph::new();
    for (start, size) in [(0, ring_a), (ring_a, ring_b)] {
        for _ in 0..size {
            g.add_atom(Atom::new(Element::C));
        }
        for i in 0..size {
            g.add_bond(start + i, start + (i + 1) % size, BondOrder::Single)
                .expect("ring bond");
        }
    }
    let mut prev = 0;
    for _ in 0..linker {
        let c = g.add_atom(Atom::new(Element::C));
        g.add_bond(prev, c, BondOrder::Single).expect("linker bond");
        prev = c;
    }
    g.add_bond(prev, ring_a, BondOrder::Single).expect("linker bond");
    g
}

fn add_fused_bicycle(g: &mut MolGraph, p: usize, q: usize) -> usize {
    let s = g.atom_count();
    for _ in 0..p {
        g.add_atom(Atom::new(Element::C));
    }
    for i in 0..p {
        g.add_bond(s + i, s + (i + 1) % p, BondOrder::Single)
            .expect("ring bond");
    }
    let mut prev = s + 1;
    for _ in 0..q - 2 {
        let c = g.add_atom(Atom::new(Element::C));
        g.add_bond(prev, c, BondOrder::Single).expect("ring bond");
        prev = c;
    }
    g.add_bond(prev, s, BondOrder::Single).expect("ring bond");
    s
}

/// Two fused bicycles (ring sizes `a.0`/`a.1` and `b.0`/`b.1`, each pair
/// sharing one bond) joined through `linker` carbons between the fourth atom
/// of each first ring. Cutting a fusion bond leaves every ring atom on the
/// bicycle's perimeter cycle, so the two fusion-bond cuts give monomers with
/// the same ring-membership features.
pub fn fused_dumbbell_seed(a: (usize, usize), b: (usize, usize), linker: usize) -> MolGraph {
    for (p, q) in [a, b] {
        assert!(p >= 5 && q >= 3, "first ring needs five atoms, second three");
    }
    let mut g = MolGraph::new();
    let sa = add_fused_bicycle(&mut g, a.0, a.1);
    let sb = add_fused_bicycle(&mut g, b.0, b.1);
    let mut prev = sa + 3;
    for _ in 0..linker {
        let c = g.add_atom(Atom::new(Element::C));
        g.add_bond(prev, c, BondOrder::Single).expect("linker bond");
        prev = c;
    }
    g.add_bond(prev, sb + 3, BondOrder::Single).expect("linker bond");
    g
}

#[derive(Debug, Clone, Serialize)]
pub struct TwinReport {
    pub monomer_a: String,
    pub monomer_b: String,
    pub witness_k: usize,
    pub star_histogram_a: Vec<(u64, usize)>,
    pub star_histogram_b: Vec<(u64, usize)>,
    pub backbone_histogram_a: Vec<(u64, usize)>,
    pub backbone_histogram_b: Vec<(u64, usize)>,
}

pub fn twin_report(p: &TwinPair) -> TwinReport {
    let sa = star_link(&p.monomer_a);
    let sb = star_link(&p.monomer_b);
    let (ha, hb) = super::wl_compare(&sa.graph, &atom_colors(&sa.graph), &sb.graph, &atom_colors(&sb.graph));
    let (ba, bb) = super::wl_compare(
        &sa.graph,
        &backbone_split_colors(&sa.graph, &backbone_mask(&sa.base)),
        &sb.graph,
        &backbone_split_colors(&sb.graph, &backbone_mask(&sb.base)),
    );
    TwinReport {
        monomer_a: write(&p.monomer_a),
        monomer_b: write(&p.monomer_b),
        witness_k: p.witness,
        star_histogram_a: ha.histogram,
        star_histogram_b: hb.histogram,
        backbone_histogram_a: ba.histogram,
        backbone_histogram_b: bb.histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psmiles::parse;
    use crate::wl::isomorphic;

    #[test]
    fn benzene_has_no_twins() {
        let h = star_link(&parse("*c1ccc(cc1)*").unwrap()).graph;
        assert!(generate_twins(&h).is_empty());
    }

    #[test]
    fn ring_with_methyl_gives_translations_only() {
        // cutting the four-ring next to or opposite the methyl gives two
        // writings of the same polymer
        let mut h = dumbbell_seed(4, 3, 0);
        h = h.induced(&[0, 1, 2, 3]).0;
        let c = h.add_atom(Atom::new(Element::C));
        h.add_bond(0, c, BondOrder::Single).unwrap();
        let edges = cut_eligible_edges(&h);
        assert_eq!(edges.len(), 4);
        assert_eq!(edge_orbits(&h, &edges).len(), 2);
        assert!(generate_twins(&h).is_empty());
    }

    #[test]
    fn dumbbell_twins_are_verified() {
        let h = dumbbell_seed(4, 6, 1);
        let pairs = generate_twins(&h);
        assert!(!pairs.is_empty());
        for p in &pairs {
            let sa = star_link(&p.monomer_a).graph;
            let sb = star_link(&p.monomer_b).graph;
            assert!(isomorphic(&sa, &sb).unwrap().is_some());
            assert!(isomorphic(&sa, &h).unwrap().is_some());
            assert!((2..=6).contains(&p.witness));
            let r = twin_report(p);
            assert_eq!(r.star_histogram_a, r.star_histogram_b);
            assert_ne!(r.backbone_histogram_a, r.backbone_histogram_b);
        }
    }

    #[test]
    fn fused_seed_shape() {
        let h = fused_dumbbell_seed((5, 6), (6, 6), 1);
        // 9 + 10 ring atoms, one linker
        assert_eq!(h.atom_count(), 20);
        assert_eq!(crate::graph::cyclomatic_number(&h), 4);
        assert_eq!(cut_eligible_edges(&h).len(), 10 + 11);
    }
}
