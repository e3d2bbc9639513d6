use super::{parse, SmilesError};
use crate::graph::{bridges, canonical_labeling, ranked_shortest_path, BondOrder, MolGraph};
use crate::polymer::{star_link, MonomerGraph, StarLinkGraph};

/// Canonical key of the star-linking graph of `s` (atom and bond attributes
/// included). Equal keys mean isomorphic star-linking graphs.
///
/// ```
/// use polyseq::psmiles::canonical_form;
/// assert_eq!(canonical_form("*CONO*").unwrap(), canonical_form("*NOCO*").unwrap());
/// assert_ne!(canonical_form("*CONO*").unwrap(), canonical_form("*CONOCONO*").unwrap());
/// ```
pub fn canonical_form(s: &str) -> Result<Vec<u8>, SmilesError> {
    Ok(star_link_form(&star_link(&parse(s)?)))
}

pub fn star_link_form(sl: &StarLinkGraph) -> Vec<u8> {
    graph_certificate(&sl.graph, None)
}

fn graph_certificate(g: &MolGraph, tags: Option<(usize, usize)>) -> Vec<u8> {
    let keys: Vec<Vec<u8>> = g
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut k = a.key_bytes();
            if let Some((entry, exit)) = tags {
                k.push((i == entry) as u8 | ((i == exit) as u8) << 1);
            }
            k
        })
        .collect();
    canonical_labeling(&keys, &g.labeled_adjacency()).certificate
}

/// Key of the infinite polymer written by `s`: equal for every repeat,
/// translation and reversal of the same repeat unit.
///
/// ```
/// use polyseq::psmiles::polymer_key;
/// let k = polymer_key("*CONO*").unwrap();
/// assert_eq!(k, polymer_key("*NOCO*").unwrap());
/// assert_eq!(k, polymer_key("*CONOCONO*").unwrap());
/// assert_eq!(k, polymer_key("*ONOC*").unwrap());
/// assert_ne!(k, polymer_key("*CONNO*").unwrap());
/// ```
pub fn polymer_key(s: &str) -> Result<Vec<u8>, SmilesError> {
    Ok(monomer_polymer_key(&parse(s)?))
}

type Unit = (Vec<u8>, u8);

/// Polymer key of a parsed monomer.
///
/// The main chain is split at its bridges into blocks; each block is
/// canonicalized with its entry and exit atoms tagged, read in both
/// directions. The key is the smallest rotation of the primitive period of
/// the forward or reversed block sequence.
pub fn monomer_polymer_key(m: &MonomerGraph) -> Vec<u8> {
    let g = &m.graph;
    let is_bridge = bridges(g, false);
    let path = ranked_shortest_path(g, m.head, m.tail, &m.canonical_ranks()).expect("monomer is connected");
    let cut: Vec<(usize, usize, usize)> = path
        .windows(2)
        .filter_map(|w| {
            let b = g.bond_between(w[0], w[1]).expect("path steps are bonds");
            is_bridge[b].then_some((b, w[0], w[1]))
        })
        .collect();

    let mut body = g.clone();
    let mut removed: Vec<usize> = cut.iter().map(|c| c.0).collect();
    removed.sort_unstable();
    for &b in removed.iter().rev() {
        body.remove_bond(b);
    }

    let mut entries = vec![m.head];
    let mut exits = Vec::new();
    let mut orders = Vec::new();
    for &(b, near, far) in &cut {
        exits.push(near);
        entries.push(far);
        orders.push(g.bond(b).order.code());
    }
    exits.push(m.tail);
    orders.push(BondOrder::Single.code());

    let c = entries.len();
    let mut fwd = Vec::with_capacity(c);
    let mut rev = Vec::with_capacity(c);
    for i in 0..c {
        let members = component(&body, entries[i]);
        let (sub, map) = body.induced(&members);
        let (a, b) = (map[entries[i]].unwrap(), map[exits[i]].unwrap());
        fwd.push(graph_certificate(&sub, Some((a, b))));
        rev.push(graph_certificate(&sub, Some((b, a))));
    }

    let s: Vec<Unit> = (0..c).map(|i| (fwd[i].clone(), orders[i])).collect();
    let r: Vec<Unit> = (0..c)
        .map(|i| (rev[c - 1 - i].clone(), orders[(2 * c - 2 - i) % c]))
        .collect();

    let p = primitive_period(&s);
    let best = [&s[..p], &r[..p]]
        .into_iter()
        .flat_map(|seq| (0..p).map(move |k| rotated(seq, k)))
        .min()
        .expect("at least one block");

    let mut out = Vec::new();
    out.extend((p as u32).to_le_bytes());
    for (cert, order) in best {
        out.extend((cert.len() as u32).to_le_bytes());
        out.extend(cert);
        out.push(order);
    }
    out
}

fn component(g: &MolGraph, start: usize) -> Vec<usize> {
    let mut seen = vec![false; g.atom_count()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut out = Vec::new();
    while let Some(v) = stack.pop() {
        out.push(v);
        for &(w, _) in g.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    out.sort_unstable();
    out
}

fn primitive_period<T: PartialEq>(s: &[T]) -> usize {
    let n = s.len();
    (1..=n)
        .find(|&p| n.is_multiple_of(p) && (0..n).all(|i| s[i] == s[i % p]))
        .expect("p = n always works")
}

fn rotated(seq: &[Unit], k: usize) -> Vec<Unit> {
    seq[k..].iter().chain(&seq[..k]).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(s: &str) -> Vec<u8> {
        polymer_key(s).unwrap()
    }

    #[test]
    fn period_detection() {
        assert_eq!(primitive_period(&[1, 2, 1, 2]), 2);
        assert_eq!(primitive_period(&[1, 1, 1]), 1);
        assert_eq!(primitive_period(&[1, 2, 3]), 3);
    }

    #[test]
    fn repeat_translation_reversal() {
        let k = key("*CC(C)C(=O)O*");
        assert_eq!(k, key("*CC(C)C(=O)OCC(C)C(=O)O*"));
        assert_eq!(k, key("*C(C)C(=O)OC*"));
        assert_eq!(k, key("*OC(=O)C(C)C*"));
        assert_ne!(k, key("*CC(C)OC(=O)*"));
    }

    #[test]
    fn rings_on_the_main_chain() {
        let k = key("*c1ccc(cc1)O*");
        assert_eq!(k, key("*Oc1ccc(cc1)*"));
        assert_eq!(k, key("*c1ccc(cc1)Oc1ccc(cc1)O*"));
        assert_ne!(k, key("*c1cccc(c1)O*"));
    }

    #[test]
    fn double_bond_on_chain_is_kept() {
        assert_ne!(key("*C=CC*"), key("*CCC*"));
        assert_eq!(key("*C=CC*"), key("*CC=C*"));
    }

    #[test]
    fn translated_ring_units_match() {
        let a = key("*CC1CC1*");
        let b = key("*C1CC1C*");
        assert_eq!(a, b);
    }
}
