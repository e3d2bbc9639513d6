//! Attributed molecular graphs and the graph algorithms shared by every
//! other module.

mod algo;
mod canon;

pub use algo::{
    all_pairs_distances, bfs_distances, bridges, cyclomatic_number, is_connected, ranked_shortest_path, sssr,
    UNREACHABLE,
};
pub use canon::{canonical_labeling, CanonicalLabeling};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::element::Element;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    pub const ALL: [BondOrder; 4] = [
        BondOrder::Single,
        BondOrder::Double,
        BondOrder::Triple,
        BondOrder::Aromatic,
    ];

    /// Dense code used for edge labels and path features.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 0,
            BondOrder::Double => 1,
            BondOrder::Triple => 2,
            BondOrder::Aromatic => 3,
        }
    }

    /// Twice the bond order, so that aromatic bonds count 1.5 exactly.
    pub fn doubled_valence(self) -> u8 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub charge: i8,
    /// Hydrogen count written inside brackets; `None` for bare atoms.
    pub hydrogens: Option<u8>,
    pub isotope: Option<u16>,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            aromatic: false,
            charge: 0,
            hydrogens: None,
            isotope: None,
        }
    }

    pub fn aromatic(element: Element) -> Atom {
        Atom {
            aromatic: true,
            ..Atom::new(element)
        }
    }

    /// Stable byte encoding of every attribute; used for canonical keys and
    /// as the seed of attribute-aware color refinement.
    pub fn key_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8);
        out.push(self.element.atomic_number());
        out.push(self.aromatic as u8);
        out.push(self.charge as u8);
        match self.hydrogens {
            Some(h) => out.extend([1, h]),
            None => out.extend([0, 0]),
        }
        match self.isotope {
            Some(i) => {
                out.push(1);
                out.extend(i.to_le_bytes());
            }
            None => out.extend([0, 0, 0]),
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub u: usize,
    pub v: usize,
    pub order: BondOrder,
    /// Set on the edge that closes a star-linking graph.
    pub link: bool,
}

impl Bond {
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("atom index {0} out of range")]
    AtomOutOfRange(usize),
    #[error("self-loop on atom {0}")]
    SelfLoop(usize),
    #[error("duplicate bond between atoms {0} and {1}")]
    DuplicateBond(usize, usize),
    #[error("graph is not connected")]
    Disconnected,
}

/// Undirected simple graph with atom and bond attributes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MolGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl MolGraph {
    pub fn new() -> MolGraph {
        MolGraph::default()
    }

    pub fn add_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.adj.push(Vec::new());
        self.atoms.len() - 1
    }

    pub fn add_bond(&mut self, u: usize, v: usize, order: BondOrder) -> Result<usize, GraphError> {
        self.push_bond(Bond {
            u,
            v,
            order,
            link: false,
        })
    }

    pub fn push_bond(&mut self, bond: Bond) -> Result<usize, GraphError> {
        let Bond { u, v, .. } = bond;
        let n = self.atoms.len();
        if u >= n {
            return Err(GraphError::AtomOutOfRange(u));
        }
        if v >= n {
            return Err(GraphError::AtomOutOfRange(v));
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if self.bond_between(u, v).is_some() {
            return Err(GraphError::DuplicateBond(u.min(v), u.max(v)));
        }
        let idx = self.bonds.len();
        self.bonds.push(bond);
        self.adj[u].push((v, idx));
        self.adj[v].push((u, idx));
        Ok(idx)
    }

    /// Removes a bond; bond indices above `idx` shift down by one.
    pub fn remove_bond(&mut self, idx: usize) -> Bond {
        let bond = self.bonds.remove(idx);
        self.rebuild_adjacency();
        bond
    }

    fn rebuild_adjacency(&mut self) {
        for list in &mut self.adj {
            list.clear();
        }
        for (i, b) in self.bonds.iter().enumerate() {
            self.adj[b.u].push((b.v, i));
            self.adj[b.v].push((b.u, i));
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn atom_mut(&mut self, i: usize) -> &mut Atom {
        &mut self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, idx: usize) -> &Bond {
        &self.bonds[idx]
    }

    /// `(neighbor, bond index)` pairs in insertion order.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn bond_between(&self, u: usize, v: usize) -> Option<usize> {
        self.adj.get(u)?.iter().find(|(w, _)| *w == v).map(|&(_, b)| b)
    }

    /// Adjacency with bond-order codes as edge labels.
    pub fn labeled_adjacency(&self) -> Vec<Vec<(usize, u8)>> {
        self.adj
            .iter()
            .map(|list| list.iter().map(|&(w, b)| (w, self.bonds[b].order.code())).collect())
            .collect()
    }

    /// Appends a copy of `other`, returning the index offset of its atoms.
    pub fn append(&mut self, other: &MolGraph) -> usize {
        let offset = self.atoms.len();
        for atom in &other.atoms {
            self.add_atom(atom.clone());
        }
        for b in &other.bonds {
            self.push_bond(Bond {
                u: b.u + offset,
                v: b.v + offset,
                ..*b
            })
            .expect("copied bonds are valid");
        }
        offset
    }

    /// Relabels atoms: atom `i` moves to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> MolGraph {
        let n = self.atoms.len();
        assert_eq!(perm.len(), n);
        let mut atoms = vec![None; n];
        for (i, a) in self.atoms.iter().enumerate() {
            atoms[perm[i]] = Some(a.clone());
        }
        let mut g = MolGraph::new();
        for a in atoms {
            g.add_atom(a.expect("perm is a permutation"));
        }
        for b in &self.bonds {
            g.push_bond(Bond {
                u: perm[b.u],
                v: perm[b.v],
                ..*b
            })
            .expect("permuted bonds are valid");
        }
        g
    }

    /// Subgraph induced by `keep` (in the given order) plus the index map
    /// from old to new atom indices.
    pub fn induced(&self, keep: &[usize]) -> (MolGraph, Vec<Option<usize>>) {
        let mut map = vec![None; self.atoms.len()];
        let mut g = MolGraph::new();
        for &v in keep {
            map[v] = Some(g.add_atom(self.atoms[v].clone()));
        }
        for b in &self.bonds {
            if let (Some(u), Some(v)) = (map[b.u], map[b.v]) {
                g.push_bond(Bond { u, v, ..*b }).expect("induced bonds are valid");
            }
        }
        (g, map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> MolGraph {
        let mut g = MolGraph::new();
        for _ in 0..n {
            g.add_atom(Atom::new(Element::C));
        }
        for i in 1..n {
            g.add_bond(i - 1, i, BondOrder::Single).unwrap();
        }
        g
    }

    #[test]
    fn rejects_bad_bonds() {
        let mut g = chain(3);
        assert_eq!(g.add_bond(0, 0, BondOrder::Single), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            g.add_bond(1, 0, BondOrder::Double),
            Err(GraphError::DuplicateBond(0, 1))
        );
        assert_eq!(g.add_bond(0, 7, BondOrder::Single), Err(GraphError::AtomOutOfRange(7)));
    }

    #[test]
    fn remove_bond_reindexes() {
        let mut g = chain(4);
        g.remove_bond(0);
        assert_eq!(g.bond_count(), 2);
        assert_eq!(g.bond_between(0, 1), None);
        assert_eq!(g.bond_between(2, 3), Some(1));
        assert_eq!(g.degree(0), 0);
    }

    #[test]
    fn permutation_preserves_structure() {
        let g = chain(4);
        let p = g.permuted(&[3, 1, 0, 2]);
        assert!(p.bond_between(3, 1).is_some());
        assert!(p.bond_between(1, 0).is_some());
        assert!(p.bond_between(0, 2).is_some());
        assert_eq!(p.bond_count(), 3);
    }
}
