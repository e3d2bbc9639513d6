//! Monomer graphs, star-linking graphs and the baseline star strategies.
//!
//! A monomer is one repeat unit with two boundary atoms. Its infinite
//! polymer bonds the tail of every copy to the head of the next. The
//! star-linking graph closes the monomer on itself with a single bond from
//! tail to head, which makes every atom see exactly the neighborhood it has
//! in the infinite chain.

mod backbone;
mod dump;
mod features;
mod rings;

pub use backbone::{backbone_mask, detect_backbone};
pub use dump::{DumpAtom, DumpBond, DumpMeta, GraphDump};
pub use features::{
    apply_backbone_embedding, featurize, implicit_hydrogens, in_ring_atoms, ATOM_FEATURE_DIM, ELEMENT_CLASSES,
    FEATURE_SCHEMA_VERSION,
};
pub use rings::{ring_count, ring_stats, RingStats};

use std::fmt;
use std::str::FromStr;

use crate::element::Element;
use crate::graph::{bfs_distances, canonical_labeling, is_connected, Atom, Bond, BondOrder, GraphError, MolGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct MonomerGraph {
    pub graph: MolGraph,
    pub head: usize,
    pub tail: usize,
    /// Stereo marks were present in the source string and dropped.
    pub stereo_discarded: bool,
}

impl MonomerGraph {
    pub fn new(graph: MolGraph, head: usize, tail: usize) -> Result<MonomerGraph, GraphError> {
        let n = graph.atom_count();
        if head >= n {
            return Err(GraphError::AtomOutOfRange(head));
        }
        if tail >= n {
            return Err(GraphError::AtomOutOfRange(tail));
        }
        if !is_connected(&graph) {
            return Err(GraphError::Disconnected);
        }
        Ok(MonomerGraph {
            graph,
            head,
            tail,
            stereo_discarded: false,
        })
    }

    pub fn atom_count(&self) -> usize {
        self.graph.atom_count()
    }

    /// Hop distance between the boundary atoms inside the monomer.
    pub fn boundary_distance(&self) -> usize {
        bfs_distances(&self.graph, self.head, false)[self.tail]
    }

    /// Open chain of `k` copies; copy `i` tail is bonded to copy `i + 1`
    /// head. Copy `c` atom `j` has index `c * n + j`.
    pub fn repeated(&self, k: usize) -> MonomerGraph {
        assert!(k >= 1, "repeat count must be positive");
        let n = self.atom_count();
        let mut g = self.graph.clone();
        for c in 1..k {
            let offset = g.append(&self.graph);
            g.add_bond((c - 1) * n + self.tail, offset + self.head, BondOrder::Single)
                .expect("junction joins distinct copies");
        }
        MonomerGraph {
            graph: g,
            head: self.head,
            tail: (k - 1) * n + self.tail,
            stereo_discarded: self.stereo_discarded,
        }
    }

    /// Attribute keys with boundary tags appended (bit 0 head, bit 1 tail).
    pub fn tagged_keys(&self) -> Vec<Vec<u8>> {
        self.graph
            .atoms()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mut k = a.key_bytes();
                k.push((i == self.head) as u8 | ((i == self.tail) as u8) << 1);
                k
            })
            .collect()
    }

    /// Canonical rank of every atom, boundary-aware. Isomorphic monomers
    /// (boundaries mapped to boundaries) get corresponding ranks up to
    /// automorphism.
    pub fn canonical_ranks(&self) -> Vec<usize> {
        canonical_labeling(&self.tagged_keys(), &self.graph.labeled_adjacency()).labels
    }
}

/// Open-chain unroll of `k` monomer copies, without wraparound.
pub fn unroll(g: &MonomerGraph, k: usize) -> MolGraph {
    g.repeated(k).graph
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarLinkGraph {
    /// The (possibly auto-repeated) monomer the link closes.
    pub base: MonomerGraph,
    /// `base.graph` plus the link bond.
    pub graph: MolGraph,
    pub link_edge: (usize, usize),
    pub link_bond: usize,
    pub backbone: Vec<bool>,
    /// Number of monomer copies in `base`.
    pub repeat_k: usize,
}

/// Links the boundary atoms of `g`. When the boundaries coincide or are
/// already bonded the monomer is first repeated, with the smallest count
/// that makes them distinct and non-adjacent, so the link never merges into
/// an existing bond.
pub fn star_link(g: &MonomerGraph) -> StarLinkGraph {
    let mut k = 1;
    loop {
        let base = if k == 1 { g.clone() } else { g.repeated(k) };
        match link_base(base, k) {
            Ok(sl) => return sl,
            Err(_) => k += 1,
        }
    }
}

/// Links the boundary atoms without auto-repeat; fails when they coincide
/// or are adjacent.
pub fn star_link_raw(g: &MonomerGraph) -> Result<StarLinkGraph, GraphError> {
    link_base(g.clone(), 1)
}

fn link_base(base: MonomerGraph, k: usize) -> Result<StarLinkGraph, GraphError> {
    let mut graph = base.graph.clone();
    let link_bond = graph.push_bond(Bond {
        u: base.tail,
        v: base.head,
        order: BondOrder::Single,
        link: true,
    })?;
    let backbone = backbone_mask(&base);
    Ok(StarLinkGraph {
        link_edge: (base.head, base.tail),
        link_bond,
        graph,
        backbone,
        repeat_k: k,
        base,
    })
}

/// Smallest `k` whose `k`-fold repeat has boundary distance
/// `k * d_b + (k - 1)` greater than `2 * d_thres - 1`.
pub fn lga_repeat_count(boundary_distance: usize, d_thres: usize) -> usize {
    assert!(d_thres >= 1, "d_thres must be positive");
    let need = 2 * d_thres - 1;
    let mut k = 1;
    while k * boundary_distance + (k - 1) <= need {
        k += 1;
    }
    k
}

/// Repeats `g` until its boundary distance exceeds `2 * d_thres - 1`, the
/// condition under which localized attention on the star-linking graph
/// matches the infinite polymer.
pub fn auto_repeat_for_lga(g: &MonomerGraph, d_thres: usize) -> (MonomerGraph, usize) {
    let k = lga_repeat_count(g.boundary_distance(), d_thres);
    let out = if k == 1 { g.clone() } else { g.repeated(k) };
    (out, k)
}

/// How the polymer endpoints are presented to a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// `*` endpoints kept as pseudo-atoms.
    Keep,
    /// Endpoints dropped; the bare monomer.
    Remove,
    /// Endpoints capped with hydrogen atoms.
    Substitute,
    /// Boundary atoms linked to each other.
    Link,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Keep, Strategy::Remove, Strategy::Substitute, Strategy::Link];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Keep => "keep",
            Strategy::Remove => "remove",
            Strategy::Substitute => "substitute",
            Strategy::Link => "link",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Strategy, String> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown strategy {s:?} (expected keep, remove, substitute or link)"))
    }
}

/// Graph handed to a model for one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyGraph {
    pub strategy: Strategy,
    pub graph: MolGraph,
    pub backbone: Vec<bool>,
    /// Copies of the source monomer at the front of `graph` (atoms
    /// `0..repeat_k * n`).
    pub repeat_k: usize,
}

pub fn strategy_transform(g: &MonomerGraph, strategy: Strategy) -> StrategyGraph {
    match strategy {
        Strategy::Link => {
            let sl = star_link(g);
            StrategyGraph {
                strategy,
                graph: sl.graph,
                backbone: sl.backbone,
                repeat_k: sl.repeat_k,
            }
        }
        Strategy::Remove => StrategyGraph {
            strategy,
            graph: g.graph.clone(),
            backbone: backbone_mask(g),
            repeat_k: 1,
        },
        Strategy::Keep | Strategy::Substitute => {
            let cap = if strategy == Strategy::Keep {
                Element::DUMMY
            } else {
                Element::H
            };
            let mut graph = g.graph.clone();
            let mut backbone = backbone_mask(g);
            for end in [g.head, g.tail] {
                let c = graph.add_atom(Atom::new(cap));
                graph.add_bond(end, c, BondOrder::Single).expect("cap is a fresh atom");
                backbone.push(false);
            }
            StrategyGraph {
                strategy,
                graph,
                backbone,
                repeat_k: 1,
            }
        }
    }
}
