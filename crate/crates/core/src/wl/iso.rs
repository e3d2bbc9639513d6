use std::collections::VecDeque;

use thiserror::Error;

use super::{atom_colors, wl_compare};
use crate::graph::MolGraph;

/// Largest graph the backtracking oracle accepts.
pub const MAX_ISO_ATOMS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsoError {
    #[error("graph has {0} atoms, above the {MAX_ISO_ATOMS}-atom search cap")]
    BudgetExceeded(usize),
}

/// Attributed isomorphism test. On success returns `map` with `map[v]` the
/// image in `g2` of atom `v` of `g1`.
///
/// ```
/// use polyseq::psmiles::parse;
/// use polyseq::wl::isomorphic;
/// let a = parse("*CONO*").unwrap().graph;
/// let b = parse("*ONOC*").unwrap().graph;
/// assert!(isomorphic(&a, &b).unwrap().is_some());
/// ```
pub fn isomorphic(g1: &MolGraph, g2: &MolGraph) -> Result<Option<Vec<usize>>, IsoError> {
    isomorphic_colored(g1, &atom_colors(g1), g2, &atom_colors(g2))
}

/// Isomorphism that must also map initial color `c1[v]` onto `c2[map[v]]`.
pub fn isomorphic_colored(
    g1: &MolGraph,
    c1: &[u64],
    g2: &MolGraph,
    c2: &[u64],
) -> Result<Option<Vec<usize>>, IsoError> {
    for n in [g1.atom_count(), g2.atom_count()] {
        if n > MAX_ISO_ATOMS {
            return Err(IsoError::BudgetExceeded(n));
        }
    }
    let n = g1.atom_count();
    if n != g2.atom_count() || g1.bond_count() != g2.bond_count() {
        return Ok(None);
    }
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    let (r1, r2) = wl_compare(g1, c1, g2, c2);
    if r1.histogram != r2.histogram {
        return Ok(None);
    }

    // BFS order from the rarest color so most atoms have a mapped neighbor
    // when their turn comes.
    let rarest = (0..n)
        .min_by_key(|&v| r1.histogram.iter().find(|(c, _)| *c == r1.colors[v]).map(|&(_, k)| k))
        .expect("non-empty");
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in std::iter::once(rarest).chain(0..n) {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, _) in g1.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }

    let mut s = State {
        g1,
        g2,
        col1: &r1.colors,
        col2: &r2.colors,
        order,
        map: vec![usize::MAX; n],
        used: vec![false; n],
    };
    Ok(s.extend(0).then_some(s.map))
}

struct State<'a> {
    g1: &'a MolGraph,
    g2: &'a MolGraph,
    col1: &'a [u64],
    col2: &'a [u64],
    order: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
}

impl State<'_> {
    fn feasible(&self, v: usize, w: usize) -> bool {
        if self.used[w] || self.col1[v] != self.col2[w] {
            return false;
        }
        let mut mapped = 0;
        for &(u, b) in self.g1.neighbors(v) {
            let mu = self.map[u];
            if mu == usize::MAX {
                continue;
            }
            mapped += 1;
            match self.g2.bond_between(w, mu) {
                Some(b2) if self.g2.bond(b2).order == self.g1.bond(b).order => {}
                _ => return false,
            }
        }
        let images = self.g2.neighbors(w).iter().filter(|&&(x, _)| self.used[x]).count();
        images == mapped
    }

    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let v = self.order[depth];
        let anchor = self
            .g1
            .neighbors(v)
            .iter()
            .map(|&(u, _)| self.map[u])
            .find(|&m| m != usize::MAX);
        let candidates: Vec<usize> = match anchor {
            Some(m) => self.g2.neighbors(m).iter().map(|&(x, _)| x).collect(),
            None => (0..self.g2.atom_count()).collect(),
        };
        for w in candidates {
            if self.feasible(v, w) {
                self.map[v] = w;
                self.used[w] = true;
                if self.extend(depth + 1) {
                    return true;
                }
                self.map[v] = usize::MAX;
                self.used[w] = false;
            }
        }
        false
    }
}
