use std::collections::{HashSet, VecDeque};

use super::MolGraph;

/// Distance sentinel for unreachable atoms.
pub const UNREACHABLE: usize = usize::MAX;

/// Hop distances from `src`; link edges are followed only when `use_link`.
pub fn bfs_distances(g: &MolGraph, src: usize, use_link: bool) -> Vec<usize> {
    let mut dist = vec![UNREACHABLE; g.atom_count()];
    let mut queue = VecDeque::new();
    dist[src] = 0;
    queue.push_back(src);
    while let Some(v) = queue.pop_front() {
        for &(w, b) in g.neighbors(v) {
            if !use_link && g.bond(b).link {
                continue;
            }
            if dist[w] == UNREACHABLE {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

pub fn all_pairs_distances(g: &MolGraph) -> Vec<Vec<usize>> {
    (0..g.atom_count()).map(|s| bfs_distances(g, s, true)).collect()
}

pub fn is_connected(g: &MolGraph) -> bool {
    g.atom_count() == 0 || bfs_distances(g, 0, true).iter().all(|&d| d != UNREACHABLE)
}

/// Shortest `src`→`dst` path (link edges excluded) whose sequence of
/// `rank` values is lexicographically smallest.
pub fn ranked_shortest_path(g: &MolGraph, src: usize, dst: usize, rank: &[usize]) -> Option<Vec<usize>> {
    let to_dst = bfs_distances(g, dst, false);
    if to_dst[src] == UNREACHABLE {
        return None;
    }
    let mut path = vec![src];
    let mut cur = src;
    while cur != dst {
        let next = g
            .neighbors(cur)
            .iter()
            .filter(|&&(w, b)| !g.bond(b).link && to_dst[w] + 1 == to_dst[cur])
            .map(|&(w, _)| w)
            .min_by_key(|&w| rank[w])?;
        path.push(next);
        cur = next;
    }
    Some(path)
}

/// Bridge flag per bond, computed on the graph with link edges removed
/// unless `use_link`. Link bonds themselves are reported as non-bridges when
/// they are skipped.
pub fn bridges(g: &MolGraph, use_link: bool) -> Vec<bool> {
    let n = g.atom_count();
    let mut is_bridge = vec![false; g.bond_count()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // Stack of (vertex, parent bond, next neighbor cursor).
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (v, parent_bond, ref mut cursor)) = stack.last_mut() {
            if let Some(&(w, b)) = g.neighbors(v).get(*cursor) {
                *cursor += 1;
                if Some(b) == parent_bond || (!use_link && g.bond(b).link) {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, Some(b), 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let (Some(b), Some(&(p, _, _))) = (parent_bond, stack.last()) {
                    low[p] = low[p].min(low[v]);
                    if low[v] > disc[p] {
                        is_bridge[b] = true;
                    }
                }
            }
        }
    }
    is_bridge
}

fn component_count(g: &MolGraph, use_link: bool) -> usize {
    let mut seen = vec![false; g.atom_count()];
    let mut count = 0;
    for s in 0..g.atom_count() {
        if seen[s] {
            continue;
        }
        count += 1;
        let dist = bfs_distances(g, s, use_link);
        for (v, d) in dist.iter().enumerate() {
            if *d != UNREACHABLE {
                seen[v] = true;
            }
        }
    }
    count
}

/// Dimension of the cycle space, |E| - |V| + components, ignoring link
/// edges.
pub fn cyclomatic_number(g: &MolGraph) -> usize {
    let edges = g.bonds().iter().filter(|b| !b.link).count();
    edges + component_count(g, false) - g.atom_count()
}

struct Candidate {
    atoms: Vec<usize>,
    edges: Vec<u64>,
    key: (usize, Vec<usize>),
}

/// Smallest set of smallest rings (a minimum cycle basis) over non-link
/// bonds. Each ring is returned as its sorted atom indices. Ties between
/// equal-length rings are broken by `rank`, so the choice is independent of
/// atom numbering whenever `rank` is canonical.
pub fn sssr(g: &MolGraph, rank: &[usize]) -> Vec<Vec<usize>> {
    let target = cyclomatic_number(g);
    if target == 0 {
        return Vec::new();
    }
    let n = g.atom_count();
    let words = g.bond_count().div_ceil(64);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut candidates = Vec::new();

    for root in 0..n {
        // BFS tree with lowest-rank parents.
        let dist = bfs_distances(g, root, false);
        let mut parent = vec![None; n];
        for v in 0..n {
            if v == root || dist[v] == UNREACHABLE {
                continue;
            }
            parent[v] = g
                .neighbors(v)
                .iter()
                .filter(|&&(w, b)| !g.bond(b).link && dist[w] + 1 == dist[v])
                .min_by_key(|&&(w, _)| rank[w])
                .map(|&(w, b)| (w, b));
        }
        let path = |mut v: usize| {
            let mut atoms = vec![v];
            let mut bonds = Vec::new();
            while let Some((p, b)) = parent[v] {
                atoms.push(p);
                bonds.push(b);
                v = p;
            }
            (atoms, bonds)
        };
        for (bi, bond) in g.bonds().iter().enumerate() {
            let (x, y) = (bond.u, bond.v);
            if bond.link || dist[x] == UNREACHABLE || dist[y] == UNREACHABLE {
                continue;
            }
            if parent[x].map(|p| p.1) == Some(bi) || parent[y].map(|p| p.1) == Some(bi) {
                continue;
            }
            let (px, bx) = path(x);
            let (py, by) = path(y);
            let sx: HashSet<usize> = px.iter().copied().collect();
            if py.iter().filter(|v| sx.contains(v)).count() != 1 {
                continue;
            }
            let mut edges = vec![0u64; words];
            for &b in bx.iter().chain(by.iter()).chain(std::iter::once(&bi)) {
                edges[b / 64] |= 1 << (b % 64);
            }
            if !seen.insert(edges.clone()) {
                continue;
            }
            let mut atoms: Vec<usize> = px.into_iter().chain(py).collect();
            atoms.sort_unstable();
            atoms.dedup();
            let mut ranks: Vec<usize> = atoms.iter().map(|&a| rank[a]).collect();
            ranks.sort_unstable();
            candidates.push(Candidate {
                key: (atoms.len(), ranks),
                atoms,
                edges,
            });
        }
    }
    candidates.sort_by(|a, b| a.key.cmp(&b.key));

    let nbits = g.bond_count();
    let mut basis: Vec<Option<Vec<u64>>> = vec![None; nbits];
    let mut rings = Vec::new();
    for cand in candidates {
        let mut v = cand.edges.clone();
        for p in (0..nbits).rev() {
            if v[p / 64] >> (p % 64) & 1 == 1 {
                if let Some(b) = &basis[p] {
                    for (x, y) in v.iter_mut().zip(b) {
                        *x ^= y;
                    }
                }
            }
        }
        if let Some(p) = (0..nbits).rev().find(|&p| v[p / 64] >> (p % 64) & 1 == 1) {
            basis[p] = Some(v);
            rings.push(cand.atoms);
            if rings.len() == target {
                break;
            }
        }
    }
    rings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::Element;
    use crate::graph::{Atom, BondOrder};

    fn graph(n: usize, edges: &[(usize, usize)]) -> MolGraph {
        let mut g = MolGraph::new();
        for _ in 0..n {
            g.add_atom(Atom::new(Element::C));
        }
        for &(u, v) in edges {
            g.add_bond(u, v, BondOrder::Single).unwrap();
        }
        g
    }

    #[test]
    fn path_distances() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(bfs_distances(&g, 0, true), vec![0, 1, 2]);
    }

    #[test]
    fn bridges_of_ring_with_tail() {
        // triangle 0-1-2 plus tail 2-3
        let g = graph(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]);
        assert_eq!(bridges(&g, true), vec![false, false, false, true]);
    }

    #[test]
    fn naphthalene_sssr_has_two_six_rings() {
        let g = graph(
            10,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 0),
                (4, 6),
                (6, 7),
                (7, 8),
                (8, 9),
                (9, 5),
            ],
        );
        let rank: Vec<usize> = (0..10).collect();
        let rings = sssr(&g, &rank);
        assert_eq!(rings.len(), 2);
        assert!(rings.iter().all(|r| r.len() == 6));
    }

    #[test]
    fn cubane_sssr_has_five_four_rings() {
        let g = graph(
            8,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 0),
                (4, 5),
                (5, 6),
                (6, 7),
                (7, 4),
                (0, 4),
                (1, 5),
                (2, 6),
                (3, 7),
            ],
        );
        let rank: Vec<usize> = (0..8).collect();
        let rings = sssr(&g, &rank);
        assert_eq!(cyclomatic_number(&g), 5);
        assert_eq!(rings.len(), 5);
        assert!(rings.iter().all(|r| r.len() == 4));
    }

    #[test]
    fn ranked_path_prefers_low_rank() {
        // square 0-1-3, 0-2-3
        let g = graph(4, &[(0, 1), (1, 3), (0, 2), (2, 3)]);
        assert_eq!(ranked_shortest_path(&g, 0, 3, &[0, 5, 1, 2]), Some(vec![0, 2, 3]));
        assert_eq!(ranked_shortest_path(&g, 0, 3, &[0, 1, 5, 2]), Some(vec![0, 1, 3]));
    }
}
