//! Canonical labeling by individualization and refinement.
//!
//! Vertices start in cells ordered by their attribute key; cells are split by
//! ordered color refinement; non-discrete partitions branch on every member
//! of the first non-singleton cell. The canonical labeling is the leaf whose
//! relabeled edge list is lexicographically smallest. Members of a cell that
//! are structural twins (same labeled neighborhood) are interchangeable by a
//! transposition automorphism, so only one of them is branched on.

use std::collections::BTreeSet;

/// Upper bound on search leaves; beyond it the best leaf found so far is
/// returned and `exhaustive` is false.
const LEAF_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalLabeling {
    /// `labels[v]` is the canonical position of vertex `v`.
    pub labels: Vec<usize>,
    /// Byte certificate; equal for two inputs iff they are isomorphic
    /// (when both searches were exhaustive).
    pub certificate: Vec<u8>,
    pub exhaustive: bool,
}

type EdgeList = Vec<(u32, u32, u8)>;

struct Search<'a> {
    adj: &'a [Vec<(usize, u8)>],
    best: Option<(EdgeList, Vec<u32>)>,
    leaves: usize,
}

fn dense_rank<K: Ord + Clone>(keys: &[K]) -> (Vec<u32>, usize) {
    let distinct: BTreeSet<K> = keys.iter().cloned().collect();
    let sorted: Vec<K> = distinct.into_iter().collect();
    let ranks = keys
        .iter()
        .map(|k| sorted.binary_search(k).expect("key present") as u32)
        .collect();
    (ranks, sorted.len())
}

fn refine(adj: &[Vec<(usize, u8)>], colors: &mut Vec<u32>) {
    let mut cells = colors.iter().collect::<BTreeSet<_>>().len();
    loop {
        let sigs: Vec<(u32, Vec<(u8, u32)>)> = adj
            .iter()
            .enumerate()
            .map(|(v, list)| {
                let mut nb: Vec<(u8, u32)> = list.iter().map(|&(w, l)| (l, colors[w])).collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let (next, count) = dense_rank(&sigs);
        *colors = next;
        if count == cells {
            return;
        }
        cells = count;
    }
}

impl Search<'_> {
    fn leaf_edges(&self, colors: &[u32]) -> EdgeList {
        let mut edges: EdgeList = Vec::new();
        for (v, list) in self.adj.iter().enumerate() {
            for &(w, l) in list {
                if v < w {
                    let (a, b) = (colors[v], colors[w]);
                    edges.push((a.min(b), a.max(b), l));
                }
            }
        }
        edges.sort_unstable();
        edges
    }

    fn twins(&self, u: usize, v: usize) -> bool {
        let strip = |x: usize, other: usize| {
            let mut l: Vec<(usize, u8)> = self.adj[x].iter().copied().filter(|&(w, _)| w != other).collect();
            l.sort_unstable();
            l
        };
        strip(u, v) == strip(v, u)
    }

    fn run(&mut self, mut colors: Vec<u32>) {
        refine(self.adj, &mut colors);
        let n = colors.len();
        let mut sizes = vec![0usize; n];
        for &c in &colors {
            sizes[c as usize] += 1;
        }
        let Some(target) = (0..n).find(|&c| sizes[c] > 1) else {
            self.leaves += 1;
            let edges = self.leaf_edges(&colors);
            if self.best.as_ref().is_none_or(|(b, _)| edges < *b) {
                self.best = Some((edges, colors));
            }
            return;
        };
        let members: Vec<usize> = (0..n).filter(|&v| colors[v] as usize == target).collect();
        let mut reps: Vec<usize> = Vec::new();
        for &m in &members {
            if !reps.iter().any(|&r| self.twins(r, m)) {
                reps.push(m);
            }
        }
        for r in reps {
            if self.leaves >= LEAF_BUDGET && self.best.is_some() {
                return;
            }
            let keys: Vec<(u32, bool)> = (0..n).map(|v| (colors[v], v != r)).collect();
            let (next, _) = dense_rank(&keys);
            self.run(next);
        }
    }
}

/// Canonically labels a vertex-colored, edge-labeled graph. `keys` are the
/// vertex attribute encodings; `adj` lists `(neighbor, edge label)` pairs and
/// must be symmetric.
pub fn canonical_labeling(keys: &[Vec<u8>], adj: &[Vec<(usize, u8)>]) -> CanonicalLabeling {
    assert_eq!(keys.len(), adj.len());
    let n = keys.len();
    let (initial, _) = dense_rank(keys);
    let mut search = Search {
        adj,
        best: None,
        leaves: 0,
    };
    if n > 0 {
        search.run(initial);
    }
    let exhaustive = search.leaves < LEAF_BUDGET;
    let (edges, colors) = search.best.unwrap_or_default();
    let labels: Vec<usize> = colors.iter().map(|&c| c as usize).collect();

    let mut order = vec![0usize; n];
    for (v, &l) in labels.iter().enumerate() {
        order[l] = v;
    }
    let mut certificate = Vec::new();
    certificate.extend((n as u32).to_le_bytes());
    for &v in &order {
        certificate.extend((keys[v].len() as u32).to_le_bytes());
        certificate.extend(&keys[v]);
    }
    certificate.extend((edges.len() as u32).to_le_bytes());
    for (a, b, l) in edges {
        certificate.extend(a.to_le_bytes());
        certificate.extend(b.to_le_bytes());
        certificate.push(l);
    }
    CanonicalLabeling {
        labels,
        certificate,
        exhaustive,
    }
}
