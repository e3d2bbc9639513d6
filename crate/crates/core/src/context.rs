//! Attention inputs of a graph: hop distances, shortest-path bond codes and
//! the locality mask `dist < d_thres`.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{bfs_distances, BondOrder, MolGraph, UNREACHABLE};
use crate::polymer::{unroll, MonomerGraph};

/// Number of bond-order codes used in path features.
pub const PATH_CODES: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("graph is not connected")]
    Disconnected,
    #[error("d_thres must be at least 1")]
    InvalidThreshold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionContext {
    pub n: usize,
    pub d_thres: usize,
    pub dist: Vec<Vec<usize>>,
    /// Bond codes along one shortest path per pair, found by walking back
    /// from `j` through the lowest-index predecessor.
    pub path_edges: Vec<Vec<Vec<u8>>>,
    /// Per pair, the share of each bond code on its shortest paths,
    /// averaged over all shortest paths between the pair. Zero on the
    /// diagonal.
    pub path_features: Vec<Vec<[f64; PATH_CODES]>>,
    pub local_mask: Vec<Vec<bool>>,
}

fn code(g: &MolGraph, b: usize) -> u8 {
    // link and junction bonds are single bonds
    g.bond(b).order.code()
}

/// Distances, paths and path features from one source.
fn from_source(g: &MolGraph, src: usize) -> (Vec<usize>, Vec<Vec<u8>>, Vec<[f64; PATH_CODES]>) {
    let n = g.atom_count();
    let dist = bfs_distances(g, src, true);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| dist[v]);

    let mut count = vec![0.0f64; n];
    let mut sums = vec![[0.0f64; PATH_CODES]; n];
    let mut paths = vec![Vec::new(); n];
    count[src] = 1.0;
    for &v in &order {
        if v == src || dist[v] == UNREACHABLE {
            continue;
        }
        let mut best_pred: Option<(usize, usize)> = None;
        for &(p, b) in g.neighbors(v) {
            if dist[p] + 1 != dist[v] {
                continue;
            }
            let c = code(g, b) as usize;
            count[v] += count[p];
            let from = sums[p];
            for (s, f) in sums[v].iter_mut().zip(from) {
                *s += f;
            }
            sums[v][c] += count[p];
            if best_pred.is_none_or(|(q, _)| p < q) {
                best_pred = Some((p, b));
            }
        }
        if let Some((p, b)) = best_pred {
            let mut path = paths[p].clone();
            path.push(code(g, b));
            paths[v] = path;
        }
    }
    let feats = (0..n)
        .map(|v| {
            let d = dist[v];
            if d == 0 || d == UNREACHABLE {
                return [0.0; PATH_CODES];
            }
            let denom = count[v] * d as f64;
            let mut f = [0.0; PATH_CODES];
            for k in 0..PATH_CODES {
                f[k] = sums[v][k] / denom;
            }
            f
        })
        .collect();
    (dist, paths, feats)
}

/// Builds the attention context of a connected graph.
///
/// ```
/// use polyseq::context::build_context;
/// use polyseq::polymer::star_link;
/// use polyseq::psmiles::parse;
/// let ring = star_link(&parse("*CONO*").unwrap()).graph;
/// let ctx = build_context(&ring, 2).unwrap();
/// assert!(ctx.local_mask.iter().all(|row| row.iter().filter(|&&m| m).count() == 3));
/// ```
pub fn build_context(g: &MolGraph, d_thres: usize) -> Result<AttentionContext, ContextError> {
    if d_thres == 0 {
        return Err(ContextError::InvalidThreshold);
    }
    let n = g.atom_count();
    let mut dist = Vec::with_capacity(n);
    let mut path_edges = Vec::with_capacity(n);
    let mut path_features = Vec::with_capacity(n);
    for i in 0..n {
        let (d, p, f) = from_source(g, i);
        if d.contains(&UNREACHABLE) {
            return Err(ContextError::Disconnected);
        }
        dist.push(d);
        path_edges.push(p);
        path_features.push(f);
    }
    let local_mask = dist
        .iter()
        .map(|row| row.iter().map(|&d| d < d_thres).collect())
        .collect();
    Ok(AttentionContext {
        n,
        d_thres,
        dist,
        path_edges,
        path_features,
        local_mask,
    })
}

/// Context of the open-chain unroll of `k` copies.
pub fn periodic_context(g: &MonomerGraph, k: usize, d_thres: usize) -> Result<AttentionContext, ContextError> {
    build_context(&unroll(g, k), d_thres)
}

fn folded_row(ctx: &AttentionContext, i: usize, n: usize) -> Vec<(usize, usize)> {
    let mut row: Vec<(usize, usize)> = (0..ctx.n)
        .filter(|&j| ctx.local_mask[i][j])
        .map(|j| (j % n, ctx.dist[i][j]))
        .collect();
    row.sort_unstable();
    row
}

/// Compares masked rows after folding atom indices modulo the monomer size
/// `n`: every star-link row against the row of the same atom in the middle
/// copy of the unroll. Returns the first mismatching monomer atom.
pub fn fold_compare(star: &AttentionContext, unrolled: &AttentionContext, n: usize) -> Result<(), usize> {
    let mid = unrolled.n / n / 2;
    for j in 0..n {
        let expect = folded_row(unrolled, mid * n + j, n);
        for c in 0..star.n / n {
            if folded_row(star, c * n + j, n) != expect {
                return Err(j);
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ContextDump {
    pub n: usize,
    pub d_thres: usize,
    pub dist: Vec<Vec<usize>>,
    /// One string of `0`/`1` per row.
    pub mask: Vec<String>,
    pub path_edges: Vec<Vec<Vec<&'static str>>>,
}

fn code_name(c: u8) -> &'static str {
    match BondOrder::ALL[c as usize] {
        BondOrder::Single => "single",
        BondOrder::Double => "double",
        BondOrder::Triple => "triple",
        BondOrder::Aromatic => "aromatic",
    }
}

impl AttentionContext {
    pub fn dump(&self) -> ContextDump {
        ContextDump {
            n: self.n,
            d_thres: self.d_thres,
            dist: self.dist.clone(),
            mask: self
                .local_mask
                .iter()
                .map(|r| r.iter().map(|&m| if m { '1' } else { '0' }).collect())
                .collect(),
            path_edges: self
                .path_edges
                .iter()
                .map(|r| r.iter().map(|p| p.iter().map(|&c| code_name(c)).collect()).collect())
                .collect(),
        }
    }
}
