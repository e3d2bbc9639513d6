use std::collections::{BTreeSet, HashMap};

use crate::graph::{ranked_shortest_path, Atom, BondOrder, MolGraph};
use crate::polymer::MonomerGraph;

fn atom_token(a: &Atom) -> String {
    let bare = a.hydrogens.is_none()
        && a.charge == 0
        && a.isotope.is_none()
        && a.element.is_organic_subset()
        && (!a.aromatic || a.element.is_aromatic_capable());
    let symbol = if a.aromatic {
        a.element.symbol().to_ascii_lowercase()
    } else {
        a.element.symbol().to_string()
    };
    if bare {
        return symbol;
    }
    let mut out = String::from("[");
    if let Some(i) = a.isotope {
        out.push_str(&i.to_string());
    }
    out.push_str(&symbol);
    match a.hydrogens {
        Some(0) | None => {}
        Some(1) => out.push('H'),
        Some(h) => out.push_str(&format!("H{h}")),
    }
    match a.charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        q if q > 0 => out.push_str(&format!("+{q}")),
        q => out.push_str(&format!("-{}", -q)),
    }
    out.push(']');
    out
}

fn bond_token(g: &MolGraph, u: usize, v: usize) -> &'static str {
    let both_aromatic = g.atom(u).aromatic && g.atom(v).aromatic;
    let b = g.bond_between(u, v).expect("tree and ring edges are bonds");
    match (g.bond(b).order, both_aromatic) {
        (BondOrder::Single, true) => "-",
        (BondOrder::Single, false) => "",
        (BondOrder::Double, _) => "=",
        (BondOrder::Triple, _) => "#",
        (BondOrder::Aromatic, true) => "",
        (BondOrder::Aromatic, false) => ":",
    }
}

fn ring_label(d: usize) -> String {
    if d < 10 {
        d.to_string()
    } else {
        format!("%{d}")
    }
}

struct Plan<'a> {
    g: &'a MolGraph,
    rank: Vec<usize>,
    /// Position of each atom on the main chain.
    path_pos: Vec<Option<usize>>,
    path: Vec<usize>,
    children: Vec<Vec<usize>>,
    preorder: Vec<usize>,
    visited: Vec<bool>,
    tree_parent: Vec<Option<usize>>,
}

impl Plan<'_> {
    fn dfs(&mut self, v: usize) {
        self.visited[v] = true;
        let succ = self.path_pos[v].and_then(|i| self.path.get(i + 1).copied());
        let mut side: Vec<usize> = self
            .g
            .neighbors(v)
            .iter()
            .map(|&(w, _)| w)
            .filter(|&w| self.path_pos[w].is_none())
            .collect();
        side.sort_by_key(|&w| self.rank[w]);
        for w in side.into_iter().chain(succ) {
            if !self.visited[w] {
                self.tree_parent[w] = Some(v);
                self.children[v].push(w);
                self.dfs(w);
            }
        }
    }
}

/// Writes a monomer graph as P-SMILES.
///
/// The output is deterministic and depends only on the isomorphism class of
/// the monomer with its boundary atoms: the main chain is the shortest
/// head-to-tail path, side chains are ordered by canonical rank, and the
/// second `*` follows the tail.
///
/// ```
/// use polyseq::psmiles::{parse, write};
/// assert_eq!(write(&parse("*CONO*").unwrap()), "*CONO*");
/// assert_eq!(write(&parse("*C(CC*)C").unwrap()), "*C(C)CC*");
/// ```
pub fn write(m: &MonomerGraph) -> String {
    let g = &m.graph;
    let n = g.atom_count();
    let rank = m.canonical_ranks();
    let path = ranked_shortest_path(g, m.head, m.tail, &rank).expect("monomer is connected");
    let mut path_pos = vec![None; n];
    for (i, &v) in path.iter().enumerate() {
        path_pos[v] = Some(i);
    }
    let mut plan = Plan {
        g,
        rank,
        path_pos,
        path,
        children: vec![Vec::new(); n],
        preorder: vec![0; n],
        visited: vec![false; n],
        tree_parent: vec![None; n],
    };
    plan.dfs(m.head);

    // Emission order is the DFS preorder.
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![m.head];
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend(plan.children[v].iter().rev());
    }
    for (i, &v) in order.iter().enumerate() {
        plan.preorder[v] = i;
    }

    // Non-tree bonds become ring closures.
    let mut ring_partners = vec![Vec::new(); n];
    for b in g.bonds() {
        let tree = plan.tree_parent[b.u] == Some(b.v) || plan.tree_parent[b.v] == Some(b.u);
        if !tree {
            ring_partners[b.u].push(b.v);
            ring_partners[b.v].push(b.u);
        }
    }

    let mut out = String::from("*");
    let mut digits_of = HashMap::new();
    let mut free: BTreeSet<usize> = (1..100).collect();

    emit(
        &plan,
        m.head,
        m.tail,
        &ring_partners,
        &mut digits_of,
        &mut free,
        &mut out,
    );
    out.push('*');
    out
}

fn emit(
    plan: &Plan<'_>,
    v: usize,
    tail: usize,
    ring_partners: &[Vec<usize>],
    digits_of: &mut HashMap<(usize, usize), usize>,
    free: &mut BTreeSet<usize>,
    out: &mut String,
) {
    let g = plan.g;
    out.push_str(&atom_token(g.atom(v)));

    let mut closes: Vec<usize> = ring_partners[v]
        .iter()
        .copied()
        .filter(|&w| plan.preorder[w] < plan.preorder[v])
        .collect();
    closes.sort_by_key(|&w| plan.preorder[w]);
    for w in closes {
        let d = digits_of
            .remove(&(w, v))
            .expect("ring bond was opened at its earlier atom");
        out.push_str(&ring_label(d));
        free.insert(d);
    }
    let mut opens: Vec<usize> = ring_partners[v]
        .iter()
        .copied()
        .filter(|&w| plan.preorder[w] > plan.preorder[v])
        .collect();
    opens.sort_by_key(|&w| plan.preorder[w]);
    for w in opens {
        let d = free.pop_first().expect("fewer than 100 open ring bonds");
        digits_of.insert((v, w), d);
        out.push_str(bond_token(g, v, w));
        out.push_str(&ring_label(d));
    }

    let kids = &plan.children[v];
    for (i, &w) in kids.iter().enumerate() {
        let last = i + 1 == kids.len();
        let inline = last && v != tail;
        if !inline {
            out.push('(');
        }
        out.push_str(bond_token(g, v, w));
        emit(plan, w, tail, ring_partners, digits_of, free, out);
        if !inline {
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psmiles::parse;

    fn round(s: &str) -> String {
        write(&parse(s).unwrap())
    }

    #[test]
    fn simple_chains() {
        assert_eq!(round("*CONO*"), "*CONO*");
        assert_eq!(round("*C*"), "*C*");
        assert_eq!(round("*CC(C)*"), "*CC(C)*");
    }

    #[test]
    fn side_chain_before_main_chain() {
        assert_eq!(round("*C(CC*)C"), "*C(C)CC*");
    }

    #[test]
    fn aromatic_tokens() {
        assert_eq!(round("*c1ccc(cc1)*"), "*c(cc1)ccc1*");
        assert_eq!(round("*c1ccc(cc1)-c1ccc(cc1)*"), "*c(cc1)ccc1-c(cc1)ccc1*");
    }

    #[test]
    fn bracket_tokens() {
        assert_eq!(atom_token(&parse("*[NH3+]*").unwrap().graph.atom(0).clone()), "[NH3+]");
        assert_eq!(atom_token(&parse("*[13C]*").unwrap().graph.atom(0).clone()), "[13C]");
        assert_eq!(atom_token(&parse("*[O-2]*").unwrap().graph.atom(0).clone()), "[O-2]");
        assert_eq!(atom_token(&parse("*[se]*").unwrap().graph.atom(0).clone()), "[se]");
        assert_eq!(atom_token(&parse("*[Si]*").unwrap().graph.atom(0).clone()), "[Si]");
    }
}
