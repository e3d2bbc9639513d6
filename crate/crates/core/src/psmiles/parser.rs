use std::collections::{BTreeMap, HashSet};

use super::{ParseErrorKind, SmilesError};
use crate::element::Element;
use crate::graph::{Atom, BondOrder, MolGraph};
use crate::polymer::MonomerGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BondSym {
    Single,
    Double,
    Triple,
    Aromatic,
    /// `/` or `\`: a single bond with a discarded stereo mark.
    Directional,
}

impl BondSym {
    fn order(self) -> BondOrder {
        match self {
            BondSym::Single | BondSym::Directional => BondOrder::Single,
            BondSym::Double => BondOrder::Double,
            BondSym::Triple => BondOrder::Triple,
            BondSym::Aromatic => BondOrder::Aromatic,
        }
    }
}

#[derive(Debug)]
enum Node {
    Atom(Atom),
    Star,
}

#[derive(Debug)]
struct Edge {
    u: usize,
    v: usize,
    sym: Option<BondSym>,
    pos: usize,
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    stereo: bool,
}

fn parse_err(pos: usize, kind: ParseErrorKind) -> SmilesError {
    SmilesError::Parse { pos, kind }
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn lex_err(&self) -> SmilesError {
        SmilesError::Lex {
            pos: self.pos,
            ch: self.chars[self.pos],
        }
    }

    fn digits(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        self.chars[start..self.pos].iter().collect::<String>().parse().ok()
    }

    fn organic_atom(&mut self) -> Result<Node, SmilesError> {
        let c = self.peek().expect("caller checked");
        let two = match (c, self.peek_at(1)) {
            ('C', Some('l')) => Some(Element::CL),
            ('B', Some('r')) => Some(Element::BR),
            _ => None,
        };
        if let Some(e) = two {
            self.pos += 2;
            return Ok(Node::Atom(Atom::new(e)));
        }
        let atom = match c {
            'B' => Atom::new(Element::B),
            'C' => Atom::new(Element::C),
            'N' => Atom::new(Element::N),
            'O' => Atom::new(Element::O),
            'P' => Atom::new(Element::P),
            'S' => Atom::new(Element::S),
            'F' => Atom::new(Element::F),
            'I' => Atom::new(Element::I),
            'b' => Atom::aromatic(Element::B),
            'c' => Atom::aromatic(Element::C),
            'n' => Atom::aromatic(Element::N),
            'o' => Atom::aromatic(Element::O),
            'p' => Atom::aromatic(Element::P),
            's' => Atom::aromatic(Element::S),
            _ => return Err(self.lex_err()),
        };
        self.pos += 1;
        Ok(Node::Atom(atom))
    }

    fn bracket_atom(&mut self) -> Result<Node, SmilesError> {
        let open = self.pos;
        self.pos += 1;
        let bad = |pos| parse_err(pos, ParseErrorKind::BadBracket);
        let isotope = match self.digits() {
            Some(i) => Some(u16::try_from(i).map_err(|_| bad(open))?),
            None => None,
        };

        let sym_pos = self.pos;
        let (element, aromatic) = match self.peek() {
            Some('*') => {
                self.pos += 1;
                (None, false)
            }
            Some(c) if c.is_ascii_uppercase() => {
                let two = self
                    .peek_at(1)
                    .filter(|d| d.is_ascii_lowercase())
                    .and_then(|d| Element::from_symbol(&format!("{c}{d}")));
                match two {
                    Some(e) => {
                        self.pos += 2;
                        (Some(e), false)
                    }
                    None => {
                        let e = Element::from_symbol(&c.to_string())
                            .ok_or_else(|| parse_err(sym_pos, ParseErrorKind::UnknownElement(c.to_string())))?;
                        self.pos += 1;
                        (Some(e), false)
                    }
                }
            }
            Some(c) if c.is_ascii_lowercase() => {
                let pair: String = [Some(c), self.peek_at(1)].into_iter().flatten().collect();
                let (sym, len) = if pair == "se" || pair == "as" {
                    (pair, 2)
                } else {
                    (c.to_string(), 1)
                };
                let mut upper = sym.clone();
                upper[..1].make_ascii_uppercase();
                let e = Element::from_symbol(&upper)
                    .ok_or_else(|| parse_err(sym_pos, ParseErrorKind::UnknownElement(sym.clone())))?;
                if !e.is_aromatic_capable() {
                    return Err(parse_err(sym_pos, ParseErrorKind::NotAromatic(sym)));
                }
                self.pos += len;
                (Some(e), true)
            }
            Some(_) => return Err(bad(self.pos)),
            None => return Err(bad(open)),
        };

        if self.peek() == Some('@') {
            self.stereo = true;
            while self.peek() == Some('@') {
                self.pos += 1;
            }
        }

        let mut hydrogens = 0u8;
        if self.peek() == Some('H') {
            self.pos += 1;
            hydrogens = match self.digits() {
                Some(h) => u8::try_from(h).map_err(|_| bad(self.pos))?,
                None => 1,
            };
        }

        let mut charge = 0i32;
        if let Some(sign @ ('+' | '-')) = self.peek() {
            let unit = if sign == '+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.digits() {
                charge = unit * n as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    charge += unit;
                }
            }
        }
        let charge = i8::try_from(charge).map_err(|_| bad(open))?;

        if self.peek() == Some(':') {
            self.pos += 1;
            self.digits().ok_or_else(|| bad(self.pos))?;
        }
        if self.peek() != Some(']') {
            return Err(bad(self.pos));
        }
        self.pos += 1;

        match element {
            None => {
                if isotope.is_some() || hydrogens != 0 || charge != 0 {
                    return Err(parse_err(open, ParseErrorKind::StarAttributes));
                }
                Ok(Node::Star)
            }
            Some(element) => Ok(Node::Atom(Atom {
                element,
                aromatic,
                charge,
                hydrogens: Some(hydrogens),
                isotope,
            })),
        }
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<(BondSym, usize)> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        // ring number -> (atom, bond symbol, position)
        let mut rings: BTreeMap<u32, (usize, Option<BondSym>, usize)> = BTreeMap::new();

        while let Some(c) = self.peek() {
            let here = self.pos;
            match c {
                '(' => {
                    let p = prev.ok_or_else(|| parse_err(here, ParseErrorKind::MissingAtom))?;
                    if pending.is_some() {
                        return Err(parse_err(here, ParseErrorKind::DanglingBond));
                    }
                    if self.peek_at(1) == Some(')') {
                        return Err(parse_err(here, ParseErrorKind::EmptyBranch));
                    }
                    branches.push((p, here));
                    self.pos += 1;
                }
                ')' => {
                    let (p, _) = branches
                        .pop()
                        .ok_or_else(|| parse_err(here, ParseErrorKind::UnmatchedParen))?;
                    if pending.is_some() {
                        return Err(parse_err(here, ParseErrorKind::DanglingBond));
                    }
                    prev = Some(p);
                    self.pos += 1;
                }
                '-' | '=' | '#' | ':' | '/' | '\\' => {
                    if prev.is_none() {
                        return Err(parse_err(here, ParseErrorKind::MissingAtom));
                    }
                    if pending.is_some() {
                        return Err(parse_err(here, ParseErrorKind::MissingAtom));
                    }
                    let sym = match c {
                        '-' => BondSym::Single,
                        '=' => BondSym::Double,
                        '#' => BondSym::Triple,
                        ':' => BondSym::Aromatic,
                        _ => {
                            self.stereo = true;
                            BondSym::Directional
                        }
                    };
                    pending = Some((sym, here));
                    self.pos += 1;
                }
                '0'..='9' | '%' => {
                    let p = prev.ok_or_else(|| parse_err(here, ParseErrorKind::MissingAtom))?;
                    let num = if c == '%' {
                        let (Some(a), Some(b)) = (self.peek_at(1), self.peek_at(2)) else {
                            return Err(parse_err(here, ParseErrorKind::MissingAtom));
                        };
                        if !a.is_ascii_digit() || !b.is_ascii_digit() {
                            return Err(parse_err(here, ParseErrorKind::MissingAtom));
                        }
                        self.pos += 3;
                        a.to_digit(10).unwrap() * 10 + b.to_digit(10).unwrap()
                    } else {
                        self.pos += 1;
                        c.to_digit(10).unwrap()
                    };
                    let sym = pending.take().map(|(s, _)| s);
                    match rings.remove(&num) {
                        None => {
                            rings.insert(num, (p, sym, here));
                        }
                        Some((q, open_sym, _)) => {
                            if q == p {
                                return Err(parse_err(here, ParseErrorKind::RingSelfLoop));
                            }
                            let sym = match (open_sym, sym) {
                                (Some(a), Some(b)) if a.order() != b.order() => {
                                    return Err(parse_err(here, ParseErrorKind::RingBondConflict(num)));
                                }
                                (a, b) => a.or(b),
                            };
                            self.edges.push(Edge {
                                u: q,
                                v: p,
                                sym,
                                pos: here,
                            });
                        }
                    }
                }
                '.' => return Err(parse_err(here, ParseErrorKind::Dot)),
                '*' | '[' | 'A'..='Z' | 'a'..='z' => {
                    let node = match c {
                        '*' => {
                            self.pos += 1;
                            Node::Star
                        }
                        '[' => self.bracket_atom()?,
                        _ => self.organic_atom()?,
                    };
                    let idx = self.nodes.len();
                    self.nodes.push(node);
                    if let Some(p) = prev {
                        self.edges.push(Edge {
                            u: p,
                            v: idx,
                            sym: pending.take().map(|(s, _)| s),
                            pos: here,
                        });
                    }
                    prev = Some(idx);
                }
                _ => return Err(self.lex_err()),
            }
        }

        if let Some((_, pos)) = pending {
            return Err(parse_err(pos, ParseErrorKind::DanglingBond));
        }
        if let Some(&(_, pos)) = branches.last() {
            return Err(parse_err(pos, ParseErrorKind::UnclosedBranch));
        }
        if let Some((&num, &(_, _, pos))) = rings.iter().next() {
            return Err(parse_err(pos, ParseErrorKind::UnclosedRing(num)));
        }
        if self.nodes.is_empty() {
            return Err(parse_err(0, ParseErrorKind::Empty));
        }
        Ok(())
    }
}

/// Parses a P-SMILES string into a monomer graph.
///
/// ```
/// let m = polyseq::psmiles::parse("*CONO*").unwrap();
/// assert_eq!(m.atom_count(), 4);
/// assert_eq!((m.head, m.tail), (0, 3));
/// ```
pub fn parse(s: &str) -> Result<MonomerGraph, SmilesError> {
    let chars: Vec<char> = s.trim().chars().collect();
    if let Some(pos) = chars.iter().position(|c| !c.is_ascii()) {
        return Err(SmilesError::Lex { pos, ch: chars[pos] });
    }
    let mut p = Parser {
        chars,
        pos: 0,
        nodes: Vec::new(),
        edges: Vec::new(),
        stereo: false,
    };
    p.run()?;

    let stars: Vec<usize> = (0..p.nodes.len())
        .filter(|&i| matches!(p.nodes[i], Node::Star))
        .collect();
    let end = p.chars.len();
    if stars.len() != 2 {
        return Err(parse_err(end, ParseErrorKind::StarCount(stars.len())));
    }

    let mut map = vec![usize::MAX; p.nodes.len()];
    let mut graph = MolGraph::new();
    for (i, node) in p.nodes.iter().enumerate() {
        if let Node::Atom(a) = node {
            map[i] = graph.add_atom(a.clone());
        }
    }

    let mut boundary = [usize::MAX; 2];
    let mut seen = HashSet::new();
    for e in &p.edges {
        if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
            return Err(parse_err(e.pos, ParseErrorKind::DuplicateBond));
        }
        let star_end = stars.iter().position(|&s| s == e.u || s == e.v);
        if let Some(which) = star_end {
            let other = if stars[which] == e.u { e.v } else { e.u };
            if matches!(p.nodes[other], Node::Star) || boundary[which] != usize::MAX {
                return Err(parse_err(e.pos, ParseErrorKind::StarNotLeaf));
            }
            if e.sym.is_some_and(|s| s.order() != BondOrder::Single) {
                return Err(parse_err(e.pos, ParseErrorKind::StarBondOrder));
            }
            boundary[which] = map[other];
            continue;
        }
        let (u, v) = (map[e.u], map[e.v]);
        let order = match e.sym {
            Some(s) => s.order(),
            None if graph.atom(u).aromatic && graph.atom(v).aromatic => BondOrder::Aromatic,
            None => BondOrder::Single,
        };
        graph
            .add_bond(u, v, order)
            .map_err(|_| parse_err(e.pos, ParseErrorKind::DuplicateBond))?;
    }
    if boundary.contains(&usize::MAX) {
        return Err(parse_err(end, ParseErrorKind::StarNotLeaf));
    }

    let mut m = MonomerGraph::new(graph, boundary[0], boundary[1]).map_err(|_| SmilesError::Disconnected)?;
    m.stereo_discarded = p.stereo;
    Ok(m)
}
