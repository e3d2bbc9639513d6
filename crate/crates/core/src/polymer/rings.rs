use serde::Serialize;

use super::MonomerGraph;
use crate::graph::cyclomatic_number;
use crate::psmiles::{parse, SmilesError};

/// Number of rings of a monomer: the cyclomatic number of the monomer graph
/// (no star link).
pub fn ring_count(m: &MonomerGraph) -> usize {
    cyclomatic_number(&m.graph)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingStats {
    pub polymers: usize,
    pub mean_rings: f64,
    /// Fraction of polymers with more than two rings.
    pub frac_more_than_two: f64,
    /// `(1-based line number, message)` for lines that failed to parse.
    pub skipped: Vec<(usize, String)>,
}

/// Ring statistics over corpus lines. Blank lines and `#` comments are
/// ignored; unparsable lines are skipped and reported.
pub fn ring_stats<'a>(lines: impl IntoIterator<Item = &'a str>) -> RingStats {
    let mut counts = Vec::new();
    let mut skipped = Vec::new();
    for (i, line) in lines.into_iter().enumerate() {
        let s = line.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        match parse(s) {
            Ok(m) => counts.push(ring_count(&m)),
            Err(e) => skipped.push((i + 1, SmilesError::to_string(&e))),
        }
    }
    let n = counts.len();
    let (mean, frac) = if n == 0 {
        (0.0, 0.0)
    } else {
        (
            counts.iter().sum::<usize>() as f64 / n as f64,
            counts.iter().filter(|&&c| c > 2).count() as f64 / n as f64,
        )
    };
    RingStats {
        polymers: n,
        mean_rings: mean,
        frac_more_than_two: frac,
        skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acyclic_and_single_ring() {
        let s = ring_stats(["*CONO*"]);
        assert_eq!((s.mean_rings, s.frac_more_than_two), (0.0, 0.0));
        let s = ring_stats(["*CC(c1ccccc1)*"]);
        assert_eq!((s.mean_rings, s.frac_more_than_two), (1.0, 0.0));
    }

    #[test]
    fn skips_bad_lines() {
        let s = ring_stats(["# header", "*C(*", "", "*C1CC1*"]);
        assert_eq!(s.polymers, 1);
        assert_eq!(s.skipped.len(), 1);
        assert_eq!(s.skipped[0].0, 2);
    }
}
