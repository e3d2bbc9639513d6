//! P-SMILES text: lexing, parsing, writing, canonical keys and the random
//! repeat/translation augmentation.
//!
//! A P-SMILES string is a SMILES string with exactly two `*` endpoints. The
//! atoms bonded to the first and second `*` become the head and tail
//! boundary atoms of the parsed [`MonomerGraph`](crate::polymer::MonomerGraph);
//! the stars themselves are not graph nodes.

mod augment;
mod key;
mod parser;
mod writer;

pub use augment::{
    random_augment, random_augment_traced, random_translation, repeat, repeat_monomer, translate, translation_cuts,
    AugmentTrace, Cut,
};
pub use key::{canonical_form, monomer_polymer_key, polymer_key, star_link_form};
pub use parser::parse;
pub use writer::write;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unclosed branch")]
    UnclosedBranch,
    #[error("unmatched ')'")]
    UnmatchedParen,
    #[error("empty branch")]
    EmptyBranch,
    #[error("unclosed ring bond {0}")]
    UnclosedRing(u32),
    #[error("ring bond closes on its own atom")]
    RingSelfLoop,
    #[error("conflicting bond symbols on ring bond {0}")]
    RingBondConflict(u32),
    #[error("duplicate bond")]
    DuplicateBond,
    #[error("bond symbol without a following atom")]
    DanglingBond,
    #[error("expected an atom")]
    MissingAtom,
    #[error("malformed bracket atom")]
    BadBracket,
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("element {0} cannot be aromatic")]
    NotAromatic(String),
    #[error("multi-component strings ('.') are not supported")]
    Dot,
    #[error("expected exactly two '*' endpoints, found {0}")]
    StarCount(usize),
    #[error("'*' must be a leaf bonded to one atom")]
    StarNotLeaf,
    #[error("'*' must be bonded by a single bond")]
    StarBondOrder,
    #[error("'*' cannot carry charge, hydrogens or isotope")]
    StarAttributes,
    #[error("empty string")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("illegal character {ch:?} at position {pos}")]
    Lex { pos: usize, ch: char },
    #[error("parse error at position {pos}: {kind}")]
    Parse { pos: usize, kind: ParseErrorKind },
    #[error("graph is disconnected after removing the endpoints")]
    Disconnected,
}
