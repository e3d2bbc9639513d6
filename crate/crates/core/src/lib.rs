//! Periodic polymer graphs from P-SMILES.

pub mod context;
pub mod element;
pub mod graph;
pub mod matrix;
pub mod nets;
pub mod polymer;
pub mod psmiles;
pub mod rng;
pub mod rsit;
pub mod wl;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/psmiles.md")]
    mod psmiles {}
    #[doc = include_str!("../../../book/src/star-linking.md")]
    mod star_linking {}
    #[doc = include_str!("../../../book/src/wl.md")]
    mod wl {}
    #[doc = include_str!("../../../book/src/attention.md")]
    mod attention {}
    #[doc = include_str!("../../../book/src/reference-nets.md")]
    mod reference_nets {}
    #[doc = include_str!("../../../book/src/rsit.md")]
    mod rsit {}
}
