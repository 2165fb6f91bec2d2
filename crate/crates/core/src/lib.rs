//! Executable set-theoretic constructions around Casson-handle trees.
//!
//! The crate is organised bottom-up:
//!
//! - [`tree`]: signed rooted trees, generators for the infinite families,
//!   the tree DSL, truncation and embeddings.
//! - [`order`]: forcing posets induced by trees, compatibility,
//!   separativity and density.
//! - [`ro`]: regular-open completion of finite posets, the clopen algebra
//!   of Cantor space and the ternary coding of branches.
//! - [`cohen`]: Cohen conditions, a catalogue of dense sets and the
//!   deterministic construction of generic prefixes.
//! - [`pfin`]: eventually periodic subsets of ℕ modulo finite sets and
//!   almost permutations acting on them.
//! - [`nonstd`]: nonstandard naturals as eventually polynomial sequences
//!   modulo the Fréchet filter.
//! - [`casson`]: the handle-level operations tying the layers together.
//!
//! The guide in `book/` walks through each layer; its code listings are
//! compiled and run as doctests of this crate.

pub mod bits;
pub mod casson;
pub mod cohen;
pub mod nonstd;
pub mod order;
pub mod pfin;
pub mod ro;
pub mod tree;

pub use bits::BitString;

/// Default upper bound on the number of elements a completion may
/// materialize.
pub const DEFAULT_ELEMENT_CAP: u64 = 1 << 16;

/// Environment variable overriding [`DEFAULT_ELEMENT_CAP`].
pub const CAP_ENV_VAR: &str = "HANDLE_FORCING_CAP";

/// Reads the element cap from the environment, falling back to the default.
pub fn element_cap_from_env() -> u64 {
    std::env::var(CAP_ENV_VAR)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ELEMENT_CAP)
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/trees.md")]
    mod trees {}
    #[doc = include_str!("../../../book/src/posets.md")]
    mod posets {}
    #[doc = include_str!("../../../book/src/completion.md")]
    mod completion {}
    #[doc = include_str!("../../../book/src/cantor.md")]
    mod cantor {}
    #[doc = include_str!("../../../book/src/cohen.md")]
    mod cohen {}
    #[doc = include_str!("../../../book/src/pfin.md")]
    mod pfin {}
    #[doc = include_str!("../../../book/src/nonstandard.md")]
    mod nonstandard {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
